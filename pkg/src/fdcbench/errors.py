"""Exception hierarchy shared by every module."""


class FDCError(Exception):
    pass


class MetricAxiomViolation(FDCError):
    pass


class DisconnectedGraph(FDCError):
    pass


class EmptySet(FDCError):
    pass


class AmbientMismatch(FDCError):
    pass


class BadK(FDCError):
    pass


class InvalidInput(FDCError):
    pass


class FamilyMismatch(FDCError):
    pass


class ScaleOrderViolation(FDCError):
    pass


class TargetClash(FDCError):
    pass


class NotSeparated(FDCError):
    def __init__(self, msg, parts=None, points=None):
        super().__init__(msg)
        self.parts = parts
        self.points = points


class ModulusMissing(FDCError):
    pass


class ScaleCollapse(FDCError):
    pass


class NotSubspace(FDCError):
    pass


class TooLarge(FDCError):
    pass


class NotFound(FDCError):
    pass


class BudgetExceeded(FDCError):
    pass


class MalformedElement(FDCError):
    pass


class NoPeripherals(FDCError):
    pass


class LeavesWindow(FDCError):
    def __init__(self, msg, point=None):
        super().__init__(msg)
        self.point = point


class WindowTooSmall(FDCError):
    pass


class ScaleMismatch(FDCError):
    pass


class MissingFiber(FDCError):
    pass


class TranslateFailure(FDCError):
    pass

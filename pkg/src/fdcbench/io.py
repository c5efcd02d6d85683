"""JSON and DOT serialization of spaces, certificates and pipeline reports.

Certificates carry a top-level ``spaces`` registry keyed by space id;
subspaces refer to it as ``{"ambient": id, "pts": [...]}``.  Group spaces
are stored by their spec and rebuilt (distances recomputed) on load.
"""
from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from .errors import InvalidInput
from .groups import enumerate_ball, spec_from_json, spec_to_json, word_space
from .metric import Subspace, build_space, graph_metric
from .witness import (Bounded, ClosureOf, DecompositionChain, DecompositionWitness,
                      Explicit, FamilyWitness)


def _num(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, np.floating):
        return float(x)
    return x


def _unnum(x):
    if isinstance(x, str):
        return Fraction(x)
    return x


# ------------------------------------------------------------------ spaces

def space_to_json(space):
    out = {"id": space.id, "points": list(space.points)}
    window = space.extra.get("window")
    if window is not None:
        out["group"] = spec_to_json(window.spec)
        out["relative"] = {"N": window.N, "max_syllables": window.max_syllables}
        return out
    spec = space.extra.get("group")
    if spec is not None:
        out["group"] = spec_to_json(spec)
        return out
    if space.graph_edges is not None:
        out["edges"] = [[u, v] for u, v in space.graph_edges]
        return out
    n = len(space.points)
    M = space.matrix
    out["dist"] = [[space.points[i], space.points[j], _num(M[i, j])]
                   for i in range(n) for j in range(i + 1, n)]
    return out


def space_from_json(obj, validate=True):
    try:
        sid, pts = obj["id"], obj["points"]
    except KeyError as err:
        raise InvalidInput(f"space JSON lacks {err}") from None
    if "group" in obj:
        spec = spec_from_json(obj["group"])
        rel = obj.get("relative")
        if rel is None:
            return word_space(spec, pts, sid)
        window = enumerate_ball(spec, rel["N"], max_syllables=rel.get("max_syllables"))
        space = window.rel_space()
        if space.id != sid or list(space.points) != list(pts):
            raise InvalidInput(f"relative space {sid} does not match its window")
        return space
    if "edges" in obj:
        return graph_metric(pts, [tuple(e) for e in obj["edges"]], id=sid)
    if "dist" in obj:
        triples = [(u, v, _unnum(d)) for u, v, d in obj["dist"]]
        return build_space(pts, triples, id=sid, validate=validate)
    raise InvalidInput(f"space {sid} has neither edges, dist nor group")


class Registry:
    """Spaces referenced by a certificate, keyed by id."""

    def __init__(self, spaces=None):
        self.spaces = dict(spaces or {})

    def add(self, space):
        prev = self.spaces.get(space.id)
        if prev is not None and prev is not space:
            if list(prev.points) != list(space.points):
                raise InvalidInput(f"two different spaces share the id {space.id!r}")
        self.spaces[space.id] = space
        return space.id

    def ref(self, S):
        return {"ambient": self.add(S.ambient), "pts": list(S.pts)}

    def sub(self, obj):
        try:
            amb = self.spaces[obj["ambient"]]
        except KeyError:
            raise InvalidInput(f"unknown ambient space {obj.get('ambient')!r}") from None
        return Subspace(amb, obj["pts"])

    def to_json(self):
        return {sid: space_to_json(sp) for sid, sp in self.spaces.items()}

    @classmethod
    def from_json(cls, obj):
        return cls({sid: space_from_json(s) for sid, s in (obj or {}).items()})


# ---------------------------------------------------------------- targets

def target_to_json(t, reg):
    if t is None:
        return None
    if isinstance(t, Bounded):
        return {"kind": "bounded", "D": _num(t.D)}
    kind = "explicit" if isinstance(t, Explicit) else "closure"
    return {"kind": kind, "members": [reg.ref(M) for M in t.members]}


def target_from_json(obj, reg):
    if obj is None:
        return None
    kind = obj.get("kind")
    if kind == "bounded":
        return Bounded(_unnum(obj["D"]))
    if kind in ("explicit", "closure"):
        members = [reg.sub(m) for m in obj["members"]]
        return Explicit(members) if kind == "explicit" else ClosureOf(members)
    raise InvalidInput(f"unknown target kind {kind!r}")


# ----------------------------------------------------------- certificates

def _witness_body(w, reg):
    return {"space": reg.ref(w.space), "k": w.k, "r": _num(w.r),
            "labels": [[p, c, i] for p, (c, i) in sorted(w.labels.items(), key=lambda kv: w.space.ambient.index[kv[0]])],
            "target": target_to_json(w.target, reg)}


def _witness_from_body(obj, reg):
    S = reg.sub(obj["space"])
    labels = {p: (int(c), int(i)) for p, c, i in obj["labels"]}
    return DecompositionWitness(S, int(obj["k"]), _unnum(obj["r"]), labels, target_from_json(obj.get("target"), reg))


def _family_body(fw, reg):
    return {"members": [reg.ref(M) for M in fw.members],
            "witnesses": [_witness_body(w, reg) for w in fw.witnesses],
            "k": fw.k, "r": _num(fw.r), "target": target_to_json(fw.target, reg)}


def _family_from_body(obj, reg):
    return FamilyWitness([reg.sub(m) for m in obj["members"]],
                         [_witness_from_body(w, reg) for w in obj["witnesses"]],
                         int(obj["k"]), _unnum(obj["r"]), target_from_json(obj.get("target"), reg))


def _chain_body(c, reg):
    return {"start": [reg.ref(M) for M in c.start],
            "steps": [_family_body(s, reg) for s in c.steps],
            "final_bound": _num(c.final_bound), "strict": c.strict}


def _chain_from_body(obj, reg):
    return DecompositionChain([reg.sub(m) for m in obj["start"]],
                              [_family_from_body(s, reg) for s in obj["steps"]],
                              _unnum(obj["final_bound"]), bool(obj.get("strict", True)))


_BODIES = {
    DecompositionWitness: ("witness", _witness_body),
    FamilyWitness: ("family", _family_body),
    DecompositionChain: ("chain", _chain_body),
}
_LOADERS = {"witness": _witness_from_body, "family": _family_from_body, "chain": _chain_from_body}


def cert_body(cert, reg):
    kind, body = _BODIES[type(cert)]
    out = body(cert, reg)
    out["type"] = kind
    return out


def cert_from_body(obj, reg):
    kind = obj.get("type")
    if kind not in _LOADERS:
        raise InvalidInput(f"unknown certificate type {kind!r}")
    return _LOADERS[kind](obj, reg)


def cert_to_json(cert):
    reg = Registry()
    body = cert_body(cert, reg)
    return {"type": body.pop("type"), "spaces": reg.to_json(), **body}


def cert_from_json(obj):
    reg = Registry.from_json(obj.get("spaces"))
    return cert_from_body(obj, reg)


# --------------------------------------------------------------- reports

def _report_json(rep):
    if rep is None:
        return None
    if hasattr(rep, "as_dict"):
        return rep.as_dict()
    return rep


def pipeline_report_to_json(report):
    reg = Registry()
    stages = []
    for st in report.stages:
        cert = st.certificate
        body = cert_body(cert, reg) if type(cert) in _BODIES else None
        stages.append({"name": st.name, "ok": st.ok, "error": st.error,
                       "certificate": body, "report": _report_json(st.report)})
    return {"type": "pipeline_report", "overall": report.overall,
            "parameters": report.parameters, "spaces": reg.to_json(), "stages": stages}


def report_certificates(obj):
    """(stage name, certificate) for every certificate embedded in a report JSON."""
    reg = Registry.from_json(obj.get("spaces"))
    return [(st["name"], cert_from_body(st["certificate"], reg))
            for st in obj["stages"] if st.get("certificate")]


def window_to_json(window, form="word"):
    """A group window as a space JSON, word metric or relative graph."""
    if form == "word":
        out = space_to_json(window.s_space())
    else:
        out = space_to_json(window.rel_space())
    out["window"] = {"N": window.N, "elements": len(window)}
    return out


def dump(obj, path):
    text = json.dumps(obj, indent=1, ensure_ascii=False, default=_num)
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def load(path):
    with open(path) as fh:
        return json.load(fh)


# -------------------------------------------------------------------- DOT

_PALETTE = ["#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462",
            "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd", "#ccebc5", "#ffed6f"]


def _q(x):
    return '"' + str(x).replace('"', '\\"') + '"'


def _node_lines(points, witness):
    lines = []
    for p in points:
        attrs = ""
        if witness is not None and p in witness.labels:
            c, i = witness.labels[p]
            attrs = f' [style=filled, fillcolor="{_PALETTE[c % len(_PALETTE)]}", group="{c}.{i}"]'
        lines.append(f"  {_q(p)}{attrs};")
    return lines


def window_to_dot(window, witness=None, name="relgraph"):
    """Relative graph: S-edges solid, H-edges dashed, pieces as fill groups."""
    names = window.names
    lines = [f"graph {_q(name)} {{", "  node [shape=circle, fontsize=9];"]
    lines += _node_lines(names, witness)
    s_pairs = set(window.s_edges)
    for t, u in window.s_edges:
        lines.append(f"  {_q(names[t])} -- {_q(names[u])};")
    for t, u, i in window.h_edges:
        if (min(t, u), max(t, u)) in s_pairs:
            continue
        lines.append(f"  {_q(names[t])} -- {_q(names[u])} [style=dashed, color=gray, label=\"H{i}\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def space_to_dot(space, witness=None, r=None, name=None):
    """Graph-backed spaces draw their edges; others draw pairs within ``r`` (default 1)."""
    lines = [f"graph {_q(name or space.id)} {{", "  node [shape=circle, fontsize=9];"]
    lines += _node_lines(space.points, witness)
    if space.graph_edges is not None:
        pairs = space.graph_edges
    else:
        lim = 1 if r is None else r
        M = space.matrix
        n = len(space.points)
        pairs = [(space.points[i], space.points[j]) for i in range(n) for j in range(i + 1, n) if M[i, j] <= lim]
    for u, v in pairs:
        lines.append(f"  {_q(u)} -- {_q(v)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def report_to_json_lines(rep, label=None):
    """One JSON line per violation plus a summary line."""
    lines = []
    for v in rep.violations:
        lines.append(json.dumps({"kind": v.kind, "message": v.message}, ensure_ascii=False))
    for child in rep.children:
        lines += report_to_json_lines(child)
    if label is not None:
        lines.append(json.dumps({"certificate": label, "valid": rep.valid}, ensure_ascii=False))
    return lines


__all__ = [
    "space_to_json", "space_from_json", "cert_to_json", "cert_from_json", "Registry",
    "pipeline_report_to_json", "report_certificates", "window_to_json", "dump", "load",
    "window_to_dot", "space_to_dot", "report_to_json_lines",
]

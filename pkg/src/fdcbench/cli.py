"""Command-line entry point.

Exit codes: 0 success / valid, 1 invalid certificate or failed rewrite,
2 usage or input error.  Certificates are re-verified before anything is
written; an invalid one is reported and never written.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import io
from .errors import FDCError, InvalidInput
from .groups import enumerate_ball, relative_ball, spec_from_json
from .metric import (CoarseMapWitness, Modulus, Subspace, complete_space,
                     cycle_space, graph_metric, grid_space, path_space)
from .pipeline import extend_group_chain
from .search import AUTO, EXHAUSTIVE, HEURISTIC, asdim_profile, heuristic_decompose, oracle_min_k
from .witness import (DecompositionChain, DecompositionWitness, FamilyWitness,
                      chain_from_kfold, family_witness, merge_union_witnesses,
                      pad_witness, restrict_to_subspace, string_chains,
                      transfer_along_embedding, union_assemble, verify_chain,
                      verify_family, verify_witness)

OK, INVALID, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _scales(text):
    try:
        sc = [int(x) if x.strip().lstrip("-").isdigit() else Fraction(x.strip()) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"scales must be comma-separated numbers, got {text!r}")
    if any(b <= a for a, b in zip(sc, sc[1:])):
        raise argparse.ArgumentTypeError(f"scales {sc} must be strictly increasing")
    return sc


def _load(path):
    try:
        return io.load(path)
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}")
    except json.JSONDecodeError as err:
        raise UsageError(f"{path} is not valid JSON: {err}")


def _load_spec(path):
    return spec_from_json(_load(path))


def verify_any(cert):
    if isinstance(cert, DecompositionWitness):
        return verify_witness(cert)
    if isinstance(cert, FamilyWitness):
        return verify_family(cert)
    return verify_chain(cert)


def _write_cert(cert, path):
    """The write gate: verify, then write; an invalid certificate is never written."""
    rep = verify_any(cert)
    if not rep.valid:
        for line in io.report_to_json_lines(rep, "output"):
            print(line)
        print("refusing to write an invalid certificate", file=sys.stderr)
        return INVALID
    io.dump(io.cert_to_json(cert), path)
    return OK


# ---------------------------------------------------------------- commands

def cmd_gen_space(a):
    if a.kind == "path":
        S = path_space(a.n)
    elif a.kind == "cycle":
        S = cycle_space(a.n)
    elif a.kind == "complete":
        S = complete_space(a.n)
    elif a.kind == "grid":
        S = grid_space(a.n, a.height)
    else:
        rng = np.random.default_rng(a.seed)
        edges = [(int(rng.integers(0, i)), i) for i in range(1, a.n)]
        for i in range(a.n):
            for j in range(i + 1, a.n):
                if rng.random() < a.p:
                    edges.append((i, j))
        S = graph_metric(range(a.n), sorted(set(edges)), id=f"G{a.n}s{a.seed}")
    io.dump(io.space_to_json(S), a.out)
    return OK


def cmd_gen_ball(a):
    W = enumerate_ball(_load_spec(a.spec), a.N)
    io.dump(io.window_to_json(W, a.form), a.out)
    return OK


def cmd_rel_ball(a):
    W = enumerate_ball(_load_spec(a.spec), a.N)
    B = relative_ball(W, a.n)
    io.dump(io.space_to_json(B.ambient), a.out)
    return OK


def _space(path):
    return io.space_from_json(_load(path))


def cmd_search(a):
    S = _space(a.space).whole()
    if a.mode == HEURISTIC or (a.mode == AUTO and len(S) > a.max_points):
        w = heuristic_decompose(S, a.r, a.D)
    else:
        _, w = oracle_min_k(S, a.r, a.D, max_k=a.max_k, max_points=a.max_points)
    if a.max_k is not None and w.k > a.max_k:
        print(json.dumps({"found": False, "k": w.k, "max_k": a.max_k}))
        return INVALID
    return _write_cert(w, a.out)


def cmd_profile(a):
    S = _space(a.space).whole()
    rule = (lambda r: a.d_factor * r) if a.D is None else (lambda r: a.D)
    rows = asdim_profile(S, a.scales, rule, mode=a.mode, max_points=a.max_points, max_k=a.max_k)
    out = {"space": S.ambient.id, "rows": [{"r": row.r, "D": row.D, "k": row.k, "mode": row.mode}
                                           for row in rows]}
    io.dump(out, a.out)
    return OK


def cmd_verify(a):
    obj = _load(a.cert)
    if obj.get("type") == "pipeline_report":
        certs = io.report_certificates(obj)
    else:
        certs = [("certificate", io.cert_from_json(obj))]
    ok = True
    for name, cert in certs:
        rep = verify_any(cert)
        ok &= rep.valid
        for line in io.report_to_json_lines(rep, name):
            print(line)
    if obj.get("type") == "pipeline_report" and not obj.get("overall", False):
        ok = False
    return OK if ok else INVALID


def _cert(path):
    return io.cert_from_json(_load(path))


def _as_family(cert):
    if isinstance(cert, DecompositionWitness):
        return family_witness([cert.space], [cert], cert.r, cert.target)
    if isinstance(cert, FamilyWitness):
        return cert
    raise InvalidInput("expected a witness or family witness")


def _embedding(path):
    obj = _load(path)
    reg = io.Registry.from_json(obj.get("spaces"))
    src = reg.spaces[obj["source"]]
    tgt = reg.spaces[obj["target"]]
    mp = {k: v for k, v in obj["map"]} if isinstance(obj["map"], list) else obj["map"]

    def mod(key):
        return Modulus(obj[key]) if obj.get(key) is not None else None
    return CoarseMapWitness(src, tgt, mp, mod("rho_plus"), mod("rho_minus"), bool(obj.get("contractive")))


def cmd_transform(a):
    ins = a.inputs or []

    def need(n):
        if len(ins) < n:
            raise UsageError(f"transform {a.kind} needs {n} --in file(s)")
    if a.kind == "chain-from-kfold":
        need(1)
        out = chain_from_kfold(_as_family(_cert(ins[0])))
    elif a.kind == "string":
        need(2)
        head, tail = _cert(ins[0]), _cert(ins[1])
        if not isinstance(head, DecompositionChain) or not isinstance(tail, DecompositionChain):
            raise InvalidInput("string needs two chains")
        out = string_chains(head, tail, a.scales)
    elif a.kind == "pad":
        need(1)
        if a.k is None:
            raise UsageError("pad needs --k")
        out = pad_witness(_cert(ins[0]), a.k)
    elif a.kind == "merge-union":
        need(2)
        out = merge_union_witnesses(_cert(ins[0]), _cert(ins[1]))
    elif a.kind == "union-assemble":
        if a.space is None or a.parts is None or a.r is None:
            raise UsageError("union-assemble needs --space, --parts and --r")
        S = _space(a.space)
        spec = _load(a.parts)
        out = union_assemble([Subspace(S, p) for p in spec["parts"]], Subspace(S, spec.get("Y", [])), a.r)
    elif a.kind == "transfer":
        need(1)
        if a.embedding is None:
            raise UsageError("transfer needs --embedding")
        out = transfer_along_embedding(_cert(ins[0]), _embedding(a.embedding))
    else:  # restrict
        need(1)
        if a.points is None:
            raise UsageError("restrict needs --points")
        w = _cert(ins[0])
        pts = _load(a.points)
        out = restrict_to_subspace(w, Subspace(w.space.ambient, pts))
    return _write_cert(out, a.out)


def cmd_rhg_demo(a):
    spec = _load_spec(a.spec)
    rep = extend_group_chain(spec, a.window, a.rel_radius, a.scales, D=a.D, t_max=a.t_max)
    io.dump(io.pipeline_report_to_json(rep), a.out)
    for st in rep.stages:
        print(json.dumps({"stage": st.name, "ok": st.ok, "error": st.error}, ensure_ascii=False))
    if a.emit_dot:
        W = enumerate_ball(spec, a.window)
        with open(a.emit_dot, "w") as fh:
            fh.write(io.window_to_dot(W))
    return OK if rep.overall else INVALID


def cmd_export_dot(a):
    w = _cert(a.witness) if a.witness else None
    if w is not None and not isinstance(w, DecompositionWitness):
        raise InvalidInput("export-dot colors pieces of a single witness")
    if a.spec:
        if a.N is None:
            raise UsageError("export-dot --spec needs --N")
        text = io.window_to_dot(enumerate_ball(_load_spec(a.spec), a.N), w)
    elif a.space:
        text = io.space_to_dot(_space(a.space), w, a.r)
    else:
        raise UsageError("export-dot needs --spec or --space")
    if a.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(a.out, "w") as fh:
            fh.write(text)
    return OK


# ------------------------------------------------------------------ parser

def build_parser():
    p = argparse.ArgumentParser(prog="fdcbench", description="Decomposition certificates for finite metric spaces and group windows.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-space", help="write a standard or random graph space")
    g.add_argument("--kind", choices=["path", "cycle", "complete", "grid", "random"], required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--height", type=int)
    g.add_argument("--p", type=float, default=0.2, help="extra-edge probability for random graphs")
    g.add_argument("--seed", type=int, default=0, help="only used by --kind random")
    g.add_argument("--out", default="-")
    g.set_defaults(func=cmd_gen_space)

    g = sub.add_parser("gen-ball", help="word-length ball of a group as a space")
    g.add_argument("--spec", required=True)
    g.add_argument("--N", type=int, required=True)
    g.add_argument("--form", choices=["word", "relative"], default="word")
    g.add_argument("--out", default="-")
    g.set_defaults(func=cmd_gen_ball)

    g = sub.add_parser("rel-ball", help="relative ball inside a window, with the word metric")
    g.add_argument("--spec", required=True)
    g.add_argument("--N", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--out", default="-")
    g.set_defaults(func=cmd_rel_ball)

    g = sub.add_parser("search", help="find a (k, r)-decomposition over Bounded(D)")
    g.add_argument("--space", required=True)
    g.add_argument("--r", type=int, required=True)
    g.add_argument("--D", type=int, required=True)
    g.add_argument("--max-k", type=int)
    g.add_argument("--max-points", type=int, default=12)
    g.add_argument("--mode", choices=[AUTO, EXHAUSTIVE, HEURISTIC], default=AUTO)
    g.add_argument("--out", default="-")
    g.set_defaults(func=cmd_search)

    g = sub.add_parser("profile", help="color counts over a list of scales")
    g.add_argument("--space", required=True)
    g.add_argument("--scales", type=_scales, required=True)
    g.add_argument("--D", type=int, help="fixed bound (default: D = d-factor * r)")
    g.add_argument("--d-factor", type=int, default=2)
    g.add_argument("--max-k", type=int)
    g.add_argument("--max-points", type=int, default=12)
    g.add_argument("--mode", choices=[AUTO, EXHAUSTIVE, HEURISTIC], default=AUTO)
    g.add_argument("--out", default="-")
    g.set_defaults(func=cmd_profile)

    g = sub.add_parser("verify", help="verify a witness, family, chain or pipeline report")
    g.add_argument("cert_pos", nargs="?", metavar="FILE")
    g.add_argument("--witness", "--cert", dest="cert")
    g.set_defaults(func=cmd_verify)

    g = sub.add_parser("transform", help="rewrite certificates")
    g.add_argument("kind", choices=["chain-from-kfold", "string", "pad", "merge-union",
                                    "union-assemble", "transfer", "restrict"])
    g.add_argument("--in", dest="inputs", action="append")
    g.add_argument("--out", required=True)
    g.add_argument("--k", type=int)
    g.add_argument("--r", type=int)
    g.add_argument("--scales", type=_scales, help="relabel the head's scales (string)")
    g.add_argument("--space")
    g.add_argument("--parts", help="JSON {\"parts\": [[...], ...], \"Y\": [...]}")
    g.add_argument("--embedding", help="JSON with source, target, map, rho_plus, rho_minus, spaces")
    g.add_argument("--points", help="JSON list of points")
    g.set_defaults(func=cmd_transform)

    g = sub.add_parser("rhg-demo", help="end-to-end chain for a free product window")
    g.add_argument("--spec", required=True)
    g.add_argument("--window", type=int, required=True)
    g.add_argument("--rel-radius", type=int, default=2)
    g.add_argument("--scales", type=_scales, default=[1, 2, 3, 5, 8])
    g.add_argument("--D", type=int)
    g.add_argument("--t-max", type=int)
    g.add_argument("--out", default="-")
    g.add_argument("--emit-dot")
    g.set_defaults(func=cmd_rhg_demo)

    g = sub.add_parser("export-dot", help="DOT drawing of a space or relative graph")
    g.add_argument("--spec")
    g.add_argument("--N", type=int)
    g.add_argument("--space")
    g.add_argument("--witness")
    g.add_argument("--r", type=int)
    g.add_argument("--out", default="-")
    g.set_defaults(func=cmd_export_dot)
    return p


def run(argv=None):
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    if a.command == "verify":
        a.cert = a.cert or a.cert_pos
        if a.cert is None:
            print("verify needs a certificate file", file=sys.stderr)
            return USAGE
    out = getattr(a, "out", None)
    if out not in (None, "-") and out in (getattr(a, "inputs", None) or []):
        print("input and output paths must differ", file=sys.stderr)
        return USAGE
    try:
        return a.func(a)
    except (UsageError, InvalidInput) as err:
        print(f"error: {err}", file=sys.stderr)
        return USAGE
    except FDCError as err:
        print(json.dumps({"error": type(err).__name__, "message": str(err)}, ensure_ascii=False))
        return INVALID


def main():
    sys.exit(run())

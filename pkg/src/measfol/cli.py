"""Command-line front end: ``measfol COMMAND [model] [options]``.

Exit status is 0 when every check passes, 1 when an invariant check fails
and 2 for bad input (with an error object on standard output).
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .approx import (
    circle_degree,
    circle_power_map,
    pullback_naturality_check,
    sampled_winding,
    simplicial_approximation,
    star_condition_check,
    torus_cover,
)
from .cancellation import (
    Exhaustion,
    balanced_pairs,
    cancel,
    cancel_with_exhaustion,
    euler_representative,
    leaf_lower_bound,
)
from .cochain import Cochain, boundary, coboundary, fundamental_cycle, kronecker
from .errors import BadParameters, MeasfolError
from .fields import (
    characteristic_field,
    difference_cochain,
    gauss_bonnet,
    leaf_values,
    levi_civita,
    obstruction_cocycle,
    poincare_hopf_check,
    random_direction_field,
)
from .formats import (
    cochain_from_json,
    cochain_to_json,
    complex_to_json,
    digest,
    dumps,
    field_from_json,
    field_to_json,
    load_model,
    write_ply,
)
from .generators import GENERATORS, all_generators, generate
from .hodge import betti_vector, euler_from_betti_check
from .measure import MeasuredComplex, chi_by_leaves, chi_mu
from .simplicial import euler_char, simplex_key

COMMANDS = ("chi", "gauss-bonnet", "obstruction", "index", "cancel", "hodge", "approx", "verify")


class Report:
    def __init__(self, command: str, model: str = "", inputs: str = ""):
        self.command = command
        self.model = model
        self.inputs = inputs
        self.results: Dict[str, Any] = {}
        self.checks: Dict[str, bool] = {}
        self.rows: List[Dict[str, Any]] = []
        self.timings: Dict[str, float] = {}
        self.ply: Optional[Tuple[MeasuredComplex, Dict, Dict]] = None

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def as_json(self, with_timings: bool = False) -> Dict[str, Any]:
        out = {"command": self.command, "model": self.model, "inputs": self.inputs,
               "results": self.results, "checks": self.checks, "passed": self.passed,
               "version": __version__}
        if with_timings:
            out["timings"] = self.timings
        return out


def _clean(x: float) -> float:
    """Drop floating noise so identical inputs give identical digits."""
    r = round(x, 12)
    return 0.0 if r == 0 else r


def _model(args) -> MeasuredComplex:
    if args.input and args.generate:
        raise BadParameters("give either --input or --generate, not both")
    if args.input:
        M = load_model(args.input)
        if args.weight is not None:
            if not args.weight > 0:
                raise BadParameters("weight must be positive")
            M = M.with_weights({leaf.leaf_id: args.weight for leaf in M.leaves})
        return M
    if args.generate:
        return generate(args.generate[0], args.generate[1:], args.weight)
    raise BadParameters("no model: use --input PATH or --generate NAME [ARGS]")


def _counts(M: MeasuredComplex) -> Dict[str, List[int]]:
    return {str(leaf.leaf_id): [leaf.count(p) for p in range(leaf.dim + 1)] for leaf in M.leaves}


# -- commands ------------------------------------------------------------------

def cmd_chi(M: MeasuredComplex, args, rep: Report) -> None:
    chi = chi_mu(M)
    rep.results = {"chi_mu": _clean(chi), "chi_by_leaves": _clean(chi_by_leaves(M)), "counts": _counts(M),
                   "ergodic_model": M.ergodic_model}
    rep.checks["chi_mu_equals_leaf_sum"] = math.isclose(chi, chi_by_leaves(M), rel_tol=1e-12, abs_tol=1e-12)
    for leaf in M.leaves:
        rep.rows.append({"leaf": leaf.leaf_id, "weight": M.measure[leaf.leaf_id],
                         "vertices": leaf.count(0), "edges": leaf.count(1), "faces": leaf.count(2),
                         "chi": euler_char(leaf)})


def cmd_gauss_bonnet(M: MeasuredComplex, args, rep: Report) -> None:
    leaves = []
    for leaf in M.leaves:
        geo = M.geometry_of(leaf.leaf_id)
        gb = gauss_bonnet(geo, args.tol or 1e-9)
        defects = geo.angle_defects()
        leaves.append({"id": leaf.leaf_id, "total_defect": _clean(gb.total_defect),
                       "expected": _clean(gb.expected), "defects": [_clean(defects[v]) for v in leaf.vertices]})
        rep.checks[f"leaf{leaf.leaf_id}_gauss_bonnet"] = gb.passed
        rep.rows.append({"leaf": leaf.leaf_id, "total_defect": _clean(gb.total_defect),
                         "two_pi_chi": _clean(gb.expected), "passed": gb.passed})
    rep.results = {"leaves": leaves}


def cmd_obstruction(M: MeasuredComplex, args, rep: Report) -> None:
    conn = levi_civita(M)
    if args.field:
        g = field_from_json(_read_json(args.field))
    else:
        g = random_direction_field(conn, np.random.default_rng(args.seed), args.max_period)
    c = obstruction_cocycle(g, conn)
    vals = leaf_values(c, conn)
    ph = poincare_hopf_check(M, g)
    hist = Counter(vals.values())
    rep.results = {"field": field_to_json(g), "cocycle": cochain_to_json(c),
                   "value_histogram": {str(k): hist[k] for k in sorted(hist)},
                   "weighted_index_sum": _clean(ph.rhs), "chi_mu": _clean(ph.lhs)}
    rep.checks["poincare_hopf"] = ph.passed
    for f, v in sorted(vals.items()):
        if v:
            rep.rows.append({"face": simplex_key(f), "winding": v})
    rep.ply = (M, vals, g.vertex_angles)


def _characteristic(M: MeasuredComplex, parallel: bool):
    def one(leaf):
        return characteristic_field(leaf, M.geometry_of(leaf.leaf_id))

    if parallel and len(M.leaves) > 1:
        with ThreadPoolExecutor() as pool:
            return list(pool.map(one, M.leaves))
    return [one(leaf) for leaf in M.leaves]


def cmd_index(M: MeasuredComplex, args, rep: Report) -> None:
    fields = _characteristic(M, args.parallel)
    leaves = []
    face_index = {}
    for leaf, cf in zip(M.leaves, fields):
        counts = {str(d): {str(k): n for k, n in sorted(c.items())} for d, c in cf.counts().items()}
        leaves.append({"id": leaf.leaf_id, "counts": counts, "total": cf.total, "chi": euler_char(leaf)})
        rep.checks[f"leaf{leaf.leaf_id}_indices_are_signed_dimension"] = all(
            k == (-1) ** (len(s) - 1) for s, k in cf.indices.items())
        for s, k in sorted(cf.indices.items(), key=lambda x: (len(x[0]), x[0])):
            rep.rows.append({"leaf": leaf.leaf_id, "simplex": simplex_key(s), "dim": len(s) - 1, "index": k})
            if len(s) == 3:
                face_index[s] = k
    ph = poincare_hopf_check(M, {leaf.leaf_id: cf for leaf, cf in zip(M.leaves, fields)})
    rep.results = {"leaves": leaves, "weighted_index_sum": _clean(ph.rhs), "chi_mu": _clean(ph.lhs)}
    rep.checks["poincare_hopf"] = ph.passed
    rep.ply = (M, face_index, {})


def cmd_cancel(M: MeasuredComplex, args, rep: Report) -> None:
    if args.cochain:
        c = cochain_from_json(_read_json(args.cochain))
    else:
        c = euler_representative(M)
        if args.pairs:
            c = balanced_pairs(M, args.pairs, np.random.default_rng(args.seed), c)
    tol = args.tol or 0.0
    bound = leaf_lower_bound(M, c)
    if args.exhaustion:
        B = Exhaustion.concentric(M, args.exhaustion)
        stages, trace = cancel_with_exhaustion(M, c, B, tol, strict=False)
        eta = stages[-1].eta
        stable = all(stages[r + 1].eta.restricted(B.edges(r)) == stages[r].eta.restricted(B.edges(r))
                     for r in range(len(stages) - 1))
        rep.checks["exhaustion_stable"] = stable
        rep.results["stages"] = [{"facets": len(B.stages[r]), "residual": _clean(s.norm)}
                                 for r, s in enumerate(stages)]
    else:
        eta, trace = cancel(M, c, tol, strict=False)
    residual = c - coboundary(eta, M)
    norm = trace.final.norm
    rep.results.update({
        "input": cochain_to_json(c), "eta": cochain_to_json(eta), "residual": _clean(norm),
        "lower_bound": _clean(bound), "norms": [_clean(x) for x in trace.norms],
        "types": [[str(t) for t in a] for a in trace.types], "steps": len(trace) - 1,
    })
    rep.checks["bookkeeping_exact"] = residual == trace.final.cocycle
    rep.checks["residual_within_tol"] = norm <= tol
    for k, step in enumerate(trace.steps):
        rep.rows.append({"step": k, "stage": step.stage, "kind": step.kind, "norm": _clean(step.norm),
                         "type": "" if step.alpha is None else " ".join(str(t) for t in step.alpha),
                         "instances": len(step.instances)})
    rep.ply = (M, {f: M.orientation(f) * v for f, v in trace.final.cocycle.values.items()}, {})


def cmd_hodge(M: MeasuredComplex, args, rep: Report) -> None:
    b = betti_vector(M, args.parallel)
    e = euler_from_betti_check(M, args.tol or 1e-6, args.parallel)
    rep.results = {"betti": [_clean(x) for x in b], "chi_betti": _clean(e.chi_betti), "chi_mu": _clean(e.chi_mu)}
    rep.checks["euler_from_betti"] = e.passed
    for p, x in enumerate(b):
        rep.rows.append({"degree": p, "betti": _clean(x)})


def cmd_approx(args, rep: Report) -> None:
    g = circle_power_map(args.source_size, args.target_size, args.degree, args.density)
    h = simplicial_approximation(g, args.max_level)
    deg = circle_degree(h)
    wind = sampled_winding(g)
    star = star_condition_check(g, h)
    rep.results = {"level": h.level, "degree": deg, "sampled_winding": wind, "star_samples": star.samples,
                   "vertex_map": {str(v): w for v, w in sorted(h.vertex_map.items())}}
    rep.checks["degree_matches_winding"] = deg == wind == args.degree
    rep.checks["star_condition"] = star.passed
    for v, w in sorted(h.vertex_map.items()):
        rep.rows.append({"source_vertex": v, "target_vertex": w})


def _verify_model(name: str, M: MeasuredComplex, rng: np.random.Generator, rep: Report) -> None:
    checks = rep.checks
    checks[f"{name}:chi"] = math.isclose(chi_mu(M), chi_by_leaves(M), abs_tol=1e-12)
    for leaf in M.leaves:
        checks[f"{name}:gauss_bonnet:{leaf.leaf_id}"] = gauss_bonnet(M.geometry_of(leaf.leaf_id)).passed
    fields = _characteristic(M, False)
    checks[f"{name}:characteristic_indices"] = all(
        k == (-1) ** (len(s) - 1) for cf in fields for s, k in cf.indices.items())
    checks[f"{name}:poincare_hopf_characteristic"] = poincare_hopf_check(
        M, {leaf.leaf_id: cf for leaf, cf in zip(M.leaves, fields)}).passed
    conn = levi_civita(M)
    g0 = random_direction_field(conn, rng, 2)
    g1 = random_direction_field(conn, rng, 2)
    checks[f"{name}:poincare_hopf_obstruction"] = poincare_hopf_check(M, g0).passed
    omega = difference_cochain(g0, g1, conn)
    checks[f"{name}:difference_cochain"] = coboundary(omega, M) == obstruction_cocycle(g0, conn) - obstruction_cocycle(g1, conn)
    c0 = Cochain(0, "int", {(v,): int(rng.integers(-5, 6)) for v in (s[0] for s in M.simplices(0))})
    checks[f"{name}:d_squared"] = coboundary(coboundary(c0, M), M).is_zero()
    z = Cochain(2, "int", {f: int(rng.integers(-5, 6)) for f in M.facets})
    checks[f"{name}:boundary_squared"] = boundary(boundary(z)).is_zero()
    c1 = Cochain(1, "real", {e: float(rng.normal()) for e in M.simplices(1)})
    z2 = Cochain(2, "real", {f: float(rng.normal()) for f in M.facets})
    lhs, rhs = kronecker(coboundary(c1, M), z2, M), kronecker(c1, boundary(z2), M)
    checks[f"{name}:adjointness"] = abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))
    checks[f"{name}:euler_from_betti"] = euler_from_betti_check(M).passed
    c = balanced_pairs(M, 3, rng, euler_representative(M))
    eta, trace = cancel(M, c, strict=False)
    checks[f"{name}:cancel_reaches_bound"] = math.isclose(trace.final.norm, leaf_lower_bound(M, c), abs_tol=1e-12)
    checks[f"{name}:pairing_conserved"] = all(
        math.isclose(kronecker(s.cocycle, fundamental_cycle(M), M), kronecker(c, fundamental_cycle(M), M),
                     abs_tol=1e-12) for s in trace.steps)
    rep.rows.append({"model": name, "chi_mu": _clean(chi_mu(M)),
                     "checks": sum(1 for k in checks if k.startswith(name + ":")),
                     "failed": sum(1 for k, v in checks.items() if k.startswith(name + ":") and not v)})


def cmd_verify(args, rep: Report) -> None:
    rng = np.random.default_rng(args.seed)
    models = {args.model_name: args.model} if args.model is not None else all_generators()
    for name, M in models.items():
        _verify_model(name, M, rng, rep)
    if args.model is None:
        h = simplicial_approximation(circle_power_map(12, 12, 3), args.max_level)
        rep.checks["approx:degree3"] = circle_degree(h) == 3
        phi = torus_cover()
        conn = levi_civita(MeasuredComplex((phi.target,), _unit_measure(phi.target)))
        nat = pullback_naturality_check(phi, random_direction_field(conn, rng, 1), conn)
        rep.checks["approx:naturality"] = nat.passed
    rep.results = {"models": sorted(models), "checks_run": len(rep.checks),
                   "failed": sorted(k for k, v in rep.checks.items() if not v)}


def _unit_measure(leaf):
    from .measure import TransverseMeasure

    return TransverseMeasure({leaf.leaf_id: 1.0})


def _read_json(path: str):
    import json

    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise BadParameters(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise BadParameters(f"{path} is not valid JSON: {exc}") from None


MODEL_COMMANDS: Dict[str, Callable] = {
    "chi": cmd_chi,
    "gauss-bonnet": cmd_gauss_bonnet,
    "obstruction": cmd_obstruction,
    "index": cmd_index,
    "cancel": cmd_cancel,
    "hodge": cmd_hodge,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="measfol", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input", metavar="PATH", help="measured complex (.json) or single-leaf surface (.off)")
    p.add_argument("--generate", nargs="+", metavar=("NAME", "ARGS"),
                   help=f"built-in model: {', '.join(sorted(GENERATORS))}")
    p.add_argument("--weight", type=float, help="override every leaf weight")
    p.add_argument("--tol", type=float, help="tolerance (cancel residual, Euler check, Gauss-Bonnet)")
    p.add_argument("--max-level", type=int, default=5, help="subdivision budget for approx")
    p.add_argument("--parallel", action="store_true", help="run per-leaf work in a thread pool")
    p.add_argument("--export-ply", metavar="PATH", help="write the model with face 'index' and vertex 'angle'")
    p.add_argument("--json", action="store_true", help="print the JSON report (default: one-line summary)")
    p.add_argument("--csv", metavar="PATH", help="write the per-row results as CSV")
    p.add_argument("--figures", metavar="DIR", help="render report figures (PNG) into DIR")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings in the JSON report")
    p.add_argument("--seed", type=int, default=0, help="seed for random fields and pairs")
    p.add_argument("--field", metavar="PATH", help="direction field JSON for obstruction")
    p.add_argument("--max-period", type=int, default=0, help="random edge periods in [-k, k]")
    p.add_argument("--cochain", metavar="PATH", help="top cochain JSON for cancel")
    p.add_argument("--pairs", type=int, default=0, help="random balanced +-1 face pairs added for cancel")
    p.add_argument("--exhaustion", type=int, metavar="WIDTH", help="cancel along concentric bands of this width")
    p.add_argument("--degree", type=int, default=3, help="degree of the circle map for approx")
    p.add_argument("--source-size", type=int, default=12)
    p.add_argument("--target-size", type=int, default=12)
    p.add_argument("--density", type=int, default=64, help="samples per simplex for approx")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def _emit_error(exc: Exception, as_json: bool) -> int:
    err = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    if as_json:
        print(dumps(err))
    else:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return 2


def run(argv: Optional[Sequence[str]] = None) -> Tuple[Report, int]:
    args = build_parser().parse_args(argv)
    rep = Report(args.command)
    start = time.perf_counter()
    if args.command == "approx":
        rep.inputs = digest({"degree": args.degree, "source": args.source_size, "target": args.target_size,
                             "density": args.density, "max_level": args.max_level})
        rep.model = f"circle_power({args.source_size},{args.target_size},{args.degree})"
        cmd_approx(args, rep)
    elif args.command == "verify":
        args.model = _model(args) if (args.input or args.generate) else None
        args.model_name = args.model.name if args.model is not None else ""
        rep.model = args.model_name or "all"
        rep.inputs = digest(complex_to_json(args.model)) if args.model is not None else digest(sorted(all_generators()))
        cmd_verify(args, rep)
    else:
        M = _model(args)
        rep.model = M.name
        rep.inputs = digest(complex_to_json(M))
        MODEL_COMMANDS[args.command](M, args, rep)
        if args.export_ply:
            model, faces, angles = rep.ply or (M, {}, {})
            write_ply(args.export_ply, model, faces, angles)
    rep.timings["total_seconds"] = time.perf_counter() - start
    return rep, (0 if rep.passed else 1)


def _write_csv(path: str, rows: List[Dict[str, Any]]) -> None:
    cols: List[str] = []
    for r in rows:
        cols += [k for k in r if k not in cols]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        w.writerows(rows)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser_args = argv if argv is not None else sys.argv[1:]
    as_json = "--json" in parser_args
    try:
        rep, code = run(argv)
    except (MeasfolError, ValueError) as exc:
        return _emit_error(exc, as_json)
    args = build_parser().parse_args(argv)
    if args.csv:
        _write_csv(args.csv, rep.rows)
    if args.figures:
        from .figures import render

        render(rep.command, rep.results, rep.checks, Path(args.figures))
    if args.json:
        print(dumps(rep.as_json(args.timings)))
    else:
        failed = [k for k, v in rep.checks.items() if not v]
        status = "PASS" if not failed else "FAIL " + ", ".join(sorted(failed))
        print(f"{rep.command} {rep.model}: {status}")
    return code


if __name__ == "__main__":
    sys.exit(main())

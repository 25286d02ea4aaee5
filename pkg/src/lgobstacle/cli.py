"""Command line front end: ``solve``, ``oracle`` and ``foam`` subcommands.

Problem specs are JSON files; command line flags override spec values, which
override defaults.  Exit codes: 0 success, 1 oracle mismatch, 2 nesting
violation, 3 spec error, 4 infeasible foam stage.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import platform
import sys
import time
from importlib import resources

import numpy as np

from . import __version__
from ._backend import BACKEND
from .grid import (
    DomainError,
    InadmissibleData,
    PixelSet,
    ScalarField,
    build_domain,
    compatible_obstacle,
    extend_boundary_data,
    obstacle_hat,
)
from .io import read_csv, write_csv, write_lgobv, write_pgm
from .perimeter import make_stencil, perimeter

EXIT_OK, EXIT_MISMATCH, EXIT_NESTING, EXIT_SPEC, EXIT_FOAM = 0, 1, 2, 3, 4

DEFAULTS = {
    "domain": {"kind": "disc", "radius": 1.0, "h": 1 / 32, "collar": 3},
    "boundary": {"kind": "step", "theta0": 0.0, "low": 0.0, "high": 1.0},
    "obstacle": {"kind": "none"},
    "stencil": 16,
    "ladder": {"mode": "quantized"},
    "diagnostics": {
        "holder": True,
        "holder_pairs": 2000,
        "barriers": True,
        "barrier_points": 10,
        "barrier_delta": 0.25,
        "barrier_lambda": 1.0,
        "barrier_alpha": 1.0,
        "contact": False,
        "contact_windows": 100,
        "density": False,
        "density_points": 20,
    },
    "out": "out",
    "seed": 0,
}


class SpecError(ValueError):
    pass


# ----------------------------------------------------------------- spec


def _merge(base, over):
    out = dict(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k == "diagnostics":
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def load_spec(path, overrides=None) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise SpecError(f"spec file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise SpecError("spec must be a JSON object")
    base = os.path.dirname(os.path.abspath(path))
    spec = _merge(DEFAULTS, raw)
    spec = _merge(spec, overrides or {})
    spec["_base"] = base
    return spec


def _path(spec, p):
    full = p if os.path.isabs(p) else os.path.join(spec.get("_base", "."), p)
    if not os.path.exists(full):
        raise SpecError(f"referenced file not found: {p}")
    return full


def _angles(domain):
    X, Y = domain.coords()
    return np.arctan2(Y, X)


def _wrap(a):
    return (a + np.pi) % (2 * np.pi) - np.pi


def boundary_field(spec, domain) -> ScalarField:
    """Ring data from the spec's boundary entry (NaN off the ring)."""
    b = spec["boundary"]
    kind = b.get("kind")
    th = _angles(domain)
    if kind == "constant":
        v = np.full(domain.shape, float(b.get("value", 0.0)))
    elif kind == "step":
        # high on the half-plane facing direction theta0
        t0 = float(b.get("theta0", 0.0))
        v = np.where(np.cos(th - t0) > 0, float(b.get("high", 1.0)), float(b.get("low", 0.0)))
    elif kind == "sectors":
        # piecewise constant on equal angular sectors
        vals = [float(x) for x in b["values"]]
        t0 = float(b.get("theta0", 0.0))
        k = np.floor(((th - t0) % (2 * np.pi)) / (2 * np.pi) * len(vals)).astype(int) % len(vals)
        v = np.asarray(vals)[k]
    elif kind == "holder":
        # |theta - phase|^alpha with theta wrapped to (-pi, pi]; phase drawn from
        # the seed when not given
        alpha = float(b.get("alpha", 0.5))
        if "phase" in b:
            phase = float(b["phase"])
        else:
            phase = float(np.random.default_rng(int(b.get("seed", spec["seed"]))).uniform(-np.pi, np.pi))
        v = float(b.get("amplitude", 1.0)) * np.abs(_wrap(th - phase)) ** alpha
        # mirrored samples differ by rounding noise only; snap them together
        v = np.round(v, 12)
    elif kind == "csv":
        v = read_csv(_path(spec, b["path"]))
        if v.shape != domain.shape:
            raise SpecError(f"boundary CSV shape {v.shape} != grid shape {domain.shape}")
    else:
        raise SpecError(f"unknown boundary kind {kind!r}")
    v = np.where(domain.ring, v, np.nan)
    try:
        return ScalarField(domain, v, "ring")
    except ValueError as exc:
        raise SpecError(str(exc)) from exc


def obstacle_field(spec, domain, g):
    """Obstacle on the closed domain, clipped to stay compatible with the ring data."""
    o = spec.get("obstacle") or {"kind": "none"}
    kind = o.get("kind", "none")
    if kind == "none":
        return None
    X, Y = domain.coords()
    if kind == "cone":
        ax, ay = o.get("apex", [0.0, 0.0])
        v = float(o.get("height", 1.0)) - float(o.get("slope", 1.0)) * np.hypot(X - ax, Y - ay)
    elif kind == "bumps":
        rng = np.random.default_rng(int(o.get("seed", spec["seed"])))
        gmin = float(np.min(g.values[domain.ring]))
        v = np.full(domain.shape, float(o.get("floor", gmin)))
        levels = o.get("levels", [1.0])
        om = domain.omega
        xs, ys = X[om], Y[om]
        for _ in range(int(o.get("count", 3))):
            k = int(rng.integers(len(xs)))
            rad = float(rng.uniform(*o.get("radius", [2 * domain.h, 6 * domain.h])))
            lev = float(levels[int(rng.integers(len(levels)))])
            v = np.where(np.hypot(X - xs[k], Y - ys[k]) < rad, np.maximum(v, lev), v)
    elif kind == "csv":
        v = read_csv(_path(spec, o["path"]))
        if v.shape != domain.shape:
            raise SpecError(f"obstacle CSV shape {v.shape} != grid shape {domain.shape}")
    else:
        raise SpecError(f"unknown obstacle kind {kind!r}")
    v = compatible_obstacle(v, g)
    try:
        return ScalarField(domain, v, "omega")
    except ValueError as exc:
        raise SpecError(str(exc)) from exc


def build_problem(spec):
    """Domain, stencil, g, psi and ladder from a merged spec."""
    from .solver import make_ladder

    dspec = dict(spec["domain"])
    if dspec.get("kind") == "mask" and "path" in dspec:
        dspec["path"] = _path(spec, dspec["path"])
        print(
            "warning: mask domains are not checked for the boundary curvature conditions the "
            "theory assumes; built-in disc and rectangle domains satisfy them",
            file=sys.stderr,
        )
    try:
        domain = build_domain(dspec)
        st = make_stencil(int(spec["stencil"]), domain.h)
    except (DomainError, ValueError, KeyError) as exc:
        raise SpecError(str(exc)) from exc
    if domain.collar_width < st.radius:
        raise SpecError(f"collar {domain.collar_width} narrower than stencil radius {st.radius}")
    g = boundary_field(spec, domain)
    psi = obstacle_field(spec, domain, g)
    lad = spec.get("ladder") or {}
    try:
        ladder = make_ladder(g, psi, lad.get("mode", "quantized"), lad.get("m"))
    except ValueError as exc:
        raise SpecError(str(exc)) from exc
    return domain, st, g, psi, ladder


# --------------------------------------------------------------- reports


def schema():
    with resources.files("lgobstacle").joinpath("data/report.schema.json").open() as fh:
        return json.load(fh)


def validate_report(report):
    import jsonschema

    jsonschema.validate(report, schema())


def versions():
    import numba
    import scipy

    return {
        "lgobstacle": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
        "backend": BACKEND,
    }


def _clean(o):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(o, dict):
        return {str(k): _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if isinstance(o, (np.bool_, bool)):
        return bool(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (float, np.floating)):
        f = float(o)
        return f if math.isfinite(f) else None
    return o


def _dump(path, obj):
    with open(path, "w", newline="\n") as fh:
        fh.write(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


def _public_spec(spec):
    return {k: v for k, v in spec.items() if not k.startswith("_") and k != "out"}


def barrier_points(domain, n, seed):
    ring = np.flatnonzero(domain.ring.reshape(-1))
    rng = np.random.default_rng(seed)
    pick = rng.choice(ring.size, size=min(n, ring.size), replace=False)
    return np.sort(ring[pick])


def diagnostics_report(sol, spec, timings):
    from . import diagnostics as dg

    dcfg = spec["diagnostics"]
    seed = int(spec["seed"])
    rep = {}
    t = time.perf_counter()
    led = dg.coarea_ledger(sol)
    rep["coarea"] = led.as_dict()
    timings["coarea"] = time.perf_counter() - t

    holder = None
    t = time.perf_counter()
    if dcfg.get("holder", True):
        try:
            holder = dg.holder_exponent(sol, n=int(dcfg.get("holder_pairs", 2000)), seed=seed)
            rep["holder"] = {"enabled": True, **holder.as_dict()}
        except ValueError as exc:
            rep["holder"] = {"enabled": True, "defined": False, "error": str(exc)}
    else:
        rep["holder"] = {"enabled": False}
    timings["holder"] = time.perf_counter() - t

    t = time.perf_counter()
    if dcfg.get("barriers", True):
        delta = float(dcfg.get("barrier_delta", 0.25))
        lam = float(dcfg.get("barrier_lambda", 1.0))
        alpha = float(dcfg.get("barrier_alpha", 1.0))
        rows = []
        try:
            for x0 in barrier_points(sol.domain, int(dcfg.get("barrier_points", 10)), seed):
                res = dg.barrier_sweep(x0, lam, alpha, delta, sol)
                row = res.as_dict()
                row["K_critical"] = dg.critical_K(x0, lam, alpha, delta, sol)
                rows.append(row)
            rep["barriers"] = {"enabled": True, "points": rows, "ok": all(r["holds"] for r in rows)}
        except ValueError as exc:
            rep["barriers"] = {"enabled": True, "ok": False, "error": str(exc), "points": rows}
    else:
        rep["barriers"] = {"enabled": False}
    timings["barriers"] = time.perf_counter() - t

    t = time.perf_counter()
    if dcfg.get("contact", False):
        cs = dg.contact_survey(sol, int(dcfg.get("contact_windows", 100)), seed=seed)
        rep["contact"] = {"enabled": True, **cs.as_dict()}
    else:
        rep["contact"] = {"enabled": False}
    timings["contact"] = time.perf_counter() - t

    t = time.perf_counter()
    if dcfg.get("density", False):
        rep["density"] = {"enabled": True, **dg.density_survey(sol, int(dcfg.get("density_points", 20)), seed=seed)}
    else:
        rep["density"] = {"enabled": False}
    timings["density"] = time.perf_counter() - t
    return rep, holder


def solution_report(sol, spec):
    lv = []
    for k, L in enumerate(sol.levels):
        lv.append(
            {
                "t": L.t,
                "value": L.value,
                "perimeter_omega": L.perimeter.interior,
                "perimeter_rn": L.perimeter.total,
                "perimeter_units": L.perimeter.units,
                "volume": L.volume,
            }
        )
    u = sol.u.values
    om = sol.domain.omega
    psi = sol.psi
    obst = None
    if psi is not None:
        gap = (u - psi.values)[sol.domain.interior]
        obst = float(gap.min()) if gap.size else None
    ring_err = float(np.max(np.abs(u - sol.g.values)[sol.domain.ring]))
    return {
        "ladder": {
            "mode": sol.ladder.mode,
            "m": sol.ladder.m,
            "a": sol.ladder.a,
            "b": sol.ladder.b,
            "max_gap": sol.ladder.max_gap(),
        },
        "levels": lv,
        "nesting": {"ok": sol.nesting.ok, "touching": list(sol.touching)},
        "tv": sol.tv,
        "tv_extended": sol.tv_extended,
        "trace_max_error": ring_err,
        "obstacle_min_gap": obst,
        "u_range": [float(np.nanmin(u[om])), float(np.nanmax(u[om]))],
    }


# ------------------------------------------------------------------ solve


def run_solve(spec, fault=None, dimacs=None) -> int:
    from .solver import NestingViolation, solve
    from .diagnostics import write_holder_tsv

    timings = {}
    t0 = time.perf_counter()
    try:
        domain, st, g, psi, ladder = build_problem(spec)
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    out = spec["out"]
    os.makedirs(out, exist_ok=True)
    timings["setup"] = time.perf_counter() - t0
    t = time.perf_counter()
    try:
        sol = solve(domain, g, psi, st, ladder, fault=fault)
    except NestingViolation as exc:
        print(f"nesting violation: {exc}", file=sys.stderr)
        v = exc.verdict
        _dump(
            os.path.join(out, "nesting_violation.json"),
            {"s": v.s, "t": v.t, "index": v.index, "witness": v.witness[:100].tolist()},
        )
        return EXIT_NESTING
    except InadmissibleData as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    timings["solve"] = time.perf_counter() - t
    if dimacs is not None:
        _write_dimacs(sol, int(dimacs), os.path.join(out, f"level_{int(dimacs)}.dimacs"))

    write_csv(os.path.join(out, "u.csv"), sol.u.values)
    write_lgobv(
        os.path.join(out, "levels.lgobv"),
        domain.width,
        domain.height,
        [(L.t, L.value, L.E.membership) for L in sol.levels],
    )
    diag, holder = diagnostics_report(sol, spec, timings)
    if holder is not None and holder.dist is not None:
        write_holder_tsv(os.path.join(out, "holder.tsv"), holder)
    else:
        with open(os.path.join(out, "holder.tsv"), "w", newline="\n") as fh:
            fh.write("distance\tabs_du\n")
    report = {
        "format": "lgobstacle-report-1",
        "versions": versions(),
        "seed": int(spec["seed"]),
        "spec": _public_spec(spec),
        "domain": domain.describe(),
        "stencil": {"order": st.order, "radius": st.radius, "scale": st.scale},
        "tolerances": {
            "coarea_rtol": 1e-9,
            "density_profile": "2h/r",
            "density_lower_bound": "4h/r",
            "ladder_max_gap": ladder.max_gap(),
        },
        "solution": solution_report(sol, spec),
        **diag,
        "timings": {"file": "timings.json"},
    }
    report = _clean(report)
    validate_report(report)
    _dump(os.path.join(out, "report.json"), report)
    timings["total"] = time.perf_counter() - t0
    from .solver import worker_count

    _dump(os.path.join(out, "timings.json"), {"seconds": timings, "workers": worker_count()})
    return EXIT_OK


def _write_dimacs(sol, k, path):
    from .mincut import build_network
    from .solver import level_constraints

    G = extend_boundary_data(sol.g)
    fin, fout = level_constraints(sol.ladder.levels[k], sol.domain, G, sol.psi)
    build_network(sol.domain, sol.stencil, fin, fout).write_dimacs(path)


# ----------------------------------------------------------------- oracle


def oracle_compare(sol, max_free=22, max_fields=1 << 21) -> dict:
    """Compare a solution with exhaustive enumeration, level by level and as a field."""
    from .mincut import min_cut
    from .oracle import TooLarge, field_oracle, level_oracle
    from .solver import level_constraints

    dom, st = sol.domain, sol.stencil
    G = extend_boundary_data(sol.g)
    rows, mismatches = [], []
    unit = st.h / st.scale
    tv_oracle_terms = []
    inc = sol.ladder.increments()
    for k, L in enumerate(sol.levels):
        fin, fout = level_constraints(L.t, dom, G, sol.psi)
        orc = level_oracle(dom, st, fin, fout, max_free=max_free)
        cut = min_cut(dom, st, fin, fout, want_min=True)
        pv = perimeter(L.E, "rn", st)
        row = {
            "t": L.t,
            "oracle_units": orc.min_units,
            "solution_units": pv.units,
            "n_minimizers": orc.n_minimizers,
            "E_max_is_volume_max": bool(L.E.same_as(orc.volume_max)),
            "E_max_is_union": bool(L.E.same_as(orc.union)),
            "E_min_is_intersection": bool(cut.E_min.same_as(orc.intersection)),
            "family_ok": bool(
                all(cut.E_min.issubset(orc.member(m)) and orc.member(m).issubset(cut.E_max) for m in orc.minimizers)
            ),
        }
        rows.append(row)
        ok = (
            row["oracle_units"] == row["solution_units"]
            and row["E_max_is_volume_max"]
            and row["E_max_is_union"]
            and row["E_min_is_intersection"]
            and row["family_ok"]
        )
        if not ok:
            mismatches.append({"level": k, "t": L.t})
        ext = pv.units_exterior
        tv_oracle_terms.append(float(inc[k]) * (orc.min_units - ext) * unit)
    tv_levels = math.fsum(tv_oracle_terms)
    field = {"tv_extended": sol.tv_extended, "oracle_levelwise": tv_levels, "method": "levels"}
    if not math.isclose(tv_levels, sol.tv_extended, rel_tol=1e-12, abs_tol=1e-12):
        mismatches.append({"field": "tv_extended != level-wise oracle minimum"})
    # whole-field enumeration when small enough
    vals = np.asarray(sol.ladder.values, float)
    ubar = np.full(dom.shape, np.nan)
    ubar[dom.ring] = sol.u.values[dom.ring]
    ubar[dom.collar] = G.values[dom.collar]
    if sol.psi is not None:
        hat = obstacle_hat(sol.psi)
        low = np.searchsorted(vals, np.where(dom.omega, hat, -np.inf), side="left")
    else:
        low = np.zeros(dom.shape, np.int64)
    low = np.clip(low, 0, vals.size - 1)
    try:
        fo = field_oracle(dom, st, ubar, low, vals, max_fields=max_fields)
        field.update({"method": "fields", "oracle_fields": fo.min_energy, "n_fields": fo.n_fields})
        if not math.isclose(fo.min_energy, sol.tv_extended, rel_tol=1e-9, abs_tol=1e-12):
            mismatches.append({"field": "tv_extended != field enumeration minimum"})
    except TooLarge:
        pass
    return {"levels": rows, "field": field, "mismatches": mismatches, "match": not mismatches}


def run_oracle(spec, fault=None) -> int:
    from .oracle import TooLarge
    from .solver import NestingViolation, solve

    try:
        domain, st, g, psi, ladder = build_problem(spec)
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    if int(domain.interior.sum()) > 22:
        print(f"grid too large for enumeration: {int(domain.interior.sum())} free interior nodes", file=sys.stderr)
        return EXIT_SPEC
    out = spec["out"]
    os.makedirs(out, exist_ok=True)
    try:
        sol = solve(domain, g, psi, st, ladder, fault=fault)
    except NestingViolation as exc:
        print(f"nesting violation: {exc}", file=sys.stderr)
        return EXIT_NESTING
    except InadmissibleData as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    try:
        rep = oracle_compare(sol)
    except TooLarge as exc:
        print(f"grid too large: {exc}", file=sys.stderr)
        return EXIT_SPEC
    rep = {"format": "lgobstacle-oracle-1", "seed": int(spec["seed"]), "spec": _public_spec(spec), **rep}
    _dump(os.path.join(out, "oracle.json"), rep)
    if not rep["match"]:
        print(f"oracle mismatch: {rep['mismatches']}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


# ------------------------------------------------------------------- foam


def run_foam(spec) -> int:
    from .foam import FoamInfeasible, coverage, foam_superminimality_check, foamy_construct, raster_grid, rasterize

    f = spec.get("foam") or {}
    try:
        V = tuple(float(x) for x in f.get("V", [0.0, 0.0, 1.0, 1.0]))
        eps = float(f.get("eps", 0.1))
        J = int(f.get("J", 30))
        n = int(f.get("raster", 256))
        trials = int(f.get("trials", 200))
    except (TypeError, ValueError) as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    seed = int(spec["seed"]) if spec.get("_seed_flag") else int(f.get("seed", spec["seed"]))
    out = spec["out"]
    os.makedirs(out, exist_ok=True)
    try:
        stage = foamy_construct(V, eps, J, seed=seed)
    except FoamInfeasible as exc:
        print(f"foam infeasible: {exc}", file=sys.stderr)
        return EXIT_FOAM
    except ValueError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    with open(os.path.join(out, "stage.json"), "w", newline="\n") as fh:
        fh.write(stage.to_json() + "\n")
    X, Y, _ = raster_grid(V, n) if math.isclose(V[2] - V[0], V[3] - V[1]) else (None, None, None)
    if X is not None:
        write_pgm(os.path.join(out, "raster.pgm"), np.where(rasterize(stage.balls, X, Y), 255, 0).astype(np.uint8))
    margins = stage.pair_margins()
    rep = {
        "format": "lgobstacle-foam-1",
        "seed": seed,
        "V": list(V),
        "eps": eps,
        "J": J,
        "area": stage.area,
        "area_bound": math.pi * eps * eps,
        "area_ok": stage.area < math.pi * eps * eps,
        "deltas_positive": all(d > 0 for d in stage.deltas),
        "min_pair_margin": min(margins) if margins else None,
        "tail_bound_ok": stage.tail_bound_holds(),
        "disjoint": stage.disjoint(),
        "inside_V": stage.inside_V(),
        "coverage": [coverage(stage, 0.05, n=min(n, 256), upto=k) for k in range(1, J + 1)],
    }
    if X is not None and trials > 0:
        rep["superminimality"] = foam_superminimality_check(stage, trials=trials, n=n, seed=seed).as_dict()
    _dump(os.path.join(out, "foam_report.json"), rep)
    return EXIT_OK


# -------------------------------------------------------------------- main


def _parser():
    p = argparse.ArgumentParser(prog="lgobstacle", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)
    s = sub.add_parser("solve", help="solve a problem spec and write artifacts")
    s.add_argument("spec")
    s.add_argument("--levels", type=int, help="use a uniform ladder with this many levels")
    s.add_argument("--stencil", type=int, choices=(4, 8, 16))
    s.add_argument("--out")
    s.add_argument("--seed", type=int)
    s.add_argument("--dimacs", type=int, metavar="K", help="also dump the flow network of level K")
    s.add_argument("--inject-fault", dest="fault", help=argparse.SUPPRESS)
    o = sub.add_parser("oracle", help="cross-check a tiny instance against enumeration")
    o.add_argument("spec")
    o.add_argument("--out")
    o.add_argument("--seed", type=int)
    o.add_argument("--inject-fault", dest="fault", help=argparse.SUPPRESS)
    f = sub.add_parser("foam", help="build a foam stage and check it")
    f.add_argument("spec")
    f.add_argument("--out")
    f.add_argument("--seed", type=int)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    over = {}
    if getattr(args, "out", None):
        over["out"] = args.out
    if getattr(args, "seed", None) is not None:
        over["seed"] = args.seed
        over["_seed_flag"] = True
    if getattr(args, "stencil", None):
        over["stencil"] = args.stencil
    if getattr(args, "levels", None):
        over["ladder"] = {"mode": "uniform", "m": args.levels}
    try:
        spec = load_spec(args.spec, over)
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    if args.cmd == "solve":
        return run_solve(spec, fault=args.fault, dimacs=args.dimacs)
    if args.cmd == "oracle":
        return run_oracle(spec, fault=args.fault)
    return run_foam(spec)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

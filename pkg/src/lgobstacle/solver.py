"""Level-by-level construction of the least-gradient solution above an obstacle.

For each threshold t of a ladder we pin the outside (collar and ring) to the
superlevel {G >= t} of the extended boundary data, force in the dilated obstacle
superlevel L_t, and take the largest minimum-perimeter set.  The field is the
stack of these sets: u(x) = max{value_k : x in A_k}, floored at a.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .grid import (
    GridDomain,
    InadmissibleData,
    LevelLadder,
    PixelSet,
    ScalarField,
    exterior_superlevel,
    extend_boundary_data,
    obstacle_superlevel,
)
from .mincut import build_network, extract_cuts, max_flow
from .perimeter import PerimeterValue, Stencil, edge_list


class NestingViolation(RuntimeError):
    def __init__(self, verdict):
        self.verdict = verdict
        super().__init__(
            f"level sets not nested: E(t={verdict.t!r}) not inside E(s={verdict.s!r}), "
            f"{len(verdict.witness)} witness nodes, first {verdict.witness[:5].tolist()}"
        )


# ------------------------------------------------------------------ ladder


def data_range(g: ScalarField, psi: Optional[ScalarField]):
    dom = g.domain
    vals = [g.values[dom.ring]]
    if psi is not None:
        vals.append(psi.values[dom.omega])
    v = np.concatenate(vals)
    if v.size == 0:
        raise ValueError("empty data")
    return float(v.min()), float(v.max()), v


def make_ladder(g: ScalarField, psi: Optional[ScalarField] = None, mode: str = "quantized", m: Optional[int] = None) -> LevelLadder:
    """Ladder over [a, b], the smallest interval holding g on the ring and psi.

    ``quantized``: one level per distinct data value, placed half the smallest gap
    below it so that ``{>= t}`` separates neighbouring values.
    ``uniform``: ``m`` levels ``a + k (b - a) / (m + 1)``; u takes the level values.
    """
    a, b, v = data_range(g, psi)
    if mode == "quantized":
        distinct = np.unique(v)
        eps = 0.5 * float(np.min(np.diff(distinct))) if distinct.size > 1 else 0.5
        levels = tuple(float(x) for x in distinct - eps)
        if any(s >= t for s, t in zip(levels, levels[1:])) or any(t >= v for t, v in zip(levels, distinct)):
            raise ValueError("data values too close together to place separating levels")
        return LevelLadder(levels=levels, values=tuple(float(x) for x in distinct), a=a, b=b, mode="quantized")
    if mode == "uniform":
        if m is None or m < 1:
            raise ValueError("uniform ladder needs m >= 1")
        if b == a:
            return LevelLadder(levels=(a - 0.5,), values=(a,), a=a, b=b, mode="uniform")
        t = tuple(a + k * (b - a) / (m + 1) for k in range(1, m + 1))
        return LevelLadder(levels=t, values=t, a=a, b=b, mode="uniform")
    raise ValueError(f"unknown ladder mode {mode!r}")


# ----------------------------------------------------------------- levels


@dataclass(frozen=True, eq=False)
class LevelSolution:
    t: float
    value: float
    E: PixelSet  # largest minimizer, whole grid
    A: PixelSet  # its part in the closed domain
    perimeter: PerimeterValue  # of E over the whole grid; .interior is P(E, Omega)

    @property
    def perimeter_omega(self) -> float:
        return self.perimeter.interior

    @property
    def volume(self) -> int:
        return self.A.volume


def level_constraints(t, domain: GridDomain, G: ScalarField, psi: Optional[ScalarField]):
    """Forced-in and forced-out node sets at level t.

    Outside nodes (collar and ring) are pinned to {G >= t}; the obstacle superlevel
    L_t is forced in.  Raises ``InadmissibleData`` when L_t hits a pinned-out node.
    """
    ext = exterior_superlevel(G, t, include_ring=True)
    outside = domain.collar | domain.ring
    forced_out = outside & ~ext.membership
    forced_in = ext.membership.copy()
    if psi is not None:
        L = obstacle_superlevel(psi, t).membership
        clash = L & forced_out
        if clash.any():
            raise InadmissibleData(
                f"obstacle superlevel at t={t!r} reaches {int(clash.sum())} ring nodes whose data is below t"
            )
        forced_in |= L
    return PixelSet(domain, forced_in), PixelSet(domain, forced_out)


def solve_level(t, domain, g, psi, stencil, G=None, value=None, method="auto") -> LevelSolution:
    if domain.collar_width < stencil.radius:
        raise ValueError(f"collar width {domain.collar_width} below stencil radius {stencil.radius}")
    if G is None:
        G = extend_boundary_data(g)
    fin, fout = level_constraints(t, domain, G, psi)
    net = build_network(domain, stencil, fin, fout)
    max_flow(net, want_min=False, method=method)
    cut = extract_cuts(net)
    E = cut.E_max
    A = PixelSet(domain, E.membership & domain.omega)
    return LevelSolution(t=float(t), value=float(t if value is None else value), E=E, A=A, perimeter=cut.perimeter)


# ---------------------------------------------------------------- nesting


@dataclass(frozen=True)
class NestingVerdict:
    ok: bool
    s: Optional[float] = None
    t: Optional[float] = None
    index: Optional[int] = None
    witness: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))


def nesting_audit(levels) -> NestingVerdict:
    """Check E_t inside E_s for every s < t (consecutive pairs suffice)."""
    for k in range(len(levels) - 1):
        lo, hi = levels[k], levels[k + 1]
        if hi.t <= lo.t:
            raise ValueError("levels must be sorted by t")
        bad = hi.E.membership & ~lo.E.membership
        if bad.any():
            return NestingVerdict(False, lo.t, hi.t, k, np.flatnonzero(bad.reshape(-1)))
    return NestingVerdict(True)


def touching_counts(levels, stencil=None) -> list:
    """Per consecutive pair: 4-edges inside the domain joining E_t to the outside of E_s."""
    out = []
    for k in range(len(levels) - 1):
        outer = levels[k].E.membership
        inner = levels[k + 1].E.membership
        om = levels[k].E.domain.omega
        n = 0
        for ax in (0, 1):
            for sh in (1, -1):
                nb_out = np.roll(~outer, sh, axis=ax) & np.roll(om, sh, axis=ax)
                n += int(np.count_nonzero(inner & om & nb_out))
        out.append(n)
    return out


# ------------------------------------------------------------------- solve


@dataclass(frozen=True, eq=False)
class Solution:
    domain: GridDomain
    stencil: Stencil
    u: ScalarField
    ladder: LevelLadder
    levels: tuple
    tv: float  # sum of dt * P(E_t, Omega)
    tv_extended: float  # same, including edges that cross into the collar
    nesting: NestingVerdict
    touching: list
    g: ScalarField = None
    psi: Optional[ScalarField] = None


def worker_count() -> int:
    raw = os.environ.get("LG_THREADS")
    if raw:
        return max(1, int(raw))
    return max(1, os.cpu_count() or 1)


def assemble(domain, ladder, levels):
    u = np.full(domain.shape, ladder.a, float)
    for lv in levels:
        np.maximum(u, np.where(lv.A.membership, lv.value, -np.inf), out=u)
    u[~domain.omega] = np.nan
    return u


def solve(domain, g, psi, stencil, ladder, workers=None, method="auto", fault=None) -> Solution:
    """Solve every ladder level, audit nesting and stack the levels into u.

    Levels are independent min-cut problems and are solved concurrently; the result
    does not depend on the worker count.  Raises ``NestingViolation`` if some
    E_t is not contained in E_s for s < t.
    """
    G = extend_boundary_data(g)
    n = workers or worker_count()

    def one(k):
        return solve_level(ladder.levels[k], domain, g, psi, stencil, G=G, value=ladder.values[k], method=method)

    idx = range(ladder.m)
    if n > 1 and ladder.m > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            levels = list(pool.map(one, idx))
    else:
        levels = [one(k) for k in idx]
    if fault is not None:
        levels = _inject(levels, domain, fault)
    verdict = nesting_audit(levels)
    if not verdict.ok:
        raise NestingViolation(verdict)
    u = assemble(domain, ladder, levels)
    inc = ladder.increments()
    unit = stencil.h / stencil.scale
    tv = math.fsum(float(d) * lv.perimeter.units_interior * unit for d, lv in zip(inc, levels))
    tv_ext = math.fsum(
        float(d) * (lv.perimeter.units_interior + lv.perimeter.units_crossing) * unit for d, lv in zip(inc, levels)
    )
    return Solution(
        domain=domain,
        stencil=stencil,
        u=ScalarField(domain, u, "omega"),
        ladder=ladder,
        levels=tuple(levels),
        tv=tv,
        tv_extended=tv_ext,
        nesting=verdict,
        touching=touching_counts(levels),
        g=g,
        psi=psi,
    )


def _inject(levels, domain, fault):
    """Test-only corruption used to prove the oracle comparison can fail."""
    if fault == "flip-node":
        # flip one interior node of the middle level, keeping the stack nested if possible
        k = len(levels) // 2
        lv = levels[k]
        cur = lv.E.membership
        above = levels[k + 1].E.membership if k + 1 < len(levels) else np.zeros_like(cur)
        below = levels[k - 1].E.membership if k > 0 else np.ones_like(cur)
        inner = domain.interior
        cand = np.flatnonzero((inner & cur & ~above).reshape(-1))
        if cand.size == 0:
            cand = np.flatnonzero((inner & below & ~cur).reshape(-1))
        if cand.size == 0:
            cand = np.flatnonzero(inner.reshape(-1))
        m = cur.reshape(-1).copy()
        m[cand[0]] = ~m[cand[0]]
        E = PixelSet(domain, m.reshape(domain.shape))
        levels = list(levels)
        levels[k] = LevelSolution(lv.t, lv.value, E, PixelSet(domain, E.membership & domain.omega), lv.perimeter)
        return levels
    if fault == "swap-levels" and len(levels) >= 2:
        levels = list(levels)
        a, b = levels[0], levels[-1]
        levels[0] = LevelSolution(a.t, a.value, b.E, b.A, b.perimeter)
        levels[-1] = LevelSolution(b.t, b.value, a.E, a.A, a.perimeter)
        return levels
    raise ValueError(f"unknown fault {fault!r}")


def edge_tv(u, domain, stencil) -> float:
    """Sum over stencil edges inside the closed domain of w |u(p) - u(q)|."""
    el = edge_list(domain, stencil)
    keep = el.kind == 0
    f = np.asarray(u.values if isinstance(u, ScalarField) else u, float).reshape(-1)
    w = el.units[keep] * (stencil.h / stencil.scale)
    return math.fsum(w * np.abs(f[el.p[keep]] - f[el.q[keep]]))

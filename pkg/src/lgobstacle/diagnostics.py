"""Numerical checks run on solved instances.

Co-area bookkeeping, boundary Holder fit, barrier sandwiches around ring points,
the contact classification for nested sub/super minimizers, and ball-density
profiles.  Everything here only reads its inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage

from .grid import PixelSet, ScalarField
from .perimeter import minimality_check, minimality_oracle, MAX_WINDOW
from .solver import Solution, edge_tv

COAREA_RTOL = 1e-9


# ------------------------------------------------------------------ co-area


@dataclass(frozen=True)
class CoareaLedger:
    rows: list  # (t, P(E_t, Omega), dt * P)
    total: float
    tv_edges: float
    rel_err: float
    ok: bool

    def as_dict(self):
        return {
            "rows": [{"t": t, "perimeter": p, "weighted": w} for t, p, w in self.rows],
            "total": self.total,
            "tv_edges": self.tv_edges,
            "rel_err": self.rel_err,
            "rtol": COAREA_RTOL,
            "ok": self.ok,
        }


def coarea_ledger(sol: Solution, rtol=COAREA_RTOL) -> CoareaLedger:
    inc = sol.ladder.increments()
    rows = []
    for d, lv in zip(inc, sol.levels):
        p = lv.perimeter_omega
        rows.append((lv.t, p, float(d) * p))
    total = math.fsum(r[2] for r in rows)
    tv = edge_tv(sol.u, sol.domain, sol.stencil)
    err = abs(total - tv) / max(abs(tv), 1e-300) if tv != 0 else abs(total)
    return CoareaLedger(rows, total, tv, err, bool(err <= rtol))


# ------------------------------------------------------------------- Holder


@dataclass(frozen=True)
class HolderFit:
    defined: bool
    beta: float
    C: float
    residual: float  # rms of the log-log fit
    n_pairs: int
    n_used: int
    dist: np.ndarray = field(repr=False, default=None)
    diff: np.ndarray = field(repr=False, default=None)

    def as_dict(self):
        return {
            "defined": self.defined,
            "beta": self.beta if self.defined else None,
            "C": self.C if self.defined else None,
            "residual": self.residual if self.defined else None,
            "n_pairs": self.n_pairs,
            "n_used": self.n_used,
        }


def boundary_pairs(domain, n=2000, seed=0, dmin=None, dmax=None):
    """Random (ring node, domain node) pairs with distance in [dmin, dmax].

    Defaults: dmin = 2h, dmax = diameter / 4.
    """
    rng = np.random.default_rng(seed)
    X, Y = domain.coords()
    ring = np.flatnonzero(domain.ring.reshape(-1))
    inside = np.flatnonzero(domain.omega.reshape(-1))
    xs, ys = X.reshape(-1), Y.reshape(-1)
    if dmin is None:
        dmin = 2 * domain.h
    if dmax is None:
        span = max(np.ptp(xs[inside]), np.ptp(ys[inside])) + domain.h
        dmax = span / 4
    a_out, b_out = [], []
    got = 0
    for _ in range(200):
        a = rng.choice(ring, size=4 * n)
        b = rng.choice(inside, size=4 * n)
        d = np.hypot(xs[a] - xs[b], ys[a] - ys[b])
        ok = (d >= dmin) & (d <= dmax)
        a_out.append(a[ok])
        b_out.append(b[ok])
        got += int(ok.sum())
        if got >= n:
            break
    a = np.concatenate(a_out)[:n]
    b = np.concatenate(b_out)[:n]
    return a, b


def holder_exponent(sol: Solution, pairs=None, n=2000, seed=0) -> HolderFit:
    """Fit log|u(x) - u(x0)| = log C + beta log|x - x0| over boundary-anchored pairs."""
    dom = sol.domain
    if pairs is None:
        pairs = boundary_pairs(dom, n, seed)
    a, b = (np.asarray(p, np.int64) for p in pairs)
    if a.size < 100:
        raise ValueError(f"need at least 100 pairs, got {a.size}")
    X, Y = dom.coords()
    xs, ys = X.reshape(-1), Y.reshape(-1)
    u = sol.u.values.reshape(-1)
    dist = np.hypot(xs[a] - xs[b], ys[a] - ys[b])
    diff = np.abs(u[a] - u[b])
    keep = diff > 0
    if keep.sum() < 2 or np.ptp(np.log(dist[keep])) == 0:
        return HolderFit(False, math.nan, math.nan, math.nan, int(a.size), int(keep.sum()), dist, diff)
    lx, ly = np.log(dist[keep]), np.log(diff[keep])
    beta, logc = np.polyfit(lx, ly, 1)
    res = float(np.sqrt(np.mean((ly - (beta * lx + logc)) ** 2)))
    return HolderFit(True, float(beta), float(math.exp(logc)), res, int(a.size), int(keep.sum()), dist, diff)


def write_holder_tsv(path, fit: HolderFit):
    with open(path, "w", newline="\n") as fh:
        fh.write("distance\tabs_du\n")
        for d, v in zip(fit.dist, fit.diff):
            fh.write(f"{d:.17g}\t{v:.17g}\n")


# ------------------------------------------------------------------ barriers


@dataclass(frozen=True)
class BarrierResult:
    x0: int
    K: float
    lam: float
    alpha: float
    delta: float
    region: np.ndarray  # U(x0, delta) = B(x0, delta) within the closed domain
    omega_minus: np.ndarray
    omega_plus: np.ndarray
    holds: Optional[bool]  # None when no u was supplied
    worst_lower: float = math.nan  # max of (omega_minus - u) over the region
    worst_upper: float = math.nan  # max of (u - omega_plus)

    def as_dict(self):
        return {
            "x0": int(self.x0),
            "K": self.K,
            "lambda": self.lam,
            "alpha": self.alpha,
            "delta": self.delta,
            "nodes": int(self.region.sum()),
            "holds": self.holds,
            "worst_lower": self.worst_lower,
            "worst_upper": self.worst_upper,
        }


def ring_distance(domain) -> np.ndarray:
    """Euclidean distance (length units) from each node to the nearest ring node."""
    key = ("ring_distance",)
    hit = domain._cache.get(key)
    if hit is None:
        hit = ndimage.distance_transform_edt(~domain.ring) * domain.h
        hit.setflags(write=False)
        domain._cache[key] = hit
    return hit


def barrier_eval(x0, lam, K, alpha, domain, g, psi, delta, u=None) -> BarrierResult:
    """Upper and lower barriers at ring node ``x0`` on U(x0, delta).

    v = |x - x0|^2 + lam * d(x); omega+ = g(x0) + K v^(alpha/2);
    omega- = max(psi, g(x0) - K v^(alpha/2)).  ``psi=None`` means no obstacle.
    """
    if not lam > 2 * delta:
        raise ValueError(f"need lambda > 2 delta, got lambda={lam}, delta={delta}")
    x0 = int(x0)
    if not domain.ring.reshape(-1)[x0]:
        raise ValueError("x0 must be a ring node")
    X, Y = domain.coords()
    px, py = domain.node_xy(x0)
    r2 = (X - px) ** 2 + (Y - py) ** 2
    region = domain.omega & (r2 < delta * delta)
    v = r2 + lam * ring_distance(domain)
    g0 = float(g.values.reshape(-1)[x0])
    pw = K * v ** (alpha / 2)
    wp = np.where(region, g0 + pw, np.nan)
    wm = g0 - pw
    if psi is not None:
        wm = np.maximum(wm, np.where(domain.omega, psi.values, -np.inf))
    wm = np.where(region, wm, np.nan)
    holds = None
    lo = hi = math.nan
    if u is not None:
        uv = u.values if isinstance(u, ScalarField) else np.asarray(u)
        lo = float(np.max(wm[region] - uv[region]))
        hi = float(np.max(uv[region] - wp[region]))
        holds = bool(lo <= 0 and hi <= 0)
    return BarrierResult(x0, float(K), float(lam), float(alpha), float(delta), region, wm, wp, holds, lo, hi)


def barrier_sweep(x0, lam, alpha, delta, sol: Solution, Ks=None):
    """Smallest K on a geometric grid for which the sandwich holds (None if none)."""
    if Ks is None:
        Ks = 2.0 ** np.arange(-4, 21)
    last = None
    for K in Ks:
        res = barrier_eval(x0, lam, K, alpha, sol.domain, sol.g, sol.psi, delta, sol.u)
        last = res
        if res.holds:
            return res
    return last


def critical_K(x0, lam, alpha, delta, sol: Solution) -> float:
    """Infimum of the K making both barrier inequalities hold at ``x0``.

    Both sides need K v^(alpha/2) >= |u - g(x0)| on the region (the obstacle term
    of the lower barrier is harmless because u >= psi).
    """
    res = barrier_eval(x0, lam, 1.0, alpha, sol.domain, sol.g, None, delta)
    reg = res.region
    p = (res.omega_plus - float(sol.g.values.reshape(-1)[int(x0)]))[reg]
    dev = np.abs(sol.u.values[reg] - float(sol.g.values.reshape(-1)[int(x0)]))
    if np.any((p <= 0) & (dev > 0)):
        return math.inf
    pos = p > 0
    return float(np.max(dev[pos] / p[pos])) if pos.any() else 0.0


# ------------------------------------------------------------------ contact

DISJOINT = "disjoint-boundaries"
EQUAL = "locally-equal"
VIOLATION = "VIOLATION"


@dataclass(frozen=True)
class ContactVerdict:
    kind: str
    shared: int  # shared boundary 4-edges inside the window
    witness: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))

    @property
    def violation(self) -> bool:
        return self.kind == VIOLATION


def _shared_edges(E, F, win):
    """Mask of nodes p in E (inside the window) with a 4-neighbour q outside F (inside the window)."""
    Em, Fm = E.membership, F.membership
    hit = np.zeros(Em.shape, bool)
    partner = np.zeros(Em.shape, bool)
    H, W = Em.shape
    for di, dj in ((0, 1), (0, -1), (1, 0), (-1, 0)):
        q_out = np.zeros_like(Em)
        q_win = np.zeros_like(Em)
        src = (slice(max(0, di), H + min(0, di)), slice(max(0, dj), W + min(0, dj)))
        dst = (slice(max(0, -di), H + min(0, -di)), slice(max(0, -dj), W + min(0, -dj)))
        q_out[dst] = ~Fm[src]
        q_win[dst] = win[src]
        here = Em & win & q_out & q_win
        hit |= here
        back = np.zeros_like(Em)
        back[src] = here[dst]
        partner |= back
    return hit, partner


def contact_probe(E: PixelSet, F: PixelSet, window, radius=1) -> ContactVerdict:
    """Classify boundary contact of E inside F within ``window``.

    A shared boundary edge is a 4-edge {p, q} inside the window with p in E and
    q outside F, i.e. an edge on both boundaries.  If there are none the verdict is
    disjoint; if E and F agree on every window node within Chebyshev distance
    ``radius`` of a shared edge they are locally equal; otherwise it is a violation.
    """
    if not E.issubset(F):
        raise ValueError("contact_probe needs E inside F")
    win = np.asarray(window, bool)
    hit, partner = _shared_edges(E, F, win)
    n = int(hit.sum())
    if n == 0:
        return ContactVerdict(DISJOINT, 0)
    near = ndimage.binary_dilation(hit | partner, structure=np.ones((3, 3), bool), iterations=radius)
    diff = near & win & (E.membership != F.membership)
    if diff.any():
        return ContactVerdict(VIOLATION, n, np.flatnonzero(diff.reshape(-1)))
    return ContactVerdict(EQUAL, n)


def contact_preconditions(E: PixelSet, F: PixelSet, window, stencil) -> bool:
    """E sub-minimizing and F super-minimizing against changes inside ``window``."""
    check = minimality_oracle if int(np.asarray(window, bool).sum()) <= MAX_WINDOW else minimality_check
    return bool(check(E, window, "sub", stencil)) and bool(check(F, window, "super", stencil))


# ------------------------------------------------------------------ density


class PreconditionFailed(ValueError):
    pass


def _ball(domain, x, r):
    X, Y = domain.coords()
    px, py = domain.node_xy(int(x))
    return (X - px) ** 2 + (Y - py) ** 2 <= r * r


def _check_ball_fits(domain, x, r):
    i, j = divmod(int(x), domain.width)
    k = int(math.floor(r / domain.h + 1e-12))
    if i - k < 0 or j - k < 0 or i + k >= domain.height or j + k >= domain.width:
        raise ValueError(f"ball of radius {r} at node {x} leaves the grid")


@dataclass(frozen=True)
class DensityProfile:
    radii: tuple
    ratios: tuple
    tolerances: tuple
    monotone: bool


def density_profile(E: PixelSet, x, radii) -> DensityProfile:
    """Node-count ratios |E ∩ B_r| / |B_r| and a monotonicity verdict.

    Step k -> k+1 may drop by at most 2h / r_k (ball-discretisation slack).
    """
    radii = [float(r) for r in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be increasing")
    dom = E.domain
    _check_ball_fits(dom, x, radii[-1])
    m = E.membership
    ratios = []
    for r in radii:
        B = _ball(dom, x, r)
        ratios.append(float(np.count_nonzero(m & B)) / float(np.count_nonzero(B)))
    tol = tuple(2 * dom.h / r for r in radii[:-1])
    mono = all(ratios[k + 1] >= ratios[k] - tol[k] for k in range(len(tol)))
    return DensityProfile(tuple(radii), tuple(ratios), tol, bool(mono))


def boundary_nodes(E: PixelSet) -> np.ndarray:
    """Nodes of E with a 4-neighbour outside E (flat indices)."""
    m = E.membership
    inner = ndimage.binary_erosion(m, structure=ndimage.generate_binary_structure(2, 1), border_value=1)
    return np.flatnonzero((m & ~inner).reshape(-1))


@dataclass(frozen=True)
class DensityVerdict:
    ratio: float
    bound: float
    tol: float
    holds: bool


def density_lower_bound(E: PixelSet, x, r, stencil, verify=True) -> DensityVerdict:
    """|E ∩ B_r(x)| / |B_r| >= delta(2) - 4h/r for x on the boundary of a subminimizer.

    With ``verify`` the subminimizing property on the ball is checked exactly first;
    ``PreconditionFailed`` is raised if it does not hold or x is not a boundary node.
    """
    from .foam import delta_2

    dom = E.domain
    _check_ball_fits(dom, x, r)
    if int(x) not in set(boundary_nodes(E).tolist()):
        raise PreconditionFailed("x is not a boundary node of E")
    B = _ball(dom, x, r)
    if verify and not minimality_check(E, B, "sub", stencil):
        raise PreconditionFailed("E is not subminimizing on the ball")
    ratio = float(np.count_nonzero(E.membership & B)) / float(np.count_nonzero(B))
    d2 = delta_2()
    tol = 4 * dom.h / r
    return DensityVerdict(ratio, d2, tol, bool(ratio >= d2 - tol))


# ------------------------------------------------------------------- surveys


@dataclass
class ContactSurvey:
    windows: int = 0  # windows that passed the preconditions and were probed
    tried: int = 0
    disjoint: int = 0
    equal: int = 0
    violations: int = 0
    witnesses: list = field(default_factory=list)

    def as_dict(self):
        return {
            "windows": self.windows,
            "tried": self.tried,
            "disjoint": self.disjoint,
            "locally_equal": self.equal,
            "violations": self.violations,
            "ok": self.violations == 0,
        }


def _either_boundary(E, F, region):
    m = np.zeros(E.domain.size, bool)
    m[boundary_nodes(E)] = True
    m[boundary_nodes(F)] = True
    m[boundary_nodes(E.complement())] = True
    m[boundary_nodes(F.complement())] = True
    return np.flatnonzero(m & region.reshape(-1))


def contact_survey(sol: Solution, n_windows=100, seed=0, shape=(4, 5), radius=None, max_tries=None, margin=None) -> ContactSurvey:
    """Probe random windows on consecutive level pairs E_t inside E_s.

    Windows are centred on boundary nodes of either set and kept only when E_t is
    subminimizing and E_s superminimizing in them (checked by enumeration).  Every
    window node stays more than ``margin`` nodes (Chebyshev) from the ring, default
    stencil radius + 1: level boundaries that leave the same jump of g meet on the
    boundary, and next to it the grid cannot separate them.
    """
    rng = np.random.default_rng(seed)
    dom = sol.domain
    rad = sol.stencil.radius if radius is None else radius
    margin = rad + 1 if margin is None else margin
    allowed = dom.interior & (ndimage.distance_transform_cdt(~dom.ring, metric="chessboard") > margin)
    lv = sol.levels
    pairs = []
    for k in range(len(lv) - 1):
        E, F = lv[k + 1].E, lv[k].E
        cand = _either_boundary(E, F, allowed)
        if cand.size:
            pairs.append((E, F, cand))
    out = ContactSurvey()
    if not pairs:
        return out
    max_tries = max_tries or 20 * n_windows
    a, b = shape
    while out.windows < n_windows and out.tried < max_tries:
        out.tried += 1
        E, F, cand = pairs[int(rng.integers(len(pairs)))]
        c = int(cand[int(rng.integers(cand.size))])
        i, j = divmod(c, dom.width)
        i0 = min(max(0, i - a // 2), dom.height - a)
        j0 = min(max(0, j - b // 2), dom.width - b)
        win = np.zeros(dom.shape, bool)
        win[i0 : i0 + a, j0 : j0 + b] = True
        if not np.all(allowed[win]):
            continue
        if not contact_preconditions(E, F, win, sol.stencil):
            continue
        v = contact_probe(E, F, win, rad)
        out.windows += 1
        if v.kind == DISJOINT:
            out.disjoint += 1
        elif v.kind == EQUAL:
            out.equal += 1
        else:
            out.violations += 1
            if len(out.witnesses) < 10:
                out.witnesses.append(v.witness[:10].tolist())
    return out


def density_survey(sol: Solution, n_points=20, seed=0, r_nodes=5, max_tries=None) -> dict:
    """Lower density bound at random boundary points of random levels.

    Points whose ball is not subminimizing (for example because it reaches forced
    nodes) fail the precondition and are counted separately.
    """
    rng = np.random.default_rng(seed)
    dom = sol.domain
    r = r_nodes * dom.h
    levels = [lv for lv in sol.levels if 0 < lv.E.volume < dom.size]
    res = {"points": 0, "tried": 0, "precondition_failed": 0, "holds": 0, "min_ratio": None, "radius": r}
    if not levels:
        return res
    max_tries = max_tries or 10 * n_points
    while res["points"] < n_points and res["tried"] < max_tries:
        res["tried"] += 1
        E = levels[int(rng.integers(len(levels)))].E
        bn = boundary_nodes(E)
        bn = bn[dom.omega.reshape(-1)[bn]]
        if bn.size == 0:
            continue
        x = int(bn[int(rng.integers(bn.size))])
        try:
            v = density_lower_bound(E, x, r, sol.stencil)
        except PreconditionFailed:
            res["precondition_failed"] += 1
            continue
        except ValueError:
            continue
        res["points"] += 1
        res["holds"] += int(v.holds)
        res["min_ratio"] = v.ratio if res["min_ratio"] is None else min(res["min_ratio"], v.ratio)
    res["ok"] = res["holds"] == res["points"]
    return res

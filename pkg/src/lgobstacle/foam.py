"""Planar ball geometry: the density constant, two-ball obstacle problems and
a finite-stage construction of a dense union of shrinking disjoint balls.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate, optimize

SQRT2 = math.sqrt(2.0)


class FoamInfeasible(ValueError):
    """The requested stage cannot be built inside V."""


# ---------------------------------------------------------------- delta(2)


def delta_2() -> float:
    """Area fraction of the unit disc cut off by a unit arc meeting its boundary at right angles.

    The arc's circle has its centre sqrt(2) from the origin, so the cut-off piece is the
    lens of two unit circles at that distance: area pi/2 - 1.
    """
    return (math.pi / 2 - 1) / math.pi


def delta_2_quadrature() -> float:
    """Same constant by integrating the lens height over x."""

    def height(x):
        a = 1 - x * x
        b = 1 - (x - SQRT2) ** 2
        return 2 * math.sqrt(max(0.0, min(a, b)))

    lo, hi = SQRT2 - 1, 1.0
    area, _ = integrate.quad(height, lo, hi, points=[SQRT2 / 2], epsabs=1e-13, epsrel=1e-13, limit=200)
    return area / math.pi


def delta_2_montecarlo(n=10_000_000, seed=0, chunk=1_000_000):
    """Monte-Carlo estimate and its standard error, sampling the square [-1, 1]^2."""
    rng = np.random.default_rng(seed)
    in_disc = in_lens = 0
    done = 0
    while done < n:
        k = min(chunk, n - done)
        p = rng.uniform(-1.0, 1.0, size=(k, 2))
        r2 = np.einsum("ij,ij->i", p, p)
        d = r2 <= 1.0
        lens = d & ((p[:, 0] - SQRT2) ** 2 + p[:, 1] ** 2 <= 1.0)
        in_disc += int(d.sum())
        in_lens += int(lens.sum())
        done += k
    est = in_lens / in_disc
    se = math.sqrt(est * (1 - est) / in_disc)
    return est, se


# ------------------------------------------------------------------ two balls


@dataclass(frozen=True)
class BallSpec:
    center: tuple
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @property
    def perimeter(self) -> float:
        return 2 * math.pi * self.radius

    @property
    def area(self) -> float:
        return math.pi * self.radius**2


def hull_perimeter(R, r, d) -> float:
    """Perimeter of the convex hull of two discs (radii R >= r, centre distance d)."""
    if R < r:
        R, r = r, R
    if d <= R - r:
        return 2 * math.pi * R
    L = math.sqrt(d * d - (R - r) ** 2)
    beta = math.asin((R - r) / d)
    return 2 * L + R * (math.pi + 2 * beta) + r * (math.pi - 2 * beta)


def hull_perimeter_quadrature(R, r, d) -> float:
    """Cauchy formula: the perimeter of a convex body is the integral of its support function."""

    def h(th):
        return max(R, d * math.cos(th) + r)

    # breakpoints where the two supports cross
    pts = []
    c = (R - r) / d
    if -1 < c < 1:
        a = math.acos(c)
        pts = [a, 2 * math.pi - a]
    val, _ = integrate.quad(h, 0.0, 2 * math.pi, points=pts, epsabs=1e-13, epsrel=1e-13, limit=400)
    return val


@dataclass(frozen=True)
class TwoBall:
    optimal: str  # "union" or "hull"
    union: float
    hull: float
    margin: float  # hull - union; positive when the union is optimal

    @property
    def delta(self) -> float:
        return abs(self.margin)


def two_ball_solution(x0, R, x1, r, separation=None) -> TwoBall:
    """Least-perimeter set containing both closed discs: their union or their convex hull.

    ``separation`` overrides the centre distance (the centres are then only used for
    validation).  Raises ``ValueError`` when the closed discs meet.
    """
    d = math.dist(x0, x1) if separation is None else float(separation)
    if not (R > 0 and r > 0):
        raise ValueError("radii must be positive")
    if d <= R + r:
        raise ValueError("balls overlap or touch")
    union = 2 * math.pi * (R + r)
    hull = hull_perimeter(R, r, d)
    m = hull - union
    return TwoBall("union" if m > 0 else "hull", union, hull, m)


def union_threshold(R, d) -> float:
    """Largest r (with the discs disjoint) for which the union still beats the hull.

    Returns the disjointness limit ``d - R`` when the union wins all the way there.
    """
    lim = d - R
    if lim <= 0:
        return 0.0

    def f(r):
        return hull_perimeter(R, r, d) - 2 * math.pi * (R + r)

    top = lim * (1 - 1e-12)
    if f(top) > 0:
        return lim
    return optimize.brentq(f, 0.0, top, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def tube_increment(R, r, d, w) -> float:
    """Perimeter change from joining two disjoint discs by a straight tube of width w.

    The tube runs along the centre line; each disc loses the arc under the tube and
    the two tube sides are added.
    """
    if not (0 < w < 2 * r and w < 2 * R):
        raise ValueError("tube width must be below both diameters")
    if d <= R + r:
        raise ValueError("discs must be disjoint")
    side = d - math.sqrt(R * R - w * w / 4) - math.sqrt(r * r - w * w / 4)
    arcs = 2 * R * math.asin(w / (2 * R)) + 2 * r * math.asin(w / (2 * r))
    return 2 * side - arcs


# -------------------------------------------------------------------- foam


@dataclass(frozen=True)
class FoamStage:
    index: int
    balls: tuple
    deltas: tuple  # delta_j for j = 1..J
    V: tuple  # (xmin, ymin, xmax, ymax)
    eps: float
    skipped: int = 0  # enumerated points already covered by earlier balls

    @property
    def delta_J(self) -> float:
        return self.deltas[-1]

    @property
    def area(self) -> float:
        return math.fsum(b.area for b in self.balls)

    @property
    def perimeters(self):
        return [b.perimeter for b in self.balls]

    def tail_sums(self):
        """Sum of perimeters of balls after stage k, for k = 1..J."""
        p = self.perimeters
        return [math.fsum(p[k:]) for k in range(1, len(p) + 1)]

    def tail_bound_holds(self) -> bool:
        """Every finite tail sum and the geometric bound on the infinite tail stay below delta_k."""
        ok = all(s < dk for s, dk in zip(self.tail_sums(), self.deltas))
        # future balls have perimeter < delta_J / 2, delta_J / 4, ...
        return ok and self.deltas[-1] > 0

    def disjoint(self) -> bool:
        b = self.balls
        for i in range(len(b)):
            for j in range(i):
                if math.dist(b[i].center, b[j].center) <= b[i].radius + b[j].radius:
                    return False
        return True

    def inside_V(self) -> bool:
        x0, y0, x1, y1 = self.V
        return all(
            x0 < c[0] - r and c[0] + r < x1 and y0 < c[1] - r and c[1] + r < y1
            for c, r in ((b.center, b.radius) for b in self.balls)
        )

    def pair_margins(self):
        """Two-ball margins (hull minus union) for every pair."""
        out = []
        b = self.balls
        for i in range(len(b)):
            for j in range(i):
                out.append(two_ball_solution(b[i].center, b[i].radius, b[j].center, b[j].radius).margin)
        return out

    def to_json(self) -> str:
        data = {
            "index": self.index,
            "V": list(self.V),
            "eps": self.eps,
            "balls": [
                {"center": list(b.center), "radius": b.radius, "delta": d} for b, d in zip(self.balls, self.deltas)
            ],
        }
        return json.dumps(data, indent=2, sort_keys=True)


def lattice_points(V, seed=0, max_depth=30):
    """Dyadic lattice points of V, coarse to fine, each level shuffled by a seeded rng.

    Level k holds the cell centres of the 2^k x 2^k subdivision that are new at that
    level; together the levels are dense in V.
    """
    x0, y0, x1, y1 = V
    rng = np.random.default_rng(seed)
    seen = set()
    for k in range(max_depth):
        n = 1 << k
        i = np.arange(n)
        cells = [(a, b) for a in i for b in i]
        order = rng.permutation(len(cells))
        for idx in order:
            a, b = cells[idx]
            # exact dyadic key so repeated centres across levels are skipped
            key = (2 * a + 1) * (1 << (max_depth - k)), (2 * b + 1) * (1 << (max_depth - k))
            if key in seen:
                continue
            seen.add(key)
            yield (x0 + (x1 - x0) * (2 * a + 1) / (2 * n), y0 + (y1 - y0) * (2 * b + 1) / (2 * n))


def _radius_sup(p, balls, V, delta_j):
    """Supremum of admissible radii at p against the current balls and budget."""
    x0, y0, x1, y1 = V
    s = min(p[0] - x0, x1 - p[0], p[1] - y0, y1 - p[1])
    s = min(s, delta_j / (4 * math.pi))
    for b in balls:
        d = math.dist(p, b.center)
        gap = d - b.radius
        if gap <= 0:
            return 0.0
        s = min(s, gap, union_threshold(b.radius, d))
    return max(0.0, s)


def foamy_construct(V, eps, J, seed=0, max_points=1_000_000) -> FoamStage:
    """First J balls of the foam inside the rectangle ``V = (xmin, ymin, xmax, ymax)``.

    r_1 = 0.45 eps.  Each later radius is half the supremum allowed by: staying inside
    V and off earlier balls, perimeter below delta_j / 2, and a positive union-versus-hull
    margin against every earlier ball; it is also capped at r_j / 2.  The new margin is
    delta_{j+1} = min(delta_j / 2, margins against earlier balls).
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if J < 1:
        raise ValueError("J must be at least 1")
    x0, y0, x1, y1 = map(float, V)
    if not (x1 > x0 and y1 > y0):
        raise ValueError("V must have positive width and height")
    V = (x0, y0, x1, y1)
    pts = lattice_points(V, seed)
    p = next(pts)
    r1 = 0.45 * eps
    if not (x0 < p[0] - r1 and p[0] + r1 < x1 and y0 < p[1] - r1 and p[1] + r1 < y1):
        raise FoamInfeasible(f"first ball of radius {r1} does not fit in V")
    balls = [BallSpec(p, r1)]
    deltas = [2 * math.pi * r1]
    skipped = 0
    used = 1
    for p in pts:
        if len(balls) >= J:
            break
        used += 1
        if used > max_points:
            raise FoamInfeasible(f"only {len(balls)} of {J} balls placed after {max_points} points")
        if any(math.dist(p, b.center) <= b.radius for b in balls):
            skipped += 1
            continue
        sup = _radius_sup(p, balls, V, deltas[-1])
        if sup <= 0:
            skipped += 1
            continue
        r = min(0.5 * sup, balls[-1].radius / 2)
        nb = BallSpec(p, r)
        margins = [two_ball_solution(nb.center, r, b.center, b.radius).margin for b in balls]
        dnew = min([deltas[-1] / 2] + margins)
        if not dnew > 0:  # pragma: no cover - excluded by the threshold above
            raise FoamInfeasible("non-positive margin")
        balls.append(nb)
        deltas.append(dnew)
    if len(balls) < J:
        raise FoamInfeasible(f"only {len(balls)} of {J} balls could be placed")
    return FoamStage(index=J, balls=tuple(balls), deltas=tuple(deltas), V=V, eps=float(eps), skipped=skipped)


# ---------------------------------------------------------------- rasters


def raster_grid(V, n, pad_nodes=0):
    """Node coordinates of an n x n grid over V (cell centres), padded by ``pad_nodes``."""
    x0, y0, x1, y1 = V
    hx = (x1 - x0) / n
    hy = (y1 - y0) / n
    if not math.isclose(hx, hy, rel_tol=1e-12):
        raise ValueError("raster needs a square V")
    xs = x0 + hx * (np.arange(-pad_nodes, n + pad_nodes) + 0.5)
    ys = y0 + hy * (np.arange(-pad_nodes, n + pad_nodes) + 0.5)
    X, Y = np.meshgrid(xs, ys)
    return X, Y, hx


def rasterize(balls, X, Y) -> np.ndarray:
    m = np.zeros(X.shape, bool)
    for b in balls:
        m |= (X - b.center[0]) ** 2 + (Y - b.center[1]) ** 2 < b.radius**2
    return m


def coverage(stage: FoamStage, dist, n=256, upto=None) -> float:
    """Fraction of V's raster nodes within ``dist`` of the first ``upto`` balls."""
    X, Y, _ = raster_grid(stage.V, n)
    near = np.zeros(X.shape, bool)
    for b in stage.balls[: upto or len(stage.balls)]:
        near |= np.hypot(X - b.center[0], Y - b.center[1]) <= b.radius + dist
    return float(near.mean())


@dataclass(frozen=True)
class TwoBallDiscrete:
    perimeter: float  # discrete minimum over sets containing both digital discs
    components: int
    closed_form: TwoBall
    rel_err: float  # against the optimal closed-form perimeter


def two_ball_discrete(R, r, d, n=512, order=16) -> TwoBallDiscrete:
    """Solve the two-disc obstacle problem on an n x n raster with an exact min cut.

    The discs sit on the x-axis inside a frame of four stencil radii of free nodes,
    surrounded by a collar pinned out.  Returns the smallest minimizer's perimeter.
    """
    from scipy import ndimage

    from .grid import COLLAR, INTERIOR, GridDomain, PixelSet
    from .mincut import min_cut
    from .perimeter import make_stencil, perimeter

    rad = make_stencil(order).radius
    width = d + R + r
    free_frame = 4 * rad + rad
    h = width / (n - 2 * free_frame)
    st = make_stencil(order, h)
    cx = (np.arange(n) - (n - 1) / 2) * h
    X, Y = np.meshgrid(cx, cx)
    c0 = (-width / 2 + R, 0.0)
    c1 = (width / 2 - r, 0.0)
    inside = rasterize([BallSpec(c0, R), BallSpec(c1, r)], X, Y)
    labels = np.full((n, n), INTERIOR, np.int8)
    labels[:rad, :] = COLLAR
    labels[-rad:, :] = COLLAR
    labels[:, :rad] = COLLAR
    labels[:, -rad:] = COLLAR
    dom = GridDomain(labels=labels, h=h, collar_width=rad, origin=(cx[0], cx[0]), name="two-ball")
    cut = min_cut(dom, st, PixelSet(dom, inside), PixelSet(dom, labels == COLLAR))
    E = cut.E_min
    _, ncomp = ndimage.label(E.membership, structure=np.ones((3, 3)))
    cf = two_ball_solution(c0, R, c1, r)
    target = min(cf.union, cf.hull)
    p = perimeter(E, "rn", st).total
    return TwoBallDiscrete(p, int(ncomp), cf, abs(p - target) / target)


@dataclass(frozen=True)
class FoamCheck:
    windows: int
    window_failures: int
    tube_checks: int
    tube_failures: int
    raster_balls: int
    raster_components: int
    raster_excess: float  # |E_min minus digital balls| / |digital balls|
    min_tube_excess: float  # min over tubes of (tube increment - margin)

    @property
    def ok(self) -> bool:
        return self.window_failures == 0 and self.tube_failures == 0

    def as_dict(self):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["ok"] = self.ok
        return d


def foam_superminimality_check(stage: FoamStage, trials=500, n=256, seed=0, widths=(0.05, 0.2, 0.5, 0.9), window_side=4) -> FoamCheck:
    """Discrete and closed-form checks that F_J resists union perturbations.

    The raster of F_J is replaced by the smallest min-perimeter set containing it
    (which coincides with the digital balls when rasterisation is faithful), then
    random windows are tested in ``super`` mode by enumeration.  Tubes of relative
    width ``w`` joining pairs of balls are compared with the recorded margins.
    """
    from .grid import GridDomain, PixelSet, COLLAR, INTERIOR
    from .mincut import min_cut
    from .perimeter import make_stencil, minimality_oracle
    from scipy import ndimage

    rng = np.random.default_rng(seed)
    pad = 4 * 2  # four stencil radii of the order-16 stencil
    X, Y, h = raster_grid(stage.V, n, pad)
    st = make_stencil(16, h)
    D = rasterize(stage.balls, X, Y)
    N = X.shape[0]
    labels = np.full((N, N), INTERIOR, np.int8)
    cw = st.radius
    labels[:cw, :] = COLLAR
    labels[-cw:, :] = COLLAR
    labels[:, :cw] = COLLAR
    labels[:, -cw:] = COLLAR
    dom = GridDomain(labels=labels, h=h, collar_width=cw, origin=(float(X[0, 0]), float(Y[0, 0])), name="foam")
    cut = min_cut(dom, st, PixelSet(dom, D), PixelSet(dom, labels == COLLAR))
    E = cut.E_min
    nballs = sum(1 for b in stage.balls if np.any((X - b.center[0]) ** 2 + (Y - b.center[1]) ** 2 < b.radius**2))
    _, ncomp = ndimage.label(E.membership, structure=np.ones((3, 3)))
    excess = float(np.count_nonzero(E.membership & ~D)) / max(1, int(D.sum()))

    fails = 0
    inner = np.argwhere(labels != COLLAR)
    lo = inner.min(axis=0)
    hi = inner.max(axis=0) - window_side
    for _ in range(trials):
        i = int(rng.integers(lo[0], hi[0] + 1))
        j = int(rng.integers(lo[1], hi[1] + 1))
        win = np.zeros((N, N), bool)
        win[i : i + window_side, j : j + window_side] = True
        if not minimality_oracle(E, win, "super", st):
            fails += 1

    tube_checks = tube_fails = 0
    worst = math.inf
    b = stage.balls
    for a in range(len(b)):
        for c in range(a):
            R, r = b[c].radius, b[a].radius
            d = math.dist(b[a].center, b[c].center)
            m = two_ball_solution(b[a].center, r, b[c].center, R).margin
            for w in widths:
                width = w * 2 * min(R, r)
                inc = tube_increment(R, r, d, width)
                tube_checks += 1
                worst = min(worst, inc - m)
                if not (inc > 0 and inc >= m * (1 - 1e-12)):
                    tube_fails += 1
    return FoamCheck(
        windows=trials,
        window_failures=fails,
        tube_checks=tube_checks,
        tube_failures=tube_fails,
        raster_balls=nballs,
        raster_components=int(ncomp),
        raster_excess=excess,
        min_tube_excess=float(worst),
    )

"""Discrete perimeter on grid graphs and brute-force minimality oracles.

A stencil is a symmetric set of integer node offsets with Cauchy-Crofton weights.
Weights are stored as integers (``units``) with ``scale`` units per grid spacing so
that every cut value is exact; length = units * h / scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .grid import COLLAR, GridDomain, PixelSet

SCALE = 1 << 16
MAX_WINDOW = 22

_HALF = {
    4: ((0, 1), (1, 0)),
    8: ((0, 1), (1, 0), (1, 1), (1, -1)),
    16: ((0, 1), (1, 0), (1, 1), (1, -1), (1, 2), (2, 1), (1, -2), (2, -1)),
}


class WindowTooLarge(ValueError):
    pass


def _crofton(half):
    """Cauchy-Crofton weights (per unit spacing) for a half-stencil.

    Each edge direction gets half its angular share of [0, pi) divided by its length.
    """
    v = np.asarray(half, float)
    ang = np.mod(np.arctan2(v[:, 0], v[:, 1]), np.pi)
    order = np.argsort(ang)
    a = ang[order]
    prev = np.roll(a, 1)
    prev[0] -= np.pi
    nxt = np.roll(a, -1)
    nxt[-1] += np.pi
    dphi = (nxt - prev) / 2
    w = np.empty(len(v))
    w[order] = dphi / (2 * np.hypot(v[order, 0], v[order, 1]))
    return w


@dataclass(frozen=True, eq=False)
class Stencil:
    order: int
    h: float
    offsets: np.ndarray  # (k, 2) integer (di, dj), symmetric
    units: np.ndarray  # integer weight per offset
    scale: int = SCALE

    @property
    def weights(self):
        """Edge weights in length units."""
        return self.units * (self.h / self.scale)

    @property
    def radius(self) -> int:
        return int(np.max(np.abs(self.offsets)))

    def half(self):
        """One representative per unordered direction: ``(offsets, units)``."""
        o = self.offsets
        keep = (o[:, 0] > 0) | ((o[:, 0] == 0) & (o[:, 1] > 0))
        return o[keep], self.units[keep]

    def to_length(self, units) -> float:
        return float(units) * self.h / self.scale


def make_stencil(order: int, h: float = 1.0) -> Stencil:
    """Neighbourhood stencil of order 4, 8 or 16.

    Order 4 uses weight h on each axis edge (Manhattan perimeter); orders 8 and 16 use
    Cauchy-Crofton weights.  Order 16 is checked against a digital disc of radius 20h.
    """
    if order not in _HALF:
        raise ValueError(f"unsupported stencil order {order}; use 4, 8 or 16")
    if not h > 0:
        raise ValueError("h must be positive")
    half = np.array(_HALF[order], np.int64)
    w = np.ones(len(half)) if order == 4 else _crofton(half)
    units_half = np.round(w * SCALE).astype(np.int64)
    offsets = np.concatenate([half, -half])
    units = np.concatenate([units_half, units_half])
    st = Stencil(order=order, h=float(h), offsets=offsets, units=units)
    if order == 16:
        ratio = _disc_ratio(st, 20)
        if not 0.98 <= ratio <= 1.02:  # pragma: no cover - guards the weight table
            raise RuntimeError(f"order-16 disc calibration off: {ratio:.4f}")
    return st


def _disc_ratio(st: Stencil, r: int) -> float:
    n = 2 * r + 2 * st.radius + 4
    c = (np.arange(n) - (n - 1) / 2)
    X, Y = np.meshgrid(c, c)
    E = X * X + Y * Y < r * r
    units = 0
    for (di, dj), u in zip(*st.half()):
        a, b = _shift_pairs(E, di, dj)
        units += int(u) * int(np.count_nonzero(a != b))
    return units / st.scale / (2 * math.pi * r)


def _shift_pairs(A, di, dj):
    n, m = A.shape
    a = A[max(0, -di) : n - max(0, di), max(0, -dj) : m - max(0, dj)]
    b = A[max(0, di) : n - max(0, -di), max(0, dj) : m - max(0, -dj)]
    return a, b


# --------------------------------------------------------------------- edges


@dataclass(frozen=True, eq=False)
class EdgeList:
    """Every unordered stencil edge of a domain.

    ``kind``: 0 both endpoints in the closed domain, 1 one in / one in the collar,
    2 both in the collar.
    """

    p: np.ndarray
    q: np.ndarray
    units: np.ndarray
    kind: np.ndarray


def edge_list(domain: GridDomain, stencil: Stencil) -> EdgeList:
    key = ("edges", stencil.order)
    hit = domain._cache.get(key)
    if hit is not None:
        return hit
    H, W = domain.shape
    idx = np.arange(H * W, dtype=np.int64).reshape(H, W)
    ps, qs, us = [], [], []
    for (di, dj), u in zip(*stencil.half()):
        a, b = _shift_pairs(idx, int(di), int(dj))
        ps.append(a.reshape(-1))
        qs.append(b.reshape(-1))
        us.append(np.full(a.size, u, np.int64))
    p = np.concatenate(ps)
    q = np.concatenate(qs)
    lab = domain.labels.reshape(-1)
    kind = (lab[p] == COLLAR).astype(np.int8) + (lab[q] == COLLAR).astype(np.int8)
    el = EdgeList(p=p, q=q, units=np.concatenate(us), kind=kind)
    domain._cache[key] = el
    return el


@dataclass(frozen=True)
class PerimeterValue:
    """Perimeter split by where the cut edges sit.

    ``interior``: both endpoints in the closed domain; ``crossing``: one endpoint in the
    collar; ``exterior``: both in the collar.  Floats are length units; the ``*_units``
    fields are the exact integer weight sums.
    """

    units_interior: int
    units_crossing: int
    units_exterior: int
    unit_length: float

    @property
    def interior(self) -> float:
        return self.units_interior * self.unit_length

    @property
    def crossing(self) -> float:
        return self.units_crossing * self.unit_length

    @property
    def exterior(self) -> float:
        return self.units_exterior * self.unit_length

    @property
    def units(self) -> int:
        return self.units_interior + self.units_crossing + self.units_exterior

    @property
    def total(self) -> float:
        return self.units * self.unit_length

    def as_dict(self) -> dict:
        return {
            "total": self.total,
            "interior": self.interior,
            "crossing": self.crossing,
            "exterior": self.exterior,
            "units": self.units,
        }


def _members(E, domain=None):
    if isinstance(E, PixelSet):
        return E.domain, E.membership
    if domain is None:
        raise TypeError("raw membership arrays need an explicit domain")
    return domain, np.asarray(E, bool)


def perimeter(E, region="omega", stencil: Optional[Stencil] = None, domain=None) -> PerimeterValue:
    """Weighted count of stencil edges cut by ``E``.

    ``region``: ``"omega"`` keeps edges with both endpoints in the closed domain,
    ``"rn"`` keeps all edges, ``("ball", (x, y), r)`` keeps edges whose midpoint is
    within distance ``r`` of ``(x, y)``.
    """
    dom, m = _members(E, domain)
    if stencil is None:
        raise TypeError("stencil required")
    el = edge_list(dom, stencil)
    flat = m.reshape(-1)
    cut = flat[el.p] != flat[el.q]
    if region == "omega":
        keep = cut & (el.kind == 0)
    elif region == "rn":
        keep = cut
    elif isinstance(region, tuple) and region and region[0] == "ball":
        _, (cx, cy), r = region
        X0, Y0 = dom.origin
        w = dom.width
        pi, pj = np.divmod(el.p[cut], w)
        qi, qj = np.divmod(el.q[cut], w)
        mx = X0 + dom.h * (pj + qj) / 2
        my = Y0 + dom.h * (pi + qi) / 2
        inside = (mx - cx) ** 2 + (my - cy) ** 2 < r * r
        keep = np.zeros_like(cut)
        keep[np.flatnonzero(cut)[inside]] = True
        gx0, gx1 = X0, X0 + dom.h * (dom.width - 1)
        gy0, gy1 = Y0, Y0 + dom.h * (dom.height - 1)
        if cx - r < gx0 - dom.h or cx + r > gx1 + dom.h or cy - r < gy0 - dom.h or cy + r > gy1 + dom.h:
            raise ValueError("ball region extends outside the grid")
    else:
        raise ValueError(f"unknown region {region!r}")
    u = el.units[keep]
    k = el.kind[keep]
    return PerimeterValue(
        units_interior=int(u[k == 0].sum()),
        units_crossing=int(u[k == 1].sum()),
        units_exterior=int(u[k == 2].sum()),
        unit_length=stencil.h / stencil.scale,
    )


def submodularity_check(E, F, stencil: Stencil, region="omega") -> bool:
    """P(E|F) + P(E&F) <= P(E) + P(F), evaluated exactly in integer units."""
    a = perimeter(E | F, region, stencil).units
    b = perimeter(E & F, region, stencil).units
    c = perimeter(E, region, stencil).units
    d = perimeter(F, region, stencil).units
    return a + b <= c + d


# -------------------------------------------------------------- minimality


@dataclass(frozen=True)
class MinimalityVerdict:
    holds: bool
    mode: str
    units_E: int
    units_best: int
    witness: Optional[PixelSet] = None
    method: str = "enumeration"

    def __bool__(self):
        return self.holds


def _window_mask(domain, window):
    w = np.asarray(window)
    if w.dtype == bool:
        if w.shape != domain.shape:
            raise ValueError("window mask shape mismatch")
        return w
    m = np.zeros(domain.size, bool)
    m[w.astype(np.int64).reshape(-1)] = True
    return m.reshape(domain.shape)


def _crop(domain, stencil, box_mask):
    """Sub-domain around ``box_mask`` padded by the stencil radius."""
    from .grid import GridDomain

    ii, jj = np.nonzero(box_mask)
    pad = stencil.radius + 1
    i0 = max(0, ii.min() - pad)
    i1 = min(domain.height, ii.max() + pad + 1)
    j0 = max(0, jj.min() - pad)
    j1 = min(domain.width, jj.max() + pad + 1)
    sub = GridDomain(
        labels=domain.labels[i0:i1, j0:j1],
        h=domain.h,
        collar_width=domain.collar_width,
        origin=(domain.origin[0] + j0 * domain.h, domain.origin[1] + i0 * domain.h),
        name=domain.name + "-crop",
    )
    return sub, (slice(i0, i1), slice(j0, j1))


def _free_for_mode(m, win, mode):
    if mode == "min":
        return win
    if mode == "super":
        return win & ~m
    if mode == "sub":
        return win & m
    raise ValueError(f"mode must be min, sub or super, not {mode!r}")


def minimality_oracle(E: PixelSet, window, mode: str, stencil: Stencil) -> MinimalityVerdict:
    """Exhaustive minimality test of ``E`` against perturbations inside ``window``.

    ``min``: every F with E△F inside the window; ``super``: every E∪F; ``sub``: every
    E∩F.  The witness is a violating set with the fewest flipped nodes, ties broken by
    the smallest bitmask (bit k = k-th window node in flat order).
    """
    from .kernels import enumerate_cut_costs
    from .mincut import build_network

    dom = E.domain
    win = _window_mask(dom, window)
    if int(win.sum()) > MAX_WINDOW:
        raise WindowTooLarge(f"window has {int(win.sum())} nodes; limit is {MAX_WINDOW}")
    m = E.membership
    free = _free_for_mode(m, win, mode)
    if not free.any():
        u = perimeter(E, "rn", stencil).units
        return MinimalityVerdict(True, mode, u, u)
    sub, sl = _crop(dom, stencil, win)
    ms = m[sl]
    fs = free[sl]
    net = build_network(sub, stencil, PixelSet(sub, ms & ~fs), PixelSet(sub, ~ms & ~fs))
    costs = enumerate_cut_costs(net.n, net.start, net.adj, net.head, net.cap, net.src, net.snk, net.offset)
    order = net.free  # flat indices in sub, increasing
    bits = np.zeros(net.n, np.int64)
    bits[:] = 1 << np.arange(net.n)
    e_mask = int(bits[ms.reshape(-1)[order]].sum())
    cE = int(costs[e_mask])
    best = int(costs.min())
    if best >= cE:
        return MinimalityVerdict(True, mode, cE, best)
    viol = np.flatnonzero(costs < cE)
    flips = np.bitwise_count(viol ^ e_mask)
    pick = int(viol[np.flatnonzero(flips == flips.min())[0]])
    wm = m.copy()
    ii, jj = np.divmod(order, sub.width)
    on = ((pick >> np.arange(net.n)) & 1).astype(bool)
    wm[ii + sl[0].start, jj + sl[1].start] = on
    return MinimalityVerdict(False, mode, cE, best, PixelSet(dom, wm))


def minimality_check(E: PixelSet, window, mode: str, stencil: Stencil) -> MinimalityVerdict:
    """Exact minimality test for windows of any size, via a single min cut.

    The witness, if any, is the smallest minimum-perimeter competitor (not
    necessarily the one with fewest flips).
    """
    from .mincut import build_network, extract_cuts, max_flow

    dom = E.domain
    win = _window_mask(dom, window)
    m = E.membership
    free = _free_for_mode(m, win, mode)
    uE = perimeter(E, "rn", stencil).units
    if not free.any():
        return MinimalityVerdict(True, mode, uE, uE, method="mincut")
    net = build_network(dom, stencil, PixelSet(dom, m & ~free), PixelSet(dom, ~m & ~free))
    max_flow(net)
    cut = extract_cuts(net)
    best = cut.flow_units + net.offset
    if best >= uE:
        return MinimalityVerdict(True, mode, uE, best, method="mincut")
    return MinimalityVerdict(False, mode, uE, best, cut.E_min, method="mincut")

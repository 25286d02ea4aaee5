"""Discrete domains, fields on them, and the per-level constraint sets.

Nodes sit on a regular grid with spacing ``h``; array index ``[i, j]`` is the node at
``x = x0 + j*h``, ``y = y0 + i*h``.  Every node carries one of three labels:

* ``COLLAR``   - outside the closed domain, where the extended data G lives,
* ``INTERIOR`` - inside, not touching the collar,
* ``RING``     - inside and 4-adjacent to the collar; the discrete trace of the boundary.

The closed domain is ``INTERIOR | RING``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage

COLLAR = 0
INTERIOR = 1
RING = 2

_N4 = ((-1, 0), (1, 0), (0, -1), (0, 1))


class DomainError(ValueError):
    """Malformed domain descriptor or mask."""


class InadmissibleData(ValueError):
    """Boundary data and obstacle cannot both be honoured at some level."""


def _frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GridDomain:
    labels: np.ndarray
    h: float
    collar_width: int
    origin: tuple = (0.0, 0.0)
    name: str = "mask"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "labels", _frozen(np.asarray(self.labels, np.int8)))

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def shape(self):
        return self.labels.shape

    @property
    def size(self) -> int:
        return self.labels.size

    @property
    def omega(self):
        """Closed domain: interior plus ring."""
        return self.labels != COLLAR

    @property
    def interior(self):
        return self.labels == INTERIOR

    @property
    def ring(self):
        return self.labels == RING

    @property
    def collar(self):
        return self.labels == COLLAR

    def coords(self):
        """Node coordinates ``(X, Y)`` in length units."""
        x0, y0 = self.origin
        jj = x0 + self.h * np.arange(self.width)
        ii = y0 + self.h * np.arange(self.height)
        X, Y = np.meshgrid(jj, ii)
        return X, Y

    def node_xy(self, flat):
        i, j = np.divmod(np.asarray(flat), self.width)
        return self.origin[0] + self.h * j, self.origin[1] + self.h * i

    def nearest_node(self, x, y) -> int:
        j = int(round((x - self.origin[0]) / self.h))
        i = int(round((y - self.origin[1]) / self.h))
        if not (0 <= i < self.height and 0 <= j < self.width):
            raise DomainError(f"point ({x}, {y}) outside the grid")
        return i * self.width + j

    def describe(self) -> dict:
        return {
            "name": self.name,
            "width": self.width,
            "height": self.height,
            "h": self.h,
            "collar_width": self.collar_width,
            "origin": list(self.origin),
            "interior_nodes": int(self.interior.sum()),
            "ring_nodes": int(self.ring.sum()),
        }


@dataclass(frozen=True, eq=False)
class ScalarField:
    domain: GridDomain
    values: np.ndarray
    defined_on: str = "everywhere"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != self.domain.shape:
            raise ValueError(f"field shape {v.shape} != domain shape {self.domain.shape}")
        object.__setattr__(self, "values", _frozen(v))
        if not np.all(np.isfinite(v[region_mask(self.domain, self.defined_on)])):
            raise ValueError(f"field has non-finite values on its region {self.defined_on!r}")

    def on(self, mask):
        return self.values[mask]


def region_mask(domain: GridDomain, tag: str):
    if tag == "everywhere":
        return np.ones(domain.shape, bool)
    if tag == "omega":
        return domain.omega
    if tag == "interior":
        return domain.interior
    if tag == "ring":
        return domain.ring
    if tag == "collar":
        return domain.collar
    if tag == "exterior":
        return domain.collar | domain.ring
    raise ValueError(f"unknown region tag {tag!r}")


@dataclass(frozen=True, eq=False)
class PixelSet:
    domain: GridDomain
    membership: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.membership, dtype=bool)
        if m.shape != self.domain.shape:
            raise ValueError("membership shape does not match domain")
        object.__setattr__(self, "membership", _frozen(m))

    @property
    def volume(self) -> int:
        return int(self.membership.sum())

    def __or__(self, other):
        return PixelSet(self.domain, self.membership | other.membership)

    def __and__(self, other):
        return PixelSet(self.domain, self.membership & other.membership)

    def __sub__(self, other):
        return PixelSet(self.domain, self.membership & ~other.membership)

    def complement(self):
        return PixelSet(self.domain, ~self.membership)

    def issubset(self, other) -> bool:
        return not np.any(self.membership & ~other.membership)

    def same_as(self, other) -> bool:
        return np.array_equal(self.membership, other.membership)

    @classmethod
    def empty(cls, domain):
        return cls(domain, np.zeros(domain.shape, bool))


@dataclass(frozen=True)
class LevelLadder:
    """Thresholds ``t_k`` and the value ``u`` takes on ``A_k``.

    In quantized mode ``values[k]`` is a data value and ``levels[k]`` sits just
    below it; in uniform mode the two coincide.
    """

    levels: tuple
    values: tuple
    a: float
    b: float
    mode: str = "uniform"

    def __post_init__(self):
        if len(self.levels) < 1:
            raise ValueError("ladder needs at least one level")
        if len(self.levels) != len(self.values):
            raise ValueError("levels and values differ in length")
        if any(s >= t for s, t in zip(self.levels, self.levels[1:])):
            raise ValueError("levels must be strictly increasing")

    @property
    def m(self) -> int:
        return len(self.levels)

    @property
    def floor(self) -> float:
        return self.a

    def increments(self):
        """Value jumps ``values[k] - values[k-1]`` with the floor ``a`` before the first."""
        v = np.asarray(self.values, float)
        return np.diff(np.concatenate([[self.a], v]))

    def max_gap(self) -> float:
        return float(np.max(self.increments())) if self.m else 0.0


# ------------------------------------------------------------------ building


def _label_from_omega(omega, collar_width):
    omega = np.asarray(omega, bool)
    if not omega.any():
        raise DomainError("empty interior")
    cw = int(collar_width)
    padded = np.pad(omega, cw, constant_values=False)
    outside = ~padded
    near = np.zeros_like(padded)
    for di, dj in _N4:
        near |= np.roll(outside, (di, dj), axis=(0, 1))
    labels = np.where(padded, INTERIOR, COLLAR).astype(np.int8)
    labels[padded & near] = RING
    return labels


def build_domain(spec: dict) -> GridDomain:
    """Build a domain from ``{"kind": "disc" | "rectangle" | "mask", ...}``.

    Discs use nodes at half-integer multiples of ``h`` so the mask is symmetric under
    both reflections; the closed domain is ``|x| < radius``.  Rectangles are centred
    with one node per cell.  Mask files are PGM images, pixels >= 128 inside.
    """
    kind = spec.get("kind")
    h = float(spec.get("h", 0.0))
    if not h > 0:
        raise DomainError("grid spacing h must be positive")
    cw = int(spec.get("collar", 3))
    if cw < 1:
        raise DomainError("collar_width must be at least 1")

    if kind == "disc":
        R = float(spec["radius"])
        if R <= 0:
            raise DomainError("radius must be positive")
        k = int(math.ceil(R / h))
        c = (np.arange(-k, k) + 0.5) * h
        X, Y = np.meshgrid(c, c)
        omega = X * X + Y * Y < R * R
        origin = (c[0] - cw * h, c[0] - cw * h)
        name = "disc"
    elif kind == "rectangle":
        W = float(spec["width"])
        H = float(spec["height"])
        nx = int(round(W / h))
        ny = int(round(H / h))
        if nx < 1 or ny < 1:
            raise DomainError("empty interior")
        omega = np.ones((ny, nx), bool)
        origin = (-W / 2 + h / 2 - cw * h, -H / 2 + h / 2 - cw * h)
        name = "rectangle"
    elif kind == "mask":
        from .io import read_pgm

        img = read_pgm(spec["path"])
        omega = img >= 128
        ny, nx = omega.shape
        origin = (-(nx - 1) * h / 2 - cw * h, -(ny - 1) * h / 2 - cw * h)
        name = "mask"
    else:
        raise DomainError(f"unknown domain kind {kind!r}")

    if not np.asarray(omega).any():
        raise DomainError("empty interior")
    if spec.get("connected", False):
        _, ncomp = ndimage.label(omega)
        if ncomp != 1:
            raise DomainError(f"interior has {ncomp} 4-connected components")
    labels = _label_from_omega(omega, cw)
    return GridDomain(labels=labels, h=h, collar_width=cw, origin=origin, name=name)


def domain_from_omega(omega, h=1.0, collar_width=3, name="mask") -> GridDomain:
    """Domain from a boolean closed-domain mask (collar is added around it)."""
    omega = np.asarray(omega, bool)
    ny, nx = omega.shape
    labels = _label_from_omega(omega, collar_width)
    origin = (-(nx - 1) * h / 2 - collar_width * h, -(ny - 1) * h / 2 - collar_width * h)
    return GridDomain(labels=labels, h=h, collar_width=int(collar_width), origin=origin, name=name)


# ------------------------------------------------------------- data handling


def extend_boundary_data(g: ScalarField) -> ScalarField:
    """Extend ring data to the collar by nearest ring node.

    Distances are exact integer squared index distances; ties go to the ring node
    with the smaller flat index.  The result is defined on collar and ring.
    """
    dom = g.domain
    ring = dom.ring
    gv = g.values
    if not np.all(np.isfinite(gv[ring])):
        raise ValueError("boundary data undefined on some ring node")
    out = np.full(dom.shape, np.nan)
    out[ring] = gv[ring]
    ring_flat = np.flatnonzero(ring)
    ri, rj = np.divmod(ring_flat, dom.width)
    col_flat = np.flatnonzero(dom.collar)
    ci, cj = np.divmod(col_flat, dom.width)
    best = np.empty(col_flat.size, np.int64)
    step = max(1, 4_000_000 // max(1, ring_flat.size))
    for lo in range(0, col_flat.size, step):
        di = ci[lo : lo + step, None] - ri[None, :]
        dj = cj[lo : lo + step, None] - rj[None, :]
        best[lo : lo + step] = np.argmin(di * di + dj * dj, axis=1)
    flat = out.reshape(-1)
    flat[col_flat] = gv.reshape(-1)[ring_flat[best]]
    return ScalarField(dom, out, "exterior")


def dilate4(mask, within=None):
    """One layer of 4-neighbours added to ``mask`` (optionally clipped to ``within``)."""
    out = ndimage.binary_dilation(mask, structure=ndimage.generate_binary_structure(2, 1))
    if within is not None:
        out &= within
    return out


def obstacle_superlevel(psi: Optional[ScalarField], t: float) -> PixelSet:
    """``L_t``: nodes of the closed domain with psi > t plus their 4-neighbours in it."""
    if psi is None:
        raise ValueError("obstacle is None; use an empty set instead")
    dom = psi.domain
    om = dom.omega
    with np.errstate(invalid="ignore"):
        core = om & (psi.values > t)
    return PixelSet(dom, dilate4(core, om))


def obstacle_hat(psi: ScalarField) -> np.ndarray:
    """Max of psi over each node's closed 4-neighbourhood inside the domain.

    ``x in L_t`` iff ``obstacle_hat(psi)[x] > t``, so this is the pointwise lower
    bound that the level constraints impose on u.
    """
    dom = psi.domain
    v = np.where(dom.omega, psi.values, -np.inf)
    return np.where(
        dom.omega,
        ndimage.maximum_filter(v, footprint=ndimage.generate_binary_structure(2, 1), mode="constant", cval=-np.inf),
        np.nan,
    )


def exterior_superlevel(G: ScalarField, t: float, include_ring: bool = False) -> PixelSet:
    """``𝓛_t``: collar nodes with G >= t (plus ring nodes when ``include_ring``)."""
    dom = G.domain
    region = dom.collar | dom.ring if include_ring else dom.collar
    with np.errstate(invalid="ignore"):
        m = region & (G.values >= t)
    return PixelSet(dom, m)


def compatible_obstacle(psi_values, g: ScalarField):
    """Clip an obstacle so that its 4-neighbourhood max never exceeds the ring trace.

    A node next to (or on) the ring may not exceed the smallest adjacent ring value;
    otherwise the dilated superlevel would force a ring node above its pinned data.
    """
    dom = g.domain
    cap = np.full(dom.shape, np.inf)
    gv = np.where(dom.ring, g.values, np.inf)
    cap = np.minimum(cap, gv)
    for di, dj in _N4:
        cap = np.minimum(cap, np.roll(gv, (di, dj), axis=(0, 1)))
    out = np.where(dom.omega, np.minimum(psi_values, cap), np.nan)
    return out

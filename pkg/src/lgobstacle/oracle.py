"""Brute-force references for small instances.

``level_oracle`` enumerates every membership pattern of the free nodes at one level;
``field_oracle`` enumerates whole fields over the ladder values.  Both are meant for
grids with at most a couple of dozen free nodes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import PixelSet
from .kernels import enumerate_cut_costs
from .mincut import build_network
from .perimeter import edge_list

MAX_FREE = 22


class TooLarge(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LevelOracle:
    min_units: int  # minimum of P(E, R^n)
    n_minimizers: int
    union: PixelSet
    intersection: PixelSet
    volume_max: PixelSet  # the largest minimizer (ties: smallest mask)
    minimizers: np.ndarray  # bitmasks over the free nodes
    free: np.ndarray  # flat index of each free node (bit order)
    fixed_in: np.ndarray

    def member(self, mask) -> PixelSet:
        """PixelSet of a single enumerated minimizer ``mask``."""
        return _mask_to_set(self.union.domain, self.fixed_in, self.free, int(mask))


def _mask_to_set(domain, fixed_in, free, mask):
    m = fixed_in.reshape(-1).copy()
    bits = ((mask >> np.arange(free.size)) & 1).astype(bool)
    m[free] = bits
    return PixelSet(domain, m.reshape(domain.shape))


def level_oracle(domain, stencil, forced_in: PixelSet, forced_out: PixelSet, max_free=MAX_FREE) -> LevelOracle:
    net = build_network(domain, stencil, forced_in, forced_out)
    if net.n > max_free:
        raise TooLarge(f"{net.n} free nodes exceeds the enumeration bound {max_free}")
    costs = enumerate_cut_costs(net.n, net.start, net.adj, net.head, net.cap, net.src, net.snk, net.offset)
    best = int(costs.min())
    mins = np.flatnonzero(costs == best).astype(np.int64)
    union = int(np.bitwise_or.reduce(mins)) if mins.size else 0
    inter = int(np.bitwise_and.reduce(mins)) if mins.size else 0
    pops = np.bitwise_count(mins)
    vmax = int(mins[np.flatnonzero(pops == pops.max())[0]])
    fin = forced_in.membership
    return LevelOracle(
        min_units=best,
        n_minimizers=int(mins.size),
        union=_mask_to_set(domain, fin, net.free, union),
        intersection=_mask_to_set(domain, fin, net.free, inter),
        volume_max=_mask_to_set(domain, fin, net.free, vmax),
        minimizers=mins,
        free=net.free,
        fixed_in=fin,
    )


def field_energy(domain, stencil, ubar) -> float:
    """Sum of w |u(p) - u(q)| over stencil edges not lying wholly in the collar."""
    el = edge_list(domain, stencil)
    keep = el.kind < 2
    f = np.asarray(ubar, float).reshape(-1)
    w = el.units[keep] * (stencil.h / stencil.scale)
    return float(np.sum(w * np.abs(f[el.p[keep]] - f[el.q[keep]])))


@dataclass(frozen=True)
class FieldOracle:
    min_energy: float
    n_minimizers: int
    n_fields: int


def field_oracle(domain, stencil, fixed_values, lower_index, values, max_fields=1 << 21) -> FieldOracle:
    """Minimum of ``field_energy`` over all fields with free interior values in ``values``.

    ``fixed_values`` gives u on ring and collar (NaN on interior nodes, which are free);
    ``lower_index[p]`` is the smallest admissible index into ``values`` at free node p.
    """
    vals = np.asarray(values, float)
    V = vals.size
    fixed = np.asarray(fixed_values, float).reshape(-1)
    free = np.flatnonzero(domain.interior.reshape(-1))
    nf = free.size
    lo = np.asarray(lower_index).reshape(-1)[free].astype(np.int64)
    choices = V - lo
    total = int(np.prod(choices, dtype=np.float64))
    if total > max_fields:
        raise TooLarge(f"{total} fields exceed the enumeration bound {max_fields}")
    el = edge_list(domain, stencil)
    keep = el.kind < 2
    p, q = el.p[keep], el.q[keep]
    w = el.units[keep] * (stencil.h / stencil.scale)
    pos = np.full(domain.size, -1, np.int64)
    pos[free] = np.arange(nf)
    pf, qf = pos[p], pos[q]
    ff = (pf >= 0) & (qf >= 0)
    fx = (pf >= 0) ^ (qf >= 0)
    xx = (pf < 0) & (qf < 0)
    const = float(np.sum(w[xx] * np.abs(fixed[p[xx]] - fixed[q[xx]])))
    fx_node = np.where(pf[fx] >= 0, pf[fx], qf[fx])
    fx_val = np.where(pf[fx] >= 0, fixed[q[fx]], fixed[p[fx]])
    fx_w = w[fx]
    best = np.inf
    nbest = 0
    chunk = 1 << 15
    radix = np.cumprod(np.concatenate([[1], choices[:-1]])).astype(np.int64)[:nf]
    for start in range(0, total, chunk):
        code = np.arange(start, min(total, start + chunk), dtype=np.int64)
        idx = (code[:, None] // radix[None, :]) % choices[None, :] + lo[None, :]
        U = vals[idx]
        J = const + np.abs(U[:, fx_node] - fx_val[None, :]) @ fx_w
        if ff.any():
            J = J + np.abs(U[:, pf[ff]] - U[:, qf[ff]]) @ w[ff]
        m = J.min()
        if m < best - 1e-12 * max(1.0, abs(best) if np.isfinite(best) else 1.0):
            best = float(m)
            nbest = int(np.count_nonzero(J <= m + 1e-12 * max(1.0, abs(m))))
        elif abs(m - best) <= 1e-12 * max(1.0, abs(best)):
            nbest += int(np.count_nonzero(J <= best + 1e-12 * max(1.0, abs(best))))
    return FieldOracle(min_energy=best, n_minimizers=nbest, n_fields=total)

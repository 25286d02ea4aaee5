"""Per-level min-cut solver with minimal and maximal cut extraction.

Forced nodes are contracted into the terminals rather than linked with infinite
arcs: an edge from a free node to a forced-in node becomes source capacity of the
free node, an edge to a forced-out node becomes sink capacity, and edges between
two forced nodes are pre-paid into ``offset``.  Hence for every admissible set E

    P(E, R^n) = cut(E) + offset      (integer weight units).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .grid import GridDomain, PixelSet
from .perimeter import PerimeterValue, Stencil, edge_list, perimeter

FREE, IN, OUT = 0, 1, 2


class ConstraintOverlap(ValueError):
    """A node is both forced in and forced out."""


class FlowNotComputed(RuntimeError):
    pass


@dataclass(eq=False)
class FlowNetwork:
    domain: GridDomain
    stencil: Stencil
    state: np.ndarray  # per grid node: FREE / IN / OUT
    free: np.ndarray  # flat grid index of each free node
    head: np.ndarray
    cap: np.ndarray
    start: np.ndarray
    adj: np.ndarray
    src: np.ndarray
    snk: np.ndarray
    offset: int
    flow_units: Optional[int] = None
    _min_side: Optional[np.ndarray] = None
    _max_side: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return int(self.free.size)

    def write_dimacs(self, path) -> None:
        """DIMACS max-flow dump; source is node n+1, sink n+2 (1-based)."""
        n = self.n
        s, t = n + 1, n + 2
        tail = self.head[np.arange(self.head.size) ^ 1]
        lines = []
        for a in range(0, self.head.size):
            lines.append(f"a {tail[a] + 1} {self.head[a] + 1} {self.cap[a]}")
        for v in np.flatnonzero(self.src):
            lines.append(f"a {s} {v + 1} {self.src[v]}")
        for v in np.flatnonzero(self.snk):
            lines.append(f"a {v + 1} {t} {self.snk[v]}")
        with open(path, "w") as fh:
            fh.write(f"c offset {self.offset}\np max {n + 2} {len(lines)}\n")
            fh.write(f"n {s} s\nn {t} t\n")
            fh.write("\n".join(lines) + "\n")


@dataclass(frozen=True, eq=False)
class CutResult:
    flow_units: int
    E_min: Optional[PixelSet]  # None when the flow was run with want_min=False
    E_max: PixelSet
    perimeter: PerimeterValue  # of E_max over the whole grid
    offset: int
    unit_length: float

    @property
    def flow_value(self) -> float:
        return self.flow_units * self.unit_length


def build_network(domain: GridDomain, stencil: Stencil, forced_in: PixelSet, forced_out: PixelSet) -> FlowNetwork:
    fin = forced_in.membership
    fout = forced_out.membership
    if np.any(fin & fout):
        bad = np.flatnonzero((fin & fout).reshape(-1))
        raise ConstraintOverlap(f"{bad.size} nodes forced both in and out, first {int(bad[0])}")
    state = np.zeros(domain.size, np.int8)
    state[fin.reshape(-1)] = IN
    state[fout.reshape(-1)] = OUT
    free = np.flatnonzero(state == FREE)
    idx = np.full(domain.size, -1, np.int64)
    idx[free] = np.arange(free.size)

    el = edge_list(domain, stencil)
    sp = state[el.p]
    sq = state[el.q]
    w = el.units

    ff = (sp == FREE) & (sq == FREE)
    a = idx[el.p[ff]]
    b = idx[el.q[ff]]
    wf = w[ff]
    m = a.size
    tail = np.empty(2 * m, np.int64)
    head = np.empty(2 * m, np.int64)
    tail[0::2] = a
    tail[1::2] = b
    head[0::2] = b
    head[1::2] = a
    cap = np.repeat(wf, 2)

    n = free.size
    src = np.zeros(n, np.int64)
    snk = np.zeros(n, np.int64)
    for x, y, sx, sy in ((el.p, el.q, sp, sq), (el.q, el.p, sq, sp)):
        sel = (sx == FREE) & (sy == IN)
        src += np.bincount(idx[x[sel]], weights=w[sel], minlength=n).astype(np.int64)
        sel = (sx == FREE) & (sy == OUT)
        snk += np.bincount(idx[x[sel]], weights=w[sel], minlength=n).astype(np.int64)
    fixed_cut = ((sp == IN) & (sq == OUT)) | ((sp == OUT) & (sq == IN))
    offset = int(w[fixed_cut].sum())

    start, adj = kernels.build_csr(tail, n)
    return FlowNetwork(
        domain=domain,
        stencil=stencil,
        state=state,
        free=free,
        head=head,
        cap=cap,
        start=start,
        adj=adj,
        src=src,
        snk=snk,
        offset=offset,
    )


def max_flow(net: FlowNetwork, want_min: bool = True, method: str = "auto") -> float:
    """Solve the network; returns the flow in length units (``net.flow_units`` is exact).

    ``want_min=False`` skips the work needed only for the smallest cut.
    """
    both = np.minimum(net.src, net.snk)
    tcap = net.src - net.snk
    f, lo, hi = kernels.solve_maxflow(
        net.n, net.start, net.adj, net.head, net.cap, tcap, want_min=want_min, method=method
    )
    net.flow_units = int(both.sum()) + int(f)
    net._min_side = lo
    net._max_side = hi
    return net.flow_units * net.stencil.h / net.stencil.scale


def extract_cuts(net: FlowNetwork) -> CutResult:
    """Smallest and largest minimum cuts from the final residual graph."""
    if net.flow_units is None:
        raise FlowNotComputed("extract_cuts called before max_flow")
    base = net.state == IN
    dom = net.domain
    emax = base.copy()
    emax[net.free[net._max_side]] = True
    E_max = PixelSet(dom, emax.reshape(dom.shape))
    E_min = None
    if net._min_side is not None:
        emin = base.copy()
        emin[net.free[net._min_side]] = True
        E_min = PixelSet(dom, emin.reshape(dom.shape))
    pv = perimeter(E_max, "rn", net.stencil)
    if pv.units != net.flow_units + net.offset:  # pragma: no cover - internal consistency
        raise AssertionError(f"cut value {net.flow_units}+{net.offset} != perimeter {pv.units}")
    return CutResult(
        flow_units=net.flow_units,
        E_min=E_min,
        E_max=E_max,
        perimeter=pv,
        offset=net.offset,
        unit_length=net.stencil.h / net.stencil.scale,
    )


def min_cut(domain, stencil, forced_in, forced_out, want_min=True, method="auto") -> CutResult:
    net = build_network(domain, stencil, forced_in, forced_out)
    max_flow(net, want_min=want_min, method=method)
    return extract_cuts(net)

import json
import os
import subprocess
import sys

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from lgobstacle import kernels
from lgobstacle.grid import PixelSet, domain_from_omega
from lgobstacle.mincut import (
    ConstraintOverlap,
    FlowNotComputed,
    build_network,
    extract_cuts,
    max_flow,
    min_cut,
)
from lgobstacle.perimeter import make_stencil, perimeter


def random_network(rng, n, chain=False):
    if chain:
        pairs = [(i, i + 1) for i in range(n - 1)]
    else:
        m = int(rng.integers(0, 3 * n + 1))
        pairs = [tuple(rng.choice(n, 2, replace=False)) for _ in range(m)] if n > 1 else []
    tail, head, cap = [], [], []
    for a, b in pairs:
        w = int(rng.integers(1, 20))
        tail += [a, b]
        head += [b, a]
        cap += [w, w]
    tail = np.array(tail, np.int64)
    head = np.array(head, np.int64)
    cap = np.array(cap, np.int64)
    tcap = rng.integers(-15, 16, n).astype(np.int64)
    return tail, head, cap, tcap


def nx_flow(n, tail, head, cap, tcap):
    G = nx.DiGraph()
    G.add_nodes_from(list(range(n)) + ["s", "t"])
    for a, b, c in zip(tail.tolist(), head.tolist(), cap.tolist()):
        old = G.get_edge_data(a, b, {}).get("capacity", 0)
        G.add_edge(a, b, capacity=c + old)
    for v in range(n):
        if tcap[v] > 0:
            G.add_edge("s", v, capacity=int(tcap[v]))
        elif tcap[v] < 0:
            G.add_edge(v, "t", capacity=int(-tcap[v]))
    return nx.maximum_flow_value(G, "s", "t")


def cut_value(side, tail, head, cap, tcap):
    s = np.asarray(side, bool)
    val = int(cap[s[tail] & ~s[head]].sum())
    val += int(np.where(~s, np.maximum(tcap, 0), 0).sum())
    val += int(np.where(s, np.maximum(-tcap, 0), 0).sum())
    return val


@pytest.mark.parametrize("method", ["pr", "bk", "scipy"])
def test_methods_match_networkx(method):
    rng = np.random.default_rng(5)
    for it in range(400):
        n = int(rng.integers(1, 9)) if it < 250 else int(rng.integers(9, 50))
        tail, head, cap, tcap = random_network(rng, n, chain=it % 3 == 0)
        start, adj = kernels.build_csr(tail, n)
        f, lo, hi = kernels.solve_maxflow(n, start, adj, head, cap, tcap, True, method)
        assert f == nx_flow(n, tail, head, cap, tcap)
        # both sides are minimum cuts and the smaller one is inside the larger one
        assert cut_value(lo, tail, head, cap, tcap) == f
        assert cut_value(hi, tail, head, cap, tcap) == f
        assert not np.any(lo & ~hi)


@given(st.integers(0, 2**31 - 1))
def test_min_and_max_side_are_extreme(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 9))
    tail, head, cap, tcap = random_network(rng, n)
    start, adj = kernels.build_csr(tail, n)
    f, lo, hi = kernels.solve_maxflow(n, start, adj, head, cap, tcap, True, "auto")
    for code in range(1 << n):
        side = ((code >> np.arange(n)) & 1).astype(bool)
        c = cut_value(side, tail, head, cap, tcap)
        assert c >= f
        if c == f:
            assert not np.any(lo & ~side) and not np.any(side & ~hi)


def test_unknown_method():
    with pytest.raises(ValueError):
        kernels.solve_maxflow(1, np.zeros(2, np.int64), np.zeros(0, np.int64), np.zeros(0, np.int64),
                              np.zeros(0, np.int64), np.zeros(1, np.int64), True, "dinic2")


def _grid_problem(seed, order=16):
    rng = np.random.default_rng(seed)
    d = domain_from_omega(np.ones((9, 9), bool), 1.0, 2)
    fin = np.zeros(d.shape, bool)
    fout = np.zeros(d.shape, bool)
    fin[:, :2] = True
    fout[:, -2:] = True
    noise = rng.random(d.shape)
    fin |= (noise < 0.08) & ~fout
    fout |= (noise > 0.92) & ~fin
    return d, make_stencil(order), PixelSet(d, fin), PixelSet(d, fout)


@given(st.integers(0, 2**31 - 1), st.sampled_from([4, 8, 16]))
def test_flow_plus_offset_is_perimeter(seed, order):
    d, s, fin, fout = _grid_problem(seed, order)
    cut = min_cut(d, s, fin, fout)
    assert perimeter(cut.E_max, "rn", s).units == cut.flow_units + cut.offset
    assert perimeter(cut.E_min, "rn", s).units == cut.flow_units + cut.offset
    assert cut.E_min.issubset(cut.E_max)
    assert fin.issubset(cut.E_min)
    assert not np.any(cut.E_max.membership & fout.membership)


def test_skipping_min_side():
    d, s, fin, fout = _grid_problem(3)
    net = build_network(d, s, fin, fout)
    max_flow(net, want_min=False)
    cut = extract_cuts(net)
    assert cut.E_min is None
    assert cut.E_max.same_as(min_cut(d, s, fin, fout).E_max)


def test_errors():
    d, s, fin, fout = _grid_problem(0)
    with pytest.raises(ConstraintOverlap):
        build_network(d, s, fin, fin)
    net = build_network(d, s, fin, fout)
    with pytest.raises(FlowNotComputed):
        extract_cuts(net)


def test_dimacs_dump(tmp_path):
    d, s, fin, fout = _grid_problem(1)
    net = build_network(d, s, fin, fout)
    p = tmp_path / "net.dimacs"
    net.write_dimacs(p)
    lines = p.read_text().splitlines()
    prob = next(line for line in lines if line.startswith("p "))
    _, kind, nodes, arcs = prob.split()
    assert kind == "max" and int(nodes) == net.n + 2
    arc_lines = [line for line in lines if line.startswith("a ")]
    assert len(arc_lines) == int(arcs)
    # flow through the dumped network matches the solver
    G = nx.DiGraph()
    for line in arc_lines:
        _, a, b, c = line.split()
        old = G.get_edge_data(a, b, {}).get("capacity", 0)
        G.add_edge(a, b, capacity=int(c) + old)
    max_flow(net)
    both = int(np.minimum(net.src, net.snk).sum())
    assert nx.maximum_flow_value(G, str(net.n + 1), str(net.n + 2)) == net.flow_units
    assert both >= 0


SCRIPT = r"""
import json, sys
import numpy as np
from lgobstacle._backend import BACKEND
from lgobstacle import kernels
sys.path.insert(0, sys.argv[1])
from test_mincut import random_network
rng = np.random.default_rng(11)
out = []
for it in range(60):
    n = int(rng.integers(1, 40))
    tail, head, cap, tcap = random_network(rng, n, chain=it % 4 == 0)
    start, adj = kernels.build_csr(tail, n)
    # the smallest and largest minimum cuts are unique, whatever the algorithm
    f, lo, hi = kernels.solve_maxflow(n, start, adj, head, cap, tcap, True, "auto")
    out.append([int(f), lo.astype(int).tolist(), hi.astype(int).tolist()])
    nf = min(n, 8)
    sub = (tail < nf) & (head < nf)
    idx = np.flatnonzero(sub)
    st, ad = kernels.build_csr(tail[idx], nf)
    costs = kernels.enumerate_cut_costs(nf, st, ad, head[idx], cap[idx], np.maximum(tcap[:nf], 0), np.maximum(-tcap[:nf], 0), 0)
    out.append(costs.tolist())
print(json.dumps({"backend": BACKEND, "out": out}))
"""


def test_numpy_backend_matches_numba():
    here = os.path.dirname(__file__)
    res = {}
    for be in ("numba", "numpy"):
        env = dict(os.environ, LG_BACKEND=be)
        r = subprocess.run([sys.executable, "-c", SCRIPT, here], env=env, capture_output=True, text=True)
        assert r.returncode == 0, r.stderr
        res[be] = json.loads(r.stdout)
    assert res["numba"]["backend"] == "numba"
    assert res["numpy"]["backend"] == "numpy"
    assert res["numba"]["out"] == res["numpy"]["out"]


def test_bad_backend_rejected():
    env = dict(os.environ, LG_BACKEND="cuda")
    r = subprocess.run([sys.executable, "-c", "import lgobstacle.kernels"], env=env, capture_output=True, text=True)
    assert r.returncode != 0
    assert "LG_BACKEND" in r.stderr

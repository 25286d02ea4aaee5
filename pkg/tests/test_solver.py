import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _instances import small_instance
from lgobstacle.grid import InadmissibleData, ScalarField, build_domain, domain_from_omega, extend_boundary_data
from lgobstacle.oracle import field_energy
from lgobstacle.perimeter import make_stencil
from lgobstacle.solver import (
    NestingViolation,
    edge_tv,
    level_constraints,
    make_ladder,
    nesting_audit,
    solve,
    solve_level,
    worker_count,
)


def step_disc(n=32, c=0.0):
    d = build_domain({"kind": "disc", "radius": 1.0, "h": 2 / n, "collar": 3})
    X, _ = d.coords()
    g = ScalarField(d, np.where(d.ring, (X > c).astype(float), np.nan), "ring")
    return d, g


def test_quantized_ladder_places_levels_between_values():
    d, g = step_disc(16)
    lad = make_ladder(g)
    assert lad.values == (0.0, 1.0)
    assert lad.levels == (-0.5, 0.5)
    assert (lad.a, lad.b) == (0.0, 1.0)


def test_uniform_ladder():
    d, g = step_disc(16)
    lad = make_ladder(g, mode="uniform", m=3)
    assert lad.levels == (0.25, 0.5, 0.75)
    assert lad.values == lad.levels
    with pytest.raises(ValueError):
        make_ladder(g, mode="uniform")
    with pytest.raises(ValueError):
        make_ladder(g, mode="geometric")


def test_constant_data_ladder():
    d = domain_from_omega(np.ones((4, 4), bool), 1.0, 1)
    g = ScalarField(d, np.where(d.ring, 2.0, np.nan), "ring")
    assert make_ladder(g).m == 1
    lad = make_ladder(g, mode="uniform", m=4)
    assert lad.m == 1 and lad.values == (2.0,)
    sol = solve(d, g, None, make_stencil(4), lad)
    assert np.all(sol.u.values[d.omega] == 2.0)
    assert sol.tv == 0.0


def test_too_close_values_rejected():
    d = domain_from_omega(np.ones((4, 4), bool), 1.0, 1)
    X, _ = d.coords()
    g = ScalarField(d, np.where(d.ring, np.where(X > 0, 1e16, np.nextafter(1e16, 2e16)), np.nan), "ring")
    with pytest.raises(ValueError, match="too close"):
        make_ladder(g)


def test_step_solution_is_a_half_disc():
    d, g = step_disc(32)
    sol = solve(d, g, None, make_stencil(16, d.h), make_ladder(g))
    X, Y = d.coords()
    u = sol.u.values
    assert np.all(u[d.omega & (X > 2 * d.h)] == 1.0)
    assert np.all(u[d.omega & (X < -2 * d.h)] == 0.0)
    assert sol.nesting.ok
    assert math.isclose(sol.tv, edge_tv(sol.u, d, sol.stencil), rel_tol=1e-12)
    # one crossing chord of length about 2
    assert abs(sol.tv - 2.0) < 0.1


def test_workers_do_not_change_result():
    rng = np.random.default_rng(3)
    d, s, g, psi, lad = small_instance(rng, max_free=22)
    a = solve(d, g, psi, s, lad, workers=1)
    b = solve(d, g, psi, s, lad, workers=4)
    assert a.u.values.tobytes() == b.u.values.tobytes()
    assert a.tv == b.tv


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("LG_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("LG_THREADS", "0")
    assert worker_count() == 1


def test_methods_agree():
    d, g = step_disc(24, 0.2)
    s = make_stencil(8, d.h)
    lad = make_ladder(g)
    us = [solve(d, g, None, s, lad, method=m).u.values.tobytes() for m in ("pr", "bk", "scipy")]
    assert us[0] == us[1] == us[2]


def test_inadmissible_obstacle():
    d = domain_from_omega(np.ones((5, 5), bool), 1.0, 1)
    g = ScalarField(d, np.where(d.ring, 0.0, np.nan), "ring")
    psi = ScalarField(d, np.where(d.omega, 1.0, np.nan), "omega")
    G = extend_boundary_data(g)
    with pytest.raises(InadmissibleData):
        level_constraints(0.5, d, G, psi)


def test_collar_must_cover_stencil():
    d = domain_from_omega(np.ones((5, 5), bool), 1.0, 1)
    g = ScalarField(d, np.where(d.ring, 0.0, np.nan), "ring")
    with pytest.raises(ValueError):
        solve_level(-0.5, d, g, None, make_stencil(16))


def test_faults_are_detected():
    d, g = step_disc(16, 0.1)
    g = ScalarField(d, np.where(d.ring, np.round(g.values + (d.coords()[1] > 0), 0), np.nan), "ring")
    s = make_stencil(8, d.h)
    lad = make_ladder(g)
    assert lad.m >= 2
    with pytest.raises(NestingViolation) as exc:
        solve(d, g, None, s, lad, fault="swap-levels")
    assert not exc.value.verdict.ok and exc.value.verdict.witness.size > 0
    with pytest.raises(ValueError):
        solve(d, g, None, s, lad, fault="gamma-ray")


def test_nesting_audit_reports_first_pair():
    d, g = step_disc(16)
    sol = solve(d, g, None, make_stencil(4, d.h), make_ladder(g))
    lv = list(sol.levels)
    assert nesting_audit(lv).ok
    with pytest.raises(ValueError):
        nesting_audit(lv[::-1])


@settings(max_examples=25)
@given(st.integers(0, 2**31 - 1))
def test_small_instance_properties(seed):
    rng = np.random.default_rng(seed)
    d, s, g, psi, lad = small_instance(rng)
    sol = solve(d, g, psi, s, lad)
    u = sol.u.values
    assert sol.nesting.ok
    assert np.array_equal(u[d.ring], g.values[d.ring])
    if psi is not None:
        assert np.all(u[d.interior] >= psi.values[d.interior])
    assert np.all((u[d.omega] >= lad.a) & (u[d.omega] <= lad.b))
    assert set(np.unique(u[d.omega])) <= set(lad.values) | {lad.a}
    # the field energy (edges touching the domain) equals the extended level sum
    ubar = np.where(d.omega, u, extend_boundary_data(g).values)
    assert math.isclose(field_energy(d, s, ubar), sol.tv_extended, rel_tol=1e-9, abs_tol=1e-12)


@settings(max_examples=20)
@given(st.integers(0, 2**31 - 1))
def test_comparison_in_boundary_data(seed):
    # raising g can only raise the largest-minimizer solution
    rng = np.random.default_rng(seed)
    d, s, g, psi, lad = small_instance(rng)
    bump = np.where(d.ring & (rng.random(d.shape) < 0.5), 1.0, 0.0)
    g2 = ScalarField(d, g.values + bump, "ring")
    u1 = solve(d, g, None, s, make_ladder(g)).u.values
    u2 = solve(d, g2, None, s, make_ladder(g2)).u.values
    assert np.all(u2[d.omega] >= u1[d.omega])

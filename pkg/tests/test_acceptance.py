"""Acceptance criteria.

Every criterion runs at its pinned tolerance and prints one PASS/FAIL line
(visible with ``pytest -s`` or on failure).  The random batteries draw
from the seeded counter-based generator, so reruns are identical.
"""

import time

import numpy as np
import pytest

from j2lab import lie
from j2lab.elements import (
    DelaunayState,
    ModelParams,
    _geom,
    delaunay_to_polar_nodal,
)
from j2lab.flows import (
    average_over_mean_anomaly,
    compare,
    default_leo_orbit,
    orbital_period,
    propagate_intermediary,
    propagate_main,
)
from j2lab.generators import perigee_a1_equation_residual, w1_field
from j2lab.model import (
    FamilyTag,
    chi_average,
    eval_chi,
    eval_H01,
    eval_Htilde01,
    eval_K0m_perigee,
    intermediary_hamiltonian,
)
from j2lab.sampling import make_rng, random_delaunay_states

F = FamilyTag
SEED = 20190531


def _check(number: int, name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] acceptance {number}: {name} ({detail})")
    assert ok, f"acceptance criterion {number} failed: {detail}"


def _grid_states(params, e_max: float):
    """10 x 10 x 10 (e, s, w) grid as one batched Delaunay state."""
    e = np.linspace(0.05, e_max, 10)
    inc = np.radians(np.linspace(10.0, 170.0, 10))
    omega = 0.03 + np.arange(10) * np.pi / 10.0  # keeps |cos 2w| >= 0.25
    ee, ii, ww = np.meshgrid(e, inc, omega, indexing="ij")
    a = 1.5
    L = np.sqrt(params.mu * a) * np.ones_like(ee)
    G = L * np.sqrt(1.0 - ee**2)
    return DelaunayState(ell=np.full_like(ee, 0.9), g=ww,
                         h=np.full_like(ee, 0.3), L=L, G=G,
                         H=G * np.cos(ii))


@pytest.fixture(scope="module")
def params():
    return ModelParams(mu=1.0, re=1.0, c20=-1.08262668e-3, epsilon=1.0)


def test_criterion_1_homological_residuals(params):
    """First-order residuals for all families and the second-order NEUTRAL
    residual, 1000 seeded states, scaled budgets 1e-6 / 1e-5, under 30 s."""
    start = time.perf_counter()
    rng = make_rng(SEED)
    states = random_delaunay_states(1000, rng, params, e_range=(0.01, 0.7))
    scale1 = lie.homological_scale(1, states, params)
    worst1 = {}
    for family in (F.BROUWER, F.PARALLAX, F.QUARTIC, F.NEUTRAL):
        resid = lie.homological_residual(family, 1, states, params)
        worst1[family.value] = float(np.max(np.abs(resid) / scale1))
    resid2 = lie.homological_residual(F.NEUTRAL, 2, states, params)
    worst2 = float(np.max(np.abs(resid2) / lie.homological_scale(2, states, params)))
    elapsed = time.perf_counter() - start
    ok = (all(v <= 1e-6 for v in worst1.values()) and worst2 <= 1e-5
          and elapsed < 30.0)
    _check(1, "homological residuals",
           ok, f"order1 max {max(worst1.values()):.2e} <= 1e-6, "
               f"order2 neutral {worst2:.2e} <= 1e-5, {elapsed:.1f}s < 30s")


def test_criterion_2_brouwer_average(params):
    """Closed mean-anomaly average against 64-node quadrature, 1e-12
    relative, on the 10x10x10 (e, s, w) grid with e <= 0.7."""
    grid = _grid_states(params, e_max=0.7)
    flat = np.asarray(grid.as_array()).reshape(-1, 6)
    worst = 0.0
    for row in flat:
        d = DelaunayState.from_array(row)
        quad = average_over_mean_anomaly(eval_Htilde01, d, params, nodes=64,
                                         check_convergence=False)
        closed = eval_H01(F.BROUWER, d, params)
        worst = max(worst, abs(quad - closed) / abs(closed))
    ok = worst <= 1e-12
    _check(2, "Brouwer average vs quadrature", ok, f"max rel {worst:.2e} <= 1e-12")


def test_criterion_3_chi_average(params):
    """Closed equation-of-the-center cross-term average against 256-node
    quadrature, 1e-10 relative, same grid with e <= 0.8."""
    grid = _grid_states(params, e_max=0.8)
    flat = np.asarray(grid.as_array()).reshape(-1, 6)
    worst = 0.0
    for row in flat:
        d = DelaunayState.from_array(row)
        quad = average_over_mean_anomaly(eval_chi, d, params, nodes=256,
                                         check_convergence=False)
        closed = chi_average(d, params)
        worst = max(worst, abs(quad - closed) / abs(closed))
    ok = worst <= 1e-10
    _check(3, "chi average vs quadrature", ok, f"max rel {worst:.2e} <= 1e-10")


def test_criterion_4_inclination_corrections(params):
    """{I, W1} for BROUWER, PARALLAX and QUARTIC against the closed form,
    1000 points, 1e-8."""
    rng = make_rng(SEED)
    states = random_delaunay_states(1000, rng, params)
    closed = lie.inclination_correction_I01(states, params)
    inc = lie.inclination_field()
    worst = 0.0
    for family in (F.BROUWER, F.PARALLAX, F.QUARTIC):
        numeric = lie.poisson_bracket(inc, w1_field(family), states, params)
        worst = max(worst, float(np.max(np.abs(numeric - closed))))
    ok = worst <= 1e-8
    _check(4, "inclination-correction equality", ok, f"max |diff| {worst:.2e} <= 1e-8")


def test_criterion_5_perigee_a1_equation(params):
    """Closed-form A1 satisfies its defining equation to 1e-9 (scaled)
    away from |4 - 5 s**2| < 1e-3."""
    rng = make_rng(SEED)
    states = random_delaunay_states(1000, rng, params, critical_exclusion=1e-3)
    gm = _geom(states, params)
    scale = np.abs(params.c20 * np.asarray(states.G)) * (params.re / gm.p) ** 2
    resid = np.abs(perigee_a1_equation_residual(states, params)) / scale
    worst = float(np.max(resid))
    ok = worst <= 1e-9
    _check(5, "perigee A1 defining equation", ok, f"max scaled {worst:.2e} <= 1e-9")


def test_criterion_6_latitude_and_perigee_independence(params):
    """Numeric partials of K_{0,m} w.r.t. theta and g, 1e-10 scaled,
    1000 points (complex-step partials are exact)."""
    rng = make_rng(SEED)
    states = random_delaunay_states(1000, rng, params, critical_exclusion=0.05)
    cfg_d = lie.BracketConfig(fd_scheme="complex_step", chart="delaunay")
    cfg_p = lie.BracketConfig(fd_scheme="complex_step", chart="polar_nodal")
    worst = 0.0
    for m in (1, 2, 3):
        term = lambda s, p, mm=m: eval_K0m_perigee(mm, s, p)
        scale = lie.homological_scale(m, states, params)
        g_delaunay = lie.gradient(term, states, params, cfg_d)
        g_polar = lie.gradient(term, states, params, cfg_p)
        worst = max(worst,
                    float(np.max(np.abs(g_delaunay[..., 1]) / scale)),
                    float(np.max(np.abs(g_polar[..., 1]) / scale)))
    ok = worst <= 1e-10
    _check(6, "K-term theta/g independence", ok, f"max scaled {worst:.2e} <= 1e-10")


def test_criterion_7_transformation_order_scaling(params):
    """Round-trip and trajectory errors fit exponents k+1 within 0.3 for
    k = 1, 2 under c20 in {1e-3, 1e-4, 1e-5}, LEO orbit, 10 periods,
    under 5 minutes."""
    start = time.perf_counter()
    sweeps = (1e-3, 1e-4, 1e-5)
    leo = default_leo_orbit(params)
    results = {}
    for order, fams in ((1, (F.NEUTRAL,)), (2, (F.NEUTRAL, F.PERIGEE))):
        errs = []
        for c20 in sweeps:
            defect = lie.series_roundtrip_defect(fams, order, leo,
                                                 params.with_c20(-c20))
            errs.append(float(np.max(np.abs(defect))))
        slope = np.polyfit(np.log10(sweeps), np.log10(errs), 1)[0]
        results[f"roundtrip_k{order}"] = slope
    report = compare(leo, orders=(1, 2), c20_list=sweeps,
                     t_span=(0.0, 10.0 * orbital_period(leo, params)),
                     params=params, samples=128, seed=SEED)
    for order in (1, 2):
        results[f"trajectory_k{order}"] = \
            report.fitted_scaling_exponent[order]["exponent"]
    elapsed = time.perf_counter() - start
    ok = elapsed < 300.0
    details = []
    for order in (1, 2):
        for kind in ("roundtrip", "trajectory"):
            slope = results[f"{kind}_k{order}"]
            ok = ok and abs(slope - (order + 1)) <= 0.3
            details.append(f"{kind} k={order}: {slope:.2f}")
    _check(7, "transformation-order scaling", ok,
           "; ".join(details) + f"; {elapsed:.0f}s < 300s")


def test_criterion_8_conservation(params):
    """Truth propagator keeps energy and N to 1e-10 relative at tol 1e-12
    over 10 orbits; intermediary flows keep Theta, N and their own
    Hamiltonian to the same budget."""
    leo = default_leo_orbit(params)
    span = (0.0, 10.0 * orbital_period(leo, params))
    truth = propagate_main(leo, span, 1e-12, params)
    ok = truth.stats["energy_drift"] <= 1e-10 and truth.stats["n_drift"] <= 1e-10
    detail = (f"truth dE {truth.stats['energy_drift']:.2e}, "
              f"dN {truth.stats['n_drift']:.2e}")
    pn0 = delaunay_to_polar_nodal(leo, params)
    worst_k = 0.0
    for order, trunc in ((1, False), (2, False), (3, False), (3, True)):
        traj = propagate_intermediary(order, trunc, pn0, span, 1e-12, params)
        worst_k = max(worst_k, traj.stats["energy_drift"])
        ok = ok and traj.stats["energy_drift"] <= 1e-10
        ok = ok and np.all(traj.states[:, 4] == pn0.Theta)
        ok = ok and np.all(traj.states[:, 5] == pn0.N)
    _check(8, "conservation budgets", ok,
           detail + f", intermediaries dK max {worst_k:.2e} (all <= 1e-10)")


def test_criterion_9_truncated_intermediary_scaling(params):
    """Full-minus-truncated intermediary values scale as e**(2.0 +- 0.1)
    over e in {0.01, 0.02, 0.04, 0.08}."""
    eccs = (0.01, 0.02, 0.04, 0.08)
    diffs = []
    for e in eccs:
        L = np.sqrt(params.mu * 1.5)
        G = L * np.sqrt(1.0 - e * e)
        d = DelaunayState(0.9, 0.7, 0.3, L, G, G * np.cos(np.radians(50.0)))
        pn = delaunay_to_polar_nodal(d, params)
        diffs.append(abs(intermediary_hamiltonian(3, False, pn, params)
                         - intermediary_hamiltonian(3, True, pn, params)))
    slope = float(np.polyfit(np.log(eccs), np.log(diffs), 1)[0])
    ok = abs(slope - 2.0) <= 0.1
    _check(9, "truncated-intermediary consistency", ok,
           f"fitted exponent {slope:.3f} within 2.0 +- 0.1")

"""Verification suites: seeded random-point batteries over the oracles.

Each suite draws reproducible phase points, evaluates an independent check
(numeric Lie derivative against closed forms, numeric brackets, quadrature
against closed-form averages, ...), and reports the worst scaled residuals
with the offending points.  The command line front end turns these reports
into exit codes; the pytest acceptance module runs the same machinery at
the pinned tolerances.
"""

from __future__ import annotations

import numpy as np

from . import generators as gen
from . import lie
from .elements import DelaunayState, ModelParams, _geom
from .flows import average_over_mean_anomaly
from .model import (
    FamilyTag,
    eval_H01,
    eval_Htilde01,
    eval_K0m_perigee,
    chi_average,
    eval_chi,
    one_over_r2_decomposition,
)
from .sampling import CRITICAL_EXCLUSION, make_rng, random_delaunay_states, state_row

SUITES = ("homological", "brackets", "averages", "inclination", "perigee",
          "decompositions")

#: Default tolerance per suite (scaled residuals).
DEFAULT_TOLS = {
    "homological": 1e-6,
    "brackets": 1e-6,
    "averages": 1e-9,
    "inclination": 1e-8,
    "perigee": 1e-9,
    "decompositions": 1e-13,
}


def _worst(checks: dict, states: DelaunayState | None, top: int = 3) -> list:
    """Flatten {check: residual array} into the worst offenders."""
    rows = []
    for check, residuals in checks.items():
        residuals = np.atleast_1d(np.asarray(residuals))
        order = np.argsort(residuals)[::-1][:top]
        for idx in order:
            row = {"check": check, "scaled_residual": float(residuals[idx])}
            if states is not None:
                point = state_row(states, int(idx)).wrapped()
                row["point"] = {k: float(np.asarray(v))
                                for k, v in vars(point).items()}
            rows.append(row)
    rows.sort(key=lambda r: -r["scaled_residual"])
    return rows[:top]


def _report(suite, n_points, seed, tol, checks, states=None) -> dict:
    max_resid = max(float(np.max(np.atleast_1d(v))) for v in checks.values())

    def percentiles(values):
        values = np.atleast_1d(np.asarray(values, dtype=float))
        return {f"p{q}": float(np.percentile(values, q)) for q in (50, 90, 99)}

    return {
        "suite": suite,
        "n_points": n_points,
        "seed": seed,
        "tol": tol,
        "max_scaled_residual": max_resid,
        "per_check_max": {k: float(np.max(np.atleast_1d(v)))
                          for k, v in checks.items()},
        "percentiles": {k: percentiles(v) for k, v in checks.items()},
        "per_point_residuals": {k: np.atleast_1d(np.asarray(v, dtype=float)).tolist()
                                for k, v in checks.items()},
        "worst": _worst(checks, states),
        "pass": bool(max_resid <= tol),
    }


def suite_homological(n_points: int, seed: int, tol: float,
                      params: ModelParams) -> dict:
    """Order-1 residuals for all four families, order-2 for NEUTRAL and
    PERIGEE (the latter at 10x the tolerance, per the order-2 budget)."""
    rng = make_rng(seed)
    states = random_delaunay_states(n_points, rng, params,
                                    critical_exclusion=CRITICAL_EXCLUSION)
    scale1 = lie.homological_scale(1, states, params)
    scale2 = lie.homological_scale(2, states, params)
    checks = {}
    for family in (FamilyTag.BROUWER, FamilyTag.PARALLAX, FamilyTag.QUARTIC,
                   FamilyTag.NEUTRAL):
        resid = lie.homological_residual(family, 1, states, params)
        checks[f"order1_{family.value}"] = np.abs(resid) / scale1
    for family in (FamilyTag.NEUTRAL, FamilyTag.PERIGEE):
        resid = lie.homological_residual(family, 2, states, params)
        checks[f"order2_{family.value}"] = np.abs(resid) / scale2 / 10.0
    return _report("homological", n_points, seed, tol, checks, states)


def suite_brackets(n_points: int, seed: int, tol: float,
                   params: ModelParams) -> dict:
    """Canonical pairs, antisymmetry, self-bracket, the Jacobi identity,
    and the step-halving/complex-step agreement of the default scheme."""
    rng = make_rng(seed)
    states = random_delaunay_states(n_points, rng, params)
    w1 = gen.w1_field(FamilyTag.NEUTRAL)
    h10 = eval_Htilde01
    checks = {}

    coord = [lambda s, p, i=i: np.asarray(s.as_array())[..., i] for i in range(6)]
    pair_defect = np.zeros(n_points)
    for i in range(3):
        for j in range(3):
            val = lie.poisson_bracket(coord[i], coord[j + 3], states, params)
            delta = 1.0 if i == j else 0.0
            pair_defect = np.maximum(pair_defect, np.abs(val - delta))
    checks["canonical_pairs"] = pair_defect

    self_bracket = lie.poisson_bracket(w1, w1, states, params)
    checks["self_bracket"] = np.abs(self_bracket) / lie.homological_scale(1, states, params)

    ab = lie.poisson_bracket(h10, w1, states, params)
    ba = lie.poisson_bracket(w1, h10, states, params)
    bracket_scale = np.maximum(np.max(np.abs(ab)), 1e-300)
    checks["antisymmetry"] = np.abs(ab + ba) / bracket_scale

    cstep = lie.poisson_bracket(
        h10, w1, states, params, lie.BracketConfig(fd_scheme="complex_step"))
    checks["complex_step_agreement"] = np.abs(ab - cstep) / bracket_scale
    halved = lie.poisson_bracket(
        h10, w1, states, params, lie.BracketConfig(base_step=5e-7))
    checks["step_halving_agreement"] = np.abs(ab - halved) / bracket_scale

    # Jacobi identity on three smooth fields, FD-limited budget 1e-6 scaled
    fa, fb = h10, w1
    fc = lambda s, p: eval_H01(FamilyTag.NEUTRAL, s, p)
    cfg = lie.DEFAULT_BRACKET_CONFIG
    cyc = (lie.poisson_bracket(fa, lie.bracket_field(fb, fc, cfg), states, params, cfg)
           + lie.poisson_bracket(fb, lie.bracket_field(fc, fa, cfg), states, params, cfg)
           + lie.poisson_bracket(fc, lie.bracket_field(fa, fb, cfg), states, params, cfg))
    jac_scale = lie.homological_scale(2, states, params)
    checks["jacobi_identity"] = np.abs(cyc) / jac_scale
    return _report("brackets", n_points, seed, tol, checks, states)


def suite_averages(n_points: int, seed: int, tol: float,
                   params: ModelParams) -> dict:
    """Closed-form averages against quadrature: the mean-anomaly averaged
    first-order term, the equation-of-the-center cross term, and the
    zero-average property of the long-period-free generator choice."""
    rng = make_rng(seed)
    states = random_delaunay_states(n_points, rng, params)
    n_pts = min(n_points, 40)  # quadrature per point; keep the suite quick
    brouwer = np.zeros(n_pts)
    chi_resid = np.zeros(n_pts)
    lpf = np.zeros(n_pts)
    lpf_choice = gen.GeneratorChoice(FamilyTag.NEUTRAL, 1,
                                     gen.A1Mode.LONG_PERIOD_FREE)
    for i in range(n_pts):
        d = state_row(states, i)
        gm = _geom(d, params)
        quad = average_over_mean_anomaly(eval_Htilde01, d, params, nodes=64,
                                         check_convergence=False)
        closed = eval_H01(FamilyTag.BROUWER, d, params)
        # scaled, not pointwise-relative: (2 - 3 s^2) may pass through zero
        brouwer[i] = abs(quad - closed) / float(lie.homological_scale(1, d, params))
        quad = average_over_mean_anomaly(eval_chi, d, params, nodes=256,
                                         check_convergence=False)
        closed = chi_average(d, params)
        chi_resid[i] = abs(quad - closed) / max(
            abs(params.mu / gm.p * params.c20**2 * (params.re / gm.p) ** 4), 1e-300)
        quad = average_over_mean_anomaly(
            lambda s, p: gen.eval_W1(lpf_choice, s, p), d, params, nodes=128,
            check_convergence=False)
        lpf[i] = abs(quad) / abs(d.G * params.c20 * (params.re / gm.p) ** 2)
    checks = {"brouwer_average": brouwer, "chi_average": chi_resid,
              "long_period_free_zero_average": lpf}
    return _report("averages", n_points, seed, tol, checks, states)


def suite_inclination(n_points: int, seed: int, tol: float,
                      params: ModelParams) -> dict:
    """Closed-form first-order inclination correction against the numeric
    bracket {I, W1} for the three short-period families."""
    rng = make_rng(seed)
    states = random_delaunay_states(n_points, rng, params)
    closed = lie.inclination_correction_I01(states, params)
    gm = _geom(states, params)
    scale = np.abs(params.c20) * (params.re / gm.p) ** 2
    inc_field = lie.inclination_field()
    checks = {}
    for family in (FamilyTag.BROUWER, FamilyTag.PARALLAX, FamilyTag.QUARTIC):
        numeric = lie.poisson_bracket(inc_field, gen.w1_field(family), states, params)
        checks[f"i01_{family.value}"] = np.abs(numeric - closed) / scale
    return _report("inclination", n_points, seed, tol, checks, states)


def suite_perigee(n_points: int, seed: int, tol: float,
                  params: ModelParams) -> dict:
    """Defining equation of the perigee A1 and the latitude/perigee/node
    independence of the K terms (numeric partials, scaled)."""
    rng = make_rng(seed)
    states = random_delaunay_states(n_points, rng, params,
                                    critical_exclusion=CRITICAL_EXCLUSION)
    gm = _geom(states, params)
    a1_scale = np.abs(params.c20 * np.asarray(states.G)) * (params.re / gm.p) ** 2
    checks = {"a1_equation": np.abs(
        gen.perigee_a1_equation_residual(states, params)) / a1_scale}
    cfg = lie.BracketConfig(fd_scheme="complex_step")
    for m in (1, 2, 3):
        term = lambda s, p, mm=m: eval_K0m_perigee(mm, s, p)
        scale = lie.homological_scale(m, states, params)
        grads = lie.gradient(term, states, params, cfg)
        checks[f"k0{m}_dg"] = np.abs(grads[..., 1]) / (scale * gm.p / np.asarray(states.G))
        checks[f"k0{m}_dh"] = np.abs(grads[..., 2]) / (scale * gm.p / np.asarray(states.G))
        pn_grads = lie.gradient(term, states, params,
                                lie.BracketConfig(fd_scheme="complex_step",
                                                  chart="polar_nodal"))
        checks[f"k0{m}_dtheta"] = np.abs(pn_grads[..., 1]) / (scale * gm.p / np.asarray(states.G))
    return _report("perigee", n_points, seed, tol, checks, states)


def suite_decompositions(n_points: int, seed: int, tol: float,
                         params: ModelParams) -> dict:
    """Both inverse-radius-square splits reconstruct 1/r**2 identically."""
    rng = make_rng(seed)
    states = random_delaunay_states(n_points, rng, params)
    gm = _geom(states, params)
    direct = 1.0 / gm.r**2
    checks = {}
    for kind in ("quartic", "neutral"):
        kernel, image = one_over_r2_decomposition(kind, states, params)
        checks[kind] = np.abs(kernel + image - direct) / direct
    return _report("decompositions", n_points, seed, tol, checks, states)


_SUITE_FUNCS = {
    "homological": suite_homological,
    "brackets": suite_brackets,
    "averages": suite_averages,
    "inclination": suite_inclination,
    "perigee": suite_perigee,
    "decompositions": suite_decompositions,
}


def run_suite(suite: str, n_points: int, seed: int, tol: float | None,
              params: ModelParams) -> dict:
    """Run one named suite; ``tol=None`` picks the suite default."""
    if suite not in _SUITE_FUNCS:
        raise KeyError(f"unknown suite {suite!r}; choose from {SUITES}")
    if n_points < 1:
        raise ValueError(f"n_points must be positive, got {n_points}")
    if tol is None:
        tol = DEFAULT_TOLS[suite]
    return _SUITE_FUNCS[suite](n_points, seed, tol, params)

"""Numeric Lie-transform engine.

Poisson brackets by finite differences, the Kepler Lie derivative, the
homological residuals that certify every closed form in
:mod:`j2lab.generators` against :mod:`j2lab.model`, the triangular term
recursion, and the mean <-> osculating state maps built from the
generating functions with numeric brackets.

The closed forms are the single source of truth: no hand-derived partial
derivative of any generating function appears anywhere.  Brackets default
to Richardson-extrapolated central differences (relative step 1e-6); a
complex-step scheme is available where machine-precision first derivatives
are needed (state transforms, oracle cross-checks).  Angles are perturbed
on the universal cover — nothing wraps inside a difference quotient.

Bracket orientation: {F1; F2} = dF1/d(angles) . dF2/d(actions)
- dF1/d(actions) . dF2/d(angles), so canonical pairs give {ell, L} = +1 and
the Kepler Hamiltonian satisfies {H00; W} = -n dW/d(ell).  The Lie
derivative solving the homological equation is L0(W) = n dW/d(ell)
= {W; H00}.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Callable, Sequence

import numpy as np

from .elements import (
    CartesianState,
    DelaunayState,
    ModelParams,
    PolarNodalState,
    cartesian_to_delaunay,
    delaunay_to_cartesian,
    delaunay_to_polar_nodal,
    polar_nodal_to_cartesian,
    polar_nodal_to_delaunay,
    cartesian_to_polar_nodal,
    _geom,
)
from .model import (FamilyTag, ScalarField, eval_H01, eval_H02,
                    eval_Htilde01, eval_Htilde02_neutral, eval_K0m_perigee)
from . import generators as gen

_COMPLEX_STEP = 1e-100
# Cross second derivatives: the complex+central combination has no
# subtractive cancellation, so its step is set by truncation alone (the
# low-eccentricity states need it small: action derivatives of e(L, G)
# steepen as 1/e powers); the all-real fallback balances truncation
# against roundoff.
_HESS_STEP = 1e-7
_HESS_STEP_REAL = 2e-4


class ConvergenceError(RuntimeError):
    """Fixed-point inversion failed to converge; carries the last residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class BracketConfig:
    """Finite-difference configuration of the bracket engine.

    ``fd_scheme`` is one of ``central``, ``richardson`` (one extrapolation
    of two central differences; the default), or ``complex_step`` (machine
    precision; requires the field to evaluate at complex points of the
    chosen chart, which all package fields do in the Delaunay chart).
    ``base_step`` is the relative step, scaled per coordinate by
    max(1, |coordinate|).
    """

    fd_scheme: str = "richardson"
    base_step: float = 1e-6
    chart: str = "delaunay"

    def __post_init__(self):
        if self.fd_scheme not in ("central", "richardson", "complex_step"):
            raise ValueError(f"unknown fd_scheme {self.fd_scheme!r}")
        if not 1e-8 < self.base_step < 1e-2:
            raise ValueError(f"base_step must lie in (1e-8, 1e-2), got {self.base_step}")
        if self.chart not in ("delaunay", "polar_nodal", "cartesian"):
            raise ValueError(f"unknown chart {self.chart!r}")


DEFAULT_BRACKET_CONFIG = BracketConfig()


@dataclass(frozen=True)
class TransformSpec:
    """A sequence of transformation families applied at a common order.

    ``families`` is listed in the order the transformations were applied to
    the Hamiltonian (e.g. ``(NEUTRAL,)`` or ``(NEUTRAL, PERIGEE)``); the
    mean-to-osculating map composes them innermost (last) first.
    """

    families: tuple
    order: int = 1
    direction: str = "mean_to_osculating"

    def __post_init__(self):
        fams = tuple(FamilyTag(f) for f in self.families)
        object.__setattr__(self, "families", fams)
        if not fams:
            raise ValueError("families must be non-empty")
        if self.direction not in ("mean_to_osculating", "osculating_to_mean"):
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {self.order}")
        if self.order == 2:
            bad = [f.value for f in fams
                   if f not in (FamilyTag.NEUTRAL, FamilyTag.PERIGEE)]
            if bad:
                raise ValueError(f"no second-order generator available for {bad}")


# ---------------------------------------------------------------------------
# Chart plumbing
# ---------------------------------------------------------------------------

_STATE_OF_CHART = {"delaunay": DelaunayState, "polar_nodal": PolarNodalState,
                   "cartesian": CartesianState}


def _to_chart(state, chart: str, params: ModelParams):
    if isinstance(state, _STATE_OF_CHART[chart]):
        return state
    if chart == "delaunay":
        if isinstance(state, PolarNodalState):
            return polar_nodal_to_delaunay(state, params)
        return cartesian_to_delaunay(state, params)
    if chart == "polar_nodal":
        if isinstance(state, DelaunayState):
            return delaunay_to_polar_nodal(state, params)
        return cartesian_to_polar_nodal(state)
    if isinstance(state, DelaunayState):
        return delaunay_to_cartesian(state, params)
    return polar_nodal_to_cartesian(state)


def _as_func(field) -> Callable:
    return field.func if isinstance(field, ScalarField) else field


# ---------------------------------------------------------------------------
# Gradients and brackets
# ---------------------------------------------------------------------------

def _gradient_arrays(func, arr, chart, params, scheme, base_step):
    """Partials of func w.r.t. the six chart coordinates; arr has shape (..., 6)."""
    state_cls = _STATE_OF_CHART[chart]

    def fval(a):
        return np.asarray(func(state_cls.from_array(a), params))

    if scheme == "complex_step" and np.iscomplexobj(arr):
        scheme = "central"  # nested use: real steps in complex arithmetic
    cols = []
    if scheme == "complex_step":
        carr = arr.astype(complex)
        for i in range(6):
            pert = carr.copy()
            pert[..., i] = pert[..., i] + 1j * _COMPLEX_STEP
            cols.append(np.imag(fval(pert)) / _COMPLEX_STEP)
        return np.stack(cols, axis=-1)

    def central(step_scale):
        out = []
        for i in range(6):
            h = step_scale * np.maximum(1.0, np.abs(np.real(arr[..., i])))
            up, dn = arr.copy(), arr.copy()
            up[..., i] = up[..., i] + h
            dn[..., i] = dn[..., i] - h
            out.append((fval(up) - fval(dn)) / (2.0 * h))
        return np.stack(out, axis=-1)

    if scheme == "central":
        return central(base_step)
    coarse = central(base_step)
    fine = central(0.5 * base_step)
    return (4.0 * fine - coarse) / 3.0


def gradient(field, state, params: ModelParams,
             cfg: BracketConfig = DEFAULT_BRACKET_CONFIG) -> np.ndarray:
    """Six partial derivatives of a scalar field in the cfg chart."""
    point = _to_chart(state, cfg.chart, params)
    return _gradient_arrays(_as_func(field), point.as_array(), cfg.chart, params,
                            cfg.fd_scheme, cfg.base_step)


def poisson_bracket(f1, f2, state, params: ModelParams,
                    cfg: BracketConfig = DEFAULT_BRACKET_CONFIG):
    """Poisson bracket {f1; f2} at a phase point, by numeric partials.

    Evaluated in ``cfg.chart`` (the value is chart-independent for the
    canonical charts); antisymmetric and bilinear up to the difference
    noise of the chosen scheme.
    """
    point = _to_chart(state, cfg.chart, params)
    arr = point.as_array()
    g1 = _gradient_arrays(_as_func(f1), arr, cfg.chart, params, cfg.fd_scheme,
                          cfg.base_step)
    g2 = _gradient_arrays(_as_func(f2), arr, cfg.chart, params, cfg.fd_scheme,
                          cfg.base_step)
    return (np.einsum("...i,...i->...", g1[..., :3], g2[..., 3:])
            - np.einsum("...i,...i->...", g1[..., 3:], g2[..., :3]))


def bracket_field(f1, f2, cfg: BracketConfig = DEFAULT_BRACKET_CONFIG,
                  name: str | None = None) -> ScalarField:
    """Package a numeric bracket as a new evaluable field (for nesting)."""
    label = name or f"{{{getattr(f1, 'name', 'F')};{getattr(f2, 'name', 'G')}}}"
    return ScalarField(label, cfg.chart,
                       lambda s, p: poisson_bracket(f1, f2, s, p, cfg))


def lie_derivative_L0(w_field, state, params: ModelParams,
                      cfg: BracketConfig = DEFAULT_BRACKET_CONFIG):
    """Kepler Lie derivative n * dW/d(ell) (equals {W; H00})."""
    d = _to_chart(state, "delaunay", params)
    arr = d.as_array()
    func = _as_func(w_field)
    scheme = cfg.fd_scheme
    if scheme == "complex_step":
        carr = arr.astype(complex)
        carr[..., 0] = carr[..., 0] + 1j * _COMPLEX_STEP
        dw = np.imag(func(DelaunayState.from_array(carr), params)) / _COMPLEX_STEP
    else:
        def diff(step):
            up, dn = arr.copy(), arr.copy()
            up[..., 0] = up[..., 0] + step
            dn[..., 0] = dn[..., 0] - step
            return (np.asarray(func(DelaunayState.from_array(up), params))
                    - np.asarray(func(DelaunayState.from_array(dn), params))) / (2.0 * step)
        h = cfg.base_step
        dw = diff(h) if scheme == "central" else (4.0 * diff(0.5 * h) - diff(h)) / 3.0
    n = params.mu**2 / np.asarray(d.L)**3
    return n * dw


# ---------------------------------------------------------------------------
# Homological residuals
# ---------------------------------------------------------------------------

def homological_scale(order: int, state, params: ModelParams):
    """Natural magnitude |mu * c20**m * re**(2m) / p**(2m+1)| of order-m terms."""
    d = _to_chart(state, "delaunay", params)
    p = np.asarray(d.G)**2 / params.mu
    return np.abs(params.mu * params.c20**order * params.re**(2 * order)
                  / p**(2 * order + 1))


def homological_residual(family: FamilyTag, order: int, state,
                         params: ModelParams,
                         cfg: BracketConfig = DEFAULT_BRACKET_CONFIG):
    """Residual L0(W_m) - (forcing_m - H_{0,m}) of the order-m homological equation.

    A small scaled residual certifies that the closed forms of the
    generating term, the forcing and the Hamiltonian term are mutually
    consistent at this phase point.  Order 1 covers BROUWER, PARALLAX,
    QUARTIC and NEUTRAL (PERIGEE is trivial there: W1 carries no mean
    anomaly and the first-order term is unchanged); order 2 covers NEUTRAL
    (all closed forms) and PERIGEE, whose forcing includes the brackets of
    the first-order arbitrary function evaluated numerically.
    """
    family = FamilyTag(family)
    d = _to_chart(state, "delaunay", params)
    if order == 1:
        if family is FamilyTag.PERIGEE:
            return lie_derivative_L0(gen.w1_field(family), d, params, cfg)
        w1 = gen.w1_field(family)
        lhs = lie_derivative_L0(w1, d, params, cfg)
        rhs = eval_Htilde01(d, params) - eval_H01(family, d, params)
        return lhs - rhs
    if order != 2:
        raise ValueError(f"order must be 1 or 2, got {order}")
    if family is FamilyTag.NEUTRAL:
        lhs = lie_derivative_L0(gen.w2_field(family), d, params, cfg)
        rhs = eval_Htilde02_neutral(d, params) - eval_H02(family, d, params)
        return lhs - rhs
    if family is not FamilyTag.PERIGEE:
        raise ValueError(f"no second-order terms for family {family.value}")
    lhs = lie_derivative_L0(gen.w2_field(family), d, params, cfg)
    k10 = ScalarField("K10", "delaunay",
                      lambda s, p: eval_H01(FamilyTag.NEUTRAL, s, p))
    forcing = (eval_H02(FamilyTag.NEUTRAL, d, params)
               + 2.0 * poisson_bracket(k10, gen.eval_A1_perigee, d, params, cfg))
    return lhs - (forcing - eval_K0m_perigee(2, d, params))


# ---------------------------------------------------------------------------
# Triangular recursion
# ---------------------------------------------------------------------------

def deprit_triangle(hamiltonian_rows: Sequence, generator_terms: Sequence,
                    n: int, q: int, state, params: ModelParams,
                    cfg: BracketConfig = DEFAULT_BRACKET_CONFIG):
    """Evaluate the recursion term F_{n,q} at one phase point.

    F_{n,q} = F_{n+1,q-1} + sum_{0<=m<=n} binom(n,m) {F_{n-m,q-1}; W_{m+1}},
    with F_{m,0} taken from ``hamiltonian_rows`` (index m; entries may be
    None for vanishing rows) and W_k from ``generator_terms`` (index k-1).
    Brackets are evaluated numerically with ``cfg``; nested levels fall
    back to real central steps automatically.

    Raises:
        KeyError: If a needed generator term W_k is not registered.
    """
    if n < 0 or q < 0:
        raise ValueError("indices n, q must be non-negative")
    zero = ScalarField("0", cfg.chart, lambda s, p: np.zeros(np.shape(np.asarray(s.as_array())[..., 0])))
    cache: dict = {}

    def row(m: int) -> ScalarField:
        if m < len(hamiltonian_rows) and hamiltonian_rows[m] is not None:
            f = hamiltonian_rows[m]
            return f if isinstance(f, ScalarField) else ScalarField(f"H{m}0", cfg.chart, f)
        return zero

    def w(k: int) -> ScalarField:
        if k - 1 >= len(generator_terms) or generator_terms[k - 1] is None:
            raise KeyError(f"generator term W_{k} is not registered")
        f = generator_terms[k - 1]
        return f if isinstance(f, ScalarField) else ScalarField(f"W{k}", cfg.chart, f)

    def F(i: int, j: int) -> ScalarField:
        if j == 0:
            return row(i)
        if (i, j) in cache:
            return cache[(i, j)]
        parts = [F(i + 1, j - 1)]
        weights = [1.0]
        for m in range(i + 1):
            parts.append(bracket_field(F(i - m, j - 1), w(m + 1), cfg))
            weights.append(float(comb(i, m)))

        def evaluate(s, p, parts=parts, weights=weights):
            total = weights[0] * np.asarray(parts[0](s, p))
            for wgt, part in zip(weights[1:], parts[1:]):
                total = total + wgt * np.asarray(part(s, p))
            return total

        field = ScalarField(f"F{i}{j}", cfg.chart, evaluate)
        cache[(i, j)] = field
        return field

    return F(n, q)(_to_chart(state, cfg.chart, params), params)


# ---------------------------------------------------------------------------
# Mean <-> osculating transforms
# ---------------------------------------------------------------------------

def _stage_generators(family: FamilyTag, order: int):
    w1 = _as_func(gen.w1_field(family))
    w2 = _as_func(gen.w2_field(family)) if order >= 2 else None
    return w1, w2


def _hamiltonian_field_of(w_func, arr, params, scheme, base_step):
    """Hamiltonian vector field J grad(W) of a generator, shape (..., 6)."""
    grad = _gradient_arrays(w_func, arr, "delaunay", params, scheme, base_step)
    return np.concatenate([grad[..., 3:], -grad[..., :3]], axis=-1)


def _hessian(w_func, arr, params, scheme, base_step):
    """Symmetric 6x6 second-derivative matrix of a generator, shape (..., 6, 6)."""
    def fval(a):
        return np.asarray(w_func(DelaunayState.from_array(a), params))

    if scheme == "complex_step" and np.iscomplexobj(arr):
        scheme = "central"  # the complex channel is already in use by a caller
    hess = np.zeros(arr.shape[:-1] + (6, 6), dtype=arr.dtype)
    if scheme == "complex_step":
        carr = arr.astype(complex)
        for u in range(6):
            base = carr.copy()
            base[..., u] = base[..., u] + 1j * _COMPLEX_STEP
            for v in range(6):
                h = _HESS_STEP * np.maximum(1.0, np.abs(np.real(arr[..., v])))
                up, dn = base.copy(), base.copy()
                up[..., v] = up[..., v] + h
                dn[..., v] = dn[..., v] - h
                hess[..., u, v] = np.imag(fval(up) - fval(dn)) / (2.0 * h * _COMPLEX_STEP)
    else:
        step = max(base_step, _HESS_STEP_REAL)
        for u in range(6):
            hu = step * np.maximum(1.0, np.abs(np.real(arr[..., u])))
            for v in range(u, 6):
                hv = step * np.maximum(1.0, np.abs(np.real(arr[..., v])))
                pp, pm, mp, mm = arr.copy(), arr.copy(), arr.copy(), arr.copy()
                pp[..., u] += hu; pp[..., v] += hv
                pm[..., u] += hu; pm[..., v] -= hv
                mp[..., u] -= hu; mp[..., v] += hv
                mm[..., u] -= hu; mm[..., v] -= hv
                hess[..., u, v] = (fval(pp) - fval(pm) - fval(mp) + fval(mm)) / (4.0 * hu * hv)
                hess[..., v, u] = hess[..., u, v]
    return 0.5 * (hess + np.swapaxes(hess, -1, -2))


def _stage_delta(family: FamilyTag, order: int, arr, params, cfg, sign: float):
    """Coordinate increments of one family's order-k map at points ``arr``.

    Delta = eps*x_{0,1} + (eps**2/2)*x_{0,2} with x_{0,1} = {x; W1} and
    x_{0,2} = {x; W2} + {{x; W1}; W1}; ``sign`` = -1 evaluates the map of
    the negated generator (the order-k series inverse).
    """
    scheme, step = cfg.fd_scheme, cfg.base_step
    w1, w2 = _stage_generators(family, order)
    eps = params.epsilon
    v1 = sign * _hamiltonian_field_of(w1, arr, params, scheme, step)
    delta = eps * v1
    if order >= 2:
        hess = sign * _hessian(w1, arr, params, scheme, step)
        jhess = np.concatenate([hess[..., 3:, :], -hess[..., :3, :]], axis=-2)
        second = np.einsum("...ij,...j->...i", jhess, v1)
        if w2 is not None:
            second = second + sign * _hamiltonian_field_of(w2, arr, params, scheme, step)
        delta = delta + 0.5 * eps * eps * second
    return delta


def _apply_map(tspec: TransformSpec, arr, params, cfg, inverse,
               fixed_point_tol, max_iter):
    """Run the transform on a raw Delaunay array; complex input supported
    for forward and series directions.  Returns (image, accumulated_delta);
    the delta sum is exact at the scale of the increments, so round-trip
    defects far below coordinate resolution stay measurable."""
    order = tspec.order
    out = arr
    total = np.zeros_like(arr)

    if tspec.direction == "mean_to_osculating":
        for family in reversed(tspec.families):
            delta = _stage_delta(family, order, out, params, cfg, +1.0)
            out = out + delta
            total = total + delta
        return out, total

    if inverse == "series":
        for family in tspec.families:
            delta = _stage_delta(family, order, out, params, cfg, -1.0)
            out = out + delta
            total = total + delta
        return out, total

    if np.iscomplexobj(arr):
        raise ValueError("fixed-point inversion needs a real evaluation point")
    for family in tspec.families:
        target = out
        y = np.array(target, copy=True)
        scale = np.maximum(1.0, np.abs(target))
        residual = np.inf
        previous = np.inf
        for _ in range(max_iter):
            y_next = target - _stage_delta(family, order, y, params, cfg, +1.0)
            residual = float(np.max(np.abs(y_next - y) / scale))
            y = y_next
            if residual <= fixed_point_tol:
                break
            # geometric contraction has flattened out well below any useful
            # tolerance: the iterate sits on the evaluation noise floor
            if residual >= 0.5 * previous and previous <= 1e-8:
                break
            previous = residual
        else:
            raise ConvergenceError(
                f"osculating-to-mean iteration stalled for {family.value}", residual)
        total = total + (y - out)
        out = y
    return out, total


def transform_state(tspec: TransformSpec, state, params: ModelParams,
                    cfg: BracketConfig | None = None,
                    inverse: str = "fixed_point",
                    fixed_point_tol: float = 1e-13,
                    max_iter: int = 60):
    """Map a state through the order-k Lie transforms of ``tspec.families``.

    mean_to_osculating applies the forward maps (innermost family first);
    osculating_to_mean inverts them family by family, either as the exact
    fixed-point inverse of the forward map (``inverse="fixed_point"``, the
    default) or as the order-k truncated series inverse with the negated
    generators (``inverse="series"``), whose round trip with the forward
    map has the O(eps**(k+1)) defect of the truncation order.

    The input may be in any chart: the map runs in Delaunay variables and
    the result is returned in the chart of the input.

    Raises:
        ConvergenceError: If the fixed-point inversion stalls.
    """
    if cfg is None:
        cfg = BracketConfig(fd_scheme="complex_step", chart="delaunay")
    if inverse not in ("fixed_point", "series"):
        raise ValueError(f"unknown inverse mode {inverse!r}")
    d = _to_chart(state, "delaunay", params)
    arr = np.real(np.asarray(d.as_array(), dtype=complex)).astype(float)
    out, _ = _apply_map(tspec, arr, params, cfg, inverse, fixed_point_tol, max_iter)
    result = DelaunayState.from_array(out)
    if isinstance(state, DelaunayState):
        return result
    if isinstance(state, PolarNodalState):
        return delaunay_to_polar_nodal(result, params)
    return delaunay_to_cartesian(result, params)


def series_roundtrip_defect(families, order: int, state, params: ModelParams,
                            cfg: BracketConfig | None = None) -> np.ndarray:
    """Deviation of mean -> osculating -> mean (series inverse) from identity.

    Returned as the compensated sum of all stage increments, so values far
    below the coordinate resolution (deep in the O(eps**(k+1)) regime)
    remain exact instead of rounding to zero.
    """
    if cfg is None:
        cfg = BracketConfig(fd_scheme="complex_step", chart="delaunay")
    d = _to_chart(state, "delaunay", params)
    arr = np.real(np.asarray(d.as_array(), dtype=complex)).astype(float)
    fwd = TransformSpec(families, order, "mean_to_osculating")
    bwd = TransformSpec(families, order, "osculating_to_mean")
    osc, delta_fwd = _apply_map(fwd, arr, params, cfg, "series", 0.0, 0)
    _, delta_bwd = _apply_map(bwd, osc, params, cfg, "series", 0.0, 0)
    return delta_fwd + delta_bwd


def transform_jacobian(tspec: TransformSpec, state, params: ModelParams,
                       cfg: BracketConfig | None = None,
                       step: float = 1e-6) -> np.ndarray:
    """Numeric 6x6 Jacobian of the transform in Delaunay coordinates.

    Differences of the composed map (complex-step when the cfg scheme asks
    for it, mean_to_osculating/series only); used to check canonicality
    (J-orthogonality) of the order-k truncation.
    """
    if cfg is None:
        cfg = BracketConfig(fd_scheme="complex_step", chart="delaunay")
    d = _to_chart(state, "delaunay", params)
    arr = np.real(np.asarray(d.as_array(), dtype=complex)).astype(float)
    jac = np.zeros((6, 6))
    use_complex = (cfg.fd_scheme == "complex_step"
                   and tspec.direction == "mean_to_osculating")
    for i in range(6):
        if use_complex:
            pert = arr.astype(complex)
            pert[i] += 1j * _COMPLEX_STEP
            image, _ = _apply_map(tspec, pert, params, cfg, "series", 0.0, 0)
            jac[:, i] = np.imag(image) / _COMPLEX_STEP
        else:
            h = step * max(1.0, abs(float(arr[i])))
            up, dn = arr.copy(), arr.copy()
            up[i] += h
            dn[i] -= h
            fu, _ = _apply_map(tspec, up, params, cfg, "fixed_point", 1e-13, 60)
            fd, _ = _apply_map(tspec, dn, params, cfg, "fixed_point", 1e-13, 60)
            jac[:, i] = (fu - fd) / (2.0 * h)
    return jac


SYMPLECTIC_MATRIX = np.block([[np.zeros((3, 3)), np.eye(3)],
                              [-np.eye(3), np.zeros((3, 3))]])


def canonicality_defect(tspec: TransformSpec, state, params: ModelParams,
                        cfg: BracketConfig | None = None) -> float:
    """Max |M^T J M - J| of the transform Jacobian; O(eps**(k+1)) for order k."""
    m = transform_jacobian(tspec, state, params, cfg)
    defect = m.T @ SYMPLECTIC_MATRIX @ m - SYMPLECTIC_MATRIX
    return float(np.max(np.abs(defect)))


# ---------------------------------------------------------------------------
# Inclination correction
# ---------------------------------------------------------------------------

def inclination_correction_I01(state, params: ModelParams):
    """First-order short-period inclination correction, closed form.

    Equals the numeric bracket {I, W1} for the BROUWER, PARALLAX and
    QUARTIC generators alike (their W1 terms share the 2w harmonics).
    """
    gm = _geom(_to_chart(state, "delaunay", params), params)
    bracket = (3.0 * gm.e * np.cos(gm.f + 2.0 * gm.g)
               + 3.0 * np.cos(2.0 * gm.f + 2.0 * gm.g)
               + gm.e * np.cos(3.0 * gm.f + 2.0 * gm.g))
    return (-0.25 * params.c20 * (params.re / gm.p) ** 2 * gm.c * gm.s * bracket)


def inclination_field() -> ScalarField:
    """Orbital inclination acos(H/G) as an evaluable field (real points only)."""
    return ScalarField("inclination", "delaunay",
                       lambda s, p: np.arccos(np.real(s.H) / np.real(s.G)))

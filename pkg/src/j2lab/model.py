"""Hamiltonian scalar fields of the J2 main problem, by family and order.

The main problem is the Kepler Hamiltonian plus the second-degree zonal
disturbing term.  Successive canonical simplifications replace the original
Hamiltonian with new term sequences; each choice of kernel is labelled by a
:class:`FamilyTag`:

* ``BROUWER``  — the first-order term is the mean-anomaly average,
* ``PARALLAX`` — the first-order term keeps 1/r**2 only (parallactic
  factors removed),
* ``QUARTIC``  — the inverse radius is raised to the fourth power,
* ``NEUTRAL``  — the cube of the inverse radius is preserved, which leaves
  a radial intermediary of Cid type,
* ``PERIGEE``  — the follow-up transformation on top of NEUTRAL that also
  removes the argument of the perigee (defined only on top of NEUTRAL).

Every evaluator is a pure function of (state, params): states may be given
in any canonical chart, broadcast over arrays, and the smooth Delaunay /
polar kernels accept complex input for complex-step differentiation.
Individual term evaluators return the plain Taylor coefficients H_{0,m};
the formal multiplier epsilon**m / m! enters only in assembled series such
as :func:`eval_main_hamiltonian` and :func:`intermediary_hamiltonian`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from types import SimpleNamespace
from typing import Callable

import numpy as np

from .elements import (
    CartesianState,
    DelaunayState,
    DomainError,
    ModelParams,
    PolarNodalState,
    _geom,
    cartesian_to_polar_nodal,
    polar_nodal_to_delaunay,
)

#: Half-width of the excluded band around the critical inclination,
#: measured on |4 - 5 s**2|; divisors of the perigee family vanish there.
CRITICAL_INCLINATION_GUARD = 1e-3


class UnsupportedFamilyError(ValueError):
    """The requested (family, order) combination has no closed form here."""


class CriticalInclinationError(ValueError):
    """Evaluation too close to the critical inclination 4 - 5 s**2 = 0."""


class FamilyTag(str, Enum):
    BROUWER = "brouwer"
    PARALLAX = "parallax"
    QUARTIC = "quartic"
    NEUTRAL = "neutral"
    PERIGEE = "perigee"


@dataclass(frozen=True)
class ScalarField:
    """An evaluable scalar field with its natural chart and a name."""

    name: str
    chart: str  # "delaunay" | "polar_nodal" | "cartesian"
    func: Callable

    def __call__(self, state, params: ModelParams):
        return self.func(state, params)


# ---------------------------------------------------------------------------
# Evaluation contexts
# ---------------------------------------------------------------------------

def _dctx(state, params: ModelParams) -> SimpleNamespace:
    """Delaunay-side geometry of a state given in any chart."""
    if isinstance(state, DelaunayState):
        return _geom(state, params)
    if isinstance(state, PolarNodalState):
        return _geom(polar_nodal_to_delaunay(state, params), params)
    if isinstance(state, CartesianState):
        return _geom(polar_nodal_to_delaunay(cartesian_to_polar_nodal(state), params),
                     params)
    raise TypeError(f"unsupported state type {type(state).__name__}")


def _pctx(state, params: ModelParams) -> SimpleNamespace:
    """Polar-side quantities (r, R, Theta, N and derived scalars).

    The latitude-dependent combination e**2 cos(2*omega) is carried as
    ``e2c2w = (kappa**2 - sigma**2) cos(2 theta) + 2 kappa sigma sin(2 theta)``,
    which is how the argument of the latitude enters the radial terms.
    """
    if isinstance(state, PolarNodalState):
        r, theta, rdot = state.r, state.theta, state.Rdot
        big_theta, big_n = state.Theta, state.N
    elif isinstance(state, DelaunayState):
        gm = _geom(state, params)
        r, theta, rdot = gm.r, gm.theta, gm.Rdot
        big_theta, big_n = state.G, state.H
    elif isinstance(state, CartesianState):
        pn = cartesian_to_polar_nodal(state)
        r, theta, rdot = pn.r, pn.theta, pn.Rdot
        big_theta, big_n = pn.Theta, pn.N
    else:
        raise TypeError(f"unsupported state type {type(state).__name__}")
    mu = params.mu
    p = big_theta * big_theta / mu
    ci = big_n / big_theta
    s2 = (1.0 - ci) * (1.0 + ci)
    kappa = p / r - 1.0
    sigma = p * rdot / big_theta
    e2 = kappa * kappa + sigma * sigma
    e2c2w = ((kappa * kappa - sigma * sigma) * np.cos(2.0 * theta)
             + 2.0 * kappa * sigma * np.sin(2.0 * theta))
    return SimpleNamespace(mu=mu, r=r, theta=theta, Rdot=rdot, Theta=big_theta,
                           N=big_n, p=p, s2=s2, kappa=kappa, sigma=sigma,
                           e2=e2, e2c2w=e2c2w)


def _check_radius(r) -> None:
    if not np.all(np.real(r) > 0.0):
        raise DomainError("state has non-positive radius")


def _check_critical(s2, guard: float) -> None:
    if np.any(np.abs(np.real(4.0 - 5.0 * s2)) < guard):
        raise CriticalInclinationError(
            f"|4 - 5 s^2| < {guard}: perigee-family divisor too small")


# ---------------------------------------------------------------------------
# Zeroth order and the full main problem
# ---------------------------------------------------------------------------

def kepler_energy(state, params: ModelParams):
    """Unperturbed Kepler Hamiltonian H_{0,0} = -mu/(2a), chart-native."""
    if isinstance(state, DelaunayState):
        return -params.mu**2 / (2.0 * state.L * state.L)
    if isinstance(state, PolarNodalState):
        _check_radius(state.r)
        return (0.5 * (state.Rdot**2 + (state.Theta / state.r) ** 2)
                - params.mu / state.r)
    if isinstance(state, CartesianState):
        pos = np.asarray(state.position)
        vel = np.asarray(state.velocity)
        r = np.sqrt(np.sum(pos * pos, axis=-1))
        _check_radius(r)
        return 0.5 * np.sum(vel * vel, axis=-1) - params.mu / r


def eval_main_hamiltonian(state, params: ModelParams):
    """Full main-problem Hamiltonian, Kepler plus epsilon times the J2 term.

    Each chart gets a native evaluation path; they agree to conversion
    roundoff, which is what the chart-independence checks exercise.  The
    node angle (nu / h) is cyclic, so the value never depends on it.
    """
    if isinstance(state, CartesianState):
        pos = np.asarray(state.position)
        vel = np.asarray(state.velocity)
        r2 = np.sum(pos * pos, axis=-1)
        r = np.sqrt(r2)
        _check_radius(r)
        kepler = 0.5 * np.sum(vel * vel, axis=-1) - params.mu / r
        # 1 - (3/2) s^2 + (3/2) s^2 cos(2 theta) = 1 - 3 (z/r)^2
        disturb = (params.mu / r) * (params.re**2 / r2) * (0.5 * params.c20) \
            * (1.0 - 3.0 * pos[..., 2] ** 2 / r2)
        return kepler + params.epsilon * disturb
    if isinstance(state, PolarNodalState):
        _check_radius(state.r)
        ci = state.N / state.Theta
        s2 = (1.0 - ci) * (1.0 + ci)
        disturb = (params.mu / state.r) * (params.re / state.r) ** 2 \
            * (0.5 * params.c20) \
            * (1.0 - 1.5 * s2 + 1.5 * s2 * np.cos(2.0 * state.theta))
        return kepler_energy(state, params) + params.epsilon * disturb
    gm = _dctx(state, params)
    _check_radius(gm.r)
    return kepler_energy(state, params) + params.epsilon * eval_Htilde01(state, params)


# ---------------------------------------------------------------------------
# First order
# ---------------------------------------------------------------------------

def eval_Htilde01(state, params: ModelParams, form: str = "anomaly"):
    """First-order forcing term of the homological equation (= disturbing term).

    Two printed arrangements are implemented and must agree identically:
    ``"anomaly"`` keeps the 1/r**3 factor with a single cos(2f + 2w)
    harmonic, ``"parallax"`` pulls one conic factor out so only 1/r**2
    remains in front of a four-harmonic bracket.
    """
    gm = _dctx(state, params)
    _check_radius(gm.r)
    c20, re, mu = params.c20, params.re, params.mu
    s2, e, f, w = gm.s2, gm.e, gm.f, gm.g
    if form == "anomaly":
        return (mu / gm.r) * 0.5 * c20 * (re / gm.r) ** 2 * (
            1.0 - 1.5 * s2 + 1.5 * s2 * np.cos(2.0 * f + 2.0 * w))
    if form == "parallax":
        bracket = ((4.0 - 6.0 * s2) * (1.0 + e * np.cos(f))
                   + 3.0 * e * s2 * np.cos(f + 2.0 * w)
                   + 6.0 * s2 * np.cos(2.0 * f + 2.0 * w)
                   + 3.0 * e * s2 * np.cos(3.0 * f + 2.0 * w))
        return (mu / gm.p) * 0.125 * c20 * (re / gm.r) ** 2 * bracket
    raise ValueError(f"unknown form {form!r}, expected 'anomaly' or 'parallax'")


def eval_H01(family: FamilyTag, state, params: ModelParams):
    """First-order Hamiltonian term H_{0,1} of the chosen family.

    The PARALLAX, QUARTIC and NEUTRAL kernels are free of the argument of
    the latitude; BROUWER is the closed-form mean-anomaly average.  The
    PERIGEE family leaves first order unchanged and is rejected here (its
    term equals the NEUTRAL one by construction).
    """
    family = FamilyTag(family)
    if family is FamilyTag.PERIGEE:
        raise UnsupportedFamilyError(
            "perigee removal leaves first order unchanged; use the NEUTRAL term")
    c20, re, mu = params.c20, params.re, params.mu
    if family is FamilyTag.BROUWER:
        gm = _dctx(state, params)
        _check_radius(gm.r)
        return (mu / gm.a) * 0.25 * c20 * (re / gm.p) ** 2 * gm.eta \
            * (2.0 - 3.0 * gm.s2)
    # The latitude-free kernels live on the polar side (complex-safe from
    # either the Delaunay or the polar-nodal chart).
    pc = _pctx(state, params)
    _check_radius(pc.r)
    two_three = 2.0 - 3.0 * pc.s2
    if family is FamilyTag.PARALLAX:
        return (mu / pc.p) * 0.25 * c20 * (re / pc.r) ** 2 * two_three
    if family is FamilyTag.QUARTIC:
        return (0.5 * c20 * (re / pc.p) ** 2 * (mu / pc.r) * (pc.p / pc.r) ** 3
                * two_three / (2.0 + pc.e2))
    # NEUTRAL: keep the third power of the inverse radius.
    return 0.25 * c20 * (re / pc.p) ** 2 * (mu / pc.r) * (pc.p / pc.r) ** 2 * two_three


# ---------------------------------------------------------------------------
# Second and third order
# ---------------------------------------------------------------------------

def eval_H02(family: FamilyTag, state, params: ModelParams):
    """Second-order Hamiltonian term H_{0,2} (PARALLAX and NEUTRAL only).

    The PARALLAX term carries (mu/r)(p/r); the NEUTRAL term carries the
    full (mu/r)(p/r)**2 and equals (p/r) times :func:`eval_Q`.  BROUWER has
    no closed trigonometric second order; the QUARTIC family is only
    carried to first order.
    """
    family = FamilyTag(family)
    if family is FamilyTag.NEUTRAL:
        pc = _pctx(state, params)
        _check_radius(pc.r)
        return (pc.p / pc.r) * eval_Q(state, params)
    if family is not FamilyTag.PARALLAX:
        raise UnsupportedFamilyError(f"no closed second-order term for {family.value}")
    gm = _dctx(state, params)
    _check_radius(gm.r)
    s2, e2 = gm.s2, gm.e**2
    bracket = (-80.0 + 168.0 * s2 - 84.0 * s2 * s2
               - 3.0 * (8.0 - 8.0 * s2 - 5.0 * s2 * s2) * e2
               + 6.0 * e2 * (14.0 - 15.0 * s2) * s2 * np.cos(2.0 * gm.g))
    return (params.c20**2 / 64.0 * (params.re / gm.p) ** 4
            * (gm.p / gm.r) * (params.mu / gm.r) * bracket)


def eval_Q(state, params: ModelParams):
    """Kernel block of the NEUTRAL second order, factored by (mu/r)(p/r)s**2.

    The argument of the latitude enters only through e**2 cos(2*omega),
    rewritten in the polar variables; everything else is radial.
    """
    pc = _pctx(state, params)
    _check_radius(pc.r)
    s2 = pc.s2
    bracket = (8.0 * (3.0 - 4.0 * s2) + (16.0 - 23.0 * s2) * pc.e2
               - 2.0 * (14.0 - 15.0 * s2) * pc.e2c2w)
    return (-3.0 / 64.0 * params.c20**2 * (params.re**2 / pc.p**2) ** 2
            * (pc.mu / pc.r) * (pc.p / pc.r) * s2 * bracket)


def eval_Htilde02_neutral(state, params: ModelParams):
    """Second-order forcing term of the NEUTRAL chain, closed form.

    Valid for the vanishing first-order arbitrary function (the choice made
    when the chain is built); it must match the numerically evaluated
    bracket combination H_{2,0} + {H_{0,1}; W_1} + {H_{1,0}; W_1}.
    """
    gm = _dctx(state, params)
    _check_radius(gm.r)
    s2, e, f, w = gm.s2, gm.e, gm.f, gm.g
    e2, s4 = e * e, s2 * s2
    terms = (
        6.0 * s2 * (e2 * (23.0 * s2 - 16.0) + 8.0 * (4.0 * s2 - 3.0))
        + 12.0 * e * (39.0 * s2 - 28.0) * s2 * np.cos(f)
        + 6.0 * e2 * (23.0 * s2 - 16.0) * s2 * np.cos(2.0 * f)
        + 12.0 * e2 * (14.0 - 15.0 * s2) * s2 * np.cos(2.0 * w)
        + 48.0 * e * (11.0 - 12.0 * s2) * s2 * np.cos(f + 2.0 * w)
        - 24.0 * s2 * (e2 * (11.0 * s2 - 10.0) + 2.0 * (9.0 * s2 - 8.0))
        * np.cos(2.0 * f + 2.0 * w)
        - 48.0 * e * (8.0 * s2 - 7.0) * s2 * np.cos(3.0 * f + 2.0 * w)
        + 12.0 * e2 * (6.0 - 7.0 * s2) * s2 * np.cos(4.0 * f + 2.0 * w)
        - 15.0 * e2 * s4 * np.cos(2.0 * f + 4.0 * w)
        - 18.0 * e * s4 * np.cos(3.0 * f + 4.0 * w)
        - 6.0 * (e2 - 4.0) * s4 * np.cos(4.0 * f + 4.0 * w)
        + 30.0 * e * s4 * np.cos(5.0 * f + 4.0 * w)
        + 9.0 * e2 * s4 * np.cos(6.0 * f + 4.0 * w)
    )
    return (params.c20**2 / 128.0 * (params.re / gm.p) ** 4
            * (params.mu / gm.r) * (gm.p / gm.r) * terms)


def eval_H03_neutral(state, params: ModelParams):
    """Third-order Hamiltonian term of the NEUTRAL chain (before perigee removal)."""
    pc = _pctx(state, params)
    _check_radius(pc.r)
    s2, e2 = pc.s2, pc.e2
    s4 = s2 * s2
    bracket = (
        16.0 * (31.0 - 26.0 * s2) * s2
        - 4.0 * (440.0 - 1614.0 * s2 + 1217.0 * s4) * e2
        - 9.0 * (2.0 - 3.0 * s2) * (16.0 - 23.0 * s2) * e2 * e2
        + 2.0 * (1984.0 - 5264.0 * s2 + 3405.0 * s4
                 + 9.0 * (28.0 - 72.0 * s2 + 45.0 * s4) * e2) * pc.e2c2w
    )
    return (9.0 / 1024.0 * params.c20**3 * (params.re**2 / pc.p**2) ** 3
            * (pc.mu / pc.r) * (pc.p / pc.r) ** 2 * s2 * bracket)


def eval_K0m_perigee(m: int, state, params: ModelParams,
                     guard: float = CRITICAL_INCLINATION_GUARD):
    """Term K_{0,m} of the latitude-free radial intermediary, m in {1, 2, 3}.

    All three terms are independent of both the argument of the latitude
    and the argument of the perigee: in polar variables they depend on
    (r, Rdot, Theta, N) only.  K_{0,3} carries the critical-inclination
    divisor 4 - 5 s**2 and is guarded.
    """
    if m not in (1, 2, 3):
        raise ValueError(f"m must be 1, 2 or 3, got {m}")
    pc = _pctx(state, params)
    _check_radius(pc.r)
    if m == 1:
        return eval_H01(FamilyTag.NEUTRAL, state, params)
    s2, e2 = pc.s2, pc.e2
    if m == 2:
        bracket = 8.0 * (3.0 - 4.0 * s2) + (16.0 - 23.0 * s2) * e2
        return (-3.0 / 64.0 * params.c20**2 * (params.re**2 / pc.p**2) ** 2
                * (pc.mu / pc.r) * (pc.p / pc.r) ** 2 * s2 * bracket)
    _check_critical(s2, guard)
    four_five = 4.0 - 5.0 * s2
    s4, s6, s8 = s2 * s2, s2**3, s2**4
    # The divisor is the square of 4 - 5 s**2: the e**0 block then reduces to
    # the pre-removal third order at e = 0 and the third-order homological
    # solvability holds, which single-power variants fail.
    bracket = (
        16.0 * s2 * four_five**2 * (31.0 - 26.0 * s2)
        - 2.0 * four_five * (3520.0 - 17116.0 * s2 + 25456.0 * s4
                             - 11945.0 * s6) * e2
        - (3040.0 - 15116.0 * s2 + 29176.0 * s4 - 25815.0 * s6
           + 8775.0 * s8) * e2 * e2
    )
    return (9.0 / 1024.0 * params.c20**3 * (params.re**2 / pc.p**2) ** 3
            * (pc.mu / pc.r) * (pc.p / pc.r) ** 2 * s2 / four_five**2 * bracket)


# ---------------------------------------------------------------------------
# Equation-of-the-center coupling term and its average
# ---------------------------------------------------------------------------

def eval_chi(state, params: ModelParams):
    """Second-order cross term coupling the equation of the center with
    sin(2f + 2w); the obstruction to closing the averaged second order in
    trigonometric functions."""
    gm = _dctx(state, params)
    _check_radius(gm.r)
    return (9.0 / 8.0 * (params.mu / gm.r) * params.c20**2 * (params.re / gm.p) ** 4
            * (gm.p / gm.r) ** 2 * gm.s2 * (4.0 - 5.0 * gm.s2)
            * gm.phi * np.sin(2.0 * gm.f + 2.0 * gm.g))


def chi_average(state, params: ModelParams):
    """Closed-form mean-anomaly average of :func:`eval_chi`."""
    gm = _dctx(state, params)
    eta = gm.eta
    return (3.0 / 16.0 * (params.mu / gm.p) * params.c20**2
            * (params.re / gm.p) ** 4 * (1.0 - eta) / (1.0 + eta)
            * (1.0 + 2.0 * eta) * eta**3 * gm.s2 * (4.0 - 5.0 * gm.s2)
            * np.cos(2.0 * gm.g))


# ---------------------------------------------------------------------------
# Radial intermediary
# ---------------------------------------------------------------------------

def _intermediary_value(r, rdot, big_theta, big_n, order: int, truncate_e2: bool,
                        params: ModelParams, guard: float):
    """Intermediary Hamiltonian from raw polar components (complex-safe)."""
    mu = params.mu
    kepler = 0.5 * (rdot * rdot + (big_theta / r) ** 2) - mu / r
    if order < 1 or params.c20 == 0.0:
        return kepler
    p = big_theta * big_theta / mu
    ci = big_n / big_theta
    s2 = (1.0 - ci) * (1.0 + ci)
    radial3 = (mu / r) * (p / r) ** 2
    chi_p = params.c20 * (params.re / p) ** 2
    eps = params.epsilon
    value = kepler + eps * 0.25 * chi_p * radial3 * (2.0 - 3.0 * s2)
    if order < 2:
        return value
    if truncate_e2:
        e2 = 0.0
    else:
        kappa = p / r - 1.0
        sigma = p * rdot / big_theta
        e2 = kappa * kappa + sigma * sigma
    k02 = (-3.0 / 64.0 * chi_p**2 * radial3 * s2
           * (8.0 * (3.0 - 4.0 * s2) + (16.0 - 23.0 * s2) * e2))
    value = value + 0.5 * eps * eps * k02
    if order < 3:
        return value
    _check_critical(s2, guard)
    four_five = 4.0 - 5.0 * s2
    s4, s6, s8 = s2 * s2, s2**3, s2**4
    bracket = (16.0 * s2 * four_five**2 * (31.0 - 26.0 * s2)
               - 2.0 * four_five * (3520.0 - 17116.0 * s2 + 25456.0 * s4
                                    - 11945.0 * s6) * e2
               - (3040.0 - 15116.0 * s2 + 29176.0 * s4 - 25815.0 * s6
                  + 8775.0 * s8) * e2 * e2)
    k03 = 9.0 / 1024.0 * chi_p**3 * radial3 * s2 / four_five**2 * bracket
    return value + eps**3 / 6.0 * k03


def intermediary_hamiltonian(order: int, truncate_e2: bool, state,
                             params: ModelParams,
                             guard: float = CRITICAL_INCLINATION_GUARD):
    """Radial intermediary K_{0,0} + sum_m (eps**m/m!) K_{0,m} up to ``order``.

    With ``truncate_e2`` the e**2 and e**4 blocks of K_{0,2} and K_{0,3}
    are dropped, which removes the radial-velocity dependence from the
    disturbing part and leaves a potential in (r, Theta, N) alone on top of
    the Keplerian.

    Args:
        order: Highest included term, 1 to 3 (0 gives the pure Kepler value).
        truncate_e2: Drop every eccentricity-squared block of orders 2, 3.
        state: Phase point in any chart (polar-nodal is the natural one).
        params: Model constants (epsilon enters as eps**m / m!).
        guard: Critical-inclination guard half-width for order 3.
    """
    if order not in (0, 1, 2, 3):
        raise ValueError(f"order must be 0..3, got {order}")
    pc = _pctx(state, params)
    _check_radius(pc.r)
    return _intermediary_value(pc.r, pc.Rdot, pc.Theta, pc.N, order, truncate_e2,
                               params, guard)


# ---------------------------------------------------------------------------
# Inverse-radius decompositions
# ---------------------------------------------------------------------------

def one_over_r2_decomposition(kind: str, state, params: ModelParams):
    """Split 1/r**2 into a kernel part plus a pure Fourier image part.

    ``kind="quartic"`` raises the kernel to (1/r**2)(p/r)**2 * 2/(2 + e**2);
    ``kind="neutral"`` keeps (1/r**2)(p/r).  Returns (kernel, image) whose
    sum reconstructs 1/r**2 identically.
    """
    gm = _dctx(state, params)
    _check_radius(gm.r)
    inv_r2 = 1.0 / gm.r**2
    if kind == "quartic":
        scale = 2.0 / (2.0 + gm.e**2)
        kernel = inv_r2 * (gm.p / gm.r) ** 2 * scale
        image = -inv_r2 * scale * (2.0 * gm.e * np.cos(gm.f)
                                   + 0.5 * gm.e**2 * np.cos(2.0 * gm.f))
        return kernel, image
    if kind == "neutral":
        return inv_r2 * (gm.p / gm.r), -inv_r2 * gm.e * np.cos(gm.f)
    raise ValueError(f"unknown decomposition {kind!r}, expected 'quartic' or 'neutral'")


# ---------------------------------------------------------------------------
# Term registry
# ---------------------------------------------------------------------------

def term_registry() -> dict:
    """Registry of every named field, queryable by (family, order).

    Returns a dict mapping (family, order) to a list of ScalarFields; the
    Hamiltonian terms live here, the generating-function terms are pulled
    in from the generators module.  Family ``None`` holds the shared terms.
    """
    from . import generators  # deferred: generators imports this module

    reg: dict = {}

    def add(family, order, field):
        reg.setdefault((family, order), []).append(field)

    add(None, 0, ScalarField("H00_kepler", "delaunay", kepler_energy))
    add(None, 0, ScalarField("H_main", "cartesian", eval_main_hamiltonian))
    add(None, 1, ScalarField("Htilde01", "delaunay", eval_Htilde01))
    for family in (FamilyTag.BROUWER, FamilyTag.PARALLAX, FamilyTag.QUARTIC,
                   FamilyTag.NEUTRAL):
        add(family, 1, ScalarField(f"H01_{family.value}", "delaunay",
                                   lambda s, p, fam=family: eval_H01(fam, s, p)))
        add(family, 1, generators.w1_field(family))
    add(FamilyTag.PARALLAX, 2, ScalarField(
        "H02_parallax", "delaunay", lambda s, p: eval_H02(FamilyTag.PARALLAX, s, p)))
    add(FamilyTag.NEUTRAL, 2, ScalarField(
        "H02_neutral", "polar_nodal", lambda s, p: eval_H02(FamilyTag.NEUTRAL, s, p)))
    add(FamilyTag.NEUTRAL, 2, ScalarField("Q_neutral", "polar_nodal", eval_Q))
    add(FamilyTag.NEUTRAL, 2, ScalarField("Htilde02_neutral", "delaunay",
                                          eval_Htilde02_neutral))
    add(FamilyTag.NEUTRAL, 2, generators.w2_field(FamilyTag.NEUTRAL))
    add(FamilyTag.NEUTRAL, 3, ScalarField("H03_neutral", "polar_nodal",
                                          eval_H03_neutral))
    add(FamilyTag.BROUWER, 2, ScalarField("chi", "delaunay", eval_chi))
    add(FamilyTag.BROUWER, 2, ScalarField("chi_average", "delaunay", chi_average))
    for m in (1, 2, 3):
        add(FamilyTag.PERIGEE, m, ScalarField(
            f"K0{m}_perigee", "polar_nodal",
            lambda s, p, mm=m: eval_K0m_perigee(mm, s, p)))
    add(FamilyTag.PERIGEE, 1, generators.w1_field(FamilyTag.PERIGEE))
    add(FamilyTag.PERIGEE, 2, generators.w2_field(FamilyTag.PERIGEE))
    return reg


def find_term(name: str) -> ScalarField:
    """Look a field up by name in :func:`term_registry`."""
    for fields in term_registry().values():
        for field in fields:
            if field.name == name:
                return field
    raise KeyError(f"no registered term named {name!r}")

"""Generating-function terms of the canonical simplifications.

Closed forms of the first- and second-order generating terms W1, W2 for
every transformation family, the arbitrary mean-anomaly-free functions A1
and A2 that fix the non-uniqueness of the homological solution, and the
compact polar-variable forms of the NEUTRAL chain.

Every term here solves the homological equation n dW/d(ell) = forcing for
its family and order; the numeric engine in :mod:`j2lab.lie` uses exactly
these closed forms, so a transcription slip shows up as a nonzero
homological residual rather than propagating silently.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .elements import DelaunayState, ModelParams, PolarNodalState
from .model import (
    CRITICAL_INCLINATION_GUARD,
    FamilyTag,
    ScalarField,
    UnsupportedFamilyError,
    _check_critical,
    _dctx,
    _pctx,
)


class A1Mode(str, Enum):
    """Choice of the mean-anomaly-free function added to W1.

    ZERO picks the plain quadrature solution; LONG_PERIOD_FREE (NEUTRAL
    only) subtracts the mean-anomaly average so W1 carries short-period
    terms only; PERIGEE_DETERMINED is the value forced on the perigee
    removal by its own second order.
    """

    ZERO = "zero"
    LONG_PERIOD_FREE = "long_period_free"
    PERIGEE_DETERMINED = "perigee_determined"


@dataclass(frozen=True)
class GeneratorChoice:
    """A (family, order, A1-mode) selection for generating-function terms."""

    family: FamilyTag
    order: int = 1
    a1_mode: A1Mode = A1Mode.ZERO

    def __post_init__(self):
        object.__setattr__(self, "family", FamilyTag(self.family))
        object.__setattr__(self, "a1_mode", A1Mode(self.a1_mode))
        if self.order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {self.order}")
        if self.family is FamilyTag.PERIGEE and self.a1_mode is not A1Mode.PERIGEE_DETERMINED:
            raise ValueError("the PERIGEE family forces a1_mode=PERIGEE_DETERMINED")
        if self.family is not FamilyTag.PERIGEE and self.a1_mode is A1Mode.PERIGEE_DETERMINED:
            raise ValueError("a1_mode=PERIGEE_DETERMINED is only meaningful for PERIGEE")
        if self.a1_mode is A1Mode.LONG_PERIOD_FREE and self.family is not FamilyTag.NEUTRAL:
            raise ValueError("a1_mode=LONG_PERIOD_FREE is implemented for NEUTRAL only")
        if self.order == 2 and self.family not in (FamilyTag.NEUTRAL, FamilyTag.PERIGEE):
            raise ValueError(f"no W2 available for family {self.family.value}")


def _w_prefactor(gm, params: ModelParams):
    # G * C20 * re^2 / (8 p^2): the common scale of every first-order term.
    return gm.G * 0.125 * params.c20 * (params.re / gm.p) ** 2


# ---------------------------------------------------------------------------
# Arbitrary functions
# ---------------------------------------------------------------------------

def eval_A1_long_period_free(state, params: ModelParams):
    """Mean-anomaly-free addition that zeroes the average of W1 (NEUTRAL).

    Equal to minus the mean-anomaly average of the plain NEUTRAL W1, so the
    combined term carries short-period content only.
    """
    gm = _dctx(state, params)
    eta = gm.eta
    return (_w_prefactor(gm, params) * (1.0 - eta) / (1.0 + eta)
            * (1.0 + 2.0 * eta) * gm.s2 * np.sin(2.0 * gm.g))


def eval_A1_perigee(state, params: ModelParams,
                    guard: float = CRITICAL_INCLINATION_GUARD):
    """First-order generating term of the perigee removal, W1 = A1.

    Determined at second order by cancelling the would-be secular forcing;
    it satisfies (4 - 5 s**2) dA1/dg + (1/16) C20 (re/p)**2 G s**2
    (14 - 15 s**2) e**2 cos(2g) = 0 and carries the critical-inclination
    divisor.
    """
    gm = _dctx(state, params)
    _check_critical(gm.s2, guard)
    return (-1.0 / 32.0 * params.c20 * (params.re / gm.p) ** 2 * gm.G
            * (14.0 - 15.0 * gm.s2) / (4.0 - 5.0 * gm.s2) * gm.s2 * gm.e**2
            * np.sin(2.0 * gm.g))


def eval_A2_perigee(state, params: ModelParams,
                    guard: float = CRITICAL_INCLINATION_GUARD):
    """Second-order arbitrary function of the perigee removal.

    Fixed only at third order; the remaining integration constant that
    could still depend on the actions alone is set to zero.
    """
    gm = _dctx(state, params)
    _check_critical(gm.s2, guard)
    s2, e2 = gm.s2, gm.e**2
    s4 = s2 * s2
    four_five = 4.0 - 5.0 * s2
    ratio = (14.0 - 15.0 * s2) / four_five
    sin2w_block = e2 * s2 * (4.0 * (824.0 - 1997.0 * s2 + 1215.0 * s4)
                             + ratio * (56.0 - 36.0 * s2 - 45.0 * s4) * e2)
    sin4w_block = ratio**2 / 2.0 * (13.0 - 15.0 * s2) * e2 * e2 * s4
    return (-1.0 / 512.0 * params.c20**2 * (params.re / gm.p) ** 4
            * gm.G / four_five
            * (sin2w_block * np.sin(2.0 * gm.g) - sin4w_block * np.sin(4.0 * gm.g)))


def perigee_a1_equation_residual(state, params: ModelParams,
                                 dg: float = 3e-4,
                                 guard: float = CRITICAL_INCLINATION_GUARD):
    """Residual of the defining equation of A1, with dA1/dg by finite differences.

    Returns (4 - 5 s**2) dA1/dg + (1/16) C20 (re/p)**2 G s**2 (14 - 15 s**2)
    e**2 cos(2g); zero when the closed-form A1 is correct.  The derivative
    uses Richardson-extrapolated central differences; the default step
    keeps roundoff harmless even where the critical-inclination divisor
    inflates A1 itself.
    """
    gm = _dctx(state, params)
    _check_critical(gm.s2, guard)
    d = state if isinstance(state, DelaunayState) else DelaunayState(
        gm.ell, gm.g, gm.h, gm.L, gm.G, gm.H)

    def central(step):
        plus = eval_A1_perigee(
            DelaunayState(d.ell, d.g + step, d.h, d.L, d.G, d.H), params, guard)
        minus = eval_A1_perigee(
            DelaunayState(d.ell, d.g - step, d.h, d.L, d.G, d.H), params, guard)
        return (plus - minus) / (2.0 * step)

    da1_dg = (4.0 * central(0.5 * dg) - central(dg)) / 3.0
    forcing = (1.0 / 16.0 * params.c20 * (params.re / gm.p) ** 2 * gm.G
               * gm.s2 * (14.0 - 15.0 * gm.s2) * gm.e**2 * np.cos(2.0 * gm.g))
    return (4.0 - 5.0 * gm.s2) * da1_dg + forcing


# ---------------------------------------------------------------------------
# First-order terms
# ---------------------------------------------------------------------------

def eval_W1(choice: GeneratorChoice, state, params: ModelParams):
    """First-order generating term W1 of the chosen family.

    All families are 2*pi-periodic in the mean anomaly (the BROUWER term
    through the equation of the center); the PERIGEE W1 equals its A1 and
    carries no mean anomaly at all.
    """
    if not isinstance(choice, GeneratorChoice):
        choice = GeneratorChoice(family=choice)
    family = choice.family
    if family is FamilyTag.PERIGEE:
        return eval_A1_perigee(state, params)
    gm = _dctx(state, params)
    s2, e, f, w = gm.s2, gm.e, gm.f, gm.g
    shared = (3.0 * e * s2 * np.sin(f + 2.0 * w)
              + 3.0 * s2 * np.sin(2.0 * f + 2.0 * w)
              + e * s2 * np.sin(3.0 * f + 2.0 * w))
    if family is FamilyTag.BROUWER:
        bracket = (4.0 - 6.0 * s2) * (gm.phi + e * np.sin(f)) + shared
    elif family is FamilyTag.PARALLAX:
        bracket = (4.0 - 6.0 * s2) * e * np.sin(f) + shared
    elif family is FamilyTag.QUARTIC:
        bracket = ((e**2 - 2.0) / (e**2 + 2.0) * (4.0 - 6.0 * s2) * e * np.sin(f)
                   - e**2 / (2.0 + e**2) * (2.0 - 3.0 * s2) * np.sin(2.0 * f)
                   + shared)
    else:  # NEUTRAL
        bracket = shared
    value = _w_prefactor(gm, params) * bracket
    if choice.a1_mode is A1Mode.LONG_PERIOD_FREE:
        value = value + eval_A1_long_period_free(state, params)
    return value


# ---------------------------------------------------------------------------
# Second-order terms
# ---------------------------------------------------------------------------

def eval_W2(family: FamilyTag, state, params: ModelParams,
            guard: float = CRITICAL_INCLINATION_GUARD):
    """Second-order generating term W2 (NEUTRAL or PERIGEE).

    The NEUTRAL term is the quadrature solution for the vanishing A1; its
    sin(f - 2w) harmonic is the one extra term relative to the parallax
    removal.  The PERIGEE term includes its determined A2.
    """
    family = FamilyTag(family)
    gm = _dctx(state, params)
    s2, e, f, w = gm.s2, gm.e, gm.f, gm.g
    e2, s4 = e * e, s2 * s2
    if family is FamilyTag.NEUTRAL:
        terms = (
            -12.0 * e * (2.0 - e2) * (16.0 - 23.0 * s2) * s2 * np.sin(f)
            - 6.0 * e2 * (16.0 - 23.0 * s2) * s2 * np.sin(2.0 * f)
            + 12.0 * e2 * e * (15.0 * s2 - 14.0) * s2 * np.sin(f - 2.0 * w)
            + 12.0 * e * s2 * (e2 * (15.0 * s2 - 14.0) - 96.0 * s2 + 88.0)
            * np.sin(f + 2.0 * w)
            - 24.0 * s2 * (e2 * (11.0 * s2 - 10.0) + 2.0 * (9.0 * s2 - 8.0))
            * np.sin(2.0 * f + 2.0 * w)
            - 32.0 * e * (8.0 * s2 - 7.0) * s2 * np.sin(3.0 * f + 2.0 * w)
            + 6.0 * e2 * (6.0 - 7.0 * s2) * s2 * np.sin(4.0 * f + 2.0 * w)
            - 15.0 * e2 * s4 * np.sin(2.0 * f + 4.0 * w)
            - 12.0 * e * s4 * np.sin(3.0 * f + 4.0 * w)
            - 3.0 * (e2 - 4.0) * s4 * np.sin(4.0 * f + 4.0 * w)
            + 12.0 * e * s4 * np.sin(5.0 * f + 4.0 * w)
            + 3.0 * e2 * s4 * np.sin(6.0 * f + 4.0 * w)
        )
        return gm.G / 256.0 * params.c20**2 * (params.re / gm.p) ** 4 * terms
    if family is not FamilyTag.PERIGEE:
        raise UnsupportedFamilyError(f"no W2 for family {family.value}")
    _check_critical(s2, guard)
    ratio = (14.0 - 15.0 * s2) / (4.0 - 5.0 * s2)
    bracket = (3.0 * e2 * np.sin(f - 2.0 * w)
               - e2 * np.sin(3.0 * f + 2.0 * w)
               - 6.0 * e * np.sin(2.0 * f + 2.0 * w)
               - 12.0 * np.sin(f + 2.0 * w))
    periodic = (gm.G / 128.0 * params.c20**2 * (params.re / gm.p) ** 4
                * e * s2 * ratio * (2.0 - 3.0 * s2) * bracket)
    return periodic + eval_A2_perigee(state, params)


# ---------------------------------------------------------------------------
# Polar-variable forms of the NEUTRAL terms
# ---------------------------------------------------------------------------

def eval_W_polar(order: int, pn: PolarNodalState, params: ModelParams):
    """NEUTRAL W1 or W2 written directly in the polar-nodal chart.

    Uses the eccentricity-vector projections kappa = p/r - 1 and
    sigma = p*Rdot/Theta; must agree with the Delaunay forms evaluated on
    the Delaunay image of ``pn``.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    pc = _pctx(pn, params)
    s2, kappa, sigma, theta = pc.s2, pc.kappa, pc.sigma, pc.theta
    big_g = pc.Theta
    if order == 1:
        return (big_g * 0.125 * params.c20 * (params.re**2 / pc.p**2) * s2
                * ((3.0 + 4.0 * kappa) * np.sin(2.0 * theta)
                   - 2.0 * sigma * np.cos(2.0 * theta)))
    s4 = s2 * s2
    k2, g2 = kappa * kappa, sigma * sigma
    terms = (
        3.0 * (16.0 - 23.0 * s2) * s2 * (k2 + g2 - kappa - 2.0) * sigma
        - (16.0 * (13.0 - 14.0 * s2) - 3.0 * (6.0 - 7.0 * s2) * kappa
           + 6.0 * (14.0 - 15.0 * s2) * (k2 - g2)) * s2 * sigma
        * np.cos(2.0 * theta)
        + 3.0 * s4 * (2.0 + 3.0 * kappa) * sigma * np.cos(4.0 * theta)
        + 2.0 * (6.0 * (8.0 - 9.0 * s2) + 16.0 * (10.0 - 11.0 * s2) * kappa
                 - 6.0 * (14.0 - 15.0 * s2) * kappa * g2
                 + 0.75 * (46.0 - 51.0 * s2) * k2
                 + 0.75 * (34.0 - 37.0 * s2) * g2) * s2 * np.sin(2.0 * theta)
        + 0.75 * (4.0 - 5.0 * k2 + 3.0 * g2) * s4 * np.sin(4.0 * theta)
    )
    return big_g / 64.0 * params.c20**2 * (params.re**2 / pc.p**2) ** 2 * terms


# ---------------------------------------------------------------------------
# Registry adapters
# ---------------------------------------------------------------------------

def w1_field(family: FamilyTag) -> ScalarField:
    family = FamilyTag(family)
    mode = A1Mode.PERIGEE_DETERMINED if family is FamilyTag.PERIGEE else A1Mode.ZERO
    choice = GeneratorChoice(family=family, order=1, a1_mode=mode)
    return ScalarField(f"W1_{family.value}", "delaunay",
                       lambda s, p: eval_W1(choice, s, p))


def w2_field(family: FamilyTag) -> ScalarField:
    family = FamilyTag(family)
    return ScalarField(f"W2_{family.value}", "delaunay",
                       lambda s, p: eval_W2(family, s, p))

"""Canonical charts of the oblateness-perturbed Kepler problem.

One physical phase point can be written in three canonical charts:

* Delaunay action-angle variables ``(ell, g, h, L, G, H)`` — mean anomaly,
  argument of perigee, node angle, and their conjugate actions,
* polar-nodal (Hill/Whittaker) variables ``(r, theta, nu, R, Theta, N)`` —
  radius, argument of latitude, node angle, radial velocity, total and
  polar components of the angular momentum,
* Cartesian position/velocity, used as the truth chart for propagation.

This module holds those charts, the Kepler-equation solver, the derived
orbit-geometry scalars consumed by the Hamiltonian machinery, and the JSON
state-file format of the command line tools.

Conventions: angles are kept on the real line internally (no wrapping), so
every quantity stays smooth under numerical differentiation; wrapping into
``[0, 2*pi)`` happens only in reporting helpers.  All functions broadcast
over numpy arrays, and the Delaunay-side kernels accept complex input so
complex-step differentiation works through them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from types import SimpleNamespace

import numpy as np

TWO_PI = 2.0 * np.pi

#: Earth J2 (JGM-3 value); the signed second-degree zonal coefficient is -J2.
J2_EARTH = 1.08262668e-3
C20_EARTH = -J2_EARTH

#: Inclinations closer than this (radians) to 0 or pi have no defined node.
NODE_SINGULARITY_TOL = 1e-9


class DomainError(ValueError):
    """Input outside the elliptic-motion domain handled by this package."""


class DegenerateGeometryError(ValueError):
    """Geometry too close to a singular configuration (undefined node)."""


def wrap_two_pi(angle):
    """Wrap an angle into [0, 2*pi)."""
    return np.mod(angle, TWO_PI)


def wrap_pi(angle):
    """Wrap an angle into (-pi, pi]."""
    wrapped = np.mod(angle + np.pi, TWO_PI) - np.pi
    return np.where(wrapped == -np.pi, np.pi, wrapped)


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the model and the formal book-keeping parameter.

    ``mu`` and ``re`` fix the unit system; the nondimensional default
    (both 1.0) keeps the numerics well conditioned, physical units belong at
    I/O boundaries only.  ``c20`` is the signed zonal coefficient (negative
    for an oblate body such as the Earth); every formula in the package uses
    the signed value, never J2.  ``epsilon`` multiplies the m-th order term
    of every Taylor-style series as ``epsilon**m / m!`` and is normally left
    at the formal value 1.
    """

    mu: float = 1.0
    re: float = 1.0
    c20: float = C20_EARTH
    epsilon: float = 1.0

    def __post_init__(self) -> None:
        if not self.mu > 0.0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not self.re > 0.0:
            raise ValueError(f"re must be positive, got {self.re}")
        if not abs(self.c20) < 1.0:
            raise ValueError(f"|c20| must be below 1, got {self.c20}")

    def with_c20(self, c20: float) -> "ModelParams":
        """Same constants with a different zonal coefficient (for sweeps)."""
        return ModelParams(mu=self.mu, re=self.re, c20=c20, epsilon=self.epsilon)


@dataclass(frozen=True)
class DelaunayState:
    """Delaunay chart: angles (ell, g, h) and actions (L, G, H)."""

    ell: float
    g: float
    h: float
    L: float
    G: float
    H: float

    def validate(self) -> "DelaunayState":
        L, G, H = np.real(self.L), np.real(self.G), np.real(self.H)
        if not np.all(L > 0.0):
            raise DomainError("Delaunay action L must be positive")
        if not (np.all(G > 0.0) and np.all(G <= L * (1.0 + 1e-12))):
            raise DomainError("Delaunay action G must satisfy 0 < G <= L")
        if not np.all(np.abs(H) <= G * (1.0 + 1e-12)):
            raise DomainError("Delaunay action H must satisfy |H| <= G")
        return self

    def as_array(self) -> np.ndarray:
        return np.stack(np.broadcast_arrays(
            self.ell, self.g, self.h, self.L, self.G, self.H), axis=-1)

    @classmethod
    def from_array(cls, arr) -> "DelaunayState":
        arr = np.asarray(arr)
        return cls(*(arr[..., i] for i in range(6)))

    def wrapped(self) -> "DelaunayState":
        """Angles reported in [0, 2*pi)."""
        return DelaunayState(wrap_two_pi(self.ell), wrap_two_pi(self.g),
                             wrap_two_pi(self.h), self.L, self.G, self.H)


@dataclass(frozen=True)
class PolarNodalState:
    """Polar-nodal chart: coordinates (r, theta, nu), momenta (Rdot, Theta, N)."""

    r: float
    theta: float
    nu: float
    Rdot: float
    Theta: float
    N: float

    def validate(self) -> "PolarNodalState":
        if not np.all(np.real(self.r) > 0.0):
            raise DomainError("radius r must be positive")
        if not np.all(np.real(self.Theta) > 0.0):
            raise DomainError("total angular momentum Theta must be positive")
        if not np.all(np.abs(np.real(self.N)) <= np.real(self.Theta) * (1.0 + 1e-12)):
            raise DomainError("polar component N must satisfy |N| <= Theta")
        return self

    def as_array(self) -> np.ndarray:
        return np.stack(np.broadcast_arrays(
            self.r, self.theta, self.nu, self.Rdot, self.Theta, self.N), axis=-1)

    @classmethod
    def from_array(cls, arr) -> "PolarNodalState":
        arr = np.asarray(arr)
        return cls(*(arr[..., i] for i in range(6)))

    def wrapped(self) -> "PolarNodalState":
        return PolarNodalState(self.r, wrap_two_pi(self.theta), wrap_two_pi(self.nu),
                               self.Rdot, self.Theta, self.N)


@dataclass(frozen=True)
class CartesianState:
    """Cartesian chart: position and velocity, shape (..., 3) each."""

    position: np.ndarray
    velocity: np.ndarray

    def validate(self) -> "CartesianState":
        pos = np.asarray(self.position, dtype=float)
        vel = np.asarray(self.velocity, dtype=float)
        if not np.all(np.linalg.norm(pos, axis=-1) > 0.0):
            raise DomainError("position must be nonzero")
        if not np.all(np.linalg.norm(np.cross(pos, vel), axis=-1) > 0.0):
            raise DomainError("rectilinear orbit: position x velocity vanishes")
        return self

    def as_array(self) -> np.ndarray:
        return np.concatenate([np.asarray(self.position), np.asarray(self.velocity)],
                              axis=-1)

    @classmethod
    def from_array(cls, arr) -> "CartesianState":
        arr = np.asarray(arr)
        return cls(position=arr[..., :3], velocity=arr[..., 3:])


@dataclass(frozen=True)
class OrbitGeometry:
    """Derived scalars of one elliptic phase point.

    ``a`` semi-major axis, ``e`` eccentricity, ``eta = G/L``, ``p = G**2/mu``
    conic parameter, ``s`` sine of inclination, ``n`` mean motion, ``f`` true
    anomaly in [0, 2*pi), ``phi = f - ell`` equation of the center in
    (-pi, pi], and the eccentricity-vector projections ``kappa = e*cos f =
    p/r - 1`` and ``sigma = e*sin f = p*Rdot/Theta``.
    """

    a: float
    e: float
    eta: float
    p: float
    s: float
    n: float
    f: float
    phi: float
    kappa: float
    sigma: float


# ---------------------------------------------------------------------------
# Kepler equation and anomaly conversions
# ---------------------------------------------------------------------------

KEPLER_TOL = 1e-14
_KEPLER_NEWTON_MAX = 50
_KEPLER_BISECT_MAX = 120


def _kepler_residual(E, e, M):
    return E - e * np.sin(E) - M


def _solve_kepler_real(M, e, tol):
    """Newton from E0 = M + e*sin M, bisection fallback for stragglers."""
    E = M + e * np.sin(M)
    for _ in range(_KEPLER_NEWTON_MAX):
        residual = _kepler_residual(E, e, M)
        if np.all(np.abs(residual) <= tol):
            return E
        E = E - residual / (1.0 - e * np.cos(E))
    # Bisection on [M - e, M + e]; the residual is strictly increasing in E.
    stuck = np.abs(_kepler_residual(E, e, M)) > tol
    lo = np.where(stuck, M - e, E)
    hi = np.where(stuck, M + e, E)
    for _ in range(_KEPLER_BISECT_MAX):
        mid = 0.5 * (lo + hi)
        positive = _kepler_residual(mid, e, M) > 0.0
        lo = np.where(stuck & ~positive, mid, lo)
        hi = np.where(stuck & positive, mid, hi)
    E = np.where(stuck, 0.5 * (lo + hi), E)
    for _ in range(3):
        E = E - _kepler_residual(E, e, M) / (1.0 - e * np.cos(E))
    return E


def solve_kepler(mean_anomaly, eccentricity, tol: float = KEPLER_TOL):
    """Invert the Kepler equation E - e*sin E = M for the eccentric anomaly.

    Newton iteration from the starter ``E0 = M + e*sin M`` with a bisection
    fallback keeps the solver robust at high eccentricity.  The returned
    branch is continuous in M (no wrapping), so ``E(M + 2*pi) = E(M) + 2*pi``.
    Complex input is supported for complex-step differentiation: the real
    problem is solved first and polished with complex Newton steps.

    Args:
        mean_anomaly: Mean anomaly in radians (any real value; broadcasts).
        eccentricity: Eccentricity in [0, 1).
        tol: Residual tolerance on |E - e*sin E - M|.

    Returns:
        Eccentric anomaly with the same shape as the broadcast inputs.

    Raises:
        DomainError: If the eccentricity lies outside [0, 1).
    """
    M = np.asarray(mean_anomaly)
    e = np.asarray(eccentricity)
    e_real = np.real(e)
    if not (np.all(e_real >= 0.0) and np.all(e_real < 1.0)):
        raise DomainError(f"eccentricity must lie in [0, 1), got {eccentricity}")
    is_complex = np.iscomplexobj(M) or np.iscomplexobj(e)
    E = _solve_kepler_real(np.real(M) + 0.0, e_real + 0.0, tol)
    if is_complex:
        E = E.astype(complex) if isinstance(E, np.ndarray) else complex(E)
        for _ in range(4):
            E = E - _kepler_residual(E, e, M) / (1.0 - e * np.cos(E))
    return E


def _half_angle_factor(e):
    # beta = e / (1 + eta); |beta| < 1 for elliptic orbits.
    return e / (1.0 + np.sqrt((1.0 - e) * (1.0 + e)))


def true_from_eccentric(E, e):
    """True anomaly on the branch continuous in E (f - E stays in (-pi, pi))."""
    beta = _half_angle_factor(e)
    return E + 2.0 * np.arctan(beta * np.sin(E) / (1.0 - beta * np.cos(E)))


def eccentric_from_true(f, e):
    """Eccentric anomaly on the branch continuous in f."""
    beta = _half_angle_factor(e)
    return f - 2.0 * np.arctan(beta * np.sin(f) / (1.0 + beta * np.cos(f)))


def true_from_mean(M, e):
    """True anomaly from mean anomaly, continuous in M."""
    return true_from_eccentric(solve_kepler(M, e), e)


def mean_from_true(f, e):
    """Mean anomaly from true anomaly, continuous in f."""
    E = eccentric_from_true(f, e)
    return E - e * np.sin(E)


# ---------------------------------------------------------------------------
# Orbit geometry
# ---------------------------------------------------------------------------

def _geom(d: DelaunayState, params: ModelParams) -> SimpleNamespace:
    """All derived scalars of a Delaunay point, smooth and complex-safe.

    The true anomaly keeps the continuous branch, so phi = f - ell lands in
    (-pi, pi) without wrapping and angle fields stay differentiable.
    """
    mu = params.mu
    L, G, H = d.L, d.G, d.H
    a = L * L / mu
    eta = G / L
    e = np.sqrt((1.0 - eta) * (1.0 + eta))
    p = G * G / mu
    c = H / G
    s2 = (1.0 - c) * (1.0 + c)
    s = np.sqrt(s2)
    n = mu * mu / (L * L * L)
    f = true_from_mean(d.ell, e)
    kappa = e * np.cos(f)
    sigma = e * np.sin(f)
    r = p / (1.0 + kappa)
    return SimpleNamespace(
        mu=mu, ell=d.ell, g=d.g, h=d.h, L=L, G=G, H=H,
        a=a, eta=eta, e=e, p=p, c=c, s2=s2, s=s, n=n,
        f=f, phi=f - d.ell, kappa=kappa, sigma=sigma, r=r,
        Rdot=mu / G * sigma, theta=f + d.g,
    )


def geometry(d: DelaunayState, params: ModelParams) -> OrbitGeometry:
    """Derived orbit-geometry scalars of a Delaunay state.

    Args:
        d: Delaunay state satisfying its invariants.
        params: Model constants.

    Returns:
        OrbitGeometry with f wrapped to [0, 2*pi) and phi to (-pi, pi].
    """
    gm = _geom(d, params)
    return OrbitGeometry(a=gm.a, e=gm.e, eta=gm.eta, p=gm.p, s=gm.s, n=gm.n,
                         f=wrap_two_pi(gm.f), phi=wrap_pi(gm.phi),
                         kappa=gm.kappa, sigma=gm.sigma)


# ---------------------------------------------------------------------------
# Chart conversions
# ---------------------------------------------------------------------------

def delaunay_to_polar_nodal(d: DelaunayState, params: ModelParams) -> PolarNodalState:
    """Map a Delaunay state to polar-nodal variables.

    r follows from the conic equation with f = f(ell, e); theta = f + g,
    nu = h, Rdot = (mu/G) e sin f, Theta = G, N = H.  Angles are wrapped to
    [0, 2*pi); use :func:`_geom` directly for smooth unwrapped values.
    """
    gm = _geom(d, params)
    return PolarNodalState(r=gm.r, theta=wrap_two_pi(gm.theta), nu=wrap_two_pi(d.h),
                           Rdot=gm.Rdot, Theta=d.G, N=d.H)


def polar_nodal_to_delaunay(pn: PolarNodalState, params: ModelParams) -> DelaunayState:
    """Map a polar-nodal state to Delaunay variables (elliptic orbits only).

    Raises:
        DomainError: If the point is not on a bound elliptic orbit (e >= 1).
    """
    mu = params.mu
    pn.validate()
    p = pn.Theta * pn.Theta / mu
    kappa = p / pn.r - 1.0
    sigma = p * pn.Rdot / pn.Theta
    e = np.hypot(kappa, sigma)
    if not np.all(e < 1.0):
        raise DomainError(f"polar-nodal point is not elliptic (e = {e})")
    f = np.arctan2(sigma, kappa)
    eta = np.sqrt((1.0 - e) * (1.0 + e))
    return DelaunayState(
        ell=wrap_two_pi(mean_from_true(f, e)),
        g=wrap_two_pi(pn.theta - f),
        h=wrap_two_pi(pn.nu),
        L=pn.Theta / eta, G=pn.Theta, H=pn.N,
    )


def polar_nodal_to_cartesian(pn: PolarNodalState) -> CartesianState:
    """Rotate a polar-nodal state into Cartesian position/velocity.

    Composition node(nu) . inclination(I = acos(N/Theta)) . latitude(theta)
    applied to (r, 0, 0) and (Rdot, Theta/r, 0).
    """
    pn.validate()
    ci = pn.N / pn.Theta
    si = np.sqrt(np.maximum(0.0, (1.0 - ci) * (1.0 + ci)))
    cn, sn = np.cos(pn.nu), np.sin(pn.nu)
    ct, st = np.cos(pn.theta), np.sin(pn.theta)
    # Radial and transverse unit vectors of the orbital frame.
    u = np.stack(np.broadcast_arrays(cn * ct - sn * st * ci,
                                     sn * ct + cn * st * ci,
                                     st * si), axis=-1)
    w = np.stack(np.broadcast_arrays(-cn * st - sn * ct * ci,
                                     -sn * st + cn * ct * ci,
                                     ct * si), axis=-1)
    r = np.asarray(pn.r)[..., None]
    rdot = np.asarray(pn.Rdot)[..., None]
    tangential = (np.asarray(pn.Theta) / np.asarray(pn.r))[..., None]
    return CartesianState(position=r * u, velocity=rdot * u + tangential * w)


def cartesian_to_polar_nodal(c: CartesianState) -> PolarNodalState:
    """Invert :func:`polar_nodal_to_cartesian`.

    Raises:
        DegenerateGeometryError: If the inclination is within
            ``NODE_SINGULARITY_TOL`` of 0 or pi, where the node angle is
            ill-defined.
    """
    pos = np.asarray(c.position, dtype=float)
    vel = np.asarray(c.velocity, dtype=float)
    r = np.linalg.norm(pos, axis=-1)
    hvec = np.cross(pos, vel)
    big_theta = np.linalg.norm(hvec, axis=-1)
    if not np.all(r > 0.0) or not np.all(big_theta > 0.0):
        raise DomainError("degenerate Cartesian state (zero radius or angular momentum)")
    big_n = hvec[..., 2]
    si = np.hypot(hvec[..., 0], hvec[..., 1]) / big_theta
    if np.any(si < NODE_SINGULARITY_TOL):
        raise DegenerateGeometryError(
            "inclination within 1e-9 of 0 or pi: node angle undefined")
    nu = np.arctan2(hvec[..., 0], -hvec[..., 1])
    along_node = pos[..., 0] * np.cos(nu) + pos[..., 1] * np.sin(nu)
    theta = np.arctan2(pos[..., 2] / si, along_node)
    rdot = np.sum(pos * vel, axis=-1) / r
    return PolarNodalState(r=r, theta=wrap_two_pi(theta), nu=wrap_two_pi(nu),
                           Rdot=rdot, Theta=big_theta, N=big_n)


def delaunay_to_cartesian(d: DelaunayState, params: ModelParams) -> CartesianState:
    return polar_nodal_to_cartesian(delaunay_to_polar_nodal(d, params))


def cartesian_to_delaunay(c: CartesianState, params: ModelParams) -> DelaunayState:
    return polar_nodal_to_delaunay(cartesian_to_polar_nodal(c), params)


def keplerian_to_delaunay(a, e, i_deg, raan_deg, argp_deg, M_deg,
                          params: ModelParams) -> DelaunayState:
    """Build a Delaunay state from classical Keplerian elements (degrees)."""
    a = float(a)
    e = float(e)
    if a <= 0.0 or not 0.0 <= e < 1.0:
        raise DomainError(f"need a > 0 and 0 <= e < 1, got a={a}, e={e}")
    L = np.sqrt(params.mu * a)
    G = L * np.sqrt(1.0 - e * e)
    H = G * np.cos(np.radians(i_deg))
    return DelaunayState(ell=wrap_two_pi(np.radians(M_deg)),
                         g=wrap_two_pi(np.radians(argp_deg)),
                         h=wrap_two_pi(np.radians(raan_deg)),
                         L=L, G=G, H=H)


# ---------------------------------------------------------------------------
# State files
# ---------------------------------------------------------------------------

_STATE_KEYS = ("delaunay", "keplerian", "cartesian")


def parse_state(doc: dict, params: ModelParams) -> tuple[str, DelaunayState | CartesianState]:
    """Parse a state document with exactly one chart key.

    Accepted forms::

        {"delaunay":  {"ell": .., "g": .., "h": .., "L": .., "G": .., "H": ..}}
        {"keplerian": {"a": .., "e": .., "i_deg": .., "raan_deg": ..,
                       "argp_deg": .., "M_deg": ..}}
        {"cartesian": {"position": [x, y, z], "velocity": [vx, vy, vz]}}

    Returns:
        (chart_name, state); keplerian input is returned as a Delaunay state.
    """
    present = [k for k in _STATE_KEYS if k in doc]
    if len(present) != 1:
        raise ValueError(
            f"state document must contain exactly one of {_STATE_KEYS}, found {present}")
    chart = present[0]
    body = doc[chart]
    if not isinstance(body, dict):
        raise ValueError(f"'{chart}' entry must be an object, got {type(body).__name__}")

    def _pull(fields):
        missing = [f for f in fields if f not in body]
        if missing:
            raise ValueError(f"'{chart}' entry is missing fields {missing}")
        return [body[f] for f in fields]

    if chart == "delaunay":
        vals = [float(v) for v in _pull(["ell", "g", "h", "L", "G", "H"])]
        return chart, DelaunayState(*vals).validate()
    if chart == "keplerian":
        vals = _pull(["a", "e", "i_deg", "raan_deg", "argp_deg", "M_deg"])
        return chart, keplerian_to_delaunay(*vals, params=params).validate()
    position, velocity = _pull(["position", "velocity"])
    state = CartesianState(position=np.asarray(position, dtype=float),
                           velocity=np.asarray(velocity, dtype=float))
    if state.position.shape != (3,) or state.velocity.shape != (3,):
        raise ValueError("'cartesian' position and velocity must be 3-vectors")
    return chart, state.validate()


def load_state(path, params: ModelParams):
    """Load a state file from disk.  See :func:`parse_state` for the format."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_state(json.loads(text), params)

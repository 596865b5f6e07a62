"""Hyperbolic n-space as the upper unit hyperboloid in Minkowski R^{n+1}.

Coordinates carry the time component LAST: the bilinear form is
<y, z> = y_t z_t - y_s . z_s, i.e. J = diag(-1, ..., -1, +1), and the
manifold is {y : <y, y> = 1, y_t > 0}. Tangents at y are Minkowski
orthogonal to y and spacelike, so phi = sqrt(-<v, v>) is real and

    exp_point(y, v) = sinh(phi)/phi * v + cosh(phi) * y.

Unlike the sphere there is no conjugate-point singularity: the inverse
differential of the exponential *contracts* the normal component by
phi/sinh(phi) <= 1. Steps are still capped at phi = 30 because the ambient
coordinates grow like e^phi and the hyperboloid residual would drown in
round-off.
"""

from __future__ import annotations

import math

import numpy as np

from .core import (
    SpaceContract,
    StepRecord,
    cssi_step,
    dexpinv_coefficients,
    march,
)
from .errors import NonSpacelikeTangent, StepTooLarge
from .linalg import minkowski, minkowski_metric, spd_sqrt
from .tableau import ButcherTableau

PHI_SMALL = 1e-4
MAX_STAGE_RAPIDITY = 30.0


def base_point(n: int) -> np.ndarray:
    """The reference point (0, ..., 0, 1) on the upper sheet."""
    o = np.zeros(n + 1)
    o[-1] = 1.0
    return o


def _sinh_over_phi(phi: float) -> float:
    if phi < PHI_SMALL:
        p2 = phi * phi
        return 1.0 + p2 / 6.0 + p2 * p2 / 120.0
    return math.sinh(phi) / phi


def _phi_over_sinh(phi: float) -> float:
    if phi < PHI_SMALL:
        p2 = phi * phi
        return 1.0 - p2 / 6.0 + 7.0 * p2 * p2 / 360.0
    return phi / math.sinh(phi)


def _rapidity(v) -> float:
    """phi = sqrt(-<v, v>) of a spacelike tangent, with a guard on the sign."""
    m = minkowski(v, v)
    if -m < -1e-12 * float(v @ v):
        raise NonSpacelikeTangent(f"tangent has Minkowski square norm {m:.3e} > 0")
    return math.sqrt(max(-m, 0.0))


def exp_point(base, v):
    """Geodesic exponential along the hyperbola of v, arc length sqrt(-<v,v>)."""
    phi = _rapidity(v)
    if phi == 0.0:
        return base
    if phi > MAX_STAGE_RAPIDITY:
        raise StepTooLarge(f"stage rapidity {phi:.3f} > {MAX_STAGE_RAPIDITY}")
    return _sinh_over_phi(phi) * v + math.cosh(phi) * base


def exp_half(base, v):
    """Geodesic midpoint Exp(v/2) = sinh(phi/2)/phi * v + cosh(phi/2) * base."""
    phi = _rapidity(v)
    if phi == 0.0:
        return base
    if phi > MAX_STAGE_RAPIDITY:
        raise StepTooLarge(f"stage rapidity {phi:.3f} > {MAX_STAGE_RAPIDITY}")
    half = 0.5 * phi
    return (_sinh_over_phi(half) * 0.5) * v + math.cosh(half) * base


def transport_inv(mid, w):
    """Parallel transport of w back to the base: w - 2 s <s, w> at s = mid."""
    return w - (2.0 * minkowski(mid, w)) * mid


def dexpinv(theta, w):
    """Inverse differential of the exponential; contracts, never singular."""
    m = minkowski(theta, theta)
    phi2 = -m
    if phi2 <= 0.0:
        return w
    phi = math.sqrt(phi2)
    factor = _phi_over_sinh(phi) - 1.0
    # Minkowski projection normal to theta: w + <theta, w> theta / phi^2.
    return w + factor * (w + (minkowski(theta, w) / phi2) * theta)


def dexpinv_series(theta, w, coefficients):
    out = w
    power = w
    for cn in coefficients:
        power = triple(power, theta, theta)
        out = out + cn * power
    return out


def triple(u, v, w):
    """Triple bracket [u, v, w] = <u, w> v - <v, w> u (Minkowski products)."""
    return minkowski(u, w) * v - minkowski(v, w) * u


def sigma(s) -> np.ndarray:
    """Point reflection through s: the Minkowski isometry 2 s <s, .> - I."""
    n = s.shape[0]
    j = minkowski_metric(n)
    return 2.0 * np.outer(s, j @ s) - np.eye(n)


def quadratic(s) -> np.ndarray:
    """Displacement sigma_s sigma_o: slides the reference point along the
    geodesic through s to twice the distance of s.

    sigma_o is J itself, so the matrix is sigma(s) @ J; it equals the square
    of the Lorentz boost taking the reference point to s.
    """
    return sigma(s) @ minkowski_metric(s.shape[0])


def hat_matrix(base, v) -> np.ndarray:
    """Ambient generator of the geodesic flow of v: hat(v) @ base == v."""
    j = minkowski_metric(base.shape[0])
    return np.outer(v, j @ base) - np.outer(base, j @ v)


def lorentz_boost(spatial) -> np.ndarray:
    """Symmetric Lorentz boost with block form [[sqrt(I+ss^T), s], [s^T, s_t]].

    Maps the reference point to (s; sqrt(1+|s|^2)) on the upper sheet.
    """
    s = np.asarray(spatial, dtype=float)
    n = s.shape[0]
    out = np.empty((n + 1, n + 1))
    out[:n, :n] = spd_sqrt(np.eye(n) + np.outer(s, s))
    out[:n, n] = s
    out[n, :n] = s
    out[n, n] = math.sqrt(1.0 + float(s @ s))
    return out


def random_point(rng, n: int, scale: float = 1.0):
    """Random point: exponential of a random tangent at the reference point."""
    o = base_point(n)
    v = np.zeros(n + 1)
    v[:n] = rng.standard_normal(n)
    v *= scale / np.linalg.norm(v)
    return exp_point(o, v)


def random_tangent(rng, base, scale: float = 1.0):
    w = rng.standard_normal(base.shape[0])
    w = w - minkowski(w, base) * base
    phi = math.sqrt(-minkowski(w, w))
    return (scale / phi) * w


class HyperbolicSpace(SpaceContract):
    """Contract wiring of the hyperboloid operations for the generic stepper."""

    has_closed_dexpinv = True

    def exp_at(self, base, v):
        return exp_point(base, v)

    def exp_half_at(self, base, v, endpoint=None):
        return exp_half(base, v)

    def transport_inv_at(self, base, theta, mid, w):
        return transport_inv(mid, w)

    def dexpinv_at(self, base, theta, w):
        return dexpinv(theta, w)

    def triple(self, base, u, v, w):
        return triple(u, v, w)

    def project_tangent(self, base, w):
        return w - minkowski(w, base) * base

    def invariant_residual(self, y) -> float:
        return abs(minkowski(y, y) - 1.0)

    def renormalize(self, y):
        return y / math.sqrt(minkowski(y, y))

    def tangent_norm(self, base, v) -> float:
        return math.sqrt(max(-minkowski(v, v), 0.0))


HYPERBOLOID = HyperbolicSpace()


def chi_step(
    tableau: ButcherTableau,
    field,
    y,
    h: float,
    *,
    dexpinv_terms=None,
    diagnostics: bool = False,
):
    """Hand-specialized hyperboloid step for explicit tableaus.

    Mirrors `sphere.csi_step` with the Minkowski operations; implicit
    tableaus fall back to the generic machinery.
    """
    if not tableau.is_explicit:
        return cssi_step(
            HYPERBOLOID, tableau, field, y, h,
            dexpinv_terms=dexpinv_terms, diagnostics=diagnostics,
        )
    coeffs = None if dexpinv_terms is None else dexpinv_coefficients(int(dexpinv_terms))
    a, b, r = tableau.a, tableau.b, tableau.stages
    ktil = []
    stage_norms = []
    defect = 0.0

    def eval_field(p):
        nonlocal defect
        v = field(p)
        if diagnostics:
            vt = v - minkowski(v, p) * p
            defect = max(defect, float(np.max(np.abs(v - vt))))
            return vt
        return v

    for i in range(r):
        theta = np.zeros_like(y)
        for j in range(i):
            if a[i, j] != 0.0:
                theta = theta + a[i, j] * ktil[j]
        phi = math.sqrt(max(-minkowski(theta, theta), 0.0))
        stage_norms.append(phi)
        if phi == 0.0:
            ktil.append(h * eval_field(y))
            continue
        endpoint = exp_point(y, theta)
        mid = exp_half(y, theta)
        k = transport_inv(mid, h * eval_field(endpoint))
        if coeffs is None:
            ktil.append(dexpinv(theta, k))
        elif not coeffs:
            ktil.append(k)
        else:
            ktil.append(dexpinv_series(theta, k, coeffs))

    theta = np.zeros_like(y)
    for j in range(r):
        theta = theta + b[j] * ktil[j]
    y_next = exp_point(y, theta)
    record = StepRecord(
        index=-1,
        h=h,
        stage_norms=tuple(stage_norms),
        residual=abs(minkowski(y_next, y_next) - 1.0),
        tangency_defect=defect,
    )
    return y_next, record


def chi_integrate(
    tableau: ButcherTableau,
    field,
    y0,
    h: float,
    n_steps: int,
    *,
    dexpinv_terms=None,
    diagnostics: bool = False,
):
    """March the specialized hyperboloid step; renormalization as in core."""

    def step(y):
        return chi_step(
            tableau, field, y, h,
            dexpinv_terms=dexpinv_terms, diagnostics=diagnostics,
        )

    return march(step, HYPERBOLOID, y0, n_steps)

"""The unit n-sphere in R^{n+1} with closed-form geodesic operations.

Points are unit vectors y, tangents at y are vectors v with v.y = 0. With
phi = |v| the geodesic exponential is

    exp_point(y, v) = sin(phi)/phi * v + cos(phi) * y,

parallel transport back along a stage geodesic reflects through the chord
midpoint s = (E + y)/|E + y|, and the inverse differential of the
exponential stretches the component normal to the stage tangent by
phi/sin(phi). Stages must stay strictly below phi = pi, where that stretch
blows up; violating stages raise StepTooLarge.
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
from .errors import MidpointUndefined, StepTooLarge
from .tableau import ButcherTableau

PHI_SMALL = 1e-4
MAX_STAGE_ANGLE = math.pi - 1e-6
_MIDPOINT_EPS = 1e-8


def _sin_over_phi(phi: float) -> float:
    if phi < PHI_SMALL:
        p2 = phi * phi
        return 1.0 - p2 / 6.0 + p2 * p2 / 120.0
    return math.sin(phi) / phi


def _phi_over_sin(phi: float) -> float:
    if phi < PHI_SMALL:
        p2 = phi * phi
        return 1.0 + p2 / 6.0 + 7.0 * p2 * p2 / 360.0
    return phi / math.sin(phi)


def exp_point(base, v):
    """Geodesic exponential: walk the great circle of v for arc length |v|."""
    phi = math.sqrt(float(v @ v))
    if phi == 0.0:
        return base
    return _sin_over_phi(phi) * v + math.cos(phi) * base


def midpoint(base, endpoint):
    """Geodesic midpoint of base and endpoint by chord normalization."""
    chord = endpoint + base
    norm = math.sqrt(float(chord @ chord))
    if norm < _MIDPOINT_EPS:
        raise MidpointUndefined(
            "stage endpoint is numerically antipodal to the base point"
        )
    return chord / norm


def transport_inv(mid, w):
    """Parallel transport of w back to the base, via reflection at `mid`."""
    return w - (2.0 * float(mid @ w)) * mid


def dexpinv(theta, w):
    """Inverse differential of the exponential at stage tangent theta."""
    phi2 = float(theta @ theta)
    phi = math.sqrt(phi2)
    if phi == 0.0:
        return w
    if phi >= MAX_STAGE_ANGLE:
        raise StepTooLarge(f"stage angle {phi:.6f} >= pi; reduce the step size")
    factor = _phi_over_sin(phi) - 1.0
    return w + factor * (w - (float(theta @ w) / phi2) * theta)


def dexpinv_series(theta, w, coefficients):
    """Series form of `dexpinv`: w + sum c_n ad2^n(w), ad2 = [., theta, theta]."""
    out = w
    power = w
    for cn in coefficients:
        power = triple(power, theta, theta)
        out = out + cn * power
    return out


def triple(u, v, w):
    """Triple bracket [u, v, w] = (w.u) v - (v.w) u on a common tangent space."""
    return float(w @ u) * v - float(v @ w) * u


def sigma(x) -> np.ndarray:
    """Point reflection through x as an orthogonal matrix, 2 x x^T - I."""
    n = x.shape[0]
    return 2.0 * np.outer(x, x) - np.eye(n)


def hat_matrix(base, v) -> np.ndarray:
    """Ambient generator of the geodesic flow of v: hat(v) @ base == v."""
    return np.outer(v, base) - np.outer(base, v)


def random_point(rng, n: int):
    y = rng.standard_normal(n + 1)
    return y / np.linalg.norm(y)


def random_tangent(rng, base, scale: float = 1.0):
    v = rng.standard_normal(base.shape[0])
    v = v - float(base @ v) * base
    return scale * v / np.linalg.norm(v)


class SphereSpace(SpaceContract):
    """Contract wiring of the sphere operations for the generic stepper."""

    has_closed_dexpinv = True

    def exp_at(self, base, v):
        return exp_point(base, v)

    def exp_half_at(self, base, v, endpoint=None):
        if endpoint is None:
            endpoint = exp_point(base, v)
        return midpoint(base, endpoint)

    def transport_inv_at(self, base, theta, mid, w):
        return transport_inv(mid, w)

    def dexpinv_at(self, base, theta, w):
        return dexpinv(theta, w)

    def triple(self, base, u, v, w):
        return triple(u, v, w)

    def project_tangent(self, base, w):
        return w - float(base @ w) * base

    def invariant_residual(self, y) -> float:
        return abs(float(y @ y) - 1.0)

    def renormalize(self, y):
        return y / math.sqrt(float(y @ y))

    def tangent_norm(self, base, v) -> float:
        return math.sqrt(float(v @ v))


SPHERE = SphereSpace()


def csi_step(
    tableau: ButcherTableau,
    field,
    y,
    h: float,
    *,
    dexpinv_terms=None,
    diagnostics: bool = False,
):
    """Hand-specialized spherical step for explicit tableaus.

    Implicit tableaus fall back to the generic machinery with the sphere
    contract. `dexpinv_terms=None` uses the closed-form correction; an
    integer uses that many series terms instead (0 disables it).
    """
    if not tableau.is_explicit:
        return cssi_step(
            SPHERE, tableau, field, y, h,
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
            vt = v - float(p @ v) * p
            defect = max(defect, float(np.max(np.abs(v - vt))))
            return vt
        return v

    for i in range(r):
        theta = np.zeros_like(y)
        for j in range(i):
            if a[i, j] != 0.0:
                theta = theta + a[i, j] * ktil[j]
        phi = math.sqrt(float(theta @ theta))
        stage_norms.append(phi)
        if phi == 0.0:
            ktil.append(h * eval_field(y))
            continue
        if phi >= MAX_STAGE_ANGLE:
            raise StepTooLarge(f"stage angle {phi:.6f} >= pi; reduce the step size")
        endpoint = exp_point(y, theta)
        mid = midpoint(y, endpoint)
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
        residual=abs(float(y_next @ y_next) - 1.0),
        tangency_defect=defect,
    )
    return y_next, record


def csi_integrate(
    tableau: ButcherTableau,
    field,
    y0,
    h: float,
    n_steps: int,
    *,
    dexpinv_terms=None,
    diagnostics: bool = False,
):
    """March the specialized spherical step; renormalization as in core."""

    def step(y):
        return csi_step(
            tableau, field, y, h,
            dexpinv_terms=dexpinv_terms, diagnostics=diagnostics,
        )

    return march(step, SPHERE, y0, n_steps)

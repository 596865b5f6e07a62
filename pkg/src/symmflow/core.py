"""Generic Runge-Kutta stepping along geodesics of a symmetric space.

A step from y solves the stage equations

    theta_i = sum_j a_ij Kt_j
    K_i     = h * Gamma_{theta_i}^{-1} F(Exp_y(theta_i))
    Kt_i    = dExp^{-1}_{theta_i} K_i
    y_next  = Exp_y(sum_j b_j Kt_j)

where Exp_y is the geodesic exponential at the current point (the base point
is moved to y at every step), Gamma^{-1} is parallel transport back along the
stage geodesic (realized through the geodesic midpoint), and dExp^{-1} is the
inverse trivialized differential of Exp. The latter is the scalar series

    sqrt(x)/sinh(sqrt(x)) = 1 - x/6 + 7x^2/360 - 31x^3/15120 + ...

evaluated at x = ad^2_theta : w -> [w, theta, theta], the double bracket of
the tangent-space Lie triple system. Geometries with a closed form
(constant-curvature spaces) bypass the series.

Explicit tableaus are solved stage by stage; implicit ones by fixed-point
iteration on the stage tangents (tolerance 1e-14 on the max stage change,
cap 50 iterations).
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import numpy as np

from .errors import FixedPointDivergence, SymmflowError
from .tableau import ButcherTableau

RENORM_THRESHOLD = 1e-12
_FP_TOL = 1e-14
_FP_CAP = 50


class SpaceContract(ABC):
    """Operations a geometry supplies to the generic stepper.

    Points and tangents are plain ndarrays in the ambient representation
    (unit vectors, hyperboloid vectors, or SPD matrices); every operation
    takes the base point explicitly and treats its arguments as immutable.
    """

    #: geometries with a closed-form inverse differential set this True
    has_closed_dexpinv: bool = False

    @abstractmethod
    def exp_at(self, base, v):
        """Geodesic exponential at `base` applied to tangent v."""

    @abstractmethod
    def exp_half_at(self, base, v, endpoint=None):
        """Geodesic midpoint Exp_base(v/2); may reuse a precomputed endpoint."""

    @abstractmethod
    def transport_inv_at(self, base, theta, mid, w):
        """Parallel transport of w from Exp_base(theta) back to base.

        `mid` must be the precomputed geodesic midpoint Exp_base(theta/2).
        """

    @abstractmethod
    def dexpinv_at(self, base, theta, w):
        """Inverse trivialized differential of Exp applied to w."""

    @abstractmethod
    def triple(self, base, u, v, w):
        """Lie-triple-system bracket [u, v, w] on the tangent space at base."""

    @abstractmethod
    def project_tangent(self, base, w):
        """Orthogonal projection of an ambient vector onto the tangent space."""

    @abstractmethod
    def invariant_residual(self, y) -> float:
        """Distance of y from the manifold constraint (0 on the manifold)."""

    @abstractmethod
    def renormalize(self, y):
        """Cheap projection of a slightly drifted point back to the manifold."""

    def tangent_norm(self, base, v) -> float:
        """Stage magnitude used for records and guards (geometry's phi)."""
        return float(np.linalg.norm(np.asarray(v).ravel()))

    def ad2(self, base, theta, w):
        """Double bracket w -> [w, theta, theta] feeding the dExp^{-1} series."""
        return self.triple(base, w, theta, theta)


@lru_cache(maxsize=None)
def _bernoulli_even(count: int) -> tuple[Fraction, ...]:
    """B_0, B_2, ..., B_{2(count-1)} computed exactly by the defining recurrence."""
    m = 2 * (count - 1)
    b = [Fraction(0)] * (m + 1)
    b[0] = Fraction(1)
    for j in range(1, m + 1):
        acc = sum(comb(j + 1, k) * b[k] for k in range(j))
        b[j] = -acc / (j + 1)
    return tuple(b[2 * n] for n in range(count))


@lru_cache(maxsize=None)
def dexpinv_coefficients(terms: int) -> tuple[float, ...]:
    """Coefficients c_1..c_terms of sqrt(x)/sinh(sqrt(x)) = 1 + sum c_n x^n."""
    if terms < 0:
        raise ValueError("terms must be >= 0")
    even = _bernoulli_even(terms + 1)
    return tuple(
        float(Fraction(-(2 ** (2 * n) - 2), factorial(2 * n)) * even[n])
        for n in range(1, terms + 1)
    )


@dataclass(frozen=True)
class DexpinvSeries:
    """Truncated scalar series of the inverse trivialized differential."""

    truncation_terms: int
    coefficients: tuple[float, ...]

    @classmethod
    def with_terms(cls, terms: int) -> "DexpinvSeries":
        return cls(terms, dexpinv_coefficients(terms))

    @classmethod
    def for_order(cls, order: int) -> "DexpinvSeries":
        """Default truncation for a declared-order-p method: ceil((p-1)/2)."""
        return cls.with_terms(max(0, math.ceil((order - 1) / 2)))


def dexpinv_series_apply(series: DexpinvSeries, ad2, w):
    """Apply w + sum_n c_n ad2^n(w) for a linear map ad2 on the tangent space."""
    out = w
    power = w
    for cn in series.coefficients:
        power = ad2(power)
        out = out + cn * power
    return out


@dataclass
class StepRecord:
    """Per-step diagnostics emitted by the steppers."""

    index: int
    h: float
    stage_norms: tuple[float, ...]
    residual: float
    renormalized: bool = False
    step_rejected: bool = False
    fixed_point_iterations: int = 0
    tangency_defect: float = 0.0


def _resolve_series(space: SpaceContract, tableau: ButcherTableau, dexpinv_terms):
    if dexpinv_terms is None:
        if space.has_closed_dexpinv:
            return None
        return DexpinvSeries.for_order(tableau.declared_order)
    return DexpinvSeries.with_terms(int(dexpinv_terms))


def cssi_step(
    space: SpaceContract,
    tableau: ButcherTableau,
    field,
    y,
    h: float,
    *,
    dexpinv_terms=None,
    diagnostics: bool = False,
):
    """One Runge-Kutta step of y' = F(y) along geodesics of `space`.

    Returns (y_next, StepRecord). `dexpinv_terms=None` selects the geometry's
    closed-form correction when it has one, otherwise the series truncated to
    match the tableau order; an integer forces that many series terms (0
    disables the correction entirely).
    """
    a, b, r = tableau.a, tableau.b, tableau.stages
    series = _resolve_series(space, tableau, dexpinv_terms)
    stage_norms = [0.0] * r
    defect = 0.0

    def eval_field(p):
        nonlocal defect
        v = field(p)
        if diagnostics:
            vt = space.project_tangent(p, v)
            defect = max(defect, float(np.max(np.abs(np.asarray(v - vt)))))
            return vt
        return v

    def stage_value(i, theta):
        phi = space.tangent_norm(y, theta)
        stage_norms[i] = phi
        if phi == 0.0:
            return h * eval_field(y)
        endpoint = space.exp_at(y, theta)
        mid = space.exp_half_at(y, theta, endpoint=endpoint)
        k = space.transport_inv_at(y, theta, mid, h * eval_field(endpoint))
        if series is None:
            return space.dexpinv_at(y, theta, k)
        if series.truncation_terms == 0:
            return k
        return dexpinv_series_apply(
            series, lambda w: space.triple(y, w, theta, theta), k
        )

    fp_iterations = 0
    if tableau.is_explicit:
        ktil = []
        for i in range(r):
            theta = np.zeros_like(y)
            for j in range(i):
                if a[i, j] != 0.0:
                    theta = theta + a[i, j] * ktil[j]
            ktil.append(stage_value(i, theta))
    else:
        thetas = [np.zeros_like(y) for _ in range(r)]
        ktil = [stage_value(i, thetas[i]) for i in range(r)]
        converged = False
        for it in range(1, _FP_CAP + 1):
            fp_iterations = it
            new_thetas = []
            delta = 0.0
            for i in range(r):
                theta = np.zeros_like(y)
                for j in range(r):
                    if a[i, j] != 0.0:
                        theta = theta + a[i, j] * ktil[j]
                delta = max(delta, float(np.max(np.abs(theta - thetas[i]))))
                new_thetas.append(theta)
            thetas = new_thetas
            ktil = [stage_value(i, thetas[i]) for i in range(r)]
            if delta <= _FP_TOL:
                converged = True
                break
        if not converged:
            raise FixedPointDivergence(
                f"implicit stages did not converge in {_FP_CAP} iterations"
            )

    theta_out = np.zeros_like(y)
    for j in range(r):
        theta_out = theta_out + b[j] * ktil[j]
    y_next = space.exp_at(y, theta_out)

    record = StepRecord(
        index=-1,
        h=h,
        stage_norms=tuple(stage_norms),
        residual=space.invariant_residual(y_next),
        fixed_point_iterations=fp_iterations,
        tangency_defect=defect,
    )
    return y_next, record


def march(step_fn, space: SpaceContract, y0, n_steps: int):
    """Drive a single-step map n_steps times, renormalizing drifted points.

    Returns (trajectory, records) with n_steps + 1 points starting at y0.
    Points whose manifold residual exceeds 1e-12 are renormalized before
    being stored (the pre-renormalization residual stays in the record).
    Step errors are re-raised with `step_index` attached.
    """
    y = y0
    trajectory = [y0]
    records: list[StepRecord] = []
    for step in range(n_steps):
        try:
            y_next, record = step_fn(y)
        except SymmflowError as err:
            err.step_index = step
            raise
        record.index = step
        if record.residual > RENORM_THRESHOLD:
            y_next = space.renormalize(y_next)
            record.renormalized = True
        trajectory.append(y_next)
        records.append(record)
        y = y_next
    return trajectory, records


def integrate(
    space: SpaceContract,
    tableau: ButcherTableau,
    field,
    y0,
    h: float,
    n_steps: int,
    *,
    dexpinv_terms=None,
    diagnostics: bool = False,
):
    """March n_steps of cssi_step from y0; see `march` for the loop contract."""

    def step(y):
        return cssi_step(
            space,
            tableau,
            field,
            y,
            h,
            dexpinv_terms=dexpinv_terms,
            diagnostics=diagnostics,
        )

    return march(step, space, y0, n_steps)


def lts_axiom_residuals(triple, u, v, w, t, z):
    """Residuals of the three Lie-triple-system axioms for a bracket map.

    r1: alternating in the first two slots, [u, u, w] = 0.
    r2: cyclic sum [u,v,w] + [v,w,u] + [w,u,v] = 0.
    r3: the derivation property of [u,v,.] over a nested bracket.
    """

    def norm(x):
        return float(np.linalg.norm(np.asarray(x).ravel()))

    r1 = norm(triple(u, u, w))
    r2 = norm(triple(u, v, w) + triple(v, w, u) + triple(w, u, v))
    r3 = norm(
        triple(u, v, triple(z, t, w))
        - triple(triple(u, v, z), t, w)
        - triple(z, triple(u, v, t), w)
        - triple(z, t, triple(u, v, w))
    )
    return r1, r2, r3


def triple_bracket_oracle(hat, o, u, v, w):
    """Triple bracket computed through ambient matrix commutators.

    `hat` maps a tangent at o to the ambient matrix generating its geodesic
    flow (hat(v) @ o == v); the bracket is then [[hat u, hat v], hat w] @ o.
    Serves as an independent cross-check of the geometries' closed forms.
    """
    hu, hv, hw = hat(u), hat(v), hat(w)
    inner = hu @ hv - hv @ hu
    outer = inner @ hw - hw @ inner
    return outer @ o

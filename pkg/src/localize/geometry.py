"""Projector charts and the symplectic form on CP^N and the CQ^N unit ball.

The 2-form is ``omega = tr(P dP ^ dP)``.  Writing ``omega = dxi^dagger ^ G dxi``,
``G[a, b]`` is the coefficient of ``dxi*_a ^ dxi_b``.  Two independent routes
compute ``G``: the closed formulas in :func:`metric_analytic` and central
differences of the projector itself in :func:`metric_fd`.

Wirtinger derivatives are ``d/dxi = (d/dx - i d/dy)/2`` and
``d/dxi* = (d/dx + i d/dy)/2``.  For CQ^N the trace ``tr(Q dQ ^ dQ)`` comes out
as ``-dxi^dagger ^ G dxi``; the finite-difference route multiplies by -1 so
that ``G`` is positive definite for both kinds (``G = 1`` at the origin).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, KindMismatch, LocalizeError, OutOfChart, StepTooLarge
from .spectrum import ChartPoint, Kind, Spectrum

IDENTITY_ATOL = 1e-12
# metric_fd refuses CQ points this close to the boundary
FD_MAX_S = 0.99
H_RANGE = (1e-7, 1e-3)

_ORIENTATION = {Kind.CP: 1.0, Kind.CQ: -1.0}


@dataclass(frozen=True, eq=False)
class Projector:
    kind: Kind
    mat: np.ndarray

    @property
    def eta(self) -> np.ndarray:
        d = -np.ones(self.mat.shape[0])
        d[0] = 1.0
        return np.diag(d)

    def residuals(self) -> dict[str, float]:
        """Max-abs defects of ``P^2 = P``, the (eta-)Hermiticity condition and ``tr P = 1``."""
        P = self.mat
        if self.kind is Kind.CP:
            herm = P.conj().T
        else:
            herm = self.eta @ P.conj().T @ self.eta
        return {
            "idempotent": float(np.max(np.abs(P @ P - P))),
            "hermitian": float(np.max(np.abs(herm - P))),
            "trace": float(abs(np.trace(P) - 1.0)),
        }


@dataclass(frozen=True, eq=False)
class MetricCoefficients:
    g: np.ndarray
    spurious: float = 0.0

    @property
    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.g - self.g.conj().T)))

    def is_positive_definite(self) -> bool:
        return bool(np.all(np.linalg.eigvalsh(0.5 * (self.g + self.g.conj().T)) > 0))


def _check_chart(p: ChartPoint) -> None:
    if not p.in_chart:
        raise OutOfChart(f"CQ chart is the open unit ball; xi^dagger xi = {p.s:.6g} >= 1")


def _projector_matrix(kind: Kind, xi: np.ndarray) -> np.ndarray:
    s = np.vdot(xi, xi).real
    n = xi.size
    M = np.empty((n + 1, n + 1), dtype=complex)
    M[0, 0] = 1.0
    if kind is Kind.CP:
        M[0, 1:] = xi.conj()
        M[1:, 0] = xi
        M[1:, 1:] = np.outer(xi, xi.conj())
        return M / (1.0 + s)
    M[0, 1:] = -xi.conj()
    M[1:, 0] = xi
    M[1:, 1:] = -np.outer(xi, xi.conj())
    return M / (1.0 - s)


def projector_cp(p: ChartPoint) -> Projector:
    """``(1 + s)^-1 [[1, xi^dagger], [xi, xi xi^dagger]]`` on the first chart."""
    if p.kind is not Kind.CP:
        raise KindMismatch("projector_cp needs a CP chart point")
    return Projector(Kind.CP, _projector_matrix(Kind.CP, p.xi))


def projector_cq(p: ChartPoint) -> Projector:
    """``(1 - s)^-1 [[1, -xi^dagger], [xi, -xi xi^dagger]]`` on the unit ball."""
    if p.kind is not Kind.CQ:
        raise KindMismatch("projector_cq needs a CQ chart point")
    _check_chart(p)
    return Projector(Kind.CQ, _projector_matrix(Kind.CQ, p.xi))


def projector(p: ChartPoint) -> Projector:
    return projector_cp(p) if p.kind is Kind.CP else projector_cq(p)


def metric_analytic(p: ChartPoint) -> MetricCoefficients:
    """Closed-form coefficients.

    CP: ``(1+s)^-1 (1 - xi xi^dagger / (1+s))``;
    CQ: ``(1-s)^-1 (1 + xi xi^dagger / (1-s))``.
    """
    _check_chart(p)
    xi = p.xi
    s = p.s
    outer = np.outer(xi, xi.conj())
    eye = np.eye(p.n, dtype=complex)
    if p.kind is Kind.CP:
        g = (eye - outer / (1.0 + s)) / (1.0 + s)
    else:
        g = (eye + outer / (1.0 - s)) / (1.0 - s)
    return MetricCoefficients(g)


def _check_step(h: float) -> None:
    lo, hi = H_RANGE
    if not lo <= h <= hi:
        raise LocalizeError(f"step h={h:g} outside [{lo:g}, {hi:g}]")


def _wirtinger_fd(fn, xi: np.ndarray, h: float, stencil: int = 2) -> tuple[list, list]:
    """Central-difference Wirtinger derivatives of a matrix-valued ``fn(xi)``.

    ``stencil=2`` is the three-point rule (error O(h^2)), ``stencil=4`` the
    five-point rule (error O(h^4)).  Returns ``(d, dbar)`` lists indexed by
    coordinate.
    """
    if stencil not in (2, 4):
        raise LocalizeError("stencil must be 2 or 4")

    def partial(direction: np.ndarray, step: float):
        if stencil == 2:
            return (fn(xi + step * direction) - fn(xi - step * direction)) / (2 * step)
        return (
            8 * (fn(xi + step * direction) - fn(xi - step * direction))
            - (fn(xi + 2 * step * direction) - fn(xi - 2 * step * direction))
        ) / (12 * step)

    d, dbar = [], []
    for a in range(xi.size):
        e = np.zeros(xi.size, dtype=complex)
        e[a] = 1.0
        # representable steps: (x + h) - x
        hx = (xi[a].real + h) - xi[a].real
        hy = (xi[a].imag + h) - xi[a].imag
        dx = partial(e, hx)
        dy = partial(1j * e, hy)
        d.append(0.5 * (dx - 1j * dy))
        dbar.append(0.5 * (dx + 1j * dy))
    return d, dbar


def metric_fd(p: ChartPoint, h: float = 1e-5) -> MetricCoefficients:
    """Coefficients of ``tr(P dP ^ dP)`` from central differences of the projector.

    ``g[a, b] = tr(P (dbar_a P d_b P - d_b P dbar_a P))`` times the kind's
    orientation sign.  ``spurious`` is the largest (2,0) or (0,2) coefficient,
    which vanishes analytically.
    """
    _check_chart(p)
    _check_step(h)
    xi = p.xi
    if p.kind is Kind.CQ:
        if p.s > FD_MAX_S:
            raise StepTooLarge(f"s={p.s:.4f} > {FD_MAX_S}: finite differences too close to the boundary")
        reach = np.sqrt(p.s) + np.sqrt(2.0) * h
        if reach >= 1.0:
            raise StepTooLarge("perturbed point leaves the unit ball")

    P = _projector_matrix(p.kind, xi)
    d, dbar = _wirtinger_fd(lambda z: _projector_matrix(p.kind, z), xi, h)
    n = p.n
    g = np.empty((n, n), dtype=complex)
    spurious = 0.0
    for a in range(n):
        for b in range(n):
            g[a, b] = np.trace(P @ (dbar[a] @ d[b] - d[b] @ dbar[a]))
            if a < b:
                hol = np.trace(P @ (d[a] @ d[b] - d[b] @ d[a]))
                antihol = np.trace(P @ (dbar[a] @ dbar[b] - dbar[b] @ dbar[a]))
                spurious = max(spurious, abs(hol), abs(antihol))
    return MetricCoefficients(_ORIENTATION[p.kind] * g, float(spurious))


def fd_convergence_order(points, steps=(1e-3, 1e-4, 1e-5)) -> tuple[float, list[float]]:
    """Least-squares slope of ``log(max error)`` against ``log h`` over ``points``.

    Errors are aggregated (worst case over points) before fitting; a single
    point already sitting at roundoff would otherwise drag its own slope down.
    """
    worst = []
    for h in steps:
        worst.append(max(float(np.max(np.abs(metric_fd(p, h).g - metric_analytic(p).g))) for p in points))
    if min(worst) <= 0:
        return float("nan"), worst
    slope = np.polyfit(np.log(steps), np.log(worst), 1)[0]
    return float(slope), worst


def volume_density(p: ChartPoint) -> float:
    """``det G``, checked against ``(1 + s)^-(N+1)`` (CP) or ``(1 - s)^-(N+1)`` (CQ)."""
    _check_chart(p)
    det = np.linalg.det(metric_analytic(p).g)
    sign = 1.0 if p.kind is Kind.CP else -1.0
    closed = (1.0 + sign * p.s) ** -(p.n + 1)
    if abs(det.imag) > 1e-12 * abs(closed) or abs(det.real - closed) > 1e-12 * abs(closed):
        raise ConsistencyError(f"det G = {det} but closed-form density is {closed}")
    return float(det.real)


def kahler_closedness_residual(p: ChartPoint, h: float = 1e-4, stencil: int = 4) -> float:
    """``max |d_c G[a, b] - d_b G[a, c]|`` with holomorphic central differences.

    This is the (2,1) part of ``d omega``; the (1,2) part is its conjugate
    because ``G`` is Hermitian.  The five-point stencil is the default: near
    the CQ boundary the third derivatives of ``G`` grow like ``(1 - s)^-5``
    and the three-point rule cannot resolve the residual below 1e-5 there.
    """
    _check_chart(p)
    _check_step(h)
    if p.kind is Kind.CQ and np.sqrt(p.s) + 2 * np.sqrt(2.0) * h >= 1.0:
        raise StepTooLarge("perturbed point leaves the unit ball")
    d, _ = _wirtinger_fd(lambda z: metric_analytic(ChartPoint(p.kind, z)).g, p.xi, h, stencil)
    n = p.n
    worst = 0.0
    for a in range(n):
        for b in range(n):
            for c in range(n):
                worst = max(worst, abs(d[c][a, b] - d[b][a, c]))
    return float(worst)


def hamiltonian_trace(p: ChartPoint, s: Spectrum) -> float:
    """``tr(P h)`` with ``h = diag(theta)``, checked against its rational closed form.

    CP: ``(theta_0 + sum theta_a |xi_a|^2) / (1 + s)``;
    CQ: ``(theta_0 - sum theta_a |xi_a|^2) / (1 - s)``.
    """
    if p.kind is not s.kind:
        raise KindMismatch(f"chart point is {p.kind.value.upper()} but spectrum is {s.kind.value.upper()}")
    theta = s.values
    if theta.size != p.n + 1:
        raise LocalizeError(f"spectrum has {theta.size} levels but the chart point has N={p.n}")
    P = projector(p).mat
    traced = np.trace(P @ np.diag(theta)).real
    weights = np.abs(p.xi) ** 2
    if p.kind is Kind.CP:
        closed = (theta[0] + weights @ theta[1:]) / (1.0 + p.s)
    else:
        closed = (theta[0] - weights @ theta[1:]) / (1.0 - p.s)
    if abs(traced - closed) > 1e-12 * max(1.0, abs(closed)):
        raise ConsistencyError(f"tr(P h) = {traced} but closed form gives {closed}")
    return float(closed)


def random_chart_point(kind: Kind | str, n: int, gen: np.random.Generator, s_max: float = 0.9) -> ChartPoint:
    """Random point; CP coordinates are standard complex normals, CQ points are
    uniform in direction with ``s`` uniform on ``[0, s_max]``."""
    kind = Kind.parse(kind)
    z = gen.standard_normal(n) + 1j * gen.standard_normal(n)
    if kind is Kind.CP:
        return ChartPoint(kind, z)
    z /= np.linalg.norm(z)
    return ChartPoint(kind, z * np.sqrt(gen.uniform(0.0, s_max)))

"""Exact expressions for the classical and quantum partition functions.

Everything here is a finite formula: the fixed-point (DH) sum on CP^N, its
Vandermonde determinant form, the CQ^N product formula, the quantum trace
geometric product, and the two auxiliary identities used to derive them
(the partial-fraction identity over gap products and the Fourier series of
``exp(-i phi x)`` on the unit interval).
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    ConsistencyError,
    DegenerateSpectrum,
    DivergentRegime,
    KindMismatch,
    LocalizeError,
    SingularPhi,
)
from .spectrum import ConditioningWarning, Kind, Method, PartitionEstimate, QuantumParams, Spectrum, mu_vector

# two exact routes must agree to this relative level before a value is returned
_CROSSCHECK_RTOL = 1e-9
# sum |terms| / |Z| above this loses more than ~4 of the 16 available digits
CANCELLATION_LIMIT = 1e4


def _require(s: Spectrum, kind: Kind) -> None:
    if s.kind is not kind:
        raise KindMismatch(f"expected a {kind.value.upper()} spectrum, got {s.kind.value.upper()}")


def gap_products(theta: Sequence) -> list:
    """prod_{b != a} (theta_b - theta_a) for each a, in the input's number type."""
    out = []
    for a, ta in enumerate(theta):
        p = 1
        for b, tb in enumerate(theta):
            if b != a:
                p = p * (tb - ta)
        if p == 0:
            raise DegenerateSpectrum("coincident levels make a gap product vanish")
        out.append(p)
    return out


def z_cpn_dh(s: Spectrum) -> PartitionEstimate:
    """Fixed-point sum ``sum_a exp(-rho theta_a) / (rho^N prod_{b!=a}(theta_b - theta_a))``.

    Terms alternate in sign, so they are accumulated largest-first with
    ``math.fsum``.  Summation is exact, but each term carries a rounding error
    of its own; when ``rho`` times the level gaps is small the terms are far
    larger than ``Z`` and that error is amplified by ``sum |terms| / |Z|``.
    A :class:`ConditioningWarning` is emitted once this factor exceeds
    ``CANCELLATION_LIMIT``.
    """
    _require(s, Kind.CP)
    theta = [float(t) for t in s.theta]
    gaps = gap_products(theta)
    scale = s.rho ** s.n
    terms = [math.exp(-s.rho * t) / (scale * g) for t, g in zip(theta, gaps)]
    terms.sort(key=abs, reverse=True)
    value = math.fsum(terms)
    amplification = math.fsum(abs(x) for x in terms) / abs(value) if value else math.inf
    if amplification > CANCELLATION_LIMIT:
        warnings.warn(
            f"fixed-point terms cancel by a factor {amplification:.3g}; expect a relative error "
            f"near {amplification * np.finfo(float).eps:.1g}",
            ConditioningWarning,
            stacklevel=2,
        )
    return PartitionEstimate(value, Method.DH_SUM)


def _normalized_levels(theta: np.ndarray) -> tuple[np.ndarray, float]:
    centre = 0.5 * (theta.max() + theta.min())
    half = 0.5 * (theta.max() - theta.min())
    return (theta - centre) / half, half


def _det_ratio(first_row: np.ndarray, theta: np.ndarray) -> tuple[float, float]:
    """Sign and log of det[first_row; V_{0..N-1}] / det V_{0..N}.

    Power rows are built from centred, rescaled levels; the ratio picks up a
    factor ``half**-N`` which is returned folded into the log.
    """
    n = theta.size - 1
    t, half = _normalized_levels(theta)
    powers = np.vander(t, n + 1, increasing=True).T  # row k holds t**k
    num = np.vstack([first_row, powers[:n]])
    sign_n, log_n = np.linalg.slogdet(num)
    sign_d, log_d = np.linalg.slogdet(powers)
    if sign_d == 0:
        raise DegenerateSpectrum("Vandermonde denominator is singular")
    return sign_n * sign_d, log_n - log_d - n * math.log(half)


def z_cpn_det(s: Spectrum) -> PartitionEstimate:
    """Determinant form: ratio of the exponential-row determinant to the Vandermonde.

    The exponential row is rescaled by ``exp(rho * min theta)`` so it cannot
    underflow; the shift is restored in log space.
    """
    _require(s, Kind.CP)
    theta = s.values
    if np.unique(theta).size != theta.size:
        raise DegenerateSpectrum("Vandermonde denominator is singular")
    shift = theta.min()
    row = np.exp(-s.rho * (theta - shift))
    sign, logabs = _det_ratio(row, theta)
    value = sign * math.exp(logabs - s.rho * shift - s.n * math.log(s.rho)) if sign else 0.0
    return PartitionEstimate(value, Method.DET_FORM)


def z_cqn_det(s: Spectrum) -> PartitionEstimate:
    """CQ^N determinant form; only the first column of the exponential row survives."""
    _require(s, Kind.CQ)
    theta = s.values
    row = np.zeros_like(theta)
    row[0] = 1.0
    sign, logabs = _det_ratio(row, theta)
    value = (-1) ** s.n * sign * math.exp(logabs - s.rho * theta[0] - s.n * math.log(s.rho))
    return PartitionEstimate(value, Method.DET_FORM)


def z_cqn_closed(s: Spectrum) -> PartitionEstimate:
    """``exp(-rho theta_0) / prod_{a>=1} rho (theta_0 - theta_a)``, cross-checked
    against the determinant form before returning."""
    _require(s, Kind.CQ)
    theta = s.values
    denom = np.prod(s.rho * (theta[0] - theta[1:]))
    if denom <= 0:
        raise LocalizeError("CQ closed form needs theta_0 > theta_a for every a >= 1")
    value = math.exp(-s.rho * theta[0]) / denom
    det = z_cqn_det(s).value
    if not math.isclose(value, det, rel_tol=_CROSSCHECK_RTOL, abs_tol=0.0):
        raise ConsistencyError(f"CQ closed form {value!r} != determinant form {det!r}")
    return PartitionEstimate(value, Method.CLOSED)


def quantum_trace_closed(qp: QuantumParams) -> PartitionEstimate:
    """``exp(-i K c_{N+1} T) / prod_a (1 - exp(-i mu_a T))``.

    Only defined here when every ``|exp(-i mu_a T)| < 1``; real ``T`` is
    refused rather than regularized.
    """
    if not qp.convergent:
        raise DivergentRegime(
            f"|exp(-i mu T)| = {qp.ratios.tolist()} not all < 1 for T={qp.t}; "
            "need mu_a * Im(T) < 0 for every mode"
        )
    mu = mu_vector(qp)
    prefactor = cmath.exp(-1j * qp.k * qp.c[-1] * qp.t)
    denom = np.prod(1.0 - np.exp(-1j * mu * qp.t))
    return PartitionEstimate(complex(prefactor / denom), Method.CLOSED)


def vandermonde_identity_residual(theta: Sequence, exact: bool = False):
    """|LHS - RHS| of ``sum_{a>=1} 1/prod_{b!=a}(theta_b - theta_a) = -1/prod_{b>=1}(theta_b - theta_0)``.

    With ``exact=True`` the levels are converted to :class:`~fractions.Fraction`
    (floats exactly, via their binary value) and the residual is a Fraction:
    zero when the identity holds, otherwise a nonzero certificate.
    """
    if len(theta) < 2:
        raise LocalizeError("need at least two levels")
    levels = [Fraction(t) for t in theta] if exact else [float(t) for t in theta]
    gaps = gap_products(levels)
    rhs_den = 1
    for tb in levels[1:]:
        rhs_den = rhs_den * (tb - levels[0])
    if exact:
        lhs = sum((Fraction(1) / g for g in gaps[1:]), Fraction(0))
        return abs(lhs - (-Fraction(1) / rhs_den))
    lhs = math.fsum(1.0 / g for g in gaps[1:])
    return abs(lhs + 1.0 / rhs_den)


@dataclass(frozen=True)
class FourierSumCheck:
    partial: complex
    closed: complex
    residual: float
    alternate: complex
    # |closed - alternate|: the two closed forms are algebraically identical
    alternate_gap: float


def fourier_series_sum(phi: float, eps: float, m: int) -> FourierSumCheck:
    """Check ``sum_n e^{2 pi i n eps}/(2 pi n + phi) = i e^{-i phi eps}/(1 - e^{-i phi})``.

    The +n and -n terms are combined before accumulation.  The paired series
    still decays only like ``1/n`` for general ``eps`` (the odd part is a sine
    series) so the residual shrinks as ``O(1/m)``; at ``eps = 1/2`` the sine
    part vanishes and the decay is ``O(1/m^2)``.
    """
    if not 0.0 < eps < 1.0:
        raise LocalizeError(f"eps must lie in (0, 1), got {eps}")
    if m < 0:
        raise LocalizeError("cutoff m must be nonnegative")
    half_sin = math.sin(phi / 2.0)
    if half_sin == 0.0 or abs(half_sin) < 1e-15:
        raise SingularPhi(f"sin(phi/2) vanishes at phi={phi}")

    n = np.arange(1, m + 1, dtype=float)
    a = 2.0 * math.pi * n
    # e^{ia eps}/(phi + a) + e^{-ia eps}/(phi - a), combined over a common denominator
    pairs = (2.0 * phi * np.cos(a * eps) - 2j * a * np.sin(a * eps)) / (phi * phi - a * a)
    # smallest terms first keeps the tail from being swamped
    partial = 1.0 / phi + complex(np.sum(pairs[::-1]))

    closed = 1j * cmath.exp(-1j * phi * eps) / (1.0 - cmath.exp(-1j * phi))
    alternate = cmath.exp(1j * (0.5 - eps) * phi) / (2.0 * half_sin)
    return FourierSumCheck(partial, closed, abs(partial - closed), alternate, abs(closed - alternate))

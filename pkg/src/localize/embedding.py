"""Embedding of the CQ^N ball into projective Fock space, truncated.

A point ``xi`` of the unit ball maps to ``xi_hat = (xi, xi (x) xi, ..., xi^(x)n, ...)``.
Only levels ``1..n_max`` are stored; every quantity built from them is
reported next to its exact infinite-level value and a truncation bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetExhausted, ConsistencyError, KindMismatch, LocalizeError, OutOfChart
from .geometry import MetricCoefficients
from .spectrum import ChartPoint, Kind, Spectrum

# n_max * N**n_max must stay below this many stored amplitudes
DEFAULT_BUDGET = 1 << 25


@dataclass(frozen=True, eq=False)
class TruncatedEmbedding:
    base: ChartPoint
    n_max: int
    levels: tuple

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def dims(self) -> list[int]:
        return [lvl.size for lvl in self.levels]


def embed(p: ChartPoint, n_max: int, budget: int = DEFAULT_BUDGET) -> TruncatedEmbedding:
    """Materialize tensor powers ``xi^(x)n`` for ``n = 1..n_max`` (``kron`` order)."""
    if p.kind is not Kind.CQ:
        raise KindMismatch("the Fock-space embedding is defined for CQ points")
    if p.s >= 1.0:
        raise OutOfChart(f"xi^dagger xi = {p.s:.6g} >= 1")
    if n_max < 1:
        raise LocalizeError("n_max must be >= 1")
    if n_max * p.n ** n_max > budget:
        raise BudgetExhausted(f"n_max * N^n_max = {n_max * p.n ** n_max} exceeds budget {budget}")
    levels = [p.xi.copy()]
    for _ in range(n_max - 1):
        levels.append(np.kron(levels[-1], p.xi))
    for lvl in levels:
        lvl.flags.writeable = False
    return TruncatedEmbedding(p, n_max, tuple(levels))


@dataclass(frozen=True)
class NormCheck:
    truncated: float
    exact: float
    tail_bound: float


def embed_norm_residual(e: TruncatedEmbedding) -> NormCheck:
    """``sum_n |xi^(x)n|^2`` from the stored levels against ``s / (1 - s)``.

    The gap is exactly the geometric tail ``s^(n_max+1) / (1 - s)``.
    """
    s = e.base.s
    truncated = float(sum(np.vdot(lvl, lvl).real for lvl in e.levels))
    exact = s / (1.0 - s)
    tail = s ** (e.n_max + 1) / (1.0 - s)
    slack = 16 * np.finfo(float).eps * max(1.0, exact)
    if abs(exact - truncated) > tail + slack:
        raise ConsistencyError(f"norm truncation error {abs(exact - truncated):.3g} exceeds tail {tail:.3g}")
    return NormCheck(truncated, exact, tail)


@dataclass(frozen=True)
class EnergyCheck:
    truncated: float
    exact: float
    bound: float


def universal_energy(e: TruncatedEmbedding, s: Spectrum) -> EnergyCheck:
    """``tr(P_hat H_hat)`` on the truncated tower against ``(theta_0 - xi^dag theta xi)/(1 - s)``.

    Block ``n`` of ``H_hat`` is ``(n theta_0 - (n-1) theta_tilde) (x) 1^(n-2)`` and
    acts on level ``n-1``; blocks ``2..n_max`` are summed.  The prefactor
    ``(1 + xi_hat^dag xi_hat)^-1`` is taken at its exact value ``1 - s``.  Off-diagonal
    blocks of ``P_hat`` never enter the trace with a diagonal ``H_hat``.
    """
    if s.kind is not Kind.CQ:
        raise KindMismatch("universal energy needs a CQ spectrum")
    theta = s.values
    if theta.size != e.n + 1:
        raise LocalizeError(f"spectrum has {theta.size} levels but the embedding has N={e.n}")
    sq = e.base.s
    theta0, tilde = theta[0], theta[1:]

    total = theta0
    for n in range(2, e.n_max + 1):
        lvl = e.levels[n - 2]  # xi^(x)(n-1)
        amp = np.abs(lvl.reshape(e.n, -1)) ** 2  # first tensor factor on axis 0
        total += n * theta0 * amp.sum() - (n - 1) * (tilde @ amp.sum(axis=1))
    truncated = float((1.0 - sq) * total)

    exact = float((theta0 - (np.abs(e.base.xi) ** 2) @ tilde) / (1.0 - sq))
    c = (theta0 + tilde.max()) / (1.0 - sq)
    bound = c * e.n_max * sq ** (e.n_max - 1) if sq > 0 else 0.0
    slack = 64 * np.finfo(float).eps * max(1.0, abs(exact)) * e.n_max
    if abs(exact - truncated) > bound + slack:
        raise ConsistencyError(f"energy truncation error {abs(exact - truncated):.3g} exceeds bound {bound:.3g}")
    return EnergyCheck(truncated, exact, float(bound))


def _level_jacobian(xi: np.ndarray, n_max: int, beta: int) -> list[np.ndarray]:
    """``d xi^(x)n / d xi_beta`` for n = 1..n_max by the product rule.

    ``D_n = D_{n-1} (x) xi + xi^(x)(n-1) (x) e_beta``; memory stays O(N^n).
    """
    e_beta = np.zeros_like(xi)
    e_beta[beta] = 1.0
    out = [e_beta]
    power = xi
    for _ in range(n_max - 1):
        out.append(np.kron(out[-1], xi) + np.kron(power, e_beta))
        power = np.kron(power, xi)
    return out


def pullback_tail_bound(s: float, n_max: int) -> float:
    """Bound on ``|pullback - analytic|`` entrywise: ``(n_max + 3)^2 s^n_max / (1 - s)^2``.

    Collects the omitted tails of ``J^dag J`` (``sum_{n>M} n^2 s^(n-1)``),
    of ``|xi_hat|^2`` and of ``J^dag xi_hat``, each propagated through the
    ``(1+S)^-1`` factors at their exact values.
    """
    return (n_max + 3) ** 2 * s ** n_max / (1.0 - s) ** 2


def pullback_metric(e: TruncatedEmbedding) -> MetricCoefficients:
    """Pull the projective-Fock-space form back through ``xi -> xi_hat``.

    Ambient coefficients are the CP formula at ``xi_hat``,
    ``(1+S)^-1 (1 - xi_hat xi_hat^dag / (1+S))`` with ``S = |xi_hat|^2`` truncated;
    contracted with the holomorphic Jacobian ``J`` this is
    ``J^dag J / (1+S) - (J^dag xi_hat)(xi_hat^dag J) / (1+S)^2``.
    """
    n = e.n
    xi_hat = np.concatenate(e.levels)
    S = float(np.vdot(xi_hat, xi_hat).real)
    J = np.stack([np.concatenate(_level_jacobian(e.base.xi, e.n_max, b)) for b in range(n)], axis=1)
    JJ = J.conj().T @ J
    v = J.conj().T @ xi_hat
    g = JJ / (1.0 + S) - np.outer(v, v.conj()) / (1.0 + S) ** 2
    return MetricCoefficients(g)

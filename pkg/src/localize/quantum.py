"""Truncated Fock-space checks of the quantum trace and coherent-state structure.

The representation space is spanned by ``|n_1..n_N, K-1+sum n>``; the Hamiltonian
is diagonal there with eigenvalue ``sum mu_a n_a + K c_{N+1}``.  The trace
``tr exp(-i H T)`` is summed over occupations ``0..m_max`` per mode, which is
only meaningful while every ``|exp(-i mu_a T)| < 1``.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .closed_forms import quantum_trace_closed
from .errors import BudgetExhausted, ConsistencyError, DivergentRegime, InsufficientNodes, LocalizeError
from .spectrum import QuantumParams, mu_vector

DEFAULT_BUDGET = 1 << 22


@dataclass(frozen=True)
class FockTruncation:
    m_max: int
    modes: int
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.m_max < 0:
            raise LocalizeError("m_max must be >= 0")
        if self.modes < 1:
            raise LocalizeError("need at least one mode")
        if self.size > self.budget:
            raise BudgetExhausted(f"(m_max+1)^N = {self.size} exceeds budget {self.budget}")

    @property
    def size(self) -> int:
        return (self.m_max + 1) ** self.modes

    def occupations(self) -> np.ndarray:
        """All occupation tuples, shape ``(size, modes)``, lexicographic."""
        grid = np.indices((self.m_max + 1,) * self.modes).reshape(self.modes, -1)
        return grid.T


@dataclass(frozen=True)
class TraceCheck:
    value: complex
    tail_bound: float
    closed: complex
    # summation rounding allowance added to tail_bound in the consistency check
    slack: float = 0.0


def fock_trace_truncated(qp: QuantumParams, tr: FockTruncation) -> TraceCheck:
    """Sum ``exp(-i E T)`` over every truncated basis state.

    ``tail_bound`` is ``|e^{-iKcT}| prod_a (1-r_a)^-1 sum_a r_a^(m+1)/(1-r_a)``
    with ``r_a = |exp(-i mu_a T)|``.  The distance to the closed form must not
    exceed it (plus rounding in the summation).
    """
    if tr.modes != qp.n:
        raise LocalizeError(f"truncation has {tr.modes} modes but params have N={qp.n}")
    if not qp.convergent:
        raise DivergentRegime(f"|exp(-i mu T)| = {qp.ratios.tolist()} not all < 1 at T={qp.t}")
    mu = mu_vector(qp)
    phase = cmath.exp(-1j * qp.k * qp.c[-1] * qp.t)
    energies = tr.occupations() @ mu
    terms = np.exp(-1j * energies * qp.t)
    value = complex(phase * terms.sum())

    r = qp.ratios
    tail = abs(phase) * float(np.prod(1.0 / (1.0 - r))) * float(np.sum(r ** (tr.m_max + 1) / (1.0 - r)))
    closed = complex(quantum_trace_closed(qp).value)
    rounding = 64 * np.finfo(float).eps * abs(phase) * float(np.abs(terms).sum())
    if abs(value - closed) > tail + rounding:
        raise ConsistencyError(f"truncated trace misses closed form by {abs(value - closed):.3g} > tail {tail:.3g}")
    return TraceCheck(value, tail, closed, rounding)


def single_mode_traces(qp: QuantumParams, m_max: int) -> np.ndarray:
    """``sum_{m<=m_max} exp(-i mu_a T m)`` for each mode separately."""
    mu = mu_vector(qp)
    m = np.arange(m_max + 1)
    return np.exp(-1j * np.outer(mu, m) * qp.t).sum(axis=1)


@dataclass(frozen=True)
class Overlap:
    value: complex
    divergent: bool


def coherent_overlap(phi, phi2, m_max: int) -> Overlap:
    """Truncated ``<phi|phi'> = (2 pi)^-N prod_a sum_{m<=m_max} e^{i m (phi_a - phi'_a)}``.

    ``divergent`` is set when some angle difference is a multiple of 2 pi: that
    factor equals ``m_max + 1`` and grows without bound in the full space.
    """
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    phi2 = np.atleast_1d(np.asarray(phi2, dtype=float))
    if phi.shape != phi2.shape:
        raise LocalizeError("angle vectors must have the same length")
    delta = phi - phi2
    m = np.arange(m_max + 1)
    factors = np.exp(1j * np.outer(delta, m)).sum(axis=1)
    value = complex(np.prod(factors)) / (2 * math.pi) ** phi.size
    wrapped = np.abs(np.angle(np.exp(1j * delta)))
    return Overlap(value, bool(np.any(wrapped == 0.0)))


def resolution_of_unity_residual(n: int, m_max: int, q: int, budget: int = DEFAULT_BUDGET) -> float:
    """Max deviation from the identity of ``int d^N phi |phi><phi|`` on the truncated space.

    The angle integral is the equispaced product rule with ``q`` nodes per
    angle, exact for trigonometric polynomials of degree below ``q``.
    """
    if q <= 2 * m_max:
        raise InsufficientNodes(f"q={q} must exceed 2*m_max={2 * m_max}")
    if n < 1:
        raise LocalizeError("need at least one angle")
    dim = (m_max + 1) ** n
    if q ** n * dim > budget:
        raise BudgetExhausted(f"q^N (m_max+1)^N = {q ** n * dim} exceeds budget {budget}")
    nodes = 2 * math.pi * np.arange(q) / q
    occ = FockTruncation(m_max, n).occupations()
    acc = np.zeros((dim, dim), dtype=complex)
    # one row block per node tuple: |phi> components (2 pi)^{-N/2} e^{-i m.phi}
    for chunk in _node_chunks(nodes, n, max(1, budget // (4 * dim))):
        kets = np.exp(-1j * chunk @ occ.T) / (2 * math.pi) ** (n / 2)
        acc += kets.T @ kets.conj()
    acc *= (2 * math.pi / q) ** n
    return float(np.max(np.abs(acc - np.eye(dim))))


def _node_chunks(nodes: np.ndarray, n: int, size: int):
    it = itertools.product(nodes, repeat=n)
    while True:
        block = list(itertools.islice(it, size))
        if not block:
            return
        yield np.asarray(block)


def poisson_resum_residual(sigma: float, phi: float, n_images: int, m_cut: int) -> float:
    """``|sum_{|m|<=m_cut} e^{i m phi} f(m) - sum_{|n|<=n_images} f_hat(phi + 2 pi n)|``.

    ``f(p) = exp(-p^2 / 2 sigma^2)`` and ``f_hat(x) = sqrt(2 pi) sigma exp(-sigma^2 x^2 / 2)``,
    so both truncated sides converge at Gaussian rates.
    """
    if not sigma > 0:
        raise LocalizeError("sigma must be positive")
    if n_images < 1 or m_cut < 1:
        raise LocalizeError("n_images and m_cut must be >= 1")
    m = np.arange(-m_cut, m_cut + 1)
    lhs = np.sum(np.exp(1j * m * phi - m.astype(float) ** 2 / (2 * sigma ** 2)))
    k = np.arange(-n_images, n_images + 1)
    x = phi + 2 * math.pi * k
    rhs = math.sqrt(2 * math.pi) * sigma * np.sum(np.exp(-(sigma ** 2) * x ** 2 / 2))
    return float(abs(lhs - rhs))


def poisson_tail_bounds(sigma: float, phi: float, n_images: int, m_cut: int) -> tuple[float, float]:
    """Upper bounds on the discarded terms of each side (first omitted term times a geometric factor)."""
    first_m = math.exp(-((m_cut + 1) ** 2) / (2 * sigma ** 2))
    ratio_m = math.exp(-(2 * m_cut + 3) / (2 * sigma ** 2))
    lhs_tail = 2 * first_m / (1 - ratio_m) if ratio_m < 1 else math.inf
    dist = 2 * math.pi * (n_images + 1) - abs(phi)
    first_n = math.sqrt(2 * math.pi) * sigma * math.exp(-(sigma ** 2) * dist ** 2 / 2)
    ratio_n = math.exp(-(sigma ** 2) * 2 * math.pi * dist)
    rhs_tail = 2 * first_n / (1 - ratio_n) if ratio_n < 1 else math.inf
    return lhs_tail, rhs_tail

"""Numerical oracles for the classical partition functions.

Each routine integrates one of the integral representations of Z
directly, without using the closed forms it is meant to check:

* CP^N orthant integral in the ``u`` variables (tensor Gauss-Legendre),
* CP^N sphere average of ``exp(-rho z^dagger h z)`` (Monte-Carlo),
* CQ^N simplex integral after the ``x = u / (1 - sum u)`` substitution
  (tensor Gauss-Laguerre),
* CQ^N exponential-proposal importance sampling,
* the Lagrange-multiplier integral over real lambda (oscillatory quadrature),
  next to its residue sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate
from scipy.special import roots_laguerre

from . import rng
from .closed_forms import gap_products
from .errors import BudgetExhausted, ConsistencyError, KindMismatch, LocalizeError, TailDominates, WeightOverflow
from .spectrum import Kind, Method, PartitionEstimate, Spectrum

QUAD_ORDERS = (8, 16, 32, 64)
MAX_QUAD_DIM = 6
# reported quadrature err never drops below this many ulps of the value
_ROUNDOFF_ULPS = 1000
_CHUNK = 1 << 18


@dataclass(frozen=True)
class IntegratorConfig:
    tol: float = 1e-10
    max_evals: int = 20_000_000
    seed: int = 0
    lambda_cutoff: float = 1e4

    def __post_init__(self):
        if not self.tol > 0:
            raise LocalizeError("tol must be positive")
        if not self.max_evals > 0:
            raise LocalizeError("max_evals must be positive")
        if not self.lambda_cutoff > 0:
            raise LocalizeError("lambda_cutoff must be positive")


def _require(s: Spectrum, kind: Kind) -> None:
    if s.kind is not kind:
        raise KindMismatch(f"expected a {kind.value.upper()} spectrum, got {s.kind.value.upper()}")


def _roundoff_floor(value: float) -> float:
    return _ROUNDOFF_ULPS * np.finfo(float).eps * abs(value)


def _tensor_sum(nodes: np.ndarray, weights: np.ndarray, dim: int, fn) -> float:
    """sum over the tensor grid of prod(weights) * fn(points), evaluated in chunks.

    ``fn`` receives an ``(M, dim)`` array of points.
    """
    order = nodes.size
    total = order ** dim
    partials = []
    for start in range(0, total, _CHUNK):
        idx = np.unravel_index(np.arange(start, min(start + _CHUNK, total)), (order,) * dim)
        pts = np.stack([nodes[i] for i in idx], axis=-1)
        w = np.prod(np.stack([weights[i] for i in idx], axis=-1), axis=-1)
        partials.append(np.dot(w, fn(pts)))
    return math.fsum(partials)


def _refine(evaluate, dim: int, cfg: IntegratorConfig) -> tuple[float, float, int]:
    """Raise the per-axis order until successive results agree to ``cfg.tol`` (relative)."""
    prev = None
    used = 0
    for order in QUAD_ORDERS:
        cost = order ** dim
        if used + cost > cfg.max_evals:
            break
        value = evaluate(order)
        used += cost
        if prev is not None:
            delta = abs(value - prev)
            if delta <= cfg.tol * abs(value):
                return value, max(delta, _roundoff_floor(value)), used
        prev = value
    raise BudgetExhausted(
        f"quadrature did not reach tol={cfg.tol:g} within {used} evaluations "
        f"(orders {QUAD_ORDERS}, max_evals={cfg.max_evals})"
    )


def cpn_orthant_integrand(u: np.ndarray, theta, rho: float) -> np.ndarray:
    """``(1 + sum u)^-(N+1) exp[-rho (theta_0 + sum theta_a u_a) / (1 + sum u)]`` for rows of ``u``."""
    theta = np.asarray(theta, dtype=float)
    u = np.atleast_2d(u)
    n = u.shape[-1]
    S = 1.0 + u.sum(axis=-1)
    energy = (theta[0] + u @ theta[1:]) / S
    return S ** -(n + 1) * np.exp(-rho * energy)


def _collapsed_orthant(t: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Map the unit cube onto the positive orthant through the simplex.

    Collapsed coordinates ``w_1 = t_1, w_k = t_k prod_{j<k}(1 - t_j)`` fill the
    simplex; ``u = w / (1 - sum w)`` then fills the orthant.  Returns
    ``(u, jac, rem)`` with ``rem = 1 - sum w``; the full Jacobian is
    ``jac * rem^-(N+1)``, left split so the caller can cancel the large factor.
    """
    n = t.shape[-1]
    rem = np.ones(t.shape[:-1])
    jac = np.ones(t.shape[:-1])
    w = np.empty_like(t)
    for k in range(n):
        w[..., k] = rem * t[..., k]
        jac *= rem
        rem = rem * (1.0 - t[..., k])
    return w / rem[..., None], jac, rem


def cpn_orthant_quadrature(theta, rho: float, cfg: IntegratorConfig) -> tuple[float, float, int]:
    """Integrate :func:`cpn_orthant_integrand` over the positive orthant.

    Works on raw levels (no validation) so degenerate test inputs can be fed.
    Returns ``(value, err, evaluations)``.
    """
    theta = np.asarray(theta, dtype=float)
    n = theta.size - 1
    if not 1 <= n <= MAX_QUAD_DIM:
        raise LocalizeError(f"tensor quadrature supports 1 <= N <= {MAX_QUAD_DIM}, got N={n}")

    def integrand(t):
        u, jac, rem = _collapsed_orthant(t)
        S = 1.0 + u.sum(axis=-1)
        energy = (theta[0] + u @ theta[1:]) / S
        # (rem * S)^-(N+1) == rem^-(N+1) * S^-(N+1); rem * S is O(1)
        return jac * (rem * S) ** -(n + 1) * np.exp(-rho * energy)

    def evaluate(order):
        x, w = leggauss(order)
        return _tensor_sum(0.5 * (x + 1.0), 0.5 * w, n, integrand)

    return _refine(evaluate, n, cfg)


def z_cpn_quadrature(s: Spectrum, cfg: IntegratorConfig | None = None) -> PartitionEstimate:
    """Tensor Gauss-Legendre on the CP^N orthant integral, orders 8 -> 64 per axis.

    ``err`` is the last successive-order difference, floored at rounding level.
    """
    _require(s, Kind.CP)
    cfg = cfg or IntegratorConfig()
    value, err, _ = cpn_orthant_quadrature(s.values, s.rho, cfg)
    return PartitionEstimate(value, Method.QUADRATURE, err)


def _sphere_moments(theta: np.ndarray, rho: float):
    def shard(gen: np.random.Generator, size: int) -> tuple[float, float]:
        g = gen.standard_normal((size, theta.size, 2))
        mod2 = g[..., 0] ** 2 + g[..., 1] ** 2
        energy = (mod2 @ theta) / mod2.sum(axis=-1)
        f = np.exp(-rho * energy)
        return float(f.sum()), float(np.dot(f, f))

    return shard


def _mean_and_stderr(moments: list[tuple[float, float]], samples: int) -> tuple[float, float]:
    total = math.fsum(m[0] for m in moments)
    total_sq = math.fsum(m[1] for m in moments)
    mean = total / samples
    if samples < 2:
        return mean, 0.0
    var = max(0.0, (total_sq - samples * mean * mean) / (samples - 1))
    return mean, math.sqrt(var / samples)


def z_cpn_montecarlo(s: Spectrum, cfg: IntegratorConfig | None = None, samples: int = 1_000_000) -> PartitionEstimate:
    """Average ``exp(-rho z^dagger h z)`` over the unit sphere in C^{N+1}, times 1/N!.

    Points are normalized complex Gaussians.  Deterministic in
    ``(theta, rho, cfg.seed, samples)`` regardless of thread count.
    """
    _require(s, Kind.CP)
    cfg = cfg or IntegratorConfig()
    if samples < 1:
        raise LocalizeError("samples must be >= 1")
    moments = rng.map_shards(_sphere_moments(s.values, s.rho), cfg.seed, samples)
    mean, stderr = _mean_and_stderr(moments, samples)
    vol = 1.0 / math.factorial(s.n)
    return PartitionEstimate(mean * vol, Method.MONTECARLO, stderr * vol, samples)


def cqn_simplex_integrand(x: np.ndarray, theta, rho: float) -> np.ndarray:
    """CQ^N ``u``-simplex integrand pulled back to ``x``, Jacobian included.

    ``u = x / (1 + sum x)`` is formed explicitly and the original integrand
    ``(1 - sum u)^-(N+1) exp[-rho (theta_0 - sum theta_a u_a)/(1 - sum u)]``
    is evaluated at it.
    """
    theta = np.asarray(theta, dtype=float)
    x = np.atleast_2d(x)
    n = x.shape[-1]
    X = 1.0 + x.sum(axis=-1)
    u = x / X[:, None]
    one_minus = 1.0 - u.sum(axis=-1)
    energy = (theta[0] - u @ theta[1:]) / one_minus
    return one_minus ** -(n + 1) * np.exp(-rho * energy) * X ** -(n + 1)


def z_cqn_quadrature(s: Spectrum, cfg: IntegratorConfig | None = None) -> PartitionEstimate:
    """Tensor Gauss-Laguerre over ``x in (0, inf)^N``.

    Axis ``a`` is scaled by its decay rate ``rho (theta_0 - theta_a)`` so the
    Laguerre weight ``e^{-y}`` matches the integrand's envelope.
    """
    _require(s, Kind.CQ)
    cfg = cfg or IntegratorConfig()
    theta = s.values
    n = s.n
    if n > MAX_QUAD_DIM:
        raise LocalizeError(f"tensor quadrature supports N <= {MAX_QUAD_DIM}, got N={n}")
    rates = s.rho * (theta[0] - theta[1:])
    if np.any(rates <= 0):
        raise LocalizeError("CQ quadrature needs theta_0 > theta_a for every a >= 1")

    def evaluate(order):
        y, w = roots_laguerre(order)
        # undo the e^{-y} weight; log-space keeps e^{y} finite for large orders
        w = np.exp(np.log(w) + y)

        def integrand(pts):
            x = pts / rates
            return cqn_simplex_integrand(x, theta, s.rho) / np.prod(rates)

        return _tensor_sum(y, w, n, integrand)

    value, err, _ = _refine(evaluate, n, cfg)
    return PartitionEstimate(value, Method.QUADRATURE, err)


def z_cqn_exponential_mc(s: Spectrum, cfg: IntegratorConfig | None = None, samples: int = 100_000) -> PartitionEstimate:
    """Importance sampling of ``int_{x>0} exp(-rho sum (theta_0 - theta_a) x_a) dx``.

    Proposal: independent unit-rate exponentials, weights
    ``exp(sum (1 - rate_a) x_a)``.  The weight variance is finite only when
    every rate exceeds 1/2; otherwise :class:`WeightOverflow` is raised.
    """
    _require(s, Kind.CQ)
    cfg = cfg or IntegratorConfig()
    if samples < 1:
        raise LocalizeError("samples must be >= 1")
    theta = s.values
    rates = s.rho * (theta[0] - theta[1:])
    if np.any(rates <= 0.5):
        raise WeightOverflow(
            f"rates rho*(theta_0 - theta_a) = {rates.tolist()} must exceed 1/2 for finite "
            "weight variance under the unit-rate proposal; use z_cqn_quadrature instead"
        )

    def shard(gen: np.random.Generator, size: int) -> tuple[float, float]:
        x = gen.standard_exponential((size, rates.size))
        f = np.exp(x @ (1.0 - rates))
        return float(f.sum()), float(np.dot(f, f))

    moments = rng.map_shards(shard, cfg.seed, samples)
    mean, stderr = _mean_and_stderr(moments, samples)
    scale = math.exp(-s.rho * theta[0])
    return PartitionEstimate(mean * scale, Method.MONTECARLO, stderr * scale, samples)


def z_cpn_residue(s: Spectrum) -> PartitionEstimate:
    """Residue sum of the lambda integrand: ``sum_a e^{-rho theta_a} prod_{b!=a} 1/(rho (theta_b - theta_a))``."""
    _require(s, Kind.CP)
    theta = [s.rho * float(t) for t in s.theta]
    gaps = gap_products(theta)
    terms = sorted((math.exp(-t) / g for t, g in zip(theta, gaps)), key=abs, reverse=True)
    return PartitionEstimate(math.fsum(terms), Method.RESIDUE)


def contour_tail_bound(n: int, cutoff: float) -> float:
    """Bound on the discarded ``|lambda| > cutoff`` part, ``cutoff^-N / (pi N)``.

    Uses ``|rho theta + i lambda| >= |lambda|`` on both half-lines.
    """
    return cutoff ** -n / (math.pi * n)


def z_cpn_contour(s: Spectrum, cfg: IntegratorConfig | None = None) -> PartitionEstimate:
    """``(1/2pi) int_{-L}^{L} e^{i lambda} prod_a (rho theta_a + i lambda)^-1 d lambda``.

    The integrand at ``-lambda`` is the conjugate of that at ``lambda`` so
    the integral is ``(1/pi) Re int_0^L``.  Both Fourier pieces go to
    QUADPACK's adaptive oscillatory rule on geometrically growing panels.
    ``err`` is the quadrature error plus the analytic tail bound; the result
    must match :func:`z_cpn_residue` within it.
    """
    _require(s, Kind.CP)
    cfg = cfg or IntegratorConfig()
    a = s.rho * s.values
    cutoff = cfg.lambda_cutoff
    residue = z_cpn_residue(s).value
    tail = contour_tail_bound(s.n, cutoff)
    if tail > cfg.tol * abs(residue):
        raise TailDominates(
            f"tail bound {tail:.3g} at lambda_cutoff={cutoff:g} exceeds tol={cfg.tol:g} relative; "
            "raise lambda_cutoff or loosen tol"
        )

    def F(lam):
        return 1.0 / np.prod(a + 1j * lam)

    # geometric panels: one QAWO call over [0, cutoff] can step over the peak near 0
    edges = [0.0]
    edge = max(1.0, float(np.max(np.abs(a))))
    while edge < cutoff:
        edges.append(edge)
        edge *= 4.0
    edges.append(cutoff)
    re_part = im_part = re_err = im_err = 0.0
    for lo, hi in zip(edges, edges[1:]):
        opts = dict(a=lo, b=hi, wvar=1.0, limit=2000, epsabs=1e-16, epsrel=1e-12)
        r, re = integrate.quad(lambda l: F(l).real, weight="cos", **opts)
        i, ie = integrate.quad(lambda l: F(l).imag, weight="sin", **opts)
        re_part, im_part, re_err, im_err = re_part + r, im_part + i, re_err + re, im_err + ie
    value = (re_part - im_part) / math.pi
    err = (re_err + im_err) / math.pi + tail + _roundoff_floor(value)
    if abs(value - residue) > err:
        raise ConsistencyError(f"contour value {value!r} differs from residue sum {residue!r} by more than {err:.3g}")
    return PartitionEstimate(value, Method.CONTOUR, err)

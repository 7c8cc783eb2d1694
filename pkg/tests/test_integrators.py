import math

import numpy as np
import pytest

from localize import integrators as integ
from localize.closed_forms import z_cpn_dh, z_cqn_closed
from localize.errors import BudgetExhausted, KindMismatch, LocalizeError, TailDominates, WeightOverflow
from localize.spectrum import Kind, Method, Spectrum, validate_spectrum


def cp(theta, rho=1.0):
    return validate_spectrum("cp", theta, rho)


def cq(theta, rho=1.0):
    return validate_spectrum("cq", theta, rho)


def test_config_validation():
    for bad in (dict(tol=0), dict(max_evals=0), dict(lambda_cutoff=-1.0)):
        with pytest.raises(LocalizeError):
            integ.IntegratorConfig(**bad)


@pytest.mark.parametrize("theta, rtol", [([1, 2], 1e-8), ([1, 2, 3], 1e-6)])
def test_cp_quadrature_examples(theta, rtol):
    s = cp(theta)
    q = integ.z_cpn_quadrature(s)
    dh = z_cpn_dh(s).value
    assert q.method is Method.QUADRATURE
    assert q.value == pytest.approx(dh, rel=rtol)
    assert abs(q.value - dh) <= q.err


def test_cp_equal_levels_integrand_gives_volume():
    # unvalidated equal levels: integrand collapses to e^{-rho c} (1+sum u)^-(N+1)
    c, rho = 1.5, 0.8
    for n in (1, 2, 3):
        value, err, _ = integ.cpn_orthant_quadrature([c] * (n + 1), rho, integ.IntegratorConfig())
        assert value == pytest.approx(math.exp(-rho * c) / math.factorial(n), rel=1e-12)


def test_cp_quadrature_budget():
    with pytest.raises(BudgetExhausted):
        integ.z_cpn_quadrature(cp([1, 2, 3]), integ.IntegratorConfig(max_evals=100))


def test_cp_quadrature_dimension_cap():
    with pytest.raises(LocalizeError):
        integ.z_cpn_quadrature(cp(list(range(1, 9))))


def test_cp_montecarlo_example():
    s = cp([1, 2])
    mc = integ.z_cpn_montecarlo(s, integ.IntegratorConfig(seed=3), samples=1_000_000)
    assert abs(mc.value - z_cpn_dh(s).value) <= 3 * mc.err
    assert mc.samples == 1_000_000


def test_cp_montecarlo_zero_rho_integrand():
    # rho = 0 is rejected by validation; the raw spectrum exercises the integrand
    s = Spectrum(Kind.CP, (1.0, 2.0, 3.0), 0.0)
    mc = integ.z_cpn_montecarlo(s, samples=10_000)
    assert mc.value == 0.5
    assert mc.err == 0.0


def test_montecarlo_is_bit_reproducible(monkeypatch):
    s = cp([1, 2, 3])
    cfg = integ.IntegratorConfig(seed=11)
    a = integ.z_cpn_montecarlo(s, cfg, samples=300_000)
    monkeypatch.setenv("LOCALIZE_THREADS", "1")
    b = integ.z_cpn_montecarlo(s, cfg, samples=300_000)
    assert (a.value, a.err) == (b.value, b.err)
    c = integ.z_cpn_montecarlo(s, integ.IntegratorConfig(seed=12), samples=300_000)
    assert c.value != a.value


@pytest.mark.parametrize(
    "theta, rho, ref, rtol",
    [
        ([2, 1], 1.0, math.exp(-2), 1e-10),
        ([3, 2, 1], 1.0, math.exp(-3) / 2, 1e-8),
        ([2, 1], 10.0, math.exp(-20) / 10, 1e-8),
    ],
)
def test_cq_quadrature_examples(theta, rho, ref, rtol):
    q = integ.z_cqn_quadrature(cq(theta, rho))
    assert q.value == pytest.approx(ref, rel=rtol)


def test_cq_simplex_integrand_matches_x_form():
    theta, rho = np.array([3.0, 2.0, 1.0]), 1.0
    x = np.array([[0.3, 1.2], [2.0, 0.1]])
    direct = math.exp(-rho * theta[0]) * np.exp(-rho * (x @ (theta[0] - theta[1:])))
    assert np.allclose(integ.cqn_simplex_integrand(x, theta, rho), direct, rtol=1e-13)


@pytest.mark.parametrize("theta, rho, ref", [([2, 1], 2.0, math.exp(-4) / 2), ([3, 2, 1], 2.0, math.exp(-6) / 8)])
def test_cq_exponential_mc_examples(theta, rho, ref):
    s = cq(theta, rho)
    cfg = integ.IntegratorConfig(seed=5)
    mc = integ.z_cqn_exponential_mc(s, cfg, samples=100_000)
    assert abs(mc.value - ref) <= 3 * mc.err
    again = integ.z_cqn_exponential_mc(s, cfg, samples=100_000)
    assert again.value == mc.value


def test_cq_exponential_mc_refuses_heavy_weights():
    with pytest.raises(WeightOverflow):
        integ.z_cqn_exponential_mc(cq([2, 1], 0.4))


def test_kind_checks():
    with pytest.raises(KindMismatch):
        integ.z_cpn_quadrature(cq([2, 1]))
    with pytest.raises(KindMismatch):
        integ.z_cqn_quadrature(cp([1, 2]))


def test_residue_equals_dh():
    for theta in ([1, 2], [1, 2, 3], [0.5, 1.1, 2.0, 4.0]):
        s = cp(theta, 1.3)
        assert integ.z_cpn_residue(s).value == pytest.approx(z_cpn_dh(s).value, rel=1e-13)


def test_contour_examples():
    s1 = cp([1, 2])
    c1 = integ.z_cpn_contour(s1, integ.IntegratorConfig(tol=1e-3, lambda_cutoff=1e4))
    assert abs(c1.value - integ.z_cpn_residue(s1).value) < 1e-4
    s2 = cp([1, 2, 3])
    c2 = integ.z_cpn_contour(s2, integ.IntegratorConfig(tol=1e-3, lambda_cutoff=1e3))
    assert abs(c2.value - integ.z_cpn_residue(s2).value) < 1e-6


def test_contour_many_levels():
    # a single oscillatory call over [0, cutoff] steps over the peak for N = 7
    s = cp(list(range(1, 9)))
    c = integ.z_cpn_contour(s, integ.IntegratorConfig(tol=1e-3))
    assert c.value == pytest.approx(integ.z_cpn_residue(s).value, rel=1e-8)


def test_contour_tail_dominates():
    with pytest.raises(TailDominates):
        integ.z_cpn_contour(cp([1, 2]), integ.IntegratorConfig(tol=1e-10, lambda_cutoff=100.0))


def test_contour_tail_bound():
    assert integ.contour_tail_bound(2, 10.0) == pytest.approx(1 / (100 * 2 * math.pi))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_cp_small_rho_volume(n):
    q = integ.z_cpn_quadrature(cp(list(range(1, n + 2)), 1e-4))
    assert q.value == pytest.approx(1 / math.factorial(n), rel=1e-3)

import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from localize import quantum as qu
from localize.closed_forms import quantum_trace_closed
from localize.errors import BudgetExhausted, DivergentRegime, InsufficientNodes, LocalizeError
from localize.spectrum import QuantumParams


def test_truncation_invariants():
    tr = qu.FockTruncation(2, 2)
    assert tr.size == 9
    assert tr.occupations().tolist()[:4] == [[0, 0], [0, 1], [0, 2], [1, 0]]
    with pytest.raises(LocalizeError):
        qu.FockTruncation(-1, 1)
    with pytest.raises(BudgetExhausted):
        qu.FockTruncation(100, 4)


def test_trace_n1_m40():
    qp = QuantumParams(1, 2, (1.0, 0.0), -1j)
    chk = qu.fock_trace_truncated(qp, qu.FockTruncation(40, 1))
    assert abs(chk.value - 1 / (1 - math.exp(-1))) <= math.exp(-41) / (1 - math.exp(-1)) + 1e-15
    assert chk.tail_bound == pytest.approx(math.exp(-41) / (1 - math.exp(-1)) ** 2)


def test_trace_ground_state_only():
    qp = QuantumParams(2, 3, (1.0, 2.0, 0.5), -1j)
    chk = qu.fock_trace_truncated(qp, qu.FockTruncation(0, 2))
    assert chk.value == pytest.approx(cmath.exp(-1j * 3 * 0.5 * -1j), rel=1e-15)


def test_trace_n2_m30():
    qp = QuantumParams(2, 2, (1.0, 2.0, 0.0), -1j)
    chk = qu.fock_trace_truncated(qp, qu.FockTruncation(30, 2))
    assert abs(chk.value - quantum_trace_closed(qp).value) <= chk.tail_bound + chk.slack


def test_trace_tail_shrinks():
    qp = QuantumParams(2, 3, (0.5, 1.5, 0.2), 0.4 - 1j)
    tails = [qu.fock_trace_truncated(qp, qu.FockTruncation(m, 2)).tail_bound for m in (10, 20, 40)]
    assert tails[0] > tails[1] > tails[2]


def test_trace_divergent():
    with pytest.raises(DivergentRegime):
        qu.fock_trace_truncated(QuantumParams(1, 1, (1.0, 0.0), 1.0), qu.FockTruncation(5, 1))


def test_trace_mode_count_mismatch():
    with pytest.raises(LocalizeError):
        qu.fock_trace_truncated(QuantumParams(1, 1, (1.0, 0.0), -1j), qu.FockTruncation(5, 2))


@given(
    st.lists(st.floats(0.2, 3.0), min_size=2, max_size=3),
    st.floats(-2.0, 2.0),
    st.floats(0.3, 2.0),
    st.integers(0, 12),
)
def test_trace_factorizes(mu, re_t, im_t, m_max):
    n = len(mu)
    qp = QuantumParams(n, n, tuple(mu) + (0.0,), complex(re_t, -im_t))
    full = qu.fock_trace_truncated(qp, qu.FockTruncation(m_max, n)).value
    prod = np.prod(qu.single_mode_traces(qp, m_max))
    assert full == pytest.approx(prod, rel=1e-13, abs=1e-300)


def test_overlap_examples():
    a = qu.coherent_overlap([math.pi], [0.0], 1)
    assert abs(a.value) < 1e-16 and not a.divergent
    b = qu.coherent_overlap([1.0], [1.0], 9)
    assert b.value == pytest.approx(10 / (2 * math.pi))
    assert b.divergent
    d = np.array([math.pi / 2, math.pi])
    c = qu.coherent_overlap(d, [0.0, 0.0], 3)
    direct = np.prod([sum(np.exp(1j * m * x) for m in range(4)) for x in d]) / (2 * math.pi) ** 2
    assert c.value == pytest.approx(direct, abs=1e-15)


@given(
    st.lists(st.floats(0, 2 * math.pi), min_size=2, max_size=2),
    st.lists(st.floats(0, 2 * math.pi), min_size=2, max_size=2),
    st.floats(-3.0, 3.0),
)
def test_overlap_translation_invariant(phi, phi2, shift):
    a = qu.coherent_overlap(phi, phi2, 5).value
    b = qu.coherent_overlap(np.add(phi, shift), np.add(phi2, shift), 5).value
    assert b == pytest.approx(a, abs=1e-12)


@pytest.mark.parametrize("n, m_max, q, tol", [(1, 5, 16, 1e-13), (2, 3, 16, 1e-12), (1, 7, 15, 1e-12), (3, 2, 5, 1e-12)])
def test_resolution_of_unity(n, m_max, q, tol):
    assert qu.resolution_of_unity_residual(n, m_max, q) < tol


def test_resolution_of_unity_threshold():
    with pytest.raises(InsufficientNodes):
        qu.resolution_of_unity_residual(1, 5, 8)
    with pytest.raises(InsufficientNodes):
        qu.resolution_of_unity_residual(1, 5, 10)
    # just above the threshold is still exact
    assert qu.resolution_of_unity_residual(1, 5, 11) < 1e-13


def test_resolution_of_unity_aliasing_is_visible():
    # q = m_max + 1 nodes: the discrete rule still integrates |m| <= m_max exactly
    # but q <= m_max aliases distinct modes onto each other
    from localize import quantum

    nodes = 4
    occ = np.arange(6)
    phis = 2 * math.pi * np.arange(nodes) / nodes
    kets = np.exp(-1j * np.outer(phis, occ))
    gram = kets.T @ kets.conj() / nodes
    assert np.max(np.abs(gram - np.eye(6))) > 0.5
    assert quantum.resolution_of_unity_residual(1, 5, 12) < 1e-13


@pytest.mark.parametrize("sigma, phi, n_images, tol", [(1.0, 0.0, 5, 1e-12), (1.0, math.pi, 5, 1e-12), (0.05, 1.0, 25, 1e-8)])
def test_poisson(sigma, phi, n_images, tol):
    assert qu.poisson_resum_residual(sigma, phi, n_images, 20) < tol


def test_poisson_small_sigma_needs_images():
    # sigma = 0.05 makes f_hat wide; five images are not enough
    assert qu.poisson_resum_residual(0.05, 1.0, 5, 20) > 1e-3
    lhs_tail, rhs_tail = qu.poisson_tail_bounds(0.05, 1.0, 5, 20)
    assert qu.poisson_resum_residual(0.05, 1.0, 5, 20) <= lhs_tail + rhs_tail


def test_poisson_rejections():
    with pytest.raises(LocalizeError):
        qu.poisson_resum_residual(0.0, 1.0, 5, 20)
    with pytest.raises(LocalizeError):
        qu.poisson_resum_residual(1.0, 1.0, 0, 20)


@given(st.floats(0.3, 3.0), st.floats(-math.pi, math.pi))
def test_poisson_within_tail_bounds(sigma, phi):
    lhs_tail, rhs_tail = qu.poisson_tail_bounds(sigma, phi, 8, 30)
    assert qu.poisson_resum_residual(sigma, phi, 8, 30) <= lhs_tail + rhs_tail + 1e-13

"""The full verification battery at pinned parameters.

Every group of rows corresponds to one acceptance criterion; the row
``quantity`` names carry a ``cK.`` prefix.  Randomness comes only from
:func:`localize.rng.stream`, so a fixed seed fixes every number in the report.
"""

from __future__ import annotations

import math

import numpy as np

from . import closed_forms as cf
from . import embedding as emb
from . import geometry as geo
from . import integrators as integ
from . import quantum as qu
from .errors import ConsistencyError
from .report import Row, bounded, compare, failed, in_range
from .rng import stream
from .spectrum import ChartPoint, Kind, QuantumParams, validate_spectrum

WKB_NOTE = (
    "The statement that the leading WKB order of the coherent-state path integral "
    "equals the exact trace is an analytic identity between two integral "
    "representations and is not reproduced numerically; the rows under c6 check "
    "the shared closed-form trace against truncated Fock-space sums instead."
)

# shard-key offsets keep the criteria's random streams disjoint
_GEOMETRY_STREAM = 1000


def criterion_1(seed: int) -> list[Row]:
    rows = []
    for n in (1, 2, 3):
        for rho in (0.5, 1.0, 2.0):
            s = validate_spectrum(Kind.CP, list(range(1, n + 2)), rho)
            tag = f"c1.cp.N={n}.rho={rho:g}"
            dh = cf.z_cpn_dh(s).value
            det = cf.z_cpn_det(s).value
            res = integ.z_cpn_residue(s).value
            rows.append(compare(f"{tag}.Z", "det_form", det, "dh_sum", dh, rtol=1e-10))
            rows.append(compare(f"{tag}.Z", "residue", res, "dh_sum", dh, rtol=1e-10))
            rows.append(compare(f"{tag}.Z", "residue", res, "det_form", det, rtol=1e-10))
            q = integ.z_cpn_quadrature(s)
            rows.append(compare(f"{tag}.Z.within_err", "quadrature", q.value, "dh_sum", dh, err=q.err, nsigma=1.0))
            rows.append(compare(f"{tag}.Z", "quadrature", q.value, "dh_sum", dh, err=q.err, rtol=1e-6))
            mc = integ.z_cpn_montecarlo(s, integ.IntegratorConfig(seed=seed), samples=1_000_000)
            rows.append(compare(f"{tag}.Z", "montecarlo", mc.value, "dh_sum", dh, err=mc.err, nsigma=3.0))
    return rows


def criterion_2(seed: int) -> list[Row]:
    rows = []
    for n in (1, 2, 3):
        for rho in (1.0, 2.0):
            s = validate_spectrum(Kind.CQ, list(range(n + 1, 0, -1)), rho)
            tag = f"c2.cq.N={n}.rho={rho:g}"
            closed = cf.z_cqn_closed(s).value
            q = integ.z_cqn_quadrature(s)
            rows.append(compare(f"{tag}.Z", "quadrature", q.value, "closed", closed, err=q.err, rtol=1e-8))
            mc = integ.z_cqn_exponential_mc(s, integ.IntegratorConfig(seed=seed), samples=100_000)
            rows.append(compare(f"{tag}.Z", "montecarlo", mc.value, "closed", closed, err=mc.err, nsigma=3.0))
    return rows


def criterion_3() -> list[Row]:
    rows = []
    for n in (1, 2, 3):
        s = validate_spectrum(Kind.CP, list(range(1, n + 2)), 1e-4)
        q = integ.z_cpn_quadrature(s)
        rows.append(compare(f"c3.cp.N={n}.rho=1e-4.Z", "quadrature", q.value, "1/N!", 1 / math.factorial(n), rtol=1e-3))
    return rows


def geometry_rows(points: list[ChartPoint], tag: str, h: float = 1e-5) -> list[Row]:
    """Worst-case geometry checks over ``points`` (all of one kind and N)."""
    kind = points[0].kind
    fd_tol = 1e-6 if kind is Kind.CP else 1e-5
    proj = {"idempotent": 0.0, "hermitian": 0.0, "trace": 0.0}
    worst_fd, worst_pair, spurious, closed, det_fail = 0.0, (0.0, 0.0), 0.0, 0.0, None
    worst_det = 0.0
    for p in points:
        for k, v in geo.projector(p).residuals().items():
            proj[k] = max(proj[k], v)
        fd = geo.metric_fd(p, h)
        an = geo.metric_analytic(p)
        diff = np.abs(fd.g - an.g)
        i = np.unravel_index(np.argmax(diff), diff.shape)
        if diff[i] >= worst_fd:
            worst_fd, worst_pair = float(diff[i]), (complex(fd.g[i]), complex(an.g[i]))
        spurious = max(spurious, fd.spurious)
        closed = max(closed, geo.kahler_closedness_residual(p))
        try:
            d = geo.volume_density(p)
            sign = 1.0 if kind is Kind.CP else -1.0
            ref = (1.0 + sign * p.s) ** -(p.n + 1)
            worst_det = max(worst_det, abs(d - ref) / ref)
        except ConsistencyError as exc:
            det_fail = str(exc)

    rows = [bounded(f"{tag}.projector.{k}", "projector", v, 1e-12) for k, v in proj.items()]
    fd_val, an_val = worst_pair
    rows.append(compare(f"{tag}.metric", "metric_fd", fd_val, "metric_analytic", an_val, atol=fd_tol))
    rows.append(bounded(f"{tag}.metric.spurious_20_02", "metric_fd", spurious, fd_tol))
    order, _ = geo.fd_convergence_order(points)
    rows.append(in_range(f"{tag}.metric.fd_order", "metric_fd", order, 1.8, 2.2, "second_order", 2.0))
    if det_fail:
        rows.append(failed(f"{tag}.det_G", "metric_analytic", "volume_density", det_fail))
    else:
        rows.append(bounded(f"{tag}.det_G.rel", "metric_analytic", worst_det, 1e-12, "volume_density"))
    rows.append(bounded(f"{tag}.closedness", "kahler_closedness_residual", closed, 1e-5))
    return rows


def criterion_4(seed: int, points: int = 100) -> list[Row]:
    rows = []
    for ki, kind in enumerate((Kind.CP, Kind.CQ)):
        for n in (1, 2, 3, 4):
            gen = stream(seed, _GEOMETRY_STREAM + 10 * ki + n)
            pts = [geo.random_chart_point(kind, n, gen) for _ in range(points)]
            rows += geometry_rows(pts, f"c4.{kind.value}.N={n}")
    return rows


def embed_rows(p: ChartPoint, n_max: int, tag: str, spectrum=None) -> list[Row]:
    e = emb.embed(p, n_max)
    norm = emb.embed_norm_residual(e)
    rows = [compare(f"{tag}.norm.gap", "embed", norm.exact - norm.truncated, "geometric_tail", norm.tail_bound, atol=1e-14)]
    if spectrum is not None:
        en = emb.universal_energy(e, spectrum)
        rows.append(compare(f"{tag}.energy.exact", "universal_energy", en.exact, "hamiltonian_trace",
                            geo.hamiltonian_trace(p, spectrum), rtol=1e-12, atol=1e-12))
        rows.append(compare(f"{tag}.energy.truncated", "universal_energy", en.truncated, "closed", en.exact,
                            atol=en.bound + 1e-12 * max(1.0, abs(en.exact))))
    g = emb.pullback_metric(e).g
    ref = geo.metric_analytic(p).g
    diff = np.abs(g - ref)
    i = np.unravel_index(np.argmax(diff), diff.shape)
    bound = emb.pullback_tail_bound(p.s, n_max) + 1e-12 * max(1.0, float(np.max(np.abs(ref))))
    rows.append(compare(f"{tag}.pullback", "pullback_metric", complex(g[i]), "metric_analytic", complex(ref[i]), atol=bound))
    return rows


def criterion_5(seed: int) -> list[Row]:
    rows = []
    gen = stream(seed, 2000)
    for n in (1, 2, 3):
        theta = list(range(n + 1, 0, -1))
        s = validate_spectrum(Kind.CQ, theta, 1.0)
        for j in range(5):
            p = geo.random_chart_point(Kind.CQ, n, gen, s_max=0.5)
            n_max = 12 if n < 3 else 8
            rows += embed_rows(p, n_max, f"c5.cq.N={n}.pt{j}", s)

    half = ChartPoint(Kind.CQ, [0.5])
    errs = []
    for n_max in (5, 10, 15, 20):
        g = emb.pullback_metric(emb.embed(half, n_max)).g[0, 0].real
        errs.append(abs(g - 16 / 9))
    rows.append(compare("c5.cq.N=1.xi=0.5.nmax=20.pullback", "pullback_metric", g, "16/9", 16 / 9, atol=1e-4))
    monotone = all(b < a for a, b in zip(errs, errs[1:]))
    rows.append(compare("c5.cq.N=1.xi=0.5.pullback.monotone", "pullback_metric", float(monotone), "true", 1.0))
    en = emb.universal_energy(emb.embed(half, 20), validate_spectrum(Kind.CQ, [2, 1], 1.0))
    rows.append(compare("c5.cq.N=1.xi=0.5.energy.exact", "universal_energy", en.exact, "7/3", 7 / 3, rtol=1e-12))
    return rows


def trace_row(qp: QuantumParams, m_max: int, tag: str) -> Row:
    chk = qu.fock_trace_truncated(qp, qu.FockTruncation(m_max, qp.n))
    return compare(tag, "fock_truncated", chk.value, "closed", chk.closed, err=chk.tail_bound,
                   atol=chk.tail_bound + chk.slack)


def criterion_6() -> list[Row]:
    rows = []
    params = {1: QuantumParams(1, 2, (1.0, 0.0), -1j), 2: QuantumParams(2, 3, (1.0, 2.0, 0.0), -1j)}
    for n, qp in params.items():
        tails = []
        for m_max in (10, 20, 40):
            row = trace_row(qp, m_max, f"c6.trace.N={n}.mmax={m_max}")
            tails.append(row.err)
            rows.append(row)
        shrink = all(b < a for a, b in zip(tails, tails[1:]))
        rows.append(compare(f"c6.trace.N={n}.tail_shrinks", "fock_truncated", float(shrink), "true", 1.0))
        full = qu.fock_trace_truncated(qp, qu.FockTruncation(20, n)).value
        factored = complex(np.exp(-1j * qp.k * qp.c[-1] * qp.t) * np.prod(qu.single_mode_traces(qp, 20)))
        rows.append(compare(f"c6.trace.N={n}.factorization", "fock_truncated", full, "mode_product", factored, rtol=1e-14))
    for n, m_max, q in ((1, 5, 16), (1, 20, 41), (2, 3, 16), (2, 6, 13), (3, 2, 5)):
        rows.append(bounded(f"c6.unity.N={n}.mmax={m_max}.q={q}", "resolution_of_unity",
                            qu.resolution_of_unity_residual(n, m_max, q), 1e-12))
    for phi in (1.0, 3.14159, -2.0):
        for eps in (0.25, 0.5):
            chk = cf.fourier_series_sum(phi, eps, 10_000)
            tag = f"c6.fourier.phi={phi:g}.eps={eps:g}"
            rows.append(compare(f"{tag}.partial", "paired_sum", chk.partial, "closed", chk.closed, atol=1e-4))
            rows.append(compare(f"{tag}.alternate", "alternate_form", chk.alternate, "closed", chk.closed, atol=1e-12))
    for phi in (0.0, 1.0, math.pi):
        rows.append(bounded(f"c6.poisson.sigma=1.phi={phi:.6g}", "poisson_resum",
                            qu.poisson_resum_residual(1.0, phi, 5, 20), 1e-10))
    return rows


_VANDERMONDE_SETS = (
    (1, 2),
    (3, -1, 7),
    (1, 2, 3, 4),
    (5, -2, 9, 0, 11),
    (2, 3, 5, 7, 11, 13),
    (-6, -3, 0, 1, 4, 10, 25),
)


def criterion_7() -> list[Row]:
    rows = []
    for theta in _VANDERMONDE_SETS:
        tag = f"c7.vandermonde.N={len(theta) - 1}"
        exact = cf.vandermonde_identity_residual(theta, exact=True)
        rows.append(compare(f"{tag}.rational", "fraction", float(exact), "zero", 0.0)
                    if exact == 0 else failed(f"{tag}.rational", "fraction", "zero", f"residual {exact}"))
        rows.append(bounded(f"{tag}.float", "float64", cf.vandermonde_identity_residual(theta), 1e-12))
    return rows


def run_suite(seed: int = 42) -> tuple[list[Row], list[str]]:
    rows: list[Row] = []
    rows += criterion_1(seed)
    rows += criterion_2(seed)
    rows += criterion_3()
    rows += criterion_4(seed)
    rows += criterion_5(seed)
    rows += criterion_6()
    rows += criterion_7()
    notes = [
        WKB_NOTE,
        "c8 (byte-identical reruns) is checked by running this command twice; wall_time_ms is null so reports compare equal.",
    ]
    return rows, notes


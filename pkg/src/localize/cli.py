"""``localize`` command-line front end.

Exit codes: 0 when every row passes, 2 when the input is rejected, 3 when a
tolerance check fails.  Reports are JSON when stdout is not a terminal or
``--json`` is given, CSV with ``--csv``, otherwise a plain table.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import closed_forms as cf
from . import embedding as emb
from . import geometry as geo
from . import integrators as integ
from . import quantum as qu
from .errors import ConsistencyError, LocalizeError, OutOfChart
from .report import RunReport, bounded, compare, failed
from .rng import stream
from .spectrum import ChartPoint, Kind, QuantumParams, validate_spectrum
from .suite import WKB_NOTE, embed_rows, geometry_rows, run_suite, trace_row

EXIT_OK, EXIT_INPUT, EXIT_FAIL = 0, 2, 3

DEFAULTS = {
    "partition": {"rho": 1.0, "seed": 0, "samples": None, "lambda_cutoff": 1e4, "contour_tol": 1e-3},
    "geometry": {"n": 1, "points": 20, "seed": 0, "at": None, "h": 1e-5},
    "quantum": {"fourier": False, "phi": 1.0, "eps": 0.5, "m": 10_000, "mmax": 20, "sigma": 1.0},
    "embed": {"nmax": 20, "theta": None},
    "suite": {"seed": 42},
}


def _number(tok: str):
    tok = tok.strip()
    try:
        return int(tok)
    except ValueError:
        return float(tok)


def _numbers(text) -> list:
    if isinstance(text, (list, tuple)):
        return list(text)
    return [_number(t) for t in str(text).split(",") if t.strip()]


def _complexes(text) -> list[complex]:
    if isinstance(text, (list, tuple)):
        out = []
        for v in text:
            out.append(complex(*v) if isinstance(v, (list, tuple)) else _complex(v))
        return out
    return [_complex(t) for t in str(text).split(",") if t.strip()]


def _complex(tok) -> complex:
    if isinstance(tok, (int, float, complex)):
        return complex(tok)
    try:
        return complex(str(tok).strip().replace("i", "j").replace(" ", ""))
    except ValueError:
        raise LocalizeError(f"cannot parse complex number {tok!r}") from None


def _pair(text) -> complex:
    vals = text if isinstance(text, (list, tuple)) else _numbers(text)
    if len(vals) != 2:
        raise LocalizeError(f"expected 're,im', got {text!r}")
    return complex(float(vals[0]), float(vals[1]))


# ---------------------------------------------------------------- commands


def _run_method(report: RunReport, name: str, fn):
    """Run one estimator; inapplicable methods are listed as skipped, not failed."""
    try:
        return fn()
    except ConsistencyError as exc:
        report.rows.append(failed("Z", name, "internal", str(exc)))
    except LocalizeError as exc:
        report.skipped.append({"method": name, "reason": f"{type(exc).__name__}: {exc}"})
    return None


def cmd_partition(a) -> RunReport:
    if a.kind is None or a.theta is None:
        raise LocalizeError("partition needs --kind and --theta")
    s = validate_spectrum(a.kind, _numbers(a.theta), a.rho)
    report = RunReport("partition", {"kind": s.kind.value, "theta": [float(t) for t in s.theta], "rho": s.rho,
                                     "samples": a.samples}, seed=a.seed)
    if s.ill_conditioned:
        report.notes.append("spectrum gaps are small; residue-type forms are ill-conditioned")
    cfg = integ.IntegratorConfig(seed=a.seed)
    if s.kind is Kind.CP:
        dh = cf.z_cpn_dh(s).value
        det = cf.z_cpn_det(s).value
        report.rows.append(compare("Z", "dh_sum", dh, "det_form", det, rtol=1e-10))
        report.rows.append(compare("Z", "det_form", det, "dh_sum", dh, rtol=1e-10))
        res = integ.z_cpn_residue(s).value
        report.rows.append(compare("Z", "residue", res, "dh_sum", dh, rtol=1e-10))
        ccfg = integ.IntegratorConfig(tol=a.contour_tol, seed=a.seed, lambda_cutoff=a.lambda_cutoff)
        c = _run_method(report, "contour", lambda: integ.z_cpn_contour(s, ccfg))
        if c is not None:
            report.rows.append(compare("Z", "contour", c.value, "residue", res, err=c.err, nsigma=1.0))
        q = _run_method(report, "quadrature", lambda: integ.z_cpn_quadrature(s, cfg))
        if q is not None:
            report.rows.append(compare("Z", "quadrature", q.value, "dh_sum", dh, err=q.err, nsigma=1.0, rtol=1e-6))
        samples = a.samples or 1_000_000
        mc = _run_method(report, "montecarlo", lambda: integ.z_cpn_montecarlo(s, cfg, samples))
        if mc is not None:
            report.rows.append(compare("Z", "montecarlo", mc.value, "dh_sum", dh, err=mc.err, nsigma=3.0))
    else:
        closed = _run_method(report, "closed", lambda: cf.z_cqn_closed(s))
        if closed is None:
            return report
        det = cf.z_cqn_det(s).value
        report.rows.append(compare("Z", "closed", closed.value, "det_form", det, rtol=1e-10))
        q = _run_method(report, "quadrature", lambda: integ.z_cqn_quadrature(s, cfg))
        if q is not None:
            report.rows.append(compare("Z", "quadrature", q.value, "closed", closed.value, err=q.err, rtol=1e-8))
        samples = a.samples or 100_000
        mc = _run_method(report, "exponential_mc", lambda: integ.z_cqn_exponential_mc(s, cfg, samples))
        if mc is not None:
            report.rows.append(compare("Z", "exponential_mc", mc.value, "closed", closed.value, err=mc.err, nsigma=3.0))
    return report


def cmd_geometry(a) -> RunReport:
    if a.kind is None:
        raise LocalizeError("geometry needs --kind")
    kind = Kind.parse(a.kind)
    if a.at is not None:
        xi = _complexes(a.at)
        n = len(xi)
        if a.n not in (None, n):
            raise LocalizeError(f"--at has {n} coordinates but --n is {a.n}")
        pts = [ChartPoint(kind, xi)] * max(1, a.points)
    else:
        n = int(a.n)
        if n < 1 or a.points < 1:
            raise LocalizeError("--n and --points must be >= 1")
        gen = stream(a.seed, 0)
        pts = [geo.random_chart_point(kind, n, gen) for _ in range(a.points)]
    for p in pts:
        if not p.in_chart:
            raise OutOfChart(f"point with xi^dagger xi = {p.s:.6g} lies outside the CQ unit ball")
    report = RunReport("geometry", {"kind": kind.value, "n": n, "points": len(pts), "at": a.at, "h": a.h}, seed=a.seed)
    report.rows += geometry_rows(pts, f"{kind.value}.N={n}", h=a.h)
    return report


def cmd_quantum(a) -> RunReport:
    if a.fourier:
        chk = cf.fourier_series_sum(a.phi, a.eps, a.m)
        report = RunReport("quantum", {"fourier": True, "phi": a.phi, "eps": a.eps, "m": a.m})
        report.rows.append(compare("fourier_sum", "paired_sum", chk.partial, "closed", chk.closed, atol=1e-4))
        report.rows.append(compare("fourier_sum", "alternate_form", chk.alternate, "closed", chk.closed, atol=1e-12))
        return report
    if a.n is None or a.k is None or a.c is None or a.t is None:
        raise LocalizeError("quantum needs --n, --k, --c and --t (or --fourier)")
    qp = QuantumParams(int(a.n), int(a.k), tuple(float(x) for x in _numbers(a.c)), _pair(a.t))
    report = RunReport("quantum", {"n": qp.n, "k": qp.k, "c": list(qp.c), "t": qp.t, "mmax": a.mmax})
    cf.quantum_trace_closed(qp)  # DivergentRegime before any summation
    report.rows.append(trace_row(qp, a.mmax, f"trace.mmax={a.mmax}"))
    full = qu.fock_trace_truncated(qp, qu.FockTruncation(a.mmax, qp.n)).value
    phase = np.exp(-1j * qp.k * qp.c[-1] * qp.t)
    report.rows.append(compare("trace.factorization", "fock_truncated", full, "mode_product",
                               complex(phase * np.prod(qu.single_mode_traces(qp, a.mmax))), rtol=1e-14))
    m_res = min(a.mmax, 10 if qp.n == 1 else 4)
    q = 2 * m_res + 2
    if q ** qp.n * (m_res + 1) ** qp.n <= qu.DEFAULT_BUDGET:
        report.rows.append(bounded(f"unity.mmax={m_res}.q={q}", "resolution_of_unity",
                                   qu.resolution_of_unity_residual(qp.n, m_res, q), 1e-12))
    else:
        report.skipped.append({"method": "resolution_of_unity", "reason": "basis too large for the default budget"})
    chk = cf.fourier_series_sum(a.phi, a.eps, a.m)
    report.rows.append(compare("fourier_sum", "paired_sum", chk.partial, "closed", chk.closed, atol=1e-4))
    report.rows.append(compare("fourier_sum", "alternate_form", chk.alternate, "closed", chk.closed, atol=1e-12))
    report.rows.append(bounded(f"poisson.sigma={a.sigma:g}", "poisson_resum",
                               qu.poisson_resum_residual(a.sigma, a.phi, 5, 20), 1e-10))
    report.notes.append(WKB_NOTE)
    return report


def cmd_embed(a) -> RunReport:
    if a.xi is None:
        raise LocalizeError("embed needs --xi")
    xi = _complexes(a.xi)
    if a.n is not None and int(a.n) != len(xi):
        raise LocalizeError(f"--xi has {len(xi)} coordinates but --n is {a.n}")
    p = ChartPoint(Kind.CQ, xi)
    if not p.in_chart:
        raise OutOfChart(f"xi^dagger xi = {p.s:.6g} >= 1: outside the CQ unit ball")
    spectrum = None
    if a.theta is not None:
        spectrum = validate_spectrum(Kind.CQ, _numbers(a.theta), 1.0)
        if spectrum.n != p.n:
            raise LocalizeError(f"--theta has {spectrum.n + 1} levels; need N+1 = {p.n + 1}")
    report = RunReport("embed", {"xi": [complex(z) for z in p.xi], "nmax": a.nmax,
                                 "theta": None if spectrum is None else [float(t) for t in spectrum.theta]})
    rows = embed_rows(p, int(a.nmax), "cq", spectrum)
    e = emb.embed(p, int(a.nmax))
    norm = emb.embed_norm_residual(e)
    rows.insert(0, compare("norm.truncated", "embed", norm.truncated, "s/(1-s)", norm.exact, err=norm.tail_bound,
                           atol=norm.tail_bound + 1e-14))
    report.rows += rows
    return report


def cmd_suite(a) -> RunReport:
    rows, notes = run_suite(a.seed)
    report = RunReport("suite", {"seed": a.seed}, rows, seed=a.seed, notes=notes)
    return report


COMMANDS = {
    "partition": cmd_partition,
    "geometry": cmd_geometry,
    "quantum": cmd_quantum,
    "embed": cmd_embed,
    "suite": cmd_suite,
}


# ---------------------------------------------------------------- parsing


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False)
    out = common.add_argument_group("output")
    out.add_argument("--json", action="store_true", default=S, help="force JSON output")
    out.add_argument("--csv", action="store_true", default=S, help="CSV rows instead of JSON or a table")
    out.add_argument("--config", default=S, help="JSON file mirroring the flags; flags win on conflict")

    p = argparse.ArgumentParser(prog="localize", description="Numerical checks of localization formulas on CP^N and CQ^N.")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("partition", parents=[common], help="classical partition function, all methods")
    sp.add_argument("--kind", default=S, choices=["cp", "cq"])
    sp.add_argument("--theta", default=S, help="comma-separated levels")
    sp.add_argument("--rho", type=float, default=S)
    sp.add_argument("--seed", type=int, default=S)
    sp.add_argument("--samples", type=int, default=S)
    sp.add_argument("--lambda-cutoff", dest="lambda_cutoff", type=float, default=S)
    sp.add_argument("--contour-tol", dest="contour_tol", type=float, default=S)

    sp = sub.add_parser("geometry", parents=[common], help="projector, metric, volume and closedness checks")
    sp.add_argument("--kind", default=S, choices=["cp", "cq"])
    sp.add_argument("--n", type=int, default=S)
    sp.add_argument("--points", type=int, default=S)
    sp.add_argument("--seed", type=int, default=S)
    sp.add_argument("--at", default=S, help="comma-separated complex chart coordinates, e.g. 1+0i")
    sp.add_argument("--h", type=float, default=S)

    sp = sub.add_parser("quantum", parents=[common], help="Fock-space trace, coherent states, Fourier sums")
    sp.add_argument("--n", type=int, default=S)
    sp.add_argument("--k", type=int, default=S)
    sp.add_argument("--c", default=S, help="N+1 comma-separated couplings")
    sp.add_argument("--t", default=S, help="complex time as re,im")
    sp.add_argument("--mmax", type=int, default=S)
    sp.add_argument("--fourier", action="store_true", default=S, help="only the Fourier-sum check")
    sp.add_argument("--phi", type=float, default=S)
    sp.add_argument("--eps", type=float, default=S)
    sp.add_argument("--m", type=int, default=S)
    sp.add_argument("--sigma", type=float, default=S)

    sp = sub.add_parser("embed", parents=[common], help="Fock-space embedding of a CQ point")
    sp.add_argument("--n", type=int, default=S)
    sp.add_argument("--xi", default=S, help="comma-separated complex coordinates")
    sp.add_argument("--nmax", type=int, default=S)
    sp.add_argument("--theta", default=S, help="CQ levels for the energy check")

    sp = sub.add_parser("suite", parents=[common], help="run the full acceptance battery")
    sp.add_argument("--seed", type=int, default=S)
    return p


def _flatten_config(cfg: dict) -> dict:
    flat = {k.replace("-", "_"): v for k, v in cfg.items() if k != "quantum"}
    for k, v in (cfg.get("quantum") or {}).items():
        flat.setdefault(k, v)
    if "c" in flat and "n" not in flat and isinstance(flat["c"], list):
        flat["n"] = len(flat["c"]) - 1
    return flat


def resolve_args(argv=None) -> argparse.Namespace:
    """Parse flags, then fill gaps from ``--config``, then from defaults."""
    ns = build_parser().parse_args(argv)
    given = vars(ns)
    merged = {"json": False, "csv": False, "kind": None, "theta": None, "n": None, "k": None, "c": None,
              "t": None, "xi": None}
    merged.update(DEFAULTS[ns.command])
    if "config" in given:
        try:
            cfg = json.loads(Path(given["config"]).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise LocalizeError(f"cannot read config {given['config']}: {exc}") from None
        if not isinstance(cfg, dict):
            raise LocalizeError("config file must hold a JSON object")
        merged.update(_flatten_config(cfg))
    merged.update(given)
    return argparse.Namespace(**merged)


def _emit(report: RunReport, a) -> None:
    if a.csv:
        sys.stdout.write(report.to_csv())
    elif a.json or not sys.stdout.isatty():
        sys.stdout.write(report.to_json())
    else:
        sys.stdout.write(report.to_table())


def main(argv=None) -> int:
    try:
        a = resolve_args(argv)
    except LocalizeError as exc:
        print(f"localize: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    start = time.perf_counter()
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            report = COMMANDS[a.command](a)
    except ConsistencyError as exc:
        print(f"localize: consistency failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (LocalizeError, KeyError, TypeError) as exc:
        print(f"localize: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report.notes += [str(w.message) for w in caught]
    # the suite stays byte-reproducible; other commands record their run time
    if a.command != "suite":
        report.wall_time_ms = int(math.ceil((time.perf_counter() - start) * 1000))
    _emit(report, a)
    return EXIT_OK if report.all_pass else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

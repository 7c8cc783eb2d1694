"""Acceptance battery: one test and one printed PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the summary lines.
"""

import json
import math
import subprocess
import sys

import pytest

from localize import suite

SEED = 42


def _report(label, rows):
    bad = [r for r in rows if not r.passed]
    status = "PASS" if not bad else "FAIL"
    print(f"\n[acceptance] {label}: {status} ({len(rows) - len(bad)}/{len(rows)} rows)")
    for r in bad:
        print(f"    failing: {r.quantity} {r.method} vs {r.reference}: |diff|={r.abs_diff!r} tol={r.tol!r}")
    return bad


CRITERIA = {
    "c1 CP^N five-way agreement": lambda: suite.criterion_1(SEED),
    "c2 CQ^N three-way agreement": lambda: suite.criterion_2(SEED),
    "c3 volume normalization 1/N!": suite.criterion_3,
    "c4 geometry battery": lambda: suite.criterion_4(SEED),
    "c5 embedding battery": lambda: suite.criterion_5(SEED),
    "c6 quantum battery": suite.criterion_6,
    "c7 Vandermonde identity": suite.criterion_7,
}


@pytest.mark.parametrize("label", list(CRITERIA))
def test_criterion(label):
    rows = CRITERIA[label]()
    assert rows
    assert not _report(label, rows)


def test_c1_covers_all_methods():
    methods = {r.method for r in suite.criterion_1(SEED)}
    assert {"det_form", "residue", "quadrature", "montecarlo"} <= methods


def test_c3_against_factorials():
    rows = suite.criterion_3()
    for n, r in zip((1, 2, 3), rows):
        assert r.reference_value == 1 / math.factorial(n)
        assert abs(r.value - r.reference_value) <= 1e-3 * r.reference_value


def _suite_bytes():
    cmd = [sys.executable, "-m", "localize", "suite", "--seed", str(SEED), "--json"]
    proc = subprocess.run(cmd, capture_output=True, timeout=600)
    return proc.returncode, proc.stdout


def test_c8_reproducibility():
    code_a, a = _suite_bytes()
    code_b, b = _suite_bytes()
    ok = code_a == code_b == 0 and a == b and len(a) > 0
    print(f"\n[acceptance] c8 byte-identical suite reports: {'PASS' if ok else 'FAIL'} ({len(a)} bytes)")
    assert ok
    rep = json.loads(a)
    assert rep["seed"] == SEED
    assert any("WKB" in n for n in rep["notes"])

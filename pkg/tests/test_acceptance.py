"""Acceptance criteria, one test per criterion, each at its stated tolerance.

Every test prints a single ``[PASS]``/``[FAIL]`` line. Run this file directly
(``python tests/test_acceptance.py``) to get only those lines.
"""
import sys

import pytest

from ptmap.verification import CHECKS, CheckResult, _context

CRITERIA = [
    ("1", "C1 transport-exactness"),
    ("2", "C2 gauge-equivariance"),
    ("3", "C3 dual-route-assembly"),
    ("4", "C4 zero-diagonals"),
    ("5", "C5 austerity-trace-I"),
    ("6a", "C6a block-norm-decay"),
    ("6b", "C6b eigen-cauchy-N12-N16"),
    ("7a", "C7a affine-submersion"),
    ("7b", "C7b affine-negative-control"),
    ("8", "C8 latitude-trace-II"),
    ("9", "C9 l2-inequality"),
    ("10", "C10 degenerate-orbit"),
]


@pytest.fixture(scope="module")
def ctx():
    return _context({"seed": 0})


def _run(ctx, name):
    import time
    t0 = time.perf_counter()
    status, value, tol, details = CHECKS[name](ctx)
    return CheckResult(name, status, value, tol, time.perf_counter() - t0, details)


def _emit(res, request=None):
    line = f"criterion {res.line()}"
    if request is not None:
        with request.config.pluginmanager.getplugin("capturemanager").global_and_fixture_disabled():
            print("\n" + line)
    else:
        print(line)


def test_catalog_splits_are_reductive(ctx, request):
    res = _run(ctx, "reductive-split")
    _emit(res, request)
    assert res.status == "pass", res.details


@pytest.mark.parametrize("label,name", CRITERIA, ids=[c[0] for c in CRITERIA])
def test_criterion(ctx, request, label, name):
    res = _run(ctx, name)
    _emit(res, request)
    assert res.status == "pass", (res.value, res.tolerance, res.details)


if __name__ == "__main__":
    c = _context({"seed": 0})
    results = [_run(c, "reductive-split")] + [_run(c, name) for _, name in CRITERIA]
    for r in results:
        _emit(r)
    sys.exit(0 if all(r.status == "pass" for r in results) else 1)

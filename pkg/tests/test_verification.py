import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ptmap import InputError, catalog
from ptmap.verification import (CHECKS, CheckResult, latitude_curvature_fd, latitude_orbit,
                                run_verify)


def test_check_names_unique_and_ordered():
    names = list(CHECKS)
    assert len(names) == len(set(names))
    assert names[0] == "reductive-split"
    for i in range(1, 11):
        assert sum(n.startswith(f"C{i} ") or n.startswith(f"C{i}a ") or n.startswith(f"C{i}b ")
                   for n in names) >= 1


def test_abelian_suite_passes():
    rep = run_verify({"algebras": ["abelian2"]})
    assert rep.ok
    assert [r.name for r in rep.results] == list(CHECKS)
    statuses = {r.name: r.status for r in rep.results}
    assert statuses["C3 dual-route-assembly"] == "pass"
    assert statuses["C1 transport-exactness"] == "info"


def test_selected_checks_and_report_json():
    rep = run_verify({"algebras": ["su2"], "checks": ["C9 l2-inequality", "C10 degenerate-orbit"]})
    by = {r.name: r for r in rep.results}
    assert by["C9 l2-inequality"].status == "pass"
    assert by["C1 transport-exactness"].details == {"skipped": "not selected"}
    obj = json.loads(rep.dumps(include_runtime=False))
    assert all("runtime" not in c for c in obj["checks"])
    assert len(rep.lines()) == len(CHECKS)


def test_corrupted_split_is_a_named_failure():
    alg = catalog.load("su2").algebra
    bad = {"name": "broken", "dim": 3, "basis": alg.basis.tolist(), "c": alg.c.tolist(),
           "gram": np.eye(3).tolist(), "k_basis": [[1, 0, 0]], "p_basis": [[0, 1, 0], [1, 0, 1]]}
    rep = run_verify({"algebras": [bad, "su2"], "checks": ["reductive-split"]})
    res = rep.results[0]
    assert res.status == "fail"
    assert res.details["failing"][0]["algebra"] == "broken"
    assert not rep.ok


def test_config_errors():
    with pytest.raises(InputError):
        run_verify({"algebras": ["su2"], "extra": 1})
    with pytest.raises(InputError):
        run_verify({"checks": ["C99 nothing"]})


def test_check_result_line():
    line = CheckResult("C0 demo", "pass", 1.5e-13, 1e-12, 0.25).line()
    assert line.startswith("[PASS] C0 demo") and "1.500e-13" in line


@pytest.mark.parametrize("r", [0.2, 0.8, 1.4])
def test_latitude_oracle(r):
    orbit, xi = latitude_orbit(r)
    assert orbit.dim_M == 1
    assert_allclose(latitude_curvature_fd(r), 1 / np.tan(r), atol=1e-7)

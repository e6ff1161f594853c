import json
import math

import numpy as np
import pytest

from aiid import classical as C
from aiid import states as S
from aiid import tensor as T
from aiid import verify as V

TAU = T.density(np.eye(2) / 2)


def test_check_result_semantics():
    ok = V.CheckResult("a", "ref", 1.0, 1.0 - 5e-7)
    assert ok.passed and ok.margin == pytest.approx(-5e-7)
    bad = V.CheckResult("b", "ref", 1.0, 0.9)
    assert bad.passed is False
    skipped = V.CheckResult("c", "ref", 1.0, math.nan, skipped=True)
    assert skipped.passed is None
    assert V.CheckResult("d", "ref", math.nan, 1.0).passed is False


def test_number_serialization():
    assert V._num(1 / 3) == 0.333333333333
    assert V._num(math.inf) == "inf"
    assert V._num(-math.inf) == "-inf"
    assert V._num(True) is True
    assert V._num(np.int64(3)) == 3


def test_report_schema_and_summary():
    rep = V.VerificationReport("demo", [
        V.CheckResult("x", "ref", 0.0, 1.0),
        V.CheckResult("y", "ref", 2.0, 1.0),
        V.CheckResult("z", "ref", 0.0, math.nan, skipped=True, meta={"w": math.inf}),
    ])
    doc = json.loads(rep.to_json())
    assert set(doc) == {"suite", "checks", "summary"}
    assert doc["summary"] == {"pass": 1, "fail": 1, "skipped": 1}
    assert set(doc["checks"][0]) == {"name", "paper_ref", "lhs", "rhs", "margin", "pass", "meta"}
    assert doc["checks"][2]["meta"]["w"] == "inf"
    lines = rep.to_csv().splitlines()
    assert lines[0] == "name,paper_ref,lhs,rhs,margin,pass,meta"
    assert len(lines) == 4
    assert not rep.ok


def test_wlv_fixtures():
    rho = T.random_density(2, 2, 0)
    same = V.check_wlv(rho, rho)
    assert same.lhs == 0 and same.rhs == 0 and same.passed
    xi2 = C.classical_to_density(C.xi_distribution(2))
    res = V.check_wlv(xi2, T.tensor_power(TAU, 2), V.w1_classical(xi2, T.tensor_power(TAU, 2)))
    assert res.lhs == pytest.approx(1 / 8)
    assert res.meta["w1"] == pytest.approx(0.5)
    assert res.rhs == pytest.approx(0.5)
    assert res.passed


def test_msr_epsilon_flip_fixture():
    res = V.check_msr_epsilon(T.basis_state("0"), T.basis_state("1"), 4)
    assert res.meta["w1_source"] == "hamming-lp"
    assert res.lhs == pytest.approx(0.25)
    assert res.passed


def test_defect_upper_bound_is_valid():
    rng = np.random.default_rng(2)
    ref = T.random_pure(1, 2, rng)
    omega = T.random_density(1, 2, rng)
    ds = S.defect_state(ref, omega, 3)
    exact = V.w1_both(ds, S.iid_state(ref, 3)).value
    assert exact <= V.defect_w1_upper(ref, omega) + 1e-6


def test_metrisation_trivial_and_fixture():
    rho = T.random_density(1, 2, 1)
    triv = V.check_metrisation(T.tensor_power(rho, 3), rho, 2)
    assert triv.lhs == pytest.approx(0, abs=1e-12) and triv.passed
    xi4 = C.classical_to_density(C.xi_distribution(4))
    assert V.check_metrisation(xi4, TAU, 2).passed


def test_entropy_continuity_check():
    rho, sigma = T.random_density(2, 2, 3), T.random_density(2, 2, 4)
    res = V.check_entropy_continuity(rho, sigma)
    assert res.passed and 0 <= res.meta["w"] <= 1


def test_sandwich_check():
    rho, sigma = T.random_density(2, 2, 5), T.random_density(2, 2, 6)
    w = V.w1_both(rho, sigma)
    lo, hi = V.check_sandwich("s", rho, sigma, w)
    assert lo.passed and hi.passed
    assert w.gap <= 1e-5


def test_paired_counterexample_small():
    rep = V.verify_paired_counterexample(n_list=(10,), k=2)
    by = {c.name: c for c in rep.checks}
    ent = by["paired/n010/entropy"]
    assert ent.meta["entropy"] == pytest.approx(5 * math.log(2), abs=1e-12)
    marg = by["paired/n010/marginals"]
    assert marg.rhs == pytest.approx(1.04)
    # only the 5 adjacent pairs out of C(10,2) = 45 are correlated, each at l1 distance 1
    assert marg.lhs == pytest.approx(5 / 45)
    assert by["paired/n010/w1-floor"].passed
    assert rep.ok


def test_paired_sampled_branch():
    rep = V.verify_paired_counterexample(n_list=(200,), k=2, samples=300, seed=1)
    (marg,) = rep.checks
    assert marg.meta["mode"] == "sampled"
    assert marg.rhs == pytest.approx(2 * (1 - (198 / 200) * (196 / 200)))
    assert marg.passed


def test_xi_counterexample_small():
    rep = V.verify_xi_counterexample((4,), quantum_n=(2,), slice_cases=((4, 1),))
    by = {c.name: c for c in rep.checks}
    assert by["xi/n04/w1"].lhs == pytest.approx(0.75 / 4)
    assert by["xi/n04/w1"].rhs == pytest.approx(math.sqrt(math.log(5) / 8))
    assert rep.ok


def test_ame_root():
    w = V.ame_root()
    assert 0.18 < w < 0.20
    assert T.binary_entropy(w) + w * math.log(3) == pytest.approx(math.log(2), abs=1e-8)


def test_lipschitz_witness_value_small():
    # H = |00><00| against tau^2: pairing 3/4, and the Lipschitz constant of a rank-one projector is 1
    val, pairing, per_site = V.lipschitz_witness_value(T.basis_state("00"), T.tensor_power(TAU, 2),
                                                       T.basis_state("00").matrix)
    assert pairing == pytest.approx(0.75)
    assert max(per_site) == pytest.approx(1.0, abs=1e-6)
    assert val <= V.w1_both(T.basis_state("00"), T.tensor_power(TAU, 2)).value + 1e-6


def test_suite_config():
    cfg = V.SuiteConfig.from_dict({"seed": 3, "xi_n": [4]})
    assert cfg.seed == 3 and cfg.xi_n == (4,)
    with pytest.raises(ValueError):
        V.SuiteConfig.from_dict({"bogus": 1})
    with pytest.raises(ValueError):
        V.run_suite({}, suite="nope")


SMALL = {"paired_n": [4, 6, 24], "paired_samples": 200, "xi_n": [4], "moebius_functions": 5, "juntas": 5}


def test_suite_is_deterministic_and_sorted():
    a = V.run_suite(SMALL, suite="counterexamples").to_json()
    b = V.run_suite(SMALL, suite="counterexamples").to_json()
    assert a == b
    names = [c["name"] for c in json.loads(a)["checks"]]
    assert names == sorted(names)


def test_threads_do_not_change_report(monkeypatch):
    one = V.run_suite({**SMALL, "threads": 1}, suite="counterexamples").to_json()
    monkeypatch.setenv("AIID_THREADS", "3")
    many = V.run_suite(SMALL, suite="counterexamples").to_json()
    assert one.replace('"threads": 1', "") == many.replace('"threads": 1', "")

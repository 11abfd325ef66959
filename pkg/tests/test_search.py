import dataclasses
import math

import numpy as np
import pytest

from qrhc.errors import ContractError, SoundnessError
from qrhc.linalg import make_rng
from qrhc.search import (
    REGISTRY,
    get_target,
    minimize_slack,
    parse_grid,
    random_direction_descent,
    replay_witness,
    sharpness_profile,
)
from qrhc.verifiers import reverse_gamma_bound


def test_descent_on_quadratic():
    res = random_direction_descent(lambda x: float(np.sum((x - 1.0) ** 2)), np.zeros(3),
                                   make_rng(0), budget=2000)
    assert res.value < 1e-8
    assert res.evaluations <= 2000


def test_registry_and_grid():
    assert set(REGISTRY) == {"reverse-hc", "forward-hc", "strong-reverse-holder"}
    with pytest.raises(ContractError):
        get_target("lsi2")
    assert parse_grid("0:1:5") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_grid("0.3:0.9:1") == [0.3]
    with pytest.raises(ContractError):
        parse_grid("0:1")


def test_finds_violation_outside_region():
    res = minimize_slack("reverse-hc", 1.0, 0.5, 1.0, budget=400, seed=0)
    assert not res.in_region
    assert res.best_slack < -0.06
    rep = replay_witness("reverse-hc", res.witness, 1.0, 0.5, 1.0)
    assert rep.slack == res.best_slack


def test_no_violation_inside_region():
    p, q = 0.5, -1.0
    gamma = reverse_gamma_bound(p, q)
    res = minimize_slack("reverse-hc", p, q, gamma, budget=2000, seed=1)
    assert res.in_region
    assert res.best_slack >= -res.report.tol


@pytest.mark.parametrize("ineq,p,q,inside,outside", [
    ("forward-hc", 2.0, 4.0, 1 / math.sqrt(3), 0.95),
    ("strong-reverse-holder", 0.5, 0.5, 0.5, 0.95),
])
def test_other_targets(ineq, p, q, inside, outside):
    res = minimize_slack(ineq, p, q, inside, budget=1500, seed=2)
    assert res.best_slack >= -res.report.tol
    res = minimize_slack(ineq, p, q, outside, budget=1500, seed=2)
    assert res.best_slack < 0


def test_search_is_deterministic():
    a = minimize_slack("reverse-hc", 0.5, -1.0, 0.9, budget=300, seed=7)
    b = minimize_slack("reverse-hc", 0.5, -1.0, 0.9, budget=300, seed=7)
    assert a.best_slack == b.best_slack
    assert a.witness == b.witness


def test_soundness_error_on_fake_violation(monkeypatch):
    target = REGISTRY["reverse-hc"]
    real = target.evaluate

    def broken(ops, p, q, gamma, n):
        rep = real(ops, p, q, gamma, n)
        rep.slack -= 1.0
        return rep

    monkeypatch.setitem(REGISTRY, "reverse-hc", dataclasses.replace(target, evaluate=broken))
    with pytest.raises(SoundnessError):
        minimize_slack("reverse-hc", 0.5, -1.0, 0.2, budget=50, seed=0)


def test_sharpness_profile_sign_change():
    prof = sharpness_profile("reverse-hc", 0.5, -1.0, parse_grid("0.3:0.9:7"), budget=1500)
    assert prof["threshold"] == pytest.approx(0.5)
    lo, hi = prof["sign_change"]
    assert lo <= prof["threshold"] < hi
    assert all(r["min_slack"] >= -r["tol"] for r in prof["rows"] if r["in_region"])

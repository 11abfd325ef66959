"""Acceptance suite: one group of tests per criterion, at full scale.

Run ``pytest tests/test_acceptance.py`` to get the per-criterion summary.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from qrhc.campaigns import (
    VERIFY_IDS,
    derivative_campaign,
    diagonal_equivalence_campaign,
    mixing_campaign,
    nicd_campaign,
    summarize,
    verify_campaign,
)
from qrhc.channels import DepolarizingFamily, DepolarizingGenerator, KrausChannel
from qrhc.cube import majority_nicd
from qrhc.errors import SoundnessError
from qrhc.functionals import estimate_lsi2_constant
from qrhc.linalg import HermitianOperator, PositivityClass, random_psd
from qrhc.mixing import mixing_bound_corollary
from qrhc.nicd import (
    diagonal_measurement,
    envelope_delta,
    indicator_weights,
    make_basis,
    make_instance,
    nicd_bound_rhs,
    per_state_probabilities,
    success_probability,
)
from qrhc.search import minimize_slack, sharpness_profile
from qrhc.verifiers import (
    forward_gamma_bound,
    reverse_gamma_bound,
    strong_holder_gamma_bound,
    sv_two_point,
    verify_expansivity,
    verify_gross,
    verify_plsi,
    verify_reverse_hc,
    verify_reverse_holder,
    verify_reverse_minkowski,
    verify_stroock_varopoulos,
    verify_variational,
)

TRIALS = 10_000
D = HermitianOperator.diag
EYE = HermitianOperator.identity
ANCHOR = 1e-12


def _assert_campaign(reports, note, label):
    s = summarize(reports)
    note(f"{label}: {s['pass_count']}/{len(reports)}, min slack {s['min_slack']:.2e}")
    bad = [r for r in reports if not r.passed]
    assert not bad, bad[0].to_dict()


# -- 1 ----------------------------------------------------------------------

@pytest.mark.criterion(1)
@pytest.mark.parametrize("n", [1, 2, 3])
def test_reverse_hc_campaign(n, acceptance):
    start = time.perf_counter()
    reports = verify_campaign("reverse-hc", trials=TRIALS, seed=101, qubits=n)
    elapsed = time.perf_counter() - start
    assert all(r.tol == 1e-8 * max(1, abs(r.lhs), abs(r.rhs)) for r in reports)
    assert any(r.params["q"] < 0 for r in reports)
    assert any(r.params["p"] < 0 for r in reports)
    for r in reports:
        assert r.params["gamma"] == pytest.approx(reverse_gamma_bound(r.params["p"], r.params["q"]))
    _assert_campaign(reports, acceptance, f"n={n} ({elapsed:.0f}s)")
    assert elapsed < 120


# -- 2 ----------------------------------------------------------------------

@pytest.mark.criterion(2)
@pytest.mark.parametrize("n", [1, 2, 3])
def test_forward_hc_campaign(n, acceptance):
    reports = verify_campaign("forward-hc", trials=TRIALS, seed=202, qubits=n)
    for r in reports:
        p, q = r.params["p"], r.params["q"]
        assert 1 <= p <= 3 and p <= q <= 6
        assert r.params["gamma"] == pytest.approx(forward_gamma_bound(p, q))
    _assert_campaign(reports, acceptance, f"n={n}")


# -- 3 ----------------------------------------------------------------------

LEMMAS = ("reverse-holder", "reverse-minkowski", "variational", "expansivity", "sv", "gross",
          "plsi")


@pytest.mark.criterion(3)
@pytest.mark.parametrize("d", [2, 4, 8])
@pytest.mark.parametrize("ineq", LEMMAS)
def test_lemma_campaign(ineq, d, acceptance):
    reports = verify_campaign(ineq, trials=TRIALS, seed=303, dim=d)
    assert all(r.tol == 1e-9 * max(1, abs(r.lhs), abs(r.rhs)) for r in reports)
    _assert_campaign(reports, acceptance, f"{ineq} d={d}")


@pytest.mark.criterion(3)
def test_lemma_anchors():
    rep = verify_reverse_holder(EYE(2), EYE(2), 0.5)
    assert abs(rep.slack) <= ANCHOR
    rep = verify_reverse_holder(D([1, 0]), D([1, 2]), 0.5)
    assert abs(rep.lhs - 0.5) <= ANCHOR and abs(rep.rhs - 1 / 3) <= ANCHOR

    f = random_psd(4, 1)
    assert abs(verify_reverse_minkowski(f, D([0] * 4), 0.5).slack) <= ANCHOR
    assert abs(verify_reverse_minkowski(f, f, 0.5).slack) <= ANCHOR
    rep = verify_reverse_minkowski(D([1, 0]), D([0, 1]), 0.5)
    assert abs(rep.lhs - 1) <= ANCHOR and abs(rep.rhs - 0.5) <= ANCHOR
    assert abs(rep.slack - 0.5) <= ANCHOR

    assert abs(verify_variational(EYE(2), 0.5).params["attained"] - 1) <= ANCHOR
    rep = verify_variational(D([4, 1]), 0.5, samples=1000, seed=0)
    assert abs(rep.params["attained"] - 2.25) <= ANCHOR and rep.passed

    assert abs(verify_expansivity(KrausChannel.identity(2), D([3, 1]), 0.5).slack) <= ANCHOR
    rep = verify_expansivity(DepolarizingFamily(1, 0.0), D([4, 1]), 0.5)
    assert abs(rep.lhs - 2.5) <= ANCHOR and abs(rep.rhs - 2.25) <= ANCHOR

    assert sv_two_point(2, 2, 1.5, 0.5).slack == 0
    assert abs(sv_two_point(3, 1, 0.5, 0.5).slack) <= ANCHOR
    rep = sv_two_point(4, 1, 2, 0.5)
    assert abs(rep.lhs - 4) <= ANCHOR and abs(rep.rhs - 5.625) <= ANCHOR

    gen = DepolarizingGenerator(1)
    rep = verify_stroock_varopoulos(gen, EYE(2), 1.5, 0.5)
    assert abs(rep.lhs) <= ANCHOR and abs(rep.rhs) <= ANCHOR
    g = random_psd(2, 2, PositivityClass.POSITIVE_DEFINITE)
    assert abs(verify_stroock_varopoulos(gen, g, 0.7, 0.7).slack) <= ANCHOR

    assert abs(verify_gross(gen, EYE(2), 0.5).slack) <= ANCHOR
    assert abs(verify_gross(gen, g, 2.0).slack) <= ANCHOR
    assert verify_gross(gen, D([4, 1]), 0.5).passed

    assert abs(verify_plsi(gen, EYE(2), 0.5, 2.0).slack) <= ANCHOR


# -- 4 ----------------------------------------------------------------------

@pytest.mark.criterion(4)
def test_derivative_identity(acceptance):
    reports = derivative_campaign(trials=100, seed=404, h=1e-4, rtol=1e-5)
    worst = max(r.params["relative_error"] for r in reports)
    acceptance(f"max relative error {worst:.2e}")
    assert worst <= 1e-5
    assert all(r.passed for r in reports)


# -- 5 ----------------------------------------------------------------------

@pytest.mark.criterion(5)
@pytest.mark.parametrize("n", [1, 2, 3])
def test_lsi2_campaign(n, acceptance):
    reports = verify_campaign("lsi2", trials=TRIALS, seed=505, qubits=n)
    worst = min(r.rhs - r.lhs for r in reports)
    acceptance(f"n={n}: min 2E - Ent {worst:.2e}")
    assert worst >= -1e-9


@pytest.mark.criterion(5)
def test_lsi2_estimator(acceptance):
    best = {n: estimate_lsi2_constant(DepolarizingGenerator(n), restarts=10, seed=0)
            for n in (1, 2, 3)}
    acceptance("estimates " + ", ".join(f"n={n}: {v:.6f}" for n, v in best.items()))
    assert all(v <= 2 + 1e-8 for v in best.values())
    assert best[1] >= 1.5


# -- 6 ----------------------------------------------------------------------

@pytest.mark.criterion(6)
def test_mixing_campaign(acceptance):
    reports = mixing_campaign(trials=1000, seed=606)
    orth = sum(r.params["orthogonal"] for r in reports)
    assert orth >= 200
    assert {r.params["n"] for r in reports} == {2, 3, 4}
    assert all(r.params["links"]["bound"] >= -1e-9 for r in reports)
    _assert_campaign(reports, acceptance, f"{orth} orthogonal")


@pytest.mark.criterion(6)
def test_mixing_anchors():
    assert mixing_bound_corollary(0.5, 1.0, 1 / 3) == 0.25
    for n in (2, 3, 4):
        for sigma in (0.25, 0.5, 0.75):
            for alpha in (0.5, 1.0, 2.0):
                reports = mixing_campaign(trials=3, seed=n, qubits=n, sigma=sigma, alpha=alpha,
                                          gamma=0.0)
                for r in reports:
                    assert abs(r.lhs - sigma ** alpha) <= 1e-12


# -- 7 ----------------------------------------------------------------------

@pytest.mark.criterion(7)
@pytest.mark.parametrize("ineq", VERIFY_IDS)
def test_diagonal_equivalence(ineq, acceptance):
    worst = diagonal_equivalence_campaign(ineq, trials=1000, seed=707)
    acceptance(f"{ineq} {worst:.1e}")
    assert worst <= 1e-12


# -- 8 ----------------------------------------------------------------------

@pytest.mark.criterion(8)
@pytest.mark.parametrize("n", [1, 3, 5])
def test_nicd_product_matches_classical(n):
    for gamma in np.linspace(0.0, 1.0, 11):
        inst = make_instance(n, "product", "majority", float(gamma), 1)
        per = per_state_probabilities(n, inst.basis, inst.M, float(gamma))
        for k in range(1, 65):
            assert abs(np.mean(per ** k) - majority_nicd(n, k, float(gamma))) <= 1e-12


@pytest.mark.criterion(8)
def test_nicd_single_player_half():
    for i in range(100):
        n = 1 + i % 4
        basis = make_basis("haar", n, 800 + i)
        m = diagonal_measurement(basis, indicator_weights("random", n, i))
        gamma = float(np.random.default_rng(i).uniform())
        assert abs(np.mean(per_state_probabilities(n, basis, m, gamma)) - 0.5) <= 1e-12
    for fam in ("product", "ghz"):
        for n in (1, 2, 3, 4):
            res = success_probability(make_instance(n, fam, "dictator", 0.4, 1))
            assert abs(res.p_all_M - 0.5) <= 1e-12


@pytest.mark.criterion(8)
def test_nicd_contradiction_instances(acceptance):
    reports = nicd_campaign(trials=1000, seed=808)
    assert all(r.params["applicable"] for r in reports)
    links = [r.params["links"] for r in reports]
    with_mixing = sum("mixing" in lk for lk in links)
    for name in ("markov", "complement", "mixing"):
        vals = [lk[name] for lk in links if name in lk]
        assert min(vals) >= -1e-9, name
    _assert_campaign(reports, acceptance, f"mixing link active in {with_mixing}")


@pytest.mark.criterion(8)
def test_nicd_decomposition_all_k(acceptance):
    gamma, c = 0.5, 0.5
    worst = 0.0
    for k in range(2, 1_000_001):
        delta = envelope_delta(c, gamma, k)
        b = nicd_bound_rhs(delta, gamma, k, c=c)
        prod = b.factors[0] * b.factors[1] * b.factors[2]
        worst = max(worst, abs(prod - b.term_b) / b.term_b)
        # delta^(1/k) >= 1 - ln(1/delta)/k and the middle factor is bounded via k
        assert b.term_a >= 1 - math.log(1 / delta) / k
        assert b.factors[1] >= b.factor_bounds[1] * (1 - 1e-12)
    k = np.arange(2, 1_000_001, dtype=float)
    assert np.all((1 / k) ** (1 / k) > 1 - np.log(k) / k)
    acceptance(f"max factorization error {worst:.1e}")
    assert worst <= 1e-12


# -- 9 ----------------------------------------------------------------------

@pytest.mark.criterion(9)
def test_search_finds_violation(acceptance):
    witness = verify_reverse_hc(DepolarizingFamily(1, 1.0), D([1.5, 0.5]), 1.0, 0.5,
                                enforce_range=False)
    assert witness.slack == pytest.approx(-0.0669872981, abs=1e-9)
    res = minimize_slack("reverse-hc", 1.0, 0.5, 1.0, budget=2000, seed=0)
    acceptance(f"search slack {res.best_slack:.4f}, witness slack {witness.slack:.4f}")
    assert not res.in_region
    assert res.best_slack <= witness.slack


@pytest.mark.criterion(9)
def test_sharpness_sign_change(acceptance):
    p, q = 0.5, -1.0
    gstar = reverse_gamma_bound(p, q)
    grid = [round(0.3 + 0.05 * i, 10) for i in range(13)]
    prof = sharpness_profile("reverse-hc", p, q, grid, n=1, budget=2000, seed=0)
    assert prof["sign_change"] is not None
    a, b = prof["sign_change"]
    acceptance(f"sign change in [{a}, {b}], threshold {gstar}")
    assert gstar - 1e-12 <= a and b <= gstar + 0.2


@pytest.mark.criterion(9)
@pytest.mark.parametrize("ineq", ["reverse-hc", "forward-hc", "strong-reverse-holder"])
def test_search_sound_inside_region(ineq):
    pairs = {"reverse-hc": [(0.5, -1.0), (0.9, 0.2), (-0.5, -2.0), (0.0, -3.0)],
             "forward-hc": [(2.0, 4.0), (1.2, 5.0), (1.5, 1.5)],
             "strong-reverse-holder": [(0.5, 0.5), (0.0, 0.0), (-1.0, 0.5)]}[ineq]
    bound = {"reverse-hc": reverse_gamma_bound, "forward-hc": forward_gamma_bound,
             "strong-reverse-holder": strong_holder_gamma_bound}[ineq]
    for p, q in pairs:
        gamma = min(1.0, bound(p, q))
        for n in (1, 2):
            try:
                res = minimize_slack(ineq, p, q, gamma, n=n, budget=1500, seed=9)
            except SoundnessError as exc:  # pragma: no cover - hard failure
                pytest.fail(str(exc))
            assert res.in_region


# -- 10 ---------------------------------------------------------------------

CLI_RUNS = [
    ["verify", "--ineq", "reverse-hc", "--qubits", "2", "--trials", "200", "--seed", "7"],
    ["verify", "--ineq", "sv", "--dim", "4", "--trials", "100", "--seed", "3"],
    ["lsi", "--qubits", "1", "--restarts", "3", "--seed", "2"],
    ["derivative", "--qubits", "1", "--trials", "10", "--seed", "5"],
    ["mix", "--qubits", "3", "--trials", "20", "--seed", "4"],
    ["nicd", "--basis", "haar", "--qubits", "3", "--k", "2", "8", "--gamma", "0.3", "0.6",
     "--c", "1"],
    ["search", "--ineq", "reverse-hc", "--p", "0.5", "--q", "-1", "--gamma-grid", "0.4:0.7:4",
     "--budget", "300"],
]


@pytest.mark.criterion(10)
@pytest.mark.parametrize("argv", CLI_RUNS, ids=lambda a: a[0] + ":" + a[2])
def test_cli_byte_identical(argv, tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"run{i}.json"
        res = subprocess.run([sys.executable, "-m", "qrhc", *argv, "--no-timestamp",
                              "--out", str(path)], capture_output=True)
        assert res.returncode == 0, res.stderr
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert len(outs[0]) > 0


@pytest.mark.criterion(10)
def test_cli_csv_byte_identical(tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"t{i}.csv"
        subprocess.run([sys.executable, "-m", "qrhc", "nicd", "--basis", "product", "--qubits",
                        "3", "--k", "8", "--gamma", "0.6", "--out", str(path)], check=True)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]

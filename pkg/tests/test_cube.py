import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qrhc.channels import DepolarizingFamily, DepolarizingGenerator
from qrhc.cube import (
    CubeFunction,
    classical_hc_check,
    cube_dirichlet,
    cube_entropy,
    cube_generator,
    dictator_table,
    lp_norm,
    majority_nicd,
    majority_table,
    mean,
    noise_operator,
)
from qrhc.errors import ContractError, DomainError
from qrhc.functionals import dirichlet_form, entropy
from qrhc.linalg import HermitianOperator
from qrhc.pnorms import pnorm

cube_values = st.integers(1, 4).flatmap(
    lambda n: st.lists(st.floats(0.01, 10), min_size=2 ** n, max_size=2 ** n))


def test_noise_operator_examples():
    f = np.array([3.0, 1.0, 4.0, 1.0])
    assert np.array_equal(noise_operator(f, 1.0).values, f)
    assert np.allclose(noise_operator(f, 0.0).values, f.mean())
    # parity is an eigenfunction with eigenvalue gamma^n
    chi = np.array([1.0, -1.0, -1.0, 1.0])
    assert np.allclose(noise_operator(chi, 0.5).values, 0.25 * chi)


def test_lp_norm_anchors():
    assert lp_norm([4, 1], 0.5) == pytest.approx(2.25, abs=1e-12)
    assert lp_norm([4, 1], 0) == pytest.approx(2.0, abs=1e-12)
    assert lp_norm([4, 1], -math.inf) == 1
    with pytest.raises(DomainError):
        lp_norm([1, -1], 0.5)
    with pytest.raises(DomainError):
        lp_norm([1, 0], -1)


@settings(max_examples=50, deadline=None)
@given(cube_values, st.floats(0, 1), st.floats(0, 1))
def test_noise_semigroup_and_mean(vals, g1, g2):
    f = np.array(vals)
    a = noise_operator(noise_operator(f, g1), g2).values
    b = noise_operator(f, g1 * g2).values
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)
    assert mean(noise_operator(f, g1)) == pytest.approx(mean(f), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(cube_values, st.floats(0, 1))
def test_diagonal_embedding_matches_depolarizing(vals, gamma):
    f = np.array(vals)
    n = int(math.log2(f.size))
    quantum = DepolarizingFamily(n, gamma).apply(HermitianOperator.diag(f)).matrix
    assert np.allclose(quantum, np.diag(noise_operator(f, gamma).values), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(cube_values, st.sampled_from([-2.0, -0.5, 0.0, 0.5, 1.0, 3.0, math.inf]))
def test_lp_norm_matches_spectral_norm(vals, p):
    f = np.array(vals)
    assert lp_norm(f, p) == pytest.approx(pnorm(HermitianOperator.diag(f), p), rel=1e-12)


def test_generator_and_entropy_match_quantum():
    rng = np.random.default_rng(3)
    f = rng.uniform(0.1, 2, 8)
    g = rng.uniform(0.1, 2, 8)
    gen = DepolarizingGenerator(3)
    assert np.allclose(np.diag(gen.apply(HermitianOperator.diag(g)).matrix), cube_generator(g))
    q = dirichlet_form(gen, HermitianOperator.diag(f), HermitianOperator.diag(g))
    assert cube_dirichlet(f, g) == pytest.approx(q, rel=1e-12)
    assert cube_entropy(f) == pytest.approx(entropy(HermitianOperator.diag(f)), rel=1e-10)


def test_classical_hc_examples():
    rep = classical_hc_check([1.5, 0.5], 1, 0.5, 1.0, "reverse", check_range=False)
    assert not rep.params["in_region"]
    assert rep.slack == pytest.approx(-0.0669872981, abs=1e-9)
    assert not rep.passed
    with pytest.raises(ContractError):
        classical_hc_check([1.5, 0.5], 1, 0.5, 1.0, "reverse")
    rep = classical_hc_check([2.0, 0.1], 0.5, -1.0, 0.5, "reverse")
    assert rep.passed
    rep = classical_hc_check([0.7, 0.7], 0.3, -2.0, 0.4, "reverse")
    assert rep.slack == pytest.approx(0, abs=1e-15)
    rep = classical_hc_check([2.0, 0.5, 1.0, 3.0], 0.5, -1.0, 0.5, "reverse")
    assert rep.params["in_region"] and rep.passed
    rep = classical_hc_check([2.0, -0.5, 1.0, 3.0], 2, 4, 1 / math.sqrt(3), "forward")
    assert rep.passed


@settings(max_examples=100, deadline=None)
@given(cube_values, st.floats(-3, 0.99), st.floats(-3, 0.99))
def test_classical_reverse_hc_property(vals, a, b):
    p, q = max(a, b), min(a, b)
    gamma = math.sqrt((1 - p) / (1 - q))
    assert classical_hc_check(np.array(vals), p, q, gamma, "reverse", rtol=1e-9).passed


def test_majority_nicd_examples():
    assert majority_nicd(1, 2, 0.5) == pytest.approx(0.3125, abs=1e-15)
    assert majority_nicd(3, 1, 0.3) == pytest.approx(0.5, abs=1e-15)
    assert majority_nicd(5, 4, 1.0) == pytest.approx(0.5, abs=1e-15)
    assert majority_nicd(5, 4, 0.0) == pytest.approx(0.5 ** 4, abs=1e-15)
    with pytest.raises(ContractError):
        majority_nicd(2, 3, 0.5)


def test_majority_nicd_by_enumeration():
    # brute force over (x, noisy copies) for n = 3, k = 2
    n, gamma = 3, 0.4
    maj = majority_table(n)
    pm = noise_operator(maj, gamma).values
    assert majority_nicd(n, 2, gamma) == pytest.approx(np.mean(pm ** 2), abs=1e-15)


def test_tables_and_json():
    assert list(majority_table(3)) == [0, 0, 0, 1, 0, 1, 1, 1]
    assert list(dictator_table(2)) == [0, 0, 1, 1]
    f = CubeFunction([1.0, 2.0])
    assert f.n == 1
    assert np.array_equal(CubeFunction.from_json(f.to_json()).values, f.values)
    with pytest.raises(ValueError):
        CubeFunction([1.0, 2.0, 3.0])

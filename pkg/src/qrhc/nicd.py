"""Exact simulation of quantum non-interactive correlation distillation.

A referee picks a uniformly random state ``|psi>`` from an orthonormal basis
of ``n`` qubits and sends each of ``k`` players an independently depolarized
copy. Every player measures the same balanced two-outcome measurement
``{M, I - M}``; the players win when all outcomes agree.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .channels import DepolarizingFamily
from .errors import CapacityError, ContractError, DomainError
from .linalg import HermitianOperator, as_operator, make_rng, random_unitary
from .mixing import mixing_bound_corollary
from .verifiers import DEFAULT_RTOL, make_report

MAX_QUBITS = 10
BASIS_FAMILIES = ("product", "ghz", "haar")
M_FAMILIES = ("majority", "dictator", "random")

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)


def _check_qubits(n):
    if n < 1:
        raise ContractError("need at least one qubit")
    if n > MAX_QUBITS:
        raise CapacityError(f"at most {MAX_QUBITS} qubits supported, got {n}")


def product_basis(n):
    _check_qubits(n)
    return np.eye(2 ** n, dtype=complex)


def ghz_basis(n):
    """Computational basis pushed through H on qubit 1 and then CNOT(j, j+1), j = 1..n-1.

    Column ``0`` is the GHZ state ``(|0...0> + |1...1>)/sqrt(2)``.
    """
    _check_qubits(n)
    d = 2 ** n
    u = np.kron(_H, np.eye(d // 2))
    for j in range(n - 1):
        perm = np.arange(d)
        control = 1 << (n - 1 - j)
        target = 1 << (n - 2 - j)
        flip = (perm & control) != 0
        perm[flip] ^= target
        cnot = np.eye(d, dtype=complex)[perm]
        u = cnot @ u
    return u


def haar_basis(n, seed):
    _check_qubits(n)
    return random_unitary(2 ** n, seed)


def make_basis(family, n, seed=0):
    if family == "product":
        return product_basis(n)
    if family == "ghz":
        return ghz_basis(n)
    if family == "haar":
        return haar_basis(n, seed)
    raise ContractError(f"unknown basis family {family!r}")


def diagonal_measurement(basis, weights):
    """``M = sum_x w_x |b_x><b_x|`` for basis columns ``b_x``."""
    w = np.asarray(weights, dtype=float)
    return HermitianOperator((basis * w) @ basis.conj().T)


def indicator_weights(family, n, seed=0):
    """Balanced 0/1 weights over basis labels.

    ``majority`` needs odd ``n``; ``dictator`` selects the first bit;
    ``random`` is a uniformly random half of the labels.
    """
    d = 2 ** n
    if family == "majority":
        if n % 2 == 0:
            raise ContractError("majority needs an odd number of qubits")
        weights = np.array([bin(i).count("1") for i in range(d)])
        return (weights > n / 2).astype(float)
    if family == "dictator":
        return ((np.arange(d) >> (n - 1)) & 1).astype(float)
    if family == "random":
        rng = make_rng(seed)
        w = np.zeros(d)
        w[rng.permutation(d)[: d // 2]] = 1.0
        return w
    raise ContractError(f"unknown measurement family {family!r}")


@dataclass(frozen=True)
class NicdInstance:
    n: int
    basis: np.ndarray
    M: HermitianOperator
    gamma: float
    k: int

    def __post_init__(self):
        _check_qubits(self.n)
        d = 2 ** self.n
        b = np.asarray(self.basis, dtype=complex)
        if b.shape != (d, d) or np.max(np.abs(b.conj().T @ b - np.eye(d))) > 1e-10:
            raise ContractError("basis must be a unitary 2^n x 2^n matrix")
        m = as_operator(self.M)
        if m.dim != d:
            raise ContractError("measurement dimension mismatch")
        lam = m.eigenvalues
        if lam[-1] < -1e-10 or lam[0] > 1 + 1e-10:
            raise ContractError("measurement spectrum must lie in [0, 1]")
        if abs(np.trace(m.matrix).real / d - 0.5) > 1e-10:
            raise ContractError("measurement must be balanced, tau(M) = 1/2")
        if not 0.0 <= self.gamma <= 1.0:
            raise DomainError(f"gamma must lie in [0, 1], got {self.gamma}")
        if int(self.k) != self.k or self.k < 1:
            raise ContractError("k must be a positive integer")
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "M", m)
        object.__setattr__(self, "k", int(self.k))


@dataclass(frozen=True)
class NicdResult:
    p_all_M: float
    p_all_notM: float
    per_state: np.ndarray


def per_state_probabilities(n, basis, M, gamma):
    """``tr(M D(|psi><psi|))`` for every basis column.

    Evaluated as ``<psi| D(M) |psi>``; the depolarizing channel is its own
    adjoint, so a single channel application covers all basis states.
    """
    dm = DepolarizingFamily(n, gamma).apply(M).matrix
    vals = np.einsum("ix,ij,jx->x", basis.conj(), dm, basis).real
    return np.clip(vals, 0.0, 1.0)


def success_probability(inst):
    """Exact agreement probabilities of the ``k``-player game."""
    per = per_state_probabilities(inst.n, inst.basis, inst.M, inst.gamma)
    p_m = float(np.mean(per ** inst.k))
    p_not = float(np.mean((1.0 - per) ** inst.k))
    return NicdResult(p_m, p_not, per)


@dataclass(frozen=True)
class NicdBound:
    term_a: float
    term_b: float
    combined: float
    nu: float | None
    factors: tuple | None
    factor_bounds: tuple | None


def nicd_bound_rhs(delta, gamma, k, c=None):
    """The two competing terms of the agreement bound.

    ``term_a = delta^(1/k)`` and
    ``term_b = delta^((1/sqrt(ln(1/delta)) + gamma)^2 / (1 - gamma^2))``.

    For ``gamma > 0`` with ``nu = 1/gamma^2 - 1`` and ``L = ln(1/delta)``,
    ``term_b`` factors exactly as
    ``e^(-1/(1-g^2)) * e^(-2 g sqrt(L) / (1-g^2)) * delta^(g^2/(1-g^2))``
    and ``g^2/(1-g^2) = 1/nu``. If ``delta`` is ``(e^(c sqrt(ln k))/k)^nu``
    the middle factor is bounded below by ``e^(-2 g sqrt(nu ln k)/(1-g^2))``
    (with equality at ``c = 0``); ``factor_bounds`` holds those ``k``-based
    factors when ``c`` is given.
    """
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if not 0 <= gamma < 1:
        raise DomainError(f"gamma must lie in [0, 1), got {gamma}")
    if k < 1:
        raise DomainError("k must be at least 1")
    big_l = math.log(1.0 / delta)
    g2 = 1.0 - gamma * gamma
    term_a = delta ** (1.0 / k)
    term_b = delta ** ((1.0 / math.sqrt(big_l) + gamma) ** 2 / g2)
    nu = factors = bounds = None
    if gamma > 0:
        nu = 1.0 / (gamma * gamma) - 1.0
        factors = (math.exp(-1.0 / g2), math.exp(-2.0 * gamma * math.sqrt(big_l) / g2),
                   delta ** (1.0 / nu))
        if c is not None:
            bounds = (factors[0], math.exp(-2.0 * gamma * math.sqrt(nu * math.log(k)) / g2),
                      factors[2])
    return NicdBound(term_a, term_b, term_a + term_b, nu, factors, bounds)


def envelope_delta(c, gamma, k):
    """``(e^(c sqrt(ln k)) / k)^nu`` with ``nu = 1/gamma^2 - 1``."""
    if not 0 < gamma <= 1:
        raise DomainError("envelope needs gamma in (0, 1]")
    nu = 1.0 / (gamma * gamma) - 1.0
    return (math.exp(c * math.sqrt(math.log(k))) / k) ** nu


def verify_nicd_contradiction(inst, delta, rtol=DEFAULT_RTOL):
    """Replay the finite inequalities of the agreement upper-bound argument.

    ``S`` is spanned by basis states with ``(tr M D(|psi><psi|))^k >= delta``
    and ``sigma = dim S / 2^n``. Checked, each as a signed slack:

    * ``markov``: ``sigma >= delta`` (requires ``p_all_M >= 2 delta``);
    * ``complement``: ``tr((I - M) D(rho_S)) <= 1 - delta^(1/k)``;
    * ``mixing``: ``tr((I - M) D(rho_S)) >= sigma^((sqrt(a) + g)^2/(1 - g^2))``
      with ``a = 1/log2(1/sigma)``, plus the weaker ``delta`` form
      ``>= delta^((1/sqrt(ln 1/delta) + g)^2/(1 - g^2))``.

    The mixing checks are skipped (flagged) when ``sigma = 1`` or ``gamma``
    is too close to 1 for the bound. If ``p_all_M < 2 delta`` the report
    passes vacuously with ``params["applicable"] = False``.
    """
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    res = success_probability(inst)
    d = 2 ** inst.n
    params = {"n": inst.n, "k": inst.k, "gamma": inst.gamma, "delta": delta,
              "p_all_M": res.p_all_M}
    if res.p_all_M < 2 * delta:
        params["applicable"] = False
        return make_report("nicd-contradiction", params, res.p_all_M, 2 * delta, 0.0, rtol)
    params["applicable"] = True
    chosen = res.per_state ** inst.k >= delta
    dim_s = int(np.count_nonzero(chosen))
    sigma = dim_s / d
    links = {"markov": sigma - delta}
    # complement of M on rho_S: per-state values average over S
    comp = float(np.mean(1.0 - res.per_state[chosen]))
    links["complement"] = (1.0 - delta ** (1.0 / inst.k)) - comp
    skipped = sigma >= 1.0 or inst.gamma > 1.0 - 1e-6
    if not skipped:
        alpha = 1.0 / math.log2(1.0 / sigma)
        links["mixing"] = comp - mixing_bound_corollary(sigma, alpha, inst.gamma)
        # ln(1/sigma) (sqrt(a) + g)^2 = (sqrt(ln 2) + g sqrt(ln 1/sigma))^2, which
        # sigma >= delta keeps below (1 + g sqrt(ln 1/delta))^2
        links["mixing_delta"] = comp - nicd_bound_rhs(delta, inst.gamma, inst.k).term_b
    params.update({"sigma": sigma, "dim_s": dim_s, "complement_prob": comp,
                   "mixing_skipped": skipped,
                   "links": {key: float(v) for key, v in links.items()}})
    slack = min(links.values())
    return make_report("nicd-contradiction", params, comp, 1.0 - delta ** (1.0 / inst.k), slack, rtol)


def make_instance(n, basis_family, m_family, gamma, k, seed=0):
    basis = make_basis(basis_family, n, seed)
    w = indicator_weights(m_family, n, seed + 1)
    return NicdInstance(n, basis, diagonal_measurement(basis, w), gamma, k)


SWEEP_COLUMNS = ("basis_id", "M_id", "n", "k", "gamma", "p_all_M", "p_all_notM")


def entangled_basis_sweep(n, ks, gammas, basis_families=BASIS_FAMILIES, m_families=("dictator",),
                          seed=0, c=None):
    """Agreement probabilities across bases, measurements, ``k`` and ``gamma``.

    Rows carry ``SWEEP_COLUMNS``; with ``c`` given each row also carries the
    envelope ``(e^(c sqrt(ln k))/k)^(1/gamma^2 - 1)`` (``None`` where undefined).
    """
    rows = []
    for bf in basis_families:
        basis = make_basis(bf, n, seed)
        basis_id = f"haar:{seed}" if bf == "haar" else bf
        for mf in m_families:
            w = indicator_weights(mf, n, seed + 1)
            m = diagonal_measurement(basis, w)
            m_id = f"random:{seed + 1}" if mf == "random" else mf
            for gamma in gammas:
                per = per_state_probabilities(n, basis, m, gamma)
                for k in ks:
                    row = {"basis_id": basis_id, "M_id": m_id, "n": n, "k": int(k),
                           "gamma": float(gamma),
                           "p_all_M": float(np.mean(per ** k)),
                           "p_all_notM": float(np.mean((1.0 - per) ** k))}
                    if c is not None:
                        row["envelope"] = (envelope_delta(c, gamma, k)
                                           if 0 < gamma and k > 1 else None)
                    rows.append(row)
    return rows


def rows_to_csv(rows):
    """CSV text with ``repr`` floats (locale independent)."""
    if not rows:
        return ""
    fields = list(rows[0].keys())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        w.writerow(["" if r[f] is None else (repr(r[f]) if isinstance(r[f], float) else r[f])
                    for f in fields])
    return buf.getvalue()

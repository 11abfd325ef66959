"""Unital quantum channels, Lindblad generators and their semigroups.

Superoperators act on column-stacked operators: ``vec(X)`` stacks the
columns of ``X`` (``X.reshape(-1, order="F")``), so that
``vec(A X B) = (B^T kron A) vec(X)`` and a Kraus channel has superoperator
matrix ``sum_a conj(A_a) kron A_a``.

Two generator constructions are provided and kept distinct:

* ``LindbladGenerator(channel, c0)`` is ``c0 * (id - T)`` for one unital
  reversible channel ``T``; its semigroup is evaluated by exponentiating the
  superoperator.
* ``DepolarizingGenerator(n)`` is the site sum ``sum_k (id - D_0^{(k)})``
  whose semigroup is ``D_{exp(-t)}`` on every qubit. It equals
  ``n * (id - Tbar)`` with ``Tbar`` the average of the single-site full
  depolarizers, which ``as_lindblad`` returns explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DomainError
from .linalg import (
    PAULIS,
    HermitianOperator,
    as_operator,
    check_dim,
    make_rng,
    ntrace_product,
    random_hermitian,
    random_unitary,
)

UNITAL_ATOL = 1e-10
DEFAULT_EPS_PRIM = 1e-8


def _hermitian(m):
    return HermitianOperator(m, check=False)


def vec(m):
    return np.asarray(m).reshape(-1, order="F")


def unvec(v, d):
    return np.asarray(v).reshape((d, d), order="F")


class KrausChannel:
    """Completely positive trace-preserving map ``f -> sum_a A_a f A_a^dagger``.

    Raises ``ContractError`` if ``sum_a A_a^dagger A_a`` differs from the
    identity by more than ``atol``. Unitality is recorded in ``is_unital``.
    """

    def __init__(self, kraus_ops, atol=UNITAL_ATOL):
        ops = np.array(kraus_ops, dtype=complex)
        if ops.ndim == 2:
            ops = ops[None]
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2]:
            raise ValueError(f"Kraus operators must have shape (m, d, d), got {ops.shape}")
        check_dim(ops.shape[1])
        d = ops.shape[1]
        tp = np.einsum("aji,ajk->ik", ops.conj(), ops)
        dev = np.max(np.abs(tp - np.eye(d)))
        if dev > atol:
            raise ContractError(f"Kraus operators are not trace preserving (deviation {dev:.3e})")
        un = np.einsum("aij,akj->ik", ops, ops.conj())
        self.unital_deviation = float(np.max(np.abs(un - np.eye(d))))
        self.is_unital = self.unital_deviation <= atol
        ops.setflags(write=False)
        self.kraus_ops = ops
        self._superop = None

    @property
    def dim(self):
        return self.kraus_ops.shape[1]

    @classmethod
    def identity(cls, d):
        return cls(np.eye(d, dtype=complex)[None])

    @classmethod
    def unitary(cls, u):
        return cls(np.asarray(u, dtype=complex)[None])

    def apply(self, f):
        return kraus_apply(self, f)

    @property
    def superoperator(self):
        if self._superop is None:
            ops = self.kraus_ops
            s = sum(np.kron(a.conj(), a) for a in ops)
            s.setflags(write=False)
            self._superop = s
        return self._superop

    def to_json(self):
        return {
            "type": "kraus",
            "dim": self.dim,
            "ops": [[[[z.real, z.imag] for z in row] for row in a] for a in self.kraus_ops],
        }

    def __repr__(self):
        return f"KrausChannel(dim={self.dim}, n_ops={len(self.kraus_ops)})"


@dataclass(frozen=True)
class DepolarizingFamily:
    """``D_gamma`` applied independently to each of ``n`` qubits."""

    n: int
    gamma: float

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise DomainError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.n < 1:
            raise ValueError("need at least one qubit")
        check_dim(2 ** self.n)

    @property
    def dim(self):
        return 2 ** self.n

    is_unital = True

    def apply(self, f):
        return depolarize_apply(self, f)

    def to_kraus(self):
        """Kraus form: tensor products of the Pauli-weighted single-qubit set."""
        if self.n > 5:
            raise ContractError("Kraus form limited to n <= 5 qubits (4^n operators)")
        single = depolarizing_kraus_ops(self.gamma)
        ops = single
        for _ in range(self.n - 1):
            ops = np.array([np.kron(a, b) for a in ops for b in single])
        return KrausChannel(ops)

    @property
    def superoperator(self):
        return self.to_kraus().superoperator

    def to_json(self):
        return {"type": "depolarizing", "n": self.n, "gamma": self.gamma}


def depolarizing_kraus_ops(gamma):
    """Single-qubit Kraus set ``sqrt((1+3g)/4) I, sqrt((1-g)/4) sigma_{x,y,z}``."""
    w0 = math.sqrt((1.0 + 3.0 * gamma) / 4.0)
    w1 = math.sqrt((1.0 - gamma) / 4.0)
    return np.array([w0 * PAULIS[0], w1 * PAULIS[1], w1 * PAULIS[2], w1 * PAULIS[3]])


def channel_from_json(obj):
    kind = obj.get("type")
    if kind == "depolarizing":
        return DepolarizingFamily(int(obj["n"]), float(obj["gamma"]))
    if kind == "kraus":
        ops = np.array(obj["ops"], dtype=float)
        ops = ops[..., 0] + 1j * ops[..., 1]
        ch = KrausChannel(ops)
        if ch.dim != int(obj["dim"]):
            raise ValueError("dim field does not match the Kraus operators")
        return ch
    raise ValueError(f"unknown channel type {kind!r}")


def _n_qubits(d):
    n = d.bit_length() - 1
    if 2 ** n != d:
        raise ValueError(f"dimension {d} is not a power of two")
    return n


def _replace_site(m, n, k):
    """``tr_k(m) kron I/2`` placed back on qubit ``k`` (qubit 0 most significant)."""
    a, b = 2 ** k, 2 ** (n - k - 1)
    t = m.reshape(a, 2, b, a, 2, b)
    tr = np.einsum("aibcid->abcd", t)
    out = np.einsum("abcd,ij->aibcjd", tr, np.eye(2) / 2.0)
    return out.reshape(m.shape)


def depolarize_apply(family, f):
    """``D_gamma^{(x)n}(f)``, one qubit at a time.

    Each step maps ``f -> gamma f + (1-gamma) tr_k(f) (x) I/2`` on qubit ``k``.
    """
    f = as_operator(f)
    if f.dim != family.dim:
        raise ValueError(f"operator dimension {f.dim} does not match 2^{family.n}")
    g = family.gamma
    m = f.matrix
    if g != 1.0:
        for k in range(family.n):
            m = g * m + (1.0 - g) * _replace_site(m, family.n, k)
    return _hermitian(m)


def kraus_apply(channel, f):
    f = as_operator(f)
    if f.dim != channel.dim:
        raise ValueError(f"operator dimension {f.dim} does not match channel dimension {channel.dim}")
    ops = channel.kraus_ops
    m = np.einsum("aij,jk,alk->il", ops, f.matrix, ops.conj(), optimize=True)
    return _hermitian(m)


@dataclass(frozen=True)
class ReversibilityReport:
    reversible: bool
    max_deviation: float
    superoperator_deviation: float


def check_reversible(channel, trials=20, seed=0, atol=1e-10):
    """Test ``tau(f T(g)) == tau(T(f) g)`` on random Hermitian pairs.

    Also measures ``max|S - S^dagger|`` for the superoperator matrix ``S``,
    the equivalent self-adjointness criterion.
    """
    rng = make_rng(seed)
    d = channel.dim
    dev = 0.0
    for _ in range(trials):
        f = random_hermitian(d, rng)
        g = random_hermitian(d, rng)
        lhs = ntrace_product(f, channel.apply(g))
        rhs = ntrace_product(channel.apply(f), g)
        dev = max(dev, abs(lhs - rhs))
    s = channel.superoperator
    sdev = float(np.max(np.abs(s - s.conj().T)))
    return ReversibilityReport(dev <= atol and sdev <= atol, dev, sdev)


@dataclass(frozen=True)
class PrimitivityReport:
    primitive: bool
    peripheral: tuple
    unit_multiplicity: int


def check_primitive(channel, eps=DEFAULT_EPS_PRIM):
    """Peripheral-spectrum test on the superoperator.

    Primitive iff eigenvalue 1 is simple and every other eigenvalue has
    modulus below ``1 - eps``.
    """
    lam = np.linalg.eigvals(channel.superoperator)
    mods = np.abs(lam)
    peripheral = lam[mods >= 1.0 - eps]
    unit = int(np.sum(np.abs(peripheral - 1.0) < eps))
    primitive = unit == 1 and len(peripheral) == 1
    order = np.argsort(-np.abs(peripheral))
    return PrimitivityReport(primitive, tuple(complex(z) for z in peripheral[order]), unit)


def expm(a):
    """Matrix exponential by scaling and squaring a truncated Taylor series."""
    a = np.asarray(a, dtype=complex)
    d = a.shape[0]
    norm = np.linalg.norm(a, 1)
    s = max(0, int(math.ceil(math.log2(norm))) + 1) if norm > 0 else 0
    b = a / (2.0 ** s)
    result = np.eye(d, dtype=complex)
    term = np.eye(d, dtype=complex)
    for k in range(1, 60):
        term = term @ b / k
        result = result + term
        if np.linalg.norm(term, 1) <= 1e-17 * np.linalg.norm(result, 1):
            break
    for _ in range(s):
        result = result @ result
    return result


class LindbladGenerator:
    """Generator ``L = c0 (id - T)`` of a reversible unital semigroup."""

    def __init__(self, channel, c0=1.0):
        if c0 <= 0:
            raise ContractError("c0 must be positive")
        if not channel.is_unital:
            raise ContractError("the base channel must be unital")
        if isinstance(channel, KrausChannel):
            rep = check_reversible(channel, trials=4)
            if not rep.reversible:
                raise ContractError(
                    f"the base channel must be reversible (deviation {rep.max_deviation:.3e})")
        self.channel = channel
        self.c0 = float(c0)
        self._superop = None

    @property
    def dim(self):
        return self.channel.dim

    def apply(self, f):
        f = as_operator(f)
        return _hermitian(self.c0 * (f.matrix - self.channel.apply(f).matrix))

    @property
    def superoperator(self):
        if self._superop is None:
            d = self.dim
            s = self.c0 * (np.eye(d * d) - self.channel.superoperator)
            s.setflags(write=False)
            self._superop = s
        return self._superop

    def semigroup(self, t, f):
        f = as_operator(f)
        if t == 0:
            return f
        v = expm(-t * self.superoperator) @ vec(f.matrix)
        return _hermitian(unvec(v, f.dim))

    def base_channel(self):
        return self.channel


class DepolarizingGenerator:
    """Site-sum generator ``c0 * sum_k (f - tr_k(f) (x) I/2)`` on ``n`` qubits."""

    def __init__(self, n, c0=1.0):
        if c0 <= 0:
            raise ContractError("c0 must be positive")
        check_dim(2 ** n)
        self.n = int(n)
        self.c0 = float(c0)
        self._lindblad = None

    @property
    def dim(self):
        return 2 ** self.n

    def apply(self, f):
        f = as_operator(f)
        m = f.matrix
        out = self.n * m
        for k in range(self.n):
            out = out - _replace_site(m, self.n, k)
        return _hermitian(self.c0 * out)

    def semigroup(self, t, f):
        return depolarize_apply(DepolarizingFamily(self.n, math.exp(-self.c0 * t)), f)

    def as_lindblad(self):
        """Equivalent ``LindbladGenerator(Tbar, c0 * n)``."""
        if self._lindblad is None:
            ops = []
            d = self.dim
            for k in range(self.n):
                left = np.eye(2 ** k)
                right = np.eye(2 ** (self.n - k - 1))
                for s in PAULIS:
                    ops.append(np.kron(np.kron(left, s), right) / (2.0 * math.sqrt(self.n)))
            self._lindblad = LindbladGenerator(KrausChannel(np.array(ops).reshape(-1, d, d)),
                                               c0=self.c0 * self.n)
        return self._lindblad

    @property
    def superoperator(self):
        return self.as_lindblad().superoperator

    def base_channel(self):
        return self.as_lindblad().channel


def generator_apply(generator, f):
    return generator.apply(f)


def semigroup_apply(generator, t, f):
    """``exp(-t L)(f)`` for ``t >= 0``."""
    if t < 0:
        raise DomainError(f"semigroup time must be non-negative, got {t}")
    return generator.semigroup(float(t), f)


@dataclass(frozen=True)
class SemigroupChannel:
    """The channel ``T_t = exp(-t L)`` at a fixed time."""

    generator: object
    t: float
    is_unital: bool = field(default=True, init=False)

    @property
    def dim(self):
        return self.generator.dim

    def apply(self, f):
        return semigroup_apply(self.generator, self.t, f)


def random_unital_channel(d, seed, n_ops=3):
    """Random mixture of Haar unitaries (unital, generally not reversible)."""
    rng = make_rng(seed)
    w = rng.dirichlet(np.ones(n_ops))
    return KrausChannel([math.sqrt(wi) * random_unitary(d, rng) for wi in w])


def random_reversible_channel(d, seed, n_ops=3):
    """Random mixture of Hermitian unitaries ``V diag(+-1) V^dagger`` with ``d // 2`` minus signs.

    The Kraus operators are Hermitian, so the channel is unital and
    reversible; with the identity among the unitaries it is primitive for
    generic draws. Each weight is at least ``0.2 / (n_ops + 1)`` so the
    spectral gap cannot collapse to rounding level.
    """
    rng = make_rng(seed)
    w = 0.2 / (n_ops + 1) + 0.8 * rng.dirichlet(np.ones(n_ops + 1))
    ops = [math.sqrt(w[0]) * np.eye(d, dtype=complex)]
    for wi in w[1:]:
        v = random_unitary(d, rng)
        # balanced signs: low-rank reflections would leave a common fixed subspace
        signs = np.ones(d)
        signs[rng.permutation(d)[: d // 2]] = -1.0
        ops.append(math.sqrt(wi) * (v * signs) @ v.conj().T)
    return KrausChannel(ops)

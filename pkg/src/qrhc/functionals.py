"""Entropy, Dirichlet forms, induced transition matrices and LSI estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import KrausChannel, check_primitive, check_reversible
from .errors import ContractError, DomainError
from .linalg import (
    HermitianOperator,
    as_operator,
    make_rng,
    ntrace,
    ntrace_product,
    psd_eigenvalues,
    unitary_from_generator,
)


def _xlogx_minus(x):
    """``x ln x - x + 1`` elementwise, accurate near ``x = 1``; ``0`` at ``x = 0``."""
    x = np.asarray(x, dtype=float)
    u = x - 1.0
    out = np.empty_like(x)
    small = np.abs(u) < 1e-3
    us = u[small]
    # (1+u) log1p(u) - u = u^2/2 - u^3/6 + u^4/12 - u^5/20 + ...
    out[small] = us * us * (0.5 + us * (-1.0 / 6 + us * (1.0 / 12 + us * (-1.0 / 20 + us / 30))))
    big = ~small
    xb = x[big]
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.where(xb > 0, xb * np.log(np.where(xb > 0, xb, 1.0)), 0.0) - xb + 1.0
    out[big] = vals
    return out


def spectral_entropy(lam):
    """``Ent`` of a non-negative vector under the uniform average."""
    lam = np.asarray(lam, dtype=float)
    m = float(np.mean(lam))
    if m <= 0:
        raise DomainError("entropy needs tau(f) > 0")
    return m * float(np.mean(_xlogx_minus(lam / m)))


def entropy(f):
    """``Ent(f) = tau(f ln f) - tau(f) ln tau(f)`` for positive semidefinite ``f``.

    Evaluated as ``tau(f) * tau(phi(f / tau(f)))`` with
    ``phi(x) = x ln x - x + 1``, which avoids cancellation for nearly flat
    ``f``. ``0 ln 0 = 0``.
    """
    f = as_operator(f)
    return spectral_entropy(psd_eigenvalues(f))


def dirichlet_form(generator, f, g):
    """``E_L(f, g) = tau(f L(g))`` for Hermitian ``f``, ``g``."""
    f = as_operator(f)
    g = as_operator(g)
    if f.dim != g.dim or f.dim != generator.dim:
        raise ValueError("dimension mismatch in Dirichlet form")
    return ntrace_product(f, generator.apply(g))


def centered(f):
    f = as_operator(f)
    return HermitianOperator(f.matrix - ntrace(f) * np.eye(f.dim), check=False)


@dataclass(frozen=True)
class InducedTransitionMatrix:
    """``P_ij = sum_a |<i|A_a|j>|^2`` in the eigenbasis ``basis`` of ``g``."""

    P: np.ndarray
    basis: np.ndarray

    @property
    def dim(self):
        return self.P.shape[0]


def _kraus_of(channel):
    if isinstance(channel, KrausChannel):
        return channel
    to_kraus = getattr(channel, "to_kraus", None)
    if to_kraus is None:
        raise ContractError(f"{channel!r} has no Kraus representation")
    return to_kraus()


def induced_transition_matrix(channel, g, atol=1e-10):
    """Classical transition matrix induced by a unital reversible channel.

    Raises ``ContractError`` for non-unital or non-reversible channels.
    """
    channel = _kraus_of(channel)
    if not channel.is_unital:
        raise ContractError("induced transition matrix needs a unital channel")
    if not check_reversible(channel, trials=4).reversible:
        raise ContractError("induced transition matrix needs a reversible channel")
    g = as_operator(g)
    u = g.eigenvectors
    elems = np.einsum("ki,akl,lj->aij", u.conj(), channel.kraus_ops, u, optimize=True)
    p = np.sum(np.abs(elems) ** 2, axis=0)
    return InducedTransitionMatrix(p, u)


def pairwise_dirichlet(P, c0, gi_a, gi_b):
    """``(c0 / 2d) sum_ij P_ij (a_i - a_j)(b_i - b_j)``."""
    gi_a = np.asarray(gi_a, dtype=float)
    gi_b = np.asarray(gi_b, dtype=float)
    da = gi_a[:, None] - gi_a[None, :]
    db = gi_b[:, None] - gi_b[None, :]
    d = len(gi_a)
    return c0 / (2.0 * d) * float(np.sum(P * da * db))


def require_primitive(generator):
    """Raise ``ContractError`` unless the generator's base channel is primitive.

    The verdict is cached on the generator object.
    """
    rep = getattr(generator, "_primitivity", None)
    if rep is None:
        rep = check_primitive(generator.base_channel())
        generator._primitivity = rep
    if not rep.primitive:
        raise ContractError(
            "generator is not primitive: the spectral gap vanishes and the "
            f"log-Sobolev constant diverges (peripheral spectrum {rep.peripheral})")


def lsi2_ratio(generator, f):
    """``Ent(f^2) / E(f, f)``, with ``E`` evaluated on ``f - tau(f) I``.

    ``L(I) = 0`` makes the two Dirichlet forms equal; the centered form keeps
    full relative precision when ``f`` is close to flat.
    """
    f = as_operator(f)
    lam = f.eigenvalues
    ent = spectral_entropy(lam * lam)
    h = centered(f)
    e = dirichlet_form(generator, h, h)
    if e <= 0:
        return 0.0
    return ent / e


def _lsi_operator(x, d):
    u = unitary_from_generator(x[d:], d)
    lam = np.exp(x[:d])
    lam = lam / math.sqrt(np.mean(lam * lam))
    return HermitianOperator.from_spectrum(lam, u)


def estimate_lsi2_constant(generator, restarts=20, seed=0, budget=400, min_spread=1e-3):
    """Lower bound on the 2-log-Sobolev constant by derivative-free ascent.

    Maximizes ``Ent(f^2) / E(f, f)`` over positive definite ``f`` with
    ``tau(f^2) = 1``, parameterized by log-eigenvalues and a unitary
    generator. Candidates whose relative spread
    ``sqrt(tau((f - tau f)^2))`` falls below ``min_spread`` are rejected,
    since the ratio becomes 0/0 at flat ``f``.

    Returns
    -------
    float
        Best ratio found; a certified lower bound on the optimal constant.

    Raises
    ------
    ContractError
        If the generator is not primitive.
    """
    from .search import random_direction_descent

    require_primitive(generator)
    d = generator.dim
    rng = make_rng(seed)

    def objective(x):
        f = _lsi_operator(x, d)
        spread = math.sqrt(max(ntrace_product(centered(f), centered(f)), 0.0))
        if spread < min_spread:
            return math.inf
        return -lsi2_ratio(generator, f)

    best = 0.0
    for _ in range(restarts):
        x0 = np.concatenate([rng.normal(scale=0.5, size=d), rng.normal(scale=1.0, size=d * d)])
        res = random_direction_descent(objective, x0, rng, budget=budget, step=0.5)
        if np.isfinite(res.value):
            best = max(best, -res.value)
    return best

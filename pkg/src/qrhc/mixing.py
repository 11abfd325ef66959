"""How fast depolarizing noise pushes a subspace state onto a measurement.

For a subspace ``S`` of ``n`` qubits with ``dim S = exp(-s^2/2) 2^n`` and a
measurement ``0 <= M <= I`` with ``tau(M) = exp(-t^2/2)``, the probability
``tr(M D_gamma(rho_S))``, ``rho_S = Pi_S / dim S``, is bounded below by
``exp(-((s^2 + 2 gamma s t + t^2)/(1 - gamma^2) - s^2) / 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import DepolarizingFamily
from .errors import ContractError, DomainError
from .linalg import (
    HermitianOperator,
    as_operator,
    check_dim,
    make_rng,
    ntrace,
    ntrace_product,
    random_psd,
    random_unitary,
)
from .pnorms import pnorm
from .verifiers import DEFAULT_RTOL, make_report

GAMMA_MAX = 1.0 - 1e-6


@dataclass(frozen=True)
class SubspaceInstance:
    n: int
    projector: HermitianOperator
    M: HermitianOperator
    gamma: float

    def __post_init__(self):
        d = 2 ** self.n
        check_dim(d)
        proj = as_operator(self.projector)
        m = as_operator(self.M)
        if proj.dim != d or m.dim != d:
            raise ContractError("projector and measurement must act on n qubits")
        pm = proj.matrix
        if np.max(np.abs(pm @ pm - pm)) > 1e-10:
            raise ContractError("projector is not idempotent")
        lam = m.eigenvalues
        if lam[-1] < -1e-10 or lam[0] > 1 + 1e-10:
            raise ContractError("measurement spectrum must lie in [0, 1]")
        if not 0.0 <= self.gamma <= 1.0:
            raise DomainError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.dim_s < 1:
            raise ContractError("subspace is empty")
        if ntrace(m) <= 0:
            raise ContractError("tau(M) must be positive")
        object.__setattr__(self, "projector", proj)
        object.__setattr__(self, "M", m)

    @property
    def dim_s(self):
        return int(round(np.trace(self.projector.matrix).real))

    @property
    def sigma(self):
        return self.dim_s / 2 ** self.n

    @property
    def tau_m(self):
        return ntrace(self.M)

    @property
    def s(self):
        return math.sqrt(max(-2.0 * math.log(self.sigma), 0.0))

    @property
    def t(self):
        return math.sqrt(max(-2.0 * math.log(self.tau_m), 0.0))

    def to_json(self):
        def mat(a):
            return [[[float(z.real), float(z.imag)] for z in row] for row in a.matrix]

        return {"n": self.n, "gamma": self.gamma, "projector": mat(self.projector),
                "M": mat(self.M), "s": self.s, "t": self.t}


def mixing_lhs(inst):
    """``tr(M D_gamma^{(x)n}(Pi_S / dim S))``."""
    out = DepolarizingFamily(inst.n, inst.gamma).apply(inst.projector)
    return ntrace_product(inst.M, out) * 2 ** inst.n / inst.dim_s


@dataclass(frozen=True)
class MixingBound:
    value: float
    p: float | None
    q: float | None


def _check_gamma(gamma):
    if not 0.0 <= gamma <= 1.0:
        raise DomainError(f"gamma must lie in [0, 1), got {gamma}")
    if gamma > GAMMA_MAX:
        raise DomainError("the mixing bound diverges as gamma -> 1")


def mixing_bound_theorem(s, t, gamma):
    """Closed-form lower bound and the Hoelder exponents that attain it.

    With ``r = t/s`` the exponents are ``p = (1-g^2)/(1+g r)`` and
    ``q = r(1-g^2)/(g+r)``; they are ``None`` when ``s`` or ``t`` is zero,
    where the formula is used directly as the continuous limit.
    """
    _check_gamma(gamma)
    if s < 0 or t < 0:
        raise DomainError("s and t must be non-negative")
    g2 = 1.0 - gamma * gamma
    value = math.exp(-0.5 * ((s * s + 2 * gamma * s * t + t * t) / g2 - s * s))
    if s > 0 and t > 0:
        # same as the r-forms, without forming r = t/s (which can underflow)
        return MixingBound(value, s * g2 / (s + gamma * t), t * g2 / (gamma * s + t))
    return MixingBound(value, None, None)


def mixing_bound_corollary(sigma, alpha, gamma):
    """``sigma^((sqrt(alpha) + gamma)^2 / (1 - gamma^2))`` for ``tau(M) = sigma^alpha``."""
    _check_gamma(gamma)
    if not 0 < sigma <= 1:
        raise DomainError(f"sigma must lie in (0, 1], got {sigma}")
    if alpha < 0:
        raise DomainError("alpha must be non-negative")
    return sigma ** ((math.sqrt(alpha) + gamma) ** 2 / (1.0 - gamma * gamma))


def verify_mixing(inst, rtol=DEFAULT_RTOL):
    """Check ``mixing_lhs >= bound`` and, when defined, the Hoelder chain behind it.

    The chain is ``lhs >= ||M||_q sigma^(1/p - 1) >= tau(M)^(1/q) sigma^(1/p - 1)``
    with the optimal ``(p, q)``; the last term must equal the closed form,
    and so must the ``sigma``-form bound with ``alpha = (t/s)^2``.
    """
    lhs = mixing_lhs(inst)
    b = mixing_bound_theorem(inst.s, inst.t, inst.gamma)
    links = {"bound": lhs - b.value}
    params = {"n": inst.n, "gamma": inst.gamma, "sigma": inst.sigma, "tau_m": inst.tau_m,
              "s": inst.s, "t": inst.t, "p": b.p, "q": b.q}
    if b.p is not None:
        holder = pnorm(inst.M, b.q) * inst.sigma ** (1.0 / b.p - 1.0)
        scalar = inst.tau_m ** (1.0 / b.q) * inst.sigma ** (1.0 / b.p - 1.0)
        cor = mixing_bound_corollary(inst.sigma, (inst.t / inst.s) ** 2, inst.gamma)
        links.update({"holder": lhs - holder, "trace": holder - scalar,
                      "closed_form": -abs(scalar - b.value), "corollary": -abs(cor - b.value)})
        params["corollary_bound"] = cor
    params["links"] = {key: float(v) for key, v in links.items()}
    return make_report("mixing", params, lhs, b.value, min(links.values()), rtol)


def blend_to_trace(r, target):
    """Rescale ``0 <= R <= I`` to ``beta R + (1 - beta) c I`` with normalized trace ``target``.

    ``c = 0`` when ``tau(R) >= target`` and ``c = 1`` otherwise, so the result
    stays between 0 and I.
    """
    r = as_operator(r)
    tr = ntrace(r)
    d = r.dim
    if not 0 < target <= 1:
        raise DomainError("target trace must lie in (0, 1]")
    if tr >= target:
        return r * (target / tr)
    beta = (1.0 - target) / (1.0 - tr)
    return HermitianOperator(beta * r.matrix + (1.0 - beta) * np.eye(d), check=False)


def random_subspace_instance(n, seed, gamma=None, orthogonal=False, dim_s=None, tau_target=None):
    """Random subspace (Haar-rotated coordinate subspace) and measurement.

    With ``orthogonal=True`` the measurement is supported on the orthogonal
    complement of ``S``, the adversarial case ``M Pi_S = 0``.
    """
    rng = make_rng(seed)
    d = 2 ** n
    check_dim(d)
    u = random_unitary(d, rng)
    if dim_s is None:
        dim_s = int(rng.integers(1, d)) if orthogonal else int(rng.integers(1, d + 1))
    if gamma is None:
        gamma = float(rng.uniform(0.0, 0.99))
    basis_s = u[:, :dim_s]
    proj = HermitianOperator(basis_s @ basis_s.conj().T)
    if orthogonal:
        comp = u[:, dim_s:]
        a = random_psd(d - dim_s, rng, rank=int(rng.integers(1, d - dim_s + 1))).matrix
        a = a / np.linalg.eigvalsh(a)[-1]
        r = HermitianOperator(comp @ a @ comp.conj().T)
        cap = ntrace(r)
    else:
        r = random_psd(d, rng, rank=int(rng.integers(1, d + 1)))
        r = r * (1.0 / r.eigenvalues[0])
        cap = 1.0
    if tau_target is None:
        tau_target = float(rng.uniform(0.02, 1.0)) * cap
    m = blend_to_trace(r, tau_target) if not orthogonal else r * (min(tau_target, cap) / cap)
    return SubspaceInstance(n, proj, m, float(gamma))

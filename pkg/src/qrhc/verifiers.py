"""Executable checks of the norm, Dirichlet-form and hypercontractive inequalities.

Every check returns a ``VerificationReport``. The slack is signed with the
satisfied side first, so ``slack >= 0`` means the inequality holds, and
``passed`` is ``slack >= -tol`` with ``tol = rtol * max(1, |lhs|, |rhs|)``.

Checks refuse parameters outside the hypotheses of their inequality
(``ContractError``). The ``enforce_range=False`` escape hatch exists for
replaying counterexample witnesses from ``qrhc.search``; reports produced that
way carry ``params["in_region"] = False``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import DepolarizingFamily, SemigroupChannel, _n_qubits, semigroup_apply
from .errors import ContractError, DomainError, NumericalError
from .functionals import dirichlet_form, entropy, require_primitive
from .linalg import (
    as_operator,
    make_rng,
    mat_log,
    mat_pow,
    ntrace,
    ntrace_product,
    random_psd,
    require_pd,
    require_psd,
    PositivityClass,
)
from .pnorms import holder_conjugate, pnorm

DEFAULT_RTOL = 1e-9


@dataclass
class VerificationReport:
    inequality_id: str
    params: dict
    lhs: float
    rhs: float
    slack: float
    tol: float
    passed: bool
    witness: dict | None = field(default=None)

    def to_dict(self, with_witness=True):
        out = {
            "inequality_id": self.inequality_id,
            "params": dict(self.params),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "tol": self.tol,
            "pass": self.passed,
        }
        if with_witness and self.witness is not None:
            out["witness"] = self.witness
        return out


def make_report(inequality_id, params, lhs, rhs, slack, rtol=DEFAULT_RTOL, witness=None):
    lhs, rhs, slack = float(lhs), float(rhs), float(slack)
    if not (math.isfinite(lhs) and math.isfinite(rhs)):
        raise NumericalError(f"{inequality_id}: non-finite side (lhs={lhs}, rhs={rhs})")
    tol = rtol * max(1.0, abs(lhs), abs(rhs))
    return VerificationReport(inequality_id, params, lhs, rhs, slack, tol, slack >= -tol, witness)


def operator_witness(f):
    """Serialize an operator as eigenvalues plus eigenvector columns."""
    f = as_operator(f)
    lam, u = f.spectrum
    return {
        "eigenvalues": [float(x) for x in lam],
        "unitary_columns": [[[float(z.real), float(z.imag)] for z in col] for col in u.T],
    }


def operator_from_witness(w):
    from .linalg import HermitianOperator

    lam = np.asarray(w["eigenvalues"], dtype=float)
    cols = np.asarray(w["unitary_columns"], dtype=float)
    u = (cols[..., 0] + 1j * cols[..., 1]).T
    return HermitianOperator.from_spectrum(lam, u)


def _check_exponent_positivity(f, p, name):
    """PSD always; PD when ``p <= 0``."""
    if p <= 0:
        require_pd(f, name)
    else:
        require_psd(f, name)


# ---------------------------------------------------------------------------
# Reverse norm inequalities
# ---------------------------------------------------------------------------


def verify_reverse_holder(f, g, p, rtol=DEFAULT_RTOL):
    """``tau(f g) >= ||f||_p ||g||_{p'}`` for ``f >= 0``, ``g > 0``, ``0 < p <= 1``.

    At ``p = 1`` the conjugate is taken as the left limit ``p' = -inf``
    (``||g||_{-inf} = lambda_min(g)``); the right limit ``+inf`` would turn
    the statement into the forward Hoelder bound.
    """
    f, g = as_operator(f), as_operator(g)
    p = float(p)
    if p == 0:
        raise ContractError("p = 0 is unsupported: 1/p + 1/p' = 1 defines no conjugate")
    if not 0 < p <= 1:
        raise ContractError(f"reverse Hoelder needs 0 < p <= 1, got {p}")
    require_psd(f, "f")
    require_pd(g, "g")
    pc = -math.inf if p == 1 else holder_conjugate(p)
    lhs = ntrace_product(f, g)
    rhs = pnorm(f, p) * pnorm(g, pc)
    return make_report("reverse-holder", {"p": p, "p_conj": pc, "dim": f.dim}, lhs, rhs, lhs - rhs, rtol)


def verify_reverse_minkowski(f, g, p, rtol=DEFAULT_RTOL):
    """``||f + g||_p >= ||f||_p + ||g||_p`` for ``p < 1``, ``p != 0``."""
    f, g = as_operator(f), as_operator(g)
    p = float(p)
    if not p < 1 or p == 0:
        raise ContractError(f"reverse Minkowski needs p < 1, p != 0, got {p}")
    _check_exponent_positivity(f, p, "f")
    _check_exponent_positivity(g, p, "g")
    lhs = pnorm(f + g, p)
    rhs = pnorm(f, p) + pnorm(g, p)
    return make_report("reverse-minkowski", {"p": p, "dim": f.dim}, lhs, rhs, lhs - rhs, rtol)


def variational_minimizer(f, p):
    """``g* = f^(p-1) / ||f^(p-1)||_{p'}``, attaining ``tau(f g*) = ||f||_p``."""
    f = as_operator(f)
    require_pd(f, "f")
    pc = holder_conjugate(p)
    g = mat_pow(f, p - 1.0)
    return g * (1.0 / pnorm(g, pc, eps=0.0))


def verify_variational(f, p, samples=32, seed=0, rtol=DEFAULT_RTOL):
    """Two-sided check of ``||f||_p = inf{tau(f g) : g > 0, ||g||_{p'} >= 1}``.

    Feasible ``g`` are drawn at random (Wishart draws and perturbations of the
    analytic minimizer), rescaled onto ``||g||_{p'} = 1``; none may beat
    ``||f||_p``. The minimizer ``g* ~ f^(p-1)`` must attain it.

    The report's ``lhs`` is the smallest ``tau(f g)`` seen (``g*`` included),
    ``rhs`` is ``||f||_p`` and
    ``slack = min(min_sampled - ||f||_p, -|tau(f g*) - ||f||_p|)``.

    Feasible ``g`` are positive definite by construction but can be far more
    ill-conditioned than ``f`` (``f^(p-1)`` squares condition numbers and
    worse), so their norms are taken without the near-zero clamp.
    """
    f = as_operator(f)
    p = float(p)
    if not p < 1 or p == 0:
        raise ContractError(f"variational characterization needs p < 1, p != 0, got {p}")
    require_pd(f, "f")
    pc = holder_conjugate(p)
    norm = pnorm(f, p)
    gstar = variational_minimizer(f, p)
    attained = ntrace_product(f, gstar)
    rng = make_rng(seed)
    d = f.dim
    best = math.inf
    for i in range(samples):
        if i % 2 == 0:
            g = random_psd(d, rng, PositivityClass.POSITIVE_DEFINITE)
        else:
            eps = 10.0 ** rng.uniform(-4, 0)
            g = gstar + random_psd(d, rng) * (eps * gstar.eigenvalues[0] / d)
        g = g * (1.0 / pnorm(g, pc, eps=0.0))
        best = min(best, ntrace_product(f, g))
    slack = min(best - norm, -abs(attained - norm))
    params = {"p": p, "p_conj": pc, "dim": d, "samples": samples,
              "attained": attained, "min_sampled": best}
    return make_report("variational", params, min(best, attained), norm, slack, rtol)


def verify_expansivity(channel, f, p, rtol=DEFAULT_RTOL):
    """``||T(f)||_p >= ||f||_p`` for a unital channel and ``p < 1``."""
    f = as_operator(f)
    p = float(p)
    if not getattr(channel, "is_unital", False):
        raise ContractError("expansivity requires a unital channel")
    if not p < 1:
        raise ContractError(f"expansivity needs p < 1, got {p}")
    _check_exponent_positivity(f, p, "f")
    lhs = pnorm(channel.apply(f), p)
    rhs = pnorm(f, p)
    return make_report("expansivity", {"p": p, "dim": f.dim}, lhs, rhs, lhs - rhs, rtol)


# ---------------------------------------------------------------------------
# Stroock-Varopoulos, Gross, p-LSI, norm derivative
# ---------------------------------------------------------------------------


def _check_sv_exponent(p, name):
    if not 0 < p <= 2:
        raise ContractError(f"{name} must lie in (0, 2], got {p}")


def sv_term(x, y, p):
    """``p p' (x^(1/p) - y^(1/p)) (x^(1/p') - y^(1/p'))``; ``p = 1`` is the limit
    ``(x - y)(ln x - ln y)``."""
    if x < 0 or y < 0:
        raise DomainError("two-point inequality needs x, y >= 0")
    if x == y:
        return 0.0
    if p == 1:
        if x == 0 or y == 0:
            return math.inf
        return (x - y) * (math.log(x) - math.log(y))
    pc = holder_conjugate(p)
    a, b = 1.0 / p, 1.0 / pc
    if b < 0 and (x == 0 or y == 0):
        raise DomainError("negative exponent at a zero argument")
    return p * pc * (x ** a - y ** a) * (x ** b - y ** b)


def sv_two_point(x, y, p, q, rtol=DEFAULT_RTOL):
    """Scalar two-point inequality behind the Stroock-Varopoulos bound (``p >= q``)."""
    p, q = float(p), float(q)
    _check_sv_exponent(p, "p")
    _check_sv_exponent(q, "q")
    if p < q:
        raise ContractError("need p >= q")
    lhs = sv_term(x, y, p)
    rhs = sv_term(x, y, q)
    return make_report("sv-two-point", {"x": x, "y": y, "p": p, "q": q}, lhs, rhs, rhs - lhs, rtol)


def sv_energy(generator, g, p):
    """``p p' E(g^(1/p'), g^(1/p))``, or ``E(ln g, g)`` at ``p = 1``."""
    if p == 1:
        return dirichlet_form(generator, mat_log(g), g)
    pc = holder_conjugate(p)
    return p * pc * dirichlet_form(generator, mat_pow(g, 1.0 / pc), mat_pow(g, 1.0 / p))


def verify_stroock_varopoulos(generator, g, p, q, rtol=DEFAULT_RTOL):
    """``p p' E(g^(1/p'), g^(1/p)) <= q q' E(g^(1/q'), g^(1/q))`` for ``p >= q``."""
    g = as_operator(g)
    p, q = float(p), float(q)
    _check_sv_exponent(p, "p")
    _check_sv_exponent(q, "q")
    if p < q:
        raise ContractError("need p >= q")
    require_primitive(generator)
    require_psd(g, "g")
    lhs = sv_energy(generator, g, p)
    rhs = sv_energy(generator, g, q)
    return make_report("sv", {"p": p, "q": q, "dim": g.dim}, lhs, rhs, rhs - lhs, rtol)


def gross_sides(generator, f, p):
    """``(E(f^(p/2), f^(p/2)), p^2/(4(p-1)) E(f^(p-1), f))``."""
    half = mat_pow(f, p / 2.0)
    lhs = dirichlet_form(generator, half, half)
    rhs = p * p / (4.0 * (p - 1.0)) * dirichlet_form(generator, mat_pow(f, p - 1.0), f)
    return lhs, rhs


def verify_gross(generator, f, p, rtol=DEFAULT_RTOL):
    """``E(f^(p/2), f^(p/2)) <= p^2/(4(p-1)) E(f^(p-1), f)`` for ``p in (0, 2] \\ {1}``."""
    f = as_operator(f)
    p = float(p)
    _check_sv_exponent(p, "p")
    if p == 1:
        raise ContractError("p = 1 is excluded")
    require_primitive(generator)
    _check_exponent_positivity(f, p - 1.0, "f")
    lhs, rhs = gross_sides(generator, f, p)
    return make_report("gross", {"p": p, "dim": f.dim}, lhs, rhs, rhs - lhs, rtol)


def verify_plsi(generator, f, p, alpha, rtol=DEFAULT_RTOL):
    """``Ent(f^p) <= alpha p^2/(4(p-1)) E(f^(p-1), f)``.

    ``alpha`` is the caller's 2-log-Sobolev constant for ``generator``
    (2 for the depolarizing site sum).
    """
    f = as_operator(f)
    p = float(p)
    _check_sv_exponent(p, "p")
    if p == 1:
        raise ContractError("p = 1 is excluded")
    require_primitive(generator)
    _check_exponent_positivity(f, p - 1.0, "f")
    lhs = entropy(mat_pow(f, p))
    rhs = alpha * p * p / (4.0 * (p - 1.0)) * dirichlet_form(generator, mat_pow(f, p - 1.0), f)
    return make_report("plsi", {"p": p, "alpha": alpha, "dim": f.dim}, lhs, rhs, rhs - lhs, rtol)


def verify_lsi2(generator, f, alpha=2.0, rtol=DEFAULT_RTOL):
    """``Ent(f^2) <= alpha E(f, f)``."""
    f = as_operator(f)
    lhs = entropy(mat_pow(f, 2))
    rhs = alpha * dirichlet_form(generator, f, f)
    return make_report("lsi2", {"alpha": alpha, "dim": f.dim}, lhs, rhs, rhs - lhs, rtol)


def norm_derivative(generator, f, p, t_func, dt_func):
    """Closed form of ``d/dp ln ||T_{t(p)}(f)||_p``.

    ``(Ent(f_t^p) - p^2 t'(p) E(f_t^(p-1), f_t)) / (p^2 tau(f_t^p))`` with
    ``f_t = T_{t(p)}(f)``.
    """
    p = float(p)
    if p == 0:
        raise DomainError("the derivative formula needs p != 0")
    ft = semigroup_apply(generator, t_func(p), as_operator(f))
    ftp = mat_pow(ft, p)
    num = entropy(ftp) - p * p * dt_func(p) * dirichlet_form(generator, mat_pow(ft, p - 1.0), ft)
    return num / (p * p * ntrace(ftp))


def log_norm_along(generator, f, t_func):
    """``p -> ln ||T_{t(p)}(f)||_p``, the function differentiated above."""
    f = as_operator(f)

    def fn(p):
        return math.log(pnorm(semigroup_apply(generator, t_func(p), f), p))

    return fn


def reverse_time_path(alpha, q0):
    """``t(p) = (alpha/4) ln((1-q0)/(1-p))`` and its derivative."""
    def t(p):
        return alpha / 4.0 * math.log((1.0 - q0) / (1.0 - p))

    def dt(p):
        return alpha / 4.0 / (1.0 - p)

    return t, dt


# ---------------------------------------------------------------------------
# Hypercontractivity
# ---------------------------------------------------------------------------


def reverse_gamma_bound(p, q):
    """Largest admissible noise ``sqrt((1-p)/(1-q))`` (1 when ``p == q``)."""
    if p == q:
        return 1.0
    return math.sqrt((1.0 - p) / (1.0 - q))


def forward_gamma_bound(p, q):
    """``sqrt((p-1)/(q-1))``; 1 when ``p == q`` and 0 for ``q = inf > p``."""
    if p == q:
        return 1.0
    if q == math.inf:
        return 0.0
    return math.sqrt((p - 1.0) / (q - 1.0))


def reverse_time_threshold(p, q, alpha):
    """Smallest admissible semigroup time ``(alpha/4) ln((1-q)/(1-p))``."""
    if p == q:
        return 0.0
    if p == 1:
        return math.inf
    return alpha / 4.0 * math.log((1.0 - q) / (1.0 - p))


def _reverse_hc_in_region(channel, p, q, alpha):
    if isinstance(channel, DepolarizingFamily):
        return channel.gamma <= reverse_gamma_bound(p, q) * (1 + 1e-12)
    if isinstance(channel, SemigroupChannel):
        return channel.t >= reverse_time_threshold(p, q, alpha) * (1 - 1e-12)
    raise ContractError(f"unsupported channel {channel!r}")


def _noise_params(channel):
    if isinstance(channel, DepolarizingFamily):
        return {"gamma": channel.gamma, "n": channel.n}
    return {"t": channel.t}


def verify_reverse_hc(channel, f, p, q, alpha=2.0, rtol=DEFAULT_RTOL, enforce_range=True):
    """``||T(f)||_q >= ||f||_p`` for ``-inf < q <= p <= 1``.

    ``channel`` is a ``DepolarizingFamily`` (needs
    ``gamma <= sqrt((1-p)/(1-q))``) or a ``SemigroupChannel`` (needs
    ``t >= (alpha/4) ln((1-q)/(1-p))``, ``alpha`` being the generator's
    2-log-Sobolev constant). ``f`` must be positive semidefinite, and
    positive definite when ``p <= 0``.
    """
    f = as_operator(f)
    p, q = float(p), float(q)
    if enforce_range:
        if not (-math.inf < q <= p <= 1):
            raise ContractError(f"reverse hypercontractivity needs -inf < q <= p <= 1, got p={p}, q={q}")
    in_region = (-math.inf < q <= p <= 1) and _reverse_hc_in_region(channel, p, q, alpha)
    if enforce_range and not in_region:
        raise ContractError("noise parameter outside the reverse hypercontractive region")
    _check_exponent_positivity(f, p, "f")
    lhs = pnorm(channel.apply(f), q)
    rhs = pnorm(f, p)
    params = {"p": p, "q": q, "alpha": alpha, "dim": f.dim, "in_region": in_region}
    params.update(_noise_params(channel))
    return make_report("reverse-hc", params, lhs, rhs, lhs - rhs, rtol)


def verify_forward_hc(channel, f, p, q, rtol=DEFAULT_RTOL, enforce_range=True):
    """``||D_gamma^{(x)n}(f)||_q <= ||f||_p`` for ``1 <= p <= q <= inf``."""
    f = as_operator(f)
    p, q = float(p), float(q)
    if not isinstance(channel, DepolarizingFamily):
        raise ContractError("forward hypercontractivity is checked for depolarizing families")
    ordered = 1 <= p <= q
    if enforce_range and not ordered:
        raise ContractError(f"forward hypercontractivity needs 1 <= p <= q, got p={p}, q={q}")
    in_region = ordered and channel.gamma <= forward_gamma_bound(p, q) * (1 + 1e-12)
    if enforce_range and not in_region:
        raise ContractError("noise parameter outside the forward hypercontractive region")
    lhs = pnorm(f, p)
    rhs = pnorm(channel.apply(f), q)
    params = {"p": p, "q": q, "dim": f.dim, "in_region": in_region}
    params.update(_noise_params(channel))
    return make_report("forward-hc", params, lhs, rhs, lhs - rhs, rtol)


def strong_holder_gamma_bound(p, q):
    return math.sqrt((1.0 - p) * (1.0 - q))


def verify_strong_reverse_holder(f, g, p, q, gamma, rtol=DEFAULT_RTOL, enforce_range=True):
    """``tau(f D_gamma^{(x)n}(g)) >= ||f||_p ||g||_q`` for ``gamma <= sqrt((1-p)(1-q))``."""
    f, g = as_operator(f), as_operator(g)
    p, q = float(p), float(q)
    ordered = -math.inf < p <= 1 and -math.inf < q <= 1
    if enforce_range and not ordered:
        raise ContractError(f"need -inf < p, q <= 1, got p={p}, q={q}")
    in_region = ordered and gamma <= strong_holder_gamma_bound(p, q) * (1 + 1e-12)
    if enforce_range and not in_region:
        raise ContractError("gamma outside the strengthened reverse Hoelder region")
    _check_exponent_positivity(f, p, "f")
    _check_exponent_positivity(g, q, "g")
    fam = DepolarizingFamily(_n_qubits(f.dim), gamma)
    lhs = ntrace_product(f, fam.apply(g))
    rhs = pnorm(f, p) * pnorm(g, q)
    params = {"p": p, "q": q, "gamma": gamma, "n": fam.n, "dim": f.dim, "in_region": in_region}
    return make_report("strong-reverse-holder", params, lhs, rhs, lhs - rhs, rtol)


def verify_reverse_hc_cases(generator, f, p, q, alpha=2.0, t=None, grid=9, seed=0,
                            rtol=DEFAULT_RTOL):
    """Replay the three-case argument behind reverse hypercontractivity numerically.

    * ``q >= 0`` (path): along ``r in [q, p]`` with
      ``t(r) = (alpha/4) ln((1-r)/(1-p))`` the map
      ``r -> ||T_{t(r)} f||_r`` must be nonincreasing.
    * ``q < 0 <= p`` (chain): with ``t1 = (alpha/4) ln(1/(1-p))`` and
      ``h = T_{t1} f`` check the semigroup identity
      ``T_t f = T_{t-t1} h`` and ``||T_{t-t1} h||_q >= ||h||_0 >= ||f||_p``.
    * ``q <= p < 0`` (duality): ``tau(g T_t f) = tau(T_t g f)`` for random
      ``g > 0`` and ``||T_t g||_{p'} >= ||g||_{q'}`` with ``q' >= p'`` in (0, 1).

    ``t`` defaults to the threshold. ``slack`` is the minimum over all links.
    """
    f = as_operator(f)
    p, q = float(p), float(q)
    if not (-math.inf < q <= p < 1):
        raise ContractError("case analysis needs -inf < q <= p < 1")
    require_primitive(generator)
    _check_exponent_positivity(f, p, "f")
    thr = reverse_time_threshold(p, q, alpha)
    t = thr if t is None else float(t)
    if t < thr * (1 - 1e-12):
        raise ContractError("t below the reverse hypercontractive threshold")
    links = []
    if q >= 0:
        case = "path"
        rs = np.linspace(q, p, grid)
        vals = [pnorm(semigroup_apply(generator, reverse_time_threshold(p, r, alpha), f), r)
                for r in rs]
        for a, b in zip(vals[:-1], vals[1:]):
            links.append(a - b)
        links.append(vals[-1] - pnorm(f, p))
        lhs, rhs = pnorm(semigroup_apply(generator, t, f), q), pnorm(f, p)
        links.append(lhs - vals[0])
    elif p >= 0:
        case = "chain"
        t1 = alpha / 4.0 * math.log(1.0 / (1.0 - p))
        h = semigroup_apply(generator, t1, f)
        lhs = pnorm(semigroup_apply(generator, t, f), q)
        mid = pnorm(semigroup_apply(generator, t - t1, h), q)
        h0 = pnorm(h, 0.0)
        rhs = pnorm(f, p)
        links += [-abs(lhs - mid), mid - h0, h0 - rhs]
    else:
        case = "duality"
        rng = make_rng(seed)
        pc, qc = holder_conjugate(p), holder_conjugate(q)
        tf = semigroup_apply(generator, t, f)
        lhs, rhs = pnorm(tf, q), pnorm(f, p)
        links.append(lhs - rhs)
        for _ in range(4):
            g = random_psd(f.dim, rng, PositivityClass.POSITIVE_DEFINITE)
            tg = semigroup_apply(generator, t, g)
            links.append(-abs(ntrace_product(g, tf) - ntrace_product(tg, f)))
            links.append(pnorm(tg, pc) - pnorm(g, qc))
    params = {"p": p, "q": q, "alpha": alpha, "t": t, "case": case, "dim": f.dim,
              "links": [float(x) for x in links]}
    return make_report("reverse-hc-cases", params, lhs, rhs, min(links), rtol)

"""Randomized campaigns: many independent instances of one check.

Trial ``i`` of a campaign seeded with ``seed`` draws everything from its own
Philox stream, so campaigns are reproducible trial by trial and do not depend
on how many trials run before.
"""

from __future__ import annotations

import numpy as np

from . import cube
from .channels import (
    DepolarizingFamily,
    DepolarizingGenerator,
    LindbladGenerator,
    check_primitive,
    random_reversible_channel,
    random_unital_channel,
)
from .errors import ContractError
from .functionals import estimate_lsi2_constant
from .linalg import (
    HermitianOperator,
    PositivityClass,
    random_hermitian,
    random_psd,
    trial_rng,
)
from .mixing import random_subspace_instance, verify_mixing
from .nicd import (
    NicdInstance,
    diagonal_measurement,
    indicator_weights,
    make_basis,
    success_probability,
    verify_nicd_contradiction,
)
from .verifiers import (
    DEFAULT_RTOL,
    forward_gamma_bound,
    log_norm_along,
    make_report,
    norm_derivative,
    reverse_gamma_bound,
    reverse_time_path,
    strong_holder_gamma_bound,
    verify_expansivity,
    verify_forward_hc,
    verify_gross,
    verify_lsi2,
    verify_plsi,
    verify_reverse_holder,
    verify_reverse_hc,
    verify_reverse_minkowski,
    verify_strong_reverse_holder,
    verify_stroock_varopoulos,
    verify_variational,
)

HC_RTOL = 1e-8
PD = PositivityClass.POSITIVE_DEFINITE
PSD = PositivityClass.POSITIVE_SEMIDEFINITE

VERIFY_IDS = ("reverse-holder", "reverse-minkowski", "variational", "expansivity", "sv",
              "gross", "plsi", "reverse-hc", "forward-hc", "strong-reverse-holder", "lsi2")
QUBIT_IDS = ("plsi", "reverse-hc", "forward-hc", "strong-reverse-holder", "lsi2")


def _operator(rng, d, positive_definite, allow_singular=True):
    """Wishart draw, PD when requested; otherwise rank-deficient half of the time."""
    if positive_definite:
        return random_psd(d, rng, PD)
    rank = int(rng.integers(1, d + 1)) if allow_singular and rng.random() < 0.5 else None
    return random_psd(d, rng, PSD, rank=rank)


def _exponent_below_one(rng, low=-3.0):
    p = float(rng.uniform(low, 1.0))
    return p if p != 0 else 0.5


def _sv_exponent(rng):
    if rng.random() < 0.1:
        return 1.0
    p = float(rng.uniform(0.05, 2.0))
    return p if p != 1 else 0.5


def _gross_exponent(rng):
    p = float(rng.uniform(0.05, 2.0))
    return p if p != 1 else 0.5


def _reverse_pair(rng, i):
    regime = i % 3
    if regime == 0:
        p = float(rng.uniform(0.0, 1.0))
        q = float(rng.uniform(0.0, p))
    elif regime == 1:
        p = float(rng.uniform(0.0, 1.0))
        q = -float(rng.uniform(0.05, 4.0))
    else:
        p = -float(rng.uniform(0.05, 3.0))
        q = p - float(rng.uniform(0.0, 3.0))
    return p, q


def _generator_pool(d, seed, size=4):
    """Depolarizing site sum (power-of-two ``d``) and random reversible generators."""
    pool = []
    n = d.bit_length() - 1
    if 2 ** n == d:
        pool.append(DepolarizingGenerator(n))
    k = 0
    while len(pool) < size:
        ch = random_reversible_channel(d, trial_rng(seed, 10 ** 9 + k))
        if check_primitive(ch).primitive:
            pool.append(LindbladGenerator(ch, c0=float(1.0 + k % 3)))
        k += 1
    return pool


def _qubits_of(qubits, dim):
    if qubits is not None:
        return int(qubits)
    if dim is None:
        return 1
    n = int(dim).bit_length() - 1
    if 2 ** n != dim:
        raise ContractError(f"this check needs a power-of-two dimension, got {dim}")
    return n


def check_fixed_parameters(ineq, p=None, q=None, gamma=None):
    """Raise ``ContractError`` for user-fixed exponents outside a check's hypotheses."""
    def bad(msg):
        raise ContractError(f"{ineq}: {msg}")

    if ineq not in VERIFY_IDS:
        bad(f"unknown inequality; choose from {', '.join(VERIFY_IDS)}")
    if gamma is not None and not 0 <= gamma <= 1:
        bad("gamma must lie in [0, 1]")
    if ineq == "reverse-hc":
        if p is not None and p > 1:
            bad("p must be at most 1")
        if p is not None and q is not None and q > p:
            bad("need q <= p")
        if p is not None and q is not None and gamma is not None and \
                gamma > reverse_gamma_bound(p, q) * (1 + 1e-12):
            bad("gamma above sqrt((1-p)/(1-q))")
    elif ineq == "forward-hc":
        if p is not None and p < 1:
            bad("p must be at least 1")
        if p is not None and q is not None and q < p:
            bad("need q >= p")
        if p is not None and q is not None and gamma is not None and \
                gamma > forward_gamma_bound(p, q) * (1 + 1e-12):
            bad("gamma above sqrt((p-1)/(q-1))")
    elif ineq == "strong-reverse-holder":
        for x in (p, q):
            if x is not None and x > 1:
                bad("p and q must be at most 1")
        if p is not None and q is not None and gamma is not None and \
                gamma > strong_holder_gamma_bound(p, q) * (1 + 1e-12):
            bad("gamma above sqrt((1-p)(1-q))")
    elif ineq == "reverse-holder":
        if p is not None and not 0 < p <= 1:
            bad("p must lie in (0, 1]")
    elif ineq in ("reverse-minkowski", "variational", "expansivity"):
        if p is not None and (p >= 1 or p == 0):
            bad("p must be below 1 and nonzero")
    elif ineq in ("sv", "gross", "plsi"):
        for x in (p, q):
            if x is not None and not 0 < x <= 2:
                bad("exponents must lie in (0, 2]")
        if ineq != "sv" and p == 1:
            bad("p = 1 is excluded")
        if ineq == "sv" and p is not None and q is not None and p < q:
            bad("need p >= q")


def _trial(ineq, rng, i, d, n, p, q, gamma, rtol, pools):
    if ineq == "reverse-hc":
        pp, qq = _reverse_pair(rng, i)
        pp = pp if p is None else p
        qq = qq if q is None else q
        if qq > pp:
            qq = pp - float(rng.uniform(0.0, 2.0))
        g = reverse_gamma_bound(pp, qq) if gamma is None else gamma
        f = _operator(rng, d, pp <= 0, allow_singular=qq > 0)
        return verify_reverse_hc(DepolarizingFamily(n, g), f, pp, qq, rtol=rtol)
    if ineq == "forward-hc":
        pp = float(rng.uniform(1.0, 3.0)) if p is None else p
        qq = float(rng.uniform(pp, 6.0)) if q is None else q
        g = forward_gamma_bound(pp, qq) if gamma is None else gamma
        f = random_hermitian(d, rng, scale=float(10 ** rng.uniform(-1, 1)))
        return verify_forward_hc(DepolarizingFamily(n, g), f, pp, qq, rtol=rtol)
    if ineq == "strong-reverse-holder":
        pp = _exponent_below_one(rng) if p is None else p
        qq = _exponent_below_one(rng) if q is None else q
        g = min(1.0, strong_holder_gamma_bound(pp, qq)) if gamma is None else gamma
        f = _operator(rng, d, pp <= 0)
        h = _operator(rng, d, qq <= 0)
        return verify_strong_reverse_holder(f, h, pp, qq, g, rtol=rtol)
    if ineq == "reverse-holder":
        pp = (1.0 if rng.random() < 0.05 else float(rng.uniform(1e-3, 1.0))) if p is None else p
        return verify_reverse_holder(_operator(rng, d, False), _operator(rng, d, True), pp, rtol)
    if ineq == "reverse-minkowski":
        pp = _exponent_below_one(rng) if p is None else p
        return verify_reverse_minkowski(_operator(rng, d, pp <= 0), _operator(rng, d, pp <= 0),
                                        pp, rtol)
    if ineq == "variational":
        pp = _exponent_below_one(rng) if p is None else p
        return verify_variational(_operator(rng, d, True), pp, samples=8, seed=rng, rtol=rtol)
    if ineq == "expansivity":
        pp = _exponent_below_one(rng) if p is None else p
        ch = pools["unital"][i % len(pools["unital"])]
        return verify_expansivity(ch, _operator(rng, d, pp <= 0), pp, rtol)
    if ineq == "sv":
        a, b = _sv_exponent(rng), _sv_exponent(rng)
        pp = max(a, b) if p is None else p
        qq = min(a, b) if q is None else q
        gen = pools["generators"][i % len(pools["generators"])]
        return verify_stroock_varopoulos(gen, _operator(rng, d, True), pp, qq, rtol)
    if ineq == "gross":
        pp = _gross_exponent(rng) if p is None else p
        gen = pools["generators"][i % len(pools["generators"])]
        return verify_gross(gen, _operator(rng, d, True), pp, rtol)
    if ineq == "plsi":
        pp = _gross_exponent(rng) if p is None else p
        gen = pools["depolarizing"]
        return verify_plsi(gen, _operator(rng, d, pp < 1), pp, 2.0, rtol)
    if ineq == "lsi2":
        return verify_lsi2(pools["depolarizing"], _operator(rng, d, False), 2.0, rtol)
    raise ContractError(f"unknown inequality {ineq!r}")


def verify_campaign(ineq, trials=100, seed=0, qubits=None, dim=None, p=None, q=None,
                    gamma=None, rtol=None):
    """Run ``trials`` random instances of one inequality.

    Unfixed exponents are sampled across the whole hypothesis region and the
    noise sits on the boundary of its admissible range, where the
    inequalities are tightest.
    """
    check_fixed_parameters(ineq, p, q, gamma)
    if ineq in QUBIT_IDS:
        n = _qubits_of(qubits, dim)
        d = 2 ** n
    else:
        d = int(dim) if dim is not None else (2 ** int(qubits) if qubits is not None else 2)
        n = d.bit_length() - 1
    if rtol is None:
        rtol = HC_RTOL if ineq in ("reverse-hc", "forward-hc") else DEFAULT_RTOL
    pools = {}
    if ineq == "expansivity":
        pools["unital"] = [random_unital_channel(d, trial_rng(seed, 10 ** 9 + k)) for k in range(4)]
    if ineq in ("sv", "gross"):
        pools["generators"] = _generator_pool(d, seed)
    if ineq in ("plsi", "lsi2"):
        pools["depolarizing"] = DepolarizingGenerator(n)
    reports = []
    for i in range(trials):
        rep = _trial(ineq, trial_rng(seed, i), i, d, n, p, q, gamma, rtol, pools)
        rep.params["trial"] = i
        reports.append(rep)
    return reports


def summarize(reports):
    slacks = [r.slack for r in reports]
    return {"pass_count": sum(r.passed for r in reports),
            "fail_count": sum(not r.passed for r in reports),
            "min_slack": min(slacks) if slacks else None}


# ---------------------------------------------------------------------------
# Derivative identity
# ---------------------------------------------------------------------------


def derivative_campaign(trials=100, seed=0, qubits=None, h=1e-4, rtol=1e-5):
    """Closed-form ``d/dp ln ||T_{t(p)} f||_p`` against central differences.

    Each trial draws ``f > 0``, ``q0`` and ``p`` with ``t(p) = (alpha/4)
    ln((1-q0)/(1-p))`` for the depolarizing site sum (``alpha = 2``); every
    fourth trial uses the frozen path ``t = 0`` instead. The report's slack is
    ``rtol * max(|fd|, 1e-3) - |closed - fd|``.
    """
    reports = []
    for i in range(trials):
        rng = trial_rng(seed, i)
        n = int(qubits) if qubits is not None else int(rng.integers(1, 3))
        gen = DepolarizingGenerator(n)
        f = random_psd(2 ** n, rng, PD)
        q0 = float(rng.uniform(-2.0, 0.8))
        p = float(rng.uniform(q0 + 0.05, 0.95))
        if abs(p) < 0.05:
            p = 0.05 if p >= 0 else -0.05
        p = max(p, q0 + 0.05)
        if i % 4 == 3:
            t_func, dt_func, path = (lambda _: 0.0), (lambda _: 0.0), "frozen"
        else:
            t_func, dt_func = reverse_time_path(2.0, q0)
            path = "reverse"
        closed = norm_derivative(gen, f, p, t_func, dt_func)
        fn = log_norm_along(gen, f, t_func)
        fd = (fn(p + h) - fn(p - h)) / (2 * h)
        err = abs(closed - fd)
        scale = max(abs(fd), 1e-3)
        params = {"n": n, "p": p, "q0": q0, "h": h, "path": path, "trial": i,
                  "relative_error": err / scale}
        rep = make_report("norm-derivative", params, closed, fd, rtol * scale - err, 0.0)
        reports.append(rep)
    return reports


# ---------------------------------------------------------------------------
# Log-Sobolev constant
# ---------------------------------------------------------------------------


def lsi_report(qubits=1, restarts=20, seed=0, budget=400):
    """Best ratio ``Ent(f^2)/E(f, f)`` found by search, reported against 2.

    ``slack = 2 - best``: non-negative when the search stays below the
    constant 2 of the depolarizing site sum.
    """
    gen = DepolarizingGenerator(qubits)
    best = estimate_lsi2_constant(gen, restarts=restarts, seed=seed, budget=budget)
    params = {"n": qubits, "restarts": restarts, "seed": seed, "budget": budget,
              "alpha_lower_bound": best}
    return make_report("lsi2-constant", params, best, 2.0, 2.0 - best, 1e-8 / 2.0)


# ---------------------------------------------------------------------------
# Mixing
# ---------------------------------------------------------------------------


def mixing_campaign(trials=100, seed=0, qubits=None, sigma=None, alpha=None, gamma=None,
                    rtol=DEFAULT_RTOL):
    """Random subspace instances; every fourth has ``M`` orthogonal to ``S``.

    With ``sigma`` fixed, ``dim S = sigma 2^n`` must be an integer; with
    ``alpha`` fixed ``tau(M) = sigma^alpha``.
    """
    reports = []
    for i in range(trials):
        rng = trial_rng(seed, i)
        n = int(qubits) if qubits is not None else int(rng.integers(2, 5))
        d = 2 ** n
        dim_s = None
        if sigma is not None:
            dim_s = int(round(sigma * d))
            if dim_s < 1 or abs(dim_s - sigma * d) > 1e-9:
                raise ContractError(f"sigma * 2^n must be a positive integer, got {sigma * d}")
        g = float(rng.uniform(0.0, 0.99)) if gamma is None else gamma
        orth = (i % 4 == 3) and (dim_s is None or dim_s < d) and alpha is None
        tau = None
        if alpha is not None:
            tau = (dim_s / d if dim_s else float(rng.integers(1, d + 1)) / d) ** alpha
        inst = random_subspace_instance(n, rng, gamma=g, orthogonal=orth, dim_s=dim_s,
                                        tau_target=tau)
        rep = verify_mixing(inst, rtol)
        rep.params.update({"trial": i, "orthogonal": orth})
        reports.append(rep)
    return reports


# ---------------------------------------------------------------------------
# NICD
# ---------------------------------------------------------------------------


def nicd_campaign(trials=100, seed=0, rtol=DEFAULT_RTOL):
    """Constructed game instances with ``delta`` below ``p_all_M / 2``."""
    reports = []
    families = ("product", "ghz", "haar")
    for i in range(trials):
        rng = trial_rng(seed, i)
        n = int(rng.integers(1, 5))
        bf = families[i % 3]
        basis = make_basis(bf, n, rng)
        mf = "majority" if n % 2 == 1 and rng.random() < 0.5 else "random"
        w = indicator_weights(mf, n, rng)
        if rng.random() < 0.3:
            # fractional balanced weights: pair labels and split mass
            w = np.where(w > 0, float(rng.uniform(0.5, 1.0)), 0.0)
            w = np.where(w == 0, 1.0 - w.max(), w)
        gamma = float(rng.uniform(0.3, 1.0))
        k = int(rng.integers(1, 9))
        inst = NicdInstance(n, basis, diagonal_measurement(basis, w), gamma, k)
        p_all = success_probability(inst).p_all_M
        delta = p_all / 2.0 * float(rng.uniform(0.05, 1.0))
        delta = min(delta, 0.999)
        rep = verify_nicd_contradiction(inst, delta, rtol)
        rep.params.update({"trial": i, "basis": bf, "measurement": mf})
        reports.append(rep)
    return reports


# ---------------------------------------------------------------------------
# Diagonal equivalence with the boolean cube
# ---------------------------------------------------------------------------


def _rel(a, b):
    return abs(a - b) / max(1.0, abs(a), abs(b))


def _diag(v):
    return HermitianOperator.diag(np.asarray(v, dtype=float))


def diagonal_equivalence_trial(ineq, rng, n):
    """One diagonal instance: returns the largest relative discrepancy between
    the quantum report sides and the cube computation."""
    d = 2 ** n
    pos = rng.uniform(0.05, 3.0, size=d)
    pos2 = rng.uniform(0.05, 3.0, size=d)
    f, g = _diag(pos), _diag(pos2)
    if ineq == "reverse-holder":
        p = float(rng.uniform(0.01, 1.0))
        rep = verify_reverse_holder(f, g, p)
        ref = cube.sides_reverse_holder(pos, pos2, p)
    elif ineq == "reverse-minkowski":
        p = _exponent_below_one(rng)
        rep = verify_reverse_minkowski(f, g, p)
        ref = cube.sides_reverse_minkowski(pos, pos2, p)
    elif ineq == "variational":
        p = _exponent_below_one(rng)
        rep = verify_variational(f, p, samples=2, seed=rng)
        attained, norm = cube.sides_variational(pos, p)
        return max(_rel(rep.params["attained"], attained), _rel(rep.rhs, norm))
    elif ineq == "expansivity":
        p = _exponent_below_one(rng)
        gamma = float(rng.uniform(0.0, 1.0))
        rep = verify_expansivity(DepolarizingFamily(n, gamma), f, p)
        ref = cube.sides_expansivity(pos, gamma, p)
    elif ineq == "sv":
        a, b = _sv_exponent(rng), _sv_exponent(rng)
        rep = verify_stroock_varopoulos(DepolarizingGenerator(n), f, max(a, b), min(a, b))
        ref = cube.sides_sv(pos, max(a, b), min(a, b))
    elif ineq == "gross":
        p = _gross_exponent(rng)
        rep = verify_gross(DepolarizingGenerator(n), f, p)
        ref = cube.sides_gross(pos, p)
    elif ineq == "plsi":
        p = _gross_exponent(rng)
        rep = verify_plsi(DepolarizingGenerator(n), f, p, 2.0)
        ref = cube.sides_plsi(pos, p, 2.0)
    elif ineq == "reverse-hc":
        p, q = _reverse_pair(rng, int(rng.integers(0, 3)))
        gamma = reverse_gamma_bound(p, q)
        rep = verify_reverse_hc(DepolarizingFamily(n, gamma), f, p, q, rtol=HC_RTOL)
        ref = cube.sides_reverse_hc(pos, p, q, gamma)
        cl = cube.classical_hc_check(pos, p, q, gamma, "reverse")
        return max(_rel(rep.lhs, ref[0]), _rel(rep.rhs, ref[1]), _rel(rep.slack, cl.slack))
    elif ineq == "forward-hc":
        p = float(rng.uniform(1.0, 3.0))
        q = float(rng.uniform(p, 6.0))
        gamma = forward_gamma_bound(p, q)
        vals = rng.normal(size=d)
        rep = verify_forward_hc(DepolarizingFamily(n, gamma), _diag(vals), p, q, rtol=HC_RTOL)
        ref = cube.sides_forward_hc(vals, p, q, gamma)
        cl = cube.classical_hc_check(vals, p, q, gamma, "forward")
        return max(_rel(rep.lhs, ref[0]), _rel(rep.rhs, ref[1]), _rel(rep.slack, cl.slack))
    elif ineq == "strong-reverse-holder":
        p, q = _exponent_below_one(rng), _exponent_below_one(rng)
        gamma = min(1.0, strong_holder_gamma_bound(p, q))
        rep = verify_strong_reverse_holder(f, g, p, q, gamma)
        ref = cube.sides_strong_reverse_holder(pos, pos2, p, q, gamma)
    elif ineq == "lsi2":
        rep = verify_lsi2(DepolarizingGenerator(n), f)
        ref = (cube.cube_entropy(pos ** 2), 2.0 * cube.cube_dirichlet(pos, pos))
    else:
        raise ContractError(f"unknown inequality {ineq!r}")
    return max(_rel(rep.lhs, ref[0]), _rel(rep.rhs, ref[1]))


def diagonal_equivalence_campaign(ineq, trials=100, seed=0, max_qubits=3):
    """Largest discrepancy over ``trials`` random diagonal instances."""
    worst = 0.0
    for i in range(trials):
        rng = trial_rng(seed, i)
        n = int(rng.integers(1, max_qubits + 1))
        worst = max(worst, diagonal_equivalence_trial(ineq, rng, n))
    return worst

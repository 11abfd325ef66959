"""Adversarial search for small or negative inequality slack.

Operators are parameterized by log-eigenvalues (or raw eigenvalues for
Hermitian inputs) plus ``d*d`` coefficients of a Hermitian generator whose
exponential supplies the eigenbasis. The optimizer is a derivative-free
random-direction descent with step adaptation; budgets count verifier
evaluations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import DepolarizingFamily
from .errors import ContractError, DomainError, NumericalError, SoundnessError
from .linalg import HermitianOperator, make_rng, unitary_from_generator
from .verifiers import (
    DEFAULT_RTOL,
    operator_from_witness,
    operator_witness,
    reverse_gamma_bound,
    forward_gamma_bound,
    strong_holder_gamma_bound,
    verify_forward_hc,
    verify_reverse_hc,
    verify_strong_reverse_holder,
)


@dataclass
class DescentResult:
    x: np.ndarray
    value: float
    evaluations: int


def random_direction_descent(fun, x0, rng, budget=200, step=0.5, min_step=1e-9):
    """Minimize ``fun`` by accepting improving moves along random directions.

    A successful step grows the step size by 1.5, a failed one (tried in
    both directions) shrinks it by half.
    """
    x = np.array(x0, dtype=float)
    fx = fun(x)
    evals = 1
    while evals < budget and step > min_step:
        u = rng.standard_normal(x.size)
        u /= np.linalg.norm(u)
        moved = False
        for sign in (1.0, -1.0):
            y = x + sign * step * u
            fy = fun(y)
            evals += 1
            if fy < fx:
                x, fx, moved = y, fy, True
                break
            if evals >= budget:
                break
        step = step * 1.5 if moved else step * 0.5
    return DescentResult(x, fx, evals)


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------


def _positive_operator(x, d, diagonal):
    lam = np.exp(x[:d] - np.max(x[:d]))
    lam = lam / lam.mean()
    if diagonal:
        return HermitianOperator.diag(lam)
    return HermitianOperator.from_spectrum(lam, unitary_from_generator(x[d:], d))


def _hermitian_operator(x, d, diagonal):
    lam = x[:d] / max(np.mean(np.abs(x[:d])), 1e-300)
    if diagonal:
        return HermitianOperator.diag(lam)
    return HermitianOperator.from_spectrum(lam, unitary_from_generator(x[d:], d))


@dataclass(frozen=True)
class SearchTarget:
    """How to build operators for an inequality and evaluate its report."""

    n_operators: int
    make_operator: object
    evaluate: object
    gamma_bound: object


def _eval_reverse_hc(ops, p, q, gamma, n):
    return verify_reverse_hc(DepolarizingFamily(n, gamma), ops[0], p, q, enforce_range=False)


def _eval_forward_hc(ops, p, q, gamma, n):
    return verify_forward_hc(DepolarizingFamily(n, gamma), ops[0], p, q, enforce_range=False)


def _eval_strong(ops, p, q, gamma, n):
    return verify_strong_reverse_holder(ops[0], ops[1], p, q, gamma, enforce_range=False)


REGISTRY = {
    "reverse-hc": SearchTarget(1, _positive_operator, _eval_reverse_hc, reverse_gamma_bound),
    "forward-hc": SearchTarget(1, _hermitian_operator, _eval_forward_hc, forward_gamma_bound),
    "strong-reverse-holder": SearchTarget(2, _positive_operator, _eval_strong,
                                          strong_holder_gamma_bound),
}


def get_target(inequality_id):
    try:
        return REGISTRY[inequality_id]
    except KeyError:
        raise ContractError(f"no search registered for {inequality_id!r}; "
                            f"known: {sorted(REGISTRY)}") from None


@dataclass
class SearchResult:
    inequality_id: str
    params: dict
    best_slack: float
    in_region: bool
    witness: list
    report: object
    evaluations: int

    def to_dict(self):
        return {"inequality_id": self.inequality_id, "params": dict(self.params),
                "best_slack": self.best_slack, "in_region": self.in_region,
                "witness": self.witness, "evaluations": self.evaluations}


def _in_region(inequality_id, p, q, gamma):
    if inequality_id == "forward-hc":
        return 1 <= p <= q and gamma <= forward_gamma_bound(p, q) * (1 + 1e-12)
    if inequality_id == "reverse-hc":
        return q <= p <= 1 and gamma <= reverse_gamma_bound(p, q) * (1 + 1e-12)
    return p <= 1 and q <= 1 and gamma <= strong_holder_gamma_bound(p, q) * (1 + 1e-12)


def minimize_slack(inequality_id, p, q, gamma, n=1, budget=2000, seed=0, restarts=4,
                   diagonal_first=True, rtol=DEFAULT_RTOL):
    """Smallest slack found for fixed ``(p, q, gamma)`` over ``n``-qubit operators.

    Each restart spends half its budget on diagonal operators (the classical
    extremal family) when ``diagonal_first`` is set, then continues over full
    operators from the best diagonal point with a random eigenbasis. Restarts
    begin at increasing spreads of the log-eigenvalues, the first one close to
    flat. Ties are resolved by restart index, so results depend only on
    ``seed``.

    Raises
    ------
    SoundnessError
        If a violation beyond tolerance is found inside the hypothesis region.
    """
    target = get_target(inequality_id)
    d = 2 ** n
    p, q, gamma = float(p), float(q), float(gamma)
    in_region = _in_region(inequality_id, p, q, gamma)
    rng = make_rng(seed)
    width = d + d * d
    per_restart = max(budget // max(restarts, 1), 4)
    total = 0
    best = None

    def build(x, diagonal):
        return [target.make_operator(x[i * width:(i + 1) * width], d, diagonal)
                for i in range(target.n_operators)]

    def objective(diagonal):
        def fun(x):
            try:
                return target.evaluate(build(x, diagonal), p, q, gamma, n).slack
            except (DomainError, NumericalError):
                return math.inf
        return fun

    for r in range(restarts):
        spread = 0.05 * 4.0 ** r
        x0 = np.concatenate([np.concatenate([rng.normal(scale=spread, size=d),
                                             rng.normal(scale=1.0, size=d * d)])
                             for _ in range(target.n_operators)])
        if inequality_id == "forward-hc":
            for i in range(target.n_operators):
                x0[i * width:i * width + d] += 1.0
        phases = [(True, per_restart // 2), (False, per_restart - per_restart // 2)] \
            if diagonal_first else [(False, per_restart)]
        x = x0
        for diagonal, b in phases:
            res = random_direction_descent(objective(diagonal), x, rng, budget=b,
                                           step=max(spread, 0.1))
            total += res.evaluations
            x = res.x
            if math.isfinite(res.value) and (best is None or res.value < best[0]):
                best = (res.value, res.x.copy(), diagonal, r)
    if best is None:
        raise NumericalError("search found no evaluable operator")
    _, xbest, diagonal, _ = best
    ops = build(xbest, diagonal)
    report = target.evaluate(ops, p, q, gamma, n)
    report.witness = {"operators": [operator_witness(f) for f in ops]}
    params = {"p": p, "q": q, "gamma": gamma, "n": n, "budget": budget, "seed": seed,
              "restarts": restarts, "diagonal_first": diagonal_first}
    result = SearchResult(inequality_id, params, report.slack, in_region,
                          report.witness["operators"], report, total)
    if in_region and report.slack < -report.tol:
        raise SoundnessError(
            f"{inequality_id}: slack {report.slack:.3e} inside the hypothesis region "
            f"(p={p}, q={q}, gamma={gamma}, n={n})")
    return result


def replay_witness(inequality_id, witness, p, q, gamma, n=1):
    """Re-run the verifier on serialized witness operators."""
    target = get_target(inequality_id)
    ops = [operator_from_witness(w) for w in witness]
    return target.evaluate(ops, float(p), float(q), float(gamma), n)


def parse_grid(spec):
    """``"a:b:steps"`` to ``steps`` evenly spaced values from ``a`` to ``b``."""
    try:
        a, b, steps = spec.split(":")
        a, b, steps = float(a), float(b), int(steps)
    except ValueError:
        raise ContractError(f"grid must look like a:b:steps, got {spec!r}") from None
    if steps < 1:
        raise ContractError("grid needs at least one step")
    return [a] if steps == 1 else [float(x) for x in np.linspace(a, b, steps)]


def sharpness_profile(inequality_id, p, q, gammas, n=1, budget=2000, seed=0, restarts=4):
    """Minimal slack found at each noise value of ``gammas``.

    Returns
    -------
    dict
        ``threshold`` (the admissible noise bound), ``rows`` with one entry
        per grid point and ``sign_change``, the pair of consecutive grid
        points where the minimal slack first turns negative beyond tolerance
        (``None`` if it never does).
    """
    target = get_target(inequality_id)
    rows = []
    for i, gamma in enumerate(gammas):
        res = minimize_slack(inequality_id, p, q, gamma, n=n, budget=budget, seed=seed + i,
                             restarts=restarts)
        rows.append({"gamma": float(gamma), "min_slack": res.best_slack,
                     "tol": res.report.tol, "in_region": res.in_region,
                     "witness": res.witness})
    sign_change = None
    for a, b in zip(rows[:-1], rows[1:]):
        if a["min_slack"] >= -a["tol"] and b["min_slack"] < -b["tol"]:
            sign_change = [a["gamma"], b["gamma"]]
            break
    return {"inequality_id": inequality_id, "p": float(p), "q": float(q), "n": n,
            "threshold": target.gamma_bound(float(p), float(q)), "rows": rows,
            "sign_change": sign_change}

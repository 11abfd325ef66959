"""Classical boolean-cube counterpart of the quantum modules.

Functions on ``{0,1}^n`` are dense tables of ``2^n`` reals indexed so that
bit 1 is the most significant bit of the index; ``diag(f)`` then lines up
with the qubit ordering used for ``D_gamma^{(x)n}``.

Everything here is computed directly on value tables and never calls the
spectral code, so the quantum verifiers can be cross-checked against it on
diagonal inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DomainError
from .verifiers import make_report, DEFAULT_RTOL

MAX_BITS = 15


@dataclass(frozen=True)
class CubeFunction:
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0 or v.size & (v.size - 1):
            raise ValueError("a cube function needs 2^n values")
        if not np.all(np.isfinite(v)):
            raise ValueError("cube function values must be finite")
        if v.size > 2 ** MAX_BITS:
            raise ContractError(f"at most {MAX_BITS} bits supported")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.size.bit_length() - 1

    def to_json(self):
        return [float(x) for x in self.values]

    @classmethod
    def from_json(cls, obj):
        return cls(np.asarray(obj, dtype=float))


def _values(f):
    return f.values if isinstance(f, CubeFunction) else np.asarray(f, dtype=float)


def _bits(v):
    return v.size.bit_length() - 1


def noise_operator(f, gamma):
    """``(T_gamma f)(x) = E[f(y)]``, each bit of ``y`` flipped w.p. ``(1-gamma)/2``.

    Applied as ``n`` single-bit averaging steps.
    """
    if not 0.0 <= gamma <= 1.0:
        raise DomainError(f"gamma must lie in [0, 1], got {gamma}")
    v = _values(f)
    n = _bits(v)
    keep, flip = (1.0 + gamma) / 2.0, (1.0 - gamma) / 2.0
    t = v.reshape((2,) * n) if n else v.copy()
    for k in range(n):
        t = keep * t + flip * np.flip(t, axis=k)
    return CubeFunction(t.reshape(-1))


def lp_norm(f, p):
    """``(2^-n sum_x |f(x)|^p)^(1/p)``; ``0`` is the geometric mean, ``+-inf`` max/min."""
    v = _values(f)
    p = float(p)
    if p < 1 and np.any(v < 0):
        raise DomainError("p < 1 needs a non-negative function")
    if p <= 0 and np.any(v <= 0):
        raise DomainError("p <= 0 needs a strictly positive function")
    a = np.abs(v)
    if p == math.inf:
        return float(a.max())
    if p == -math.inf:
        return float(a.min())
    if abs(p) < 1e-150:
        # geometric-mean limit; p * ln(a) would underflow
        return float(math.exp(np.mean(np.log(a)))) if np.all(a > 0) else 0.0
    if np.any(a == 0):
        return float(np.mean(a ** p) ** (1.0 / p))
    # shifted log-mean-exp; expm1/log1p stay accurate as p -> 0
    x = p * np.log(a)
    m = x.max()
    return float(math.exp((m + math.log1p(np.mean(np.expm1(x - m)))) / p))


def mean(f):
    return float(np.mean(_values(f)))


def cube_entropy(f):
    v = _values(f)
    m = v.mean()
    with np.errstate(divide="ignore", invalid="ignore"):
        xlx = np.where(v > 0, v * np.log(np.where(v > 0, v, 1.0)), 0.0)
    return float(xlx.mean() - m * math.log(m))


def cube_generator(g):
    """Site-sum generator ``sum_k (g(x) - g(x xor e_k)) / 2``."""
    v = _values(g)
    n = _bits(v)
    t = v.reshape((2,) * n)
    out = np.zeros_like(t)
    for k in range(n):
        out += 0.5 * (t - np.flip(t, axis=k))
    return out.reshape(-1)


def cube_dirichlet(f, g):
    return float(np.mean(_values(f) * cube_generator(g)))


def reverse_range_ok(p, q, gamma):
    if not (-math.inf < q <= p <= 1):
        return False
    bound = 1.0 if p == q else math.sqrt((1.0 - p) / (1.0 - q))
    return gamma <= bound * (1 + 1e-12)


def forward_range_ok(p, q, gamma):
    if not 1 <= p <= q:
        return False
    if p == q:
        bound = 1.0
    elif q == math.inf:
        bound = 0.0
    else:
        bound = math.sqrt((p - 1.0) / (q - 1.0))
    return gamma <= bound * (1 + 1e-12)


def classical_hc_check(f, p, q, gamma, direction, rtol=DEFAULT_RTOL, check_range=True):
    """Classical forward or reverse hypercontractivity on a cube function.

    ``direction="forward"`` checks ``||T f||_q <= ||f||_p`` (``1 <= p <= q``,
    ``gamma <= sqrt((p-1)/(q-1))``); ``"reverse"`` checks
    ``||T f||_q >= ||f||_p`` (``q <= p <= 1``, ``gamma <= sqrt((1-p)/(1-q))``,
    ``f >= 0``). With ``check_range=False`` out-of-range parameters are
    evaluated and flagged ``in_region = False`` instead of raising.
    """
    v = _values(f)
    p, q = float(p), float(q)
    if direction == "reverse":
        ok = reverse_range_ok(p, q, gamma)
        if np.any(v < 0):
            raise DomainError("reverse hypercontractivity needs f >= 0")
    elif direction == "forward":
        ok = forward_range_ok(p, q, gamma)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    if check_range and not ok:
        raise ContractError(f"parameters outside the {direction} hypercontractive region")
    tf = noise_operator(v, gamma)
    a, b = lp_norm(tf, q), lp_norm(v, p)
    params = {"p": p, "q": q, "gamma": gamma, "n": _bits(v), "direction": direction, "in_region": ok}
    if direction == "reverse":
        return make_report("classical-reverse-hc", params, a, b, a - b, rtol)
    return make_report("classical-forward-hc", params, b, a, b - a, rtol)


def majority_nicd(n, k, gamma):
    """Exact probability that ``k`` players all output 1 with majority on ``n`` bits.

    Inputs are grouped by Hamming weight ``w``: the noisy copy has
    ``Bin(w, 1-eps) + Bin(n-w, eps)`` ones, ``eps = (1-gamma)/2``.
    """
    if n % 2 == 0 or n < 1:
        raise ContractError("majority needs an odd number of bits")
    if n > MAX_BITS:
        raise ContractError(f"at most {MAX_BITS} bits supported")
    if not 0.0 <= gamma <= 1.0:
        raise DomainError(f"gamma must lie in [0, 1], got {gamma}")
    eps = (1.0 - gamma) / 2.0

    def binom_pmf(m, prob):
        return np.array([math.comb(m, j) * prob ** j * (1 - prob) ** (m - j) for j in range(m + 1)])

    total = 0.0
    for w in range(n + 1):
        ones = np.convolve(binom_pmf(w, 1.0 - eps), binom_pmf(n - w, eps))
        p_one = float(ones[n // 2 + 1:].sum())
        total += math.comb(n, w) * p_one ** k
    return total / 2 ** n


def majority_table(n):
    """Indicator of ``sum(x) > n/2`` over ``{0,1}^n``."""
    idx = np.arange(2 ** n)
    weights = np.array([bin(i).count("1") for i in idx])
    return (weights > n / 2).astype(float)


def dictator_table(n):
    """Indicator of the first (most significant) bit."""
    return (np.arange(2 ** n) >> (n - 1) & 1).astype(float)


# ---------------------------------------------------------------------------
# Classical sides of the inequalities, for diagonal cross-checks. Each returns
# (lhs, rhs) in the same orientation as the corresponding quantum report.
# ---------------------------------------------------------------------------


def _holder_conj(p):
    return -math.inf if p == 1 else p / (p - 1.0)


def sides_reverse_holder(f, g, p):
    return mean(_values(f) * _values(g)), lp_norm(f, p) * lp_norm(g, _holder_conj(p))


def sides_reverse_minkowski(f, g, p):
    return lp_norm(_values(f) + _values(g), p), lp_norm(f, p) + lp_norm(g, p)


def sides_expansivity(f, gamma, p):
    return lp_norm(noise_operator(f, gamma), p), lp_norm(f, p)


def sides_variational(f, p):
    v = _values(f)
    pc = _holder_conj(p)
    g = v ** (p - 1.0)
    g = g / lp_norm(g, pc)
    return mean(v * g), lp_norm(v, p)


def _sv(v, p):
    if p == 1:
        return cube_dirichlet(np.log(v), v)
    pc = _holder_conj(p)
    return p * pc * cube_dirichlet(v ** (1.0 / pc), v ** (1.0 / p))


def sides_sv(g, p, q):
    v = _values(g)
    return _sv(v, p), _sv(v, q)


def sides_gross(f, p):
    v = _values(f)
    return cube_dirichlet(v ** (p / 2), v ** (p / 2)), p * p / (4 * (p - 1)) * cube_dirichlet(v ** (p - 1), v)


def sides_plsi(f, p, alpha):
    v = _values(f)
    return cube_entropy(v ** p), alpha * p * p / (4 * (p - 1)) * cube_dirichlet(v ** (p - 1), v)


def sides_reverse_hc(f, p, q, gamma):
    return lp_norm(noise_operator(f, gamma), q), lp_norm(f, p)


def sides_forward_hc(f, p, q, gamma):
    return lp_norm(f, p), lp_norm(noise_operator(f, gamma), q)


def sides_strong_reverse_holder(f, g, p, q, gamma):
    return mean(_values(f) * noise_operator(g, gamma).values), lp_norm(f, p) * lp_norm(g, q)

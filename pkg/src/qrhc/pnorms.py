"""Normalized Schatten p-"norms" for every extended-real exponent.

``||f||_p = (tau(|f|^p))^(1/p)`` with ``tau`` the normalized trace. The
exponent is a plain float; ``0.0`` selects the geometric-mean limit
``exp(tau(ln f))`` and ``math.inf``/``-math.inf`` select the largest singular
value and the smallest eigenvalue.
"""

import math

import numpy as np

from .errors import DomainError
from .linalg import DEFAULT_EPS_PD, as_operator, classify, PositivityClass, psd_eigenvalues


TINY_P = 1e-150


def _logmeanexp(x):
    m = np.max(x)
    if m == -np.inf:
        return -np.inf
    # log1p/expm1 keeps full relative precision when x is nearly constant (|p| -> 0)
    return m + math.log1p(np.mean(np.expm1(x - m)))


def spectral_pnorm(lam, p):
    """p-norm of a vector of non-negative values (|values| for p >= 1).

    Evaluated in log space so that large ``|p|`` neither overflows nor
    underflows.
    """
    lam = np.asarray(lam, dtype=float)
    if p >= 1:
        lam = np.abs(lam)
    if p == math.inf:
        return float(np.max(lam))
    if p == -math.inf:
        return float(np.min(lam))
    with np.errstate(divide="ignore"):
        logs = np.log(lam)
    if abs(p) < TINY_P:
        # the geometric mean is exact to double precision here, and p * ln(lam) would underflow
        return float(math.exp(np.mean(logs))) if np.all(lam > 0) else 0.0
    if p > 0:
        val = _logmeanexp(p * logs)
        return 0.0 if val == -np.inf else float(math.exp(val / p))
    if np.any(lam <= 0):
        return 0.0
    return float(math.exp(_logmeanexp(p * logs) / p))


def pnorm(f, p, eps=DEFAULT_EPS_PD):
    """Normalized Schatten p-norm of a Hermitian operator.

    Parameters
    ----------
    f : HermitianOperator
    p : float
        Any real, ``0.0`` (geometric-mean limit) or ``+/-inf``.

    Notes
    -----
    For ``p >= 1`` any Hermitian ``f`` is accepted and ``|f|`` is formed
    spectrally. For ``0 < p < 1`` ``f`` must be positive semidefinite; for
    ``p <= 0`` (including ``-inf``) positive definite.
    """
    f = as_operator(f)
    p = float(p)
    if math.isnan(p):
        raise ValueError("p is NaN")
    if p >= 1:
        return spectral_pnorm(f.eigenvalues, p)
    cls = classify(f, eps)
    if p > 0:
        if cls is PositivityClass.INDEFINITE:
            raise DomainError(f"||f||_{p} needs f >= 0 (smallest eigenvalue {f.eigenvalues[-1]:.3e})")
        return spectral_pnorm(psd_eigenvalues(f, eps), p)
    if cls is not PositivityClass.POSITIVE_DEFINITE:
        raise DomainError(f"||f||_{p} needs f > 0 (smallest eigenvalue {f.eigenvalues[-1]:.3e})")
    return spectral_pnorm(f.eigenvalues, p)


def holder_conjugate(p):
    """Exponent ``p'`` with ``1/p + 1/p' = 1``.

    ``p = 1`` maps to ``+inf`` and ``+/-inf`` map to 1. ``p = 0`` has no
    conjugate and raises ``DomainError``.
    """
    p = float(p)
    if p == 0:
        raise DomainError("the exponent 0 has no Hoelder conjugate")
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)

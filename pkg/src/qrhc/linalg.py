"""Dense complex Hermitian linear algebra.

Operators are stored as immutable ``HermitianOperator`` values carrying a
write-once spectral cache. All matrix functions go through the cached
eigendecomposition ``A = U diag(lam) U^dagger`` with eigenvalues sorted in
descending order.

Random instances use ``numpy.random.Philox`` (a counter-based generator)
seeded with a 64-bit integer, so a given seed produces the same operator on
every platform numpy supports.
"""

from __future__ import annotations

import enum
import math
import os

import numpy as np

from .errors import CapacityError, DomainError, NumericalError

DEFAULT_EPS_PD = 1e-10
DEFAULT_MAX_DIM = 4096

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, SIGMA_X, SIGMA_Y, SIGMA_Z)


def max_dim():
    """Dimension cap, overridable through the ``QRHC_MAX_DIM`` variable."""
    value = os.environ.get("QRHC_MAX_DIM")
    if value is None:
        return DEFAULT_MAX_DIM
    return int(value)


def check_dim(d):
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    cap = max_dim()
    if d > cap:
        raise CapacityError(f"dimension {d} exceeds cap {cap} (set QRHC_MAX_DIM)")


def make_rng(seed):
    """Return a Philox-backed generator; generators pass through unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))


def trial_rng(seed, index):
    """Independent Philox stream for trial ``index`` of a campaign seeded with ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(index)])))


class PositivityClass(enum.Enum):
    POSITIVE_DEFINITE = "pd"
    POSITIVE_SEMIDEFINITE = "psd"
    INDEFINITE = "indefinite"


class HermitianOperator:
    """A d x d complex Hermitian matrix with a cached eigendecomposition.

    Parameters
    ----------
    matrix : array_like, shape (d, d)
        Entries. Copied; the stored array is read-only and exactly Hermitian
        (the input is symmetrized after the tolerance check).
    check : bool
        Reject inputs with ``max|A - A^dagger| > 1e-12 * max|A|``.
    """

    __slots__ = ("_matrix", "_spectrum")

    def __init__(self, matrix, *, check=True):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        check_dim(m.shape[0])
        if not np.all(np.isfinite(m)):
            raise DomainError("matrix has non-finite entries")
        if check:
            scale = np.max(np.abs(m)) if m.size else 0.0
            dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
            if dev > 1e-12 * scale:
                raise DomainError(f"matrix is not Hermitian (deviation {dev:.3e})")
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        self._matrix = m
        self._spectrum = None

    @classmethod
    def from_spectrum(cls, eigenvalues, eigenvectors):
        """Build ``U diag(eigenvalues) U^dagger`` and seed the spectral cache."""
        lam = np.asarray(eigenvalues, dtype=float)
        u = np.asarray(eigenvectors, dtype=complex)
        order = np.argsort(-lam, kind="stable")
        lam = lam[order]
        u = u[:, order]
        op = cls((u * lam) @ u.conj().T, check=False)
        lam.setflags(write=False)
        u.setflags(write=False)
        op._spectrum = (lam, u)
        return op

    @classmethod
    def diag(cls, values):
        values = np.asarray(values, dtype=float)
        return cls.from_spectrum(values, np.eye(values.shape[0], dtype=complex))

    @classmethod
    def identity(cls, d):
        return cls.diag(np.ones(d))

    @property
    def matrix(self):
        return self._matrix

    @property
    def dim(self):
        return self._matrix.shape[0]

    @property
    def spectrum(self):
        if self._spectrum is None:
            self._spectrum = eigh(self)
        return self._spectrum

    @property
    def eigenvalues(self):
        return self.spectrum[0]

    @property
    def eigenvectors(self):
        return self.spectrum[1]

    def diagonal(self):
        return np.real(np.diag(self._matrix)).copy()

    def is_diagonal(self, atol=0.0):
        off = self._matrix - np.diag(np.diag(self._matrix))
        return bool(np.max(np.abs(off), initial=0.0) <= atol)

    def __add__(self, other):
        if isinstance(other, HermitianOperator):
            _same_dim(self, other)
            return HermitianOperator(self._matrix + other._matrix, check=False)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, HermitianOperator):
            _same_dim(self, other)
            return HermitianOperator(self._matrix - other._matrix, check=False)
        return NotImplemented

    def __mul__(self, c):
        if isinstance(c, (int, float, np.floating, np.integer)):
            c = float(c)
            out = HermitianOperator(c * self._matrix, check=False)
            if self._spectrum is not None:
                lam, u = self._spectrum
                out = HermitianOperator.from_spectrum(c * lam, u)
            return out
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __repr__(self):
        return f"HermitianOperator(dim={self.dim})"


def _same_dim(a, b):
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")


def as_operator(x):
    """Coerce arrays to ``HermitianOperator``; operators pass through."""
    if isinstance(x, HermitianOperator):
        return x
    return HermitianOperator(x)


def jacobi_eigh(matrix, tol=1e-14, max_sweeps=100):
    """Cyclic Jacobi eigensolver for a complex Hermitian matrix.

    Each rotation first removes the phase of the pivot ``a_pq`` with a
    diagonal unitary, then applies a real Givens rotation. Sweeps stop once
    the off-diagonal Frobenius mass drops below ``tol * ||A||_F``.

    Returns eigenvalues (descending) and the unitary of eigenvectors.
    Raises ``NumericalError`` if ``max_sweeps`` is exhausted.
    """
    a = np.array(matrix, dtype=complex)
    d = a.shape[0]
    v = np.eye(d, dtype=complex)
    norm_f = np.linalg.norm(a)
    target = tol * norm_f

    def off_direct():
        return np.linalg.norm(a - np.diag(np.diag(a)))

    for _ in range(max_sweeps):
        if off_direct() <= target:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0 or r <= 1e-300:
                    continue
                phase = apq / r
                app = a[p, p].real
                aqq = a[q, q].real
                theta = (aqq - app) / (2.0 * r)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # G = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                g = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, idx] = v[:, idx] @ g
    else:
        if off_direct() > target:
            raise NumericalError(
                f"Jacobi did not converge in {max_sweeps} sweeps", residual=off_direct()
            )
    lam = np.real(np.diag(a))
    order = np.argsort(-lam, kind="stable")
    return lam[order], v[:, order]


def eigh(a, method="lapack"):
    """Spectral decomposition of a Hermitian operator.

    Parameters
    ----------
    a : HermitianOperator
    method : {"lapack", "jacobi"}
        ``"lapack"`` calls ``numpy.linalg.eigh``; ``"jacobi"`` uses the
        in-package cyclic Jacobi solver.

    Returns
    -------
    eigenvalues : ndarray
        Real, sorted descending.
    eigenvectors : ndarray
        Unitary, columns matching ``eigenvalues``.
    """
    a = as_operator(a)
    m = a.matrix
    if a._spectrum is not None and method == "lapack":
        return a._spectrum
    if method == "lapack":
        lam, u = np.linalg.eigh(m)
        lam = lam[::-1].copy()
        u = u[:, ::-1].copy()
    elif method == "jacobi":
        lam, u = jacobi_eigh(m)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    scale = max(1.0, float(np.max(np.abs(m), initial=0.0)))
    resid = float(np.max(np.abs((u * lam) @ u.conj().T - m), initial=0.0))
    if resid > 1e-10 * scale:
        raise NumericalError(f"eigendecomposition residual {resid:.3e} too large", resid)
    lam.setflags(write=False)
    u.setflags(write=False)
    if a._spectrum is None:
        a._spectrum = (lam, u)
    return lam, u


def classify(a, eps=DEFAULT_EPS_PD):
    """Classify ``a`` as PD, PSD or indefinite with relative threshold ``eps``."""
    lam = as_operator(a).eigenvalues
    lmax, lmin = lam[0], lam[-1]
    if lmin > eps * lmax and lmax > 0:
        return PositivityClass.POSITIVE_DEFINITE
    if lmin >= -eps * max(1.0, lmax):
        return PositivityClass.POSITIVE_SEMIDEFINITE
    return PositivityClass.INDEFINITE


def require_psd(a, name="operator", eps=DEFAULT_EPS_PD):
    if classify(a, eps) is PositivityClass.INDEFINITE:
        raise DomainError(f"{name} must be positive semidefinite "
                          f"(smallest eigenvalue {a.eigenvalues[-1]:.3e})")


def require_pd(a, name="operator", eps=DEFAULT_EPS_PD):
    if classify(a, eps) is not PositivityClass.POSITIVE_DEFINITE:
        raise DomainError(f"{name} must be positive definite "
                          f"(smallest eigenvalue {a.eigenvalues[-1]:.3e})")


def psd_eigenvalues(a, eps=DEFAULT_EPS_PD):
    """Eigenvalues of a PSD operator with the near-zero band clamped to 0."""
    a = as_operator(a)
    require_psd(a, eps=eps)
    lam = a.eigenvalues.copy()
    lam[lam <= eps * max(lam[0], 0.0)] = 0.0
    return lam


def mat_fun(a, phi, domain="any", eps=DEFAULT_EPS_PD):
    """Apply a scalar function spectrally: ``U phi(lam) U^dagger``.

    ``domain`` is one of ``"any"``, ``"psd"`` (clamps the near-zero band
    before applying ``phi``) or ``"pd"``. A non-finite ``phi`` value raises
    ``DomainError`` naming the eigenvalue responsible.
    """
    a = as_operator(a)
    if domain == "pd":
        require_pd(a, eps=eps)
        lam = a.eigenvalues
    elif domain == "psd":
        lam = psd_eigenvalues(a, eps)
    elif domain == "any":
        lam = a.eigenvalues
    else:
        raise ValueError(f"unknown domain {domain!r}")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        vals = np.asarray(phi(lam), dtype=float)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        raise DomainError(f"function undefined at eigenvalue {lam[bad][0]!r}")
    return HermitianOperator.from_spectrum(vals, a.eigenvectors)


def mat_pow(a, exponent, eps=DEFAULT_EPS_PD):
    """Matrix power ``a**exponent``.

    Negative exponents need a positive definite operator, fractional ones a
    positive semidefinite one; non-negative integers accept any Hermitian.
    """
    exponent = float(exponent)
    if exponent < 0:
        domain = "pd"
    elif exponent.is_integer():
        domain = "any"
    else:
        domain = "psd"
    return mat_fun(a, lambda x: np.power(x, exponent), domain, eps)


def mat_log(a, eps=DEFAULT_EPS_PD):
    return mat_fun(a, np.log, "pd", eps)


def mat_abs(a):
    return mat_fun(a, np.abs)


def tensor(a, b):
    """Kronecker product ``a (x) b``; spectra combine without a new eigh."""
    a = as_operator(a)
    b = as_operator(b)
    check_dim(a.dim * b.dim)
    if a._spectrum is not None and b._spectrum is not None:
        lam = np.kron(a.eigenvalues, b.eigenvalues)
        u = np.kron(a.eigenvectors, b.eigenvectors)
        return HermitianOperator.from_spectrum(lam, u)
    return HermitianOperator(np.kron(a.matrix, b.matrix), check=False)


def tensor_all(ops):
    out = as_operator(ops[0])
    for op in ops[1:]:
        out = tensor(out, op)
    return out


def ntrace(a):
    """Normalized trace ``tr(a) / d``."""
    m = a.matrix if isinstance(a, HermitianOperator) else np.asarray(a)
    return float(np.real(np.trace(m))) / m.shape[0]


def hs_inner(a, b):
    """Hilbert-Schmidt inner product ``tau(a^dagger b)`` of Hermitian operators."""
    a = as_operator(a)
    b = as_operator(b)
    _same_dim(a, b)
    return float(np.real(np.vdot(a.matrix, b.matrix))) / a.dim


def ntrace_product(a, b):
    """``tau(a b)`` for Hermitian ``a``, ``b`` without forming the product."""
    ma = a.matrix if isinstance(a, HermitianOperator) else np.asarray(a)
    mb = b.matrix if isinstance(b, HermitianOperator) else np.asarray(b)
    return float(np.real(np.sum(ma.T * mb))) / ma.shape[0]


def _complex_gaussian(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def random_psd(d, seed, cls=PositivityClass.POSITIVE_SEMIDEFINITE, rank=None):
    """Random Wishart operator ``G^dagger G``.

    ``G`` has i.i.d. standard complex Gaussian entries (``E|g|^2 = 1``), shape
    ``(rank or d, d)``. For ``cls=POSITIVE_DEFINITE`` the shift
    ``1e-3 * lambda_max * I`` is added.
    """
    check_dim(d)
    rng = make_rng(seed)
    g = _complex_gaussian(rng, (rank or d, d))
    f = HermitianOperator(g.conj().T @ g, check=False)
    if cls is PositivityClass.POSITIVE_DEFINITE:
        lam, u = f.spectrum
        lam = np.clip(lam, 0.0, None) + 1e-3 * lam[0]
        f = HermitianOperator.from_spectrum(lam, u)
    elif cls is PositivityClass.INDEFINITE:
        raise ValueError("random_psd cannot produce indefinite operators")
    return f


def random_hermitian(d, seed, scale=1.0):
    """Random GUE-like operator ``scale * (G + G^dagger) / 2``."""
    check_dim(d)
    rng = make_rng(seed)
    g = _complex_gaussian(rng, (d, d))
    return HermitianOperator(scale * 0.5 * (g + g.conj().T), check=False)


def random_unitary(d, seed):
    """Haar-random unitary from the phase-corrected QR of a Gaussian matrix."""
    check_dim(d)
    rng = make_rng(seed)
    q, r = np.linalg.qr(_complex_gaussian(rng, (d, d)))
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def unitary_from_generator(coeffs, d):
    """Unitary ``exp(i H)`` with ``H`` built from ``d*d`` real coefficients.

    The coefficients fill the diagonal and the real/imaginary parts of the
    strict upper triangle of ``H``.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    h = np.zeros((d, d), dtype=complex)
    h[np.diag_indices(d)] = coeffs[:d]
    iu = np.triu_indices(d, 1)
    m = len(iu[0])
    h[iu] = coeffs[d:d + m] + 1j * coeffs[d + m:d + 2 * m]
    h = h + np.triu(h, 1).conj().T
    lam, v = np.linalg.eigh(h)
    return (v * np.exp(1j * lam)) @ v.conj().T

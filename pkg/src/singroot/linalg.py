"""Small dense complex linear algebra built on the LAPACK SVD.

Every routine here records the shapes of the matrices it touches when a
:func:`track_shapes` block is active, which lets callers audit the matrix
sizes used by an algorithm.
"""

import contextlib
import contextvars
from dataclasses import dataclass

import numpy as np

from .errors import BreadthError, ConvergenceError, DegenerateError, RankError

DEFAULT_TAU = 1e-4

_shape_log = contextvars.ContextVar("singroot_shape_log", default=None)


@contextlib.contextmanager
def track_shapes():
    """Collect the shape of every matrix seen by this module inside the block."""
    log = []
    token = _shape_log.set(log)
    try:
        yield log
    finally:
        _shape_log.reset(token)


def record_shape(shape):
    log = _shape_log.get()
    if log is not None:
        log.append(tuple(shape))


@dataclass(frozen=True)
class SvdFactorization:
    """Full SVD ``A = U diag(singvals) V^*`` with deterministic phases."""

    U: np.ndarray
    singvals: np.ndarray
    V: np.ndarray

    @property
    def sigma_min(self):
        return float(self.singvals[-1]) if self.singvals.size else 0.0

    def reconstruct(self):
        t, s = self.U.shape[0], self.V.shape[0]
        S = np.zeros((t, s), dtype=complex)
        k = self.singvals.size
        S[:k, :k] = np.diag(self.singvals)
        return self.U @ S @ self.V.conj().T


@dataclass(frozen=True)
class RegularizedStep:
    y: np.ndarray
    sigma_n: float
    residual: float


def _fix_phase(v):
    # largest-magnitude entry made real positive; ties go to the first index
    k = int(np.argmax(np.abs(v) - 1e-14 * np.arange(v.size)))
    if v[k] == 0:
        return 1.0 + 0j
    return np.conj(v[k]) / abs(v[k])


def svd(A):
    """Full singular value decomposition of a complex matrix."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.size == 0:
        raise ValueError("svd needs a nonempty 2-D matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    record_shape(A.shape)
    try:
        U, s, Vh = np.linalg.svd(A, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(str(exc)) from exc
    V = Vh.conj().T
    for i in range(s.size):
        ph = _fix_phase(V[:, i])
        V[:, i] *= ph
        U[:, i] *= ph
    return SvdFactorization(U, s, V)


def small_singular_count(singvals, tau, floor=0.0):
    """Number of singular values below ``tau * max(sigma_1, floor)``.

    For a tall ``t x s`` matrix only ``s`` singular values exist; a wide
    matrix contributes its missing columns as extra zeros.
    """
    if singvals.size == 0:
        return 0
    ref = max(float(singvals[0]), floor)
    return int(np.sum(singvals < tau * ref))


def regularized_newton_step(F, x):
    """Tikhonov-regularised Newton correction with the smallest singular value as weight.

    Solves ``(A^* A + sigma_n I) y = A^* b`` with ``A = F'(x)`` and
    ``b = -F(x)`` through the SVD of ``A``.
    """
    x = np.asarray(x, dtype=complex)
    A = F.jacobian(x)
    b = -F(x)
    fac = svd(A)
    sig = fac.singvals
    t, s = A.shape
    sigma_n = float(sig[-1]) if t >= s else 0.0
    k = sig.size
    btil = fac.U[:, :k].conj().T @ b
    denom = sig**2 + sigma_n
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = np.where(denom > 0, sig / np.where(denom > 0, denom, 1.0), 0.0)
    y = fac.V[:, :k] @ (gain * btil)
    return RegularizedStep(y, sigma_n, float(np.linalg.norm(A @ y - b)))


def null_vector(A, tau=DEFAULT_TAU, floor=0.0):
    """Unit right singular vector for the single small singular value of ``A``.

    Raises :class:`BreadthError` unless exactly one singular value lies below
    ``tau * max(sigma_1, floor)``.
    """
    A = np.asarray(A, dtype=complex)
    fac = svd(A)
    t, s = A.shape
    sig = fac.singvals
    corank = small_singular_count(sig, tau, floor) + max(0, s - t)
    if corank != 1:
        raise BreadthError(f"expected one small singular value, found {corank}", corank=corank)
    r = fac.V[:, -1].copy()
    r /= np.linalg.norm(r)
    return r * _fix_phase(r)


def complete_unitary(r1):
    """A unitary matrix whose first column is ``r1`` (Householder construction)."""
    r1 = np.asarray(r1, dtype=complex).reshape(-1)
    n = r1.size
    if abs(np.linalg.norm(r1) - 1.0) > 1e-12:
        raise ValueError("complete_unitary needs a unit vector")
    record_shape((n, n))
    phase = r1[0] / abs(r1[0]) if r1[0] != 0 else 1.0 + 0j
    y = r1 / phase
    w = np.zeros(n, dtype=complex)
    w[0] = 1.0
    w -= y
    ww = np.vdot(w, w).real
    Hh = np.eye(n, dtype=complex)
    if ww > 0:
        Hh -= (2.0 / ww) * np.outer(w, w.conj())
    R = Hh * np.concatenate(([phase], np.ones(n - 1)))[None, :]
    R[:, 0] = r1
    return R


def least_squares_solve(M, rhs, rcond=1e-10):
    """Minimum-residual solution of ``M v = rhs`` for full-column-rank ``M``."""
    M = np.asarray(M, dtype=complex)
    rhs = np.asarray(rhs, dtype=complex).reshape(-1)
    t, s = M.shape
    if rhs.size != t:
        raise ValueError(f"right-hand side has {rhs.size} entries, matrix has {t} rows")
    fac = svd(M)
    sig = fac.singvals
    if t < s or sig[-1] <= rcond * sig[0]:
        raise RankError(f"matrix {t}x{s} is numerically rank deficient (sigma_min={sig[-1] if sig.size else 0:.3e})")
    return fac.V @ ((fac.U[:, :s].conj().T @ rhs) / sig)


def smallest_right_singular_vector(M, normalize=True):
    """Right singular vector of the smallest singular value, scaled to leading entry 1.

    Returns ``(vector, sigma_min, sigma_max)``. With ``normalize=False`` the
    unit vector is returned as is, which callers use when they only need the
    singular values or will decide later whether to normalise.
    """
    M = np.asarray(M, dtype=complex)
    fac = svd(M)
    t, s = M.shape
    sig_min = float(fac.singvals[-1]) if t >= s else 0.0
    v = fac.V[:, -1]
    if not normalize:
        return v, sig_min, float(fac.singvals[0])
    if abs(v[0]) <= 1e-8:
        raise DegenerateError(f"leading entry {abs(v[0]):.2e} of the null direction is too small to normalise")
    return v / v[0], sig_min, float(fac.singvals[0])

"""Breadth-one multiple root refinement.

One sweep:

1. regularised Newton correction ``y`` at ``x``;
2. unit null vector ``r1`` of ``F'(x + y)``, a unitary ``R`` with first
   column ``r1``, the rotated system ``H(z) = F(R z)`` and ``z = R^* (x + y)``;
3. closed dual basis ``L_0..L_{mu-1}`` of ``H`` at ``z``;
4. solve ``[P_mu(H)(z), dH/dz_2(z), ..., dH/dz_n(z)] v = -L_{mu-1}(H)(z)``
   and set ``delta = v_1 / mu``;
5. return ``x + y + delta * r1``.

All matrices built along the way are at most ``max(t, s)`` on a side.
"""

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import BreadthError, DegenerateError, NoStabilization, RankError
from .linalg import (
    complete_unitary,
    least_squares_solve,
    null_vector,
    regularized_newton_step,
    svd,
)
from .noether import build_P_k, noether_basis
from .poly import as_point, compose_linear, unit_exponent

log = logging.getLogger(__name__)

DIGITS_CAP = 16.0
REFINER_TAU = 1e-2
ROOT_TAU_FACTOR = 0.5


@dataclass(frozen=True)
class RefinerConfig:
    """Knobs for :func:`sweep` and :func:`refine`.

    ``tau`` is the relative threshold below which a singular value counts as
    zero; ``floor`` is the smallest reference scale it is measured against,
    so that 1x1 Jacobians of univariate problems can still be judged.
    """

    tau: float = REFINER_TAU
    max_sweeps: int = 10
    target_residual: float = 0.0
    max_mu: int = 50
    digits_target: float | None = None
    fallback_newton: bool = True
    floor: float = 1.0

    def __post_init__(self):
        if not 0 < self.tau < 1:
            raise ValueError("tau must lie in (0, 1)")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be at least 1")


@dataclass
class SweepRecord:
    x: np.ndarray
    residual: float
    sigma_n: float | None = None
    mu: int | None = None
    delta: complex | None = None
    digits: float | None = None
    mode: str = "breadth-one"
    diagnostic: str | None = None
    seconds: float = 0.0


@dataclass
class RefinementTrace:
    x0: np.ndarray
    initial_residual: float
    initial_digits: float | None
    records: list = field(default_factory=list)
    status: str = "running"

    @property
    def x(self):
        return self.records[-1].x if self.records else self.x0

    def digits(self):
        """Digits column: the initial value followed by one entry per sweep."""
        return [self.initial_digits] + [r.digits for r in self.records]


def digits_of_accuracy(x, root):
    """``-log10`` of the max-norm error, capped at double precision."""
    err = float(np.max(np.abs(np.asarray(x) - np.asarray(root))))
    if err == 0.0:
        return DIGITS_CAP
    return min(DIGITS_CAP, -math.log10(err))


def _residual_digits(F, x):
    r = float(np.max(np.abs(F(x))))
    return DIGITS_CAP if r == 0.0 else min(DIGITS_CAP, -math.log10(r))


@dataclass
class SweepDetail:
    """Intermediate quantities of one sweep, exposed for diagnostics and tests."""

    y: np.ndarray
    sigma_n: float
    x_mid: np.ndarray
    r1: np.ndarray | None = None
    R: np.ndarray | None = None
    H: object = None
    z: np.ndarray | None = None
    basis: object = None
    v: np.ndarray | None = None
    delta: complex | None = None


def rotate(F, x_mid, cfg):
    """Steps 2 of a sweep: null direction, unitary completion and rotated system."""
    A = F.jacobian(x_mid)
    r1 = null_vector(A, cfg.tau, cfg.floor)
    R = complete_unitary(r1)
    H = compose_linear(F, R)
    z = R.conj().T @ x_mid
    return r1, R, H, z


def _newton_step(F, x):
    A = F.jacobian(x)
    b = -F(x)
    return least_squares_solve(A, b, rcond=1e-14)


def sweep_detail(F, x, cfg=None):
    """Run one sweep and return ``(new_point, record, detail)``.

    Failures in steps 2-4 do not raise: the record carries the diagnostic
    and the point after the regularised step is returned.
    """
    cfg = cfg or RefinerConfig()
    t0 = time.perf_counter()
    x = as_point(x, F.nvars)
    step = regularized_newton_step(F, x)
    x_mid = x + step.y
    detail = SweepDetail(y=step.y, sigma_n=step.sigma_n, x_mid=x_mid)
    try:
        r1, R, H, z = rotate(F, x_mid, cfg)
        detail.r1, detail.R, detail.H, detail.z = r1, R, H, z
        basis = noether_basis(H, z, cfg.tau, cfg.max_mu, cfg.floor)
        detail.basis = basis
        mu = basis.mu
        n = H.nvars
        P = build_P_k(basis)
        M = np.column_stack([P.apply(H, z)] + [H.taylor_column(z, unit_exponent(j, n)) for j in range(1, n)])
        rhs = -basis.ops[-1].apply(H, z)
        v = least_squares_solve(M, rhs)
        delta = v[0] / mu
        detail.v, detail.delta = v, delta
        x_new = x_mid + delta * r1
        rec = SweepRecord(x_new, float(np.linalg.norm(F(x_new))), step.sigma_n, mu, complex(delta))
    except BreadthError as exc:
        if exc.corank == 0 and cfg.fallback_newton:
            try:
                x_new = x + _newton_step(F, x)
                rec = SweepRecord(x_new, float(np.linalg.norm(F(x_new))), step.sigma_n, 1, None, mode="newton",
                                  diagnostic="regular point: plain Newton step")
            except RankError as exc2:
                rec = SweepRecord(x_mid, float(np.linalg.norm(F(x_mid))), step.sigma_n, None, None,
                                  mode="regularized", diagnostic=f"newton fallback failed: {exc2}")
        else:
            rec = SweepRecord(x_mid, float(np.linalg.norm(F(x_mid))), step.sigma_n, None, None,
                              mode="regularized", diagnostic=f"breadth: {exc}")
    except (RankError, DegenerateError, NoStabilization) as exc:
        rec = SweepRecord(x_mid, float(np.linalg.norm(F(x_mid))), step.sigma_n, None, None,
                          mode="regularized", diagnostic=f"{type(exc).__name__}: {exc}")
    rec.seconds = time.perf_counter() - t0
    return rec.x, rec, detail


def sweep(F, x, cfg=None):
    """One refinement sweep; returns ``(new_point, record)``."""
    x_new, rec, _ = sweep_detail(F, x, cfg)
    return x_new, rec


def refine(F, x0, cfg=None, known_root=None):
    """Repeat sweeps until the residual target, digit saturation or the sweep cap."""
    cfg = cfg or RefinerConfig()
    x = as_point(x0, F.nvars)
    root = None if known_root is None else as_point(known_root, F.nvars)

    def score(pt):
        return digits_of_accuracy(pt, root) if root is not None else _residual_digits(F, pt)

    trace = RefinementTrace(x.copy(), float(np.linalg.norm(F(x))), score(x))
    prev = trace.initial_digits
    for k in range(cfg.max_sweeps):
        x, rec = sweep(F, x, cfg)
        rec.digits = score(x)
        trace.records.append(rec)
        log.debug("sweep %d: digits=%.2f mode=%s %s", k + 1, rec.digits, rec.mode, rec.diagnostic or "")
        failed = rec.mode == "regularized"
        if not failed:
            if rec.residual <= cfg.target_residual:
                trace.status = "converged"
                break
            if cfg.digits_target is not None and rec.digits >= cfg.digits_target:
                trace.status = "converged"
                break
            if abs(rec.digits - prev) < 0.5:
                trace.status = "converged"
                break
        prev = rec.digits
    else:
        last = trace.records[-1]
        if last.mode == "regularized" and last.diagnostic and last.diagnostic.startswith("breadth"):
            trace.status = "breadth_violation"
        else:
            trace.status = "max_sweeps"
    return trace


def tolerance_at_root(F, root, factor=ROOT_TAU_FACTOR, floor=1.0):
    """Rank tolerance derived from the conditioning of a known multiple root.

    At the exact root every order below ``mu`` has a zero gap, so the
    tolerance only has to stay under the gaps that must read as nonzero:
    the order-``mu`` gap of the dual basis and the second smallest
    Jacobian singular value. The result is ``factor`` times the smaller one.
    """
    x = as_point(root, F.nvars)
    A = F.jacobian(x)
    sig = svd(A).singvals
    ref = max(float(sig[0]), floor)
    second = float(sig[-2]) / ref if sig.size > 1 and A.shape[0] >= A.shape[1] else 1.0
    exact = 1e-8
    r1 = null_vector(A, exact, floor)
    R = complete_unitary(r1)
    H = compose_linear(F, R)
    basis = noether_basis(H, R.conj().T @ x, exact, floor=floor)
    return factor * min(basis.gaps[-1], second)


def jacobian_singular_values(F, x):
    return svd(F.jacobian(x)).singvals

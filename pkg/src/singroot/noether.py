"""Differential operators and closed breadth-one dual bases.

A :class:`DiffOp` is a finite combination of the normalised operators
``D(alpha) = (1/alpha!) d^|alpha| / dx^alpha``. Applied to a polynomial at
a point, ``D(alpha)`` returns the Taylor coefficient of ``(x - pt)^alpha``.

The breadth-one basis is grown one order at a time. Given
``L_0, ..., L_{k-1}`` and the parameters ``a_{m,j}``, the parameter-free
part of the next operator is::

    P_k = Psi_1(L_{k-1}) + sum_{j>=2} Psi_j(Q_{k,j}) restricted to alpha_1 = .. = alpha_{j-1} = 0
    Q_{k,j} = sum_m a_{m,j} L_{k-m}

and ``L_k = P_k + sum_j a_{k,j} D(e_j)``, with ``[1, a_{k,2}, ..., a_{k,n}]``
the smallest right singular vector of ``[P_k(F), dF/dx_2, ..., dF/dx_n]``.
"""

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .errors import DegenerateError, NoStabilization
from .linalg import DEFAULT_TAU, smallest_right_singular_vector
from .poly import Poly, as_point, graded_key, unit_exponent


def _alpha_factorial(alpha):
    out = 1
    for a in alpha:
        out *= factorial(a)
    return out


class DiffOp:
    """Sparse combination ``sum c_alpha D(alpha)`` of normalised derivatives."""

    __slots__ = ("terms", "nvars")

    def __init__(self, terms=None, nvars=None):
        terms = dict(terms or {})
        if nvars is None:
            if not terms:
                raise ValueError("nvars is required for an empty operator")
            nvars = len(next(iter(terms)))
        clean = {}
        for alpha, c in terms.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != nvars or any(a < 0 for a in alpha):
                raise ValueError(f"bad multi-index {alpha} for {nvars} variables")
            c = complex(c)
            if c != 0:
                clean[alpha] = c
        self.terms = clean
        self.nvars = int(nvars)

    @classmethod
    def zero(cls, nvars):
        return cls({}, nvars)

    @classmethod
    def identity(cls, nvars):
        return cls({(0,) * nvars: 1.0}, nvars)

    @classmethod
    def D(cls, *alpha):
        return cls({tuple(alpha): 1.0}, len(alpha))

    @property
    def order(self):
        return max((sum(a) for a in self.terms), default=0)

    def is_zero(self):
        return not self.terms

    def coeff(self, alpha):
        return self.terms.get(tuple(alpha), 0j)

    def __eq__(self, other):
        if not isinstance(other, DiffOp):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    __hash__ = None

    def __repr__(self):
        items = sorted(self.terms.items(), key=lambda kv: graded_key(kv[0]), reverse=True)
        body = " + ".join(f"({c:.6g})D{a}" for a, c in items) or "0"
        return f"DiffOp[{body}]"

    def __add__(self, other):
        if other == 0:
            return self
        if not isinstance(other, DiffOp) or other.nvars != self.nvars:
            raise TypeError("can only add operators in the same number of variables")
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out.get(a, 0) + c
        return DiffOp(out, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return DiffOp({a: -c for a, c in self.terms.items()}, self.nvars)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        c = complex(c)
        return DiffOp({a: c * v for a, v in self.terms.items()}, self.nvars)

    __rmul__ = __mul__

    def max_abs_diff(self, other):
        keys = set(self.terms) | set(other.terms)
        return max((abs(self.coeff(k) - other.coeff(k)) for k in keys), default=0.0)

    def norm(self):
        return float(np.sqrt(sum(abs(c) ** 2 for c in self.terms.values())))

    def apply_poly(self, p, pt):
        """``L(p)`` evaluated at ``pt``."""
        x = as_point(pt, self.nvars)
        return sum((c * p.taylor_coefficient(x, a) for a, c in self.terms.items()), 0j)

    def apply(self, F, pt):
        """Vector ``[L(f_1)(pt), ..., L(f_t)(pt)]``."""
        if F.nvars != self.nvars:
            raise ValueError(f"operator in {self.nvars} variables applied to a system in {F.nvars}")
        x = as_point(pt, self.nvars)
        out = np.zeros(F.npolys, dtype=complex)
        for a, c in self.terms.items():
            out += c * F.taylor_column(x, a)
        return out

    def phi(self, j):
        """Index-lowering morphism: ``D(alpha) -> D(alpha - e_j)``, zero when ``alpha_j = 0``."""
        if not 0 <= j < self.nvars:
            raise IndexError(j)
        out = {}
        for a, c in self.terms.items():
            if a[j]:
                b = list(a)
                b[j] -= 1
                out[tuple(b)] = c
        return DiffOp(out, self.nvars)

    def psi(self, j, zero_mask=()):
        """Index-raising morphism restricted to terms vanishing on ``zero_mask``."""
        if not 0 <= j < self.nvars:
            raise IndexError(j)
        out = {}
        for a, c in self.terms.items():
            if any(a[m] for m in zero_mask):
                continue
            b = list(a)
            b[j] += 1
            out[tuple(b)] = c
        return DiffOp(out, self.nvars)

    def then_partial(self, j):
        """Composition ``L . d/dx_j``: ``D(alpha) -> (alpha_j + 1) D(alpha + e_j)``."""
        out = {}
        for a, c in self.terms.items():
            b = list(a)
            b[j] += 1
            out[tuple(b)] = c * b[j]
        return DiffOp(out, self.nvars)

    def to_poly(self):
        """Symbol of the operator: ``D(alpha) -> xi^alpha / alpha!``."""
        return Poly({a: c / _alpha_factorial(a) for a, c in self.terms.items()}, self.nvars)

    @classmethod
    def from_poly(cls, p):
        return cls({a: c * _alpha_factorial(a) for a, c in p.terms.items()}, p.nvars)


def apply(L, F, pt):
    return L.apply(F, pt)


def phi(L, j):
    return L.phi(j)


def psi(L, j, zero_mask=()):
    return L.psi(j, zero_mask)


def gamma_R(L, R):
    """Push an operator in ``z`` forward to ``x = R z``.

    ``gamma_R(L)(F)(x) == L(F o R)(R^{-1} x)``. Since ``d/dz_j = sum_i R_ij d/dx_i``,
    the symbol of ``L`` is substituted with ``R^T``.
    """
    R = np.asarray(R, dtype=complex)
    return DiffOp.from_poly(L.to_poly().substitute_affine(R.T))


@dataclass(frozen=True)
class NoetherBasis:
    """Closed basis ``L_0..L_{mu-1}`` with its parameter table.

    ``params[k][j]`` is the coefficient of ``D(e_j)`` added at order ``k``
    (entry 0 is unused and zero). ``gaps[k]`` records ``sigma_min/sigma_max``
    of the order-``k`` rank test, including the one that stopped the basis.
    """

    ops: tuple
    params: tuple
    residuals: tuple = ()
    gaps: tuple = field(default=())

    @property
    def mu(self):
        return len(self.ops)

    @property
    def nvars(self):
        return self.ops[0].nvars

    # the depth index rho equals mu for breadth one
    rho = mu


def initial_basis(F, pt):
    """``{D(0), D(e_1)}`` for a system whose near-null direction is the first axis."""
    n = F.nvars
    L0 = DiffOp.identity(n)
    L1 = DiffOp({unit_exponent(0, n): 1.0}, n)
    zeros = np.zeros(n, dtype=complex)
    res = (float(np.linalg.norm(L0.apply(F, pt))), float(np.linalg.norm(L1.apply(F, pt))))
    return NoetherBasis(ops=(L0, L1), params=(zeros, zeros), residuals=res)


def build_P(ops, params):
    """Parameter-free part of the next operator, for order ``k = len(ops)``.

    Works for any variable count and lets ``params[1]`` be nonzero, which
    the lifted bases of augmented systems need.
    """
    k = len(ops)
    n = ops[0].nvars
    P = ops[k - 1].psi(0)
    for j in range(1, n):
        Q = DiffOp.zero(n)
        for m in range(1, k):
            a = params[m][j]
            if a != 0:
                Q = Q + a * ops[k - m]
        if not Q.is_zero():
            P = P + Q.psi(j, zero_mask=range(j))
    return P


def build_P_k(basis):
    return build_P(basis.ops, basis.params)


def _gap(sig_min, sig_max, floor):
    return sig_min / max(sig_max, floor) if max(sig_max, floor) > 0 else 0.0


def extend_basis(F, pt, basis, tau=DEFAULT_TAU, floor=1.0):
    """Add the next order to ``basis``, or return ``None`` when the order is not small.

    Returns ``(extended_basis_or_None, gap)`` where ``gap`` is the relative
    smallest singular value of the order-``k`` matrix.
    """
    x = as_point(pt, F.nvars)
    n = F.nvars
    P = build_P_k(basis)
    cols = [P.apply(F, x)] + [F.taylor_column(x, unit_exponent(j, n)) for j in range(1, n)]
    M = np.column_stack(cols)
    vec, sig_min, sig_max = smallest_right_singular_vector(M, normalize=False)
    gap = _gap(sig_min, sig_max, floor)
    if not gap < tau:
        return None, gap
    if abs(vec[0]) <= 1e-8:
        raise DegenerateError(f"leading entry {abs(vec[0]):.2e} of the order-{len(basis.ops)} null vector is too small")
    vec = vec / vec[0]
    L = P
    for j in range(1, n):
        L = L + DiffOp({unit_exponent(j, n): vec[j]}, n)
    a = np.zeros(n, dtype=complex)
    a[1:] = vec[1:]
    ext = NoetherBasis(
        ops=basis.ops + (L,),
        params=basis.params + (a,),
        residuals=basis.residuals + (float(np.linalg.norm(L.apply(F, x))),),
        gaps=basis.gaps + (gap,),
    )
    return ext, gap


def noether_basis(F, pt, tau=DEFAULT_TAU, max_order=50, floor=1.0):
    """Closed basis of the approximate dual space of a breadth-one point.

    ``pt`` must be expressed in coordinates where the first axis is the
    near-null direction of the Jacobian.
    """
    basis = initial_basis(F, pt)
    while True:
        if basis.mu > max_order:
            raise NoStabilization(f"dual basis still growing at order {max_order}")
        ext, gap = extend_basis(F, pt, basis, tau, floor)
        if ext is None:
            return NoetherBasis(basis.ops, basis.params, basis.residuals, basis.gaps + (gap,))
        basis = ext


def closedness_residual(basis):
    """Largest least-squares residual of ``Phi_j(L_k)`` against ``span(L_0..L_{k-1})``."""
    worst = 0.0
    ops = basis.ops
    n = ops[0].nvars
    for k in range(1, len(ops)):
        for j in range(n):
            target = ops[k].phi(j)
            worst = max(worst, span_residual(target, ops[:k]))
    return worst


def span_residual(target, ops):
    """Relative distance of ``target`` from the span of ``ops`` in coefficient space."""
    keys = set(target.terms)
    for L in ops:
        keys |= set(L.terms)
    keys = sorted(keys, key=graded_key)
    if not keys:
        return 0.0
    idx = {k: i for i, k in enumerate(keys)}
    A = np.zeros((len(keys), len(ops)), dtype=complex)
    for c, L in enumerate(ops):
        for a, v in L.terms.items():
            A[idx[a], c] = v
    b = np.zeros(len(keys), dtype=complex)
    for a, v in target.terms.items():
        b[idx[a]] = v
    if not ops:
        return float(np.linalg.norm(b))
    coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    scale = max(1.0, float(np.linalg.norm(b)))
    return float(np.linalg.norm(A @ coef - b)) / scale


def q_operator(basis, k):
    """``L_k d/dz_1 + sum_j (2 a_{2,j} L_{k-1} + ... + k a_{k,j} L_1) d/dz_j``.

    Equals ``(k + 1) P_{k+1}`` for any parameter table built by the recurrence.
    """
    ops, params = basis.ops, basis.params
    n = ops[0].nvars
    Q = ops[k].then_partial(0)
    for j in range(1, n):
        inner = DiffOp.zero(n)
        for m in range(2, k + 1):
            a = params[m][j]
            if a != 0:
                inner = inner + (m * a) * ops[k + 1 - m]
        if not inner.is_zero():
            Q = Q + inner.then_partial(j)
    return Q

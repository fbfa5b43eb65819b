"""Sparse multivariate polynomials with complex coefficients.

A polynomial is a map from exponent tuples to complex coefficients. Only
exact zeros are pruned; numerical cleanup is left to callers so that
operator identities can be checked coefficient by coefficient.

Variables are indexed from 0 throughout the package.
"""

from math import comb

import numpy as np

from .errors import DimensionError

# dense expansion is used when (deg + 1) ** nvars stays below this
_DENSE_LIMIT = 200_000


def graded_key(alpha):
    """Sort key for graded lexicographic order (total degree first)."""
    return (sum(alpha), tuple(alpha))


def unit_exponent(i, nvars):
    e = [0] * nvars
    e[i] = 1
    return tuple(e)


def as_point(pt, nvars=None):
    """Coerce ``pt`` to a finite complex vector, optionally checking its length."""
    x = np.asarray(pt, dtype=complex).reshape(-1)
    if nvars is not None and x.shape[0] != nvars:
        raise DimensionError(f"point has {x.shape[0]} coordinates, expected {nvars}")
    if not np.all(np.isfinite(x)):
        raise ValueError("point has non-finite coordinates")
    return x


def _power_table(x, maxdeg):
    table = np.ones((x.shape[0], maxdeg + 1), dtype=complex)
    for e in range(1, maxdeg + 1):
        table[:, e] = table[:, e - 1] * x
    return table


class Poly:
    """A polynomial in ``nvars`` variables stored as ``{exponents: coeff}``.

    Instances are treated as immutable values.
    """

    __slots__ = ("terms", "nvars", "_arrays")

    def __init__(self, terms=None, nvars=None):
        terms = dict(terms or {})
        if nvars is None:
            if not terms:
                raise ValueError("nvars is required for an empty polynomial")
            nvars = len(next(iter(terms)))
        clean = {}
        for alpha, c in terms.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != nvars:
                raise DimensionError(f"monomial {alpha} does not have {nvars} exponents")
            if any(a < 0 for a in alpha):
                raise ValueError(f"negative exponent in {alpha}")
            c = complex(c)
            if c != 0:
                clean[alpha] = c
        self.terms = clean
        self.nvars = int(nvars)
        self._arrays = None

    @classmethod
    def _trusted(cls, terms, nvars):
        # internal results: exponents already valid, only drop exact zeros
        p = object.__new__(cls)
        p.terms = {a: c for a, c in terms.items() if c != 0}
        p.nvars = nvars
        p._arrays = None
        return p

    @classmethod
    def zero(cls, nvars):
        return cls({}, nvars)

    @classmethod
    def constant(cls, c, nvars):
        return cls({(0,) * nvars: c}, nvars)

    @classmethod
    def variable(cls, i, nvars):
        if not 0 <= i < nvars:
            raise IndexError(f"variable index {i} out of range for {nvars} variables")
        return cls({unit_exponent(i, nvars): 1.0}, nvars)

    @property
    def degree(self):
        return max((sum(a) for a in self.terms), default=0)

    def is_zero(self):
        return not self.terms

    def coeff(self, alpha):
        return self.terms.get(tuple(alpha), 0j)

    def sorted_terms(self):
        """Terms in descending graded-lex order."""
        return sorted(self.terms.items(), key=lambda kv: graded_key(kv[0]), reverse=True)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    __hash__ = None

    def __repr__(self):
        return f"Poly({dict(self.sorted_terms())!r}, nvars={self.nvars})"

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise DimensionError(f"cannot combine polynomials in {self.nvars} and {other.nvars} variables")
            return other
        return Poly.constant(other, self.nvars)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for alpha, c in other.terms.items():
            out[alpha] = out.get(alpha, 0) + c
        return Poly._trusted(out, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return Poly._trusted({a: -c for a, c in self.terms.items()}, self.nvars)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = complex(other)
            return Poly._trusted({a: c * v for a, v in self.terms.items()}, self.nvars)
        other = self._coerce(other)
        out = {}
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                key = tuple(x + y for x, y in zip(a, b))
                out[key] = out.get(key, 0) + ca * cb
        return Poly._trusted(out, self.nvars)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise ValueError("only nonnegative integer powers are supported")
        result = Poly.constant(1.0, self.nvars)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- calculus and evaluation -------------------------------------------

    def partial(self, var):
        """Exact partial derivative with respect to variable ``var``."""
        if not 0 <= var < self.nvars:
            raise IndexError(f"variable index {var} out of range for {self.nvars} variables")
        out = {}
        for alpha, c in self.terms.items():
            if alpha[var]:
                beta = list(alpha)
                beta[var] -= 1
                out[tuple(beta)] = c * alpha[var]
        return Poly._trusted(out, self.nvars)

    def _get_arrays(self):
        if self._arrays is None:
            if self.terms:
                exps = np.array(list(self.terms.keys()), dtype=np.int64)
                coeffs = np.array(list(self.terms.values()), dtype=complex)
            else:
                exps = np.zeros((0, self.nvars), dtype=np.int64)
                coeffs = np.zeros(0, dtype=complex)
            self._arrays = (exps, coeffs)
        return self._arrays

    def taylor_coefficient(self, pt, alpha):
        """Coefficient of ``(x - pt)**alpha`` in the expansion of ``self`` at ``pt``.

        Equals ``(1/alpha!) * d^alpha p / dx^alpha`` evaluated at ``pt``.
        """
        x = as_point(pt, self.nvars)
        alpha = np.asarray(alpha, dtype=np.int64)
        exps, coeffs = self._get_arrays()
        if exps.shape[0] == 0:
            return 0j
        mask = np.all(exps >= alpha, axis=1)
        if not mask.any():
            return 0j
        e = exps[mask]
        c = coeffs[mask].copy()
        for i, a in enumerate(alpha):
            if a:
                c *= np.array([comb(int(b), int(a)) for b in e[:, i]], dtype=float)
        shift = e - alpha
        table = _power_table(x, int(shift.max(initial=0)))
        vals = c
        for i in range(self.nvars):
            vals = vals * table[i, shift[:, i]]
        return complex(vals.sum())

    def evaluate(self, pt):
        return self.taylor_coefficient(pt, (0,) * self.nvars)

    def gradient(self, pt):
        """All first partial derivatives at ``pt`` in one pass over the terms."""
        x = as_point(pt, self.nvars)
        n = self.nvars
        exps, coeffs = self._get_arrays()
        out = np.zeros(n, dtype=complex)
        if exps.shape[0] == 0:
            return out
        table = _power_table(x, int(exps.max(initial=0)))
        cols = np.arange(n)
        powers = table[cols[None, :], exps]
        # products over all factors except column j, without dividing by x_j
        left = np.ones_like(powers)
        right = np.ones_like(powers)
        left[:, 1:] = np.cumprod(powers[:, :-1], axis=1)
        right[:, :-1] = np.cumprod(powers[:, :0:-1], axis=1)[:, ::-1]
        lowered = table[cols[None, :], np.maximum(exps - 1, 0)]
        terms = coeffs[:, None] * exps * lowered * left * right
        return terms.sum(axis=0)

    __call__ = evaluate

    def substitute_affine(self, M, shift=None):
        """Return the polynomial ``z -> p(M z + shift)`` expanded exactly.

        ``M`` has shape ``(self.nvars, m)``; the result lives in ``m`` variables.
        """
        M = np.asarray(M, dtype=complex)
        if M.ndim != 2 or M.shape[0] != self.nvars:
            raise DimensionError(f"substitution matrix must have {self.nvars} rows, got shape {M.shape}")
        m = M.shape[1]
        c = np.zeros(self.nvars, dtype=complex) if shift is None else as_point(shift, self.nvars)
        if not self.terms:
            return Poly.zero(m)
        d = self.degree
        if (d + 1) ** m <= _DENSE_LIMIT:
            return _substitute_dense(self, M, c, m, d)
        return _substitute_sparse(self, M, c, m)


def _substitute_dense(p, M, c, m, d):
    shape = (d + 1,) * m

    def times_linear(A, i):
        # multiply dense array A by c_i + sum_j M[i, j] z_j
        out = c[i] * A
        for j in range(m):
            if M[i, j] != 0:
                src = [slice(None)] * m
                dst = [slice(None)] * m
                src[j] = slice(0, d)
                dst[j] = slice(1, d + 1)
                out[tuple(dst)] += M[i, j] * A[tuple(src)]
        return out

    one = np.zeros(shape, dtype=complex)
    one[(0,) * m] = 1.0
    memo = {(0,) * p.nvars: one}

    def product(beta):
        if beta in memo:
            return memo[beta]
        i = max(k for k, b in enumerate(beta) if b)
        prev = list(beta)
        prev[i] -= 1
        val = times_linear(product(tuple(prev)), i)
        memo[beta] = val
        return val

    total = np.zeros(shape, dtype=complex)
    for beta, coef in sorted(p.terms.items(), key=lambda kv: graded_key(kv[0])):
        total += coef * product(beta)
    idx = np.argwhere(total != 0)
    return Poly({tuple(int(v) for v in k): total[tuple(k)] for k in idx}, m)


def _substitute_sparse(p, M, c, m):
    forms = []
    for i in range(p.nvars):
        terms = {unit_exponent(j, m): M[i, j] for j in range(m)}
        terms[(0,) * m] = c[i]
        forms.append(Poly(terms, m))
    memo = {(0,) * p.nvars: Poly.constant(1.0, m)}

    def product(beta):
        if beta in memo:
            return memo[beta]
        i = max(k for k, b in enumerate(beta) if b)
        prev = list(beta)
        prev[i] -= 1
        val = product(tuple(prev)) * forms[i]
        memo[beta] = val
        return val

    total = Poly.zero(m)
    for beta, coef in sorted(p.terms.items(), key=lambda kv: graded_key(kv[0])):
        total = total + coef * product(beta)
    return total


class PolySystem:
    """An ordered list of ``t`` polynomials in ``s`` variables, ``t >= s >= 1``."""

    __slots__ = ("polys", "nvars", "_partials")

    def __init__(self, polys, nvars=None):
        polys = tuple(polys)
        if not polys:
            raise ValueError("a polynomial system needs at least one polynomial")
        if nvars is None:
            nvars = polys[0].nvars
        for p in polys:
            if p.nvars != nvars:
                raise DimensionError(f"polynomial in {p.nvars} variables in a system of {nvars}")
        if not len(polys) >= nvars >= 1:
            raise ValueError(f"need npolys >= nvars >= 1, got {len(polys)} polynomials in {nvars} variables")
        self.polys = polys
        self.nvars = int(nvars)
        self._partials = None

    @property
    def npolys(self):
        return len(self.polys)

    def __len__(self):
        return len(self.polys)

    def __iter__(self):
        return iter(self.polys)

    def __getitem__(self, i):
        return self.polys[i]

    def __eq__(self, other):
        if not isinstance(other, PolySystem):
            return NotImplemented
        return self.nvars == other.nvars and self.polys == other.polys

    __hash__ = None

    def __repr__(self):
        return f"PolySystem({list(self.polys)!r})"

    @property
    def degree(self):
        return max(p.degree for p in self.polys)

    def __call__(self, pt):
        x = as_point(pt, self.nvars)
        return np.array([p.evaluate(x) for p in self.polys])

    def taylor_column(self, pt, alpha):
        """Vector of Taylor coefficients of every polynomial for one multi-index."""
        x = as_point(pt, self.nvars)
        return np.array([p.taylor_coefficient(x, alpha) for p in self.polys])

    def jacobian(self, pt):
        x = as_point(pt, self.nvars)
        J = np.empty((self.npolys, self.nvars), dtype=complex)
        for i, p in enumerate(self.polys):
            J[i] = p.gradient(x)
        _record_shape(J.shape)
        return J

    def partials(self):
        """Symbolic Jacobian as a nested tuple ``[i][j] = d f_i / d x_j``."""
        if self._partials is None:
            self._partials = tuple(tuple(p.partial(j) for j in range(self.nvars)) for p in self.polys)
        return self._partials


def _record_shape(shape):
    # late import keeps poly usable without the linalg tracker
    from .linalg import record_shape

    record_shape(shape)


def evaluate(p, pt):
    """Value of ``p`` at ``pt``."""
    return p.evaluate(pt)


def partial(p, var):
    """Exact partial derivative of ``p`` in variable ``var`` (0-based)."""
    return p.partial(var)


def jacobian(F, pt):
    """The ``t x s`` Jacobian matrix of ``F`` at ``pt``."""
    return F.jacobian(pt)


def compose_affine(F, M, shift=None):
    """The system ``z -> F(M z + shift)`` with coefficients expanded exactly."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != F.nvars:
        raise DimensionError(f"matrix shape {M.shape} incompatible with {F.nvars} variables")
    return PolySystem([p.substitute_affine(M, shift) for p in F.polys], M.shape[1])


def compose_linear(F, R):
    """The system ``H(z) = F(R z)`` for a square matrix ``R``."""
    R = np.asarray(R, dtype=complex)
    if R.shape != (F.nvars, F.nvars):
        raise DimensionError(f"R must be {F.nvars}x{F.nvars}, got {R.shape}")
    return compose_affine(F, R)

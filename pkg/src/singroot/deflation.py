"""Augmented (deflated) systems for breadth-one roots.

``augment_J(F, h)`` returns ``{F(x), F'(x) nu, h^* nu - 1}`` in the ``2s``
variables ``(x, nu)``; ``augment_G(H)`` is the special case ``h = e_1`` used
in rotated coordinates. At a breadth-one root of multiplicity ``mu`` the
augmented system has the lifted root ``(x, r_1 / (h^* r_1))`` with
multiplicity ``mu - 1``, so repeated augmentation ends after ``mu - 1``
steps with a regular root.
"""

import numpy as np

from .errors import BreadthError
from .linalg import small_singular_count, svd
from .noether import DiffOp, build_P
from .poly import Poly, PolySystem, as_point, unit_exponent


class _Jets:
    """Truncated algebra ``C[e_0..e_{m-1}] / (e_i^2)``.

    Elements are arrays whose last axis holds ``2**m`` coefficients indexed
    by the bitmask of the generators in each product.
    """

    def __init__(self, m):
        self.size = 1 << m
        # pairs (i, j) of disjoint masks, grouped by their union i | j
        pairs = sorted(
            ((i | j, i, j) for i in range(self.size) for j in range(self.size) if i & j == 0)
        )
        self.left = np.array([i for _, i, _ in pairs])
        self.right = np.array([j for _, _, j in pairs])
        unions = np.array([k for k, _, _ in pairs])
        self.starts = np.searchsorted(unions, np.arange(self.size))

    def mul(self, a, b):
        return np.add.reduceat(a[..., self.left] * b[..., self.right], self.starts, axis=-1)

    def split(self, bit):
        lo = np.array([i for i in range(self.size) if not i & bit])
        return lo, lo | bit


def _eval_jets(F, X, jets):
    """``F`` at a point whose coordinates ``X[v]`` (shape ``(B, 2**m)``) are jets."""
    used = sorted({a for p in F.polys for a in p.terms}, key=lambda a: (sum(a), a))
    # close under "drop one factor of the first variable present" so every
    # monomial is a single product of an earlier one with one coordinate
    index = {}
    order = []
    stack = list(used)
    while stack:
        a = stack.pop()
        if a in index:
            continue
        index[a] = None
        order.append(a)
        if sum(a):
            v = next(i for i, e in enumerate(a) if e)
            stack.append(a[:v] + (a[v] - 1,) + a[v + 1 :])
    order.sort(key=lambda a: (sum(a), a))
    index = {a: k for k, a in enumerate(order)}
    vals = np.zeros((len(order),) + X.shape[1:], dtype=complex)
    if order and sum(order[0]) == 0:
        vals[0, ..., 0] = 1.0
    for d in range(1, max((sum(a) for a in order), default=0) + 1):
        rows, parents, coords = [], [], []
        for a in order:
            if sum(a) != d:
                continue
            v = next(i for i, e in enumerate(a) if e)
            rows.append(index[a])
            parents.append(index[a[:v] + (a[v] - 1,) + a[v + 1 :]])
            coords.append(v)
        vals[rows] = jets.mul(vals[parents], X[coords])
    C = np.zeros((F.npolys, len(order)), dtype=complex)
    for i, p in enumerate(F.polys):
        for a, c in p.terms.items():
            C[i, index[a]] = c
    return np.tensordot(C, vals, axes=(1, 0))


def _eval_chain(F, hs, X, jets):
    # level k reads its point as (x, nu); nu enters through a fresh generator
    if not hs:
        return _eval_jets(F, X, jets)
    bit = 1 << len(hs)
    lo, hi = jets.split(bit)
    half = X.shape[0] // 2
    x, nu = X[:half], X[half:]
    shifted = x.copy()
    shifted[..., hi] += nu[..., lo]
    R = _eval_chain(F, hs[:-1], shifted, jets)
    value = R.copy()
    value[..., hi] = 0.0
    slope = np.zeros_like(R)
    slope[..., lo] = R[..., hi]
    last = np.tensordot(np.conj(hs[-1]), nu, axes=(0, 0))
    last[..., 0] -= 1.0
    return np.concatenate([value, slope, last[None]])


class AugmentedSystem:
    """``{P, P' nu, h^* nu - 1}`` for a parent system ``P``.

    The parent may itself be augmented. The expanded polynomials are built
    on first access to :attr:`system`; :meth:`jacobian` and :meth:`evaluate`
    work from the original system through jets and never expand them, which
    keeps long deflation chains affordable.
    """

    def __init__(self, parent, h, kind="J"):
        self.parent = parent
        self.h = np.asarray(h, dtype=complex).reshape(-1)
        self.kind = kind
        self._system = None
        if isinstance(parent, AugmentedSystem):
            self.root_system = parent.root_system
            self.hs = parent.hs + (self.h,)
        else:
            self.root_system = parent
            self.hs = (self.h,)
        self.nvars = 2 * parent.nvars
        self.npolys = 2 * parent.npolys + 1

    @property
    def base(self):
        p = self.parent
        return p.system if isinstance(p, AugmentedSystem) else p

    @property
    def system(self):
        if self._system is None:
            self._system = _expand(self.base, self.h)
        return self._system

    def lift(self, x, r1):
        """Lifted point ``(x, r1 / (h^* r1))`` for a null vector ``r1`` of ``F'(x)``."""
        r1 = np.asarray(r1, dtype=complex)
        scale = np.vdot(self.h, r1)
        if scale == 0:
            raise ValueError("h is orthogonal to the null vector")
        return np.concatenate([as_point(x, self.parent.nvars), r1 / scale])

    def _run(self, pt, directions):
        pt = as_point(pt, self.nvars)
        jets = _Jets(len(self.hs) + 1)
        X = np.zeros((self.nvars, directions.shape[1], jets.size), dtype=complex)
        X[:, :, 0] = pt[:, None]
        X[:, :, 1] = directions
        return _eval_chain(self.root_system, list(self.hs), X, jets)

    def evaluate(self, pt):
        return self._run(pt, np.zeros((self.nvars, 1)))[:, 0, 0]

    __call__ = evaluate

    def jacobian(self, pt, chunk=16):
        cols = []
        eye = np.eye(self.nvars)
        for c in range(0, self.nvars, chunk):
            cols.append(self._run(pt, eye[:, c : c + chunk])[:, :, 1])
        return np.concatenate(cols, axis=1)


def _embed(p, total, offset=0):
    pad_before = (0,) * offset
    pad_after = (0,) * (total - offset - p.nvars)
    return Poly._trusted({pad_before + a + pad_after: c for a, c in p.terms.items()}, total)


def _expand(F, h):
    s = F.nvars
    total = 2 * s
    top = [_embed(p, total) for p in F.polys]
    middle = []
    for row in F.partials():
        acc = {}
        for j, d in enumerate(row):
            for a, c in d.terms.items():
                key = a + (0,) * j + (1,) + (0,) * (s - j - 1)
                acc[key] = acc.get(key, 0) + c
        middle.append(Poly._trusted(acc, total))
    norm = {(0,) * total: -1.0}
    for j in range(s):
        if h[j] != 0:
            norm[unit_exponent(s + j, total)] = np.conj(h[j])
    return PolySystem(top + middle + [Poly(norm, total)], total)


def augment_J(F, h, kind="J"):
    """``{F, F' nu, h^* nu - 1}`` with ``nu`` in variables ``s..2s-1``.

    ``F`` may be a :class:`PolySystem` or an earlier :class:`AugmentedSystem`.
    """
    h = np.asarray(h, dtype=complex).reshape(-1)
    s = F.nvars
    if h.size != s:
        raise ValueError(f"h has {h.size} entries for {s} variables")
    if not np.linalg.norm(h) > 0:
        raise ValueError("h must be nonzero")
    return AugmentedSystem(F, h, kind)


def augment_G(H):
    """``{H, H' lambda, lambda_1 - 1}``."""
    e1 = np.zeros(H.nvars, dtype=complex)
    e1[0] = 1.0
    return augment_J(H, e1, kind="G")


def deflation_chain(F, x, tau=1e-6, floor=1.0, random_h=False, rng=None, max_steps=20):
    """Augment until the Jacobian at the lifted point has full column rank.

    Each step uses the current numeric null vector ``r1``; ``h = r1`` gives
    ``h^* r1 = 1``. With ``random_h`` a random unit ``h`` is drawn instead.
    Returns the list of augmented systems (empty at a regular point).
    """
    rng = np.random.default_rng(rng)
    S = F
    pt = as_point(x, F.nvars)
    chain = []
    for _ in range(max_steps):
        A = S.jacobian(pt)
        fac = svd(A)
        t, s = A.shape
        corank = small_singular_count(fac.singvals, tau, floor) + max(0, s - t)
        if corank == 0:
            return chain
        if corank > 1:
            raise BreadthError(f"corank {corank} after {len(chain)} deflation steps", corank=corank)
        r1 = fac.V[:, -1] / np.linalg.norm(fac.V[:, -1])
        if random_h:
            h = rng.standard_normal(s) + 1j * rng.standard_normal(s)
            h /= np.linalg.norm(h)
        else:
            h = r1
        aug = augment_J(S, h)
        chain.append(aug)
        pt = aug.lift(pt, r1)
        S = aug
    raise BreadthError(f"no regular point after {max_steps} deflation steps", corank=1)


def lifted_parameters(basis):
    """Parameter table of the dual basis of ``augment_G`` at the lifted root.

    ``a~_m`` keeps ``a_m`` on the ``z`` block, is zero on ``lambda_1`` and
    carries ``(m + 1) a_{m+1, j}`` on ``lambda_j``.
    """
    n = basis.nvars
    mu = basis.mu
    out = []
    for m in range(mu - 1):
        a = np.zeros(2 * n, dtype=complex)
        if m >= 1:
            a[:n] = basis.params[m]
            a[0] = 0.0
            nxt = basis.params[m + 1]
            for j in range(1, n):
                a[n + j] = (m + 1) * nxt[j]
        out.append(a)
    return out


def lifted_basis(basis):
    """Operators ``L~_0, ..., L~_{mu-2}`` annihilating ``augment_G(H)`` at the lifted root.

    Built by the generic recurrence with :func:`lifted_parameters`.
    """
    n = basis.nvars
    N = 2 * n
    params = lifted_parameters(basis)
    ops = [DiffOp.identity(N)]
    if basis.mu < 3:
        return ops
    L1 = DiffOp({unit_exponent(0, N): 1.0}, N)
    for j in range(1, N):
        if params[1][j] != 0:
            L1 = L1 + DiffOp({unit_exponent(j, N): params[1][j]}, N)
    ops.append(L1)
    for k in range(2, basis.mu - 1):
        L = build_P(ops, params)
        for j in range(1, N):
            if params[k][j] != 0:
                L = L + DiffOp({unit_exponent(j, N): params[k][j]}, N)
        ops.append(L)
    return ops


def _lift_op(L, n):
    return DiffOp({tuple(a) + (0,) * n: c for a, c in L.terms.items()}, 2 * n)


def lifted_P_explicit(basis, lifted_ops, k):
    """``P~_k = P_k + sum_{j>=2} Psi_{n+j}(Q_{k,n+j})`` with the ``lambda`` masks.

    ``Q_{k,n+j} = 2 a_{2,j} L~_{k-1} + ... + k a_{k,j} L~_1``; this is the
    written-out form of the lifted recurrence and is compared against
    :func:`lifted_basis` in the tests.
    """
    n = basis.nvars
    N = 2 * n
    P = _lift_op(build_P(basis.ops[:k], basis.params), n)
    for j in range(1, n):
        Q = DiffOp.zero(N)
        for m in range(2, k + 1):
            a = basis.params[m][j]
            if a != 0:
                Q = Q + (m * a) * lifted_ops[k + 1 - m]
        if not Q.is_zero():
            P = P + Q.psi(n + j, zero_mask=range(n, n + j))
    return P

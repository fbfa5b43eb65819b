"""Brute-force multiplicity oracle based on truncated Macaulay matrices.

Independent of the breadth-one machinery: it expands every polynomial
around the point, multiplies by all monomials ``(x - pt)^gamma`` and counts
the numerical null space of the resulting coefficient matrix order by
order. Only meant for small test problems.
"""

from dataclasses import dataclass
from itertools import combinations_with_replacement, product
from math import comb

import numpy as np

from .errors import NoStabilization
from .noether import DiffOp
from .poly import as_point, graded_key

ORACLE_TAU = 1e-8


def monomials(nvars, degree):
    """All exponent tuples of total degree ``<= degree`` in graded order."""
    out = []
    for d in range(degree + 1):
        for combo in combinations_with_replacement(range(nvars), d):
            e = [0] * nvars
            for v in combo:
                e[v] += 1
            out.append(tuple(e))
    return sorted(set(out), key=graded_key)


def _taylor_shift(p, pt):
    """Coefficients of ``p(pt + u)`` in ``u`` by binomial expansion of each monomial."""
    out = {}
    for alpha, c in p.terms.items():
        parts = [[(b, comb(a, b) * pt[i] ** (a - b)) for b in range(a + 1)] for i, a in enumerate(alpha)]
        for choice in product(*parts):
            beta = tuple(b for b, _ in choice)
            w = c
            for _, f in choice:
                w = w * f
            out[beta] = out.get(beta, 0) + w
    return {b: v for b, v in out.items() if v != 0}


def _local_expansions(F, pt):
    return [_taylor_shift(p, pt) for p in F.polys]


@dataclass(frozen=True)
class MacaulayMatrix:
    """Coefficient matrix of ``(x - pt)^gamma f_i`` truncated at total degree ``k``."""

    matrix: np.ndarray
    columns: tuple
    k: int


def macaulay_matrix(F, pt, k, _local=None):
    """Rows: shifts ``|gamma| <= k - 1`` (just ``gamma = 0`` when ``k = 0``); columns: degree ``<= k``."""
    x = as_point(pt, F.nvars)
    local = _local if _local is not None else _local_expansions(F, x)
    cols = monomials(F.nvars, k)
    idx = {c: i for i, c in enumerate(cols)}
    shifts = monomials(F.nvars, max(k - 1, 0))
    M = np.zeros((len(local) * len(shifts), len(cols)), dtype=complex)
    r = 0
    for g in shifts:
        for p in local:
            for alpha, c in p.items():
                beta = tuple(a + b for a, b in zip(alpha, g))
                col = idx.get(beta)
                if col is not None:
                    M[r, col] = c
            r += 1
    return MacaulayMatrix(M, tuple(cols), k)


def _rank(s, tau, floor=1.0):
    # the floor keeps a tiny 0th-order matrix (just F(pt)) from counting as full rank
    ref = max(float(s[0]) if s.size else 0.0, floor)
    return int(np.sum(s >= tau * ref))


def _nullity(M, tau):
    s = np.linalg.svd(M, compute_uv=False)
    return M.shape[1] - _rank(s, tau)


def _null_space(M, tau):
    _, s, Vh = np.linalg.svd(M, full_matrices=M.shape[0] < M.shape[1])
    return Vh[_rank(s, tau):].conj().T


@dataclass(frozen=True)
class OracleResult:
    mu: int
    rho: int
    nullspace: np.ndarray
    columns: tuple
    nullities: tuple


def multiplicity(F, pt, tau=ORACLE_TAU, k_max=12):
    """Multiplicity ``mu`` and index ``rho`` from the stabilised Macaulay nullity.

    ``rho`` is the first order whose nullity equals the previous one;
    ``nullspace`` spans the dual space at order ``rho - 1``.
    """
    x = as_point(pt, F.nvars)
    local = _local_expansions(F, x)
    nullities = []
    for k in range(k_max + 1):
        nullities.append(_nullity(macaulay_matrix(F, x, k, local).matrix, tau))
        if k >= 1 and nullities[k] == nullities[k - 1]:
            mac = macaulay_matrix(F, x, k - 1, local)
            N = _null_space(mac.matrix, tau)
            return OracleResult(nullities[k], k, N, mac.columns, tuple(nullities))
    raise NoStabilization(f"Macaulay nullity still growing at order {k_max}: {nullities}")


def dual_basis_bruteforce(F, pt, tau=ORACLE_TAU, k_max=12):
    """Null vectors of the order ``rho - 1`` Macaulay matrix as differential operators."""
    res = multiplicity(F, pt, tau, k_max)
    ops = []
    for c in range(res.nullspace.shape[1]):
        v = res.nullspace[:, c]
        ops.append(DiffOp({a: v[i] for i, a in enumerate(res.columns) if abs(v[i]) > 1e-14}, F.nvars))
    return ops

import numpy as np
import pytest

from singroot.deflation import (
    augment_G,
    augment_J,
    deflation_chain,
    lifted_basis,
    lifted_P_explicit,
    lifted_parameters,
)
from singroot.errors import BreadthError
from singroot.linalg import complete_unitary, svd
from singroot.noether import DiffOp, build_P, gamma_R, noether_basis, span_residual
from singroot.oracle import multiplicity
from singroot.poly import Poly, PolySystem, compose_linear
from singroot.synthetic import planted_corpus, planted_system


def variables(n):
    return [Poly.variable(i, n) for i in range(n)]


def test_augment_G_univariate():
    z, lam = variables(2)
    G = augment_G(PolySystem([Poly.variable(0, 1) ** 2]))
    assert G.system == PolySystem([z**2, 2 * z * lam, lam - 1])
    assert G.kind == "G" and G.system.npolys == 3 and G.system.nvars == 2


def test_augment_G_toy():
    x1, x2 = variables(2)
    z1, z2, l1, l2 = variables(4)
    G = augment_G(PolySystem([x1**2 - x2, x2**2]))
    assert G.system == PolySystem([z1**2 - z2, z2**2, 2 * z1 * l1 - l2, 2 * z2 * l2, l1 - 1])


def test_augment_constant_jacobian_block():
    x1, x2 = variables(2)
    one = Poly.constant(1.0, 2)
    G = augment_G(PolySystem([one, one]))
    assert G.system[2].is_zero() and G.system[3].is_zero()


def test_augment_J_examples():
    x, nu = variables(2)
    J = augment_J(PolySystem([Poly.variable(0, 1) ** 2]), [1])
    assert J.system == PolySystem([x**2, 2 * x * nu, nu - 1])
    A = J.system.jacobian([0, 1])
    np.testing.assert_array_equal(A, [[0, 0], [2, 0], [0, 1]])
    assert np.linalg.matrix_rank(A) == 2
    assert multiplicity(J.system, [0, 1]).mu == 1
    x1, x2 = variables(2)
    F = PolySystem([x1**2 - x2, x2**2])
    assert augment_J(F, [1, 0]).system == augment_G(F).system
    J = augment_J(F, [1, 0])
    assert (J.system.npolys, J.system.nvars) == (5, 4)
    assert multiplicity(J.system, [0, 0, 1, 0]).mu == 3


def test_augment_J_conjugates_h():
    x1, x2 = variables(2)
    J = augment_J(PolySystem([x1, x2]), [1j, 0])
    assert J.system[-1].coeff((0, 0, 1, 0)) == -1j
    with pytest.raises(ValueError):
        augment_J(PolySystem([x1, x2]), [0, 0])


def test_chain_examples():
    assert len(deflation_chain(PolySystem([Poly.variable(0, 1) ** 2]), [1e-8], tau=1e-4)) == 1
    x1, x2 = variables(2)
    assert len(deflation_chain(PolySystem([x1**2 - x2, x2**2]), [1e-9, -1e-9], tau=1e-4)) == 3
    assert deflation_chain(PolySystem([x1 - 1, x2]), [1, 0]) == []
    with pytest.raises(BreadthError):
        deflation_chain(PolySystem([x1**2, x2**2]), [0, 0])


def _rotated(P):
    R = complete_unitary(P.null_direction)
    H = compose_linear(P.system, R)
    return H, R.conj().T @ P.root


def test_lifted_operators_annihilate_G():
    for P in planted_corpus(20, seed=13):
        H, z = _rotated(P)
        basis = noether_basis(H, z, tau=1e-8)
        G = augment_G(H)
        n = H.nvars
        zl = np.concatenate([z, np.eye(n)[0]])
        ops = lifted_basis(basis)
        assert len(ops) == P.mu - 1
        for L in ops:
            assert np.linalg.norm(L.apply(G.system, zl)) <= 1e-8
        if P.mu >= 3:
            a2 = basis.params[2]
            L1 = DiffOp({tuple(int(i == 0) for i in range(2 * n)): 1}, 2 * n)
            for j in range(1, n):
                L1 = L1 + DiffOp({tuple(int(i == n + j) for i in range(2 * n)): 2 * a2[j]}, 2 * n)
            assert ops[1].max_abs_diff(L1) == 0
        params = lifted_parameters(basis)
        for k in range(2, len(ops)):
            generic = build_P(ops[:k], params)
            assert generic.max_abs_diff(lifted_P_explicit(basis, ops, k)) <= 1e-12


def test_lifted_operators_at_approximate_point():
    # at a point eps away the annihilation degrades gracefully, O(eps)
    for P in planted_corpus(8, seed=14):
        H, z = _rotated(P)
        basis = noether_basis(H, z, tau=1e-8)
        G = augment_G(H)
        n = H.nvars
        eps = 1e-6
        zl = np.concatenate([z, np.eye(n)[0]]) + eps
        for L in lifted_basis(basis):
            assert np.linalg.norm(L.apply(G.system, zl)) <= 1e4 * eps


def test_corank_one_preserved():
    for P in planted_corpus(20, seed=15):
        if P.mu < 3:
            continue
        H, z = _rotated(P)
        G = augment_G(H)
        zl = np.concatenate([z, np.eye(H.nvars)[0]])
        s = svd(G.system.jacobian(zl)).singvals
        ref = max(s[0], 1.0)
        assert np.sum(s < 1e-8 * ref) == 1


def test_rotated_basis_lies_in_lifted_span():
    for P in planted_corpus(20, seed=16):
        if P.mu < 3:
            continue
        H, z = _rotated(P)
        basis = noether_basis(H, z, tau=1e-8)
        G = augment_G(H)
        n = H.nvars
        zl = np.concatenate([z, np.eye(n)[0]])
        lifted = lifted_basis(basis)
        rbar = np.zeros(2 * n, dtype=complex)
        for alpha, c in lifted[1].terms.items():
            rbar[alpha.index(1)] = c
        rbar /= np.linalg.norm(rbar)
        Rbar = complete_unitary(rbar)
        J = compose_linear(G.system, Rbar)
        bar = noether_basis(J, Rbar.conj().T @ zl, tau=1e-8)
        assert bar.mu == P.mu - 1
        for i, L in enumerate(bar.ops):
            assert span_residual(gamma_R(L, Rbar), lifted[: i + 1]) <= 1e-8


def test_random_h_chain():
    for P in planted_corpus(8, seed=17):
        chain = deflation_chain(P.system, P.root, tau=1e-6, random_h=True, rng=0)
        assert len(chain) == P.mu - 1


def test_chained_jacobian_matches_expanded_system():
    rng = np.random.default_rng(21)
    for P in planted_corpus(count=8, seed=3):
        F = P.system
        a = augment_J(F, rng.standard_normal(F.nvars) + 0j)
        b = augment_J(a, rng.standard_normal(a.nvars) + 1j * rng.standard_normal(a.nvars))
        assert (b.nvars, b.npolys) == (b.system.nvars, b.system.npolys)
        pt = rng.standard_normal(b.nvars) + 1j * rng.standard_normal(b.nvars)
        scale = max(1.0, np.max(np.abs(b.system.jacobian(pt))))
        assert np.max(np.abs(b.jacobian(pt) - b.system.jacobian(pt))) <= 1e-12 * scale
        assert np.max(np.abs(b(pt) - b.system(pt))) <= 1e-12 * scale


def test_long_chain_on_four_variables():
    P = planted_system(4, 6, np.random.default_rng(19))
    chain = deflation_chain(P.system, P.root, tau=1e-8)
    assert len(chain) == 5
    assert chain[-1].nvars == 128

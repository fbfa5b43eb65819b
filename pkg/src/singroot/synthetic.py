"""Random breadth-one test systems with a planted root of known multiplicity.

In local coordinates ``u`` the system is::

    f_1 = u_1^mu (1 + l(u)) + sum_j (c_j + e_j u_1) (u_j - q_j(u_1))
    f_j = u_j - q_j(u_1),            j = 2..n

with ``q_j`` of order at least two and ``l`` a random linear form. The
ideal is generated by ``u_1^mu * unit`` and the graphs ``u_j = q_j(u_1)``,
so the root ``u = 0`` has multiplicity exactly ``mu`` and the Jacobian has
the single null direction ``e_1``. The equations are then mixed by a random
unitary matrix and the variables moved by ``x = root + U u``.
"""

from dataclasses import dataclass

import numpy as np

from .poly import Poly, PolySystem, compose_affine


@dataclass(frozen=True)
class PlantedSystem:
    system: PolySystem
    root: np.ndarray
    mu: int
    null_direction: np.ndarray
    U: np.ndarray


def random_unitary(n, rng, complex_=True):
    A = rng.standard_normal((n, n))
    if complex_:
        A = A + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(A)
    d = np.diag(R)
    return Q * (d / np.abs(d))[None, :]


def planted_system(nvars, mu, rng=None, complex_=True, scale=0.5):
    """Build a random system with an isolated breadth-one root of multiplicity ``mu``."""
    if nvars < 1 or mu < 2:
        raise ValueError("need nvars >= 1 and mu >= 2")
    rng = np.random.default_rng(rng)

    def coef(size=None):
        c = rng.standard_normal(size)
        if complex_:
            c = c + 1j * rng.standard_normal(size)
        return scale * c

    n = nvars
    u = [Poly.variable(i, n) for i in range(n)]
    graphs = []
    for j in range(1, n):
        q = Poly.zero(n)
        for d in range(2, mu + 1):
            q = q + coef() * u[0] ** d
        graphs.append(u[j] - q)
    lin = Poly.constant(1.0, n)
    for i in range(n):
        lin = lin + coef() * u[i]
    f1 = u[0] ** mu * lin
    for g in graphs:
        f1 = f1 + (coef() + 1.0) * g + coef() * u[0] * g
    local = [f1] + graphs
    mix = random_unitary(n, rng, complex_)
    mixed = []
    for i in range(n):
        p = Poly.zero(n)
        for k in range(n):
            p = p + mix[i, k] * local[k]
        mixed.append(p)
    root = coef(n) * 2
    if not complex_:
        root = np.asarray(root, dtype=float)
    U = random_unitary(n, rng, complex_)
    # F(x) = G(U^* (x - root)) places the planted root at ``root``
    Uh = U.conj().T
    system = compose_affine(PolySystem(mixed, n), Uh, -Uh @ root)
    return PlantedSystem(system, np.asarray(root, dtype=complex), mu, U[:, 0].copy(), U)


def planted_corpus(count=24, seed=20240, max_vars=4, max_mu=6):
    """Deterministic list of planted systems cycling through sizes and multiplicities."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = 1 + i % max_vars
        mu = 2 + (i // max_vars) % (max_mu - 1)
        out.append(planted_system(n, mu, rng))
    return out

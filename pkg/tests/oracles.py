"""Independent numeric oracles shared by the unit and acceptance suites.

These deliberately avoid the code paths they check: momentum transport
is probed through raw matrix conjugation with a library inverse, and
the jump correction through a grid scan with bisection polishing.
"""

import math

import numpy as np

from hlp.group import ALGEBRA_BASIS, AlgebraVector, GroupElement, Momentum, coadjoint, pair
from hlp.se2 import restricted_hamiltonian

H0 = GroupElement(1.0, 0.0, math.pi)


def conjugation_matrix_oracle(h: GroupElement, mu: Momentum) -> tuple:
    """<mu, h e_i h^-1> per basis vector, all in the matrix picture."""
    hm = h.matrix()
    hm_inv = np.linalg.inv(hm)
    comps = []
    for e in ALGEBRA_BASIS:
        c = hm @ e.matrix() @ hm_inv
        comps.append(pair(mu, AlgebraVector(c[0, 2], c[1, 2], c[0, 1])))
    return tuple(comps)


def jump_root_scan(mu: Momentum, n: int = 2001):
    """Scan the jump correction sizes that keep the optimal energy.

    Evaluates F(eps) = h(transport(mu) + eps * e3) - h(mu) on a grid,
    polishes strict sign changes by bisection, and catches the tangent
    (double-root) case through the vertex of a local parabola fit.
    Returns the post-jump momenta, one per root found.
    """
    base = coadjoint(H0, mu)
    target = restricted_hamiltonian(mu)

    def F(eps):
        return restricted_hamiltonian(
            Momentum(base.mu_x, base.mu_y, base.mu_theta + eps)) - target

    span = 3.0 * (abs(mu.mu_y) + abs(mu.mu_theta)) + 2.0
    grid = np.linspace(-span, span, n)
    vals = np.array([F(e) for e in grid])

    def bisect(a, b):
        fa = F(a)
        for _ in range(200):
            m = 0.5 * (a + b)
            fm = F(m)
            if fm == 0.0 or b - a < 1e-13:
                return m
            if (fm > 0.0) == (fa > 0.0):
                a, fa = m, fm
            else:
                b = m
        return 0.5 * (a + b)

    i = int(np.argmax(vals[1:-1])) + 1
    x0, x1, x2 = grid[i - 1], grid[i], grid[i + 1]
    y0, y1, y2 = vals[i - 1], vals[i], vals[i + 1]
    denom = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0)
    vertex = x1 if denom == 0.0 else x1 - 0.5 * (
        (x1 - x0) ** 2 * (y1 - y2) - (x1 - x2) ** 2 * (y1 - y0)) / denom
    fv = F(vertex)
    if fv > 1e-12:
        roots = [bisect(grid[0], vertex), bisect(vertex, grid[-1])]
    elif abs(fv) <= 1e-12:
        roots = [vertex]
    else:
        roots = []
    return [Momentum(base.mu_x, base.mu_y, base.mu_theta + r) for r in roots]

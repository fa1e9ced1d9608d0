"""Triangle quadrature and reference Lagrange elements.

Reference triangle: vertices (0,0), (1,0), (0,1), area 1/2.  The quadrature
rule is the symmetric 12-point rule of polynomial degree 6; weights are
normalized so that ``sum(w) == 0.5`` and a physical integral is
``sum(w * |detJ| * f(x_q))``.
"""

from __future__ import annotations

import numpy as np

# degree-6 symmetric rule: three orbits (3 + 3 + 6 points), all weights positive
_ORBITS = [
    (0.873821971016996, 0.063089014491502, 0.050844906370207),
    (0.501426509658179, 0.249286745170910, 0.116786275726379),
]
_ORBIT6 = (0.636502499121399, 0.310352451033785, 0.053145049844816,
           0.082851075618374)


def triangle_rule():
    """Return (points, weights): points (nq, 2) in reference coordinates,
    weights (nq,) summing to the reference area 1/2."""
    bary = []
    w = []
    for a, b, wt in _ORBITS:
        for lam in ((a, b, b), (b, a, b), (b, b, a)):
            bary.append(lam)
            w.append(wt)
    a, b, c, wt = _ORBIT6
    import itertools
    for lam in set(itertools.permutations((a, b, c))):
        bary.append(lam)
        w.append(wt)
    bary = np.asarray(bary)
    w = 0.5 * np.asarray(w)
    # barycentric (l0, l1, l2) -> (xi, eta) = (l1, l2)
    pts = bary[:, 1:].copy()
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    return pts[order], w[order]


def p2_shape(points):
    """P2 shape functions at reference points: values (nq, 6) and reference
    gradients (nq, 6, 2).  Node order: 3 vertices, then midpoints of edges
    (1,2), (2,0), (0,1)."""
    xi, eta = points[:, 0], points[:, 1]
    l0 = 1.0 - xi - eta
    l1 = xi
    l2 = eta
    n = np.stack([
        l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1),
        4 * l1 * l2, 4 * l2 * l0, 4 * l0 * l1,
    ], axis=1)
    zero = np.zeros_like(xi)
    dxi = np.stack([
        1 - 4 * l0, 4 * l1 - 1, zero, 4 * l2, -4 * l2, 4 * (l0 - l1),
    ], axis=1)
    deta = np.stack([
        1 - 4 * l0, zero, 4 * l2 - 1, 4 * l1, 4 * (l0 - l2), -4 * l1,
    ], axis=1)
    return n, np.stack([dxi, deta], axis=2)


def p1_shape(points):
    """P1 shape functions: values (nq, 3) and constant reference gradients
    (3, 2)."""
    xi, eta = points[:, 0], points[:, 1]
    n = np.stack([1.0 - xi - eta, xi, eta], axis=1)
    g = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    return n, g

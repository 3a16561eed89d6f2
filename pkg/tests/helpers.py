"""Independent oracles used across the test suite.

These deliberately avoid the package's own solution paths: projections are
done by grid search over convex-combination weights, game values by an
external LP solver (HiGHS via scipy), Filippov sets by sampling field values
in a small ball, and gradients by finite differences.
"""

from __future__ import annotations

import itertools

import numpy as np
import scipy.optimize

from nsds.geometry import Polytope


def grid_projection_oracle(vertices: np.ndarray, resolution: float = 1e-4) -> np.ndarray:
    """Min-norm point of the hull by brute force over convex-combination
    weights: a coarse sweep followed by a local refinement to the target
    resolution."""
    V = np.asarray(vertices, dtype=float)
    n = V.shape[0]

    def sweep(center: np.ndarray, radius: float, steps: int) -> np.ndarray:
        axes = [
            np.clip(np.linspace(c - radius, c + radius, steps), 0.0, 1.0)
            for c in center
        ]
        best, best_val = None, np.inf
        for combo in itertools.product(*axes):
            w = np.array(combo)
            s = w.sum()
            if s <= 0:
                continue
            w = w / s
            p = w @ V
            val = p @ p
            if val < best_val:
                best, best_val = w, val
        return best

    w = sweep(np.full(n, 0.5), 0.5, 21)
    radius = 0.5 / 10
    while radius > resolution / 4:
        w = sweep(w, radius, 9)
        radius /= 4
    return w @ V


def maximin_lp_oracle(A: Polytope, B: Polytope) -> float:
    """Game value sup_{zeta in A} min_{v in B} zeta . v via scipy's HiGGS LP:
    an implementation-independent route to the same optimum."""
    M = A.vertices @ B.vertices.T
    na, nb = M.shape
    # Variables: lambda (na), t.  max t  s.t.  t <= (lambda^T M)_j,  sum lambda = 1.
    c = np.zeros(na + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-M.T, np.ones((nb, 1))])
    b_ub = np.zeros(nb)
    A_eq = np.zeros((1, na + 1))
    A_eq[0, :na] = 1.0
    b_eq = np.array([1.0])
    bounds = [(0, None)] * na + [(None, None)]
    res = scipy.optimize.linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                                 bounds=bounds, method="highs")
    assert res.success
    return float(res.x[-1])


def maximin_grid_search(A: Polytope, B: Polytope, per_dim: int = 200) -> float:
    """Literal grid search: axis-aligned grid over A's bounding box (plus A's
    vertices), feasibility by weight fitting, payoff min over B's vertices.

    A one-sided bound: grid values never exceed the true maximin value.
    """
    Bv = B.vertices
    candidates = [v for v in A.vertices]
    lo = A.vertices.min(axis=0)
    hi = A.vertices.max(axis=0)
    axes = [np.linspace(lo[k], hi[k], per_dim) for k in range(A.dim)]
    if A.dim <= 2:
        mesh = np.array(list(itertools.product(*axes)))
    else:
        mesh = np.array(list(itertools.product(*[ax[::4] for ax in axes])))
    inside = [p for p in mesh if _in_hull(A, p)]
    candidates.extend(inside)
    return max(float(np.min(Bv @ z)) for z in candidates)


def _in_hull(P: Polytope, y, tol: float = 1e-9) -> bool:
    """Membership via scipy linprog weight fitting (independent of the
    package's least-norm machinery)."""
    V = P.vertices
    n = V.shape[0]
    A_eq = np.vstack([V.T, np.ones(n)])
    b_eq = np.concatenate([np.asarray(y, dtype=float), [1.0]])
    res = scipy.optimize.linprog(np.zeros(n), A_eq=A_eq, b_eq=b_eq,
                                 bounds=[(0, None)] * n, method="highs")
    return bool(res.success)


def filippov_ball_oracle(field, x, delta: float = 1e-3, samples: int = 10_000,
                         surface_clearance: float = 1e-6, seed: int = 0) -> Polytope:
    """Hull of field values sampled in a ball around x, excluding points too
    close to any switching surface."""
    rng = np.random.default_rng(seed)
    x = np.asarray(x, dtype=float)
    values = []
    while len(values) < samples:
        y = x + delta * (2.0 * rng.random(field.dim) - 1.0)
        if np.linalg.norm(y - x) > delta:
            continue
        if any(abs(s.value(y)) <= surface_clearance for s in field.switches):
            continue
        values.append(field.value(y))
    return Polytope(np.array(values))


def central_difference_gradient(f, x, h: float = 1e-6) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for k in range(x.shape[0]):
        e = np.zeros_like(x)
        e[k] = h
        g[k] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def forward_directional_derivative(f, x, v, h: float = 1e-6) -> float:
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    return (f(x + h * v) - f(x)) / h


def random_polytope(rng, dim: int, max_vertices: int, scale: float = 1.0) -> Polytope:
    n = rng.integers(1, max_vertices + 1)
    return Polytope(scale * (2.0 * rng.random((n, dim)) - 1.0))

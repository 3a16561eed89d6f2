"""Small-scale exact convex geometry on vertex-represented polytopes.

Everything here works on the convex hull of an explicit, finite vertex list.
Least-norm points are computed with Wolfe's nearest-point algorithm, and the
linear programs behind maximin values and polytope slicing are solved by a
dense two-phase simplex with Bland's rule.  No external solver is used.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, EmptySetError

# Default tolerance for geometric membership queries, reported in results.
MEMBERSHIP_TOL = 1e-9

_LP_TOL = 1e-10


@dataclass(frozen=True)
class Polytope:
    """Convex hull of finitely many points in R^d.

    A distinguished empty variant (zero vertices) represents the empty set.
    Repeated vertices and lower-dimensional hulls are legal; no reduction
    pass is performed.
    """

    vertices: np.ndarray  # shape (n, dim)
    dim: int

    def __init__(self, vertices, dim: int | None = None):
        verts = np.atleast_2d(np.asarray(vertices, dtype=float))
        if verts.size == 0:
            if dim is None:
                raise ValueError("empty polytope needs an explicit dimension")
            verts = verts.reshape(0, dim)
        if dim is None:
            dim = verts.shape[1]
        if verts.shape[1] != dim:
            raise DimensionMismatchError(
                f"vertices have dimension {verts.shape[1]}, expected {dim}"
            )
        verts = verts.copy()
        verts.flags.writeable = False
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "dim", dim)

    @classmethod
    def empty(cls, dim: int) -> "Polytope":
        return cls(np.zeros((0, dim)), dim)

    @classmethod
    def singleton(cls, point) -> "Polytope":
        return cls(np.atleast_2d(np.asarray(point, dtype=float)))

    @classmethod
    def interval(cls, lo: float, hi: float) -> "Polytope":
        return cls([[lo], [hi]])

    @property
    def is_empty(self) -> bool:
        return self.vertices.shape[0] == 0

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    def scaled(self, s: float) -> "Polytope":
        if self.is_empty:
            return self
        return Polytope(s * self.vertices, self.dim)

    def translated(self, b) -> "Polytope":
        if self.is_empty:
            return self
        return Polytope(self.vertices + np.asarray(b, dtype=float), self.dim)

    def to_json_dict(self) -> dict:
        return {"dim": self.dim, "vertices": self.vertices.tolist()}

    @classmethod
    def from_json_dict(cls, d: dict) -> "Polytope":
        return cls(np.asarray(d["vertices"], dtype=float).reshape(-1, d["dim"]), d["dim"])


# ---------------------------------------------------------------------------
# Linear programming: dense two-phase simplex with Bland's rule.
# ---------------------------------------------------------------------------

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    status: str
    x: np.ndarray | None
    value: float


def solve_lp(c, A, b, *, tol: float = _LP_TOL, max_iter: int = 5000) -> LPResult:
    """Solve min c@x subject to A@x = b, x >= 0.

    Two-phase tableau simplex.  Bland's rule is used in both phases, so the
    method terminates on the degenerate problems this package produces
    (duplicated polytope vertices, redundant equality constraints).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel().copy()
    c = np.asarray(c, dtype=float).ravel()
    m, n = A.shape
    if b.shape[0] != m or c.shape[0] != n:
        raise DimensionMismatchError("inconsistent LP shapes")

    A = A.copy()
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # Phase 1: minimize the sum of artificial variables.
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    basis = list(range(n, n + m))
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()

    status = _simplex_iterate(T, basis, n + m, tol, max_iter)
    if status == UNBOUNDED:  # pragma: no cover - phase 1 objective is bounded
        return LPResult(INFEASIBLE, None, np.inf)
    if -T[m, -1] > np.sqrt(tol):
        return LPResult(INFEASIBLE, None, np.inf)

    # Drive lingering artificials out of the basis where possible.
    for i in range(m):
        if basis[i] >= n:
            piv = np.flatnonzero(np.abs(T[i, :n]) > tol)
            if piv.size:
                _pivot(T, basis, i, int(piv[0]))

    keep_rows = [i for i in range(m) if basis[i] < n]
    T2 = np.zeros((len(keep_rows) + 1, n + 1))
    T2[:-1, :n] = T[keep_rows, :n]
    T2[:-1, -1] = T[keep_rows, -1]
    basis2 = [basis[i] for i in keep_rows]

    # Phase 2 cost row, canonicalized against the current basis.
    T2[-1, :n] = c
    T2[-1, -1] = 0.0
    for i, bi in enumerate(basis2):
        if abs(T2[-1, bi]) > 0:
            T2[-1, :] -= T2[-1, bi] * T2[i, :]

    status = _simplex_iterate(T2, basis2, n, tol, max_iter)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, None, -np.inf)

    x = np.zeros(n)
    for i, bi in enumerate(basis2):
        x[bi] = T2[i, -1]
    return LPResult(OPTIMAL, x, float(c @ x))


def _pivot(T: np.ndarray, basis: list[int], row: int, col: int) -> None:
    T[row, :] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and abs(T[r, col]) > 0:
            T[r, :] -= T[r, col] * T[row, :]
    basis[row] = col


def _simplex_iterate(T, basis, n_vars, tol, max_iter) -> str:
    m = len(basis)
    for _ in range(max_iter):
        entering = -1
        for j in range(n_vars):  # Bland: smallest eligible index
            if T[m, j] < -tol:
                entering = j
                break
        if entering < 0:
            return OPTIMAL
        ratios = []
        for i in range(m):
            if T[i, entering] > tol:
                ratios.append((T[i, -1] / T[i, entering], basis[i], i))
        if not ratios:
            return UNBOUNDED
        best = min(r for r, _, _ in ratios)
        leaving = min(i for r, bi, i in ratios if r <= best + tol)
        _pivot(T, basis, leaving, entering)
    raise RuntimeError("simplex iteration limit reached")


# ---------------------------------------------------------------------------
# Least-norm point (Wolfe's nearest-point algorithm).
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LeastNormResult:
    point: np.ndarray
    coefficients: np.ndarray  # convex combination over the input vertices


def _affine_minimizer(V: np.ndarray) -> np.ndarray:
    """Coefficients of the min-norm point in the affine hull of the rows of V."""
    k = V.shape[0]
    G = V @ V.T
    K = np.zeros((k + 1, k + 1))
    K[:k, :k] = G
    K[:k, k] = 1.0
    K[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol, *_ = np.linalg.lstsq(K, rhs, rcond=None)
    return sol[:k]


def least_norm(P: Polytope, *, tol: float = 1e-12, max_iter: int = 1000) -> LeastNormResult:
    """Unique minimum-norm point of the hull, with its convex coefficients.

    The returned coefficients certify hull membership: they are nonnegative
    and sum to one up to 1e-9.
    """
    if P.is_empty:
        raise EmptySetError("least_norm of the empty polytope")
    V = P.vertices
    n = V.shape[0]
    if n == 1:
        return LeastNormResult(point=V[0].copy(), coefficients=np.ones(1))
    scale = max(1.0, float(np.max(np.abs(V))))
    eps = tol * scale * scale

    start = int(np.argmin(np.einsum("ij,ij->i", V, V)))
    corral = [start]
    lam = np.array([1.0])

    for _ in range(max_iter):
        x = lam @ V[corral]
        xx = float(x @ x)
        scores = V @ x
        j = int(np.argmin(scores))
        if scores[j] >= xx - eps or xx <= eps:
            break
        if j in corral:
            break
        corral.append(j)
        lam = np.append(lam, 0.0)
        # Minor cycle: pull the affine minimizer back into the convex hull.
        for _ in range(max_iter):
            alpha = _affine_minimizer(V[corral])
            if np.all(alpha > -1e-14):
                lam = np.clip(alpha, 0.0, None)
                s = lam.sum()
                if s > 0:
                    lam /= s
                break
            neg = alpha <= -1e-14
            with np.errstate(divide="ignore", invalid="ignore"):
                steps = np.where(neg, lam / (lam - alpha), np.inf)
            theta = float(np.min(steps[neg]))
            lam = theta * alpha + (1.0 - theta) * lam
            keep = lam > 1e-13
            if not np.any(keep):  # pragma: no cover - numerical guard
                keep[int(np.argmax(lam))] = True
            corral = [ci for ci, k in zip(corral, keep) if k]
            lam = lam[keep]
            s = lam.sum()
            if s > 0:
                lam /= s

    coeffs = np.zeros(n)
    for ci, li in zip(corral, lam):
        coeffs[ci] += li
    coeffs = np.clip(coeffs, 0.0, None)
    total = coeffs.sum()
    if total > 0:
        coeffs /= total
    return LeastNormResult(point=coeffs @ V, coefficients=coeffs)


def distance_to_hull(P: Polytope, y) -> float:
    """Euclidean distance from the point y to the hull of P."""
    y = np.asarray(y, dtype=float)
    if P.is_empty:
        raise EmptySetError("distance to the empty polytope")
    if y.shape[0] != P.dim:
        raise DimensionMismatchError("point dimension mismatch")
    shifted = Polytope(P.vertices - y, P.dim)
    return float(np.linalg.norm(least_norm(shifted).point))


def contains(P: Polytope, y, tol: float = MEMBERSHIP_TOL) -> bool:
    """True iff y is within Euclidean distance tol of the hull of P."""
    return distance_to_hull(P, y) <= tol


def support(P: Polytope, direction) -> float:
    """Support value max over the hull of direction . v (attained at a vertex)."""
    if P.is_empty:
        raise EmptySetError("support of the empty polytope")
    d = np.asarray(direction, dtype=float)
    if d.shape[0] != P.dim:
        raise DimensionMismatchError("direction dimension mismatch")
    return float(np.max(P.vertices @ d))


def maximin_value(A: Polytope, B: Polytope) -> float:
    """sup over zeta in A of min over v in B of zeta . v.

    The inner minimum over the hull of B is attained at a vertex, so this is
    the value of the matrix game with payoff M[i, j] = a_i . b_j, computed by
    a single LP on the vertex representations.
    """
    if A.is_empty or B.is_empty:
        raise EmptySetError("maximin_value needs nonempty polytopes")
    if A.dim != B.dim:
        raise DimensionMismatchError("maximin_value dimension mismatch")
    M = A.vertices @ B.vertices.T  # (na, nb)
    na, nb = M.shape
    # Variables: lambda (na), t+, t-, slack (nb).
    # Rows: sum(lambda) = 1;  M^T lambda - t+ + t- - s_j = 0 for each j.
    n = na + 2 + nb
    Aeq = np.zeros((1 + nb, n))
    beq = np.zeros(1 + nb)
    Aeq[0, :na] = 1.0
    beq[0] = 1.0
    Aeq[1:, :na] = M.T
    Aeq[1:, na] = -1.0
    Aeq[1:, na + 1] = 1.0
    Aeq[1:, na + 2 :] = -np.eye(nb)
    c = np.zeros(n)
    c[na] = -1.0
    c[na + 1] = 1.0
    res = solve_lp(c, Aeq, beq)
    if res.status != OPTIMAL:  # pragma: no cover - game LPs are always solvable
        raise RuntimeError(f"maximin LP failed: {res.status}")
    return -res.value


def affine_image(P: Polytope, M, b=None) -> Polytope:
    """Image hull {M v + b} of every vertex; exact because affine maps commute
    with convex hulls."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[1] != P.dim:
        raise DimensionMismatchError(
            f"matrix has {M.shape[1]} columns, polytope dimension is {P.dim}"
        )
    out_dim = M.shape[0]
    if b is None:
        b = np.zeros(out_dim)
    b = np.asarray(b, dtype=float).ravel()
    if b.shape[0] != out_dim:
        raise DimensionMismatchError("offset dimension mismatch")
    if P.is_empty:
        return Polytope.empty(out_dim)
    return Polytope(P.vertices @ M.T + b, out_dim)


def minkowski_sum(P: Polytope, Q: Polytope) -> Polytope:
    """Hull of all pairwise vertex sums (the Minkowski sum of the hulls)."""
    if P.dim != Q.dim:
        raise DimensionMismatchError("minkowski_sum dimension mismatch")
    if P.is_empty or Q.is_empty:
        return Polytope.empty(P.dim)
    sums = P.vertices[:, None, :] + Q.vertices[None, :, :]
    return Polytope(sums.reshape(-1, P.dim), P.dim)


def hausdorff_distance(P: Polytope, Q: Polytope) -> float:
    """Hausdorff distance between two hulls.

    For convex sets the supremum of dist(., other) is attained at a vertex,
    so vertex-to-hull distances suffice.
    """
    if P.dim != Q.dim:
        raise DimensionMismatchError("hausdorff dimension mismatch")
    if P.is_empty and Q.is_empty:
        return 0.0
    if P.is_empty or Q.is_empty:
        return np.inf
    d1 = max(distance_to_hull(Q, v) for v in P.vertices)
    d2 = max(distance_to_hull(P, v) for v in Q.vertices)
    return max(d1, d2)


# ---------------------------------------------------------------------------
# Convex polygons in the plane (boundary-distance machinery).
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvexPolygon:
    """Convex polygon with counterclockwise vertices, at least three of them."""

    vertices: np.ndarray  # (n, 2)

    def __init__(self, vertices):
        verts = np.atleast_2d(np.asarray(vertices, dtype=float))
        if verts.shape[0] < 3 or verts.shape[1] != 2:
            raise ValueError("a polygon needs at least three 2-D vertices")
        n = verts.shape[0]
        for i in range(n):
            a = verts[i]
            b = verts[(i + 1) % n]
            c = verts[(i + 2) % n]
            cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
            if np.linalg.norm(b - a) < 1e-12:
                from .errors import ModelError

                raise ModelError("degenerate polygon: zero-length edge")
            if cross < -1e-12:
                raise ValueError("polygon vertices must be counterclockwise and convex")
        verts = verts.copy()
        verts.flags.writeable = False
        object.__setattr__(self, "vertices", verts)

    @classmethod
    def square(cls, half_width: float = 1.0) -> "ConvexPolygon":
        h = half_width
        return cls([[-h, -h], [h, -h], [h, h], [-h, h]])

    @property
    def n_edges(self) -> int:
        return self.vertices.shape[0]

    def edges(self):
        n = self.n_edges
        for i in range(n):
            yield self.vertices[i], self.vertices[(i + 1) % n]

    def inward_normal(self, i: int) -> np.ndarray:
        a = self.vertices[i]
        b = self.vertices[(i + 1) % self.n_edges]
        t = b - a
        n = np.array([-t[1], t[0]])  # ccw order makes this the inward normal
        return n / np.linalg.norm(n)

    def edge_distance(self, p, i: int) -> float:
        """Euclidean distance from p to edge segment i."""
        a = self.vertices[i]
        b = self.vertices[(i + 1) % self.n_edges]
        p = np.asarray(p, dtype=float)
        t = b - a
        s = float(np.clip((p - a) @ t / (t @ t), 0.0, 1.0))
        return float(np.linalg.norm(p - (a + s * t)))

    def contains_point(self, p, tol: float = 0.0) -> bool:
        p = np.asarray(p, dtype=float)
        return all((p - a) @ self.inward_normal(i) >= -tol for i, (a, _) in enumerate(self.edges()))

    def boundary_distance(self, p) -> float:
        """Distance to the boundary, negated outside the polygon."""
        d = min(self.edge_distance(p, i) for i in range(self.n_edges))
        return d if self.contains_point(p, tol=1e-12) else -d


def as_point(value: Sequence[float] | float) -> np.ndarray:
    """Coerce scalars / sequences into a 1-D float vector."""
    arr = np.asarray(value, dtype=float)
    return arr.reshape(1) if arr.ndim == 0 else arr.ravel()

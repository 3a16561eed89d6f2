"""Piecewise-continuous vector fields and their set-valued convexifications.

A :class:`PiecewiseField` is a finite collection of smooth switching
functions ``g_1..g_m`` together with one smooth vector field per sign cell.
The convexified right-hand side at a point is the hull of the continuous
extensions of all adjacent cells; off the switching surfaces it collapses to
the single cell value.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from . import geometry
from .errors import (
    DegenerateSurfaceError,
    DimensionMismatchError,
    ModelError,
    NotSlidingError,
    UnsupportedError,
)
from .geometry import Polytope

SignVector = tuple[int, ...]

CONTINUITY = "continuity"
CROSSING = "crossing"
SLIDING = "sliding"
REPULSIVE = "repulsive"
TANGENT = "tangent"


@dataclass(frozen=True)
class SwitchingSurface:
    """Smooth scalar function with an analytic gradient; its zero set is one
    switching surface."""

    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    name: str = ""

    @classmethod
    def affine(cls, a, b: float = 0.0, name: str = "") -> "SwitchingSurface":
        a = np.asarray(a, dtype=float)
        return cls(
            value=lambda x: float(a @ x + b),
            grad=lambda x: a.copy(),
            name=name or f"affine({a.tolist()},{b})",
        )

    @classmethod
    def coordinate(cls, index: int, dim: int, name: str = "") -> "SwitchingSurface":
        a = np.zeros(dim)
        a[index] = 1.0
        return cls.affine(a, 0.0, name=name or f"x{index + 1}")


def default_active_tol(x: np.ndarray) -> float:
    """Surface-activity band; scales with the state so detection is stable."""
    return 1e-8 * (1.0 + float(np.linalg.norm(x)))


class PiecewiseField:
    """Vector field that is smooth on each sign cell of the switching functions.

    ``cells`` maps sign vectors in {-1, +1}^m to callables x -> R^d.  Empty
    cells are simply not declared.  ``m = 0`` (no switches, one cell keyed by
    the empty tuple) models a globally smooth field.
    """

    def __init__(
        self,
        dim: int,
        switches: list[SwitchingSurface],
        cells: Mapping[SignVector, Callable[[np.ndarray], np.ndarray]],
        name: str = "",
    ):
        self.dim = dim
        self.switches = list(switches)
        self.cells = {tuple(k): v for k, v in cells.items()}
        self.name = name
        m = len(self.switches)
        for k in self.cells:
            if len(k) != m or any(s not in (-1, 1) for s in k):
                raise ModelError(f"bad sign vector {k} for {m} switching functions")
        if not self.cells:
            raise ModelError("a piecewise field needs at least one declared cell")

    @property
    def n_switches(self) -> int:
        return len(self.switches)

    def switch_values(self, x: np.ndarray) -> np.ndarray:
        return np.array([s.value(x) for s in self.switches])

    def active_set(self, x: np.ndarray, tol: float | None = None) -> list[int]:
        tol = default_active_tol(x) if tol is None else tol
        g = self.switch_values(x)
        return [i for i in range(len(g)) if abs(g[i]) <= tol]

    def sign_vector(self, x: np.ndarray, tol: float | None = None) -> SignVector:
        tol = default_active_tol(x) if tol is None else tol
        g = self.switch_values(x)
        return tuple(1 if gi > tol else (-1 if gi < -tol else 0) for gi in g)

    def cell_value(self, sigma: SignVector, x: np.ndarray) -> np.ndarray:
        try:
            fn = self.cells[tuple(sigma)]
        except KeyError:
            raise ModelError(f"no declared cell for sign vector {sigma}") from None
        return np.asarray(fn(np.asarray(x, dtype=float)), dtype=float)

    def value(self, x: np.ndarray, tol: float | None = None) -> np.ndarray:
        """One-sided field value at x using the strict sign vector.

        Raises ModelError on a switching surface (no unique cell there).
        """
        sigma = self.sign_vector(x, tol)
        if any(s == 0 for s in sigma):
            raise ModelError("field value queried on a switching surface")
        return self.cell_value(sigma, x)


@dataclass(frozen=True)
class SurfaceClassification:
    kind: str
    active_surfaces: tuple[int, ...]
    witness: Polytope
    alpha: float | None = None
    beta: float | None = None


def filippov_set(F: PiecewiseField, x, tol: float | None = None) -> Polytope:
    """Convexified field value at x.

    Off the surfaces this is the singleton cell value.  On surfaces it is
    built entirely from the continuous extensions of the adjacent declared
    cells, so redefining the field on the surfaces themselves cannot change
    it.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[0] != F.dim:
        raise DimensionMismatchError("point dimension mismatch")
    tol = default_active_tol(x) if tol is None else tol
    g = F.switch_values(x)
    active = [i for i in range(len(g)) if abs(g[i]) <= tol]
    fixed = {i: (1 if g[i] > 0 else -1) for i in range(len(g)) if i not in active}
    if not active:
        sigma = tuple(fixed[i] for i in range(len(g)))
        return Polytope([F.cell_value(sigma, x)])
    verts = []
    for combo in itertools.product((-1, 1), repeat=len(active)):
        sigma = [0] * len(g)
        for i, s in fixed.items():
            sigma[i] = s
        for i, s in zip(active, combo):
            sigma[i] = s
        sigma = tuple(sigma)
        if sigma in F.cells:
            verts.append(F.cell_value(sigma, x))
    if not verts:
        raise ModelError(f"no declared cell adjacent to x={x.tolist()}")
    return Polytope(np.array(verts))


def _adjacent_cells(F: PiecewiseField, x: np.ndarray, i: int, tol: float):
    """Sign vectors of the two cells separated by surface i at x."""
    g = F.switch_values(x)
    base = [1 if gj > 0 else -1 for gj in g]
    lo = list(base)
    hi = list(base)
    lo[i] = -1
    hi[i] = 1
    lo, hi = tuple(lo), tuple(hi)
    if lo not in F.cells or hi not in F.cells:
        raise ModelError(f"surface {i} does not separate two declared cells at {x.tolist()}")
    return lo, hi


def classify_point(F: PiecewiseField, x, tol: float | None = None) -> SurfaceClassification:
    """Classify the local solution behaviour at x.

    With one active surface the normal components alpha (minus-side field)
    and beta (plus-side field) decide the kind, with the convention that the
    surface gradient points from the minus cell toward the plus cell.  With
    two or more active surfaces the kind is ``tangent`` and the Filippov
    polytope is returned as witness.
    """
    x = np.asarray(x, dtype=float)
    tol = default_active_tol(x) if tol is None else tol
    active = F.active_set(x, tol)
    witness = filippov_set(F, x, tol)
    if not active:
        return SurfaceClassification(CONTINUITY, (), witness)
    if len(active) >= 2:
        return SurfaceClassification(TANGENT, tuple(active), witness)
    i = active[0]
    n = F.switches[i].grad(x)
    if np.linalg.norm(n) <= tol:
        raise DegenerateSurfaceError(f"switching gradient vanishes on surface {i}")
    lo, hi = _adjacent_cells(F, x, i, tol)
    alpha = float(n @ F.cell_value(lo, x))
    beta = float(n @ F.cell_value(hi, x))
    if abs(alpha) <= tol or abs(beta) <= tol:
        kind = TANGENT
    elif alpha * beta > 0:
        kind = CROSSING
    elif alpha > 0 and beta < 0:
        kind = SLIDING
    else:
        kind = REPULSIVE
    return SurfaceClassification(kind, (i,), witness, alpha=alpha, beta=beta)


@dataclass(frozen=True)
class SlidingResult:
    vector: np.ndarray
    lam: float  # weight on the plus-side field (the cell the gradient points into)


def sliding_field(F: PiecewiseField, x, i: int, tol: float | None = None) -> SlidingResult:
    """First-order sliding vector on surface i at x.

    Returns v = lam * X_plus + (1 - lam) * X_minus with lam in [0, 1] chosen
    so the result is tangent to the surface.  lam weights the plus-side cell.
    """
    x = np.asarray(x, dtype=float)
    tol = default_active_tol(x) if tol is None else tol
    n = F.switches[i].grad(x)
    if np.linalg.norm(n) <= tol:
        raise DegenerateSurfaceError(f"switching gradient vanishes on surface {i}")
    lo, hi = _adjacent_cells(F, x, i, tol)
    x_minus = F.cell_value(lo, x)
    x_plus = F.cell_value(hi, x)
    alpha = float(n @ x_minus)
    beta = float(n @ x_plus)
    scale = tol * (1.0 + abs(alpha) + abs(beta))
    if abs(alpha) <= scale and abs(beta) <= scale:
        # Both one-sided fields are already tangent; any weight works.
        return SlidingResult(vector=0.5 * (x_plus + x_minus), lam=0.5)
    if abs(alpha - beta) <= scale:
        raise NotSlidingError("equal nonzero normal components admit no tangent combination")
    lam = alpha / (alpha - beta)
    if lam < -1e-9 or lam > 1 + 1e-9:
        raise NotSlidingError(f"tangency coefficient {lam} outside [0, 1]")
    lam = min(max(lam, 0.0), 1.0)
    return SlidingResult(vector=lam * x_plus + (1.0 - lam) * x_minus, lam=lam)


# ---------------------------------------------------------------------------
# Control systems and their direction inclusions.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ControlField:
    """Control system x' = X(x, u) with a polytopic input set."""

    dim: int
    control_dim: int
    dynamics: Callable[[np.ndarray, np.ndarray], np.ndarray]
    control_set: Polytope
    affine_in_control: bool = True
    name: str = ""

    def __post_init__(self):
        if self.control_set.is_empty:
            raise ModelError("control set must be nonempty")
        if self.control_set.dim != self.control_dim:
            raise DimensionMismatchError("control set dimension mismatch")

    def value(self, x, u) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        u = geometry.as_point(u)
        return np.asarray(self.dynamics(x, u), dtype=float)


def control_inclusion(C: ControlField, x, control_set: Polytope | None = None) -> Polytope:
    """Hull of the directions reachable at x with inputs from the control set.

    Exact when the dynamics are affine in the input, because the image of a
    polytope under an affine map is the hull of its vertex images.
    """
    if not C.affine_in_control:
        raise UnsupportedError("control inclusion needs input-affine dynamics")
    U = C.control_set if control_set is None else control_set
    x = np.asarray(x, dtype=float)
    verts = np.array([C.value(x, u) for u in U.vertices])
    return Polytope(verts)


# ---------------------------------------------------------------------------
# Uniqueness-condition checks.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OneSidedLipschitzVerdict:
    violated: bool
    witness: tuple[np.ndarray, np.ndarray] | None = None
    margin: float = 0.0

    @property
    def label(self) -> str:
        return "Violated" if self.violated else "NotFalsified"


def one_sided_lipschitz_test(
    F: PiecewiseField,
    x,
    eps: float,
    L: float,
    samples: int,
    *,
    seed: int = 0,
    tol: float = 1e-12,
) -> OneSidedLipschitzVerdict:
    """Monte-Carlo falsifier for the one-sided Lipschitz growth bound.

    Draws sample pairs in the ball around x, avoiding the switching surfaces,
    and reports a witness pair on the first violation.  A NotFalsified result
    is only the absence of a counterexample, never a certificate: the bound
    is quantified over almost every pair.
    """
    if samples < 2:
        raise ValueError("samples must be at least 2")
    x = np.asarray(x, dtype=float)
    rng = np.random.default_rng(seed)
    band = 1e-9 * (1.0 + float(np.linalg.norm(x)) + eps)

    def draw() -> np.ndarray:
        for _ in range(1000):
            y = x + eps * (2.0 * rng.random(F.dim) - 1.0)
            if np.linalg.norm(y - x) <= eps and all(
                abs(s.value(y)) > band for s in F.switches
            ):
                return y
        raise RuntimeError("could not sample off the switching surfaces")

    for _ in range(samples):
        y, yp = draw(), draw()
        diff = y - yp
        lhs = float((F.value(y) - F.value(yp)) @ diff)
        rhs = L * float(diff @ diff) + tol
        if lhs > rhs:
            return OneSidedLipschitzVerdict(True, witness=(y, yp), margin=lhs - rhs)
    return OneSidedLipschitzVerdict(False)


@dataclass(frozen=True)
class TransversalityResult:
    point: np.ndarray
    holds: bool
    alpha: float
    beta: float


def transversality_test(
    F: PiecewiseField, points, tol: float = 1e-9
) -> list[TransversalityResult]:
    """Check, point by point, that at least one one-sided field pushes
    strictly into the opposite cell (the transversality hypothesis that
    grants unique solutions through codimension-one surfaces)."""
    out = []
    for p in points:
        p = np.asarray(p, dtype=float)
        active = F.active_set(p)
        if len(active) != 1:
            raise ModelError(f"point {p.tolist()} is not on exactly one surface")
        cls = classify_point(F, p)
        holds = cls.alpha > tol or cls.beta < -tol
        out.append(TransversalityResult(p, holds, cls.alpha, cls.beta))
    return out


# ---------------------------------------------------------------------------
# Declarative field configs (JSON).
# ---------------------------------------------------------------------------

_SWITCH_FORMS = {
    "affine": lambda spec, dim: SwitchingSurface.affine(spec["a"], spec.get("b", 0.0)),
    "coordinate": lambda spec, dim: SwitchingSurface.coordinate(spec["index"], dim),
}


def _constant_field(v):
    v = np.asarray(v, dtype=float)
    return lambda x: v.copy()


def _affine_field(A, b):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    return lambda x: A @ x + b


_CELL_FORMS = {
    "constant": lambda spec: _constant_field(spec["value"]),
    "affine": lambda spec: _affine_field(spec["A"], spec.get("b", np.zeros(len(spec["A"])))),
}


def _parse_sign_key(key: str, m: int) -> SignVector:
    key = key.strip()
    if len(key) != m or any(ch not in "+-" for ch in key):
        raise ModelError(f"cell key {key!r} must be {m} characters of '+'/'-'")
    return tuple(1 if ch == "+" else -1 for ch in key)


def field_from_config(config: dict | str) -> PiecewiseField:
    """Build a PiecewiseField from a declarative JSON config (dict or path).

    Schema::

        {"dim": 2,
         "switches": [{"form": "affine", "a": [1, 0], "b": 0.0}, ...],
         "cells": {"+-": {"form": "constant", "value": [0, 1]}, ...}}

    Switch forms: ``affine`` (a.x + b), ``coordinate`` (x_i).  Cell forms:
    ``constant``, ``affine`` (A x + b).  Cell keys are sign strings over the
    switches, most significant first.
    """
    if isinstance(config, str):
        with open(config, encoding="utf-8") as fh:
            config = json.load(fh)
    dim = int(config["dim"])
    switches = []
    for spec in config.get("switches", []):
        form = spec["form"]
        if form not in _SWITCH_FORMS:
            raise ModelError(f"unknown switch form {form!r}")
        switches.append(_SWITCH_FORMS[form](spec, dim))
    cells = {}
    for key, spec in config["cells"].items():
        form = spec["form"]
        if form not in _CELL_FORMS:
            raise ModelError(f"unknown cell form {form!r}")
        cells[_parse_sign_key(key, len(switches))] = _CELL_FORMS[form](spec)
    return PiecewiseField(dim, switches, cells, name=config.get("name", ""))

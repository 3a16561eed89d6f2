"""Packaged scenario catalog and batch driver.

Each scenario bundles a builder for its dynamic model, default constants, a
default candidate Lyapunov function from the nonsmooth catalog, and a short
note on the physical setup.  Builders validate through the underlying module
constructors.
"""

from __future__ import annotations

import concurrent.futures
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ModelError, UnsupportedError
from .fields import ControlField, PiecewiseField, SwitchingSurface
from .geometry import ConvexPolygon, Polytope, least_norm
from .integrate import (
    IntegratorConfig,
    Trajectory,
    _integrate_pointwise,
    consensus_flow,
    integrate_filippov,
)
from .nonsmooth import Graph


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str  # "piecewise" | "control" | "flow"
    constants: dict
    lyapunov: str | None
    note: str
    builder: Callable[[dict], object]
    runner: Callable[..., Trajectory] | None = None

    def merged(self, overrides: dict | None) -> dict:
        merged = dict(self.constants)
        if overrides:
            unknown = set(overrides) - set(self.constants)
            if unknown:
                raise ModelError(f"unknown constants for {self.name}: {sorted(unknown)}")
            merged.update(overrides)
        return merged

    def build(self, overrides: dict | None = None):
        return self.builder(self.merged(overrides))

    def simulate(self, x0, t_end: float, cfg: IntegratorConfig | None = None,
                 overrides: dict | None = None, seed: int = 0) -> Trajectory:
        cfg = cfg or IntegratorConfig()
        consts = self.merged(overrides)
        if self.kind == "piecewise":
            return integrate_filippov(self.builder(consts), x0, t_end, cfg)
        if self.runner is not None:
            return self.runner(consts, np.asarray(x0, dtype=float), t_end, cfg, seed)
        raise UnsupportedError(
            f"scenario {self.name} has no autonomous dynamics to simulate"
        )


# ---------------------------------------------------------------------------
# Piecewise scenarios.
# ---------------------------------------------------------------------------


def _brick_field(c: dict) -> PiecewiseField:
    g, theta, nu = c["g"], c["theta"], c["nu"]
    down = g * (math.sin(theta) + nu * math.cos(theta))
    up = g * (math.sin(theta) - nu * math.cos(theta))
    return PiecewiseField(
        1,
        [SwitchingSurface.coordinate(0, 1, name="v")],
        {(-1,): lambda x: np.array([down]), (1,): lambda x: np.array([up])},
        name="brick",
    )


def _oscillator_field(c: dict) -> PiecewiseField:
    return PiecewiseField(
        2,
        [SwitchingSurface.coordinate(0, 2)],
        {
            (-1,): lambda x: np.array([x[1], 1.0]),
            (1,): lambda x: np.array([x[1], -1.0]),
        },
        name="oscillator",
    )


def _oscillator_dissipative_field(c: dict) -> PiecewiseField:
    k = c["k"]
    cells = {}
    for s1 in (-1, 1):
        for s2 in (-1, 1):
            cells[(s1, s2)] = (
                lambda a, b: (lambda x: np.array([x[1], -a - k * b]))
            )(float(s1), float(s2))
    return PiecewiseField(
        2,
        [SwitchingSurface.coordinate(0, 2), SwitchingSurface.coordinate(1, 2)],
        cells,
        name="oscillator_dissipative",
    )


def move_away_square_field() -> PiecewiseField:
    """Single agent in the square [-1,1]^2 moving away from the nearest wall.

    Cells are the four triangles between the diagonals; the switching
    functions are the diagonal offsets x2 - x1 and x2 + x1.
    """
    consts = {
        (-1, 1): np.array([-1.0, 0.0]),  # right triangle
        (-1, -1): np.array([0.0, 1.0]),  # bottom
        (1, -1): np.array([1.0, 0.0]),  # left
        (1, 1): np.array([0.0, -1.0]),  # top
    }
    cells = {k: (lambda v: (lambda x: v.copy()))(v) for k, v in consts.items()}
    return PiecewiseField(
        2,
        [
            SwitchingSurface.affine([-1.0, 1.0], name="x2-x1"),
            SwitchingSurface.affine([1.0, 1.0], name="x2+x1"),
        ],
        cells,
        name="move_away_1",
    )


# ---------------------------------------------------------------------------
# Multi-agent move-away law (sphere packing).
# ---------------------------------------------------------------------------


@dataclass
class MoveAwayLaw:
    """n planar agents, each moving away from its nearest entity.

    Nearness is measured consistently with the packing radius: agent pairs
    count at half separation, polygon edges at full distance.  Entities tied
    within the band contribute jointly through the least-norm selection of
    the hull of their away directions, which keeps each tied distance term
    nondecreasing.
    """

    polygon: ConvexPolygon
    n: int
    tie_band: float = 1e-6

    def direction(self, p_flat: np.ndarray) -> np.ndarray:
        pts = p_flat.reshape(self.n, 2)
        out = np.zeros_like(pts)
        for i in range(self.n):
            dists, dirs = [], []
            for j in range(self.n):
                if j == i:
                    continue
                diff = pts[i] - pts[j]
                r = float(np.linalg.norm(diff))
                if r <= 1e-12:
                    raise ModelError("coincident agents: the law is undefined")
                dists.append(0.5 * r)
                dirs.append(diff / r)
            for e in range(self.polygon.n_edges):
                a = self.polygon.vertices[e]
                bb = self.polygon.vertices[(e + 1) % self.polygon.n_edges]
                t = bb - a
                s = float(np.clip((pts[i] - a) @ t / (t @ t), 0.0, 1.0))
                q = a + s * t
                diff = pts[i] - q
                r = float(np.linalg.norm(diff))
                if r <= 1e-12:
                    raise ModelError("agent sits on the boundary")
                dists.append(r)
                dirs.append(diff / r)
            dmin = min(dists)
            gens = [u for d, u in zip(dists, dirs) if d <= dmin + self.tie_band]
            if len(gens) == 1:
                out[i] = gens[0]
            else:
                out[i] = least_norm(Polytope(np.array(gens))).point
        return out.ravel()

    def packing_radius(self, p_flat: np.ndarray) -> float:
        from .nonsmooth import hsp

        return hsp(self.polygon, p_flat.reshape(self.n, 2))

    def min_pairwise(self, p_flat: np.ndarray) -> float:
        pts = p_flat.reshape(self.n, 2)
        best = math.inf
        for i in range(self.n):
            for j in range(i + 1, self.n):
                best = min(best, float(np.linalg.norm(pts[i] - pts[j])))
        return best

    def random_interior_points(self, seed: int, margin: float = 0.05) -> np.ndarray:
        """Seeded initial configuration, rejection-sampled to keep agents
        inside the polygon and away from exact ties."""
        rng = np.random.default_rng(seed)
        lo = self.polygon.vertices.min(axis=0)
        hi = self.polygon.vertices.max(axis=0)
        pts: list[np.ndarray] = []
        guard = 0
        while len(pts) < self.n:
            guard += 1
            if guard > 100_000:
                raise ModelError("could not place agents inside the polygon")
            cand = lo + (hi - lo) * rng.random(2)
            if not self.polygon.contains_point(cand, tol=-margin):
                continue
            if any(np.linalg.norm(cand - q) < 2 * margin for q in pts):
                continue
            pts.append(cand)
        flat = np.array(pts).ravel()
        # Nudge away from exact equidistance so the start is off the
        # discontinuity set.
        for _ in range(50):
            d = self.direction(flat)
            if np.linalg.norm(d) > 1e-9:
                return flat
            flat = flat + 1e-3 * (rng.random(flat.shape) - 0.5)
        return flat


def _move_away_runner(consts, x0, t_end, cfg, seed) -> Trajectory:
    n = int(consts["n"])
    poly = consts.get("_polygon") or ConvexPolygon.square(1.0)
    law = MoveAwayLaw(poly, n, tie_band=max(4.0 * cfg.dt_max, 1e-6))
    if x0.shape[0] != 2 * n:
        raise ModelError(f"state length {x0.shape[0]} != 2n = {2 * n}")
    return _integrate_pointwise(law.direction, x0, t_end, cfg, method="euler")


def _smq_flow_runner(consts, x0, t_end, cfg, seed) -> Trajectory:
    # Natural descent flow of -sm_Q on the unit square: the exact piecewise
    # model with sliding on the diagonals.
    return integrate_filippov(move_away_square_field(), x0, t_end, cfg)


def _consensus_runner(consts, x0, t_end, cfg, seed) -> Trajectory:
    graph = consts.get("_graph") or Graph.path(x0.shape[0])
    variant = consts.get("_variant", "sign")
    return consensus_flow(graph, variant, x0, t_end, cfg).trajectory


# ---------------------------------------------------------------------------
# Control scenarios.
# ---------------------------------------------------------------------------


def cart_input_field(x: np.ndarray) -> np.ndarray:
    return np.array([x[0] ** 2 - x[1] ** 2, 2.0 * x[0] * x[1]])


def _cart_control(c: dict) -> ControlField:
    sigma = c["sigma"]
    return ControlField(
        dim=2,
        control_dim=1,
        dynamics=lambda x, u: u[0] * cart_input_field(x),
        control_set=Polytope.interval(-sigma, sigma),
        affine_in_control=True,
        name="cart",
    )


def cart_feedback(sigma: float = 1.0) -> Callable[[float, np.ndarray], np.ndarray]:
    """Move along the input field left of the vertical axis, against it on
    the right, and keep the positive choice on the axis itself."""

    def u(t: float, x: np.ndarray) -> np.ndarray:
        if x[0] < 0:
            return np.array([sigma])
        if x[0] > 0:
            return np.array([-sigma])
        return np.array([sigma])

    return u


def _nonholonomic_control(c: dict) -> ControlField:
    return ControlField(
        dim=3,
        control_dim=2,
        dynamics=lambda x, u: np.array([u[0], u[1], x[0] * u[1] - x[1] * u[0]]),
        control_set=Polytope([[-1, -1], [1, -1], [1, 1], [-1, 1]]),
        affine_in_control=True,
        name="nonholonomic_integrator",
    )


# ---------------------------------------------------------------------------
# Registry.
# ---------------------------------------------------------------------------

SCENARIOS: dict[str, Scenario] = {}


def _register(s: Scenario):
    SCENARIOS[s.name] = s


_register(Scenario(
    name="brick",
    kind="piecewise",
    constants={"theta": math.pi / 6.0, "nu": 1.0, "g": 9.8},
    lyapunov=None,
    note="Rigid brick on an inclined plane with Coulomb friction; the state is the velocity along the ramp.",
    builder=_brick_field,
))

_register(Scenario(
    name="oscillator",
    kind="piecewise",
    constants={},
    lyapunov="energy_oscillator",
    note="Unit mass with a constant-magnitude restoring force toward the origin.",
    builder=_oscillator_field,
))

_register(Scenario(
    name="oscillator_dissipative",
    kind="piecewise",
    constants={"k": 0.75},
    lyapunov="energy_oscillator",
    note="Relay oscillator with an additional velocity relay providing dissipation.",
    builder=_oscillator_dissipative_field,
))

_register(Scenario(
    name="move_away_1",
    kind="piecewise",
    constants={},
    lyapunov="neg_smq",
    note="One robot in the unit square moving away from the nearest wall; discontinuous on the diagonals.",
    builder=lambda c: move_away_square_field(),
))

_register(Scenario(
    name="move_away_n",
    kind="flow",
    constants={"n": 5},
    lyapunov="hsp",
    note="n robots moving away from their nearest entity (other robot or wall), with agent pairs weighted at half distance.",
    builder=lambda c: MoveAwayLaw(c.get("_polygon") or ConvexPolygon.square(1.0), int(c["n"])),
    runner=_move_away_runner,
))

_register(Scenario(
    name="sphere_packing",
    kind="flow",
    constants={"n": 5},
    lyapunov="hsp",
    note="Sphere packing in a convex polygon driven by the multi-agent move-away law; the packing radius grows along runs.",
    builder=lambda c: MoveAwayLaw(c.get("_polygon") or ConvexPolygon.square(1.0), int(c["n"])),
    runner=_move_away_runner,
))

_register(Scenario(
    name="consensus",
    kind="flow",
    constants={},
    lyapunov="disagreement",
    note="Finite-time consensus on a graph via quantized descent of the disagreement.",
    builder=lambda c: c.get("_graph") or Graph.path(3),
    runner=_consensus_runner,
))

_register(Scenario(
    name="cart",
    kind="control",
    constants={"sigma": 1.0},
    lyapunov="cart_lyapunov",
    note="Cart whose input field traces circles tangent to the horizontal axis; stabilizable only through discontinuous feedback.",
    builder=_cart_control,
))

_register(Scenario(
    name="nonholonomic_integrator",
    kind="control",
    constants={},
    lyapunov=None,
    note="Canonical drift-free system that admits no continuous stabilizer; provided as a direction-set model only.",
    builder=_nonholonomic_control,
))

_register(Scenario(
    name="smq_flow",
    kind="flow",
    constants={},
    lyapunov="neg_smq",
    note="Descent flow of the negated boundary-distance on the unit square; reaches the incenter in finite time.",
    builder=lambda c: move_away_square_field(),
    runner=_smq_flow_runner,
))


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise ModelError(f"unknown scenario {name!r}") from None


# ---------------------------------------------------------------------------
# Parallel batch driver with per-run isolation.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunSpec:
    scenario: str
    x0: tuple[float, ...]
    t_end: float
    constants: dict = field(default_factory=dict)
    dt_max: float | None = None
    seed: int = 0


def _run_one(spec: RunSpec) -> Trajectory:
    cfg = IntegratorConfig() if spec.dt_max is None else IntegratorConfig(dt_max=spec.dt_max)
    scenario = get_scenario(spec.scenario)
    return scenario.simulate(np.array(spec.x0), spec.t_end, cfg,
                             overrides=dict(spec.constants), seed=spec.seed)


def run_batch(specs: list[RunSpec], max_workers: int | None = None) -> list[Trajectory]:
    """Run scenario simulations concurrently; every run is isolated in its
    own process and fully determined by its spec."""
    if len(specs) <= 1:
        return [_run_one(s) for s in specs]
    try:
        with concurrent.futures.ProcessPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(_run_one, specs))
    except (OSError, RuntimeError):  # pragma: no cover - restricted environments
        return [_run_one(s) for s in specs]

"""Trajectory generation for discontinuous dynamics.

The Filippov integrator runs fixed-step RK4 inside cells, localizes surface
hits by bisection on the step fraction, classifies the hit, and then either
crosses, slides along the surface with per-step projection, or follows the
least-norm selection of the convexified field. Sliding ends when the tangency
coefficient leaves the unit interval; a vanishing least-norm selection stops
the trajectory (an inclusion equilibrium).

Determinism: one run is single-threaded and fully determined by its inputs
and config. Batch fan-out lives in :mod:`nsds.scenarios`.
"""

from __future__ import annotations

import io
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ModelError, NotSlidingError
from .fields import (
    CROSSING,
    REPULSIVE,
    SLIDING,
    ControlField,
    PiecewiseField,
    SwitchingSurface,
    classify_point,
    default_active_tol,
    filippov_set,
    sliding_field,
)
from .geometry import OPTIMAL, least_norm, solve_lp
from .nonsmooth import Graph, NsFunction, disagreement_function

SURFACE_HIT = "SurfaceHit"
SLIDE_ENTER = "SlideEnter"
SLIDE_EXIT = "SlideExit"
CONVERGED = "Converged"
STEP_LIMIT = "StepLimit"

MODE_STOP = "STOP"


@dataclass(frozen=True)
class Event:
    time: float
    kind: str
    detail: str = ""


@dataclass(frozen=True)
class IntegratorConfig:
    dt_max: float = 1e-3
    surface_tol: float = 1e-8
    event_refine_tol: float = 1e-10
    sliding_exit_margin: float = 1e-6
    max_steps: int = 2_000_000
    rk_order: int = 4
    # Stall detection: Converged is declared once the average speed over
    # stall_window consecutive steps drops below conv_tol.
    conv_tol: float = 1e-8
    stall_window: int = 20

    def __post_init__(self):
        for name in ("dt_max", "surface_tol", "event_refine_tol",
                     "sliding_exit_margin", "conv_tol"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.rk_order != 4:
            raise ValueError("only the classical fourth-order scheme is implemented")
        if self.max_steps <= 0 or self.stall_window <= 1:
            raise ValueError("bad step limits")


def sign_string(sigma: Sequence[int]) -> str:
    return "".join("+" if s > 0 else "-" for s in sigma)


def regular_mode(sigma: Sequence[int]) -> str:
    return "R:" + sign_string(sigma)


def sliding_mode(active: Sequence[int]) -> str:
    return "S:" + ",".join(str(i) for i in active)


class Trajectory:
    """Timestamped states with per-sample mode labels and an event log."""

    def __init__(self, times, states, modes, events=()):
        self.times = np.asarray(times, dtype=float)
        self.states = np.atleast_2d(np.asarray(states, dtype=float))
        self.modes = list(modes)
        self.events = list(events)
        if self.times.ndim != 1 or self.states.shape[0] != self.times.shape[0]:
            raise ValueError("times and states disagree")
        if len(self.modes) != self.times.shape[0]:
            raise ValueError("one mode label per sample required")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    def at(self, t: float) -> np.ndarray:
        """Linear interpolation of the stored samples."""
        return np.array(
            [np.interp(t, self.times, self.states[:, k]) for k in range(self.dim)]
        )

    def first_time(self, predicate: Callable[[np.ndarray], bool]) -> float | None:
        for t, x in zip(self.times, self.states):
            if predicate(x):
                return float(t)
        return None

    # -- serialization ----------------------------------------------------

    def to_csv(self) -> str:
        cols = ["t"] + [f"x{k + 1}" for k in range(self.dim)] + ["mode", "event"]
        by_time: dict[float, list[str]] = {}
        for ev in self.events:
            by_time.setdefault(ev.time, []).append(ev.kind)
        buf = io.StringIO()
        buf.write(",".join(cols) + "\n")
        for t, x, mode in zip(self.times, self.states, self.modes):
            ev = ";".join(by_time.get(float(t), []))
            row = [repr(float(t))] + [repr(float(v)) for v in x] + [mode, ev]
            buf.write(",".join(row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Trajectory":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        header = lines[0].split(",")
        d = len(header) - 3
        times, states, modes, events = [], [], [], []
        for ln in lines[1:]:
            parts = ln.split(",")
            t = float(parts[0])
            times.append(t)
            states.append([float(v) for v in parts[1 : 1 + d]])
            modes.append(parts[1 + d])
            if parts[2 + d]:
                for kind in parts[2 + d].split(";"):
                    events.append(Event(t, kind))
        return cls(times, states, modes, events)

    def to_json_dict(self) -> dict:
        return {
            "schema": 1,
            "times": self.times.tolist(),
            "states": self.states.tolist(),
            "modes": self.modes,
            "events": [
                {"time": ev.time, "kind": ev.kind, "detail": ev.detail}
                for ev in self.events
            ],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Trajectory":
        events = [Event(e["time"], e["kind"], e.get("detail", "")) for e in d["events"]]
        return cls(d["times"], d["states"], d["modes"], events)


class _Builder:
    def __init__(self, t0: float, x0: np.ndarray, mode: str):
        self.times = [float(t0)]
        self.states = [np.array(x0, dtype=float)]
        self.modes = [mode]
        self.events: list[Event] = []

    @property
    def t(self) -> float:
        return self.times[-1]

    @property
    def x(self) -> np.ndarray:
        return self.states[-1]

    def append(self, t: float, x: np.ndarray, mode: str):
        if t <= self.times[-1]:
            t = np.nextafter(self.times[-1], math.inf)
        self.times.append(float(t))
        self.states.append(np.array(x, dtype=float))
        self.modes.append(mode)

    def event(self, kind: str, detail: str = ""):
        self.events.append(Event(self.times[-1], kind, detail))

    def stalled(self, window: int, conv_tol: float) -> bool:
        if len(self.times) <= window:
            return False
        dt = self.times[-1] - self.times[-1 - window]
        if dt <= 0:
            return False
        moved = max(
            float(np.linalg.norm(self.states[-1] - self.states[-1 - k]))
            for k in range(1, window + 1)
        )
        return moved <= conv_tol * dt

    def finish(self) -> Trajectory:
        return Trajectory(self.times, self.states, self.modes, self.events)


def rk4_step(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float) -> np.ndarray:
    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _fill_stopped(b: _Builder, t_end: float, dt: float):
    x = b.x.copy()
    t = b.t
    while t < t_end - 1e-12:
        t = min(t + dt, t_end)
        b.append(t, x, MODE_STOP)


def _first_crossing(flow, g_fns, x, h, start_vals, refine_tol, skip=()):
    """Earliest surface crossing within one step, located by bisection.

    flow(s) must return the state after advancing a fraction s of the step.
    Returns (s, index, state) for the first crossing, or None.
    """
    x_end = flow(1.0)
    best = None
    for i, g in enumerate(g_fns):
        if i in skip:
            continue
        g0, g1 = start_vals[i], g(x_end)
        if g0 == 0.0 or g0 * g1 >= 0.0:
            continue
        lo, hi = 0.0, 1.0
        x_hi = x_end
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            x_mid = flow(mid)
            gm = g(x_mid)
            if abs(gm) <= refine_tol:
                lo = hi = mid
                x_hi = x_mid
                break
            if g0 * gm > 0:
                lo = mid
            else:
                hi = mid
                x_hi = x_mid
            if hi - lo < 1e-15:
                break
        s_star = hi
        if best is None or s_star < best[0]:
            best = (s_star, i, x_hi)
    return best


class _FilippovRun:
    def __init__(self, F: PiecewiseField, x0, t_end: float, cfg: IntegratorConfig):
        self.F = F
        self.cfg = cfg
        self.t_end = float(t_end)
        x0 = np.asarray(x0, dtype=float)
        self.b = _Builder(0.0, x0, self._label(x0))
        self.steps = 0
        self.stopped = False

    # -- helpers ----------------------------------------------------------

    def _act_tol(self, x) -> float:
        return max(default_active_tol(x), self.cfg.event_refine_tol)

    def _label(self, x) -> str:
        active = self.F.active_set(x, self._act_tol(x))
        if active:
            return sliding_mode(active)
        return regular_mode(self.F.sign_vector(x, self._act_tol(x)))

    def _budget(self) -> bool:
        self.steps += 1
        if self.steps > self.cfg.max_steps:
            self.b.event(STEP_LIMIT, "max_steps exceeded")
            return False
        return True

    def _strict_sigma(self, x) -> tuple[int, ...]:
        g = self.F.switch_values(x)
        return tuple(1 if v > 0 else -1 for v in g)

    # -- phases -----------------------------------------------------------

    def run(self) -> Trajectory:
        cfg = self.cfg
        while self.b.t < self.t_end - 1e-12 and not self.stopped:
            if not self._budget():
                break
            x = self.b.x
            active = self.F.active_set(x, self._act_tol(x))
            if not active:
                self._regular_phase()
            elif len(active) == 1:
                self._surface_phase(active[0])
            else:
                self._least_norm_phase(active)
            if not self.stopped and self.b.stalled(cfg.stall_window, cfg.conv_tol):
                self.b.event(CONVERGED, "stall window")
                self.stopped = True
        if self.stopped and self.b.t < self.t_end - 1e-12:
            _fill_stopped(self.b, self.t_end, cfg.dt_max)
        return self.b.finish()

    def _regular_phase(self, forced_sigma=None, skip_surface=()):
        cfg = self.cfg
        x = self.b.x
        sigma = forced_sigma if forced_sigma is not None else self._strict_sigma(x)
        fcell = lambda y: self.F.cell_value(sigma, y)
        h = min(cfg.dt_max, self.t_end - self.b.t)
        flow = lambda s: rk4_step(fcell, x, s * h)
        g_fns = [s.value for s in self.F.switches]
        start_vals = [g(x) for g in g_fns]
        # Surfaces we are currently sitting on cannot "cross" meaningfully.
        skip = set(skip_surface) | {
            i for i, v in enumerate(start_vals) if abs(v) <= cfg.event_refine_tol
        }
        hit = _first_crossing(flow, g_fns, x, h, start_vals, cfg.event_refine_tol, skip)
        if hit is None:
            x_new = flow(1.0)
            self.b.append(self.b.t + h, x_new, regular_mode(sigma))
            tol_new = self._act_tol(x_new)
            for j, g in enumerate(g_fns):
                if j not in skip and abs(g(x_new)) <= tol_new:
                    self.b.event(SURFACE_HIT, f"surface {j}")
                    break
            return
        s_star, i, x_star = hit
        self.b.append(self.b.t + s_star * h, x_star, regular_mode(sigma))
        self.b.event(SURFACE_HIT, f"surface {i}")

    def _surface_phase(self, i: int):
        cls = classify_point(self.F, self.b.x, self._act_tol(self.b.x))
        if cls.kind == SLIDING:
            self.b.event(SLIDE_ENTER, f"surface {i}")
            self._slide(i)
        elif cls.kind == CROSSING:
            dest = 1 if cls.alpha > 0 else -1
            sigma = list(self._strict_sigma(self.b.x))
            sigma[i] = dest
            self._regular_phase(forced_sigma=tuple(sigma), skip_surface=(i,))
        elif cls.kind == REPULSIVE:
            lo = list(self._strict_sigma(self.b.x))
            hi = list(lo)
            lo[i], hi[i] = -1, 1
            branch = None
            for cand in sorted([tuple(lo), tuple(hi)]):
                if cand in self.F.cells:
                    branch = cand
                    break
            if branch is None:
                raise ModelError("repulsive surface with no declared side")
            self.b.event(SURFACE_HIT, f"repulsive branch {sign_string(branch)}")
            self._regular_phase(forced_sigma=branch, skip_surface=(i,))
        else:  # tangent: no transversal information, fall back to least-norm
            self._least_norm_phase([i])

    def _slide(self, i: int):
        cfg = self.cfg
        surface = self.F.switches[i]

        def project(y: np.ndarray) -> np.ndarray:
            for _ in range(12):
                gv = surface.value(y)
                if abs(gv) <= cfg.event_refine_tol:
                    break
                grad = surface.grad(y)
                y = y - gv * grad / float(grad @ grad)
            return y

        def slide_vec(y: np.ndarray) -> np.ndarray:
            return sliding_field(self.F, y, i).vector

        g_fns = [s.value for s in self.F.switches]
        while self.b.t < self.t_end - 1e-12 and not self.stopped:
            if not self._budget():
                return
            x = self.b.x
            try:
                res = sliding_field(self.F, x, i)
            except NotSlidingError:
                self.b.event(SLIDE_EXIT, f"surface {i}: tangency lost")
                return
            lam = res.lam
            if lam <= cfg.sliding_exit_margin or lam >= 1.0 - cfg.sliding_exit_margin:
                self.b.event(SLIDE_EXIT, f"surface {i}: lambda={lam:.3g}")
                sigma = list(self._strict_sigma(x))
                sigma[i] = -1 if lam <= cfg.sliding_exit_margin else 1
                self._regular_phase(forced_sigma=tuple(sigma), skip_surface=(i,))
                return
            h = min(cfg.dt_max, self.t_end - self.b.t)
            # Clamp the step to land just before the first predicted crossing
            # of any other surface: the sliding vector jumps there, and an RK4
            # stage straddling the jump corrupts the step.  The main loop
            # takes over once the surface becomes active.
            for j, s in enumerate(self.F.switches):
                if j == i:
                    continue
                gj = s.value(x)
                rate = float(s.grad(x) @ res.vector)
                if abs(gj) > cfg.event_refine_tol and abs(rate) > 1e-14:
                    tau = -gj / rate
                    if 0.0 < tau < 1.5 * h:
                        h = min(h, max(0.9999 * tau, tau - 1e-12))
            if h <= 1e-15:
                h = 1e-15
            try:
                flow = lambda s: project(rk4_step(slide_vec, x, s * h))
                start_vals = [g(x) for g in g_fns]
                hit = _first_crossing(
                    flow, g_fns, x, h, start_vals, cfg.event_refine_tol, skip={i}
                )
            except NotSlidingError:
                self.b.event(SLIDE_EXIT, f"surface {i}: tangency lost")
                return
            if hit is not None:
                s_star, j, x_star = hit
                self.b.append(self.b.t + s_star * h, x_star, sliding_mode([i]))
                self.b.event(SURFACE_HIT, f"surface {j} while sliding on {i}")
                return
            x_new = flow(1.0)
            self.b.append(self.b.t + h, x_new, sliding_mode([i]))
            tol_new = self._act_tol(x_new)
            for j, g in enumerate(g_fns):
                if j != i and abs(g(x_new)) <= tol_new:
                    self.b.event(SURFACE_HIT, f"surface {j} while sliding on {i}")
                    return
            if self.b.stalled(cfg.stall_window, cfg.conv_tol):
                self.b.event(CONVERGED, "sliding stall")
                self.stopped = True
                return

    def _least_norm_phase(self, active: list[int]):
        cfg = self.cfg
        x = self.b.x
        P = filippov_set(self.F, x, self._act_tol(x))
        v = least_norm(P).point
        if float(np.linalg.norm(v)) <= max(cfg.conv_tol, 1e-12):
            self.b.event(CONVERGED, "least-norm selection vanished")
            self.stopped = True
            return
        h_sub = cfg.dt_max / 10.0
        t_used = 0.0
        while t_used < cfg.dt_max and self.b.t + t_used < self.t_end - 1e-12:
            x = x + h_sub * v
            t_used += h_sub
            if len(self.F.active_set(x, self._act_tol(x))) <= 1:
                break
            P = filippov_set(self.F, x, self._act_tol(x))
            v = least_norm(P).point
            if float(np.linalg.norm(v)) <= max(cfg.conv_tol, 1e-12):
                break
        self.b.append(self.b.t + t_used, x, sliding_mode(active))


def integrate_filippov(F: PiecewiseField, x0, t_end: float,
                       cfg: IntegratorConfig | None = None) -> Trajectory:
    """Event-driven integration of the convexified dynamics of F."""
    return _FilippovRun(F, x0, t_end, cfg or IntegratorConfig()).run()


# ---------------------------------------------------------------------------
# Caratheodory integration: one-sided field values, no sliding.
# ---------------------------------------------------------------------------


def integrate_caratheodory(F: PiecewiseField, x0, t_end: float,
                           cfg: IntegratorConfig | None = None,
                           branch: tuple[int, ...] | None = None) -> Trajectory:
    """RK4 that always uses the one-sided limit from the current cell.

    Points inside the surface band keep the cell the trajectory came from
    (or the declared ``branch`` when starting on a surface); crossings are
    localized and stepped through.  No sliding is attempted, matching the
    almost-everywhere semantics of the integral form.
    """
    cfg = cfg or IntegratorConfig()
    x = np.asarray(x0, dtype=float)
    g_fns = [s.value for s in F.switches]

    def pick_cell(y, preferred=None) -> tuple[int, ...]:
        tol = default_active_tol(y)
        g = [fn(y) for fn in g_fns]
        base = [0] * len(g)
        free = []
        for i, v in enumerate(g):
            if abs(v) <= tol:
                free.append(i)
            else:
                base[i] = 1 if v > 0 else -1
        if not free:
            sigma = tuple(base)
            if sigma not in F.cells:
                raise ModelError(f"no declared cell at {y.tolist()}")
            return sigma
        if preferred is not None:
            return preferred
        for combo in sorted(itertools.product((-1, 1), repeat=len(free))):
            sigma = list(base)
            for i, s in zip(free, combo):
                sigma[i] = s
            if tuple(sigma) in F.cells:
                return tuple(sigma)
        raise ModelError(f"no declared cell adjacent to {y.tolist()}")

    sigma = pick_cell(x, branch)
    b = _Builder(0.0, x, regular_mode(sigma))
    steps = 0
    while b.t < t_end - 1e-12:
        steps += 1
        if steps > cfg.max_steps:
            b.event(STEP_LIMIT, "max_steps exceeded")
            break
        x = b.x
        fcell = lambda y: F.cell_value(sigma, y)
        h = min(cfg.dt_max, t_end - b.t)
        flow = lambda s: rk4_step(fcell, x, s * h)
        start_vals = [g(x) for g in g_fns]
        skip = {i for i, v in enumerate(start_vals) if abs(v) <= cfg.event_refine_tol}
        hit = _first_crossing(flow, g_fns, x, h, start_vals, cfg.event_refine_tol, skip)
        if hit is None:
            b.append(b.t + h, flow(1.0), regular_mode(sigma))
            continue
        s_star, i, x_star = hit
        b.append(b.t + s_star * h, x_star, regular_mode(sigma))
        b.event(SURFACE_HIT, f"surface {i}")
        new_sigma = list(sigma)
        new_sigma[i] = -sigma[i]
        if tuple(new_sigma) in F.cells:
            sigma = tuple(new_sigma)
    return b.finish()


# ---------------------------------------------------------------------------
# Pointwise discontinuous flows (least-norm / normalized / signed descent).
# ---------------------------------------------------------------------------


def _integrate_pointwise(v_fn: Callable[[np.ndarray], np.ndarray], x0, t_end: float,
                         cfg: IntegratorConfig, *, method: str = "euler",
                         stall_radius: float | None = None) -> Trajectory:
    """Fixed-step integration of a pointwise-selected flow with oscillation
    detection: once the recent window of samples stays inside a ball of the
    stall radius, the state is declared converged and frozen."""
    x = np.asarray(x0, dtype=float)
    b = _Builder(0.0, x, "R:")
    radius = stall_radius if stall_radius is not None else 5.0 * cfg.dt_max
    window = cfg.stall_window
    steps = 0
    stopped = False
    while b.t < t_end - 1e-12:
        steps += 1
        if steps > cfg.max_steps:
            b.event(STEP_LIMIT, "max_steps exceeded")
            break
        h = min(cfg.dt_max, t_end - b.t)
        x = b.x
        if method == "rk4":
            x_new = rk4_step(v_fn, x, h)
        else:
            x_new = x.copy()
            n_sub = 10
            for _ in range(n_sub):
                x_new = x_new + (h / n_sub) * v_fn(x_new)
        b.append(b.t + h, x_new, "R:")
        if float(np.linalg.norm(v_fn(x_new))) <= max(cfg.conv_tol, 1e-12):
            b.event(CONVERGED, "flow direction vanished")
            stopped = True
            break
        if len(b.times) > window:
            recent = np.array(b.states[-window:])
            center = recent.mean(axis=0)
            if float(np.max(np.linalg.norm(recent - center, axis=1))) <= radius:
                b.event(CONVERGED, "oscillation window")
                stopped = True
                break
    if stopped and b.t < t_end - 1e-12:
        _fill_stopped(b, t_end, cfg.dt_max)
    return b.finish()


def gradient_flow(f: NsFunction, variant: str, x0, t_end: float,
                  cfg: IntegratorConfig | None = None,
                  field: PiecewiseField | None = None) -> Trajectory:
    """Descent flows of f: ``natural`` follows the negated least-norm element
    of the gradient set, ``normalized`` the unit-speed gradient direction,
    ``signed`` the componentwise sign quantization.

    When ``field`` is supplied (a piecewise model of the same flow), the
    event-driven integrator is used and sliding is exact; otherwise the flow
    is evaluated pointwise with the least-norm fallback on ties.
    """
    cfg = cfg or IntegratorConfig()
    if variant not in ("natural", "normalized", "signed"):
        raise ValueError("variant must be natural, normalized, or signed")
    if field is not None:
        return integrate_filippov(field, x0, t_end, cfg)

    if variant == "natural":
        if not f.regular:
            raise ModelError("natural descent flow needs a regular function")

        def v_fn(x):
            gr = f.gradient(x)
            if not gr.exact:
                raise ModelError("natural descent flow needs exact gradients")
            return -least_norm(gr.polytope).point

        return _integrate_pointwise(v_fn, x0, t_end, cfg, method="euler")

    def grad_vec(x):
        return least_norm(f.gradient(x).polytope).point

    if variant == "normalized":

        def v_fn(x):
            g = grad_vec(x)
            nrm = float(np.linalg.norm(g))
            if nrm <= cfg.conv_tol:
                return np.zeros_like(g)
            return -g / nrm

        return _integrate_pointwise(v_fn, x0, t_end, cfg, method="rk4",
                                    stall_radius=5.0 * cfg.dt_max)

    def v_fn(x):
        g = grad_vec(x)
        out = -np.sign(g)
        out[np.abs(g) <= cfg.conv_tol] = 0.0
        return out

    return _integrate_pointwise(v_fn, x0, t_end, cfg)


# ---------------------------------------------------------------------------
# Consensus flows on graphs.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConsensusResult:
    trajectory: Trajectory
    consensus_value: float | None
    consensus_time: float | None
    final_spread: float


def sign_consensus_field(G: Graph) -> PiecewiseField:
    """Piecewise model of the componentwise sign-quantized descent of the
    disagreement: switching surfaces are the Laplacian rows, each nonempty
    sign cell carries the constant field -sigma."""
    n = G.n
    if n > 12:
        raise ModelError("explicit sign-cell enumeration is limited to 12 agents")
    L = G.laplacian()
    switches = [SwitchingSurface.affine(L[i], 0.0, name=f"(Lp){i + 1}") for i in range(n)]
    cells = {}
    for sigma in itertools.product((-1, 1), repeat=n):
        if _sign_cell_nonempty(L, sigma):
            v = -np.array(sigma, dtype=float)
            cells[sigma] = (lambda vec: (lambda p: vec.copy()))(v)
    return PiecewiseField(n, switches, cells, name="sign_consensus")


def _sign_cell_nonempty(L: np.ndarray, sigma) -> bool:
    """Strict feasibility of {p : sigma_i (L p)_i > 0}, decided by LP with
    the normalization sigma_i (L p)_i >= 1."""
    n = L.shape[0]
    # Variables: p+ (n), p- (n), slack (n).
    A = np.zeros((n, 3 * n))
    for i in range(n):
        row = sigma[i] * L[i]
        A[i, :n] = row
        A[i, n : 2 * n] = -row
        A[i, 2 * n + i] = -1.0
    b = np.ones(n)
    res = solve_lp(np.zeros(3 * n), A, b)
    return res.status == OPTIMAL


def consensus_flow(G: Graph, variant: str, p0, t_end: float,
                   cfg: IntegratorConfig | None = None,
                   spread_tol: float = 1e-3) -> ConsensusResult:
    """Run the chosen descent flow of the disagreement function and report
    the consensus value once the state spread falls below the tolerance."""
    cfg = cfg or IntegratorConfig()
    if variant not in ("smooth", "norm", "sign"):
        raise ValueError("variant must be smooth, norm, or sign")
    p0 = np.asarray(p0, dtype=float)
    if p0.shape[0] != G.n:
        raise ModelError("initial state length must match the number of agents")
    phi = disagreement_function(G)
    if variant == "smooth":
        L = G.laplacian()
        field = PiecewiseField(G.n, [], {(): lambda p: -(L @ p)}, name="laplacian_flow")
        tr = integrate_filippov(field, p0, t_end, cfg)
    elif variant == "norm":
        tr = gradient_flow(phi, "normalized", p0, t_end, cfg)
    else:
        tr = gradient_flow(phi, "signed", p0, t_end, cfg,
                           field=sign_consensus_field(G))
    spread = lambda p: float(np.max(p) - np.min(p))
    t_star = tr.first_time(lambda p: spread(p) <= spread_tol)
    value = float(np.mean(tr.final_state)) if t_star is not None else None
    return ConsensusResult(tr, value, t_star, spread(tr.final_state))


# ---------------------------------------------------------------------------
# Sample-and-hold solutions of control systems.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PartitionSchedule:
    """Increasing breakpoints s_0 < s_1 < ... < s_N of a time interval."""

    breakpoints: np.ndarray

    def __init__(self, breakpoints):
        pts = np.asarray(breakpoints, dtype=float)
        if pts.ndim != 1 or pts.shape[0] < 2 or np.any(np.diff(pts) <= 0):
            raise ValueError("breakpoints must be strictly increasing, length >= 2")
        pts = pts.copy()
        pts.flags.writeable = False
        object.__setattr__(self, "breakpoints", pts)

    @classmethod
    def uniform(cls, t0: float, t1: float, n_intervals: int) -> "PartitionSchedule":
        return cls(np.linspace(t0, t1, n_intervals + 1))

    @classmethod
    def with_diameter(cls, t0: float, t1: float, diam: float) -> "PartitionSchedule":
        n = max(1, int(math.ceil((t1 - t0) / diam)))
        return cls.uniform(t0, t1, n)

    @property
    def diameter(self) -> float:
        return float(np.max(np.diff(self.breakpoints)))


def sample_and_hold(C: ControlField, feedback: Callable[[float, np.ndarray], np.ndarray],
                    schedule: PartitionSchedule, x0,
                    cfg: IntegratorConfig | None = None) -> Trajectory:
    """Hold the feedback fixed over each partition interval and integrate the
    resulting smooth dynamics with RK4 substeps."""
    cfg = cfg or IntegratorConfig()
    x = np.asarray(x0, dtype=float)
    b = _Builder(float(schedule.breakpoints[0]), x, "R:")
    for s_prev, s_next in zip(schedule.breakpoints[:-1], schedule.breakpoints[1:]):
        u = np.asarray(feedback(float(s_prev), b.x), dtype=float)
        frozen = lambda y: C.value(y, u)
        span = float(s_next - s_prev)
        n_sub = max(1, int(math.ceil(span / cfg.dt_max)))
        h = span / n_sub
        x = b.x
        t = float(s_prev)
        for k in range(n_sub):
            x = rk4_step(frozen, x, h)
            t += h
            if k == n_sub - 1:
                t = float(s_next)
            b.append(t, x, "R:")
    return b.finish()


# ---------------------------------------------------------------------------
# Limit sets.
# ---------------------------------------------------------------------------


def limit_set_estimate(tr: Trajectory, tail_fraction: float,
                       radius: float = 1e-4, max_points: int = 400) -> np.ndarray:
    """Cluster representatives (single linkage) of the trailing samples: a
    numerical estimate of the positive limit set."""
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction must lie in (0, 1]")
    n = tr.times.shape[0]
    start = int(n * (1.0 - tail_fraction))
    tail = tr.states[start:]
    if tail.shape[0] < 10:
        raise ValueError("trajectory tail too short for a limit-set estimate")
    if tail.shape[0] > max_points:
        idx = np.linspace(0, tail.shape[0] - 1, max_points).astype(int)
        tail = tail[idx]
    m = tail.shape[0]
    parent = list(range(m))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(m):
        for j in range(i + 1, m):
            if np.linalg.norm(tail[i] - tail[j]) <= radius:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    clusters: dict[int, list[int]] = {}
    for i in range(m):
        clusters.setdefault(find(i), []).append(i)
    return np.array([tail[members].mean(axis=0) for members in clusters.values()])

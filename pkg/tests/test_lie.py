import math

import numpy as np
import pytest

from nsds.errors import EmptySetError, UnsupportedError
from nsds.fields import filippov_set
from nsds.geometry import Polytope
from nsds.lie import (
    GridSpec,
    LieInterval,
    exclude_band,
    invariance_candidate_set,
    lower_upper_lie,
    lyapunov_certify,
    monotonicity_verdict,
    set_lie_derivative,
)
from nsds.nonsmooth import ALL_SPACE, half_square_atom, make_function
from nsds.scenarios import cart_input_field, get_scenario

from helpers import maximin_lp_oracle


class TestLieInterval:
    def test_empty_conventions(self):
        e = LieInterval.empty()
        assert e.max_value() == -math.inf
        assert e.sup() == -math.inf
        assert not e.contains(0.0)
        # Nonpositivity checks pass vacuously on the empty set.
        assert e.max_value() <= 0.0

    def test_closed_and_point(self):
        iv = LieInterval.closed(2.0, -1.0)  # endpoints get ordered
        assert (iv.lo, iv.hi) == (-1.0, 2.0)
        assert iv.contains(0.0)
        assert LieInterval.point(3.0).max_value() == 3.0

    def test_unbounded_below(self):
        iv = LieInterval.unbounded_below(1.5)
        assert iv.max_value() == 1.5
        assert iv.contains(-1e9)
        assert not iv.contains(2.0)


class TestSetLieDerivative:
    def test_oscillator_on_axis_is_empty(self):
        Fset = Polytope([[0.7, -1.0], [0.7, 1.0]])
        grad = Polytope([[-1.0, 0.7], [1.0, 0.7]])
        assert set_lie_derivative(Fset, grad).is_empty

    def test_oscillator_off_axis_is_zero(self):
        iv = set_lie_derivative(Polytope([[0.7, -1.0]]), Polytope([[1.0, 0.7]]))
        assert iv.lo == pytest.approx(0.0, abs=1e-12)
        assert iv.hi == pytest.approx(0.0, abs=1e-12)

    def test_gradient_flow_of_abs_at_kink(self):
        seg = Polytope([[-1.0], [1.0]])
        iv = set_lie_derivative(seg, seg)
        # Brute force: v must satisfy zeta*v constant over zeta in [-1,1],
        # forcing v = 0 and the value 0.
        vs = np.linspace(-1, 1, 2001)
        feasible = [v for v in vs if abs((-1) * v - (1) * v) <= 1e-12]
        assert feasible == [0.0]
        assert iv.lo == pytest.approx(0.0, abs=1e-10)
        assert iv.hi == pytest.approx(0.0, abs=1e-10)

    def test_duplicated_gradient_vertices_are_harmless(self):
        Fset = Polytope([[0.5, -1.0], [0.5, 1.0]])
        grad = Polytope([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]])
        iv = set_lie_derivative(Fset, grad)
        assert (iv.lo, iv.hi) == (pytest.approx(0.5), pytest.approx(0.5))

    def test_empty_inputs_rejected(self):
        with pytest.raises(EmptySetError):
            set_lie_derivative(Polytope.empty(1), Polytope([[1.0]]))


class TestLowerUpperLie:
    def test_cart_spot_values(self):
        f = make_function("cart_lyapunov")
        for x in ([1.0, 0.0], [0.6, 0.3], [-0.4, 0.8], [0.2, -1.1]):
            x = np.array(x)
            g = cart_input_field(x)
            Fset = Polytope([-g, g])
            lower, upper = lower_upper_lie(Fset, f.proximal(x))
            s = math.hypot(x[0], x[1])
            expected = -(s ** 3) / (s + abs(x[0]))
            assert lower.hi == pytest.approx(expected, abs=1e-8)
            assert lower.lo == pytest.approx(expected, abs=1e-8)
            assert upper.hi == pytest.approx(-expected, abs=1e-8)

    def test_empty_prox_gives_empty_intervals(self):
        f = make_function("cart_lyapunov")
        lower, upper = lower_upper_lie(Polytope([[1.0, 0.0]]), f.proximal([0.0, 0.4]))
        assert lower.is_empty and upper.is_empty

    def test_vertex_enumeration_example(self):
        lower, upper = lower_upper_lie(Polytope([[-1.0, 0.0], [0.0, -1.0]]),
                                       Polytope([[1.0, 0.0]]))
        assert (lower.lo, lower.hi) == (pytest.approx(-1.0), pytest.approx(-1.0))
        assert (upper.lo, upper.hi) == (pytest.approx(0.0), pytest.approx(0.0))

    def test_endpoints_against_grid_and_external_lp(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            d = int(rng.integers(1, 4))
            prox = Polytope(2 * rng.random((int(rng.integers(1, 5)), d)) - 1)
            Fset = Polytope(2 * rng.random((int(rng.integers(1, 5)), d)) - 1)
            lower, upper = lower_upper_lie(Fset, prox)
            # Vertex-attained endpoints match the 200x200 sample grid exactly;
            # the two optimization endpoints match an external LP solver.
            zs = _sample_hull(rng, prox, 200)
            vs = _sample_hull(rng, Fset, 200)
            M = zs @ vs.T
            mins = M.min(axis=1)
            maxs = M.max(axis=1)
            assert lower.lo <= mins.min() + 1e-9
            assert abs(lower.lo - mins.min()) <= 1e-4
            assert upper.hi >= maxs.max() - 1e-9
            assert abs(upper.hi - maxs.max()) <= 1e-4
            # Sampled values stay inside the reported intervals.
            assert mins.max() <= lower.hi + 1e-9
            assert maxs.min() >= upper.lo - 1e-9
            assert lower.hi == pytest.approx(maximin_lp_oracle(prox, Fset), abs=1e-8)
            assert upper.lo == pytest.approx(-maximin_lp_oracle(prox, Fset.scaled(-1.0)),
                                             abs=1e-8)

    def test_all_space_unsupported(self):
        with pytest.raises(UnsupportedError):
            lower_upper_lie(Polytope([[1.0]]), ALL_SPACE)


def _sample_hull(rng, P: Polytope, count: int) -> np.ndarray:
    """Vertices plus random convex combinations: a hull sample grid."""
    pts = [v for v in P.vertices]
    while len(pts) < count:
        w = rng.random(P.n_vertices)
        w /= w.sum()
        pts.append(w @ P.vertices)
    return np.array(pts)


class TestGridSpec:
    def test_parse_and_points(self):
        grid = GridSpec.parse("-1:1:3,0:2:3")
        pts = list(grid.points())
        assert len(pts) == 9
        assert np.allclose(pts[0], [-1.0, 0.0])

    def test_exclusion_band(self):
        grid = GridSpec.parse("-1:1:21,-1:1:21", exclude=exclude_band(1e-6, axes=(0,)))
        pts = np.array(list(grid.points()))
        assert np.all(np.abs(pts[:, 0]) > 1e-6)
        assert pts.shape[0] == 20 * 21


class TestMonotonicity:
    def test_cart_weak_certified(self):
        f = make_function("cart_lyapunov")
        source = lambda x: Polytope([-cart_input_field(x), cart_input_field(x)])
        grid = GridSpec.parse("-1:1:21,-1:1:21")
        rep = monotonicity_verdict("weak", f, source, grid)
        assert rep.verdict == "certified"
        assert rep.checked_points == 441

    def test_oscillator_energy_strong_certified_off_axis(self):
        osc = get_scenario("oscillator").build()
        f = make_function("energy_oscillator")
        grid = GridSpec.parse("-1:1:20,-1:1:20", exclude=exclude_band(1e-9, axes=(0,)))
        rep = monotonicity_verdict("strong", f, lambda x: filippov_set(osc, x), grid)
        assert rep.verdict == "certified"

    def test_expansive_field_falsified(self):
        from nsds.fields import PiecewiseField, SwitchingSurface

        sign = PiecewiseField(
            1, [SwitchingSurface.coordinate(0, 1)],
            {(-1,): lambda x: np.array([-1.0]), (1,): lambda x: np.array([1.0])},
        )
        f = half_square_atom(0, 1)
        grid = GridSpec.parse("0.1:1:10")
        rep = monotonicity_verdict("weak", f, lambda x: filippov_set(sign, x), grid)
        assert rep.verdict == "falsified"
        assert rep.witness is not None
        assert rep.details["value"] > 0

    def test_strong_needs_asserted_hypotheses(self):
        f = make_function("cart_lyapunov")
        source = lambda x: Polytope([cart_input_field(x)])
        grid = GridSpec.parse("0.5:1:3,0:1:3")
        rep = monotonicity_verdict("strong", f, source, grid, strong_hypotheses_ok=False)
        assert rep.verdict == "inconclusive"


class TestLyapunovCertify:
    def test_oscillator_thm1(self):
        osc = get_scenario("oscillator").build()
        f = make_function("energy_oscillator")
        rep = lyapunov_certify("thm1", f, lambda x: filippov_set(osc, x),
                               [0.0, 0.0], GridSpec.parse("-1:1:21,-1:1:21"))
        assert rep.verdict == "certified"
        assert rep.checked_points == 441

    def test_dissipative_thm1p_off_axes(self):
        dis = get_scenario("oscillator_dissipative").build()
        f = make_function("energy_oscillator")
        grid = GridSpec.parse("-1:1:20,-1:1:20", exclude=exclude_band(0.01))
        rep = lyapunov_certify("thm1p", f, lambda x: filippov_set(dis, x),
                               [0.0, 0.0], grid)
        assert rep.verdict == "certified"

    def test_expansive_field_falsified(self):
        from nsds.fields import PiecewiseField, SwitchingSurface

        sign = PiecewiseField(
            1, [SwitchingSurface.coordinate(0, 1)],
            {(-1,): lambda x: np.array([-1.0]), (1,): lambda x: np.array([1.0])},
        )
        f = half_square_atom(0, 1)
        rep = lyapunov_certify("thm1", f, lambda x: filippov_set(sign, x),
                               [0.0], GridSpec.parse("-1:1:21"))
        assert rep.verdict == "falsified"
        assert rep.failed_clause == "lie-bound"

    def test_positivity_clause(self):
        f = half_square_atom(0, 2)  # vanishes on the whole x2-axis: not positive
        source = lambda x: Polytope([-x])  # contractive, so the Lie clause holds
        rep = lyapunov_certify("thm1", f, source,
                               [0.0, 0.0], GridSpec.parse("-1:1:5,-1:1:5"))
        assert rep.verdict == "falsified"
        assert rep.failed_clause == "positivity"
        assert abs(rep.witness[0]) <= 1e-12

    def test_thm3_route_uses_proximal(self):
        # Strongly shrinking smooth inclusion with a convex nonsmooth function.
        f = make_function("abs")
        source = lambda x: Polytope([[-x[0]]])
        grid = GridSpec.parse("-1:1:41")
        rep = lyapunov_certify("thm3", f, source, [0.0], grid)
        assert rep.verdict == "certified"

    def test_irregular_function_inconclusive_for_thm1(self):
        f = make_function("smq")
        rep = lyapunov_certify("thm1", f, lambda x: Polytope([[0.0, 0.0]]),
                               [0.0, 0.0], GridSpec.parse("-0.5:0.5:3,-0.5:0.5:3"))
        assert rep.verdict == "inconclusive"
        assert rep.failed_clause == "regularity-not-established"


class TestDescentFlowNegativity:
    def test_lie_values_are_negated_squared_norms(self):
        # Along the convexified descent flow of a catalog function, every Lie
        # value at a noncritical point equals the negated squared norm of the
        # least-norm gradient element.
        from nsds.geometry import contains, least_norm

        rng = np.random.default_rng(8)
        cases = [
            (make_function("abs"), lambda r: np.array([r.uniform(0.1, 1.0) * r.choice([-1, 1])])),
            (make_function("abs_sum", 2), lambda r: 2 * r.random(2) - 1),
            (make_function("energy_oscillator"), lambda r: 2 * r.random(2) - 1),
            (make_function("neg_smq"), lambda r: 0.9 * (2 * r.random(2) - 1)),
        ]
        margin = 1e-6
        for f, draw in cases:
            checked = 0
            while checked < 15:
                x = draw(rng)
                gr = f.gradient(x)
                assert gr.exact and f.regular
                if contains(gr.polytope, np.zeros(f.dim), 1e-7):
                    continue
                ln = least_norm(gr.polytope).point
                expected = -float(ln @ ln)
                interval = set_lie_derivative(gr.polytope.scaled(-1.0), gr.polytope)
                assert not interval.is_empty
                assert interval.max_value() <= -margin
                assert interval.lo == pytest.approx(expected, abs=1e-9)
                assert interval.hi == pytest.approx(expected, abs=1e-9)
                checked += 1


class TestInvarianceCandidates:
    def test_abs_descent_flow_candidate_is_origin(self):
        f = make_function("abs")
        source = lambda x: f.gradient(x).polytope.scaled(-1.0)
        cand = invariance_candidate_set(f, source, GridSpec.parse("-1:1:21"), tol=1e-8)
        assert cand.shape == (1, 1)
        assert abs(cand[0, 0]) <= 1e-12

    def test_oscillator_candidates_everywhere_nonempty_lie(self):
        osc = get_scenario("oscillator").build()
        f = make_function("energy_oscillator")
        grid = GridSpec.parse("-1:1:11,-1:1:11", exclude=exclude_band(1e-9, axes=(0,)))
        cand = invariance_candidate_set(f, lambda x: filippov_set(osc, x), grid, tol=1e-8)
        assert cand.shape[0] == 10 * 11  # all sampled points: the value is {0}

    def test_norm_consensus_flow_candidates_on_consensus_line(self):
        G = __import__("nsds").Graph.path(3)
        f = make_function("disagreement", dim=3)
        L = G.laplacian()

        def source(p):
            g = L @ p
            n = np.linalg.norm(g)
            if n <= 1e-9:
                return Polytope([np.zeros(3)])
            return Polytope([-g / n])

        grid = GridSpec.parse("0:1:3,0:1:3,0:1:3")
        cand = invariance_candidate_set(f, source, grid, tol=1e-8)
        for p in cand:
            assert np.max(p) - np.min(p) <= 1e-9
        assert cand.shape[0] == 3  # the three diagonal grid points

import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from saginpsc.algorithm import initialize
from saginpsc.oracle import (
    EmptyFeasibleError,
    enumerate_segment_choices,
    enumerate_task_assignments,
    oracle_cpu,
    oracle_power_bandwidth,
    oracle_ratio,
)
from saginpsc.physics import latency_breakdown, total_energy
from saginpsc.scenario import default_document, loads_scenario
from saginpsc.subsolvers import (
    InfeasibleBlockError,
    SolverOptions,
    _assignment_rule,
    _q,
    dual_subgradient,
    select_segments,
    solve_altitude_beamwidth,
    solve_cpu_allocation,
    solve_location,
    solve_power_bandwidth,
    solve_ratio_lp,
    solve_task_allocation,
)

from conftest import feasible_instances

OPTS = SolverOptions()


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-30)


class _StubAdapter:
    """Scripted residuals for exercising the dual loop in isolation."""

    def __init__(self, residual_fn):
        self.num_multipliers = 1
        self._fn = residual_fn
        self.calls = 0

    def minimize(self, mult):
        self.calls += 1
        return float(mult[0])

    def residuals(self, primal):
        return np.array([self._fn(primal)])

    def objective(self, primal):
        return primal


class TestDualSubgradient:
    def test_zero_residual_returns_immediately(self):
        adapter = _StubAdapter(lambda p: 0.0)
        primal, mult, steps, feasible = dual_subgradient(adapter, OPTS)
        assert feasible
        assert steps == 1
        assert mult[0] == 0.0

    def test_constant_violation_exhausts_budget_with_flag(self):
        adapter = _StubAdapter(lambda p: 1.0)
        primal, mult, steps, feasible = dual_subgradient(adapter, OPTS)
        assert not feasible
        assert steps == OPTS.dual_max_iters
        # multiplier accumulated the diminishing-step series on the
        # constant unit residual
        expected = sum(1.0 / math.sqrt(t)
                       for t in range(1, OPTS.dual_max_iters + 1))
        assert mult[0] == pytest.approx(expected, rel=1e-12)

    def test_best_feasible_iterate_is_kept(self):
        # Residual flips sign as the multiplier grows; the loop must
        # return the lowest-objective iterate among the feasible ones.
        adapter = _StubAdapter(lambda p: 1.0 if p < 0.5 else -1.0)
        primal, mult, steps, feasible = dual_subgradient(adapter, OPTS)
        assert feasible
        assert primal >= 0.5


class TestTaskAllocation:
    def test_assignment_rule_tie_break(self):
        assert _assignment_rule(0.0, 0.0) == (0, 0)
        assert _assignment_rule(-1.0, None) == (1, 0)
        assert _assignment_rule(1.0, None) == (0, 0)
        assert _assignment_rule(1.0, -1.0) == (0, 1)
        assert _assignment_rule(-1.0, -2.0) == (0, 1)
        assert _assignment_rule(-2.0, -1.0) == (1, 0)

    def test_output_is_binary_and_exclusive(self):
        for cfg, state in feasible_instances(5, start_seed=0):
            a_s, a_u, dual, feasible = solve_task_allocation(cfg, state, OPTS)
            for s, u in zip(a_s, a_u):
                assert s in (0, 1) and u in (0, 1)
                assert s + u <= 1

    def test_matches_enumeration_on_random_instances(self):
        for cfg, state in feasible_instances(10, start_seed=0):
            a_s, a_u, dual, feasible = solve_task_allocation(cfg, state, OPTS)
            try:
                e_s, e_u, e_obj = enumerate_task_assignments(cfg, state)
            except EmptyFeasibleError:
                assert not feasible
                continue
            if (a_s, a_u) != (e_s, e_u):
                cand = replace(state, allocation=replace(
                    state.allocation, task_sat=a_s, task_uav=a_u))
                assert feasible
                assert rel(total_energy(cfg, cand), e_obj) < 1e-9

    def test_never_worsens_input(self):
        for cfg, state in feasible_instances(5, start_seed=20):
            a_s, a_u, _, _ = solve_task_allocation(cfg, state, OPTS)
            cand = replace(state, allocation=replace(
                state.allocation, task_sat=a_s, task_uav=a_u))
            assert total_energy(cfg, cand) <= total_energy(cfg, state) * (1 + 1e-9)


class TestSegmentSelection:
    def test_exactly_one_active_segment_per_gt(self):
        for cfg, state in feasible_instances(5, start_seed=0):
            choice, dual, feasible = select_segments(cfg, state, OPTS)
            for k, row in enumerate(choice.alpha):
                assert sum(row) == 1
                assert row[choice.chosen_segment[k]] == 1

    def test_matches_enumeration_on_random_instances(self):
        for cfg, state in feasible_instances(10, start_seed=0):
            choice, dual, feasible = select_segments(cfg, state, OPTS)
            try:
                e_combo, e_rho, e_obj = enumerate_segment_choices(cfg, state)
            except EmptyFeasibleError:
                assert not feasible
                continue
            if choice.chosen_segment != e_combo and feasible:
                rho = tuple(choice.midpoints[k][choice.chosen_segment[k]]
                            for k in range(cfg.num_gts))
                cand = replace(state, allocation=replace(
                    state.allocation, ratio=rho))
                assert rel(total_energy(cfg, cand), e_obj) < 1e-9


class TestRatioLp:
    def test_matches_grid_reference(self):
        for cfg, state in feasible_instances(10, start_seed=0):
            segs = tuple(
                cfg.overhead_curves[k].segment_of(state.allocation.ratio[k])
                for k in range(cfg.num_gts))
            choice, _, _ = select_segments(cfg, state, OPTS)
            choice = replace(choice, chosen_segment=segs)
            ratios, clean = solve_ratio_lp(cfg, state, choice, OPTS)
            sol = oracle_ratio(cfg, state, segs)
            assert rel(sol.evaluate(ratios), sol.value) < 1e-6

    def test_uninfluenced_violated_rows_reported_not_fatal(self):
        # With no compression anywhere the latency rows have all-zero
        # coefficients; a violated budget is then someone else's problem.
        cfg = loads_scenario(default_document())
        state = initialize(cfg)
        choice, _, _ = select_segments(cfg, state, OPTS)
        ratios, clean = solve_ratio_lp(cfg, state, choice, OPTS)
        assert not clean
        lo, _ = cfg.overhead_curves[0].segment_bounds(choice.chosen_segment[0])
        assert ratios == (lo,) * cfg.num_gts

    def test_contradictory_rows_raise(self):
        cfg = loads_scenario(default_document())
        state = initialize(cfg)
        state = replace(state, allocation=replace(
            state.allocation, task_sat=(1, 0, 0, 0)))
        choice, _, _ = select_segments(cfg, state, OPTS)
        with pytest.raises(InfeasibleBlockError, match="ratio"):
            solve_ratio_lp(cfg, state, choice, OPTS)


class TestCpuAllocation:
    def test_latency_exactly_tight_for_active_gts(self):
        for cfg, state in feasible_instances(10, start_seed=0):
            if not any(state.allocation.task_uav):
                continue
            cpu = solve_cpu_allocation(cfg, state)
            cand = replace(state, allocation=replace(state.allocation, cpu=cpu))
            lat = latency_breakdown(cfg, cand).total
            for k in range(cfg.num_gts):
                if state.allocation.task_uav[k]:
                    assert rel(lat[k], cfg.latency_budget) < 1e-12
                else:
                    assert cpu[k] == 0.0

    def test_matches_grid_reference(self):
        for cfg, state in feasible_instances(6, start_seed=0):
            if not any(state.allocation.task_uav):
                continue
            cpu = solve_cpu_allocation(cfg, state)
            cand = replace(state, allocation=replace(state.allocation, cpu=cpu))
            sol = oracle_cpu(cfg, cand)
            if sol.value > 0:
                assert rel(sol.evaluate(cpu), sol.value) < 1e-4

    def test_no_latency_slack_raises(self):
        cfg = loads_scenario(default_document())
        state = initialize(cfg)
        state = replace(state, allocation=replace(
            state.allocation, task_uav=(1, 0, 0, 0),
            cpu=(cfg.uav_cpu_total, 0.0, 0.0, 0.0), ratio=(0.4, 1.0, 1.0, 1.0)))
        with pytest.raises(InfeasibleBlockError, match="no latency left"):
            solve_cpu_allocation(cfg, state)

    def test_cpu_budget_exceeded_raises(self):
        for cfg, state in feasible_instances(10, start_seed=0):
            if not any(state.allocation.task_uav):
                continue
            tiny = replace(cfg, uav_cpu_total=1e3)
            with pytest.raises(InfeasibleBlockError, match="budget"):
                solve_cpu_allocation(tiny, state)
            break


class TestPowerBandwidth:
    def test_bandwidth_budget_tight_and_latency_equalities(self):
        for cfg, state in feasible_instances(10, start_seed=0):
            bw, pw = solve_power_bandwidth(cfg, state, OPTS)
            assert rel(sum(bw), cfg.uav_bandwidth_total) < 1e-12
            assert sum(pw) <= cfg.uav_power_budget * (1 + 1e-9)
            cand = replace(state, allocation=replace(
                state.allocation, bandwidth=bw, power=pw))
            lat = latency_breakdown(cfg, cand).total
            for t in lat:
                assert rel(t, cfg.latency_budget) < 1e-9

    def test_matches_grid_reference(self):
        for cfg, state in feasible_instances(5, start_seed=0):
            bw, pw = solve_power_bandwidth(cfg, state, OPTS)
            cand = replace(state, allocation=replace(
                state.allocation, bandwidth=bw, power=pw))
            sol = oracle_power_bandwidth(cfg, cand)
            assert rel(sol.evaluate(bw), sol.value) < 1e-4

    def test_no_downlink_slack_raises(self):
        cfg = loads_scenario(default_document())
        state = initialize(cfg)  # uncompressed 64 KB x4 overruns the budget
        with pytest.raises(InfeasibleBlockError, match="no latency left"):
            solve_power_bandwidth(cfg, state, OPTS)

    def test_never_worsens_input(self):
        for cfg, state in feasible_instances(5, start_seed=30):
            bw, pw = solve_power_bandwidth(cfg, state, OPTS)
            cand = replace(state, allocation=replace(
                state.allocation, bandwidth=bw, power=pw))
            assert total_energy(cfg, cand) <= total_energy(cfg, state) * (1 + 1e-9)


class TestAltitudeBeamwidth:
    def test_altitude_identity_exact(self):
        for cfg, state in feasible_instances(10, start_seed=0):
            h, theta = solve_altitude_beamwidth(cfg, state, OPTS)
            l_max = max(state.placement.horizontal_distance(p)
                        for p in cfg.gt_positions)
            assert h == max(cfg.altitude_range[0], l_max / math.tan(theta))

    def test_within_bounds_and_never_worsens(self):
        for cfg, state in feasible_instances(5, start_seed=0):
            h, theta = solve_altitude_beamwidth(cfg, state, OPTS)
            lo, hi = cfg.beam_range_clamped
            assert lo <= theta <= hi
            assert cfg.altitude_range[0] <= h <= cfg.altitude_range[1]
            cand = replace(state, placement=replace(
                state.placement, altitude=h, half_beamwidth=theta))
            assert total_energy(cfg, cand) <= total_energy(cfg, state) * (1 + 1e-9)

    def test_no_downlink_slack_raises(self):
        cfg = loads_scenario(default_document())
        state = initialize(cfg)
        with pytest.raises(InfeasibleBlockError):
            solve_altitude_beamwidth(cfg, state, OPTS)


class TestLocation:
    def test_single_gt_sits_on_the_gt(self):
        # Every distance-dependent term improves toward the only GT.
        doc = default_document(num_gts=1, data_kib=16.0)
        doc["gt_positions"] = [[120.0, -40.0]]
        cfg = loads_scenario(doc)
        state = initialize(cfg)
        state = replace(state, placement=replace(
            state.placement, uav_xy=(80.0, 0.0), half_beamwidth=1.0),
            allocation=replace(state.allocation, task_sat=(1,), ratio=(0.3,)))
        xy, obj = solve_location(cfg, state, OPTS)
        assert xy[0] == pytest.approx(120.0, abs=1.0)
        assert xy[1] == pytest.approx(-40.0, abs=1.0)

    def test_mirrored_gts_respect_the_symmetry_axis(self):
        # With identical GTs at (+-150, 0) the objective is symmetric in
        # x and unimodal in y, so the solution sits on y = 0 and beats
        # the midpoint (which at low altitude is a local maximum: the
        # UAV prefers to hover near one of the GTs).
        doc = default_document(num_gts=2, data_kib=16.0)
        doc["gt_positions"] = [[150.0, 0.0], [-150.0, 0.0]]
        cfg = loads_scenario(doc)
        state = initialize(cfg)
        state = replace(state, placement=replace(
            state.placement, uav_xy=(10.0, 0.0), half_beamwidth=1.35),
            allocation=replace(state.allocation, task_sat=(1, 1),
                               ratio=(0.3, 0.3)))
        xy, obj = solve_location(cfg, state, OPTS)
        assert xy[1] == pytest.approx(0.0, abs=2.0)
        mid = replace(state, placement=replace(state.placement,
                                               uav_xy=(0.0, 0.0)))
        best = replace(state, placement=replace(state.placement, uav_xy=xy))
        assert total_energy(cfg, best) <= total_energy(cfg, mid)

    def test_empty_disk_raises(self):
        for cfg, state in feasible_instances(1, start_seed=0):
            starved = replace(state, allocation=replace(
                state.allocation,
                power=tuple(1e-15 for _ in state.allocation.power)))
            with pytest.raises(InfeasibleBlockError):
                solve_location(cfg, starved, OPTS)

    def test_never_worsens_input(self):
        for cfg, state in feasible_instances(5, start_seed=40):
            xy, obj = solve_location(cfg, state, OPTS)
            cand = replace(state, placement=replace(state.placement, uav_xy=xy))
            assert total_energy(cfg, cand) <= total_energy(cfg, state) * (1 + 1e-9)


@given(st.floats(min_value=1e3, max_value=1e7),
       st.floats(min_value=1e3, max_value=1e7),
       st.floats(min_value=1e3, max_value=1e7))
def test_power_curve_is_decreasing_and_convex_in_bandwidth(u, b1, b2):
    # q(b) = b (2^(u/b) - 1): needed transmit power falls as the channel
    # widens, and the tradeoff is convex.
    lo, hi = sorted((b1, b2))
    if lo == hi:
        return
    assert _q(u, lo) >= _q(u, hi) * (1 - 1e-12)
    mid = 0.5 * (lo + hi)
    chord = 0.5 * (_q(u, lo) + _q(u, hi))
    assert _q(u, mid) <= chord * (1 + 1e-9)

"""Alternating minimization over the six variable blocks, plus the
comparison schemes built on top of it.

The outer loop visits the blocks in a fixed order (compression-site
assignment, segment selection with exact ratios, CPU shares, bandwidth
and power, altitude and beamwidth, horizontal location).  A block's
candidate is accepted only when it does not increase the total energy,
or when it repairs a latency-infeasible state; blocks that cannot
produce any feasible point keep their previous values and are reported
per iteration.  This keeps the objective trace non-increasing even
while the loop is still climbing out of an infeasible starting point.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .physics import (
    Allocation,
    ModelError,
    Placement,
    SolutionState,
    check_feasibility,
    total_energy,
)
from .scenario import ScenarioConfig
from .subsolvers import (
    InfeasibleBlockError,
    SolverOptions,
    select_segments,
    solve_altitude_beamwidth,
    solve_cpu_allocation,
    solve_location,
    solve_power_bandwidth,
    solve_ratio_lp,
    solve_task_allocation,
)

__all__ = [
    "SchemeId",
    "AlgorithmOptions",
    "IterationTrace",
    "SolveResult",
    "ALL_BLOCKS",
    "initialize",
    "run_blocks",
    "run_scheme",
]

ALL_BLOCKS = ("tasks", "segments", "cpu", "power_bandwidth",
              "placement", "location")

_ACCEPT_SLACK = 1e-9


class SchemeId(str, enum.Enum):
    """Solver variants compared against each other."""

    SAGIN_PSC = "sagin_psc"
    NON_SEMANTIC = "non_semantic"
    RANDOM_COMP = "random_comp"
    FIXED_LOCATION = "fixed_location"


@dataclass(frozen=True)
class AlgorithmOptions:
    outer_tolerance: float = 1e-4
    max_outer_iters: int = 20
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if self.outer_tolerance <= 0:
            raise ValueError("outer_tolerance must be positive")
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be at least 1")


@dataclass(frozen=True)
class IterationTrace:
    """One outer iteration: objective after the block sweep, whether the
    state met every constraint, and which blocks had no feasible move."""

    iteration: int
    objective: float
    feasible: bool
    infeasible_blocks: tuple[str, ...]


@dataclass(frozen=True)
class SolveResult:
    scheme: str
    state: SolutionState
    objective: float
    feasible: bool
    converged: bool
    iterations: int
    trace: tuple[IterationTrace, ...]


def initialize(cfg: ScenarioConfig) -> SolutionState:
    """Deterministic starting point: UAV at the GT centroid, lowest
    altitude/beamwidth pair that covers every GT, equal bandwidth and
    power split, no compression anywhere."""
    n = cfg.num_gts
    cx = sum(p[0] for p in cfg.gt_positions) / n
    cy = sum(p[1] for p in cfg.gt_positions) / n
    l_max = max(math.hypot(p[0] - cx, p[1] - cy) for p in cfg.gt_positions)
    th_lo, th_hi = cfg.beam_range_clamped
    h_lo, h_hi = cfg.altitude_range
    theta = min(max(th_lo, math.atan(l_max / h_lo)), th_hi)
    altitude = min(max(h_lo, l_max / math.tan(theta)), h_hi)
    placement = Placement(uav_xy=(cx, cy), altitude=altitude,
                          half_beamwidth=theta)
    allocation = Allocation(
        bandwidth=tuple(cfg.uav_bandwidth_total / n for _ in range(n)),
        cpu=tuple(0.0 for _ in range(n)),
        power=tuple(cfg.uav_power_budget / n for _ in range(n)),
        ratio=tuple(1.0 for _ in range(n)),
        task_sat=tuple(0 for _ in range(n)),
        task_uav=tuple(0 for _ in range(n)),
    )
    return SolutionState(placement=placement, allocation=allocation)


def _latency_feasible(cfg: ScenarioConfig, state: SolutionState) -> bool:
    return "latency" not in check_feasibility(cfg, state).codes()


def _accept(cfg: ScenarioConfig, state: SolutionState, obj: float,
            candidate: SolutionState) -> tuple[SolutionState, float]:
    """Keep the candidate iff it does not worsen the energy, or it turns a
    latency-infeasible state feasible."""
    try:
        cand_obj = total_energy(cfg, candidate)
    except ModelError:
        return state, obj
    if cand_obj <= obj * (1.0 + _ACCEPT_SLACK):
        return candidate, cand_obj
    if not _latency_feasible(cfg, state) and _latency_feasible(cfg, candidate):
        return candidate, cand_obj
    return state, obj


def _sweep(cfg: ScenarioConfig, state: SolutionState, obj: float,
           blocks: tuple[str, ...], solver: SolverOptions):
    """One pass over the enabled blocks; returns the updated state,
    objective, and the names of blocks without a feasible move."""
    stuck: list[str] = []

    def attempt(name: str, build):
        nonlocal state, obj
        try:
            candidate = build()
        except InfeasibleBlockError:
            stuck.append(name)
            return
        state, obj = _accept(cfg, state, obj, candidate)

    if "tasks" in blocks:
        def build_tasks():
            a_s, a_u, _, _ = solve_task_allocation(cfg, state, solver)
            al = replace(state.allocation, task_sat=a_s, task_uav=a_u)
            return replace(state, allocation=al)
        attempt("tasks", build_tasks)

    if "segments" in blocks:
        def build_segments():
            choice, _, _ = select_segments(cfg, state, solver)
            ratios, _ = solve_ratio_lp(cfg, state, choice, solver)
            return replace(state, allocation=replace(state.allocation,
                                                     ratio=ratios))
        attempt("segments", build_segments)

    if "cpu" in blocks:
        def build_cpu():
            cpu = solve_cpu_allocation(cfg, state)
            return replace(state, allocation=replace(state.allocation, cpu=cpu))
        attempt("cpu", build_cpu)

    if "power_bandwidth" in blocks:
        def build_pb():
            bw, pw = solve_power_bandwidth(cfg, state, solver)
            return replace(state, allocation=replace(state.allocation,
                                                     bandwidth=bw, power=pw))
        attempt("power_bandwidth", build_pb)

    if "placement" in blocks:
        def build_placement():
            altitude, theta = solve_altitude_beamwidth(cfg, state, solver)
            return replace(state, placement=replace(state.placement,
                                                    altitude=altitude,
                                                    half_beamwidth=theta))
        attempt("placement", build_placement)

    if "location" in blocks:
        def build_location():
            xy, _ = solve_location(cfg, state, solver)
            return replace(state, placement=replace(state.placement, uav_xy=xy))
        attempt("location", build_location)

    return state, obj, tuple(stuck)


def run_blocks(cfg: ScenarioConfig, state: SolutionState,
               options: AlgorithmOptions | None = None,
               blocks: tuple[str, ...] = ALL_BLOCKS,
               scheme: str = SchemeId.SAGIN_PSC.value) -> SolveResult:
    """Alternate over the enabled blocks until the energy stops moving.

    Convergence needs both a relative objective change below
    ``outer_tolerance`` and either an exact fixed point or a second
    consecutive small change (which absorbs sub-tolerance oscillation
    between equally good states).
    """
    options = options or AlgorithmOptions()
    unknown = set(blocks) - set(ALL_BLOCKS)
    if unknown:
        raise ValueError(f"unknown blocks: {sorted(unknown)}")
    obj = total_energy(cfg, state)
    trace = [IterationTrace(0, obj, check_feasibility(cfg, state).feasible, ())]
    converged = False
    prev_small = False
    iterations = 0
    for it in range(1, options.max_outer_iters + 1):
        iterations = it
        prev_state, prev_obj = state, obj
        state, obj, stuck = _sweep(cfg, state, obj, blocks, options.solver)
        trace.append(IterationTrace(
            it, obj, check_feasibility(cfg, state).feasible, stuck))
        rel = abs(prev_obj - obj) / max(abs(prev_obj), 1e-30)
        small = rel < options.outer_tolerance
        if small and (state == prev_state or prev_small):
            converged = True
            break
        prev_small = small
    return SolveResult(
        scheme=scheme,
        state=state,
        objective=obj,
        feasible=check_feasibility(cfg, state).feasible,
        converged=converged,
        iterations=iterations,
        trace=tuple(trace),
    )


def _equal_cpu_for(cfg: ScenarioConfig, task_uav: tuple[int, ...]):
    m = sum(task_uav)
    if m == 0:
        return tuple(0.0 for _ in task_uav)
    share = cfg.uav_cpu_total / m
    return tuple(share if a else 0.0 for a in task_uav)


def run_scheme(cfg: ScenarioConfig, scheme: SchemeId | str,
               options: AlgorithmOptions | None = None,
               seed: int = 0) -> SolveResult:
    """Run one of the comparison schemes from the deterministic start.

    ``sagin_psc`` warm-starts the full block sweep from the converged
    no-compression solution.  ``non_semantic`` forwards everything raw
    and only tunes the communication and placement blocks.
    ``random_comp`` draws the compression site per GT uniformly from
    {none, satellite, UAV} with the given seed and never revisits it.
    ``fixed_location`` keeps the UAV pinned above the GT centroid.
    """
    options = options or AlgorithmOptions()
    scheme = SchemeId(scheme)
    start = initialize(cfg)

    if scheme is SchemeId.NON_SEMANTIC:
        return run_blocks(cfg, start, options,
                          blocks=("power_bandwidth", "placement", "location"),
                          scheme=scheme.value)

    if scheme is SchemeId.SAGIN_PSC:
        warm = run_scheme(cfg, SchemeId.NON_SEMANTIC, options)
        return run_blocks(cfg, warm.state, options, scheme=scheme.value)

    if scheme is SchemeId.RANDOM_COMP:
        rng = np.random.default_rng(seed)
        pairs = ((0, 0), (0, 1), (1, 0))
        picks = [pairs[int(i)] for i in rng.integers(0, 3, size=cfg.num_gts)]
        task_sat = tuple(p[0] for p in picks)
        task_uav = tuple(p[1] for p in picks)
        al = replace(start.allocation, task_sat=task_sat, task_uav=task_uav,
                     cpu=_equal_cpu_for(cfg, task_uav))
        state = replace(start, allocation=al)
        blocks = tuple(b for b in ALL_BLOCKS if b != "tasks")
        return run_blocks(cfg, state, options, blocks=blocks,
                          scheme=scheme.value)

    blocks = tuple(b for b in ALL_BLOCKS if b != "location")
    return run_blocks(cfg, start, options, blocks=blocks, scheme=scheme.value)

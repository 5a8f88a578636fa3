"""Pure evaluation of the channel, rate, latency, and energy model.

Everything here is a deterministic function of an immutable scenario and a
candidate solution state.  Convention used throughout: any term of the
form ``a * X / Y`` with ``a == 0`` evaluates to 0 regardless of ``Y``
(an unassigned GT needs no CPU share, so ``f_k == 0`` is legitimate
there).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .scenario import ScenarioConfig

__all__ = [
    "ModelError",
    "Placement",
    "Allocation",
    "SolutionState",
    "LatencyBreakdown",
    "EnergyBreakdown",
    "ConstraintViolation",
    "FeasibilityReport",
    "rate_sat_uav",
    "channel_gain_ug",
    "rate_uav_gt",
    "effective_fraction",
    "latency_breakdown",
    "energy_breakdown",
    "total_energy",
    "check_feasibility",
]


class ModelError(ValueError):
    """Raised when a state makes a model expression undefined."""


@dataclass(frozen=True)
class Placement:
    """UAV position: horizontal coordinates, altitude, half-beamwidth."""

    uav_xy: tuple[float, float]
    altitude: float
    half_beamwidth: float

    def horizontal_distance(self, gt_xy: tuple[float, float]) -> float:
        return math.hypot(self.uav_xy[0] - gt_xy[0], self.uav_xy[1] - gt_xy[1])

    def slant_distance(self, gt_xy: tuple[float, float]) -> float:
        return math.hypot(self.horizontal_distance(gt_xy), self.altitude)

    @property
    def coverage_radius(self) -> float:
        return self.altitude * math.tan(self.half_beamwidth)


@dataclass(frozen=True)
class Allocation:
    """Per-GT decision variables: bandwidth, CPU, power, compression ratio,
    and the binary compression-site indicators."""

    bandwidth: tuple[float, ...]
    cpu: tuple[float, ...]
    power: tuple[float, ...]
    ratio: tuple[float, ...]
    task_sat: tuple[int, ...]
    task_uav: tuple[int, ...]


@dataclass(frozen=True)
class SolutionState:
    placement: Placement
    allocation: Allocation


@dataclass(frozen=True)
class LatencyBreakdown:
    """Per-GT end-to-end latency and its shared/individual components.

    ``sat_compute``, ``sat_uav_tx``, ``sat_uav_prop`` are shared by all
    GTs; ``uav_compute`` and ``uav_gt_tx`` are per GT.  ``total`` is the
    exact componentwise sum.
    """

    sat_compute: float
    sat_uav_tx: float
    sat_uav_prop: float
    uav_compute: tuple[float, ...]
    uav_gt_tx: tuple[float, ...]
    total: tuple[float, ...]


@dataclass(frozen=True)
class EnergyBreakdown:
    sat_compute: float
    sat_uav_comm: float
    uav_compute: float
    uav_gt_comm: float
    total: float


@dataclass(frozen=True)
class ConstraintViolation:
    """One violated constraint: code, optional GT index, signed slack
    (negative slack = amount of violation, in the constraint's unit)."""

    code: str
    gt_index: int | None
    slack: float


@dataclass(frozen=True)
class FeasibilityReport:
    violations: tuple[ConstraintViolation, ...]

    @property
    def feasible(self) -> bool:
        return not self.violations

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}


def rate_sat_uav(cfg: ScenarioConfig) -> float:
    """Satellite-to-UAV downlink rate in bit/s."""
    h = math.sqrt(cfg.sat_beam_gain) * cfg.sat_wavelength / (4.0 * math.pi * cfg.sat_uav_distance)
    snr = h * h * cfg.sat_tx_power / (cfg.sat_bandwidth * cfg.noise_psd)
    return cfg.sat_bandwidth * math.log2(1.0 + snr)


def channel_gain_ug(cfg: ScenarioConfig, placement: Placement, gt_index: int) -> float:
    """LoS channel gain between the UAV and one GT (inverse-square law)."""
    d = placement.slant_distance(cfg.gt_positions[gt_index])
    return cfg.ref_channel_gain / (d * d)


def rate_uav_gt(cfg: ScenarioConfig, placement: Placement,
                b_k: float, p_k: float, gt_index: int) -> float:
    """UAV-to-GT downlink rate in bit/s for a given bandwidth/power slice.

    Main-lobe antenna gain scales as ``antenna_gain_const / Theta^2``;
    sidelobes are ignored.
    """
    if p_k == 0.0:
        return 0.0
    if b_k <= 0.0:
        raise ModelError("rate undefined: zero bandwidth with positive power")
    g_k = channel_gain_ug(cfg, placement, gt_index)
    theta = placement.half_beamwidth
    snr = cfg.antenna_gain_const * g_k * p_k / (theta * theta * b_k * cfg.noise_psd)
    return b_k * math.log2(1.0 + snr)


def effective_fraction(a_sat: int, a_uav: int, rho: float) -> float:
    """Fraction of the original data the UAV must deliver to the GT:
    ``rho`` if the data was compressed anywhere upstream, else 1."""
    a = a_sat + a_uav
    return a * rho + (1 - a)


def latency_breakdown(cfg: ScenarioConfig, state: SolutionState) -> LatencyBreakdown:
    al = state.allocation
    kappa = cfg.cycles_per_overhead
    r_su = rate_sat_uav(cfg)

    t_sat = kappa * sum(
        a * cfg.overhead_curves[k].evaluate(al.ratio[k])
        for k, a in enumerate(al.task_sat) if a
    ) / cfg.sat_cpu
    t_tx = sum(
        (a * al.ratio[k] + (1 - a)) * cfg.data_bits[k]
        for k, a in enumerate(al.task_sat)
    ) / r_su
    t_prop = cfg.sat_uav_distance / cfg.lightspeed

    t_uav = []
    t_ug = []
    totals = []
    for k in range(cfg.num_gts):
        if al.task_uav[k]:
            if al.cpu[k] <= 0.0:
                raise ModelError(f"GT {k}: UAV compression assigned with zero CPU share")
            tu = kappa * cfg.overhead_curves[k].evaluate(al.ratio[k]) / al.cpu[k]
        else:
            tu = 0.0
        bits = cfg.data_bits[k] * effective_fraction(al.task_sat[k], al.task_uav[k], al.ratio[k])
        r_k = rate_uav_gt(cfg, state.placement, al.bandwidth[k], al.power[k], k)
        if r_k <= 0.0 and bits > 0.0:
            raise ModelError(f"GT {k}: zero UAV-GT rate with positive data")
        tg = bits / r_k
        t_uav.append(tu)
        t_ug.append(tg)
        totals.append(t_sat + t_tx + t_prop + tu + tg)
    return LatencyBreakdown(
        sat_compute=t_sat,
        sat_uav_tx=t_tx,
        sat_uav_prop=t_prop,
        uav_compute=tuple(t_uav),
        uav_gt_tx=tuple(t_ug),
        total=tuple(totals),
    )


def energy_breakdown(cfg: ScenarioConfig, state: SolutionState) -> EnergyBreakdown:
    lat = latency_breakdown(cfg, state)
    al = state.allocation
    tau = cfg.comp_energy_coeff
    e_sat = tau * lat.sat_compute * cfg.sat_cpu ** 3
    e_su = lat.sat_uav_tx * cfg.sat_tx_power
    e_uav = tau * sum(t * f ** 3 for t, f in zip(lat.uav_compute, al.cpu))
    e_ug = sum(t * p for t, p in zip(lat.uav_gt_tx, al.power))
    return EnergyBreakdown(
        sat_compute=e_sat,
        sat_uav_comm=e_su,
        uav_compute=e_uav,
        uav_gt_comm=e_ug,
        total=e_sat + e_su + e_uav + e_ug,
    )


def total_energy(cfg: ScenarioConfig, state: SolutionState) -> float:
    return energy_breakdown(cfg, state).total


def check_feasibility(cfg: ScenarioConfig, state: SolutionState,
                      rel_tol: float = 1e-9) -> FeasibilityReport:
    """Evaluate every constraint of the joint problem; violations are data.

    Slacks are signed: nonnegative slack means satisfied.  Several blocks
    make their constraint tight by construction (latency equalities,
    coverage at the beamwidth edge), so a slack is only flagged when it is
    negative beyond ``rel_tol`` times the constraint's own scale.
    Constraint codes: latency, power_budget, coverage, altitude,
    bandwidth_budget, cpu_budget, ratio_bounds, task_binary,
    task_exclusive, beamwidth, nonnegativity.
    """
    al = state.allocation
    pl = state.placement
    out: list[ConstraintViolation] = []

    def check(cond_slack: float, code: str, gt: int | None = None,
              scale: float = 1.0):
        if cond_slack < -rel_tol * max(abs(scale), 1e-30):
            out.append(ConstraintViolation(code=code, gt_index=gt, slack=cond_slack))

    for k in range(cfg.num_gts):
        for name, v in (("bandwidth", al.bandwidth[k]), ("cpu", al.cpu[k]),
                        ("power", al.power[k])):
            check(v, f"nonnegativity:{name}", k)
        a_s, a_u = al.task_sat[k], al.task_uav[k]
        if a_s not in (0, 1) or a_u not in (0, 1):
            out.append(ConstraintViolation("task_binary", k, -1.0))
        check(1 - (a_s + a_u), "task_exclusive", k)
        lo = cfg.overhead_curves[k].ratio_min
        check(al.ratio[k] - lo, "ratio_bounds", k)
        check(1.0 - al.ratio[k], "ratio_bounds", k)
        check(pl.coverage_radius - pl.horizontal_distance(cfg.gt_positions[k]),
              "coverage", k, scale=pl.coverage_radius)

    check(cfg.uav_power_budget - sum(al.power), "power_budget",
          scale=cfg.uav_power_budget)
    check(cfg.uav_bandwidth_total - sum(al.bandwidth), "bandwidth_budget",
          scale=cfg.uav_bandwidth_total)
    check(cfg.uav_cpu_total - sum(al.cpu), "cpu_budget", scale=cfg.uav_cpu_total)
    check(pl.altitude - cfg.altitude_range[0], "altitude",
          scale=cfg.altitude_range[0])
    check(cfg.altitude_range[1] - pl.altitude, "altitude",
          scale=cfg.altitude_range[1])
    th_lo, th_hi = cfg.beam_range_clamped
    check(pl.half_beamwidth - th_lo, "beamwidth")
    check(th_hi - pl.half_beamwidth, "beamwidth")

    try:
        lat = latency_breakdown(cfg, state)
    except ModelError:
        for k in range(cfg.num_gts):
            out.append(ConstraintViolation("latency", k, -math.inf))
    else:
        for k, t in enumerate(lat.total):
            check(cfg.latency_budget - t, "latency", k, scale=cfg.latency_budget)

    return FeasibilityReport(violations=tuple(out))

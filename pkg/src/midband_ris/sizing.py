"""How many RIS elements are needed: closed-form law, simulated crossover, area."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import SPEED_OF_LIGHT
from .errors import ContractError, DomainError
from .mcengine import (
    ELEMENT_BLOCK,
    channel_amplitudes,
    coverage_probability,
    element_terms,
    link_budget_db,
    snr_linear,
    spectral_efficiency,
    trial_chunks,
)

KAPPA_RANGE = (40.0, 45.0)


@dataclass(frozen=True)
class SizingQuery:
    f_c: float
    d_3d: float
    kappa: float = 42.5
    allow_any_kappa: bool = False

    def __post_init__(self):
        if not (self.f_c > 0 and self.d_3d > 0):
            raise DomainError("carrier and distance must be positive")
        lo, hi = KAPPA_RANGE
        if not self.allow_any_kappa and not lo < self.kappa < hi:
            raise DomainError(f"kappa {self.kappa} outside ({lo}, {hi})")


def required_elements_bound(q):
    """Real-valued lower bound kappa * f_c[GHz] * d_3d**(1/4)."""
    return q.kappa * q.f_c * q.d_3d**0.25


def required_elements_formula(q):
    return math.ceil(required_elements_bound(q))


def panel_area(panel, spacing_wavelengths=0.5):
    """Physical panel area in m^2 for square elements on a regular grid."""
    if not spacing_wavelengths > 0:
        raise DomainError("element spacing must be > 0")
    pitch = spacing_wavelengths * SPEED_OF_LIGHT / (panel.f_c * 1e9)
    return panel.n_elements * pitch**2


def metric_name(scenario, metric):
    if metric is None:
        return "coverage" if scenario.qos_r is not None else "mean_se"
    if metric not in ("mean_se", "coverage"):
        raise ContractError(f"unknown metric {metric!r}")
    if metric == "coverage" and scenario.qos_r is None:
        raise ContractError("coverage metric needs a scenario QoS threshold")
    return metric


def _reduce(se, metric, qos_r):
    if metric == "mean_se":
        return float(np.mean(se))
    return float(coverage_probability(se, qos_r))


def mode_metric(scenario, mode, n_elements=None, trials=10_000, seed=None, metric=None):
    """Mean SE or coverage of one mode, optionally at another element count."""
    metric = metric_name(scenario, metric)
    grid = None if n_elements is None else (int(n_elements),)
    amps = channel_amplitudes(scenario, trials, seed, n_grid=grid)
    se = spectral_efficiency(snr_linear(amps.magnitude(mode), scenario.radio))
    return _reduce(se, metric, scenario.qos_r)


def benchmark_target(scenario, trials=10_000, seed=None, metric=None):
    """Static-only (point-to-point) metric that RIS-only has to reach."""
    metric = metric_name(scenario, metric)
    amps = channel_amplitudes(scenario, trials, seed, n_grid=())
    se = spectral_efficiency(snr_linear(amps.static, scenario.radio))
    return _reduce(se, metric, scenario.qos_r)


def ris_only_profile(scenario, n_max, trials=10_000, seed=None, metric=None, target=None):
    """RIS-only metric for every element count ``1..n_max`` on common draws.

    Element blocks are processed in order with per-trial running sums, so the
    cost grows with ``n_max`` only. With ``target`` set the scan stops after
    the first block in which the metric reaches it; the returned array is
    then shorter than ``n_max``.
    """
    metric = metric_name(scenario, metric)
    seed = scenario.seed if seed is None else int(seed)
    if scenario.ris is None:
        raise ContractError("scenario has no RIS")
    if trials < 1 or n_max < 1:
        raise ContractError("need at least one trial and one element")
    budget = 10.0 ** (link_budget_db(scenario.radio) / 10.0)
    chunks = trial_chunks(scenario, int(trials), seed)
    scales = [ch.reflected_scale(scenario)[: ch.valid] for ch in chunks]
    running = [np.zeros(ch.valid) for ch in chunks]
    profile = []
    for block in range(-(-int(n_max) // ELEMENT_BLOCK)):
        width = min(ELEMENT_BLOCK, int(n_max) - block * ELEMENT_BLOCK)
        acc = np.zeros(width)
        for ch, scale, run in zip(chunks, scales, running):
            terms = element_terms(scenario, seed, ch.index, block, ch.large_scale)[: ch.valid, :width]
            cum = np.cumsum(terms, axis=1)
            cum += run[:, None]
            run[:] = cum[:, -1]
            se = np.log2(1.0 + budget * (scale[:, None] * cum) ** 2)
            if metric == "mean_se":
                acc += se.sum(axis=0)
            else:
                acc += (se >= scenario.qos_r).sum(axis=0)
        profile.append(acc / trials)
        if target is not None and profile[-1].max() >= target:
            break
    return np.concatenate(profile)


def required_elements_simulated(
    scenario, metric_target, n_bounds=(1, 16_384), trials=10_000, seed=None, metric=None
):
    """Smallest N in ``n_bounds`` whose RIS-only metric reaches ``metric_target``.

    Every element count is evaluated on the same draws (the fades of a smaller
    panel are a prefix of those of a larger one), so this is the first
    crossing of the sampled metric curve, found in one pass. Returns ``None``
    when no count up to the upper bound reaches the target.
    """
    lo, hi = n_bounds
    if int(lo) != lo or int(hi) != hi or not 1 <= lo <= hi:
        raise ContractError(f"invalid element bracket {n_bounds!r}")
    lo, hi = int(lo), int(hi)
    curve = ris_only_profile(scenario, hi, trials, seed, metric, target=metric_target)
    hits = np.flatnonzero(curve[lo - 1 :] >= metric_target)
    return int(lo + hits[0]) if hits.size else None

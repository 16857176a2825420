"""Link metrics and the seeded Monte-Carlo trial engine.

Random streams are keyed by ``(master_seed, stream, ...)`` through
:class:`numpy.random.SeedSequence`. Trials are grouped into fixed-size chunks
and element fades into fixed-size blocks, so a trial's draws depend only on
the master seed and the trial index, never on the total trial count, the
element count queried or the order chunks are processed in. Element fades
for ``N`` elements are a prefix of those for any larger ``N``, which keeps
sweeps over ``N`` on common random numbers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import (
    LinkGeometry,
    LosMode,
    link_amplitude,
    los_probability,
    path_loss_db,
    sample_los,
    sample_fading_magnitude,
    sample_shadow_fading_db,
    sample_small_scale,
)
from .errors import ContractError
from .ris import ALL_MODES, Mode

TRIAL_CHUNK = 1024
ELEMENT_BLOCK = 512

STREAM_USERS = 0
STREAM_LARGE_SCALE = 1
STREAM_STATIC_FADING = 2
STREAM_ELEMENT_FADING = 3

LINK_STATIC, LINK_TX_RIS, LINK_RIS_RX = 0, 1, 2


@dataclass(frozen=True)
class RadioParams:
    p_tx_dbm: float = 30.0
    g_t_dbi: float = 10.0
    g_r_dbi: float = 3.0
    noise_psd_dbm_hz: float = -174.0
    bandwidth_hz: float = 400e6

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise ContractError(f"bandwidth must be > 0 Hz, got {self.bandwidth_hz}")


@dataclass
class MetricSamples:
    """Per-mode SE samples drawn on common random numbers."""

    se: dict
    seed: int
    trials: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        lengths = {len(v) for v in self.se.values()}
        if len(lengths) > 1:
            raise ContractError("per-mode sample sequences differ in length")

    def __getitem__(self, mode):
        return self.se[Mode(mode)]

    def mean(self, mode):
        return float(np.mean(self.se[Mode(mode)]))


def stream(seed, *key):
    """Independent generator for the counter ``key`` under ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=key)))


def noise_power_dbm(params):
    return params.noise_psd_dbm_hz + 10.0 * math.log10(params.bandwidth_hz)


def link_budget_db(params):
    """Transmit power plus antenna gains over noise, before the channel gain."""
    return params.p_tx_dbm + params.g_t_dbi + params.g_r_dbi - noise_power_dbm(params)


def snr_linear(h, params):
    gain = np.abs(np.asarray(h)) ** 2
    snr = 10.0 ** (link_budget_db(params) / 10.0) * gain
    return snr.item() if snr.ndim == 0 else snr


def spectral_efficiency(snr):
    snr = np.asarray(snr, dtype=float)
    if np.any(snr < 0) or np.any(np.isnan(snr)):
        raise ContractError("SNR must be non-negative")
    se = np.log2(1.0 + snr)
    return se.item() if se.ndim == 0 else se


def empirical_cdf(samples):
    """Right-continuous empirical CDF as ``(values, probabilities)`` arrays."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise ContractError("empirical CDF of an empty sample")
    values = np.unique(x)
    probs = np.searchsorted(x, values, side="right") / x.size
    return values, probs


def cdf_left_limit(samples, r):
    """P(SE < r), the CDF just before ``r``."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise ContractError("CDF of an empty sample")
    return np.searchsorted(x, r, side="left") / x.size


def coverage_probability(samples, r_min):
    """Fraction of samples with SE >= ``r_min``; vectorised over ``r_min``."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise ContractError("coverage of an empty sample")
    r = np.asarray(r_min, dtype=float)
    if np.any(r < 0):
        raise ContractError("QoS threshold must be >= 0")
    cov = 1.0 - np.searchsorted(x, r, side="left") / x.size
    return cov.item() if cov.ndim == 0 else cov


def e2e_los_probability(d_tx_ris, d_ris_rx):
    return los_probability(d_tx_ris) * los_probability(d_ris_rx)


@dataclass
class LargeScale:
    """LoS flags and deterministic amplitudes of the three links for a batch."""

    los_static: np.ndarray
    amp_static: np.ndarray
    los_tx_ris: np.ndarray | None = None
    amp_tx_ris: np.ndarray | None = None
    los_ris_rx: np.ndarray | None = None
    amp_ris_rx: np.ndarray | None = None

    def take(self, index):
        return LargeScale(*(None if v is None else v[index] for v in vars(self).values()))


def _sample_hop(mode, geom, seed, link, block, size, params, median=False):
    d_2d = np.broadcast_to(geom.d_2d, size)
    if median:
        # typical location: no shadowing, the more likely LoS state
        mode = LosMode(mode)
        if mode is LosMode.PROBABILISTIC:
            los = np.asarray(los_probability(d_2d)) >= 0.5
        else:
            los = np.full(size, mode is LosMode.FORCED_LOS)
        amp = link_amplitude(path_loss_db(geom, los, params), 0.0)
        return los, np.broadcast_to(amp, size).copy()
    rng = stream(seed, STREAM_LARGE_SCALE, link, block)
    los = np.asarray(sample_los(mode, d_2d, rng))
    shadow = sample_shadow_fading_db(los, rng, params)
    return los, link_amplitude(path_loss_db(geom, los, params), shadow)


def sample_large_scale(scenario, seed, block, receivers, median=False):
    """Large-scale state for ``len(receivers)`` units drawn from block ``block``.

    With ``median=True`` nothing is drawn: shadowing is 0 dB and each
    probabilistic link takes its more likely LoS state.
    """
    params = scenario.channel
    size = (len(receivers),)
    hop = lambda mode, geom, link: _sample_hop(mode, geom, seed, link, block, size, params, median)
    geom = LinkGeometry.between(scenario.tx, receivers, scenario.f_c)
    out = LargeScale(*hop(scenario.los_static, geom, LINK_STATIC))
    if scenario.ris is not None:
        center = scenario.ris.center
        geom = LinkGeometry.between(scenario.tx, center, scenario.f_c)
        out.los_tx_ris, out.amp_tx_ris = hop(scenario.los_tx_ris, geom, LINK_TX_RIS)
        geom = LinkGeometry.between(center, receivers, scenario.f_c)
        out.los_ris_rx, out.amp_ris_rx = hop(scenario.los_ris_rx, geom, LINK_RIS_RX)
    return out


def element_fading(scenario, seed, chunk, hop, block, los):
    """Per-element fades of one hop, shape ``(TRIAL_CHUNK, ELEMENT_BLOCK)``.

    The specular phase is left at zero: under optimal phase shifts only the
    per-element magnitudes matter, and the magnitude law does not depend on it.
    """
    rng = stream(seed, STREAM_ELEMENT_FADING, hop, chunk, block)
    return sample_small_scale(
        np.asarray(los)[:, None],
        scenario.channel.k_factor_db,
        rng,
        size=(TRIAL_CHUNK, ELEMENT_BLOCK),
        random_phase=False,
    )


def element_terms(scenario, seed, chunk, block, ls):
    """``|s_sr,n| * |s_rd,n|`` for one element block, equal to the magnitudes
    of :func:`element_fading` on both hops."""
    k_db = scenario.channel.k_factor_db
    size = (TRIAL_CHUNK, ELEMENT_BLOCK)
    terms = sample_fading_magnitude(
        ls.los_tx_ris[:, None], k_db, stream(seed, STREAM_ELEMENT_FADING, 0, chunk, block), size
    )
    terms *= sample_fading_magnitude(
        ls.los_ris_rx[:, None], k_db, stream(seed, STREAM_ELEMENT_FADING, 1, chunk, block), size
    )
    return terms


@dataclass
class ChannelAmplitudes:
    """Per-trial |h| ingredients under optimal phases.

    ``reflected[:, g]`` is the co-phased RIS sum for ``n_grid[g]`` elements;
    the magnitude of each mode follows from the triangle equality.
    """

    static: np.ndarray
    reflected: np.ndarray
    n_grid: tuple
    large_scale: LargeScale | None = None

    def magnitude(self, mode, column=0):
        mode = Mode(mode)
        if mode is Mode.STATIC_ONLY:
            return self.static
        if self.reflected.shape[1] == 0:
            raise ContractError(f"mode {mode.value} needs an RIS")
        if mode is Mode.RIS_ONLY:
            return self.reflected[:, column]
        return self.static + self.reflected[:, column]


def _concat(parts):
    return LargeScale(
        *(
            None if getattr(parts[0], k) is None else np.concatenate([getattr(p, k) for p in parts])
            for k in vars(parts[0])
        )
    )


def _location_large_scale(scenario, seed, receivers, median):
    n_loc = len(receivers)
    parts = []
    for block in range(-(-n_loc // TRIAL_CHUNK)):
        idx = np.arange(block * TRIAL_CHUNK, (block + 1) * TRIAL_CHUNK) % n_loc
        parts.append(sample_large_scale(scenario, seed, block, receivers[idx], median))
    return _concat(parts).take(np.arange(n_loc))


@dataclass
class TrialChunk:
    """Large-scale state and static amplitude of one chunk of trials."""

    index: int
    valid: int  # rows that belong to real trials
    large_scale: LargeScale
    static: np.ndarray

    @property
    def rows(self):
        start = self.index * TRIAL_CHUNK
        return slice(start, start + self.valid)

    def reflected_scale(self, scenario):
        amp = scenario.ris.element_amplitude**2
        return amp * self.large_scale.amp_tx_ris * self.large_scale.amp_ris_rx


def trial_chunks(scenario, trials, seed):
    """Chunked large-scale and static-link draws for ``trials`` trials."""
    if trials < 0:
        raise ContractError("trial count must be >= 0")
    receivers = scenario.receiver_positions(seed)
    n_loc = len(receivers)
    policy = scenario.large_scale
    if policy != "per_trial" and trials:
        location_state = _location_large_scale(scenario, seed, receivers, policy == "median")
    k_db = scenario.channel.k_factor_db
    chunks = []
    for chunk in range(-(-trials // TRIAL_CHUNK)):
        loc = np.arange(chunk * TRIAL_CHUNK, (chunk + 1) * TRIAL_CHUNK) % n_loc
        if policy == "per_trial":
            ls = sample_large_scale(scenario, seed, chunk, receivers[loc])
        else:
            ls = location_state.take(loc)
        fading = sample_small_scale(ls.los_static, k_db, stream(seed, STREAM_STATIC_FADING, chunk))
        valid = min(TRIAL_CHUNK, trials - chunk * TRIAL_CHUNK)
        chunks.append(TrialChunk(chunk, valid, ls, ls.amp_static * np.abs(fading)))
    return chunks


def channel_amplitudes(scenario, trials=None, seed=None, n_grid=None, keep_large_scale=False):
    """Sample static and co-phased reflected amplitudes for every trial.

    ``n_grid`` lists element counts to evaluate on common random numbers
    (default: the panel's own count).
    """
    trials = scenario.trials if trials is None else int(trials)
    seed = scenario.seed if seed is None else int(seed)
    ris = scenario.ris
    if ris is None:
        n_grid = ()
    elif n_grid is None:
        n_grid = (ris.n_elements,)
    n_grid = tuple(int(n) for n in n_grid)
    if any(n < 1 for n in n_grid):
        raise ContractError("element counts must be >= 1")

    chunks = trial_chunks(scenario, trials, seed)
    static = np.empty(trials)
    reflected = np.empty((trials, len(n_grid)))
    n_blocks = -(-max(n_grid, default=0) // ELEMENT_BLOCK)
    for ch in chunks:
        static[ch.rows] = ch.static[: ch.valid]
        if not n_grid:
            continue
        sums = np.empty((TRIAL_CHUNK, len(n_grid)))
        running = np.zeros(TRIAL_CHUNK)
        for block in range(n_blocks):
            terms = element_terms(scenario, seed, ch.index, block, ch.large_scale)
            lo = block * ELEMENT_BLOCK
            for g, n in enumerate(n_grid):
                if lo < n <= lo + ELEMENT_BLOCK:
                    sums[:, g] = running + terms[:, : n - lo].sum(axis=1)
            running += terms.sum(axis=1)
        reflected[ch.rows] = (ch.reflected_scale(scenario)[:, None] * sums)[: ch.valid]

    large_scale = None
    if keep_large_scale and chunks:
        large_scale = _concat([ch.large_scale.take(slice(0, ch.valid)) for ch in chunks])
    return ChannelAmplitudes(static, reflected, n_grid, large_scale)


def modes_for(scenario):
    modes = tuple(Mode(m) for m in scenario.modes)
    if scenario.ris is None:
        modes = tuple(m for m in modes if m is Mode.STATIC_ONLY)
    return modes


def run_trials(scenario, trials=None, master_seed=None):
    """Spectral-efficiency samples of every configured mode on common draws."""
    trials = scenario.trials if trials is None else int(trials)
    seed = scenario.seed if master_seed is None else int(master_seed)
    amps = channel_amplitudes(scenario, trials, seed)
    se = {}
    for mode in modes_for(scenario):
        se[mode] = spectral_efficiency(snr_linear(amps.magnitude(mode), scenario.radio))
    meta = {"p_tx_dbm": scenario.radio.p_tx_dbm}
    if scenario.ris is not None:
        meta["n_elements"] = scenario.ris.n_elements
    return MetricSamples(se, seed, trials, meta)


__all__ = [
    "ALL_MODES",
    "ChannelAmplitudes",
    "MetricSamples",
    "TrialChunk",
    "RadioParams",
    "cdf_left_limit",
    "channel_amplitudes",
    "element_terms",
    "trial_chunks",
    "coverage_probability",
    "e2e_los_probability",
    "empirical_cdf",
    "link_budget_db",
    "noise_power_dbm",
    "run_trials",
    "snr_linear",
    "spectral_efficiency",
]

"""UMi street-canyon propagation: LoS probability, path loss, shadowing and
small-scale fading.

All samplers take an explicit ``numpy.random.Generator`` and are vectorised:
pass arrays and you get arrays back, pass scalars and you get scalars.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, UnsupportedRegimeError

SPEED_OF_LIGHT = 299_792_458.0  # m/s
EFFECTIVE_ENV_HEIGHT = 1.0  # m
ALWAYS_LOS_DISTANCE = 18.0  # m
CARRIER_RANGE_GHZ = (7.0, 24.0)


@dataclass(frozen=True)
class Node3D:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise DomainError(f"non-finite coordinate in {self!r}")
        if self.z < 0:
            raise DomainError(f"height must be >= 0, got {self.z}")

    def as_array(self):
        return np.array([self.x, self.y, self.z], dtype=float)

    def horizontal_distance(self, other):
        return math.hypot(self.x - other.x, self.y - other.y)

    def distance(self, other):
        return math.dist((self.x, self.y, self.z), (other.x, other.y, other.z))


class LosMode(str, Enum):
    FORCED_LOS = "forced-los"
    FORCED_NLOS = "forced-nlos"
    PROBABILISTIC = "probabilistic"


@dataclass(frozen=True)
class LosState:
    mode: LosMode
    sampled: bool

    def __post_init__(self):
        if self.mode is LosMode.FORCED_LOS and not self.sampled:
            raise DomainError("forced-los state cannot be nLoS")
        if self.mode is LosMode.FORCED_NLOS and self.sampled:
            raise DomainError("forced-nlos state cannot be LoS")


@dataclass(frozen=True)
class ChannelParams:
    """Tunable constants of the propagation model.

    Defaults are the UMi street-canyon values; the path-loss coefficients are
    exposed so alternative calibrations can be tried without code changes.
    """

    k_factor_db: float = 9.0
    shadow_sigma_los_db: float = 4.0
    shadow_sigma_nlos_db: float = 7.82
    los_intercept_db: float = 32.4
    los_distance_slope: float = 21.0
    nlos_intercept_db: float = 13.54
    nlos_distance_slope: float = 39.08
    frequency_slope: float = 20.0
    nlos_height_coeff: float = 0.6
    allow_beyond_breakpoint: bool = False

    def __post_init__(self):
        if self.shadow_sigma_los_db < 0 or self.shadow_sigma_nlos_db < 0:
            raise DomainError("shadow-fading sigma must be >= 0")
        if math.isnan(self.k_factor_db):
            raise DomainError("K-factor must not be NaN")


DEFAULT_CHANNEL = ChannelParams()


@dataclass(frozen=True)
class LinkGeometry:
    """Distances and heights of one link. Fields may be scalars or arrays."""

    d_2d: float
    d_3d: float
    h_ut: float
    f_c: float
    h_bs: float = 10.0

    def __post_init__(self):
        d_2d = np.asarray(self.d_2d, dtype=float)
        d_3d = np.asarray(self.d_3d, dtype=float)
        if not (np.all(np.isfinite(d_2d)) and np.all(np.isfinite(d_3d))):
            raise DomainError("link distances must be finite")
        if np.any(d_2d <= 0):
            raise DomainError("horizontal distance must be > 0")
        if np.any(d_3d < d_2d * (1.0 - 1e-12)):
            raise DomainError("3D distance must be >= horizontal distance")
        lo, hi = CARRIER_RANGE_GHZ
        if not lo <= self.f_c <= hi:
            raise DomainError(f"carrier {self.f_c} GHz outside [{lo}, {hi}] GHz")

    @classmethod
    def between(cls, a, b, f_c):
        """Geometry of the link between two nodes; the higher node acts as the BS."""
        pa = np.asarray(a.as_array() if isinstance(a, Node3D) else a, dtype=float)
        pb = np.asarray(b.as_array() if isinstance(b, Node3D) else b, dtype=float)
        delta = pa - pb
        d_2d = np.hypot(delta[..., 0], delta[..., 1])
        d_3d = np.sqrt(d_2d**2 + delta[..., 2] ** 2)
        h_bs = np.maximum(pa[..., 2], pb[..., 2])
        h_ut = np.minimum(pa[..., 2], pb[..., 2])
        if d_2d.ndim == 0:
            return cls(float(d_2d), float(d_3d), float(h_ut), f_c, float(h_bs))
        return cls(d_2d, d_3d, h_ut, f_c, h_bs)


@dataclass(frozen=True)
class LinkRealization:
    """One sampled hop state. ``small_scale`` may hold per-element coefficients."""

    los: bool
    path_loss_db: float
    shadow_db: float
    small_scale: complex

    def __post_init__(self):
        if not self.path_loss_db > 0:
            raise DomainError("path loss must be > 0 dB")

    @property
    def amplitude(self):
        return link_amplitude(self.path_loss_db, self.shadow_db)


def _out(x):
    return x.item() if np.ndim(x) == 0 else x


def los_probability(d_2d):
    d = np.asarray(d_2d, dtype=float)
    if not np.all(np.isfinite(d)) or np.any(d <= 0):
        raise DomainError("LoS probability needs finite, positive distances")
    with np.errstate(divide="ignore"):
        ratio = ALWAYS_LOS_DISTANCE / d
        p = ratio + np.exp(-d / (2 * ALWAYS_LOS_DISTANCE)) * (1.0 - ratio)
    return _out(np.where(d <= ALWAYS_LOS_DISTANCE, 1.0, p))


def sample_los(mode, d_2d, rng):
    """Draw LoS flags. One uniform is consumed per link whatever the mode,
    so forced and probabilistic configurations stay on common random numbers.
    """
    mode = LosMode(mode)
    shape = np.shape(d_2d)
    u = rng.random(shape)
    if mode is LosMode.FORCED_LOS:
        flags = np.ones(shape, dtype=bool)
    elif mode is LosMode.FORCED_NLOS:
        flags = np.zeros(shape, dtype=bool)
    else:
        flags = u < los_probability(d_2d)
    return _out(np.asarray(flags))


def breakpoint_distance(geom):
    h_bs = np.asarray(geom.h_bs, dtype=float) - EFFECTIVE_ENV_HEIGHT
    h_ut = np.asarray(geom.h_ut, dtype=float) - EFFECTIVE_ENV_HEIGHT
    if np.any(h_ut <= 0) or np.any(h_bs <= 0):
        raise DomainError("antenna heights must exceed the 1 m effective environment height")
    return _out(4.0 * h_bs * h_ut * geom.f_c * 1e9 / SPEED_OF_LIGHT)


def path_loss_db(geom, los, params=DEFAULT_CHANNEL):
    """UMi street-canyon path loss in dB (``f_c`` in GHz, distances in m).

    Below the breakpoint the LoS branch is single-slope. Links past the
    breakpoint raise :class:`UnsupportedRegimeError` unless
    ``params.allow_beyond_breakpoint`` is set, in which case the two-slope LoS
    branch is used. The nLoS value is clamped from below by the LoS value.
    """
    d_2d = np.asarray(geom.d_2d, dtype=float)
    d_3d = np.asarray(geom.d_3d, dtype=float)
    h_ut = np.asarray(geom.h_ut, dtype=float)
    d_bp = np.asarray(breakpoint_distance(geom))
    beyond = d_2d >= d_bp
    if np.any(beyond) and not params.allow_beyond_breakpoint:
        worst = float(np.max(d_2d[beyond] if d_2d.ndim else d_2d))
        raise UnsupportedRegimeError(
            f"d_2d={worst:.2f} m is past the {float(np.min(d_bp)):.2f} m breakpoint"
        )
    freq_term = params.frequency_slope * math.log10(geom.f_c)
    pl_los = params.los_intercept_db + params.los_distance_slope * np.log10(d_3d) + freq_term
    if np.any(beyond):
        h_bs = np.asarray(geom.h_bs, dtype=float)
        far = (
            params.los_intercept_db
            + 40.0 * np.log10(d_3d)
            + freq_term
            - 9.5 * np.log10(d_bp**2 + (h_bs - h_ut) ** 2)
        )
        pl_los = np.where(beyond, far, pl_los)
    pl_nlos = (
        params.nlos_intercept_db
        + params.nlos_distance_slope * np.log10(d_3d)
        + freq_term
        - params.nlos_height_coeff * (h_ut - 1.5)
    )
    pl_nlos = np.maximum(pl_los, pl_nlos)
    return _out(np.where(los, pl_los, pl_nlos))


def sample_shadow_fading_db(los, rng, params=DEFAULT_CHANNEL):
    sigma = np.where(los, params.shadow_sigma_los_db, params.shadow_sigma_nlos_db)
    return _out(sigma * rng.standard_normal(np.shape(los)))


def _rician_weights(los, k_factor_db):
    if math.isinf(k_factor_db) and k_factor_db > 0:
        los_mean, los_scatter = 1.0, 0.0
    else:
        k = 10.0 ** (k_factor_db / 10.0)
        los_mean, los_scatter = math.sqrt(k / (k + 1.0)), math.sqrt(1.0 / (k + 1.0))
    mean = np.where(los, los_mean, 0.0)
    scatter = np.where(los, los_scatter, 1.0)
    return mean, scatter


def sample_small_scale(los, k_factor_db, rng, size=None, random_phase=True):
    """Unit-mean-power fading coefficient(s).

    LoS links are Rician with factor ``10**(k_factor_db/10)`` and a uniform
    specular phase, nLoS links are CN(0, 1). ``k_factor_db=inf`` gives the pure
    specular term. ``size`` lets a per-link ``los`` flag broadcast over elements.
    With ``random_phase=False`` the specular phase is fixed at zero and no
    uniform is drawn; the magnitude distribution is unchanged.
    """
    shape = np.shape(los) if size is None else size
    specular = np.exp(1j * rng.uniform(-np.pi, np.pi, shape)) if random_phase else 1.0
    scatter_re = rng.standard_normal(shape)
    scatter_im = rng.standard_normal(shape)
    mean, scatter = _rician_weights(los, k_factor_db)
    coeff = mean * specular + scatter * (scatter_re + 1j * scatter_im) / math.sqrt(2.0)
    return _out(np.asarray(coeff))


def sample_fading_magnitude(los, k_factor_db, rng, size=None):
    """``|s|`` of :func:`sample_small_scale` with ``random_phase=False``.

    Consumes the generator identically, so both agree draw for draw, but
    never builds the complex array.
    """
    shape = np.shape(los) if size is None else size
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    mean, scatter = _rician_weights(los, k_factor_db)
    scatter = scatter / math.sqrt(2.0)
    re *= scatter
    re += mean
    im *= scatter
    return _out(np.hypot(re, im, out=re))


def link_amplitude(pl_db, shadow_db):
    return _out(10.0 ** (-(np.asarray(pl_db, dtype=float) - shadow_db) / 20.0))


def sample_link(geom, mode, rng, params=DEFAULT_CHANNEL, n_coefficients=None):
    """Sample a full :class:`LinkRealization` for a scalar geometry."""
    los = bool(sample_los(mode, geom.d_2d, rng))
    pl = float(path_loss_db(geom, los, params))
    shadow = float(sample_shadow_fading_db(los, rng, params))
    size = None if n_coefficients is None else (n_coefficients,)
    fading = sample_small_scale(los, params.k_factor_db, rng, size=size)
    return LinkRealization(los, pl, shadow, fading)

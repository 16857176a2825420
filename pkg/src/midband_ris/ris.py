"""RIS panel model, cascaded channel composition and optimal passive beamforming."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .channel import SPEED_OF_LIGHT, Node3D
from .errors import ContractError, DomainError


class Mode(str, Enum):
    RIS_PLUS_STATIC = "ris_plus_static"
    RIS_ONLY = "ris_only"
    STATIC_ONLY = "static_only"


ALL_MODES = (Mode.STATIC_ONLY, Mode.RIS_ONLY, Mode.RIS_PLUS_STATIC)


@dataclass(frozen=True)
class RisPanel:
    n_elements: int
    center: Node3D
    f_c: float
    element_gain_dbi: float = 0.0

    def __post_init__(self):
        if int(self.n_elements) != self.n_elements or self.n_elements < 1:
            raise DomainError(f"n_elements must be a positive integer, got {self.n_elements}")
        if not math.isfinite(self.element_gain_dbi):
            raise DomainError("element gain must be finite")

    @property
    def element_amplitude(self):
        """Amplitude gain of one element on one hop."""
        return 10.0 ** (self.element_gain_dbi / 20.0)

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / (self.f_c * 1e9)


def wrap_phase(theta):
    """Map angles into [-pi, pi)."""
    wrapped = np.mod(np.asarray(theta, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    # mod can round up to exactly 2*pi for tiny negative inputs
    return np.where(wrapped >= np.pi, wrapped - 2.0 * np.pi, wrapped)


@dataclass(frozen=True)
class PhaseConfig:
    theta: np.ndarray = field(repr=False)

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        if theta.ndim != 1:
            raise ContractError("phase configuration must be one-dimensional")
        if np.any(theta < -np.pi) or np.any(theta >= np.pi):
            raise DomainError("phases must lie in [-pi, pi)")
        object.__setattr__(self, "theta", theta)

    def __len__(self):
        return self.theta.size


@dataclass(frozen=True)
class CascadedChannel:
    static_coeff: complex
    element_products: np.ndarray = field(repr=False)
    mode: Mode = Mode.RIS_PLUS_STATIC

    def __post_init__(self):
        products = np.asarray(self.element_products, dtype=complex).ravel()
        if Mode(self.mode) is Mode.STATIC_ONLY and products.size:
            raise ContractError("static-only cascade carries no element products")
        if Mode(self.mode) is Mode.RIS_ONLY:
            object.__setattr__(self, "static_coeff", 0j)
        object.__setattr__(self, "element_products", products)
        object.__setattr__(self, "mode", Mode(self.mode))


def cascade_products(amp_tx_ris, amp_ris_rx, fading_tx_ris, fading_ris_rx, element_amplitude=1.0):
    """g_e^2 * a_sr * a_rd * s_sr,n * s_rd,n for every element n."""
    s_sr = np.atleast_1d(np.asarray(fading_tx_ris, dtype=complex))
    s_rd = np.atleast_1d(np.asarray(fading_ris_rx, dtype=complex))
    if s_sr.shape != s_rd.shape:
        raise ContractError(f"hop fading lengths differ: {s_sr.shape} vs {s_rd.shape}")
    return element_amplitude**2 * amp_tx_ris * amp_ris_rx * s_sr * s_rd


def element_products(tx_ris, ris_rx, panel):
    """Per-element cascaded coefficients of a panel.

    Both hop realizations carry one small-scale coefficient per element; the
    deterministic amplitude of each hop comes from its path loss and shadowing
    at the panel centre (far field, shared by all elements).
    """
    s_sr = np.atleast_1d(np.asarray(tx_ris.small_scale, dtype=complex))
    s_rd = np.atleast_1d(np.asarray(ris_rx.small_scale, dtype=complex))
    for name, s in (("tx_ris", s_sr), ("ris_rx", s_rd)):
        if s.size != panel.n_elements:
            raise ContractError(
                f"{name} carries {s.size} coefficients for a {panel.n_elements}-element panel"
            )
    return cascade_products(
        tx_ris.amplitude, ris_rx.amplitude, s_sr, s_rd, panel.element_amplitude
    )


def optimal_phases(static_coeff, products):
    """Co-phase every cascaded term with the static path.

    With these phases the combined magnitude is |static| + sum |product_n|.
    """
    products = np.atleast_1d(np.asarray(products, dtype=complex))
    if products.size == 0:
        raise ContractError("optimal phases need at least one element product")
    return PhaseConfig(wrap_phase(np.angle(static_coeff) - np.angle(products)))


def effective_channel(cascade, phases):
    mode = cascade.mode
    if mode is Mode.STATIC_ONLY:
        return complex(cascade.static_coeff)
    theta = phases.theta if isinstance(phases, PhaseConfig) else np.asarray(phases, dtype=float)
    if theta.size != cascade.element_products.size:
        raise ContractError(
            f"{theta.size} phases for {cascade.element_products.size} element products"
        )
    reflected = complex(np.sum(cascade.element_products * np.exp(1j * theta)))
    if mode is Mode.RIS_ONLY:
        return reflected
    return complex(cascade.static_coeff) + reflected

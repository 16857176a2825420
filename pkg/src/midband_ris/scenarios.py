"""Use-case geometries, user drops and sweep orchestration.

A scenario is described by a flat mapping of named settings (the same names a
scenario file uses). :func:`build_use_case` starts from the defaults of one of
the four use cases, applies overrides and validates the result.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import mcengine
from .channel import ChannelParams, LinkGeometry, LosMode, Node3D, breakpoint_distance
from .errors import ConfigError, DomainError
from .mcengine import (
    RadioParams,
    channel_amplitudes,
    coverage_probability,
    e2e_los_probability,
    modes_for,
    snr_linear,
    spectral_efficiency,
    stream,
)
from .ris import ALL_MODES, Mode, RisPanel

USE_CASES = ("UC1", "UC2", "UC3", "UC4")
LARGE_SCALE_POLICIES = ("per_trial", "per_location", "median")
REGION_KINDS = ("cell-disc", "roi-disc")
PLACEMENT_AZIMUTH_DEG = 30.0
RIS_HEIGHT = 5.0
ALWAYS_LOS_OFFSET = 15.0  # m, RIS distance inside the 18 m always-LoS zone


@dataclass(frozen=True)
class UserRegion:
    kind: str
    center: Node3D
    radius: float
    user_height: float

    def __post_init__(self):
        if self.kind not in REGION_KINDS:
            raise DomainError(f"region kind must be one of {REGION_KINDS}")
        if not self.radius > 0:
            raise DomainError(f"region radius must be > 0, got {self.radius}")
        if self.kind == "roi-disc" and self.radius > 18.0:
            raise DomainError("an ROI disc must fit the 18 m always-LoS radius")
        if self.user_height < 0:
            raise DomainError("user height must be >= 0")


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    grid: tuple

    AXES = ("tx_power_dbm", "qos_r", "n_elements", "ris_y")

    def __post_init__(self):
        if self.axis not in self.AXES:
            raise ConfigError("sweep", f"unknown axis {self.axis!r}; choose from {self.AXES}")
        grid = tuple(float(v) for v in self.grid)
        if not grid:
            raise ConfigError("sweep", "grid is empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("sweep", "grid must be strictly increasing")
        if self.axis == "n_elements":
            if any(v != int(v) or v < 1 for v in grid):
                raise ConfigError("sweep", "element counts must be positive integers")
            grid = tuple(int(v) for v in grid)
        object.__setattr__(self, "grid", grid)


@dataclass(frozen=True)
class ScenarioConfig:
    use_case: str
    f_c: float
    tx: Node3D
    rx: Node3D | None
    region: UserRegion | None
    n_users: int
    ris: RisPanel | None
    los_static: LosMode
    los_tx_ris: LosMode
    los_ris_rx: LosMode
    radio: RadioParams = field(default_factory=RadioParams)
    channel: ChannelParams = field(default_factory=ChannelParams)
    large_scale: str = "per_trial"
    qos_r: float | None = None
    modes: tuple = ALL_MODES
    cell_radius: float = 200.0
    min_tx_distance: float = 10.0
    trials: int = 100_000
    seed: int = 0
    fwa_distance: float | None = None

    def receiver_positions(self, seed=None):
        """Receiver coordinates, shape ``(n_locations, 3)``."""
        if self.rx is not None:
            return self.rx.as_array()[None, :]
        seed = self.seed if seed is None else seed
        rng = stream(seed, mcengine.STREAM_USERS)
        return _drop_positions(self.region, self.n_users, rng, self.tx, self.min_tx_distance)

    def with_ris_at(self, center):
        mapping = {**to_mapping(self), "use_case": "custom", "ris_xyz": _xyz(center)}
        mapping.pop("fwa_distance_m", None)
        return scenario_from_mapping(mapping)

    def with_overrides(self, **overrides):
        return scenario_from_mapping({**to_mapping(self), **overrides})


# ---------------------------------------------------------------- geometry


def ris_sweep_position(ris_y, tx_y=0.0, rx_y=200.0, height=RIS_HEIGHT):
    """RIS position at 30 degrees azimuth from whichever end node is nearer."""
    if not tx_y < ris_y < rx_y:
        raise ConfigError("ris_y", f"{ris_y} outside ({tx_y}, {rx_y})")
    tan = math.tan(math.radians(PLACEMENT_AZIMUTH_DEG))
    if ris_y <= 0.5 * (tx_y + rx_y):
        x = tan * (ris_y - tx_y)
    else:
        x = tan * (rx_y - ris_y)
    return Node3D(x, float(ris_y), height)


def _drop_positions(region, count, rng, tx=None, min_distance=0.0):
    if count < 1:
        raise ConfigError("n_users", "need at least one user")
    out = np.empty((0, 2))
    cx, cy = region.center.x, region.center.y
    while len(out) < count:
        need = count - len(out)
        radius = region.radius * np.sqrt(rng.random(need))
        angle = rng.uniform(0.0, 2.0 * np.pi, need)
        xy = np.column_stack([cx + radius * np.cos(angle), cy + radius * np.sin(angle)])
        if tx is not None and min_distance > 0:
            xy = xy[np.hypot(xy[:, 0] - tx.x, xy[:, 1] - tx.y) >= min_distance]
        out = np.vstack([out, xy])
    return np.column_stack([out, np.full(count, region.user_height)])


def drop_users(region, count, rng, tx=None, min_distance=10.0):
    """Uniform user drops over a disc, rejecting points closer than
    ``min_distance`` (horizontally) to ``tx`` when one is given."""
    return [Node3D(*p) for p in _drop_positions(region, count, rng, tx, min_distance)]


# ---------------------------------------------------------------- mapping

COMMON_DEFAULTS = {
    "carrier_ghz": 7.8,
    "bandwidth_mhz": 400.0,
    "tx_power_dbm": 30.0,
    "noise_psd_dbm_hz": -174.0,
    "g_t_dbi": 10.0,
    "g_r_dbi": 3.0,
    "n_elements": 2000,
    "element_gain_dbi": 0.0,
    "tx_xyz": (0.0, 0.0, 10.0),
    "cell_radius_m": 200.0,
    "min_tx_distance_m": 10.0,
    "los_mode_static": "probabilistic",
    "los_mode_tx_ris": "probabilistic",
    "los_mode_ris_rx": "probabilistic",
    "k_factor_db": 9.0,
    "shadow_sigma_los_db": 4.0,
    "shadow_sigma_nlos_db": 7.82,
    "allow_beyond_breakpoint": False,
    "large_scale": "per_trial",
    "modes": tuple(m.value for m in ALL_MODES),
    "trials": 100_000,
    "seed": 0,
}

OPTIONAL_KEYS = (
    "use_case",
    "rx_xyz",
    "ris_xyz",
    "region_kind",
    "region_center_xy",
    "region_radius_m",
    "user_height_m",
    "n_users",
    "qos_r_bps_hz",
    "fwa_distance_m",
)

KNOWN_KEYS = frozenset(COMMON_DEFAULTS) | frozenset(OPTIONAL_KEYS)

GEOMETRY_KEYS = (
    "tx_xyz",
    "rx_xyz",
    "ris_xyz",
    "region_kind",
    "region_center_xy",
    "region_radius_m",
    "user_height_m",
)


def _near_los_zone(anchor_y, towards):
    """Point 15 m from (0, anchor_y) at 30 degrees off the y axis."""
    # sin 30 = 1/2 and cos 30 = sqrt(3)/2, written out so x is exactly 7.5 m
    x = 0.5 * ALWAYS_LOS_OFFSET
    y = anchor_y + towards * 0.5 * math.sqrt(3.0) * ALWAYS_LOS_OFFSET
    return (x, y, RIS_HEIGHT)


def use_case_defaults(use_case, fwa_distance=100.0):
    """Flat settings of a use case before overrides."""
    if use_case == "UC1":
        d = float(fwa_distance)
        return {
            "use_case": "UC1",
            "rx_xyz": (0.0, d, 2.5),
            "ris_xyz": (d / 4.0, d / 2.0, RIS_HEIGHT),
            "los_mode_static": "forced-nlos",
            "los_mode_tx_ris": "forced-los",
            "los_mode_ris_rx": "forced-los",
            "fwa_distance_m": d,
        }
    if use_case == "UC2":
        return {
            "use_case": "UC2",
            "ris_xyz": _near_los_zone(0.0, +1),
            "region_kind": "cell-disc",
            "region_center_xy": (0.0, 0.0),
            "region_radius_m": 200.0,
            "user_height_m": 1.5,
            "n_users": 2000,
            "los_mode_tx_ris": "forced-los",
            # users on the far side of the cell sit past the RIS-user breakpoint at 7.8 GHz
            "allow_beyond_breakpoint": True,
        }
    if use_case == "UC3":
        return {
            "use_case": "UC3",
            "ris_xyz": (100.0, 100.0, RIS_HEIGHT),
            "region_kind": "roi-disc",
            "region_center_xy": (100.0, 100.0),
            "region_radius_m": 18.0,
            "user_height_m": 1.5,
            "n_users": 200,
            "los_mode_ris_rx": "forced-los",
        }
    if use_case == "UC4":
        return {
            "use_case": "UC4",
            "rx_xyz": (0.0, 200.0, 1.5),
            "ris_xyz": _near_los_zone(200.0, -1),
            "los_mode_ris_rx": "forced-los",
            "large_scale": "median",
            "qos_r_bps_hz": 3.0,
        }
    raise ConfigError("use_case", f"unknown use case {use_case!r}; choose from {USE_CASES}")


def _xyz(node):
    return (node.x, node.y, node.z)


def to_mapping(cfg):
    """Flat settings that rebuild ``cfg`` through :func:`scenario_from_mapping`."""
    m = {
        "use_case": cfg.use_case,
        "carrier_ghz": cfg.f_c,
        "bandwidth_mhz": cfg.radio.bandwidth_hz / 1e6,
        "tx_power_dbm": cfg.radio.p_tx_dbm,
        "noise_psd_dbm_hz": cfg.radio.noise_psd_dbm_hz,
        "g_t_dbi": cfg.radio.g_t_dbi,
        "g_r_dbi": cfg.radio.g_r_dbi,
        "tx_xyz": _xyz(cfg.tx),
        "cell_radius_m": cfg.cell_radius,
        "min_tx_distance_m": cfg.min_tx_distance,
        "los_mode_static": cfg.los_static.value,
        "los_mode_tx_ris": cfg.los_tx_ris.value,
        "los_mode_ris_rx": cfg.los_ris_rx.value,
        "k_factor_db": cfg.channel.k_factor_db,
        "shadow_sigma_los_db": cfg.channel.shadow_sigma_los_db,
        "shadow_sigma_nlos_db": cfg.channel.shadow_sigma_nlos_db,
        "allow_beyond_breakpoint": cfg.channel.allow_beyond_breakpoint,
        "large_scale": cfg.large_scale,
        "modes": tuple(m.value for m in cfg.modes),
        "trials": cfg.trials,
        "seed": cfg.seed,
    }
    if cfg.ris is not None:
        m["n_elements"] = cfg.ris.n_elements
        m["element_gain_dbi"] = cfg.ris.element_gain_dbi
        m["ris_xyz"] = _xyz(cfg.ris.center)
    if cfg.rx is not None:
        m["rx_xyz"] = _xyz(cfg.rx)
    if cfg.region is not None:
        m["region_kind"] = cfg.region.kind
        m["region_center_xy"] = (cfg.region.center.x, cfg.region.center.y)
        m["region_radius_m"] = cfg.region.radius
        m["user_height_m"] = cfg.region.user_height
        m["n_users"] = cfg.n_users
    if cfg.qos_r is not None:
        m["qos_r_bps_hz"] = cfg.qos_r
    if cfg.fwa_distance is not None:
        m["fwa_distance_m"] = cfg.fwa_distance
    return m


class _Problems:
    def __init__(self):
        self.items = []

    def add(self, key, message):
        self.items.append((key, message))

    def raise_if_any(self):
        if self.items:
            err = ConfigError(
                self.items[0][0],
                "; ".join(f"{k}: {msg}" for k, msg in self.items),
                prefixed=False,
            )
            err.problems = list(self.items)
            raise err


def _convert(problems, mapping, key, kind):
    if key not in mapping or mapping[key] is None:
        return None
    value = mapping[key]
    try:
        if kind == "float":
            if isinstance(value, bool):
                raise TypeError
            out = float(value)
            if math.isnan(out):
                raise ValueError
            return out
        if kind == "int":
            if isinstance(value, bool) or float(value) != int(value):
                raise TypeError
            return int(value)
        if kind == "bool":
            if not isinstance(value, bool):
                raise TypeError
            return value
        if kind == "str":
            if not isinstance(value, str):
                raise TypeError
            return value
        if kind in ("xyz", "xy"):
            n = 3 if kind == "xyz" else 2
            seq = tuple(float(v) for v in value)
            if len(seq) != n or isinstance(value, str):
                raise TypeError
            return seq
        if kind == "modes":
            if isinstance(value, str):
                value = [value]
            return tuple(Mode(v) for v in value)
    except (TypeError, ValueError):
        problems.add(key, f"expected {kind}, got {value!r}")
        return None
    raise AssertionError(kind)


def _node(problems, key, xyz):
    if xyz is None:
        return None
    try:
        return Node3D(*xyz)
    except DomainError as exc:
        problems.add(key, str(exc))
        return None


def _check_locked(problems, use_case, mapping, defaults):
    for key in GEOMETRY_KEYS + ("fwa_distance_m",):
        if key not in mapping or mapping[key] is None:
            continue
        if key == "fwa_distance_m" and use_case == "UC1":
            continue
        expected = defaults.get(key, COMMON_DEFAULTS.get(key))
        if expected is None:
            problems.add(key, f"not part of {use_case}; use use_case = \"custom\"")
            continue
        given = mapping[key]
        same = (
            given == expected
            if isinstance(expected, str)
            else np.allclose(np.atleast_1d(np.asarray(given, dtype=float)), np.atleast_1d(expected), atol=1e-9)
        )
        if not same:
            problems.add(key, f"{use_case} geometry is fixed; use use_case = \"custom\" to move nodes")


def scenario_from_mapping(mapping):
    """Validate flat settings and build a :class:`ScenarioConfig`.

    Unknown keys and every invariant violation are collected and raised
    together as one :class:`ConfigError`.
    """
    problems = _Problems()
    unknown = sorted(set(mapping) - KNOWN_KEYS)
    for key in unknown:
        problems.add(key, "unknown setting")
    problems.raise_if_any()

    use_case = mapping.get("use_case", "custom")
    if use_case != "custom":
        if use_case not in USE_CASES:
            problems.add("use_case", f"unknown use case {use_case!r}")
            problems.raise_if_any()
        fwa = mapping.get("fwa_distance_m", 100.0) if use_case == "UC1" else 100.0
        try:
            fwa = float(fwa)
        except (TypeError, ValueError):
            problems.add("fwa_distance_m", f"expected float, got {fwa!r}")
            problems.raise_if_any()
        if use_case == "UC1" and not fwa > 0:
            problems.add("fwa_distance_m", "must be > 0")
            problems.raise_if_any()
        defaults = use_case_defaults(use_case, fwa)
        _check_locked(problems, use_case, mapping, defaults)
        merged = {**COMMON_DEFAULTS, **defaults}
        merged.update({k: v for k, v in mapping.items() if k not in GEOMETRY_KEYS})
    else:
        merged = {**COMMON_DEFAULTS, **mapping}
        if "fwa_distance_m" in mapping:
            problems.add("fwa_distance_m", "only meaningful for UC1")

    get = lambda key, kind: _convert(problems, merged, key, kind)  # noqa: E731
    f_c = get("carrier_ghz", "float")
    bandwidth = get("bandwidth_mhz", "float")
    p_tx = get("tx_power_dbm", "float")
    noise_psd = get("noise_psd_dbm_hz", "float")
    g_t = get("g_t_dbi", "float")
    g_r = get("g_r_dbi", "float")
    n_elements = get("n_elements", "int")
    element_gain = get("element_gain_dbi", "float")
    cell_radius = get("cell_radius_m", "float")
    min_tx = get("min_tx_distance_m", "float")
    k_db = get("k_factor_db", "float")
    sigma_los = get("shadow_sigma_los_db", "float")
    sigma_nlos = get("shadow_sigma_nlos_db", "float")
    beyond_bp = get("allow_beyond_breakpoint", "bool")
    large_scale = get("large_scale", "str")
    modes = get("modes", "modes")
    trials = get("trials", "int")
    seed = get("seed", "int")
    qos_r = get("qos_r_bps_hz", "float")
    n_users = get("n_users", "int")
    fwa = get("fwa_distance_m", "float")
    tx = _node(problems, "tx_xyz", get("tx_xyz", "xyz"))
    rx = _node(problems, "rx_xyz", get("rx_xyz", "xyz"))
    ris_center = _node(problems, "ris_xyz", get("ris_xyz", "xyz"))
    los = {}
    for key in ("los_mode_static", "los_mode_tx_ris", "los_mode_ris_rx"):
        value = get(key, "str")
        try:
            los[key] = LosMode(value)
        except ValueError:
            problems.add(key, f"must be one of {[m.value for m in LosMode]}, got {value!r}")

    if f_c is not None and not 7.0 <= f_c <= 24.0:
        problems.add("carrier_ghz", f"{f_c} GHz is outside the 7-24 GHz upper mid-band")
    if bandwidth is not None and not bandwidth > 0:
        problems.add("bandwidth_mhz", "must be > 0")
    if n_elements is not None and n_elements < 1:
        problems.add("n_elements", "must be >= 1")
    if cell_radius is not None and not cell_radius > 0:
        problems.add("cell_radius_m", f"must be > 0, got {cell_radius}")
    if min_tx is not None and min_tx < 0:
        problems.add("min_tx_distance_m", "must be >= 0")
    for key, sigma in (("shadow_sigma_los_db", sigma_los), ("shadow_sigma_nlos_db", sigma_nlos)):
        if sigma is not None and sigma < 0:
            problems.add(key, "must be >= 0")
    if large_scale is not None and large_scale not in LARGE_SCALE_POLICIES:
        problems.add("large_scale", f"must be one of {LARGE_SCALE_POLICIES}")
    if trials is not None and trials < 0:
        problems.add("trials", "must be >= 0")
    if seed is not None and seed < 0:
        problems.add("seed", "must be >= 0")
    if qos_r is not None and qos_r < 0:
        problems.add("qos_r_bps_hz", "must be >= 0")

    region = None
    region_keys = ("region_kind", "region_center_xy", "region_radius_m", "user_height_m")
    if any(merged.get(k) is not None for k in region_keys):
        kind = get("region_kind", "str")
        center_xy = get("region_center_xy", "xy")
        radius = get("region_radius_m", "float")
        height = get("user_height_m", "float")
        missing = [k for k in region_keys if merged.get(k) is None]
        for key in missing:
            problems.add(key, "required when a user region is given")
        if not missing and None not in (kind, center_xy, radius, height):
            try:
                region = UserRegion(kind, Node3D(center_xy[0], center_xy[1], height), radius, height)
            except DomainError as exc:
                message = str(exc)
                if "kind" in message:
                    key = "region_kind"
                elif "height" in message:
                    key = "user_height_m"
                else:
                    key = "region_radius_m"
                problems.add(key, message)
        if n_users is None:
            problems.add("n_users", "required when a user region is given")
        elif n_users < 1:
            problems.add("n_users", "must be >= 1")
    if merged.get("rx_xyz") is not None and any(merged.get(k) is not None for k in region_keys):
        problems.add("rx_xyz", "give either a fixed receiver or a user region, not both")
    if merged.get("rx_xyz") is None and not any(merged.get(k) is not None for k in region_keys):
        problems.add("rx_xyz", "a fixed receiver or a user region is required")

    ris = None
    if ris_center is not None and n_elements is not None and f_c is not None and element_gain is not None:
        try:
            ris = RisPanel(n_elements, ris_center, f_c, element_gain)
        except DomainError as exc:
            problems.add("n_elements", str(exc))
    if modes is not None:
        modes = tuple(m for m in ALL_MODES if m in modes)  # canonical column order
    if modes is not None and ris is None and merged.get("ris_xyz") is None:
        modes = tuple(m for m in modes if m is Mode.STATIC_ONLY)
    if modes is not None and not modes:
        problems.add("modes", "no mode left to evaluate")

    channel = radio = None
    try:
        if None not in (k_db, sigma_los, sigma_nlos, beyond_bp):
            channel = ChannelParams(
                k_factor_db=k_db,
                shadow_sigma_los_db=sigma_los,
                shadow_sigma_nlos_db=sigma_nlos,
                allow_beyond_breakpoint=beyond_bp,
            )
    except DomainError as exc:
        problems.add("k_factor_db", str(exc))
    if None not in (p_tx, g_t, g_r, noise_psd, bandwidth) and bandwidth > 0:
        radio = RadioParams(p_tx, g_t, g_r, noise_psd, bandwidth * 1e6)

    problems.raise_if_any()
    cfg = ScenarioConfig(
        use_case=use_case,
        f_c=f_c,
        tx=tx,
        rx=rx,
        region=region,
        n_users=n_users if region is not None else 1,
        ris=ris,
        los_static=los["los_mode_static"],
        los_tx_ris=los["los_mode_tx_ris"],
        los_ris_rx=los["los_mode_ris_rx"],
        radio=radio,
        channel=channel,
        large_scale=large_scale,
        qos_r=qos_r,
        modes=modes,
        cell_radius=cell_radius,
        min_tx_distance=min_tx,
        trials=trials,
        seed=seed,
        fwa_distance=fwa if use_case == "UC1" else None,
    )
    _check_extent(problems, cfg)
    problems.raise_if_any()
    return cfg


def _check_extent(problems, cfg):
    """Cell containment and worst-case breakpoint checks for every link."""
    tx = cfg.tx

    def outside(node):
        return node.horizontal_distance(tx) > cfg.cell_radius + 1e-9

    if cfg.rx is not None and outside(cfg.rx):
        problems.add("rx_xyz", f"receiver lies outside the {cfg.cell_radius} m cell")
    if cfg.ris is not None and outside(cfg.ris.center):
        problems.add("ris_xyz", f"RIS lies outside the {cfg.cell_radius} m cell")
    if cfg.region is not None:
        reach = cfg.region.center.horizontal_distance(tx) + cfg.region.radius
        if reach > cfg.cell_radius + 1e-9:
            problems.add("region_radius_m", f"user region extends past the {cfg.cell_radius} m cell")
        if reach < cfg.min_tx_distance:
            problems.add("min_tx_distance_m", "no point of the user region satisfies the minimum distance")
    if problems.items or cfg.channel.allow_beyond_breakpoint:
        return

    def worst(a, b_node=None, region=None):
        """Largest horizontal distance from ``a`` to a receiver, with heights."""
        if region is not None:
            d = a.horizontal_distance(region.center) + region.radius
            return d, a.z, region.user_height
        return a.horizontal_distance(b_node), a.z, b_node.z

    links = []
    ends = [("rx_xyz", cfg.rx, None)] if cfg.rx is not None else [("region_radius_m", None, cfg.region)]
    for key, node, region in ends:
        links.append((key, worst(tx, node, region)))
        if cfg.ris is not None:
            links.append(("ris_xyz", worst(cfg.ris.center, node, region)))
    if cfg.ris is not None:
        links.append(("ris_xyz", worst(tx, cfg.ris.center)))
    for key, (d_2d, z_a, z_b) in links:
        if d_2d <= 0:
            continue
        geom = LinkGeometry(d_2d, d_2d, min(z_a, z_b), cfg.f_c, max(z_a, z_b))
        try:
            d_bp = breakpoint_distance(geom)
        except DomainError as exc:
            problems.add(key, str(exc))
            continue
        if d_2d >= d_bp:
            problems.add(
                key,
                f"a link reaches {d_2d:.1f} m, past the {d_bp:.1f} m breakpoint; "
                "set allow_beyond_breakpoint = true to use the two-slope LoS branch",
            )


def build_use_case(use_case, overrides=None):
    """Scenario of use case ``UC1``..``UC4`` with optional flat overrides."""
    if use_case not in USE_CASES:
        raise ConfigError("use_case", f"unknown use case {use_case!r}; choose from {USE_CASES}")
    return scenario_from_mapping({**(overrides or {}), "use_case": use_case})


def build_placement(ris_y=100.0, overrides=None):
    """Fixed-link geometry of the RIS placement study (RIS moves along the link)."""
    tx = Node3D(0.0, 0.0, 10.0)
    rx = Node3D(0.0, 200.0, 2.0)
    ris = ris_sweep_position(ris_y, tx.y, rx.y)
    base = {"use_case": "custom", "tx_xyz": _xyz(tx), "rx_xyz": _xyz(rx), "ris_xyz": _xyz(ris)}
    return scenario_from_mapping({**base, **(overrides or {})})


# ---------------------------------------------------------------- sweeps

AXIS_COLUMNS = {
    "tx_power_dbm": "p_tx_dbm",
    "qos_r": "r_bps_hz",
    "n_elements": "n_elements",
    "ris_y": "ris_y_m",
}


@dataclass
class SweepResult:
    axis: str
    grid: tuple
    metric: str  # "se" (mean SE) or "cov" (coverage probability)
    values: dict
    extra: dict = field(default_factory=dict)

    @property
    def header(self):
        cols = [AXIS_COLUMNS[self.axis], *self.extra]
        return cols + [f"{self.metric}_{m.value}" for m in self.values]

    def rows(self):
        for i, x in enumerate(self.grid):
            cols = [*self.extra.values(), *self.values.values()]
            yield [x, *(float(v[i]) for v in cols)]


def _metric(se, qos_r):
    if qos_r is None:
        return float(np.mean(se))
    return float(coverage_probability(se, qos_r))


def _se(amplitude, radio):
    return spectral_efficiency(snr_linear(amplitude, radio))


def run_sweep(scenario, sweep, trials=None, seed=None):
    """One metric row per grid point, every point on the same random draws.

    The metric is mean SE, or coverage probability when the scenario carries a
    QoS threshold (and always coverage on the ``qos_r`` axis).
    """
    modes = modes_for(scenario)
    axis, grid = sweep.axis, sweep.grid
    qos = scenario.qos_r
    values = {m: np.empty(len(grid)) for m in modes}
    extra = {}

    if axis == "tx_power_dbm":
        amps = channel_amplitudes(scenario, trials, seed)
        for i, p in enumerate(grid):
            radio = replace(scenario.radio, p_tx_dbm=p)
            for m in modes:
                values[m][i] = _metric(_se(amps.magnitude(m), radio), qos)
    elif axis == "qos_r":
        if any(r < 0 for r in grid):
            raise ConfigError("sweep", "QoS thresholds must be >= 0")
        amps = channel_amplitudes(scenario, trials, seed)
        for m in modes:
            values[m][:] = coverage_probability(_se(amps.magnitude(m), scenario.radio), np.asarray(grid))
        qos = 0.0
    elif axis == "n_elements":
        if scenario.ris is None:
            raise ConfigError("sweep", "an element-count sweep needs an RIS")
        amps = channel_amplitudes(scenario, trials, seed, n_grid=grid)
        for i in range(len(grid)):
            for m in modes:
                values[m][i] = _metric(_se(amps.magnitude(m, i), scenario.radio), qos)
    elif axis == "ris_y":
        if scenario.ris is None or scenario.rx is None:
            raise ConfigError("sweep", "a placement sweep needs an RIS and a fixed receiver")
        xs, e2e = [], []
        for i, y in enumerate(grid):
            center = ris_sweep_position(y, scenario.tx.y, scenario.rx.y, scenario.ris.center.z)
            moved = scenario.with_ris_at(center)
            amps = channel_amplitudes(moved, trials, seed)
            for m in modes:
                values[m][i] = _metric(_se(amps.magnitude(m), moved.radio), qos)
            xs.append(center.x)
            e2e.append(
                e2e_los_probability(
                    center.horizontal_distance(scenario.tx), center.horizontal_distance(scenario.rx)
                )
            )
        extra = {"ris_x_m": np.array(xs), "e2e_los_prob": np.array(e2e)}
    else:
        raise ConfigError("sweep", f"axis {axis!r} is not applicable")

    metric = "cov" if qos is not None else "se"
    return SweepResult(axis, grid, metric, values, extra)


def cdf_table(samples):
    """Rank-aligned empirical CDFs: header and rows of (cum_prob, SE per mode)."""
    modes = list(samples.se)
    n = samples.trials
    sorted_se = [np.sort(samples.se[m]) for m in modes]
    header = ["cum_prob", *(f"se_{m.value}" for m in modes)]
    rows = ([(i + 1) / n, *(s[i] for s in sorted_se)] for i in range(n))
    return header, rows

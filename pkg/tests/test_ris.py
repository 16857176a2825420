import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from midband_ris.channel import LinkRealization, Node3D
from midband_ris.errors import ContractError, DomainError
from midband_ris.mcengine import (
    ELEMENT_BLOCK,
    TRIAL_CHUNK,
    channel_amplitudes,
    element_fading,
    trial_chunks,
)
from midband_ris.ris import (
    CascadedChannel,
    Mode,
    PhaseConfig,
    RisPanel,
    cascade_products,
    effective_channel,
    element_products,
    optimal_phases,
    wrap_phase,
)
from midband_ris.scenarios import build_use_case

CENTER = Node3D(25.0, 50.0, 5.0)


def panel(n, gain=0.0):
    return RisPanel(n, CENTER, 7.8, gain)


complexes = st.complex_numbers(max_magnitude=10.0, allow_nan=False, allow_infinity=False)


def test_identity_product():
    assert cascade_products(1.0, 1.0, 1.0, 1.0)[0] == 1.0
    hop = LinkRealization(True, 1e-9, 0.0, np.ones(1))  # path loss must be > 0 dB
    assert element_products(hop, hop, panel(1))[0] == pytest.approx(1.0, rel=1e-9)


def test_fig1_geometry_product():
    amp = 2.435e-5
    assert cascade_products(amp, amp, 1.0, 1.0)[0] == pytest.approx(5.93e-10, rel=1e-3)


def test_element_gain_applied_twice():
    base = cascade_products(1e-5, 2e-5, [1, 1j], [1, 1], panel(2).element_amplitude)
    boosted = cascade_products(1e-5, 2e-5, [1, 1j], [1, 1], panel(2, 3.0).element_amplitude)
    np.testing.assert_allclose(boosted / base, 10 ** (6 / 20), rtol=1e-12)
    assert 10 ** (6 / 20) == pytest.approx(1.995, abs=5e-4)


def test_product_length_mismatch():
    hop3 = LinkRealization(True, 90.0, 0.0, np.ones(3))
    hop2 = LinkRealization(True, 90.0, 0.0, np.ones(2))
    with pytest.raises(ContractError):
        element_products(hop3, hop2, panel(3))
    with pytest.raises(ContractError):
        element_products(hop3, hop3, panel(4))


def test_optimal_phase_examples():
    assert np.all(optimal_phases(1 + 0j, [0.2, 1.0, 3.0]).theta == 0.0)
    phases = optimal_phases(1 + 0j, [0.5j, -0.3])
    np.testing.assert_allclose(phases.theta, [-math.pi / 2, -math.pi])
    cascade = CascadedChannel(1 + 0j, [0.5j, -0.3])
    assert abs(effective_channel(cascade, phases)) == pytest.approx(1.8, abs=1e-12)
    ris_only = CascadedChannel(0j, [np.exp(1.2j)], Mode.RIS_ONLY)
    phases = optimal_phases(0j, ris_only.element_products)
    np.testing.assert_allclose(phases.theta, [-1.2])
    assert abs(effective_channel(ris_only, phases)) == pytest.approx(1.0, abs=1e-12)


def test_effective_channel_examples():
    assert effective_channel(CascadedChannel(0.3j, [], Mode.STATIC_ONLY), None) == 0.3j
    assert effective_channel(CascadedChannel(0j, [1, -1], Mode.RIS_ONLY), np.zeros(2)) == 0
    with pytest.raises(ContractError):
        effective_channel(CascadedChannel(1, [1, 1]), np.zeros(3))


def test_ris_only_mode_drops_static():
    assert CascadedChannel(5 + 1j, [1.0], Mode.RIS_ONLY).static_coeff == 0


def test_phase_range_enforced():
    with pytest.raises(DomainError):
        PhaseConfig(np.array([math.pi]))


@given(st.floats(-1e3, 1e3))
def test_wrap_phase_range(x):
    w = float(wrap_phase(x))
    assert -math.pi <= w < math.pi
    assert math.isclose(math.cos(w), math.cos(x), abs_tol=1e-9)


@given(complexes, st.lists(complexes, min_size=1, max_size=40))
def test_triangle_equality(static, products):
    products = np.array(products)
    h = effective_channel(CascadedChannel(static, products), optimal_phases(static, products))
    expected = abs(static) + np.abs(products).sum()
    assert abs(h) == pytest.approx(expected, rel=1e-12, abs=1e-300)


def test_maximality_against_random_phases(rng):
    static = complex(rng.normal(), rng.normal())
    products = rng.normal(size=64) + 1j * rng.normal(size=64)
    cascade = CascadedChannel(static, products)
    best = abs(effective_channel(cascade, optimal_phases(static, products)))
    random = rng.uniform(-math.pi, math.pi, size=(1000, 64))
    values = np.abs(static + (products * np.exp(1j * random)).sum(axis=1))
    assert np.all(values < best)


@given(complexes, st.lists(complexes, min_size=1, max_size=20), complexes)
def test_appending_an_element_never_hurts(static, products, extra):
    def best(p):
        return abs(effective_channel(CascadedChannel(static, p), optimal_phases(static, p)))

    products = np.array(products)
    assert best(np.append(products, extra)) >= best(products) * (1 - 1e-12)


def test_engine_matches_explicit_composition():
    """The engine's co-phased sum equals effective_channel on the same fades."""
    scenario = build_use_case("UC1", {"n_elements": 600})
    trials, seed = 5, 7
    amps = channel_amplitudes(scenario, trials, seed)
    chunk = trial_chunks(scenario, trials, seed)[0]
    ls = chunk.large_scale
    fades = [
        [element_fading(scenario, seed, 0, hop, block, los) for block in range(2)]
        for hop, los in ((0, ls.los_tx_ris), (1, ls.los_ris_rx))
    ]
    s_sr, s_rd = (np.concatenate(f, axis=1)[:, :600] for f in fades)
    for t in range(trials):
        products = cascade_products(ls.amp_tx_ris[t], ls.amp_ris_rx[t], s_sr[t], s_rd[t])
        static = chunk.static[t]
        for mode in (Mode.RIS_ONLY, Mode.RIS_PLUS_STATIC):
            cascade = CascadedChannel(static, products, mode)
            h = effective_channel(cascade, optimal_phases(cascade.static_coeff, products))
            assert abs(h) == pytest.approx(amps.magnitude(mode)[t], rel=1e-12)


def test_element_fades_are_prefixes():
    scenario = build_use_case("UC1")
    small = channel_amplitudes(scenario, 50, 3, n_grid=(100,)).reflected[:, 0]
    both = channel_amplitudes(scenario, 50, 3, n_grid=(100, 900)).reflected
    np.testing.assert_array_equal(small, both[:, 0])
    assert np.all(both[:, 1] > both[:, 0])


def test_fading_blocks_have_unit_power():
    los = np.ones(TRIAL_CHUNK, bool)
    s = element_fading(build_use_case("UC1"), 0, 0, 0, 0, los)
    assert s.shape == (TRIAL_CHUNK, ELEMENT_BLOCK)
    assert np.mean(np.abs(s) ** 2) == pytest.approx(1.0, abs=0.01)

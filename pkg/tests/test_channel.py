import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from midband_ris.channel import (
    ChannelParams,
    LinkGeometry,
    LosMode,
    Node3D,
    breakpoint_distance,
    link_amplitude,
    los_probability,
    path_loss_db,
    sample_fading_magnitude,
    sample_link,
    sample_los,
    sample_shadow_fading_db,
    sample_small_scale,
)
from midband_ris.errors import DomainError, UnsupportedRegimeError

UC1_D3D = math.hypot(100.0, 7.5)


def umi_los(d3d, fc):
    return 32.4 + 21 * math.log10(d3d) + 20 * math.log10(fc)


def umi_nlos(d3d, fc, h_ut):
    return max(umi_los(d3d, fc), 13.54 + 39.08 * math.log10(d3d) + 20 * math.log10(fc) - 0.6 * (h_ut - 1.5))


def uc1_geom(fc=7.8):
    return LinkGeometry(100.0, UC1_D3D, 2.5, fc)


def rician_mean_amplitude(k_db):
    k = 10 ** (k_db / 10)
    nu, s2 = math.sqrt(k / (k + 1)), 1 / (2 * (k + 1))

    def pdf_times_r(r):
        # i0e keeps the Bessel term finite for large arguments
        return r * (r / s2) * math.exp(-((r - nu) ** 2) / (2 * s2)) * special.i0e(r * nu / s2)

    return integrate.quad(pdf_times_r, 0, 10)[0]


# ---------------------------------------------------------------- LoS


@pytest.mark.parametrize("d, p", [(10.0, 1.0), (18.0, 1.0), (36.0, 18 / 36 + math.exp(-1) * 0.5)])
def test_los_probability_examples(d, p):
    assert los_probability(d) == pytest.approx(p, abs=1e-12)


def test_los_probability_hand_value():
    assert los_probability(36.0) == pytest.approx(0.68394, abs=5e-6)


def test_los_probability_rejects_nonpositive():
    with pytest.raises(DomainError):
        los_probability(0.0)
    with pytest.raises(DomainError):
        los_probability(np.nan)


@given(st.floats(0.1, 5000.0), st.floats(0.0, 5000.0))
def test_los_probability_monotone(d, step):
    assert los_probability(d + step) <= los_probability(d) + 1e-15


@given(st.floats(1e-9, 1e-3))
def test_los_probability_continuous_at_18(eps):
    # right-hand slope at 18 m is (exp(-1/2) - 1) / 18, about -0.022 per metre
    assert abs(los_probability(18.0 + eps) - 1.0) <= 0.025 * eps


def test_sample_los_forced_and_always_los(rng):
    assert sample_los(LosMode.FORCED_LOS, 500.0, rng) is True
    assert sample_los(LosMode.FORCED_NLOS, 5.0, rng) is False
    assert np.all(sample_los("probabilistic", np.full(1000, 10.0), rng))


def test_sample_los_rate(rng):
    flags = sample_los("probabilistic", np.full(100_000, 36.0), rng)
    assert flags.mean() == pytest.approx(0.684, abs=0.01)


def test_sample_los_same_stream_consumption():
    a, b = np.random.default_rng(1), np.random.default_rng(1)
    sample_los("forced-los", np.ones(7), a)
    sample_los("probabilistic", np.ones(7), b)
    assert a.random() == b.random()


# ---------------------------------------------------------------- path loss


def test_path_loss_examples():
    g = uc1_geom()
    assert path_loss_db(g, True) == pytest.approx(92.27, abs=0.005)
    assert path_loss_db(g, False) == pytest.approx(108.99, abs=0.005)
    assert path_loss_db(g, True) == pytest.approx(umi_los(UC1_D3D, 7.8), abs=1e-9)
    assert path_loss_db(g, False) == pytest.approx(umi_nlos(UC1_D3D, 7.8, 2.5), abs=1e-9)


def test_path_loss_frequency_term():
    diff = path_loss_db(uc1_geom(15.0), True) - path_loss_db(uc1_geom(7.8), True)
    assert diff == pytest.approx(20 * math.log10(15 / 7.8), abs=1e-9)
    assert diff == pytest.approx(5.68, abs=0.005)


geoms = st.builds(
    lambda d2, dz, h_ut, fc: LinkGeometry(d2, math.hypot(d2, dz), h_ut, fc, 10.0),
    st.floats(1.0, 300.0),
    st.floats(0.0, 9.0),
    st.floats(1.5, 2.5),
    st.floats(7.0, 24.0),
)


@given(geoms)
def test_path_loss_oracle_and_clamp(g):
    los, nlos = path_loss_db(g, True), path_loss_db(g, False)
    assert los == pytest.approx(umi_los(g.d_3d, g.f_c), abs=1e-9)
    assert nlos == pytest.approx(umi_nlos(g.d_3d, g.f_c, g.h_ut), abs=1e-9)
    assert nlos >= los


@given(geoms, st.floats(0.5, 50.0), st.floats(0.1, 5.0))
def test_path_loss_increasing(g, dd, dfc):
    for los in (True, False):
        farther = LinkGeometry(g.d_2d + dd, g.d_3d + dd, g.h_ut, g.f_c, g.h_bs)
        assert path_loss_db(farther, los) > path_loss_db(g, los)
        if g.f_c + dfc <= 24.0:
            higher = LinkGeometry(g.d_2d, g.d_3d, g.h_ut, g.f_c + dfc, g.h_bs)
            assert path_loss_db(higher, los) > path_loss_db(g, los)


def test_breakpoint_error_and_opt_in():
    g = LinkGeometry(250.0, 250.0, 1.5, 7.8, 5.0)
    assert breakpoint_distance(g) == pytest.approx(4 * 4 * 0.5 * 7.8e9 / 299_792_458.0)
    with pytest.raises(UnsupportedRegimeError):
        path_loss_db(g, True)
    far = path_loss_db(g, True, ChannelParams(allow_beyond_breakpoint=True))
    assert far > umi_los(250.0, 7.8)


def test_geometry_validation():
    with pytest.raises(DomainError):
        LinkGeometry(0.0, 1.0, 1.5, 7.8)
    with pytest.raises(DomainError):
        LinkGeometry(10.0, 5.0, 1.5, 7.8)
    with pytest.raises(DomainError):
        LinkGeometry(10.0, 10.0, 1.5, 30.0)
    with pytest.raises(DomainError):
        Node3D(0.0, 0.0, -1.0)


def test_geometry_between_nodes():
    g = LinkGeometry.between(Node3D(0, 0, 10), Node3D(0, 100, 2.5), 7.8)
    assert (g.d_2d, g.h_bs, g.h_ut) == (100.0, 10.0, 2.5)
    assert g.d_3d == pytest.approx(UC1_D3D)


# ---------------------------------------------------------------- shadowing and fading


def test_shadow_moments(rng):
    los = sample_shadow_fading_db(np.ones(100_000, bool), rng)
    nlos = sample_shadow_fading_db(np.zeros(100_000, bool), rng)
    assert abs(los.mean()) < 0.05
    assert los.std() == pytest.approx(4.0, abs=0.05)
    assert nlos.std() == pytest.approx(7.82, abs=0.1)


def test_zero_sigma_gives_zero(rng):
    params = ChannelParams(shadow_sigma_los_db=0.0, shadow_sigma_nlos_db=0.0)
    assert np.all(sample_shadow_fading_db(np.array([True, False] * 50), rng, params) == 0.0)


def test_rayleigh_moments(rng):
    s = sample_small_scale(np.zeros(100_000, bool), 9.0, rng)
    assert np.mean(np.abs(s) ** 2) == pytest.approx(1.0, abs=0.02)
    assert np.mean(np.abs(s)) == pytest.approx(math.sqrt(math.pi / 4), abs=0.01)


def test_rician_mean_amplitude(rng):
    s = sample_small_scale(np.ones(100_000, bool), 9.0, rng)
    oracle = rician_mean_amplitude(9.0)
    assert np.mean(np.abs(s)) == pytest.approx(oracle, abs=0.01)
    assert np.mean(np.abs(s)) == pytest.approx(0.967, abs=0.01)
    assert np.mean(np.abs(s) ** 2) == pytest.approx(1.0, abs=0.02)


def test_infinite_k_is_pure_specular(rng):
    s = sample_small_scale(np.ones(1000, bool), math.inf, rng)
    np.testing.assert_allclose(np.abs(s), 1.0, rtol=0, atol=1e-15)


@pytest.mark.parametrize("los", [True, False])
@pytest.mark.parametrize("trials", [400, 4000])
def test_mean_power_within_three_sigma_band(los, trials):
    s = sample_small_scale(np.full(trials, los), 9.0, np.random.default_rng(trials))
    assert abs(np.mean(np.abs(s) ** 2) - 1.0) <= 3 / math.sqrt(trials)


def test_magnitude_sampler_matches_complex_sampler():
    los = np.array([True, False, True])[:, None]
    a = sample_fading_magnitude(los, 9.0, np.random.default_rng(3), size=(3, 50))
    b = sample_small_scale(los, 9.0, np.random.default_rng(3), size=(3, 50), random_phase=False)
    np.testing.assert_allclose(a, np.abs(b), rtol=1e-14)


def test_sampling_is_deterministic():
    g = uc1_geom()
    a = sample_link(g, "probabilistic", np.random.default_rng(9), n_coefficients=16)
    b = sample_link(g, "probabilistic", np.random.default_rng(9), n_coefficients=16)
    assert a.los == b.los and a.shadow_db == b.shadow_db
    assert np.array_equal(a.small_scale, b.small_scale)


# ---------------------------------------------------------------- amplitude


@pytest.mark.parametrize(
    "pl, sh, amp", [(100.0, 0.0, 1e-5), (92.27, 0.0, 2.435e-5), (100.0, 20.0, 1e-4)]
)
def test_link_amplitude(pl, sh, amp):
    assert link_amplitude(pl, sh) == pytest.approx(amp, rel=1e-3)

import numpy as np
import pytest
from scipy.special import gamma

from oamid.lg import log_factorial
from oamid.projection import (
    AzimuthalProfile,
    OperatorMatrix,
    default_n_phi,
    matrix_from_profiles,
    operator_matrix,
    radial_profile,
)


def test_empty_mask_gives_identity(empty, geometry):
    A = operator_matrix(empty, geometry.l_max)
    identity = np.eye(2 * geometry.l_max + 1)
    assert np.max(np.abs(A.entries - identity)) < 1e-12


def test_attenuator_scales_identity(geometry):
    from oamid.masks import uniform_mask
    A = operator_matrix(uniform_mask(geometry, 0.5), geometry.l_max)
    assert np.max(np.abs(A.entries - 0.5 * np.eye(13))) < 1e-12


def test_diagonal_free_entry_closed_form(empty):
    # R for the open aperture: Gamma(s/2 + 1) / sqrt(|k|! |l|!)
    prof = radial_profile(empty, 3, 1, 256)
    s = 4
    expect = gamma(s / 2 + 1) / np.exp(0.5 * (log_factorial(3) + log_factorial(1)))
    assert np.allclose(prof.values, expect)


def test_hermiticity_for_real_masks(cross2, smooth):
    for mask in (cross2, smooth):
        A = operator_matrix(mask, 4)
        assert np.max(np.abs(A.entries - A.entries.conj().T)) < 1e-10


def test_passivity(cross3, smooth, halfplane):
    # |A_kl| <= 1 for any transmittance-bounded mask
    for mask in (cross3, smooth, halfplane):
        A = operator_matrix(mask, 5)
        assert np.max(np.abs(A.entries)) <= 1.0 + 1e-9


def test_selection_rule_cross2(cross2):
    A = operator_matrix(cross2, 6)
    k = np.arange(-6, 7)
    forbidden = np.mod(k[:, None] - k[None, :], 4) != 0
    assert np.max(np.abs(A.entries[forbidden])) < 1e-12


def test_selection_rule_triangle(triangle):
    # offset strip edges do not fall on azimuthal grid points, so the
    # forbidden cells are limited by sampling error, not machine epsilon
    A = operator_matrix(triangle, 6)
    k = np.arange(-6, 7)
    forbidden = np.mod(k[:, None] - k[None, :], 3) != 0
    assert np.max(np.abs(A.entries[forbidden])) < 1e-8
    # m = 3 component must actually be present (it is 3-fold, not 6-fold)
    m3 = (k[:, None] - k[None, :] == 3)
    assert np.max(np.abs(A.entries[m3])) > 1e-4


def test_smoothness_sets_default_grid(cross2, smooth):
    assert default_n_phi(smooth, 6) == 256
    assert default_n_phi(cross2, 6) == 1 << 16


def test_n_phi_validation(smooth):
    with pytest.raises(ValueError):
        operator_matrix(smooth, 6, n_phi=300)  # not a power of two
    with pytest.raises(ValueError):
        operator_matrix(smooth, 6, n_phi=16)  # under-resolved


def test_matrix_from_profiles_matches_fast_path(smooth):
    l_max = 3
    n_phi = 256
    profiles = {(k, l): radial_profile(smooth, k, l, n_phi)
                for k in range(-l_max, l_max + 1)
                for l in range(-l_max, l_max + 1)}
    assembled = matrix_from_profiles(profiles, l_max)
    fast = operator_matrix(smooth, l_max)
    assert np.max(np.abs(assembled.entries - fast.entries)) < 1e-12


def test_profile_validation():
    with pytest.raises(ValueError):
        AzimuthalProfile(np.zeros(10), 0, 0)  # not a power of two


def test_json_round_trip(smooth):
    A = operator_matrix(smooth, 4)
    back = OperatorMatrix.from_json_dict(A.to_json_dict())
    assert np.allclose(back.entries, A.entries)
    assert back.l_max == A.l_max


def test_rates_csv_shape(cross2):
    A = operator_matrix(cross2, 2)
    lines = A.rates_csv().strip().split("\n")
    assert len(lines) == 6
    assert lines[0].startswith("k\\l,")


def test_rotation_covariance_phase(smooth):
    from oamid.masks import rotate_mask
    delta = 0.61
    A = operator_matrix(smooth, 4)
    A_rot = operator_matrix(rotate_mask(smooth, delta), 4)
    k = np.arange(-4, 5)
    phase = np.exp(-1j * (k[:, None] - k[None, :]) * delta)
    assert np.max(np.abs(A_rot.entries - phase * A.entries)) < 1e-10

import numpy as np
import pytest
from scipy.integrate import quad

from oamid.lg import (
    MAX_AZIMUTHAL_ORDER,
    ModeGeometry,
    check_index,
    log_factorial,
    mode_amplitude,
    mode_norm,
    ring_radius,
)


def test_log_factorial_small_values():
    for n, expect in [(0, 1), (1, 1), (5, 120), (10, 3628800)]:
        assert np.isclose(log_factorial(n), np.log(expect))


def test_log_factorial_rejects_negative():
    with pytest.raises(ValueError):
        log_factorial(-1)


@pytest.mark.parametrize("l", [0, 1, -3, 7, 20, 100])
def test_mode_is_normalized(l):
    # (1/2) int |u_l|^2 rho drho dphi = 1, angular part gives 2 pi
    integrand = lambda rho: np.pi * rho * np.abs(mode_amplitude(l, rho, 0.0)) ** 2
    val, _ = quad(integrand, 0.0, 30.0)
    assert np.isclose(val, 1.0, rtol=1e-10)


def test_modes_are_orthogonal():
    # different |l| are orthogonal by the angular integral alone; check the
    # full 2D inner product on a dense grid
    rho = np.linspace(0.0, 10.0, 2001)
    phi = np.linspace(0.0, 2 * np.pi, 512, endpoint=False)
    u2 = mode_amplitude(2, rho[:, None], phi[None, :])
    u5 = mode_amplitude(-5, rho[:, None], phi[None, :])
    ip = 0.5 * np.trapezoid(np.conj(u2) * u5 * rho[:, None], rho, axis=0).sum() * (
        2 * np.pi / phi.size)
    assert abs(ip) < 1e-12


def test_amplitude_phase_winding():
    val0 = mode_amplitude(3, 1.0, 0.0)
    val1 = mode_amplitude(3, 1.0, 0.5)
    assert np.isclose(val1 / val0, np.exp(1j * 3 * 0.5))


def test_amplitude_at_origin():
    assert mode_amplitude(0, 0.0, 0.0) != 0
    assert mode_amplitude(1, 0.0, 0.0) == 0


def test_mode_norm_matches_amplitude():
    assert np.isclose(mode_norm(4), abs(mode_amplitude(4, 1.0, 0.0)) * np.exp(0.5))


def test_high_order_does_not_overflow():
    val = mode_amplitude(MAX_AZIMUTHAL_ORDER, 10.0, 0.0)
    assert np.isfinite(val)


def test_check_index_guards():
    assert check_index(-5) == -5
    with pytest.raises(ValueError):
        check_index(MAX_AZIMUTHAL_ORDER + 1)
    with pytest.raises(ValueError):
        check_index(7, l_max=6)


def test_geometry_round_trip():
    g = ModeGeometry(w0=210.0)
    assert np.isclose(g.to_physical(g.to_rho(123.4)), 123.4)
    with pytest.raises(ValueError):
        ModeGeometry(w0=-1.0)


def test_ring_radius():
    g = ModeGeometry(w0=210.0)
    assert ring_radius(0, 0, g) == 0.0
    assert np.isclose(ring_radius(4, -4, g), 210.0 * 2.0)

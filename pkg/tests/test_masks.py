import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oamid.masks import (
    JUMP,
    SMOOTH,
    SectorMask,
    StripSpec,
    half_plane,
    load_raster,
    make_cross,
    mask_value,
    random_smooth_mask,
    rasterize_mask,
    rotate_mask,
    uniform_mask,
)

from conftest import STRIP_WIDTH


def _sample_grid():
    rho = np.linspace(0.05, 4.0, 41)
    phi = np.linspace(0.0, 2 * np.pi, 83, endpoint=False)
    return rho[:, None], phi[None, :]


def test_uniform_mask_is_constant(geometry):
    m = uniform_mask(geometry, 0.7)
    rho, phi = _sample_grid()
    assert np.allclose(m.value(rho, phi), 0.7)
    assert m.smoothness == SMOOTH


def test_strip_blocks_its_band(geometry, cross2):
    # on-axis points along phi = 0 with small |y| lie inside the horizontal
    # arm, so a 2-arm cross blocks everything near the origin
    assert abs(cross2.value(0.05, 0.3)) < 1e-12
    # far outside both strips the aperture is open
    rho_far = geometry.to_rho(4 * STRIP_WIDTH)
    assert np.isclose(cross2.value(rho_far, np.pi / 4), 1.0)


def test_cross_symmetry_orders(geometry, cross2, cross3, triangle):
    rho, phi = _sample_grid()
    for mask, order in [(cross2, 4), (cross3, 6), (triangle, 3)]:
        rotated = mask.value(rho, phi + 2 * np.pi / order)
        assert np.max(np.abs(mask.value(rho, phi) - rotated)) < 1e-12


def test_equal_offsets_are_not_threefold(geometry):
    # equal nonzero offsets on 3 arms do NOT give a 120-degree-invariant
    # pattern; only alternating signs do
    mask = make_cross(3, StripSpec(width=STRIP_WIDTH, offset=40.0), geometry=geometry)
    rho, phi = _sample_grid()
    diff = np.max(np.abs(mask.value(rho, phi) - mask.value(rho, phi + 2 * np.pi / 3)))
    assert diff > 0.5


def test_make_cross_validates_offsets(geometry):
    with pytest.raises(ValueError):
        make_cross(3, StripSpec(width=STRIP_WIDTH), (1.0,), geometry)
    with pytest.raises(ValueError):
        make_cross(0, StripSpec(width=STRIP_WIDTH), geometry=geometry)


def test_strip_closed_form_matches_sampling(geometry, cross2):
    # the closed-form radial moment table must agree with direct quadrature
    phi = np.array([0.1, 1.0, 2.5])
    s_values = np.arange(5)
    table = cross2.radial_integral_table(phi, s_values)
    from scipy.integrate import quad
    for i, p in enumerate(phi):
        bps = sorted(b for b in cross2.radial_breakpoints(p) if 0 < b < 8)
        for j, s in enumerate(s_values):
            direct, _ = quad(
                lambda r: (r ** (s + 1) * np.exp(-r**2)
                           * cross2.value(np.array([r]), np.array([p]))[0].real),
                0.0, 8.0, points=bps, limit=200)
            assert abs(table[i, j] - direct) < 1e-9


def test_sector_midpoint_at_boundary(geometry):
    m = SectorMask(geometry, 0.0, np.pi, inside=1.0, outside=0.0)
    assert np.isclose(m.value(1.0, 0.0), 0.5)
    assert np.isclose(m.value(1.0, np.pi / 2), 1.0)
    assert np.isclose(m.value(1.0, 3 * np.pi / 2), 0.0)
    assert m.smoothness == JUMP


def test_half_plane_breakpoints(geometry, halfplane):
    assert sorted(halfplane.phi_breakpoints()) == pytest.approx([0.0, np.pi])


def test_rotate_matches_pointwise(geometry, cross3):
    delta = 0.37
    rot = rotate_mask(cross3, delta)
    rho, phi = _sample_grid()
    assert np.allclose(rot.value(rho, phi), cross3.value(rho, phi - delta))
    assert rot.smoothness == cross3.smoothness


@settings(max_examples=30, deadline=None)
@given(a=st.floats(-np.pi, np.pi), b=st.floats(-np.pi, np.pi),
       rho=st.floats(0.1, 3.0), phi=st.floats(0.0, 2 * np.pi))
def test_rotation_composition(a, b, rho, phi):
    from oamid.lg import ModeGeometry
    geometry = ModeGeometry(w0=210.0, l_max=6)
    base = random_smooth_mask(3, geometry)
    once = rotate_mask(rotate_mask(base, a), b)
    direct = rotate_mask(base, a + b)
    assert np.isclose(once.value(rho, phi), direct.value(rho, phi), atol=1e-12)


def test_smooth_mask_range_and_determinism(geometry):
    m1 = random_smooth_mask(42, geometry)
    m2 = random_smooth_mask(42, geometry)
    rho, phi = _sample_grid()
    v = m1.value(rho, phi)
    assert np.all(np.abs(v) <= 1.0 + 1e-12)
    assert np.all(v.real >= -1e-12)
    assert np.allclose(v, m2.value(rho, phi))


def test_mask_value_reduces_phi(geometry, smooth):
    assert np.isclose(mask_value(smooth, 1.0, 7.0),
                      mask_value(smooth, 1.0, 7.0 - 2 * np.pi))


def _write_pgm(path, pixels):
    h, w = pixels.shape
    raw = (np.clip(pixels, 0, 1) * 255).astype(np.uint8)
    path.write_bytes(b"P5\n%d %d\n255\n" % (w, h) + raw.tobytes())


def test_raster_round_trip(tmp_path, geometry, smooth):
    raster = rasterize_mask(smooth, 129)
    n = 129
    _write_pgm(tmp_path / "mask.pgm", np.abs(raster.pixels))
    (tmp_path / "mask.pgm.json").write_text(json.dumps({
        "pixel_pitch_um": raster.pixel_pitch,
        "origin_px": [(n - 1) / 2, (n - 1) / 2],
        "w0_um": geometry.w0,
    }))
    loaded = load_raster(tmp_path / "mask.pgm", l_max=geometry.l_max)
    # away from the center, where the azimuthal variation is resolvable by
    # the pixel grid; the budget covers bilinear plus 8-bit quantization
    rho, phi = np.meshgrid(np.linspace(0.5, 3.0, 20), np.linspace(0, 2 * np.pi, 20))
    assert np.max(np.abs(loaded.value(rho, phi) - smooth.value(rho, phi))) < 0.03


def test_raster_missing_sidecar(tmp_path):
    _write_pgm(tmp_path / "m.pgm", np.ones((4, 4)))
    with pytest.raises(FileNotFoundError):
        load_raster(tmp_path / "m.pgm")

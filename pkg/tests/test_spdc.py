import numpy as np
import pytest

from oamid.spdc import NaturalSpectrum, load_spectrum, parametric_spectrum


def test_parametric_normalized_and_symmetric():
    spec = parametric_spectrum(0.7, 8)
    assert np.isclose(np.sum(np.abs(spec.coefficients) ** 2), 1.0)
    for l in range(9):
        assert np.isclose(spec.coefficient(l), spec.coefficient(-l))
    assert abs(spec.coefficient(0)) > abs(spec.coefficient(8))


def test_parametric_eta_bounds():
    for eta in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(ValueError):
            parametric_spectrum(eta, 4)


def test_spectrum_rejects_zero():
    with pytest.raises(ValueError):
        NaturalSpectrum(np.zeros(9), 4)


def test_spectrum_warns_on_asymmetry():
    coeffs = np.ones(9, dtype=complex)
    coeffs[0] = 0.01
    with pytest.warns(UserWarning):
        NaturalSpectrum(coeffs, 4)


def test_index_guard():
    spec = parametric_spectrum(0.5, 3)
    with pytest.raises(IndexError):
        spec.coefficient(4)


def test_json_round_trip():
    spec = parametric_spectrum(0.6, 5)
    back = NaturalSpectrum.from_json_dict(spec.to_json_dict())
    assert np.allclose(back.coefficients, spec.coefficients)


def test_load_spectrum_magnitude_rows(tmp_path):
    p = tmp_path / "spec.csv"
    p.write_text("# l, magnitude\n0,1.0\n1,0.5\n-1,0.5\n2,0.25\n-2,0.25\n")
    spec = load_spectrum(p, 3)
    assert np.isclose(np.sum(np.abs(spec.coefficients) ** 2), 1.0)
    assert spec.coefficient(3) == 0
    assert np.isclose(abs(spec.coefficient(1) / spec.coefficient(0)), 0.5)


def test_load_spectrum_complex_rows(tmp_path):
    p = tmp_path / "spec.csv"
    p.write_text("0,1.0,0.0\n1,0.0,0.5\n-1,0.0,0.5\n")
    spec = load_spectrum(p, 1)
    assert np.isclose(spec.coefficient(1).imag / abs(spec.coefficient(0)), 0.5)


def test_load_spectrum_rejects_duplicates(tmp_path):
    p = tmp_path / "spec.csv"
    p.write_text("0,1.0\n0,0.5\n")
    with pytest.raises(ValueError):
        load_spectrum(p, 2)


def test_load_spectrum_rejects_empty(tmp_path):
    p = tmp_path / "spec.csv"
    p.write_text("# only comments\n")
    with pytest.raises(ValueError):
        load_spectrum(p, 2)

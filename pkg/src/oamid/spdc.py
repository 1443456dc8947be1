"""Natural OAM spectrum of the down-conversion source.

The physical coefficients come from phase matching and the pump/collection
waist ratio; here they are either modeled parametrically as a geometric
decay C_l proportional to eta^|l| (a single-knob surrogate: downstream
identification divides C_l out, so its exact shape only affects
signal-to-noise) or loaded from a measured diagonal.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class NaturalSpectrum:
    """Normalized coefficients C_l for |l| <= l_max; sum |C_l|^2 = 1."""

    coefficients: np.ndarray
    l_max: int
    source: str = "unspecified"
    pump_oam: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=complex)
        if self.coefficients.shape != (2 * self.l_max + 1,):
            raise ValueError("coefficient vector must have length 2*l_max + 1")
        norm = np.linalg.norm(self.coefficients)
        if norm == 0:
            raise ValueError("spectrum is identically zero")
        self.coefficients = self.coefficients / norm
        mags = np.abs(self.coefficients)
        flipped = mags[::-1]
        scale = max(mags.max(), 1e-300)
        if np.any(np.abs(mags - flipped) > 0.05 * scale):
            warnings.warn("spectrum magnitudes are asymmetric in l beyond 5%", stacklevel=2)

    def index(self, l):
        if abs(l) > self.l_max:
            raise IndexError(f"|l| = {abs(l)} exceeds l_max = {self.l_max}")
        return l + self.l_max

    def coefficient(self, l):
        return self.coefficients[self.index(l)]

    def to_json_dict(self):
        return {
            "l_max": self.l_max,
            "source": self.source,
            "pump_oam": self.pump_oam,
            "coefficients": [[float(c.real), float(c.imag)] for c in self.coefficients],
        }

    @classmethod
    def from_json_dict(cls, data):
        coeffs = np.array([complex(re, im) for re, im in data["coefficients"]])
        return cls(coeffs, int(data["l_max"]), data.get("source", "json"),
                   int(data.get("pump_oam", 0)))


def parametric_spectrum(eta: float, l_max: int) -> NaturalSpectrum:
    """Geometric-decay spectrum C_l proportional to eta^|l|, normalized."""
    if not 0 < eta < 1:
        raise ValueError("eta must lie strictly between 0 and 1")
    l = np.arange(-l_max, l_max + 1)
    coeffs = eta ** np.abs(l)
    return NaturalSpectrum(coeffs.astype(complex), l_max,
                           source=f"parametric(eta={eta})", meta={"eta": eta})


def load_spectrum(path, l_max: int) -> NaturalSpectrum:
    """Load C_l from CSV rows (l, re, im) or (l, magnitude).

    Missing l within the truncation are filled with zero; the result is
    normalized. Duplicate l entries and all-zero files are rejected.
    """
    path = Path(path)
    coeffs = np.zeros(2 * l_max + 1, dtype=complex)
    seen = set()
    with path.open(newline="") as fh:
        for row in csv.reader(fh):
            row = [cell.strip() for cell in row if cell.strip()]
            if not row or row[0].startswith("#"):
                continue
            l = int(row[0])
            if l in seen:
                raise ValueError(f"duplicate entry for l = {l} in {path}")
            seen.add(l)
            if abs(l) > l_max:
                continue
            if len(row) >= 3:
                coeffs[l + l_max] = complex(float(row[1]), float(row[2]))
            elif len(row) == 2:
                coeffs[l + l_max] = float(row[1])
            else:
                raise ValueError(f"malformed row for l = {l} in {path}")
    if not seen:
        raise ValueError(f"no spectrum rows found in {path}")
    return NaturalSpectrum(coeffs, l_max, source=f"file({path})")

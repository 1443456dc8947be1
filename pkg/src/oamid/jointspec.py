"""Two-photon joint OAM spectrum after interaction with a target.

With a Gaussian pump the source emits pairs |-l> |l>, so the no-object
spectrum lives on the anti-diagonal l_r + l_o = 0. With the reference-arm
photon carrying l_r, the object-arm photon entered the target with -l_r and
the detected amplitude is

    P(l_r, l_o) = C_{-l_r} * A_{l_o, -l_r}.

Coincidence rates are |P|^2. The apparatus convention that mirrors the sign
of l_r (mapping the no-object pattern onto the main diagonal) is kept as an
explicit, invertible ``parity_flip`` flag rather than being baked into the
storage order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from oamid.projection import OperatorMatrix
from oamid.spdc import NaturalSpectrum


@dataclass
class JointSpectrum:
    """Complex amplitudes P(l_r, l_o) over |l_r|, |l_o| <= l_max."""

    amplitudes: np.ndarray
    l_max: int
    pump_oam: int = 0
    parity_flip: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        n = 2 * self.l_max + 1
        if self.amplitudes.shape != (n, n):
            raise ValueError(f"amplitudes must be {(n, n)}")

    @property
    def rates(self):
        """Unnormalized coincidence weights |P|^2."""
        return np.abs(self.amplitudes) ** 2

    def index(self, l):
        if abs(l) > self.l_max:
            raise IndexError(f"|l| = {abs(l)} exceeds l_max = {self.l_max}")
        return l + self.l_max

    def indices(self):
        return range(-self.l_max, self.l_max + 1)

    def total_rate(self):
        return float(self.rates.sum())

    def to_json_dict(self):
        return {
            "l_max": self.l_max,
            "l_p": self.pump_oam,
            "parity_flip": self.parity_flip,
            "amplitudes": [[float(z.real), float(z.imag)] for z in self.amplitudes.ravel()],
            "rates": self.rates.ravel().tolist(),
        }

    @classmethod
    def from_json_dict(cls, data):
        l_max = int(data["l_max"])
        n = 2 * l_max + 1
        amp = np.array([complex(re, im) for re, im in data["amplitudes"]]).reshape(n, n)
        return cls(amp, l_max, int(data.get("l_p", 0)), bool(data.get("parity_flip", False)))

    @classmethod
    def from_rates(cls, rates, l_max, pump_oam=0, parity_flip=False):
        """Phase-blind spectrum from measured rates (amplitudes = sqrt(rate))."""
        rates = np.asarray(rates, dtype=float)
        if np.any(rates < 0):
            raise ValueError("rates must be nonnegative")
        return cls(np.sqrt(rates).astype(complex), l_max, pump_oam, parity_flip)

    def rates_csv(self):
        """Heatmap grid of rates: rows l_r, columns l_o."""
        header = "l_r\\l_o," + ",".join(str(l) for l in self.indices())
        lines = [header]
        r = self.rates
        for l_r in self.indices():
            lines.append(str(l_r) + "," + ",".join(f"{v:.12g}" for v in r[self.index(l_r)]))
        return "\n".join(lines) + "\n"


def synthesize(spectrum: NaturalSpectrum, matrix: OperatorMatrix) -> JointSpectrum:
    """Joint spectrum of the source seen through the object matrix."""
    if spectrum.l_max != matrix.l_max:
        raise ValueError("spectrum and matrix truncation orders differ")
    c_rev = spectrum.coefficients[::-1]  # c_rev[index(l_r)] = C_{-l_r}
    amp = c_rev[:, None] * matrix.entries[:, ::-1].T
    return JointSpectrum(amp, matrix.l_max, spectrum.pump_oam,
                         meta={"source": spectrum.source})


def apply_parity_flip(js: JointSpectrum) -> JointSpectrum:
    """Reindex l_r -> -l_r (involution); toggles the parity_flip flag."""
    return JointSpectrum(js.amplitudes[::-1].copy(), js.l_max, js.pump_oam,
                         not js.parity_flip, dict(js.meta))


def _physical(js: JointSpectrum) -> JointSpectrum:
    return apply_parity_flip(js) if js.parity_flip else js


def cross_section(js: JointSpectrum, l_r_fixed: int):
    """Rates along l_o at a fixed reference index (current orientation)."""
    return js.rates[js.index(l_r_fixed)].copy()


def diagonal_sums(js: JointSpectrum, pump_oam: int | None = None) -> dict:
    """Total rate per object harmonic m = l_o + l_r - l_p.

    The sum is taken in the physical (unflipped) convention.
    """
    phys = _physical(js)
    l_p = phys.pump_oam if pump_oam is None else pump_oam
    l = np.arange(-phys.l_max, phys.l_max + 1)
    m_grid = l[:, None] + l[None, :] - l_p
    rates = phys.rates
    sums = {m: 0.0 for m in range(-2 * phys.l_max - abs(l_p), 2 * phys.l_max + abs(l_p) + 1)}
    for m in np.unique(m_grid):
        sums[int(m)] = float(rates[m_grid == m].sum())
    return sums


def isolate_object(js: JointSpectrum, spectrum: NaturalSpectrum, floor: float) -> OperatorMatrix:
    """Invert P = C * A where the natural spectrum is large enough to divide.

    Entries with |C_l| < floor are returned as zero but flagged invalid in the
    matrix's validity mask (missing, not measured-zero).
    """
    if floor <= 0:
        raise ValueError("floor must be positive")
    if spectrum.l_max != js.l_max:
        raise ValueError("spectrum and joint spectrum truncation orders differ")
    phys = _physical(js)
    l_max = js.l_max
    n = 2 * l_max + 1
    usable = np.abs(spectrum.coefficients) >= floor
    if not np.any(usable):
        raise ValueError("all natural-spectrum coefficients fall below the floor")
    entries = np.zeros((n, n), dtype=complex)
    valid = np.zeros((n, n), dtype=bool)
    for l in range(-l_max, l_max + 1):
        col = l + l_max
        if not usable[col]:
            continue
        # A_hat[k, l] = P(-l, k) / C_l
        entries[:, col] = phys.amplitudes[phys.index(-l), :] / spectrum.coefficients[col]
        valid[:, col] = True
    return OperatorMatrix(entries, l_max, {"isolated": True, "floor": floor}, valid)

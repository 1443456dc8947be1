"""Operator matrix elements of a mask in the truncated LG basis.

The matrix element for azimuthal indices (k, l) factorizes into a radial
moment followed by an azimuthal Fourier coefficient:

    R_kl(phi) = (2 / sqrt(|k|! |l|!)) * integral rho^(|k|+|l|+1) e^(-rho^2)
                A(rho, phi) drho
    A_kl      = (1/2pi) * integral e^(-i m phi) R_kl(phi) dphi,   m = k - l.

The radial moment depends on (k, l) only through s = |k| + |l|, so the whole
matrix needs one radial table per s, and the Fourier stage is a single FFT
per s. Masks that are piecewise constant along rays supply the radial table
in closed form; everything else goes through generalized Gauss-Laguerre
quadrature with node doubling until convergence.

Azimuthal sampling density follows the mask's smoothness class: equispaced
sampling is spectrally accurate for smooth profiles, while profiles with
slope breaks or (grid-aligned) jumps converge like 1/N^2 and therefore get a
much denser grid.

All functions are pure; matrix assembly is deterministic regardless of how
callers parallelize over masks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from oamid.masks import JUMP, KINK, SMOOTH, ObjectMask

N_PHI_DEFAULTS = {SMOOTH: 256, KINK: 1 << 16, JUMP: 1 << 16}

_RADIAL_NODES_START = 64
_RADIAL_NODES_MAX = 1024
_RADIAL_RTOL = 1e-10
_RADIAL_RHO_MAX = 8.0  # exp(-64) truncation, below double noise


class QuadratureError(RuntimeError):
    """Radial quadrature failed to converge within the node budget."""


def _validate_n_phi(n_phi, l_max):
    n_phi = int(n_phi)
    if n_phi & (n_phi - 1) != 0:
        raise ValueError("n_phi must be a power of two")
    if n_phi < 4 * l_max + 4:
        raise ValueError(f"n_phi = {n_phi} under-resolves harmonics up to 2*l_max = {2 * l_max}")
    return n_phi


def default_n_phi(mask: ObjectMask, l_max: int):
    return max(N_PHI_DEFAULTS[mask.smoothness], 4 * l_max + 4)


def _pair_prefactor(k, l):
    """2 / sqrt(|k|! |l|!), in log space."""
    return 2.0 * np.exp(-0.5 * (gammaln(abs(k) + 1.0) + gammaln(abs(l) + 1.0)))


@lru_cache(maxsize=64)
def _radial_nodes(n):
    """Gauss-Legendre rule on rho in [0, _RADIAL_RHO_MAX]."""
    x, w = np.polynomial.legendre.leggauss(int(n))
    rho = 0.5 * _RADIAL_RHO_MAX * (x + 1.0)
    return rho, 0.5 * _RADIAL_RHO_MAX * w


def _generic_radial_table(mask: ObjectMask, phi, s_values):
    """Radial moments integral rho^(s+1) e^(-rho^2) A drho by Gauss-Legendre.

    The integrand is a polynomial times a Gaussian times the mask, so the
    compact-domain rule converges exponentially for smooth masks. The node
    count doubles until the table stabilizes; QuadratureError (naming the
    worst angle) if the budget is exhausted.
    """
    phi = np.asarray(phi, dtype=float)
    s_values = np.asarray(s_values)
    prev = None
    n = _RADIAL_NODES_START
    meta = {}
    table = None
    while n <= _RADIAL_NODES_MAX:
        rho, w = _radial_nodes(n)
        vals = np.asarray(mask.value(rho[None, :], phi[:, None]), dtype=complex)
        weighted = vals * (w * np.exp(-rho**2))[None, :]
        powers = rho[:, None] ** (np.asarray(s_values, dtype=float) + 1.0)  # (n, n_s)
        table = weighted @ powers
        if prev is not None:
            err = np.abs(table - prev)
            scale = max(np.abs(table).max(), 1e-300)
            if err.max() <= _RADIAL_RTOL * scale:
                meta.update(radial_nodes=n, radial_update=float(err.max()))
                return table, meta
        prev = table
        n *= 2
    err = np.abs(table - prev)
    worst = int(np.argmax(err.max(axis=1)))
    raise QuadratureError(
        f"radial quadrature did not converge at {_RADIAL_NODES_MAX} nodes; "
        f"worst angle phi = {phi[worst]:.6f}"
    )


def radial_table(mask: ObjectMask, phi, s_values):
    """Raw radial moments I_s(phi) (no prefactor) plus quadrature metadata."""
    table = mask.radial_integral_table(phi, s_values)
    if table is not None:
        return np.asarray(table, dtype=complex), {"radial_method": "closed-form"}
    table, meta = _generic_radial_table(mask, phi, s_values)
    meta["radial_method"] = "gauss-laguerre"
    return table, meta


@dataclass
class AzimuthalProfile:
    """Samples of R_kl on the uniform grid phi_j = 2 pi j / n_phi."""

    values: np.ndarray
    k: int
    l: int

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        n = self.values.size
        if n & (n - 1) != 0 or n < 4:
            raise ValueError("profile length must be a power of two >= 4")

    @property
    def n_phi(self):
        return self.values.size


@dataclass
class OperatorMatrix:
    """Truncated complex matrix A_kl with |k|, |l| <= l_max.

    ``entries[i, j]`` holds A_{k, l} with k = i - l_max, l = j - l_max.
    ``valid`` (optional) marks entries actually determined, used by the
    joint-spectrum inversion when some natural-spectrum coefficients are too
    small to divide by.
    """

    entries: np.ndarray
    l_max: int
    quadrature_meta: dict = field(default_factory=dict)
    valid: np.ndarray | None = None

    REPORT_FLUSH = 1e-12

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)
        n = 2 * self.l_max + 1
        if self.entries.shape != (n, n):
            raise ValueError(f"entries must be {(n, n)}, got {self.entries.shape}")
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("matrix entries must be finite")

    def index(self, l):
        if abs(l) > self.l_max:
            raise IndexError(f"|l| = {abs(l)} exceeds l_max = {self.l_max}")
        return l + self.l_max

    def entry(self, k, l):
        return self.entries[self.index(k), self.index(l)]

    def indices(self):
        return range(-self.l_max, self.l_max + 1)

    def report_entries(self):
        """Copy with sub-1e-12 moduli flushed to exact zero (for readable tables)."""
        out = self.entries.copy()
        out[np.abs(out) < self.REPORT_FLUSH] = 0.0
        return out

    def to_json_dict(self):
        flat = self.entries.ravel()
        return {
            "l_max": self.l_max,
            "entries": [[float(z.real), float(z.imag)] for z in flat],
            "quadrature_meta": self.quadrature_meta,
            "valid": None if self.valid is None else self.valid.ravel().astype(int).tolist(),
        }

    @classmethod
    def from_json_dict(cls, data):
        l_max = int(data["l_max"])
        n = 2 * l_max + 1
        flat = np.array([complex(re, im) for re, im in data["entries"]])
        valid = data.get("valid")
        if valid is not None:
            valid = np.asarray(valid, dtype=bool).reshape(n, n)
        return cls(flat.reshape(n, n), l_max, dict(data.get("quadrature_meta", {})), valid)

    def rates_csv(self):
        """CSV text of |A_kl|^2 (reported entries), rows k, columns l."""
        mags = np.abs(self.report_entries()) ** 2
        header = "k\\l," + ",".join(str(l) for l in self.indices())
        lines = [header]
        for k in self.indices():
            row = mags[self.index(k)]
            lines.append(str(k) + "," + ",".join(f"{v:.12g}" for v in row))
        return "\n".join(lines) + "\n"


def radial_profile(mask: ObjectMask, k: int, l: int, n_phi: int) -> AzimuthalProfile:
    """Sample R_kl on the uniform azimuthal grid of size n_phi."""
    n_phi = _validate_n_phi(n_phi, max(abs(k), abs(l), 1))
    phi = np.arange(n_phi) * (2.0 * np.pi / n_phi)
    s = abs(k) + abs(l)
    table, _ = radial_table(mask, phi, np.array([s]))
    return AzimuthalProfile(_pair_prefactor(k, l) * table[:, 0], k, l)


def matrix_from_profiles(profiles, l_max: int, quadrature_meta=None) -> OperatorMatrix:
    """Assemble A from per-pair azimuthal profiles via the FFT.

    ``profiles`` maps (k, l) to an AzimuthalProfile; every pair within the
    truncation must be present. The m = k - l coefficient is read from the
    forward FFT with the 1/n_phi factor; negative m wraps to the
    conjugate-symmetric bin.
    """
    n = 2 * l_max + 1
    entries = np.zeros((n, n), dtype=complex)
    for k in range(-l_max, l_max + 1):
        for l in range(-l_max, l_max + 1):
            try:
                prof = profiles[(k, l)]
            except KeyError:
                raise ValueError(f"missing profile for pair ({k}, {l})")
            m = k - l
            if abs(m) > prof.n_phi // 2 - 1:
                raise ValueError(
                    f"harmonic m = {m} aliases on a grid of {prof.n_phi} samples"
                )
            coeffs = np.fft.fft(prof.values) / prof.n_phi
            entries[k + l_max, l + l_max] = coeffs[m % prof.n_phi]
    return OperatorMatrix(entries, l_max, quadrature_meta or {})


def operator_matrix(mask: ObjectMask, l_max: int, n_phi: int | None = None) -> OperatorMatrix:
    """Fast factorized path: one radial table per s, one FFT per s."""
    if l_max < 1:
        raise ValueError("l_max must be at least 1")
    if n_phi is None:
        n_phi = default_n_phi(mask, l_max)
    n_phi = _validate_n_phi(n_phi, l_max)
    phi = np.arange(n_phi) * (2.0 * np.pi / n_phi)
    s_values = np.arange(2 * l_max + 1)
    table, meta = radial_table(mask, phi, s_values)
    coeffs = np.fft.fft(table, axis=0) / n_phi  # (n_phi, n_s)
    n = 2 * l_max + 1
    entries = np.zeros((n, n), dtype=complex)
    for k in range(-l_max, l_max + 1):
        for l in range(-l_max, l_max + 1):
            m = k - l
            s = abs(k) + abs(l)
            entries[k + l_max, l + l_max] = _pair_prefactor(k, l) * coeffs[m % n_phi, s]
    meta = dict(meta)
    meta["n_phi"] = n_phi
    return OperatorMatrix(entries, l_max, meta)

"""Laguerre-Gauss mode mathematics for the p = 0 subspace.

All radial work is done in the dimensionless coordinate rho = sqrt(2) r / w0,
so a p = 0 mode of azimuthal index l reads

    u_l(rho, phi) = N_l * rho^|l| * exp(-rho^2 / 2) * exp(i l phi),
    N_l = sqrt(2 / (pi |l|!)).

With the physical area element r dr dphi = (w0^2 / 2) rho drho dphi this basis
is orthonormal; in rho coordinates the inner product therefore carries a
factor 1/2:

    <k|l> = (1/2) * integral u_k^* u_l rho drho dphi = delta_kl.

Normalization constants are evaluated in log space so large |l| never
overflows a factorial.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

# Largest |l| accepted by mode_amplitude. Beyond this, rho^|l| itself
# under/overflows double precision long before the normalization does.
MAX_AZIMUTHAL_ORDER = 170


def log_factorial(n):
    """ln(n!) for nonnegative integer n (scalar or array), via log-gamma."""
    n = np.asarray(n)
    if np.any(n < 0):
        raise ValueError("log_factorial requires n >= 0")
    out = gammaln(n + 1.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ModeGeometry:
    """Beam-waist scale and truncation order of the working LG basis.

    w0 is in the physical length unit used for masks (e.g. micrometers);
    l_max is the largest |l| kept in truncated operators and spectra.
    """

    w0: float
    l_max: int = 12

    def __post_init__(self):
        if self.w0 <= 0:
            raise ValueError("w0 must be positive")
        if self.l_max < 1:
            raise ValueError("l_max must be at least 1")

    def to_rho(self, length):
        """Convert a physical length to the dimensionless radial coordinate."""
        return np.sqrt(2.0) * np.asarray(length) / self.w0

    def to_physical(self, rho):
        """Convert a dimensionless radius back to physical units."""
        return np.asarray(rho) * self.w0 / np.sqrt(2.0)


def check_index(l, l_max=None):
    """Validate an azimuthal index against the overflow guard and truncation."""
    l = int(l)
    if abs(l) > MAX_AZIMUTHAL_ORDER:
        raise ValueError(f"|l| = {abs(l)} exceeds the supported order {MAX_AZIMUTHAL_ORDER}")
    if l_max is not None and abs(l) > l_max:
        raise ValueError(f"|l| = {abs(l)} exceeds the truncation order {l_max}")
    return l


def mode_norm(l):
    """Normalization constant N_l = sqrt(2 / (pi |l|!)), computed in log space."""
    l = check_index(l)
    return float(np.exp(0.5 * (np.log(2.0 / np.pi) - gammaln(abs(l) + 1.0))))


def mode_amplitude(l, rho, phi):
    """Complex amplitude of the p = 0 mode of index l at (rho, phi).

    rho must be nonnegative; rho and phi broadcast together.
    """
    l = check_index(l)
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("rho must be nonnegative")
    phi = np.asarray(phi, dtype=float)
    # rho^|l| in log space, with the rho = 0 column handled separately
    a = abs(l)
    with np.errstate(divide="ignore"):
        log_mag = 0.5 * (np.log(2.0 / np.pi) - gammaln(a + 1.0)) + a * np.log(
            np.where(rho > 0, rho, 1.0)
        ) - 0.5 * rho**2
    mag = np.exp(log_mag)
    if a > 0:
        mag = np.where(rho > 0, mag, 0.0)
    out = mag * np.exp(1j * l * phi)
    if out.ndim == 0:
        return complex(out)
    return out


def ring_radius(k, l, geometry: ModeGeometry):
    """Radius (physical units) where the (k, l) projection weight peaks.

    The radial weight rho^(|k|+|l|+1) exp(-rho^2) is maximal at
    rho = sqrt((|k|+|l|+1)/2); the conventional ring radius reported here is
    w0 * sqrt((|k|+|l|)/2), the peak of the squared-modulus annulus of the
    order |k|+|l| mode.
    """
    k = check_index(k)
    l = check_index(l)
    return geometry.w0 * np.sqrt((abs(k) + abs(l)) / 2.0)

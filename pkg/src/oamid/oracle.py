"""Brute-force verification path for operator matrices.

Evaluates the full two-dimensional projection integral directly, with no
radial/azimuthal factorization and no FFT, and compares it against the fast
path. Grids are fixed (not adaptive) for reproducibility, but both the
radial and azimuthal domains are split at the discontinuity loci a mask
reports, so piecewise targets are integrated to quadrature accuracy rather
than being limited by their edges.

Deliberately slow; meant for tests and the oracle-check command.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from oamid.masks import ObjectMask
from oamid.projection import OperatorMatrix, operator_matrix

RHO_MAX = 8.0  # exp(-64) tail is far below double precision noise

_DEFAULT_N_RADIAL = 512
_DEFAULT_N_PHI = 4096
_FACTORIZATION_TOL = 1e-6
_SELECTION_TOL = 1e-8


@lru_cache(maxsize=128)
def _leggauss(n):
    return np.polynomial.legendre.leggauss(int(n))


def _segment_nodes(edges, total_nodes, min_per_segment):
    """Gauss-Legendre nodes/weights on consecutive [edges[i], edges[i+1]]."""
    lengths = np.diff(edges)
    counts = np.maximum(min_per_segment,
                        np.ceil(total_nodes * lengths / lengths.sum()).astype(int))
    xs, ws = [], []
    for (a, b), n in zip(zip(edges[:-1], edges[1:]), counts):
        x, w = _leggauss(int(n))
        xs.append(0.5 * (b - a) * x + 0.5 * (a + b))
        ws.append(0.5 * (b - a) * w)
    return np.concatenate(xs), np.concatenate(ws)


def _phi_rule(mask: ObjectMask, n_phi):
    bps = np.mod(np.asarray(mask.phi_breakpoints(), dtype=float), 2.0 * np.pi)
    bps = np.unique(bps)
    if bps.size == 0:
        phi = np.arange(n_phi) * (2.0 * np.pi / n_phi)
        w = np.full(n_phi, 2.0 * np.pi / n_phi)
        return phi, w
    edges = np.concatenate([bps, [bps[0] + 2.0 * np.pi]])
    return _segment_nodes(edges, n_phi, 16)


def _radial_rule(mask: ObjectMask, phi, n_radial):
    bps = np.asarray(mask.radial_breakpoints(phi), dtype=float)
    bps = np.unique(bps[(bps > 0) & (bps < RHO_MAX)])
    edges = np.concatenate([[0.0], bps, [RHO_MAX]])
    per_segment = max(32, n_radial // max(1, edges.size - 1))
    return _segment_nodes(edges, n_radial, per_segment)


def matrix_oracle(mask: ObjectMask, l_max: int,
                  n_radial: int = _DEFAULT_N_RADIAL,
                  n_phi: int = _DEFAULT_N_PHI) -> OperatorMatrix:
    """Direct tensor-product evaluation of every A_kl, |k|, |l| <= l_max."""
    if l_max > 8:
        raise ValueError("oracle is restricted to l_max <= 8")
    phi_nodes, phi_weights = _phi_rule(mask, n_phi)
    s_values = np.arange(2 * l_max + 1)
    m_values = np.arange(-2 * l_max, 2 * l_max + 1)
    accum = np.zeros((m_values.size, s_values.size), dtype=complex)
    for phi, w_phi in zip(phi_nodes, phi_weights):
        rho, w_rho = _radial_rule(mask, phi, n_radial)
        vals = np.asarray(mask.value(rho, np.full(rho.shape, phi)), dtype=complex)
        weighted = w_rho * np.exp(-rho**2) * vals
        radial = (rho[:, None] ** (s_values + 1) * weighted[:, None]).sum(axis=0)
        accum += np.exp(-1j * m_values * phi)[:, None] * (w_phi * radial)[None, :]
    n = 2 * l_max + 1
    entries = np.zeros((n, n), dtype=complex)
    for k in range(-l_max, l_max + 1):
        for l in range(-l_max, l_max + 1):
            pref = (2.0 / np.pi) * np.exp(-0.5 * (gammaln(abs(k) + 1.0) + gammaln(abs(l) + 1.0)))
            s = abs(k) + abs(l)
            m = k - l
            entries[k + l_max, l + l_max] = 0.5 * pref * accum[m + 2 * l_max, s]
    meta = {"method": "direct-2d", "n_radial": n_radial, "n_phi": n_phi}
    return OperatorMatrix(entries, l_max, meta)


@dataclass
class OracleReport:
    """Entrywise comparison of the fast path against the direct integral."""

    max_abs_error: float
    worst_entry: tuple
    grids: dict = field(default_factory=dict)
    passed: bool = False
    tolerance: float = _FACTORIZATION_TOL

    def to_json_dict(self):
        return {
            "max_abs_error": self.max_abs_error,
            "worst_entry": list(self.worst_entry),
            "grids": self.grids,
            "passed": bool(self.passed),
            "tolerance": self.tolerance,
        }


def check_factorization(mask: ObjectMask, l_max: int,
                        tolerance: float = _FACTORIZATION_TOL) -> OracleReport:
    """Compare the factorized fast path with the direct integral, entrywise."""
    if l_max > 6:
        raise ValueError("factorization check is restricted to l_max <= 6")
    fast = operator_matrix(mask, l_max)
    direct = matrix_oracle(mask, l_max)
    err = np.abs(fast.entries - direct.entries)
    worst_flat = int(np.argmax(err))
    i, j = np.unravel_index(worst_flat, err.shape)
    report = OracleReport(
        max_abs_error=float(err[i, j]),
        worst_entry=(int(i - l_max), int(j - l_max)),
        grids={"fast": fast.quadrature_meta, "oracle": direct.quadrature_meta},
        tolerance=tolerance,
    )
    report.passed = report.max_abs_error < tolerance
    return report


def check_selection_rule(mask: ObjectMask, m: int, l_max: int = 6,
                         tolerance: float = _SELECTION_TOL) -> bool:
    """True iff every entry forbidden by m-fold symmetry is below tolerance."""
    if m < 1:
        raise ValueError("m must be a positive integer")
    matrix = operator_matrix(mask, l_max)
    k = np.arange(-l_max, l_max + 1)
    diff = k[:, None] - k[None, :]
    forbidden = np.mod(diff, m) != 0
    return bool(np.all(np.abs(matrix.entries[forbidden]) < tolerance))

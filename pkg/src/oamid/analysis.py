"""Object signatures and library-based identification.

Signatures are read off the joint spectrum by summing coincidence rates per
object harmonic m = l_o + l_r - l_p. The +m and -m families are merged for
reporting (real amplitude masks populate them equally); m = 0 is excluded
from the dominant-symmetry search because the conservation diagonal mixes
the source spectrum with the object's DC component.

Identification scores Poisson log-likelihoods of the measured counts under
each candidate's expected rates, restricted to the planned cells. Rates are
|P|^2, so the scores (and hence the decision) are unchanged by any rotation
of the target.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from oamid.counting import CountTable, MeasurementPlan
from oamid.jointspec import JointSpectrum, apply_parity_flip, synthesize
from oamid.spdc import NaturalSpectrum

DEFAULT_THRESHOLD = 0.05


def _physical_rates(source, pump_oam):
    """(rates matrix in physical orientation, l_max, l_p) for either input type."""
    if isinstance(source, JointSpectrum):
        js = apply_parity_flip(source) if source.parity_flip else source
        l_p = js.pump_oam if pump_oam is None else pump_oam
        return js.rates, js.l_max, l_p
    if isinstance(source, CountTable):
        rates = source.mean.astype(float)
        if source.meta.get("parity_flip"):
            rates = rates[::-1]
        l_p = source.meta.get("l_p", 0) if pump_oam is None else pump_oam
        return rates, source.l_max, l_p
    raise TypeError(f"unsupported input {type(source).__name__}")


def _family_sums(rates, l_max, l_p):
    """Rate per m = l_o + l_r - l_p, and the +-m merged families."""
    l = np.arange(-l_max, l_max + 1)
    m_grid = l[:, None] + l[None, :] - l_p
    per_m = {}
    for m in np.unique(m_grid):
        per_m[int(m)] = float(rates[m_grid == m].sum())
    merged = {}
    for m, v in per_m.items():
        merged[abs(m)] = merged.get(abs(m), 0.0) + (v if m != 0 else 0.0)
    merged[0] = per_m.get(0, 0.0)
    return per_m, merged


@dataclass
class SymmetryReport:
    """Harmonic content of a joint spectrum or count table."""

    diagonal_power: dict  # m -> fraction of total rate (signed m)
    dominant_m: int | None
    harmonics: list  # (n * dominant_m, merged fraction) above threshold
    subsymmetries: list  # (m, merged fraction) above threshold, m not a harmonic
    cross_section_ratios: dict  # (m_a, m_b) -> ratio at the chosen cross-section
    threshold: float

    def to_json_dict(self):
        return {
            "diagonal_power": {str(m): v for m, v in sorted(self.diagonal_power.items())},
            "dominant_m": self.dominant_m,
            "harmonics": [[int(m), float(f)] for m, f in self.harmonics],
            "subsymmetries": [[int(m), float(f)] for m, f in self.subsymmetries],
            "cross_section_ratios": {f"{a}:{b}": v for (a, b), v in self.cross_section_ratios.items()},
            "threshold": self.threshold,
        }

    def to_text(self):
        lines = ["symmetry report", f"  dominant m : {self.dominant_m}"]
        if self.harmonics:
            lines.append("  harmonics  : " + ", ".join(f"m={m} ({f:.3f})" for m, f in self.harmonics))
        if self.subsymmetries:
            lines.append("  subsymm.   : " + ", ".join(f"m={m} ({f:.3f})" for m, f in self.subsymmetries))
        for (a, b), v in self.cross_section_ratios.items():
            lines.append(f"  ratio {a}:{b} = {v:.3f}")
        return "\n".join(lines)


def symmetry_report(source, pump_oam: int | None = None,
                    threshold: float = DEFAULT_THRESHOLD,
                    ratio_pairs=(), cross_section_at: int = 0) -> SymmetryReport:
    """Extract dominant symmetry, harmonics and subsymmetries.

    ``ratio_pairs`` requests rate ratios (m_a vs m_b, both signs merged)
    within the cross-section at l_r = ``cross_section_at``.
    """
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    rates, l_max, l_p = _physical_rates(source, pump_oam)
    total = rates.sum()
    if total <= 0:
        raise ValueError("input carries no rate")
    per_m, merged = _family_sums(rates, l_max, l_p)
    fractions = {m: v / total for m, v in per_m.items()}
    merged_frac = {m: v / total for m, v in merged.items()}
    nonzero = {m: f for m, f in merged_frac.items() if m > 0}
    dominant = None
    if nonzero and max(nonzero.values()) > 1e-12:
        peak = max(nonzero.values())
        dominant = min(m for m, f in nonzero.items() if f == peak)
    harmonics = []
    subsymmetries = []
    if dominant is not None:
        for m in sorted(nonzero):
            if nonzero[m] < threshold:
                continue
            if m % dominant == 0:
                harmonics.append((m, nonzero[m]))
            else:
                subsymmetries.append((m, nonzero[m]))
    ratios = {}
    row = rates[cross_section_at + l_max]
    for m_a, m_b in ratio_pairs:
        # at l_r = cross_section_at the harmonic m sits at l_o = m + l_p - l_r
        def family_rate(m):
            out = 0.0
            for mm in ({m, -m} if m != 0 else {0}):
                lo = mm + l_p - cross_section_at
                if abs(lo) <= l_max:
                    out += row[lo + l_max]
            return out
        denom = family_rate(m_b)
        ratios[(m_a, m_b)] = float("inf") if denom == 0 else family_rate(m_a) / denom
    return SymmetryReport(fractions, dominant, harmonics, subsymmetries, ratios, threshold)


def compare_region_sizes(js: JointSpectrum, m_a: int, m_b: int) -> dict:
    """Full-diagonal power comparison between two symmetry families.

    Larger family power is read as a larger symmetric-region contribution;
    this is a heuristic area proxy, flagged as such in the output.
    """
    if m_a == m_b:
        raise ValueError("families must differ")
    rates, l_max, l_p = _physical_rates(js, None)
    _, merged = _family_sums(rates, l_max, l_p)
    p_a = merged.get(abs(m_a), 0.0)
    p_b = merged.get(abs(m_b), 0.0)
    if p_a == 0 and p_b == 0:
        raise ValueError(f"no rate in either family m={m_a} or m={m_b}")
    return {
        "m_a": m_a,
        "m_b": m_b,
        "power_a": p_a,
        "power_b": p_b,
        "larger": m_a if p_a >= p_b else m_b,
        "ratio_a_over_b": float("inf") if p_b == 0 else p_a / p_b,
        "note": "heuristic proxy: diagonal power read as symmetric-region size",
    }


@dataclass
class IdentificationResult:
    """Log-likelihood scores per candidate and the posterior winner."""

    scores: dict  # candidate id -> log-likelihood (constant terms dropped)
    best: str | None
    confidence: float  # posterior probability of best under a uniform prior
    anomaly: bool = False
    meta: dict = field(default_factory=dict)

    def to_json_dict(self):
        return {
            "scores": {k: (None if np.isneginf(v) else float(v)) for k, v in self.scores.items()},
            "best": self.best,
            "confidence": self.confidence,
            "anomaly": self.anomaly,
            "meta": self.meta,
        }

    def to_text(self):
        lines = ["identification result"]
        for cid, s in sorted(self.scores.items(), key=lambda kv: -kv[1]):
            mark = " <= best" if cid == self.best else ""
            lines.append(f"  {cid:24s} loglik = {s:.3f}{mark}")
        lines.append(f"  confidence = {self.confidence:.4f}")
        if self.anomaly:
            lines.append("  ANOMALY: observed counts impossible under every candidate")
        return "\n".join(lines)


def identify(measured: CountTable, plan: MeasurementPlan, candidates,
             spectrum: NaturalSpectrum, expected_scale: float) -> IdentificationResult:
    """Poisson log-likelihood identification on the planned cells only.

    ``candidates`` is a list of (id, OperatorMatrix); ``expected_scale`` is
    rate_scale * integration_time per run. Counts are pooled over runs. The
    x! term is constant across candidates and omitted.
    """
    if not candidates:
        raise ValueError("need at least one candidate")
    if expected_scale <= 0:
        raise ValueError("expected_scale must be positive")
    flip = bool(measured.meta.get("parity_flip"))
    scores = {}
    for cid, matrix in candidates:
        js = synthesize(spectrum, matrix)
        if flip:
            js = apply_parity_flip(js)
        rates = js.rates
        loglik = 0.0
        for l_r, l_o in plan.cells:
            i, j = measured.index(l_r), measured.index(l_o)
            if not measured.measured[i, j]:
                raise ValueError(f"plan cell ({l_r}, {l_o}) was not measured")
            x = int(measured.counts[:, i, j].sum())
            mu = expected_scale * measured.runs * rates[i, j]
            if mu <= 0:
                if x > 0:
                    loglik = -np.inf
                    break
                continue
            loglik += x * np.log(mu) - mu
        scores[cid] = loglik
    values = np.array(list(scores.values()))
    if np.all(np.isneginf(values)):
        return IdentificationResult(scores, None, 0.0, anomaly=True,
                                    meta={"cells": len(plan.cells)})
    ids = list(scores)
    best_idx = int(np.argmax(values))
    confidence = float(np.exp(values[best_idx] - logsumexp(values[np.isfinite(values)])))
    return IdentificationResult(scores, ids[best_idx], confidence,
                                meta={"cells": len(plan.cells)})

"""Coincidence-counting simulation and measurement scheduling.

Counts are Poisson with mean rate_scale * time * rate; there is no
accidental-coincidence background and no dark counts (the additive
background below is a stub kept at zero). rate_scale folds pump power,
coupling and detector efficiency into one constant. Each (cell, run)
derives its own random stream from (seed, l_r, l_o, run), so results are
bit-for-bit reproducible and independent of evaluation order.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from oamid.jointspec import JointSpectrum, synthesize
from oamid.spdc import NaturalSpectrum

BACKGROUND_RATE = 0.0  # counts/sec added to every cell; kept at zero


@dataclass(frozen=True)
class MeasurementPlan:
    """Ordered distinct cells (l_r, l_o) to measure, within a budget."""

    cells: tuple
    budget: int

    def __post_init__(self):
        if len(set(self.cells)) != len(self.cells):
            raise ValueError("plan cells must be distinct")
        if len(self.cells) > self.budget:
            raise ValueError("plan exceeds its budget")

    def summary(self, integration_time: float, runs: int) -> dict:
        """Sequential schedule: one projection setting per cell per run."""
        return {
            "cells": len(self.cells),
            "budget": self.budget,
            "runs": runs,
            "integration_time_s": integration_time,
            "total_time_s": len(self.cells) * integration_time * runs,
        }


@dataclass
class CountTable:
    """Per-run integer counts with mean and standard deviation over runs."""

    counts: np.ndarray  # (runs, n, n) nonnegative integers
    l_max: int
    integration_time: float
    runs: int
    measured: np.ndarray  # (n, n) bool
    mean: np.ndarray = field(init=False)
    stddev: np.ndarray = field(init=False)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.counts = np.asarray(self.counts)
        n = 2 * self.l_max + 1
        if self.counts.shape != (self.runs, n, n):
            raise ValueError("counts must have shape (runs, n, n)")
        if np.any(self.counts < 0):
            raise ValueError("counts must be nonnegative")
        self.mean = self.counts.mean(axis=0)
        self.stddev = self.counts.std(axis=0, ddof=0)

    def index(self, l):
        if abs(l) > self.l_max:
            raise IndexError(f"|l| = {abs(l)} exceeds l_max = {self.l_max}")
        return l + self.l_max

    def cell_counts(self, l_r, l_o):
        return self.counts[:, self.index(l_r), self.index(l_o)]

    def to_csv(self):
        lines = ["l_r,l_o,run,counts"]
        for l_r in range(-self.l_max, self.l_max + 1):
            for l_o in range(-self.l_max, self.l_max + 1):
                i, j = self.index(l_r), self.index(l_o)
                if not self.measured[i, j]:
                    continue
                for run in range(self.runs):
                    lines.append(f"{l_r},{l_o},{run},{self.counts[run, i, j]}")
        lines.append("l_r,l_o,mean,stddev")
        for l_r in range(-self.l_max, self.l_max + 1):
            for l_o in range(-self.l_max, self.l_max + 1):
                i, j = self.index(l_r), self.index(l_o)
                if not self.measured[i, j]:
                    continue
                lines.append(f"{l_r},{l_o},{self.mean[i, j]:.12g},{self.stddev[i, j]:.12g}")
        return "\n".join(lines) + "\n"

    def to_json_dict(self):
        cells = []
        for l_r in range(-self.l_max, self.l_max + 1):
            for l_o in range(-self.l_max, self.l_max + 1):
                i, j = self.index(l_r), self.index(l_o)
                if self.measured[i, j]:
                    cells.append({
                        "l_r": l_r,
                        "l_o": l_o,
                        "counts": self.counts[:, i, j].tolist(),
                        "mean": float(self.mean[i, j]),
                        "stddev": float(self.stddev[i, j]),
                    })
        return {
            "l_max": self.l_max,
            "integration_time_s": self.integration_time,
            "runs": self.runs,
            "cells": cells,
            "meta": self.meta,
        }


def simulate_counts(js: JointSpectrum, rate_scale: float, time: float, runs: int,
                    seed: int, plan: MeasurementPlan | None = None) -> CountTable:
    """Draw Poisson counts per cell per run; deterministic given the seed."""
    if rate_scale <= 0:
        raise ValueError("rate_scale must be positive")
    if time <= 0:
        raise ValueError("time must be positive")
    if runs < 1:
        raise ValueError("runs must be at least 1")
    n = 2 * js.l_max + 1
    rates = js.rates
    measured = np.zeros((n, n), dtype=bool)
    if plan is None:
        measured[:] = True
        cells = [(l_r, l_o) for l_r in js.indices() for l_o in js.indices()]
    else:
        cells = list(plan.cells)
        for l_r, l_o in cells:
            measured[js.index(l_r), js.index(l_o)] = True
    counts = np.zeros((runs, n, n), dtype=np.int64)
    for l_r, l_o in cells:
        i, j = js.index(l_r), js.index(l_o)
        mu = rate_scale * time * rates[i, j] + BACKGROUND_RATE * time
        for run in range(runs):
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i, j, run)))
            counts[run, i, j] = rng.poisson(mu)
    meta = {"seed": seed, "rate_scale": rate_scale,
            "parity_flip": js.parity_flip, "l_p": js.pump_oam,
            "note": "rate_scale is an arbitrary overall constant, not calibrated"}
    return CountTable(counts, js.l_max, time, runs, measured, meta=meta)


def adjust_integration_time(js: JointSpectrum, reference_js: JointSpectrum,
                            reference_time: float) -> float:
    """Time rescaled so total counts match the reference configuration."""
    ref_total = reference_js.total_rate()
    if ref_total <= 0:
        raise ValueError("reference spectrum has zero total rate")
    total = js.total_rate()
    if total <= 0:
        raise ValueError("spectrum has zero total rate; no finite time matches the reference")
    return reference_time * ref_total / total


def plan_measurements(candidates, spectrum: NaturalSpectrum, budget: int,
                      strategy: str = "greedy", seed: int = 0) -> MeasurementPlan:
    """Choose cells that separate the candidate hypotheses.

    Greedy: track an accumulated pairwise separation per candidate pair
    (Hellinger-style (sqrt(mu_i) - sqrt(mu_j))^2 per cell, the natural
    Poisson discriminability scale) and repeatedly add the cell that
    maximizes the smallest pairwise total. Ties break lexicographically in
    (l_r, l_o). Random: uniform sample of distinct cells.
    """
    if len(candidates) < 2:
        raise ValueError("need at least 2 candidate hypotheses")
    if budget < 1:
        raise ValueError("budget must be at least 1")
    l_max = candidates[0].l_max
    cells = [(l_r, l_o)
             for l_r in range(-l_max, l_max + 1)
             for l_o in range(-l_max, l_max + 1)]
    if budget > len(cells):
        warnings.warn(f"budget {budget} exceeds the {len(cells)} grid cells; clamped",
                      stacklevel=2)
        budget = len(cells)
    expected = np.stack([synthesize(spectrum, cand).rates.ravel() for cand in candidates])
    if strategy == "random":
        rng = np.random.default_rng(seed)
        picked = rng.choice(len(cells), size=budget, replace=False)
        return MeasurementPlan(tuple(cells[i] for i in picked), budget)
    if strategy != "greedy":
        raise ValueError(f"unknown strategy {strategy!r}")
    n_cand = len(candidates)
    pairs = [(a, b) for a in range(n_cand) for b in range(a + 1, n_cand)]
    sqrt_mu = np.sqrt(expected)
    sep = np.stack([(sqrt_mu[a] - sqrt_mu[b]) ** 2 for a, b in pairs])  # (n_pairs, n_cells)
    accumulated = np.zeros(len(pairs))
    chosen = []
    available = np.ones(len(cells), dtype=bool)
    for _ in range(budget):
        worst_after = np.min(accumulated[:, None] + sep, axis=0)
        worst_after[~available] = -np.inf
        best = int(np.argmax(worst_after))  # argmax takes the first (lexicographic) tie
        chosen.append(cells[best])
        accumulated += sep[:, best]
        available[best] = False
    return MeasurementPlan(tuple(chosen), budget)

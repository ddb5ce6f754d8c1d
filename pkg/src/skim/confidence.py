"""
Adaptive error reporting for SKIM.

Each iteration yields a bound on how far the selected seed's marginal gain
may fall short of the true maximum.  The per-iteration bounds are combined
by convolution into a curve "total discrepancy <= D with confidence c".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "IterationRecord",
    "ErrorLedger",
    "discrepancy_confidence",
    "accumulate_ledger",
    "union_bound_curve",
    "DEFAULT_EPSILONS",
]

DEFAULT_EPSILONS = (0.01, 0.02, 0.05, 0.1)


def discrepancy_confidence(k_prime: float, tau: float, gain: float, eps: float) -> float:
    """Chernoff bound on a competitor hiding behind the runner-up sketch.

    A node whose true gain is ``gain * (1 + eps)`` pairs would hold on
    average ``mu = tau * gain * (1 + eps)`` ranks at or below ``tau``.  The
    probability that it holds no more than ``k_prime`` is at most
    ``(exp(-nu) / (1 - nu) ** (1 - nu)) ** mu`` with ``nu = 1 - k_prime / mu``.

    Parameters
    ----------
    k_prime : float
        Second largest sketch size, last processed rank excluded.
    tau : float
        Uniform rank of the last processed pair, in (0, 1].
    gain : float
        Exact marginal gain of the selected seed, in pairs.
    eps : float
        Relative discrepancy being bounded.

    Returns
    -------
    float
        Failure probability; 1.0 when the bound says nothing (``nu <= 0``).
    """
    if not 0.0 < tau <= 1.0:
        raise ValueError(f"tau={tau} outside (0, 1]")
    if not gain > 0.0:
        raise ValueError("gain must be positive")
    if not eps > 0.0:
        raise ValueError("eps must be positive")
    if k_prime < 0:
        raise ValueError("k_prime must be non-negative")
    mu = tau * gain * (1.0 + eps)
    nu = 1.0 - k_prime / mu
    if nu <= 0.0:
        return 1.0
    one_m = 1.0 - nu
    # (1-nu) ln(1-nu) -> 0 as nu -> 1
    log_term = one_m * math.log(one_m) if one_m > 0.0 else 0.0
    return min(1.0, math.exp(mu * (-nu - log_term)))


@dataclass(frozen=True)
class IterationRecord:
    """What one SKIM iteration contributes to the ledger.

    ``gain`` is in pairs; ``ell`` converts it to expected nodes.
    """

    k_prime: int
    tau: float
    gain: int
    ell: int


@dataclass
class ErrorLedger:
    """Upper-bound distribution of the summed discrepancy, in expected nodes.

    The distribution is a set of atoms merged into ``buckets`` geometric
    buckets spanning ``[1e-4 n, n]``; merging only moves mass to the largest
    atom of a bucket, so the curve stays a valid upper bound.  Mass for
    discrepancies that no bound covers sits at infinity.
    """

    n: int
    epsilons: tuple[float, ...] = DEFAULT_EPSILONS
    buckets: int = 512
    records: list[IterationRecord] = field(default_factory=list)
    failures: list[tuple[float, ...]] = field(default_factory=list)
    values: np.ndarray = field(default=None, repr=False)
    masses: np.ndarray = field(default=None, repr=False)
    lost: float = 0.0

    def __post_init__(self):
        self.edges = np.geomspace(1e-4 * self.n, self.n, self.buckets)
        if self.values is None:
            # empty sum: all mass at zero discrepancy
            self.values = np.zeros(1)
            self.masses = np.ones(1)

    def _convolved(self, d: float) -> float:
        return float(self.masses[self.values <= d * (1 + 1e-12)].sum())

    def confidence(self, d: float) -> float:
        """Lower bound on P(total discrepancy <= d).

        Bucket merging only ever moves mass upward, which keeps the convolved
        curve valid but lets it drift below the plain union bound over many
        iterations.  Both are valid, so the larger one is reported.
        """
        best = self._convolved(d)
        totals, conf = union_bound_curve(self)
        ok = totals <= d * (1 + 1e-12)
        if ok.any():
            best = max(best, float(conf[ok].max()))
        return best

    def curve(self) -> tuple[np.ndarray, np.ndarray]:
        """Discrepancy points and their confidence, ascending."""
        totals, _ = union_bound_curve(self)
        pts = np.unique(np.concatenate([self.values, totals]))
        return pts, np.array([self.confidence(d) for d in pts])

    def guarantee(self, confidence: float) -> float:
        """Smallest total discrepancy bound holding with at least ``confidence``."""
        vals, cdf = self.curve()
        idx = np.searchsorted(cdf, confidence - 1e-12)
        return float(vals[idx]) if idx < vals.size else math.inf


def _iteration_points(rec: IterationRecord, epsilons) -> tuple[np.ndarray, np.ndarray, tuple[float, ...]]:
    """Discrepancy atoms (expected nodes) and masses for one record."""
    nodes_gain = rec.gain / rec.ell
    fails = []
    prev = 1.0
    for eps in epsilons:
        f = discrepancy_confidence(rec.k_prime, rec.tau, rec.gain, eps)
        prev = min(prev, f)
        fails.append(prev)
    pts = np.array([eps * nodes_gain for eps in epsilons])
    mass = np.empty(len(epsilons))
    mass[0] = 1.0 - fails[0]
    for j in range(1, len(epsilons)):
        mass[j] = fails[j - 1] - fails[j]
    return pts, mass, tuple(fails)


def accumulate_ledger(ledger: ErrorLedger, rec: IterationRecord) -> ErrorLedger:
    """Fold one iteration into ``ledger`` (in place) and return it."""
    ledger.records.append(rec)
    if rec.gain <= 0:
        ledger.failures.append(tuple(0.0 for _ in ledger.epsilons))
        return ledger
    pts, mass, fails = _iteration_points(rec, ledger.epsilons)
    ledger.failures.append(fails)
    tail = fails[-1]

    vals = (ledger.values[:, None] + pts[None, :]).ravel()
    ms = (ledger.masses[:, None] * mass[None, :]).ravel()
    keep = ms > 0
    vals, ms = vals[keep], ms[keep]
    ledger.lost = ledger.lost + (1.0 - ledger.lost) * tail

    over = vals > ledger.n
    if over.any():
        ledger.lost += float(ms[over].sum())
        vals, ms = vals[~over], ms[~over]
    if vals.size == 0:
        ledger.values, ledger.masses = np.zeros(0), np.zeros(0)
        return ledger
    bucket = np.searchsorted(ledger.edges, vals, side="left")
    nb = ledger.buckets
    merged_mass = np.bincount(bucket, weights=ms, minlength=nb)
    merged_val = np.full(nb, -np.inf)
    np.maximum.at(merged_val, bucket, vals)
    occupied = merged_mass > 0
    ledger.values = merged_val[occupied]
    ledger.masses = merged_mass[occupied]
    return ledger


def union_bound_curve(ledger: ErrorLedger) -> tuple[np.ndarray, np.ndarray]:
    """Per epsilon level: total ``eps * gain`` and ``1 - sum`` of failure probabilities."""
    totals = np.zeros(len(ledger.epsilons))
    fail = np.zeros(len(ledger.epsilons))
    for rec, fails in zip(ledger.records, ledger.failures):
        if rec.gain <= 0:
            continue
        totals += np.array(ledger.epsilons) * rec.gain / rec.ell
        fail += np.array(fails)
    return totals, np.clip(1.0 - fail, 0.0, 1.0)

"""Norm-trace analysis: histograms, peak finding and convergence detection."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable

import numpy as np

if TYPE_CHECKING:
    from .sampler import GaussianConfig

DEFAULT_BINS = 50
DEFAULT_WINDOW = 500
DEFAULT_DELTA = 0.02
SMOOTH_WINDOW = 5
PEAK_MIN_FRACTION = 0.05
TRACE_HEADER = ("step", "norm", "accepted")


class EmptyTraceError(ValueError):
    pass


class InsufficientDataError(ValueError):
    pass


class TraceParseError(ValueError):
    def __init__(self, path, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.lineno = lineno


@dataclass
class NormTrace:
    norms: np.ndarray
    accepted: np.ndarray
    config: "GaussianConfig | None" = None
    burn_in: int = 0
    positions: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.norms = np.asarray(self.norms, dtype=np.float64)
        self.accepted = np.asarray(self.accepted, dtype=bool)
        if self.norms.shape != self.accepted.shape:
            raise ValueError("norms and accepted flags must have equal length")

    def __len__(self) -> int:
        return len(self.norms)

    def post_burn_in(self) -> np.ndarray:
        return self.norms[self.burn_in:]

    def mean_norm(self) -> float:
        tail = self.post_burn_in()
        if len(tail) == 0:
            raise EmptyTraceError("no samples after burn-in")
        return float(tail.mean())

    def acceptance_rate(self) -> float:
        return float(self.accepted.mean()) if len(self) else 0.0

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(TRACE_HEADER) + "\n")
            for i, (v, a) in enumerate(zip(self.norms, self.accepted)):
                fh.write(f"{i},{v:.6f},{int(a)}\n")

    @classmethod
    def from_csv(cls, path, burn_in: int | None = None) -> "NormTrace":
        """Read a trace CSV. ``burn_in`` defaults to a fifth of the rows."""
        norms, flags = [], []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise TraceParseError(path, 1, "empty file")
            if tuple(h.strip() for h in header) != TRACE_HEADER:
                raise TraceParseError(path, 1, f"expected header {','.join(TRACE_HEADER)}")
            for lineno, row in enumerate(reader, start=2):
                if len(row) != 3:
                    raise TraceParseError(path, lineno, f"expected 3 fields, got {len(row)}")
                try:
                    int(row[0])
                    v = float(row[1])
                    a = int(row[2])
                except ValueError as exc:
                    raise TraceParseError(path, lineno, str(exc)) from None
                if a not in (0, 1) or not math.isfinite(v) or v < 0:
                    raise TraceParseError(path, lineno, "norm must be finite >= 0 and accepted in {0,1}")
                norms.append(v)
                flags.append(bool(a))
        if burn_in is None:
            burn_in = len(norms) // 5
        return cls(norms=np.array(norms), accepted=np.array(flags, dtype=bool), burn_in=burn_in)


@dataclass
class HistogramSummary:
    bin_edges: np.ndarray
    counts: np.ndarray
    peaks: list[float] = field(default_factory=list)
    convergence_iteration: int | None = None

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("bin_low,bin_high,count\n")
            for lo, hi, c in zip(self.bin_edges[:-1], self.bin_edges[1:], self.counts):
                fh.write(f"{lo:.6f},{hi:.6f},{int(c)}\n")


def histogram(trace: NormTrace, bin_count: int = DEFAULT_BINS) -> HistogramSummary:
    """Equal-width histogram of the post-burn-in norms over [min, max]."""
    if bin_count < 2:
        raise ValueError("bin_count must be at least 2")
    samples = trace.post_burn_in()
    if len(samples) == 0:
        raise EmptyTraceError("no samples after burn-in")
    counts, edges = np.histogram(samples, bins=bin_count)
    return HistogramSummary(bin_edges=edges, counts=counts)


def smooth_counts(counts, window: int = SMOOTH_WINDOW) -> np.ndarray:
    """Centered moving average, truncated (not zero-padded) at the edges."""
    c = np.asarray(counts, dtype=np.float64)
    half = window // 2
    csum = np.concatenate(([0.0], np.cumsum(c)))
    idx = np.arange(len(c))
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half + 1, len(c))
    return (csum[hi] - csum[lo]) / (hi - lo)


def find_peaks(hist: HistogramSummary) -> list[float]:
    """Bin centers of strict local maxima of the smoothed counts.

    Smoothing turns a one-bin spike into a flat run, so a run of equal
    smoothed values counts as one maximum (reported at its middle) when
    both neighbours are lower. A run touching one end of the histogram
    only needs its inner neighbour to be lower; a histogram that is flat
    end to end has no peaks. Maxima under 5% of the highest smoothed
    count are dropped.
    """
    s = smooth_counts(hist.counts)
    n = len(s)
    if n == 0 or s.max() <= 0:
        return []
    centers = hist.centers
    floor = PEAK_MIN_FRACTION * s.max()
    peaks = []
    i = 0
    while i < n:
        j = i
        while j + 1 < n and s[j + 1] == s[i]:
            j += 1
        left_lower = i == 0 or s[i - 1] < s[i]
        right_lower = j == n - 1 or s[j + 1] < s[j]
        if left_lower and right_lower and not (i == 0 and j == n - 1) and s[i] >= floor:
            peaks.append(float(0.5 * (centers[i] + centers[j])))
        i = j + 1
    return peaks


def window_means(norms: np.ndarray, window: int) -> np.ndarray:
    csum = np.concatenate(([0.0], np.cumsum(norms, dtype=np.float64)))
    return (csum[window:] - csum[:-window]) / window


def analyze_mixing(trace: NormTrace, window: int = DEFAULT_WINDOW,
                   delta: float = DEFAULT_DELTA) -> int | None:
    """First step after which every sliding-window mean stays in the tail band.

    The reference level is the mean of the final quarter of the trace;
    the band is ``reference * (1 +/- delta)``. Windows start at t, t+1, ...
    up to the last full window. Returns ``None`` when even the last
    window lies outside the band (not converged).
    """
    if window < 1 or not delta > 0:
        raise ValueError("window must be positive and delta > 0")
    norms = trace.norms
    n = len(norms)
    if n < 4 * window:
        raise InsufficientDataError(f"trace of {n} steps is shorter than 4 * window = {4 * window}")
    ref = float(norms[n - n // 4:].mean())
    means = window_means(norms, window)
    outside = np.abs(means - ref) > delta * abs(ref)
    if outside[-1]:
        return None
    bad = np.flatnonzero(outside)
    return 0 if len(bad) == 0 else int(bad[-1]) + 1


def summarize(trace: NormTrace, bin_count: int = DEFAULT_BINS,
              window: int = DEFAULT_WINDOW, delta: float = DEFAULT_DELTA) -> HistogramSummary:
    hist = histogram(trace, bin_count)
    hist.peaks = find_peaks(hist)
    hist.convergence_iteration = analyze_mixing(trace, window, delta)
    return hist


def mixing_time_bound(N: int, epsilon: float, C: float) -> float:
    """C * N^2 * ln(1/epsilon)."""
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if N < 1 or not C > 0:
        raise ValueError("N must be positive and C > 0")
    return C * N * N * math.log(1.0 / epsilon)


def fit_mixing_exponent(measurements: Iterable[tuple[int, int | None]]) -> float:
    """Least-squares slope of log(convergence iteration) against log(N)."""
    pts = list(measurements)
    if any(conv is None for _, conv in pts):
        raise ValueError("measurements contain non-converged entries")
    if any(conv <= 0 or n <= 0 for n, conv in pts):
        raise ValueError("N and convergence iterations must be positive to take logs")
    if len({n for n, _ in pts}) < 3:
        raise ValueError("need at least 3 distinct N values")
    logn = np.log([float(n) for n, _ in pts])
    logc = np.log([float(c) for _, c in pts])
    slope, _ = np.polyfit(logn, logc, 1)
    return float(slope)


def format_report(trace: NormTrace, hist: HistogramSummary) -> str:
    """Flat key=value block describing an analysed trace."""
    conv = hist.convergence_iteration
    lines = [
        f"steps={len(trace)}",
        f"burn_in={trace.burn_in}",
        f"samples={int(hist.counts.sum())}",
        f"mean_norm={trace.mean_norm():.6f}",
        f"acceptance_rate={trace.acceptance_rate():.6f}",
        f"peak_count={len(hist.peaks)}",
        "peaks=" + ";".join(f"{p:.6f}" for p in hist.peaks),
        f"convergence_iteration={'NotConverged' if conv is None else conv}",
    ]
    return "\n".join(lines) + "\n"

"""Evaluation quantities: classification accuracy and sign-recovery scores."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import DimensionMismatch, EmptyTrialList
from .heaviside import sign_pm1
from .linalg import as_vector

CSV_HEADER = "method,n,m,k,flip,SNR,HD,HE,Time,Iter"


@dataclass
class TrialResult:
    """Scores of one solve: dB recovery ratio, hamming fractions, accuracy.

    ``iterations`` is a float so that aggregated means stay representable.
    """

    snr: float
    hd: float
    he: float
    acc: float
    time: float
    iterations: float


def classification_accuracy(a0, x, c, m_eff: int | None = None) -> float:
    """Fraction of rows whose predicted sign matches the label, sgn(0) = -1."""
    x = as_vector(x, "x")
    c = as_vector(c, "c")
    if a0.shape[1] != x.size or a0.shape[0] != c.size:
        raise DimensionMismatch("a0, x, c shapes are inconsistent")
    if m_eff is None:
        m_eff = c.size
    mismatches = int(np.count_nonzero(sign_pm1(a0 @ x) != c))
    return 1.0 - mismatches / m_eff


def recovery_metrics(x, x_true, a0, c_clean, c_observed) -> tuple[float, float, float]:
    """(snr, hd, he) for a recovered signal.

    snr = -20 log10 ||x - x_true|| (infinite on exact recovery); hd and he
    are the sign-mismatch fractions of a0 @ x against the observed and the
    clean signs. The caller normalizes x to unit length first.
    """
    x = as_vector(x, "x")
    x_true = as_vector(x_true, "x_true")
    c_clean = as_vector(c_clean, "c_clean")
    c_observed = as_vector(c_observed, "c_observed")
    m = a0.shape[0]
    if x.size != x_true.size or a0.shape[1] != x.size:
        raise DimensionMismatch("signal lengths are inconsistent")
    if c_clean.size != m or c_observed.size != m:
        raise DimensionMismatch("sign vectors do not match the measurement rows")
    err = float(np.linalg.norm(x - x_true))
    snr = math.inf if err == 0.0 else -20.0 * math.log10(err)
    signs = sign_pm1(a0 @ x)
    hd = int(np.count_nonzero(signs != c_observed)) / m
    he = int(np.count_nonzero(signs != c_clean)) / m
    return snr, hd, he


@dataclass
class TrialSummary:
    mean: TrialResult
    std: TrialResult
    count: int
    snr_excluded: int


def aggregate(trials: list[TrialResult]) -> TrialSummary:
    """Per-field mean and sample standard deviation across trials.

    Infinite snr values (exact recoveries) are excluded from the snr mean and
    deviation; the exclusion count is reported.
    """
    if not trials:
        raise EmptyTrialList("no trials to aggregate")

    names = [f.name for f in fields(TrialResult)]
    means, stds = {}, {}
    snr_excluded = 0
    for name in names:
        vals = np.asarray([float(getattr(t, name)) for t in trials])
        if name == "snr":
            finite = vals[np.isfinite(vals)]
            snr_excluded = int(vals.size - finite.size)
            vals = finite
        if vals.size == 0:
            means[name], stds[name] = math.inf, 0.0
        else:
            means[name] = float(vals.mean())
            stds[name] = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
    return TrialSummary(
        mean=TrialResult(**means),
        std=TrialResult(**stds),
        count=len(trials),
        snr_excluded=snr_excluded,
    )


def csv_row(method: str, n: int, m: int, k: int, flip: float, result: TrialResult) -> str:
    """One row in the fixed benchmark column order (see CSV_HEADER)."""
    return (
        f"{method},{n},{m},{k},{flip:g},"
        f"{result.snr:.6g},{result.hd:.6g},{result.he:.6g},"
        f"{result.time:.6g},{result.iterations:g}"
    )

"""Data loading and synthesis: libsvm text files and seeded sign-measurement
instances.

Randomness policy: every generator takes an integer seed and draws from
numpy's PCG64 (``np.random.default_rng``) in a fixed order, so identical
parameters and seed give bitwise-identical instances. The draw order for a
sign-measurement instance is: measurement matrix, support positions, support
values, noise, flip positions.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.signal import lfilter

from .errors import (
    BadDimensions,
    DimensionMismatch,
    EmptyFile,
    MalformedLine,
    NonIncreasingIndex,
    ZeroStartVector,
)
from .heaviside import sign_pm1
from .linalg import as_vector, to_csr
from .stationarity import Iterate


@dataclass
class Dataset:
    """Sample matrix with +/-1 labels.

    ``feature_count`` is the width before bias augmentation. After
    ``scale_and_augment`` the matrix gains a trailing all-ones column,
    ``augmented`` is set, and ``scale_divisors`` records the per-column
    divisors so a test set can reuse them.
    """

    samples: "np.ndarray | sp.csr_matrix"
    labels: np.ndarray
    feature_count: int
    provenance: str = ""
    augmented: bool = False
    scale_divisors: np.ndarray | None = None

    def __post_init__(self):
        self.labels = as_vector(self.labels, "labels")
        if self.samples.shape[0] != self.labels.size:
            raise DimensionMismatch("sample rows and label count differ")

    @property
    def m(self) -> int:
        return self.samples.shape[0]


def parse_libsvm(source) -> Dataset:
    """Parse libsvm text: one sample per line, ``label idx:val idx:val ...``
    with 1-based strictly increasing indices.

    ``source`` may be a string of text or a readable file object. Class
    label 1 maps to +1, every other label to -1. The largest index seen
    anywhere in the file fixes the feature count.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = source
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    labels: list[float] = []
    max_index = 0
    sample = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        tokens = line.split()
        try:
            raw_label = float(tokens[0])
        except ValueError:
            raise MalformedLine(lineno, f"label {tokens[0]!r} is not numeric")
        labels.append(1.0 if raw_label == 1.0 else -1.0)
        prev = 0
        for tok in tokens[1:]:
            idx_str, _, val_str = tok.partition(":")
            if not val_str:
                raise MalformedLine(lineno, f"feature {tok!r} is not idx:value")
            try:
                idx = int(idx_str)
                val = float(val_str)
            except ValueError:
                raise MalformedLine(lineno, f"feature {tok!r} is not idx:value")
            if idx < 1:
                raise MalformedLine(lineno, f"feature index {idx} must be >= 1")
            if idx <= prev:
                raise NonIncreasingIndex(lineno)
            prev = idx
            max_index = max(max_index, idx)
            if val != 0.0:
                rows.append(sample)
                cols.append(idx - 1)
                vals.append(val)
        sample += 1
    if sample == 0:
        raise EmptyFile("no data lines found")
    matrix = sp.csr_matrix(
        (vals, (rows, cols)), shape=(sample, max_index), dtype=float
    )
    return Dataset(
        samples=matrix,
        labels=np.asarray(labels),
        feature_count=max_index,
        provenance="libsvm",
    )


def write_libsvm(dataset: Dataset) -> str:
    """Serialize back to libsvm text (nonzero features only, 1-based)."""
    M = to_csr(dataset.samples)
    buf = io.StringIO()
    for i in range(M.shape[0]):
        start, end = M.indptr[i], M.indptr[i + 1]
        feats = " ".join(
            f"{j + 1}:{v!r}" for j, v in zip(M.indices[start:end], M.data[start:end])
        )
        label = int(dataset.labels[i])
        buf.write(f"{label} {feats}".rstrip() + "\n")
    return buf.getvalue()


def scale_and_augment(dataset: Dataset, divisors: np.ndarray | None = None) -> Dataset:
    """Scale each feature column into [-1, 1] and append the bias column.

    Column j is divided by its max absolute value; all-zero columns are left
    alone. Division (rather than an affine map) preserves sparsity. Pass the
    training set's ``scale_divisors`` to scale a test set consistently; the
    test matrix is first conformed to that width (extra columns dropped,
    missing ones zero). Already augmented datasets pass through unchanged.
    """
    if dataset.augmented:
        return dataset
    M = dataset.samples
    sparse = sp.issparse(M)
    if divisors is None:
        if sparse:
            peak = np.abs(M).max(axis=0).toarray().ravel() if M.shape[1] else np.zeros(0)
        else:
            peak = np.abs(M).max(axis=0) if M.shape[1] else np.zeros(0)
        divisors = np.where(peak > 0, peak, 1.0)
    else:
        divisors = as_vector(divisors, "divisors")
        target = divisors.size
        if M.shape[1] > target:
            M = M[:, :target]
        elif M.shape[1] < target:
            pad_shape = (M.shape[0], target - M.shape[1])
            if sparse:
                M = sp.hstack([M, sp.csr_matrix(pad_shape)], format="csr")
            else:
                M = np.hstack([M, np.zeros(pad_shape)])
    ones = np.ones((M.shape[0], 1))
    if sparse:
        scaled = M @ sp.diags(1.0 / divisors)
        out = sp.hstack([scaled, sp.csr_matrix(ones)], format="csr")
    else:
        out = np.hstack([np.asarray(M, dtype=float) / divisors, ones])
    return Dataset(
        samples=out,
        labels=dataset.labels.copy(),
        feature_count=dataset.feature_count,
        provenance=dataset.provenance,
        augmented=True,
        scale_divisors=np.asarray(divisors, dtype=float),
    )


@dataclass
class CsInstance:
    """A seeded sign-measurement recovery instance.

    ``c_clean`` holds the signs of a0 @ x_true, ``c_noisy`` the signs after
    additive Gaussian noise, and ``c`` the observed vector after flipping
    ``flip_count`` randomly chosen entries of ``c_noisy``.
    """

    a0: np.ndarray
    x_true: np.ndarray
    c_clean: np.ndarray
    c_noisy: np.ndarray
    c: np.ndarray
    flip_count: int
    seed: int
    k_star: int
    flip_ratio: float
    covariance: str = "independent"
    noise_std: float = 0.1

    @property
    def m(self) -> int:
        return self.a0.shape[0]

    @property
    def n(self) -> int:
        return self.a0.shape[1]

    def to_dict(self) -> dict:
        return {
            "kind": "cs_instance",
            "n": self.n,
            "m": self.m,
            "k_star": self.k_star,
            "flip_ratio": self.flip_ratio,
            "covariance": self.covariance,
            "noise_std": self.noise_std,
            "seed": self.seed,
            "flip_count": self.flip_count,
            "a0": [[float(v) for v in row] for row in self.a0],
            "x_true": [float(v) for v in self.x_true],
            "c_clean": [int(v) for v in self.c_clean],
            "c_noisy": [int(v) for v in self.c_noisy],
            "c": [int(v) for v in self.c],
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "CsInstance":
        return cls(
            a0=np.asarray(d["a0"], dtype=float),
            x_true=np.asarray(d["x_true"], dtype=float),
            c_clean=np.asarray(d["c_clean"], dtype=float),
            c_noisy=np.asarray(d["c_noisy"], dtype=float),
            c=np.asarray(d["c"], dtype=float),
            flip_count=int(d["flip_count"]),
            seed=int(d["seed"]),
            k_star=int(d["k_star"]),
            flip_ratio=float(d["flip_ratio"]),
            covariance=d.get("covariance", "independent"),
            noise_std=float(d.get("noise_std", 0.1)),
        )

    @classmethod
    def from_json(cls, text: str) -> "CsInstance":
        return cls.from_dict(json.loads(text))


def _ar1_rows(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    """Rows of N(0, Sigma) with Sigma_ij = 2^-|i-j|.

    The stationary AR(1) recurrence x_j = 0.5 x_{j-1} + sqrt(0.75) g_j with
    x_1 = g_1 applies the Cholesky factor of Sigma implicitly, in O(m n).
    """
    g = rng.standard_normal((m, n))
    driven = math.sqrt(0.75) * g
    driven[:, 0] = g[:, 0]
    return lfilter([1.0], [1.0, -0.5], driven, axis=1)


def generate_cs_instance(
    n: int,
    m: int,
    k_star: int,
    flip_ratio: float,
    covariance: str = "independent",
    seed: int = 0,
    noise_std: float = 0.1,
) -> CsInstance:
    """Draw a sign-measurement instance.

    Measurement rows are standard normal, either independent or with the
    geometric correlation 2^-|i-j| between coordinates. The ground truth has
    k_star uniformly placed standard-normal entries and unit Euclidean norm.
    Observed signs are sgn(a0 @ x_true + noise) with sgn(0) = -1, after which
    ceil(flip_ratio * m) uniformly chosen entries are sign-flipped.
    """
    if m < 1 or n < 1 or not 1 <= k_star <= n:
        raise BadDimensions(f"need m, n >= 1 and 1 <= k_star <= n, got m={m}, n={n}, k_star={k_star}")
    if not 0 <= flip_ratio < 1:
        raise BadDimensions(f"flip_ratio must lie in [0, 1), got {flip_ratio}")
    if covariance not in ("independent", "correlated"):
        raise BadDimensions(f"covariance must be 'independent' or 'correlated', got {covariance!r}")
    if noise_std < 0:
        raise BadDimensions("noise_std must be nonnegative")

    rng = np.random.default_rng(seed)
    if covariance == "independent":
        a0 = rng.standard_normal((m, n))
    else:
        a0 = _ar1_rows(rng, m, n)

    support = np.sort(rng.choice(n, size=k_star, replace=False))
    x_true = np.zeros(n)
    x_true[support] = rng.standard_normal(k_star)
    x_true /= np.linalg.norm(x_true)

    scores = a0 @ x_true
    c_clean = sign_pm1(scores)
    noise = noise_std * rng.standard_normal(m)
    c_noisy = sign_pm1(scores + noise)
    flip_count = iceil_flip(flip_ratio, m)
    c = c_noisy.copy()
    if flip_count:
        flip_at = rng.choice(m, size=flip_count, replace=False)
        c[flip_at] = -c[flip_at]
    return CsInstance(
        a0=a0,
        x_true=x_true,
        c_clean=c_clean,
        c_noisy=c_noisy,
        c=c,
        flip_count=flip_count,
        seed=seed,
        k_star=k_star,
        flip_ratio=flip_ratio,
        covariance=covariance,
        noise_std=noise_std,
    )


def iceil_flip(flip_ratio: float, m: int) -> int:
    """ceil(flip_ratio * m) with protection against float noise."""
    return int(math.ceil(flip_ratio * m - 1e-12 * max(1.0, flip_ratio * m)))


def starting_point(kind: str, a0, c, tau: float = 0.5) -> Iterate:
    """Standard starting iterate for each front end.

    Classification: x = 0, lam = 1. Sign recovery: x is the normalized
    label-correlation vector a0^T c / ||a0^T c||, lam = 1.
    """
    c = as_vector(c, "c")
    m, n = a0.shape
    if c.size != m:
        raise DimensionMismatch("label count differs from measurement rows")
    if kind == "svm":
        return Iterate(x=np.zeros(n), lam=np.ones(m), tau=tau)
    if kind == "cs":
        corr = a0.T @ c
        corr = np.asarray(corr, dtype=float).ravel()
        norm = np.linalg.norm(corr)
        if norm == 0.0:
            raise ZeroStartVector("a0^T c is identically zero")
        return Iterate(x=corr / norm, lam=np.ones(m), tau=tau)
    raise ValueError(f"unknown problem kind {kind!r}")

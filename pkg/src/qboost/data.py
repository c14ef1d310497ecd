"""Datasets, synthetic generators, splits and CSV ingestion.

All randomness uses numpy's default PCG64 generator seeded explicitly, so
every generator is a pure function of (parameters, seed).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# Mean-separation calibration for the Gaussian mixture.  At overlap=1 the
# two class centers sit DELTA_ONE apart, giving a Bayes error of
# Phi(-DELTA_ONE/2) ~ 0.05; at overlap=0 they sit DELTA_MAX apart
# (Bayes error ~ 3e-5).
DELTA_ONE = 3.29
DELTA_MAX = 8.0

# Box-cluster geometry: positives uniform in the inner box, negatives in
# the outer square minus a margin band, so the set stays separable.
BOX_INNER = 1.0
BOX_MARGIN = 1.2
BOX_OUTER = 3.0


class Sample(NamedTuple):
    features: np.ndarray
    label: int


@dataclass(frozen=True)
class Dataset:
    """Labeled feature vectors: features (S, M) float64, labels (S,) in {-1,+1}."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        feats = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        labs = np.asarray(self.labels, dtype=np.int64)
        if feats.ndim != 2 or feats.shape[0] == 0:
            raise ValueError("features must be a non-empty (S, M) array")
        if labs.shape != (feats.shape[0],):
            raise ValueError("labels must align with features")
        if not np.all(np.isfinite(feats)):
            raise ValueError("features contain non-finite values")
        if not np.all(np.abs(labs) == 1):
            raise ValueError("labels must be -1 or +1")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labs)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def dimension(self) -> int:
        return self.features.shape[1]

    def __len__(self) -> int:
        return self.n_samples

    def __getitem__(self, i: int) -> Sample:
        return Sample(self.features[i], int(self.labels[i]))

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx])


@dataclass(frozen=True)
class SplitDataset:
    train: Dataset
    validation: Dataset
    test: Dataset

    def __post_init__(self):
        dims = {self.train.dimension, self.validation.dimension, self.test.dimension}
        if len(dims) != 1:
            raise ValueError("all splits must share the same dimension")


def uniform_weights(n: int) -> np.ndarray:
    """Uniform sample-weight distribution of length n."""
    if n < 1:
        raise ValueError("need at least one sample")
    return np.full(n, 1.0 / n)


def check_weights(weights: np.ndarray, n: int) -> np.ndarray:
    """Validate a sample-weight distribution (non-negative, sums to 1)."""
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (n,):
        raise ValueError(f"expected {n} weights, got shape {w.shape}")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("weights must sum to 1")
    return w


def mixture_separation(overlap: float) -> float:
    """Distance between the two Gaussian class centers for a given overlap."""
    if not 0.0 <= overlap <= 1.0:
        raise ValueError("overlap must lie in [0, 1]")
    return DELTA_MAX - overlap * (DELTA_MAX - DELTA_ONE)


def generate_gaussian_mixture(M: int, overlap: float, S: int, seed: int) -> Dataset:
    """Two spherical unit-covariance Gaussians at +-(delta/2) along axis 0.

    Labels are drawn equiprobably; y=+1 samples come from the positive
    center, y=-1 from the negative one.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if S < 2:
        raise ValueError("S must be >= 2")
    delta = mixture_separation(overlap)
    rng = np.random.default_rng(seed)
    labels = np.where(rng.random(S) < 0.5, 1, -1).astype(np.int64)
    feats = rng.standard_normal((S, M))
    feats[:, 0] += labels * (delta / 2.0)
    return Dataset(feats, labels)


def generate_box_cluster_2d(S: int, seed: int) -> Dataset:
    """Separable 2-d set: positives inside a box, negatives in the surrounding annulus."""
    if S < 4:
        raise ValueError("S must be >= 4")
    rng = np.random.default_rng(seed)
    labels = np.where(rng.random(S) < 0.5, 1, -1).astype(np.int64)
    feats = np.empty((S, 2))
    for s in range(S):
        if labels[s] == 1:
            feats[s] = rng.uniform(-BOX_INNER, BOX_INNER, size=2)
        else:
            while True:
                pt = rng.uniform(-BOX_OUTER, BOX_OUTER, size=2)
                if np.max(np.abs(pt)) > BOX_MARGIN:
                    feats[s] = pt
                    break
    return Dataset(feats, labels)


def split_even(dataset: Dataset, seed: int) -> SplitDataset:
    """Random partition into train/validation/test of near-equal sizes."""
    S = dataset.n_samples
    if S < 3:
        raise ValueError("need at least 3 samples to split")
    perm = np.random.default_rng(seed).permutation(S)
    base, rem = divmod(S, 3)
    sizes = [base + (1 if k < rem else 0) for k in range(3)]
    cuts = np.cumsum(sizes)
    return SplitDataset(
        train=dataset.subset(perm[: cuts[0]]),
        validation=dataset.subset(perm[cuts[0] : cuts[1]]),
        test=dataset.subset(perm[cuts[1] :]),
    )


def l2_normalize(dataset: Dataset) -> Dataset:
    """Scale every feature vector to unit L2 norm."""
    norms = np.linalg.norm(dataset.features, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ValueError(f"cannot normalize all-zero feature vector at index {zero[0]}")
    return Dataset(dataset.features / norms[:, None], dataset.labels)


def save_csv(dataset: Dataset, path, header: bool = False) -> None:
    """Write M feature columns followed by one label column.

    Floats are written with repr() so a reload is bit-exact and output
    bytes are deterministic.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header:
            cols = [f"x{j}" for j in range(dataset.dimension)] + ["y"]
            fh.write(",".join(cols) + "\n")
        for s in range(dataset.n_samples):
            row = [repr(float(v)) for v in dataset.features[s]]
            row.append(str(int(dataset.labels[s])))
            fh.write(",".join(row) + "\n")


def load_csv(path, header: bool = False) -> Dataset:
    """Read a dataset saved by save_csv; rejects ragged or malformed rows."""
    feats, labels = [], []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if header and lineno == 1:
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
                if width < 2:
                    raise ValueError(f"row {lineno}: need at least one feature and a label")
            elif len(cells) != width:
                raise ValueError(f"row {lineno}: expected {width} cells, got {len(cells)}")
            try:
                vals = [float(c) for c in cells[:-1]]
                lab = float(cells[-1])
            except ValueError as exc:
                raise ValueError(f"row {lineno}: non-numeric cell") from exc
            if lab not in (-1.0, 1.0):
                raise ValueError(f"row {lineno}: label must be -1 or +1, got {cells[-1]}")
            feats.append(vals)
            labels.append(int(lab))
    if not feats:
        raise ValueError("no samples")
    return Dataset(np.array(feats), np.array(labels))

"""Decision-stump dictionary: construction, evaluation and ranking.

A stump is sign(p - theta) with projection p = polarity * x_l (order 1) or
p = polarity * x_i * x_j (order 2), with the tie rule sign(0) = +1.
Thresholds are fit per stump to minimize the weighted training error over
midpoints between consecutive distinct projection values, plus one value
below the minimum and one above the maximum.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .data import Dataset, check_weights

# Dictionary block layout: order-1 positive, order-1 negative, order-2
# positive, order-2 negative; ascending index within each block.
_COLUMN_CHUNK = 512


@dataclass(frozen=True)
class Stump:
    order: int
    indices: tuple[int, ...]
    polarity: int
    threshold: float

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        if len(self.indices) != self.order:
            raise ValueError("indices must match order")
        if self.order == 2 and not self.indices[0] < self.indices[1]:
            raise ValueError("order-2 indices must satisfy i < j")
        if self.polarity not in (-1, 1):
            raise ValueError("polarity must be -1 or +1")

    def identity(self) -> tuple:
        """Key identifying the stump's dictionary slot (threshold excluded)."""
        return (self.order, self.indices, self.polarity)

    def project(self, X: np.ndarray) -> np.ndarray:
        if self.order == 1:
            p = X[:, self.indices[0]]
        else:
            i, j = self.indices
            p = X[:, i] * X[:, j]
        return self.polarity * p

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        """Vector of predictions in {-1, +1} for each row of X."""
        if X.shape[1] <= max(self.indices):
            raise ValueError("feature dimension too small for stump indices")
        return np.where(self.project(X) - self.threshold >= 0.0, 1, -1).astype(np.int8)

    def evaluate(self, x: np.ndarray) -> int:
        x = np.asarray(x, dtype=np.float64)
        return int(self.evaluate_batch(x[None, :])[0])


@dataclass(frozen=True)
class Dictionary:
    stumps: tuple[Stump, ...]
    dimension: int

    def __len__(self) -> int:
        return len(self.stumps)

    def __getitem__(self, i: int) -> Stump:
        return self.stumps[i]


def dictionary_size(M: int, orders: Iterable[int] = (1, 2)) -> int:
    """2M stumps for order 1 plus 2*C(M,2) for order 2."""
    if M < 1:
        raise ValueError("M must be >= 1")
    orders = set(orders)
    if not orders <= {1, 2}:
        raise ValueError("orders must be a subset of {1, 2}")
    total = 0
    if 1 in orders:
        total += 2 * M
    if 2 in orders:
        total += 2 * comb(M, 2)
    return total


def _scan_columns(P: np.ndarray, y: np.ndarray, w: np.ndarray):
    """Optimal threshold and weighted error per projection column.

    Cutting the sorted column after position k predicts -1 for the first k
    samples and +1 for the rest; only cuts between distinct values (plus
    the two extremes) are candidates.  Ties go to the smallest cut, hence
    the smallest threshold.
    """
    S, B = P.shape
    w_pos = w * (y == 1)
    w_neg = w * (y == -1)
    tot_neg = w_neg.sum()
    thresholds = np.empty(B)
    errors = np.empty(B)
    for c0 in range(0, B, _COLUMN_CHUNK):
        block = P[:, c0 : c0 + _COLUMN_CHUNK]
        order = np.argsort(block, axis=0, kind="stable")
        sv = np.take_along_axis(block, order, axis=0)
        cum_pos = np.cumsum(w_pos[order], axis=0)
        cum_neg = np.cumsum(w_neg[order], axis=0)
        nb = block.shape[1]
        err = np.empty((S + 1, nb))
        err[0] = tot_neg
        err[1:] = cum_pos + (tot_neg - cum_neg)
        # forbid cuts inside runs of equal values
        err[1:S][sv[:-1] >= sv[1:]] = np.inf
        best = np.argmin(err, axis=0)
        errors[c0 : c0 + nb] = err[best, np.arange(nb)]
        for b in range(nb):
            k = best[b]
            if k == 0:
                thresholds[c0 + b] = sv[0, b] - 1.0
            elif k == S:
                thresholds[c0 + b] = sv[S - 1, b] + 1.0
            else:
                thresholds[c0 + b] = 0.5 * (sv[k - 1, b] + sv[k, b])
    return thresholds, errors


def _base_projections(X: np.ndarray, orders: set[int]):
    """Projection columns (before polarity) and their (order, indices) keys."""
    cols, keys = [], []
    M = X.shape[1]
    if 1 in orders:
        for l in range(M):
            cols.append(X[:, l])
            keys.append((1, (l,)))
    if 2 in orders:
        for i, j in combinations(range(M), 2):
            cols.append(X[:, i] * X[:, j])
            keys.append((2, (i, j)))
    return np.column_stack(cols), keys


def build_dictionary(train: Dataset, weights: np.ndarray, orders: Iterable[int] = (1, 2)) -> Dictionary:
    """One stump per (feature-or-pair, polarity) with error-optimal threshold."""
    orders = set(orders)
    if not orders or not orders <= {1, 2}:
        raise ValueError("orders must be a non-empty subset of {1, 2}")
    w = check_weights(weights, train.n_samples)
    P, keys = _base_projections(train.features, orders)
    y = train.labels
    stumps: list[Stump] = []
    for polarity in (1, -1):
        thr, _ = _scan_columns(polarity * P, y, w)
        for (order, idx), t in zip(keys, thr):
            stumps.append(Stump(order, idx, polarity, float(t)))
    # regroup into block order: o1+, o1-, o2+, o2-
    n1 = sum(1 for o, _ in keys if o == 1)
    n2 = len(keys) - n1
    pos, neg = stumps[: len(keys)], stumps[len(keys) :]
    ordered = pos[:n1] + neg[:n1] + pos[n1:] + neg[n1:]
    return Dictionary(tuple(ordered), train.dimension)


def predict_matrix(stumps: Sequence[Stump], X: np.ndarray) -> np.ndarray:
    """(S, len(stumps)) matrix of +-1 predictions."""
    if not stumps:
        return np.empty((X.shape[0], 0), dtype=np.int8)
    return np.column_stack([st.evaluate_batch(X) for st in stumps])


def weighted_error(stump: Stump, data: Dataset, weights: np.ndarray) -> float:
    """Sum of weights over misclassified samples."""
    w = check_weights(weights, data.n_samples)
    pred = stump.evaluate_batch(data.features)
    return float(w[pred != data.labels].sum())


def weighted_errors(dictionary: Dictionary, data: Dataset, weights: np.ndarray) -> np.ndarray:
    """Weighted error of every dictionary stump (vectorized)."""
    w = check_weights(weights, data.n_samples)
    P = predict_matrix(dictionary.stumps, data.features)
    return ((P != data.labels[:, None]).T @ w).astype(np.float64)


def select_top_k(
    dictionary: Dictionary,
    data: Dataset,
    weights: np.ndarray,
    k: int,
    exclude: set | None = None,
) -> list[Stump]:
    """The k non-excluded stumps of smallest weighted error, ties by dictionary order."""
    exclude = exclude or set()
    available = [i for i, st in enumerate(dictionary.stumps) if st.identity() not in exclude]
    if k < 1 or k > len(available):
        raise ValueError(f"k={k} out of range (have {len(available)} selectable stumps)")
    errs = weighted_errors(dictionary, data, weights)
    ranked = sorted(available, key=lambda i: (errs[i], i))
    return [dictionary.stumps[i] for i in ranked[:k]]

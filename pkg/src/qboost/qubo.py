"""Discrete training objectives over binary weight variables.

Builders produce either a QuboProblem (quadratic, upper-triangular sparse
coefficients plus constant offset) or a PseudoBooleanProblem (higher-degree
term map).  Squared-diagonal contributions are always folded into linear
terms using w^2 = w.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, log2

import numpy as np

_COEF_EPS = 0.0  # keep exact zeros out of the sparse maps


@dataclass(frozen=True)
class QuboProblem:
    """offset + sum_i linear_i w_i + sum_{i<j} quadratic_ij w_i w_j over w in {0,1}^n."""

    n: int
    linear: np.ndarray
    quadratic: dict
    offset: float

    def __post_init__(self):
        lin = np.asarray(self.linear, dtype=np.float64)
        if lin.shape != (self.n,):
            raise ValueError("linear must have length n")
        for (i, j) in self.quadratic:
            if not (0 <= i < j < self.n):
                raise ValueError(f"bad quadratic key ({i}, {j})")
        object.__setattr__(self, "linear", lin)

    def dense_symmetric(self) -> np.ndarray:
        """Zero-diagonal symmetric coupling matrix (for solvers)."""
        Q = np.zeros((self.n, self.n))
        for (i, j), v in self.quadratic.items():
            Q[i, j] = Q[j, i] = v
        return Q


@dataclass(frozen=True)
class PseudoBooleanProblem:
    """offset + sum over terms: coeff * prod of the tuple's variables."""

    n: int
    terms: dict
    offset: float

    def __post_init__(self):
        for key in self.terms:
            if list(key) != sorted(set(key)) or (key and not 0 <= key[-1] < self.n):
                raise ValueError(f"bad term key {key}")

    @property
    def degree(self) -> int:
        return max((len(k) for k in self.terms), default=0)


@dataclass(frozen=True)
class VariableLayout:
    """Named contiguous index blocks covering [0, n)."""

    blocks: dict

    def __post_init__(self):
        covered = sorted(i for r in self.blocks.values() for i in r)
        if covered != list(range(len(covered))):
            raise ValueError("blocks must be disjoint and cover [0, n)")

    @property
    def n(self) -> int:
        return sum(len(r) for r in self.blocks.values())

    def block(self, name: str) -> range:
        return self.blocks[name]

    def extract(self, assignment: np.ndarray, name: str) -> np.ndarray:
        r = self.blocks[name]
        return np.asarray(assignment)[r.start : r.stop]


def energy(problem, assignment) -> float:
    """Exact polynomial evaluation at a bit vector."""
    z = np.asarray(assignment, dtype=np.float64)
    if z.shape != (problem.n,):
        raise ValueError(f"assignment length {z.shape} != n={problem.n}")
    if isinstance(problem, QuboProblem):
        e = problem.offset + float(problem.linear @ z)
        for (i, j), v in problem.quadratic.items():
            e += v * z[i] * z[j]
        return e
    if isinstance(problem, PseudoBooleanProblem):
        e = problem.offset
        for key, v in problem.terms.items():
            e += v * np.prod(z[list(key)])
        return float(e)
    raise TypeError(f"unsupported problem type {type(problem)!r}")


def _check_pm1(arr: np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(arr)
    if not np.all(np.abs(arr) == 1):
        raise ValueError(f"{name} entries must be -1 or +1")
    return arr.astype(np.float64)


def _quadratic_from_forms(n: int, forms, extra_linear=None, extra_offset=0.0) -> QuboProblem:
    """QUBO for sum_f weight_f * (c_f . z + b_f)^2 (+ extra linear/offset).

    Each form is (coefficient vector over all n variables, constant, weight).
    """
    lin = np.zeros(n)
    quad = np.zeros((n, n))
    offset = float(extra_offset)
    for c, b, wt in forms:
        c = np.asarray(c, dtype=np.float64)
        lin += wt * (c * c + 2.0 * b * c)  # c_i^2 z_i^2 -> z_i
        quad += wt * np.outer(c, c)
        offset += wt * b * b
    if extra_linear is not None:
        lin += np.asarray(extra_linear, dtype=np.float64)
    qmap = {}
    for i in range(n):
        for j in range(i + 1, n):
            v = 2.0 * quad[i, j]
            if v != _COEF_EPS:
                qmap[(i, j)] = v
    return QuboProblem(n, lin, qmap, offset)


def build_training_qubo(
    H: np.ndarray,
    y: np.ndarray,
    kappa: float,
    lam: float,
    frozen_scores: np.ndarray | None = None,
) -> QuboProblem:
    """Quadratic loss + L0 objective over weight bits.

    energy(w) = sum_s (kappa*(F_s + sum_i w_i H_si) - y_s)^2 + lam*sum_i w_i,
    with F the optional frozen scores of already-fixed weak classifiers.
    """
    H = _check_pm1(H, "H")
    y = _check_pm1(y, "y")
    S, N = H.shape
    if y.shape != (S,):
        raise ValueError("y must align with H rows")
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    F = np.zeros(S) if frozen_scores is None else np.asarray(frozen_scores, dtype=np.float64)
    if F.shape != (S,):
        raise ValueError("frozen_scores must have length S")
    b = kappa * F - y
    # residual_s = kappa * H_s . w + b_s
    lin = kappa * kappa * S * np.ones(N) + 2.0 * kappa * (H.T @ b) + lam
    corr = H.T @ H
    qmap = {}
    for i in range(N):
        for j in range(i + 1, N):
            qmap[(i, j)] = 2.0 * kappa * kappa * corr[i, j]
    return QuboProblem(N, lin, qmap, float(b @ b))


def theta_bit_count(N: int) -> int:
    """Number of threshold bits: ceil(log2 N) + 1."""
    return (ceil(log2(N)) if N > 1 else 0) + 1


def build_threshold_qubo(H, y, kappa, lam):
    """Joint optimization of weight bits and a binary-expanded global threshold.

    Loss: sum_s (kappa*(sum_i w_i H_si - sum_k Theta_k 2^k + 2^K - 1) - y_s)^2
    with K = ceil(log2 N) and k running over 0..K, plus lam*sum w_i.
    """
    H = _check_pm1(H, "H")
    y = _check_pm1(y, "y")
    S, N = H.shape
    K = theta_bit_count(N) - 1
    n = N + K + 1
    layout = VariableLayout({"w": range(0, N), "theta": range(N, n)})
    theta_coef = -np.array([2.0**k for k in range(K + 1)])
    const = 2.0**K - 1.0
    forms = []
    for s in range(S):
        c = np.concatenate([H[s], theta_coef]) * kappa
        forms.append((c, kappa * const - y[s], 1.0))
    extra_lin = np.concatenate([np.full(N, lam), np.zeros(K + 1)])
    return _quadratic_from_forms(n, forms, extra_lin), layout


def _ybar_bit_count(N: int) -> int:
    return ceil(log2(N)) if N > 1 else 0


def build_zero_one_qubo_v1(H, y, lam):
    """0-1-loss surrogate with error bits e_s and binary-expanded labels.

    Per sample: (sum_i w_i h_i - y_s*ybar_s)^2
              + N^2*(sum_i w_i h_i - y_s*ybar_s + y_s*N*e_s)^2,
    with ybar_s = 1 + sum_k ybar_{k,s} 2^k, plus lam*sum w_i.
    Variables: N weight bits, S*ceil(log2 N) label bits, S error bits.
    """
    H = _check_pm1(H, "H")
    y = _check_pm1(y, "y")
    S, N = H.shape
    K = _ybar_bit_count(N)
    n = N + S * K + S
    layout = VariableLayout(
        {"w": range(0, N), "ybar": range(N, N + S * K), "err": range(N + S * K, n)}
    )
    pow2 = np.array([2.0**k for k in range(K)])
    forms = []
    for s in range(S):
        c1 = np.zeros(n)
        c1[:N] = H[s]
        c1[N + s * K : N + (s + 1) * K] = -y[s] * pow2
        b1 = -y[s]  # ybar_dagger = 1
        forms.append((c1, b1, 1.0))
        c2 = c1.copy()
        c2[N + S * K + s] = y[s] * N
        forms.append((c2, b1, float(N) ** 2))
    extra_lin = np.zeros(n)
    extra_lin[:N] = lam
    return _quadratic_from_forms(n, forms, extra_lin), layout


def _poly_mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for ka, va in p.items():
        for kb, vb in q.items():
            key = tuple(sorted(set(ka) | set(kb)))
            out[key] = out.get(key, 0.0) + va * vb
    return out


def _poly_add(p: dict, q: dict, scale: float = 1.0) -> None:
    for k, v in q.items():
        p[k] = p.get(k, 0.0) + scale * v


def build_zero_one_objective_v2(H, y, lam):
    """Indicator-bit 0-1-loss objective, kept as a pseudo-Boolean polynomial.

    Per sample: (sum_i w_i h_i - (e+_s - e-_s)*y_s*ybar_s)^2 + e-_s,
    with ybar_s = 1 + sum_k ybar_{k,s} 2^k, plus lam*sum w_i.  The exact
    expansion carries terms up to degree 4 (products e+ e- ybar ybar');
    no quadratization is performed.
    """
    H = _check_pm1(H, "H")
    y = _check_pm1(y, "y")
    S, N = H.shape
    K = _ybar_bit_count(N)
    n = N + S * K + 2 * S
    ep0 = N + S * K
    em0 = N + S * K + S
    layout = VariableLayout(
        {
            "w": range(0, N),
            "ybar": range(N, N + S * K),
            "err_pos": range(ep0, ep0 + S),
            "err_neg": range(em0, em0 + S),
        }
    )
    terms: dict = {}
    for i in range(N):
        terms[(i,)] = terms.get((i,), 0.0) + lam
    for s in range(S):
        u = {(i,): float(H[s, i]) for i in range(N)}
        ybar = {(): 1.0}
        for k in range(K):
            ybar[(N + s * K + k,)] = 2.0**k
        ediff = {(ep0 + s,): 1.0, (em0 + s,): -1.0}
        v = _poly_mul(ediff, ybar)
        v = {k: y[s] * c for k, c in v.items()}
        resid = dict(u)
        _poly_add(resid, v, scale=-1.0)
        sq = _poly_mul(resid, resid)
        _poly_add(terms, sq)
        terms[(em0 + s,)] = terms.get((em0 + s,), 0.0) + 1.0
    offset = terms.pop((), 0.0)
    terms = {k: v for k, v in terms.items() if v != 0.0}
    return PseudoBooleanProblem(n, terms, float(offset)), layout

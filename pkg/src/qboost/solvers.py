"""Exact and heuristic minimization of binary optimization problems.

solve_exhaustive enumerates assignments in lexicographic order (bit 0 most
significant) so ties resolve to the lexicographically smallest bit vector.
solve_tabu is single-bit-flip tabu search with best-improvement selection,
aspiration, and incrementally maintained flip deltas.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from numba import njit

from .qubo import PseudoBooleanProblem, QuboProblem, energy

EXHAUSTIVE_MAX_BITS = 25
_CHUNK_BITS = 20


@dataclass(frozen=True)
class SolverResult:
    assignment: np.ndarray
    energy: float
    evaluations: int
    wall_time: float


@dataclass(frozen=True)
class TabuConfig:
    tenure: int
    max_iterations: int
    restarts: int
    seed: int
    stall_limit: int

    def __post_init__(self):
        for name in ("tenure", "max_iterations", "restarts", "stall_limit"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


def default_tabu_config(n: int, seed: int = 0) -> TabuConfig:
    """Shipped defaults, validated by the tabu-vs-exhaustive quality target."""
    return TabuConfig(
        tenure=min(20, -(-n // 4)),
        max_iterations=200 * n,
        restarts=10,
        seed=seed,
        stall_limit=50 * n,
    )


def assignment_bits(z: int, n: int) -> np.ndarray:
    """Bit vector for enumeration index z; bit 0 is the most significant."""
    return np.array([(z >> (n - 1 - j)) & 1 for j in range(n)], dtype=np.uint8)


def _assignment_block(start: int, count: int, n: int) -> np.ndarray:
    z = np.arange(start, start + count, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((z[:, None] >> shifts[None, :]) & 1).astype(np.float64)


def enumerate_energies(problem) -> np.ndarray:
    """Energies at all 2^n assignments, indexed by enumeration order."""
    n = problem.n
    if n > EXHAUSTIVE_MAX_BITS:
        raise ValueError(f"n={n} exceeds exhaustive limit {EXHAUSTIVE_MAX_BITS}")
    total = 1 << n
    out = np.empty(total)
    chunk = 1 << min(n, _CHUNK_BITS)
    if isinstance(problem, QuboProblem):
        Q = problem.dense_symmetric()
        for start in range(0, total, chunk):
            A = _assignment_block(start, min(chunk, total - start), n)
            e = problem.offset + A @ problem.linear
            e += 0.5 * np.einsum("ij,ij->i", A @ Q, A)
            out[start : start + A.shape[0]] = e
    elif isinstance(problem, PseudoBooleanProblem):
        keys = [np.array(k, dtype=np.int64) for k in problem.terms]
        coefs = np.array(list(problem.terms.values()))
        for start in range(0, total, chunk):
            A = _assignment_block(start, min(chunk, total - start), n)
            e = np.full(A.shape[0], problem.offset)
            for key, c in zip(keys, coefs):
                e += c * A[:, key].prod(axis=1)
            out[start : start + A.shape[0]] = e
    else:
        raise TypeError(f"unsupported problem type {type(problem)!r}")
    return out


def solve_exhaustive(problem) -> SolverResult:
    """Certified global minimum; ties break to the lexicographically smallest bits."""
    t0 = time.perf_counter()
    energies = enumerate_energies(problem)
    z = int(np.argmin(energies))
    bits = assignment_bits(z, problem.n)
    return SolverResult(
        assignment=bits,
        energy=float(energies[z]),
        evaluations=energies.size,
        wall_time=time.perf_counter() - t0,
    )


def incremental_delta(problem: QuboProblem, assignment: np.ndarray, bit: int) -> float:
    """Energy change of flipping one bit, in O(degree of the bit)."""
    if not 0 <= bit < problem.n:
        raise ValueError(f"bit {bit} out of range")
    z = np.asarray(assignment, dtype=np.float64)
    acc = problem.linear[bit]
    for (i, j), v in problem.quadratic.items():
        if i == bit:
            acc += v * z[j]
        elif j == bit:
            acc += v * z[i]
    return float((1.0 - 2.0 * z[bit]) * acc)


@njit(cache=True)
def _tabu_core(lin, Q, x0, tenure, max_iter, stall_limit):  # pragma: no cover
    n = lin.shape[0]
    x = x0.copy()
    # current energy relative to the problem offset
    cur = 0.0
    for i in range(n):
        if x[i]:
            cur += lin[i]
            for j in range(i + 1, n):
                if x[j]:
                    cur += Q[i, j]
    delta = np.empty(n)
    for j in range(n):
        acc = lin[j]
        for k in range(n):
            if k != j and x[k]:
                acc += Q[j, k]
        delta[j] = (1.0 - 2.0 * x[j]) * acc
    best = cur
    best_x = x.copy()
    tabu_until = np.zeros(n, dtype=np.int64)
    stall = 0
    evals = 0
    for it in range(max_iter):
        pick = -1
        pick_delta = 0.0
        for j in range(n):
            evals += 1
            admissible = tabu_until[j] <= it or cur + delta[j] < best - 1e-12
            if admissible and (pick == -1 or delta[j] < pick_delta):
                pick = j
                pick_delta = delta[j]
        if pick == -1:
            # every move tabu and none aspirates: take the overall best move
            pick = 0
            pick_delta = delta[0]
            for j in range(1, n):
                if delta[j] < pick_delta:
                    pick = j
                    pick_delta = delta[j]
        dj = 1.0 - 2.0 * x[pick]
        x[pick] = 1 - x[pick]
        cur += pick_delta
        for k in range(n):
            if k != pick:
                delta[k] += (1.0 - 2.0 * x[k]) * Q[k, pick] * dj
        delta[pick] = -pick_delta
        tabu_until[pick] = it + 1 + tenure
        if cur < best - 1e-12:
            best = cur
            for k in range(n):
                best_x[k] = x[k]
            stall = 0
        else:
            stall += 1
            if stall > stall_limit:
                break
    return best_x, best, evals


def solve_tabu(problem: QuboProblem, config: TabuConfig) -> SolverResult:
    """Best assignment over seeded restarts; deterministic given config."""
    if not isinstance(problem, QuboProblem):
        raise TypeError("tabu search handles quadratic problems only")
    if problem.n < 1:
        raise ValueError("empty problem")
    t0 = time.perf_counter()
    Q = problem.dense_symmetric()
    lin = problem.linear
    best_x = None
    best_e = np.inf
    evals = 0
    for r in range(config.restarts):
        rng = np.random.default_rng(config.seed + r)
        x0 = rng.integers(0, 2, problem.n).astype(np.uint8)
        bx, be, ev = _tabu_core(
            lin, Q, x0, config.tenure, config.max_iterations, config.stall_limit
        )
        evals += ev
        if be < best_e - 1e-12:
            best_e = be
            best_x = bx
    final = float(energy(problem, best_x))
    return SolverResult(
        assignment=best_x.astype(np.uint8),
        energy=final,
        evaluations=evals,
        wall_time=time.perf_counter() - t0,
    )


def exhaustive_solver():
    """Solver callable for the boosting loops."""
    return solve_exhaustive


def tabu_solver(seed: int = 0, config: TabuConfig | None = None):
    """Solver callable using tabu search; config defaults derive from problem size."""

    def solve(problem: QuboProblem) -> SolverResult:
        cfg = config if config is not None else default_tabu_config(problem.n, seed)
        return solve_tabu(problem, cfg)

    return solve

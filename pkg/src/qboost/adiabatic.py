"""Exact-diagonalization spectral analysis of interpolated Hamiltonians.

H(s) = (1-s)*H_B + s*H_P with H_B = sum_i (1 - sigma_x_i)/2 and H_P the
diagonal operator holding the QUBO energies.  Qubit ordering: variable 0
maps to the most significant bit of the computational-basis index, so
diagonal entry z corresponds to the same bit vector solve_exhaustive
enumerates at index z.

Dense diagonalization is used up to 8 qubits; above that a matrix-free
Lanczos-type eigensolver (ARPACK via scipy) works from implicit
matrix-vector products, never materializing the 2^n x 2^n operator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .qubo import QuboProblem
from .solvers import enumerate_energies

MAX_QUBITS = 14
DENSE_MAX_QUBITS = 8
DEGENERACY_TOL = 1e-9
DEFAULT_GRID_POINTS = 201


class EigensolverError(RuntimeError):
    """Iterative eigensolver failed to converge at a given s."""


@dataclass(frozen=True)
class SpectralCurve:
    s_grid: np.ndarray
    E0: np.ndarray
    E1: np.ndarray
    n_qubits: int


@dataclass(frozen=True)
class GapReport:
    g_min: float
    s_at_gmin: float
    curvature_peak: float
    s_at_peak: float
    v01_at_peak: float | None


def problem_hamiltonian_diagonal(problem: QuboProblem) -> np.ndarray:
    """2^n diagonal of H_P; entry z is the QUBO energy of bit vector z."""
    if problem.n > MAX_QUBITS:
        raise ValueError(f"n={problem.n} exceeds qubit limit {MAX_QUBITS}")
    return enumerate_energies(problem)


def _flip_indices(n: int) -> list[np.ndarray]:
    """Index maps implementing the single-bit-flip of each qubit."""
    idx = np.arange(1 << n)
    return [idx ^ (1 << (n - 1 - j)) for j in range(n)]


def _hb_matvec(v: np.ndarray, n: int, flips) -> np.ndarray:
    out = (n / 2.0) * v
    for f in flips:
        out = out - 0.5 * v[f]
    return out


def dense_hamiltonian(diag: np.ndarray, s: float) -> np.ndarray:
    """Dense (1-s)H_B + s*H_P; only for small qubit counts."""
    dim = diag.size
    n = dim.bit_length() - 1
    H = np.zeros((dim, dim))
    np.fill_diagonal(H, (1.0 - s) * (n / 2.0) + s * diag)
    for f in _flip_indices(n):
        H[np.arange(dim), f] += -0.5 * (1.0 - s)
    return H


def _two_lowest(diag: np.ndarray, s: float, n: int, flips, want_vectors=False):
    dim = diag.size
    if n <= DENSE_MAX_QUBITS:
        H = dense_hamiltonian(diag, s)
        if want_vectors:
            vals, vecs = np.linalg.eigh(H)
            return vals[0], vals[1], vecs[:, 0], vecs[:, 1]
        vals = np.linalg.eigvalsh(H)
        return vals[0], vals[1], None, None

    def matvec(v):
        return (1.0 - s) * _hb_matvec(v, n, flips) + s * (diag * v)

    op = LinearOperator((dim, dim), matvec=matvec, dtype=np.float64)
    # deterministic start vector with overlap on every basis state; the
    # small ripple keeps it from being an exact eigenvector (ARPACK cannot
    # start from a zero residual)
    v0 = 1.0 + 1e-3 * np.sin(np.arange(dim, dtype=np.float64))
    v0 /= np.linalg.norm(v0)
    try:
        vals, vecs = eigsh(
            op, k=2, which="SA", v0=v0, ncv=min(dim, 40), tol=1e-10,
            maxiter=20000,
        )
    except ArpackNoConvergence as exc:
        raise EigensolverError(f"eigensolver failed to converge at s={s}") from exc
    order = np.argsort(vals)
    vals = vals[order]
    vecs = vecs[:, order]
    if want_vectors:
        return vals[0], vals[1], vecs[:, 0], vecs[:, 1]
    return vals[0], vals[1], None, None


def spectral_sweep(problem: QuboProblem, s_grid=None) -> SpectralCurve:
    """Two lowest eigenvalues of the interpolated Hamiltonian over an s-grid."""
    n = problem.n
    if n > MAX_QUBITS:
        raise ValueError(f"n={n} exceeds qubit limit {MAX_QUBITS}")
    if s_grid is None:
        s_grid = np.linspace(0.0, 1.0, DEFAULT_GRID_POINTS)
    s_grid = np.asarray(s_grid, dtype=np.float64)
    if s_grid[0] != 0.0 or s_grid[-1] != 1.0 or np.any(np.diff(s_grid) <= 0):
        raise ValueError("s_grid must be strictly increasing from 0 to 1")
    diag = problem_hamiltonian_diagonal(problem)
    flips = _flip_indices(n)
    E0 = np.empty(s_grid.size)
    E1 = np.empty(s_grid.size)
    for i, s in enumerate(s_grid):
        e0, e1, _, _ = _two_lowest(diag, float(s), n, flips)
        E0[i], E1[i] = e0, e1
    return SpectralCurve(s_grid, E0, E1, n)


def min_gap(curve: SpectralCurve) -> tuple[float, float]:
    """Minimum of E1 - E0 over the grid; ties resolve to the smallest s."""
    gap = curve.E1 - curve.E0
    i = int(np.argmin(gap))
    return float(gap[i]), float(curve.s_grid[i])


def curvature_metric(curve: SpectralCurve):
    """|d^2 E0/ds^2 * s^2 (1-s)^2| by central differences on a uniform grid.

    Returns (interior s values, metric values, peak, s at peak).
    """
    s = curve.s_grid
    if s.size < 51:
        raise ValueError("curvature metric needs at least 51 grid points")
    steps = np.diff(s)
    ds = steps[0]
    if not np.allclose(steps, ds, rtol=0.0, atol=1e-12):
        raise ValueError("curvature metric requires a uniform s-grid")
    e = curve.E0
    second = (e[2:] - 2.0 * e[1:-1] + e[:-2]) / ds**2
    s_in = s[1:-1]
    values = np.abs(second * s_in**2 * (1.0 - s_in) ** 2)
    i = int(np.argmax(values))
    return s_in, values, float(values[i]), float(s_in[i])


def v01_matrix_element(problem: QuboProblem, s: float) -> float | None:
    """|<psi0| (H_P - H_B) |psi1>| at interpolation point s.

    Returns None (undefined) when the two lowest levels are degenerate
    within the tolerance.
    """
    n = problem.n
    if n > MAX_QUBITS:
        raise ValueError(f"n={n} exceeds qubit limit {MAX_QUBITS}")
    diag = problem_hamiltonian_diagonal(problem)
    flips = _flip_indices(n)
    e0, e1, v0, v1 = _two_lowest(diag, float(s), n, flips, want_vectors=True)
    if e1 - e0 < DEGENERACY_TOL:
        return None
    dh_v1 = diag * v1 - _hb_matvec(v1, n, flips)
    return float(abs(v0 @ dh_v1))


def gap_report(problem: QuboProblem, s_grid=None, with_v01: bool = True) -> tuple[SpectralCurve, GapReport]:
    """Spectral sweep plus derived gap/curvature summary."""
    curve = spectral_sweep(problem, s_grid)
    g, s_g = min_gap(curve)
    _, _, peak, s_peak = curvature_metric(curve)
    v01 = v01_matrix_element(problem, s_peak) if with_v01 else None
    return curve, GapReport(g, s_g, peak, s_peak, v01)


def scaling_sweep(qubits_list, instance_generator, runs_per_size, s_grid=None):
    """Mean and std of the curvature peak per problem size.

    instance_generator(n, run_index) must return a QuboProblem with n
    variables.  Returns a list of (n, mean_peak, std_peak) rows.
    """
    rows = []
    for n in qubits_list:
        if n > MAX_QUBITS:
            raise ValueError(f"n={n} exceeds qubit limit {MAX_QUBITS}")
        peaks = []
        for r in range(runs_per_size):
            problem = instance_generator(n, r)
            curve = spectral_sweep(problem, s_grid)
            _, _, peak, _ = curvature_metric(curve)
            peaks.append(peak)
        peaks = np.array(peaks)
        rows.append((n, float(peaks.mean()), float(peaks.std())))
    return rows


def training_qubo_instance(n: int, seed: int, n_samples: int = 30, overlap: float = 0.95) -> QuboProblem:
    """Training objective over n weight bits built from fresh synthetic data.

    Gaussian-mixture data, order-1 stump dictionary, top-n stumps under
    uniform weights, scale factor 2/n, weak-regime lambda.
    """
    from .data import generate_gaussian_mixture, uniform_weights
    from .stumps import build_dictionary, predict_matrix, select_top_k

    M = max(2, -(-n // 2))
    data = generate_gaussian_mixture(M, overlap, n_samples, seed)
    w = uniform_weights(n_samples)
    dictionary = build_dictionary(data, w, orders=(1,))
    stumps = select_top_k(dictionary, data, w, n)
    H = predict_matrix(stumps, data.features)
    lam = 0.5 * (2.0 / n + 1.0 / n**2)
    from .qubo import build_training_qubo

    return build_training_qubo(H, data.labels, 2.0 / n, lam)

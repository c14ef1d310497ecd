"""Training procedures: AdaBoost baseline and the QUBO inner/outer loops.

The inner loop fills Q optimization slots per iteration (either topping up
the retained selection or replacing all Q candidates), sweeps the
regularization strength lambda against the validation set, and reweights
training samples by squared residual.  The outer loop freezes the
classifier built so far and keeps invoking the inner loop with the frozen
score folded into the objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, SplitDataset, uniform_weights
from .qubo import build_training_qubo
from .stumps import Dictionary, Stump, build_dictionary, predict_matrix, select_top_k

WEIGHT_EPS = 1e-12
ADA_EPS = 1e-12


@dataclass(frozen=True)
class StrongClassifier:
    """Thresholded weighted sum of stumps; QBoost classifiers use unit multipliers."""

    stumps: tuple[Stump, ...]
    alphas: np.ndarray
    kappa: float
    theta: float

    def __post_init__(self):
        a = np.asarray(self.alphas, dtype=np.float64)
        if a.shape != (len(self.stumps),):
            raise ValueError("alphas must align with stumps")
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "stumps", tuple(self.stumps))

    def score(self, X: np.ndarray) -> np.ndarray:
        if not self.stumps:
            return np.zeros(X.shape[0])
        return predict_matrix(self.stumps, X).astype(np.float64) @ self.alphas

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.where(self.score(X) - self.theta >= 0.0, 1, -1)


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    t_total: int
    train_error: float
    val_error: float
    chosen_lambda: float | None
    objective: float | None
    solver_evaluations: int
    solver_time: float


@dataclass
class TrainReport:
    iterations: list = field(default_factory=list)
    final_test_error: float = float("nan")
    total_weak_learners: int = 0


def test_error(classifier: StrongClassifier, data: Dataset) -> float:
    """Fraction of misclassified samples."""
    if classifier.stumps and data.dimension <= max(
        max(st.indices) for st in classifier.stumps
    ):
        raise ValueError("dataset dimension too small for classifier stumps")
    return float(np.mean(classifier.predict(data.features) != data.labels))


def compute_theta(stumps, train: Dataset, alphas=None) -> float:
    """Mean unthresholded score over the training samples."""
    if len(stumps) == 0:
        return 0.0
    if alphas is None:
        alphas = np.ones(len(stumps))
    scores = predict_matrix(stumps, train.features).astype(np.float64) @ np.asarray(alphas, dtype=np.float64)
    return float(scores.mean())


def update_sample_weights(d: np.ndarray, scores: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Multiply by squared residual, guard against all-zeros, renormalize."""
    d = np.asarray(d, dtype=np.float64)
    resid = (np.asarray(scores, dtype=np.float64) - y) ** 2
    nxt = d * resid + WEIGHT_EPS / d.size
    return nxt / nxt.sum()


def vc_bound(vc_dict: int, T: int) -> float:
    """VC upper bound of a T-term voted classifier over a dictionary."""
    if vc_dict < 1 or T < 1:
        raise ValueError("vc_dict and T must be positive")
    return 2.0 * (vc_dict + 1) * (T + 1) * math.log2(math.e * (T + 1))


def generalization_bound(train_error: float, vc_h: float, S: int, delta: float) -> float:
    """Test-error upper bound from the training error and VC capacity."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if S < 1 or vc_h <= 0:
        raise ValueError("S and vc_h must be positive")
    return train_error + math.sqrt(
        (vc_h * math.log(2.0 * S / vc_h + 1.0) + math.log(9.0 / delta)) / S
    )


def lambda_grid(Q: int, points: int = 16) -> np.ndarray:
    """Default sweep: 0 plus a geometric grid around the weak-regime bound."""
    lam_w = 2.0 / Q + 1.0 / Q**2
    grid = np.geomspace(1e-3 * lam_w, 1e2 * lam_w, points)
    return np.concatenate([[0.0], grid])


def _sign_error(score: np.ndarray, y: np.ndarray) -> float:
    pred = np.where(score >= 0.0, 1, -1)
    return float(np.mean(pred != y))


def adaboost_train(
    dictionary: Dictionary,
    split: SplitDataset,
    patience: int = 400,
    max_rounds: int = 2000,
) -> tuple[StrongClassifier, TrainReport]:
    """Discrete AdaBoost over a fixed dictionary with validation-based stopping.

    Stops once the validation error has not improved for `patience` rounds
    (or a degenerate round occurs) and truncates at the best round.
    """
    if len(dictionary) == 0:
        raise ValueError("empty dictionary")
    train, val = split.train, split.validation
    y = train.labels
    P = predict_matrix(dictionary.stumps, train.features)
    P_val = predict_matrix(dictionary.stumps, val.features)
    mis = P != y[:, None]
    d = uniform_weights(train.n_samples)
    picks: list[int] = []
    alphas: list[float] = []
    train_score = np.zeros(train.n_samples)
    val_score = np.zeros(val.n_samples)
    best_val = np.inf
    best_round = 0
    report = TrainReport()
    for t in range(1, max_rounds + 1):
        errs = d @ mis
        best = int(np.argmin(errs))
        eps_raw = float(errs[best])
        if eps_raw >= 0.5 - ADA_EPS:
            break
        eps = min(max(eps_raw, ADA_EPS), 1.0 - ADA_EPS)
        alpha = 0.5 * math.log((1.0 - eps) / eps)
        picks.append(best)
        alphas.append(alpha)
        h = P[:, best].astype(np.float64)
        d = d * np.exp(-alpha * y * h)
        d = d / d.sum()
        train_score += alpha * h
        val_score += alpha * P_val[:, best].astype(np.float64)
        val_err = _sign_error(val_score, val.labels)
        report.iterations.append(
            IterationRecord(
                iteration=t,
                t_total=t,
                train_error=_sign_error(train_score, y),
                val_error=val_err,
                chosen_lambda=None,
                objective=None,
                solver_evaluations=0,
                solver_time=0.0,
            )
        )
        if val_err < best_val - ADA_EPS:
            best_val = val_err
            best_round = t
        if eps_raw <= ADA_EPS:
            break
        if t - best_round >= patience:
            break
    kept = picks[:best_round]
    clf = StrongClassifier(
        stumps=tuple(dictionary.stumps[i] for i in kept),
        alphas=np.array(alphas[:best_round]),
        kappa=1.0,
        theta=0.0,
    )
    report.final_test_error = test_error(clf, split.test)
    report.total_weak_learners = len(kept)
    return clf, report


def _run_inner_loop(
    dictionary,
    split,
    Q,
    lambdas,
    solver,
    mode,
    scale,
    patience,
    max_iterations,
    refit,
    d_init=None,
    frozen_train=None,
    frozen_val=None,
    t_frozen=0,
    report=None,
    iteration_offset=0,
):
    """Shared inner-loop body; returns (best stump list, final d_inner, best val error)."""
    if mode not in ("augment", "replace_all"):
        raise ValueError(f"unknown mode {mode!r}")
    if Q < 1 or Q > len(dictionary):
        raise ValueError("Q must satisfy 1 <= Q <= |dictionary|")
    lambdas = sorted(float(l) for l in lambdas)
    if not lambdas:
        raise ValueError("lambdas must be non-empty")
    train, val = split.train, split.validation
    y = train.labels
    orders = tuple(sorted({st.order for st in dictionary.stumps}))
    d = uniform_weights(train.n_samples) if d_init is None else np.array(d_init)
    f_train = np.zeros(train.n_samples) if frozen_train is None else frozen_train
    f_val = np.zeros(val.n_samples) if frozen_val is None else frozen_val
    selected: list[Stump] = []
    best_val = np.inf
    best_selected: list[Stump] = []
    since_improve = 0
    kappa = scale / (t_frozen + Q)
    for it in range(1, max_iterations + 1):
        dict_cur = build_dictionary(train, d, orders) if refit else dictionary
        if mode == "augment" and selected:
            exclude = {st.identity() for st in selected}
            n_new = Q - len(selected)
            fresh = select_top_k(dict_cur, train, d, n_new, exclude) if n_new > 0 else []
            candidates = list(selected) + fresh
        else:
            candidates = select_top_k(dict_cur, train, d, Q)
        H = predict_matrix(candidates, train.features)
        H_val = predict_matrix(candidates, val.features).astype(np.float64)
        lam_best = None
        res_best = None
        sel_best = None
        val_best = np.inf
        evals = 0
        solver_time = 0.0
        for lam in lambdas:
            problem = build_training_qubo(H, y, kappa, lam, frozen_scores=f_train)
            res = solver(problem)
            evals += res.evaluations
            solver_time += res.wall_time
            w = np.asarray(res.assignment, dtype=bool)
            sel = [candidates[i] for i in range(Q) if w[i]]
            v_score = f_val + H_val[:, w].sum(axis=1)
            v_err = _sign_error(v_score, val.labels)
            if v_err < val_best - ADA_EPS:
                val_best = v_err
                lam_best = lam
                res_best = res
                sel_best = sel
        selected = sel_best
        t_score = (
            predict_matrix(selected, train.features).astype(np.float64).sum(axis=1)
            if selected
            else np.zeros(train.n_samples)
        )
        train_err = _sign_error(f_train + t_score, y)
        if report is not None:
            report.iterations.append(
                IterationRecord(
                    iteration=iteration_offset + it,
                    t_total=t_frozen + len(selected),
                    train_error=train_err,
                    val_error=val_best,
                    chosen_lambda=lam_best,
                    objective=res_best.energy,
                    solver_evaluations=evals,
                    solver_time=solver_time,
                )
            )
        if val_best < best_val - ADA_EPS:
            best_val = val_best
            best_selected = list(selected)
            since_improve = 0
        else:
            since_improve += 1
        mean_score = t_score / len(selected) if selected else np.zeros_like(t_score)
        d = update_sample_weights(d, mean_score, y)
        if since_improve >= patience:
            break
    return best_selected, d, best_val


def inner_loop_train(
    dictionary: Dictionary,
    split: SplitDataset,
    Q: int,
    lambdas,
    solver,
    mode: str = "replace_all",
    scale: float = 2.0,
    patience: int = 2,
    max_iterations: int = 50,
    refit: bool = True,
) -> tuple[StrongClassifier, TrainReport]:
    """Single-window training: fill Q slots per iteration, sweep lambda, reweight."""
    report = TrainReport()
    stumps, _, _ = _run_inner_loop(
        dictionary, split, Q, lambdas, solver, mode, scale, patience, max_iterations, refit,
        report=report,
    )
    clf = StrongClassifier(
        stumps=tuple(stumps),
        alphas=np.ones(len(stumps)),
        kappa=scale / Q,
        theta=compute_theta(stumps, split.train),
    )
    report.final_test_error = test_error(clf, split.test)
    report.total_weak_learners = len(stumps)
    return clf, report


def outer_loop_train(
    dictionary: Dictionary,
    split: SplitDataset,
    Q: int,
    lambdas,
    solver,
    mode: str = "replace_all",
    scale: float = 2.0,
    patience: int = 2,
    inner_patience: int = 2,
    max_passes: int = 20,
    inner_max_iterations: int = 50,
    refit: bool = True,
) -> tuple[StrongClassifier, TrainReport]:
    """Concatenate inner-loop selections with frozen scores folded into the objective."""
    train, val = split.train, split.validation
    d_outer = uniform_weights(train.n_samples)
    frozen: list[Stump] = []
    f_train = np.zeros(train.n_samples)
    f_val = np.zeros(val.n_samples)
    report = TrainReport()
    best_val = np.inf
    best_prefix: list[Stump] = []
    since_improve = 0
    for p in range(max_passes):
        new, _, _ = _run_inner_loop(
            dictionary, split, Q, lambdas, solver, mode, scale,
            inner_patience, inner_max_iterations, refit,
            d_init=d_outer, frozen_train=f_train, frozen_val=f_val,
            t_frozen=len(frozen), report=report,
            iteration_offset=len(report.iterations),
        )
        if not new:
            break
        frozen.extend(new)
        f_train = f_train + predict_matrix(new, train.features).astype(np.float64).sum(axis=1)
        f_val = f_val + predict_matrix(new, val.features).astype(np.float64).sum(axis=1)
        d_outer = update_sample_weights(d_outer, f_train / len(frozen), train.labels)
        val_err = _sign_error(f_val, val.labels)
        if val_err < best_val - ADA_EPS:
            best_val = val_err
            best_prefix = list(frozen)
            since_improve = 0
        else:
            since_improve += 1
            if since_improve >= patience:
                break
    stumps = best_prefix
    clf = StrongClassifier(
        stumps=tuple(stumps),
        alphas=np.ones(len(stumps)),
        kappa=scale / (len(stumps) + Q),
        theta=compute_theta(stumps, train),
    )
    report.final_test_error = test_error(clf, split.test)
    report.total_weak_learners = len(stumps)
    return clf, report

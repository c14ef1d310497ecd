"""Text serialization: problem instances, model files, training reports.

Problem file lines: "<n>", "offset <v>", "lin <i> <v>", "quad <i> <j> <v>",
"cube <i> <j> <k> <v>", "quart <i> <j> <k> <l> <v>".  Values are printed at
17 significant digits so round-trips are exact for float64.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict

import numpy as np

from .boosting import StrongClassifier, TrainReport
from .qubo import PseudoBooleanProblem, QuboProblem
from .stumps import Stump

_TERM_TAGS = {2: "quad", 3: "cube", 4: "quart"}
_TAG_DEGREES = {v: k for k, v in _TERM_TAGS.items()}


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def save_problem(problem, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{problem.n}\n")
        fh.write(f"offset {_fmt(problem.offset)}\n")
        if isinstance(problem, QuboProblem):
            for i, v in enumerate(problem.linear):
                if v != 0.0:
                    fh.write(f"lin {i} {_fmt(v)}\n")
            for (i, j) in sorted(problem.quadratic):
                fh.write(f"quad {i} {j} {_fmt(problem.quadratic[(i, j)])}\n")
        elif isinstance(problem, PseudoBooleanProblem):
            for key in sorted(problem.terms, key=lambda k: (len(k), k)):
                v = problem.terms[key]
                if len(key) == 1:
                    fh.write(f"lin {key[0]} {_fmt(v)}\n")
                else:
                    tag = _TERM_TAGS[len(key)]
                    fh.write(f"{tag} {' '.join(map(str, key))} {_fmt(v)}\n")
        else:
            raise TypeError(f"unsupported problem type {type(problem)!r}")


def load_problem(path):
    n = None
    offset = 0.0
    linear = {}
    higher = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if n is None:
                n = int(parts[0])
                continue
            tag = parts[0]
            if tag == "offset":
                offset = float(parts[1])
            elif tag == "lin":
                linear[int(parts[1])] = float(parts[2])
            elif tag in _TAG_DEGREES:
                deg = _TAG_DEGREES[tag]
                key = tuple(int(p) for p in parts[1 : 1 + deg])
                higher[key] = float(parts[1 + deg])
            else:
                raise ValueError(f"unknown problem-file tag {tag!r}")
    if n is None:
        raise ValueError("empty problem file")
    if all(len(k) == 2 for k in higher):
        lin = np.zeros(n)
        for i, v in linear.items():
            lin[i] = v
        return QuboProblem(n, lin, dict(higher), offset)
    terms = {(i,): v for i, v in linear.items()}
    terms.update(higher)
    return PseudoBooleanProblem(n, terms, offset)


def save_model(classifier: StrongClassifier, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"kappa {_fmt(classifier.kappa)}\n")
        fh.write(f"theta {_fmt(classifier.theta)}\n")
        for st, a in zip(classifier.stumps, classifier.alphas):
            idx = " ".join(map(str, st.indices))
            fh.write(f"stump {st.order} {idx} {st.polarity} {_fmt(st.threshold)} {_fmt(a)}\n")


def load_model(path) -> StrongClassifier:
    kappa = 1.0
    theta = 0.0
    stumps = []
    alphas = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "kappa":
                kappa = float(parts[1])
            elif parts[0] == "theta":
                theta = float(parts[1])
            elif parts[0] == "stump":
                order = int(parts[1])
                idx = tuple(int(p) for p in parts[2 : 2 + order])
                polarity = int(parts[2 + order])
                threshold = float(parts[3 + order])
                alpha = float(parts[4 + order])
                stumps.append(Stump(order, idx, polarity, threshold))
                alphas.append(alpha)
            else:
                raise ValueError(f"unknown model-file tag {parts[0]!r}")
    return StrongClassifier(tuple(stumps), np.array(alphas), kappa, theta)


REPORT_COLUMNS = [
    "iteration",
    "t_total",
    "train_error",
    "val_error",
    "chosen_lambda",
    "objective",
    "solver_evaluations",
]


def report_to_csv(report: TrainReport, path) -> None:
    """One row per iteration; solver wall time is kept out of the deterministic CSV."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for rec in report.iterations:
            row = asdict(rec)
            writer.writerow(["" if row[c] is None else repr(row[c]) if isinstance(row[c], float) else row[c] for c in REPORT_COLUMNS])


def report_to_json(report: TrainReport, path) -> None:
    payload = {
        "final_test_error": report.final_test_error,
        "total_weak_learners": report.total_weak_learners,
        "iterations": [
            {k: v for k, v in asdict(rec).items() if k != "solver_time"}
            for rec in report.iterations
        ],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def curve_to_csv(curve, report, path) -> None:
    """Spectral curve CSV: s, E0, E1, gap per grid point."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["s", "E0", "E1", "gap"])
        for s, e0, e1 in zip(curve.s_grid, curve.E0, curve.E1):
            writer.writerow([repr(float(s)), repr(float(e0)), repr(float(e1)), repr(float(e1 - e0))])

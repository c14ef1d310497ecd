"""Experiment runner: data generation, training, comparisons, spectral analysis.

All randomness flows from one root seed; per-component seeds derive as
SeedSequence([root_seed, crc32(component_name), replica]).generate_state(1)[0],
so sub-experiments are independently reproducible.  Wall-clock data goes to a
separate timing.json and is excluded from determinism guarantees.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import sys
import time
import zlib
from pathlib import Path

import numpy as np

from . import boosting, data, serialize, solvers
from .adiabatic import gap_report, scaling_sweep, training_qubo_instance
from .stumps import build_dictionary

DEFAULTS = {
    "seed": 0,
    "out": "out",
    "data": {
        "source": "gaussian",  # gaussian | box | csv
        "csv_path": None,
        "csv_header": False,
        "M": 30,
        "overlap": 0.95,
        "S": 3000,
        "normalize": False,
    },
    "train": {
        "algorithm": "qboost-outer",  # qboost-inner | qboost-outer | adaboost
        "Q": 32,
        "mode": "replace_all",  # replace_all | augment
        "scale": 2.0,
        "lambdas": None,  # default grid from Q when null
        "solver": "tabu",  # tabu | exhaustive
        "orders": [1, 2],
        "patience": 2,
        "adaboost_patience": 400,
        "refit": True,
        "tabu": None,  # optional {tenure, max_iterations, restarts, stall_limit}
    },
    "sweep": {
        "overlaps": [0.8, 0.95, 1.0],
        "algorithms": ["qboost-outer", "adaboost"],
        "seeds": 5,
    },
    "gap": {"n": 8, "grid_points": 201, "problem_path": None},
    "scaling": {"qubits": [6, 8], "runs_per_size": 5, "grid_points": 101},
}

TASKS = ("gen-data", "train", "compare", "sweep-overlap", "gap-analysis", "scaling")


def derive_seed(root: int, component: str, replica: int = 0) -> int:
    ss = np.random.SeedSequence([int(root), zlib.crc32(component.encode()), int(replica)])
    return int(ss.generate_state(1)[0])


def _merge(base: dict, override: dict, path="") -> list[str]:
    """In-place nested merge; returns a list of unknown-key errors."""
    errors = []
    for key, val in override.items():
        if key not in base:
            errors.append(f"unknown config key: {path}{key}")
            continue
        if isinstance(base[key], dict) and isinstance(val, dict):
            errors.extend(_merge(base[key], val, f"{path}{key}."))
        else:
            base[key] = val
    return errors


def load_config(args) -> tuple[dict, list[str]]:
    cfg = copy.deepcopy(DEFAULTS)
    errors = []
    if args.config:
        path = Path(args.config)
        if not path.exists():
            return cfg, [f"config file not found: {path}"]
        with open(path, "r", encoding="utf-8") as fh:
            try:
                errors.extend(_merge(cfg, json.load(fh)))
            except json.JSONDecodeError as exc:
                return cfg, [f"config parse error: {exc}"]
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.out is not None:
        cfg["out"] = args.out
    if args.solver is not None:
        cfg["train"]["solver"] = args.solver
    if args.mode is not None:
        cfg["train"]["mode"] = args.mode.replace("-", "_")
    return cfg, errors


def validate_config(task: str, cfg: dict) -> list[str]:
    errors = []
    dcfg, tcfg = cfg["data"], cfg["train"]
    if dcfg["source"] not in ("gaussian", "box", "csv"):
        errors.append(f"data.source must be gaussian|box|csv, got {dcfg['source']!r}")
    if dcfg["source"] == "csv":
        if not dcfg["csv_path"]:
            errors.append("data.csv_path required for csv source")
        elif not Path(dcfg["csv_path"]).exists():
            errors.append(f"data.csv_path does not exist: {dcfg['csv_path']}")
    if not 0.0 <= float(dcfg["overlap"]) <= 1.0:
        errors.append("data.overlap must lie in [0, 1]")
    if tcfg["algorithm"] not in ("qboost-inner", "qboost-outer", "adaboost"):
        errors.append(f"unknown algorithm {tcfg['algorithm']!r}")
    if tcfg["solver"] not in ("tabu", "exhaustive"):
        errors.append(f"unknown solver {tcfg['solver']!r}")
    if tcfg["mode"] not in ("replace_all", "augment"):
        errors.append(f"unknown mode {tcfg['mode']!r}")
    if tcfg["Q"] < 1:
        errors.append("train.Q must be positive")
    if task == "scaling" and any(n > 14 for n in cfg["scaling"]["qubits"]):
        errors.append("scaling.qubits entries must be <= 14")
    return errors


def _make_dataset(cfg: dict, root_seed: int, replica: int = 0) -> data.Dataset:
    dcfg = cfg["data"]
    if dcfg["source"] == "csv":
        ds = data.load_csv(dcfg["csv_path"], header=dcfg["csv_header"])
    elif dcfg["source"] == "box":
        ds = data.generate_box_cluster_2d(dcfg["S"], derive_seed(root_seed, "data", replica))
    else:
        ds = data.generate_gaussian_mixture(
            dcfg["M"], dcfg["overlap"], dcfg["S"], derive_seed(root_seed, "data", replica)
        )
    if dcfg["normalize"]:
        ds = data.l2_normalize(ds)
    return ds


def _make_solver(tcfg: dict, seed: int):
    if tcfg["solver"] == "exhaustive":
        return solvers.exhaustive_solver()
    if tcfg["tabu"]:

        def solve(problem):
            cfg = solvers.TabuConfig(seed=seed, **tcfg["tabu"])
            return solvers.solve_tabu(problem, cfg)

        return solve
    return solvers.tabu_solver(seed=seed)


def _train_one(cfg: dict, root_seed: int, replica: int = 0):
    """Build data, split, dictionary, and run the configured algorithm."""
    tcfg = cfg["train"]
    ds = _make_dataset(cfg, root_seed, replica)
    split = data.split_even(ds, derive_seed(root_seed, "split", replica))
    dictionary = build_dictionary(
        split.train, data.uniform_weights(split.train.n_samples), tuple(tcfg["orders"])
    )
    if tcfg["Q"] > len(dictionary) and tcfg["algorithm"] != "adaboost":
        raise ValueError(
            f"train.Q={tcfg['Q']} exceeds dictionary size {len(dictionary)}"
        )
    if tcfg["algorithm"] == "adaboost":
        clf, report = boosting.adaboost_train(dictionary, split, patience=tcfg["adaboost_patience"])
    else:
        lambdas = tcfg["lambdas"] or boosting.lambda_grid(tcfg["Q"]).tolist()
        solver = _make_solver(tcfg, derive_seed(root_seed, "solver", replica))
        fn = boosting.outer_loop_train if tcfg["algorithm"] == "qboost-outer" else boosting.inner_loop_train
        clf, report = fn(
            dictionary, split, tcfg["Q"], lambdas, solver,
            mode=tcfg["mode"], scale=tcfg["scale"], refit=tcfg["refit"],
        )
    return clf, report, split


def _write_metrics(out: Path, task: str, cfg: dict, results: list[dict]) -> None:
    # the output path is not an experiment parameter; keep it out so two
    # runs of the same experiment produce byte-identical metrics
    recorded = {k: v for k, v in cfg.items() if k != "out"}
    payload = {"task": task, "seed": cfg["seed"], "config": recorded, "results": results}
    with open(out / "metrics.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_timing(out: Path, seconds: float) -> None:
    with open(out / "timing.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump({"wall_time_seconds": seconds}, fh)
        fh.write("\n")


def run_gen_data(cfg: dict, out: Path) -> None:
    ds = _make_dataset(cfg, cfg["seed"])
    data.save_csv(ds, out / "dataset.csv")


def run_train(cfg: dict, out: Path) -> None:
    clf, report, split = _train_one(cfg, cfg["seed"])
    serialize.save_model(clf, out / "model.txt")
    serialize.report_to_csv(report, out / "report.csv")
    serialize.report_to_json(report, out / "report.json")
    _write_metrics(
        out, "train", cfg,
        [
            {
                "algorithm": cfg["train"]["algorithm"],
                "overlap": cfg["data"]["overlap"] if cfg["data"]["source"] == "gaussian" else None,
                "Q": cfg["train"]["Q"],
                "train_error": boosting.test_error(clf, split.train),
                "validation_error": boosting.test_error(clf, split.validation),
                "test_error": report.final_test_error,
                "weak_learners": report.total_weak_learners,
                "iterations": len(report.iterations),
            }
        ],
    )


def run_compare(cfg: dict, out: Path) -> None:
    results = []
    for algorithm in ("qboost-outer", "adaboost"):
        sub = copy.deepcopy(cfg)
        sub["train"]["algorithm"] = algorithm
        clf, report, split = _train_one(sub, cfg["seed"])
        results.append(
            {
                "algorithm": algorithm,
                "overlap": cfg["data"]["overlap"] if cfg["data"]["source"] == "gaussian" else None,
                "Q": cfg["train"]["Q"] if algorithm != "adaboost" else None,
                "train_error": boosting.test_error(clf, split.train),
                "validation_error": boosting.test_error(clf, split.validation),
                "test_error": report.final_test_error,
                "weak_learners": report.total_weak_learners,
                "iterations": len(report.iterations),
            }
        )
    with open(out / "compare.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(results[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(results)
    _write_metrics(out, "compare", cfg, results)


def run_sweep_overlap(cfg: dict, out: Path) -> None:
    rows = []
    for overlap in cfg["sweep"]["overlaps"]:
        for algorithm in cfg["sweep"]["algorithms"]:
            errs, counts = [], []
            for rep in range(cfg["sweep"]["seeds"]):
                sub = copy.deepcopy(cfg)
                sub["data"]["overlap"] = overlap
                sub["train"]["algorithm"] = algorithm
                _, report, _ = _train_one(sub, cfg["seed"], replica=rep)
                errs.append(report.final_test_error)
                counts.append(report.total_weak_learners)
            rows.append(
                {
                    "algorithm": algorithm,
                    "overlap": overlap,
                    "Q": cfg["train"]["Q"] if algorithm != "adaboost" else None,
                    "test_error": float(np.mean(errs)),
                    "test_error_std": float(np.std(errs)),
                    "weak_learners": float(np.mean(counts)),
                    "weak_learners_std": float(np.std(counts)),
                    "seeds": cfg["sweep"]["seeds"],
                }
            )
    with open(out / "sweep.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    _write_metrics(out, "sweep-overlap", cfg, rows)


def run_gap_analysis(cfg: dict, out: Path) -> None:
    gcfg = cfg["gap"]
    if gcfg["problem_path"]:
        problem = serialize.load_problem(gcfg["problem_path"])
    else:
        problem = training_qubo_instance(gcfg["n"], derive_seed(cfg["seed"], "gap"))
    grid = np.linspace(0.0, 1.0, gcfg["grid_points"])
    curve, rep = gap_report(problem, grid)
    serialize.curve_to_csv(curve, rep, out / "spectrum.csv")
    with open(out / "gap.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(
            {
                "n_qubits": curve.n_qubits,
                "g_min": rep.g_min,
                "s_at_gmin": rep.s_at_gmin,
                "curvature_peak": rep.curvature_peak,
                "s_at_peak": rep.s_at_peak,
                "v01_at_peak": rep.v01_at_peak,
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")


def run_scaling(cfg: dict, out: Path) -> None:
    scfg = cfg["scaling"]
    grid = np.linspace(0.0, 1.0, scfg["grid_points"])

    def gen(n, run):
        return training_qubo_instance(n, derive_seed(cfg["seed"], f"scaling-{n}", run))

    rows = scaling_sweep(scfg["qubits"], gen, scfg["runs_per_size"], grid)
    with open(out / "scaling.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "mean_curvature_peak", "std_curvature_peak"])
        for n, mean, std in rows:
            writer.writerow([n, repr(mean), repr(std)])


RUNNERS = {
    "gen-data": run_gen_data,
    "train": run_train,
    "compare": run_compare,
    "sweep-overlap": run_sweep_overlap,
    "gap-analysis": run_gap_analysis,
    "scaling": run_scaling,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qboost", description=__doc__)
    parser.add_argument("task", nargs="?", choices=TASKS)
    parser.add_argument("--config", help="JSON config file (see --print-defaults)")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--solver", choices=("tabu", "exhaustive"), default=None)
    parser.add_argument("--mode", choices=("augment", "replace-all", "replace_all"), default=None)
    parser.add_argument("--print-defaults", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.print_defaults:
        json.dump(DEFAULTS, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
        return 0
    if args.task is None:
        print("error: a task is required (or --print-defaults)", file=sys.stderr)
        return 2
    cfg, errors = load_config(args)
    errors.extend(validate_config(args.task, cfg))
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    if errors:
        payload = {"task": args.task, "errors": errors}
        with open(out / "error.json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        for err in errors:
            print(f"error: {err}", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    try:
        RUNNERS[args.task](cfg, out)
    except Exception as exc:  # surfaced with module context for the caller
        payload = {"task": args.task, "errors": [f"{type(exc).__name__}: {exc}"]}
        with open(out / "error.json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _write_timing(out, time.perf_counter() - t0)
    return 0


if __name__ == "__main__":
    sys.exit(main())

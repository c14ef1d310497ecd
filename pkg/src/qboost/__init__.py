"""QUBO-based training of boosted binary classifiers and spectral analysis tools."""

from .data import (
    Dataset,
    Sample,
    SplitDataset,
    generate_box_cluster_2d,
    generate_gaussian_mixture,
    l2_normalize,
    load_csv,
    save_csv,
    split_even,
    uniform_weights,
)
from .stumps import (
    Dictionary,
    Stump,
    build_dictionary,
    dictionary_size,
    predict_matrix,
    select_top_k,
    weighted_error,
)
from .qubo import (
    PseudoBooleanProblem,
    QuboProblem,
    VariableLayout,
    build_threshold_qubo,
    build_training_qubo,
    build_zero_one_objective_v2,
    build_zero_one_qubo_v1,
    energy,
)
from .solvers import (
    SolverResult,
    TabuConfig,
    default_tabu_config,
    exhaustive_solver,
    incremental_delta,
    solve_exhaustive,
    solve_tabu,
    tabu_solver,
)
from .boosting import (
    StrongClassifier,
    TrainReport,
    adaboost_train,
    compute_theta,
    generalization_bound,
    inner_loop_train,
    lambda_grid,
    outer_loop_train,
    test_error,
    update_sample_weights,
    vc_bound,
)
from .adiabatic import (
    GapReport,
    SpectralCurve,
    curvature_metric,
    gap_report,
    min_gap,
    problem_hamiltonian_diagonal,
    scaling_sweep,
    spectral_sweep,
    training_qubo_instance,
    v01_matrix_element,
)

__all__ = [name for name in dir() if not name.startswith("_")]

import numpy as np
import pytest

from qboost import boosting, data, solvers, stumps


def make_split(M=2, overlap=0.0, S=300, seed=0):
    ds = data.generate_gaussian_mixture(M, overlap, S, seed)
    return data.split_even(ds, seed + 1)


def build_dict(split, orders=(1,)):
    return stumps.build_dictionary(
        split.train, data.uniform_weights(split.train.n_samples), orders
    )


def test_compute_theta_examples():
    split = make_split()
    assert boosting.compute_theta([], split.train) == 0.0
    # one stump predicting +1 everywhere
    lo = float(split.train.features[:, 0].min()) - 5.0
    st = stumps.Stump(1, (0,), 1, lo)
    assert boosting.compute_theta([st], split.train) == pytest.approx(1.0)


def test_compute_theta_matches_double_sum():
    rng = np.random.default_rng(1)
    split = make_split(M=3, overlap=0.5, S=90, seed=5)
    sts = [
        stumps.Stump(1, (0,), 1, 0.2),
        stumps.Stump(1, (2,), -1, -0.4),
        stumps.Stump(2, (0, 1), 1, 0.0),
    ]
    total = 0.0
    for s in range(split.train.n_samples):
        for st in sts:
            total += st.evaluate(split.train.features[s])
    expected = total / split.train.n_samples
    assert boosting.compute_theta(sts, split.train) == pytest.approx(expected, abs=1e-12)


def test_update_sample_weights_cases():
    y = np.array([1, -1, 1, -1], dtype=float)
    d = data.uniform_weights(4)
    # perfect score -> epsilon rule yields uniform
    out = boosting.update_sample_weights(d, y, y)
    assert np.allclose(out, 0.25)
    # single bad sample dominates
    scores = y.copy()
    scores[2] = -1.0
    out = boosting.update_sample_weights(d, scores, y)
    assert out[2] > 0.999
    assert out.sum() == pytest.approx(1.0, abs=1e-12)
    # oracle comparison
    rng = np.random.default_rng(2)
    scores = rng.uniform(-1, 1, 4)
    out = boosting.update_sample_weights(d, scores, y)
    raw = d * (scores - y) ** 2 + 1e-12 / 4
    assert np.allclose(out, raw / raw.sum(), atol=1e-12)


def test_vc_and_generalization_bounds():
    assert boosting.vc_bound(2, 1) == pytest.approx(12 * np.log2(2 * np.e), rel=1e-12)
    assert boosting.vc_bound(2, 1) == pytest.approx(29.31, abs=0.01)
    vals = [boosting.vc_bound(3, t) for t in range(1, 101)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    # independent second implementation
    import math

    vc_h, S, delta = 29.31, 10000, 0.05
    expected = 0.0 + math.sqrt((vc_h * math.log(2 * S / vc_h + 1) + math.log(9 / delta)) / S)
    assert boosting.generalization_bound(0.0, vc_h, S, delta) == pytest.approx(expected, abs=1e-12)


def test_test_error_extremes():
    split = make_split()
    st = stumps.Stump(1, (0,), 1, 0.0)
    pred = st.evaluate_batch(split.test.features)
    clf = boosting.StrongClassifier((st,), np.ones(1), 1.0, 0.0)
    agree = data.Dataset(split.test.features, pred)
    disagree = data.Dataset(split.test.features, -pred)
    assert boosting.test_error(clf, agree) == 0.0
    assert boosting.test_error(clf, disagree) == 1.0
    # loop oracle
    err = sum(
        1 for s in range(len(split.test)) if clf.predict(split.test.features[s : s + 1])[0] != split.test.labels[s]
    ) / len(split.test)
    assert boosting.test_error(clf, split.test) == pytest.approx(err)


def test_adaboost_picks_perfect_stump_first():
    split = make_split(M=2, overlap=0.0, S=240, seed=3)
    dictionary = build_dict(split)
    clf, report = boosting.adaboost_train(dictionary, split)
    errs = stumps.weighted_errors(
        dictionary, split.train, data.uniform_weights(split.train.n_samples)
    )
    assert errs.min() == 0.0
    # perfect stump exists, so round 1 picks it and training error is 0
    assert report.iterations[0].train_error == 0.0
    assert boosting.test_error(clf, split.train) <= 0.01


def test_adaboost_deterministic():
    split = make_split(M=3, overlap=0.9, S=300, seed=4)
    dictionary = build_dict(split, orders=(1, 2))
    clf1, rep1 = boosting.adaboost_train(dictionary, split, patience=30, max_rounds=100)
    clf2, rep2 = boosting.adaboost_train(dictionary, split, patience=30, max_rounds=100)
    assert np.array_equal(clf1.alphas, clf2.alphas)
    assert clf1.stumps == clf2.stumps


def test_adaboost_training_error_bound():
    # product bound 2*sqrt(eps(1-eps)) upper-bounds the training error
    split = make_split(M=3, overlap=0.95, S=300, seed=6)
    dictionary = build_dict(split, orders=(1,))
    train, y = split.train, split.train.labels
    P = stumps.predict_matrix(dictionary.stumps, train.features)
    mis = P != y[:, None]
    d = data.uniform_weights(len(train))
    score = np.zeros(len(train))
    bound = 1.0
    for t in range(40):
        errs = d @ mis
        best = int(np.argmin(errs))
        eps = float(errs[best])
        if eps <= 0 or eps >= 0.5:
            break
        alpha = 0.5 * np.log((1 - eps) / eps)
        h = P[:, best].astype(float)
        d = d * np.exp(-alpha * y * h)
        d /= d.sum()
        score += alpha * h
        bound *= 2 * np.sqrt(eps * (1 - eps))
        train_err = np.mean(np.where(score >= 0, 1, -1) != y)
        assert train_err <= bound + 1e-12


def test_adaboost_rejects_empty_dictionary():
    split = make_split()
    with pytest.raises(ValueError):
        boosting.adaboost_train(stumps.Dictionary((), 2), split)


def test_inner_loop_prunes_to_single_perfect_stump():
    # separable 1-d data: L0 keeps exactly one stump and validation error is 0
    rng = np.random.default_rng(7)
    feats = np.concatenate([rng.uniform(-2, -0.5, 90), rng.uniform(0.5, 2, 90)])[:, None]
    labels = np.concatenate([-np.ones(90, dtype=int), np.ones(90, dtype=int)])
    perm = rng.permutation(180)
    split = data.split_even(data.Dataset(feats[perm], labels[perm]), 1)
    dictionary = build_dict(split)
    lam_weak = 0.5 * (2.0 / 2 + 1.0 / 4)
    clf, report = boosting.inner_loop_train(
        dictionary, split, Q=2, lambdas=[lam_weak], solver=solvers.exhaustive_solver()
    )
    assert len(clf.stumps) == 1
    assert boosting.test_error(clf, split.validation) == 0.0


def test_inner_loop_objective_monotone_fixed_lambda_augment():
    # with the exact solver, a fixed lambda and augment mode, accepted
    # objective values never increase
    split = make_split(M=4, overlap=0.9, S=240, seed=8)
    dictionary = build_dict(split, orders=(1,))
    clf, report = boosting.inner_loop_train(
        dictionary, split, Q=6, lambdas=[0.05], solver=solvers.exhaustive_solver(),
        mode="augment", refit=False, patience=3,
    )
    objs = [rec.objective for rec in report.iterations]
    assert all(b <= a + 1e-9 for a, b in zip(objs, objs[1:]))


def test_inner_loop_degenerate_single_shot():
    # Q = |dictionary| with one iteration reduces to the single optimization
    split = make_split(M=2, overlap=0.5, S=150, seed=9)
    dictionary = build_dict(split)
    Q = len(dictionary)
    lam = 0.01
    clf, report = boosting.inner_loop_train(
        dictionary, split, Q=Q, lambdas=[lam], solver=solvers.exhaustive_solver(),
        max_iterations=1, refit=False,
    )
    from qboost.qubo import build_training_qubo

    H = stumps.predict_matrix(dictionary.stumps, split.train.features)
    direct = solvers.solve_exhaustive(
        build_training_qubo(H, split.train.labels, 2.0 / Q, lam)
    )
    assert report.iterations[0].objective == pytest.approx(direct.energy, abs=1e-9)


def test_outer_loop_first_pass_equals_inner():
    split = make_split(M=3, overlap=0.8, S=240, seed=10)
    dictionary = build_dict(split, orders=(1,))
    lam = [0.02, 0.2]
    kwargs = dict(mode="replace_all", refit=False)
    clf_i, rep_i = boosting.inner_loop_train(
        dictionary, split, 4, lam, solvers.exhaustive_solver(), **kwargs
    )
    clf_o, rep_o = boosting.outer_loop_train(
        dictionary, split, 4, lam, solvers.exhaustive_solver(), max_passes=1, **kwargs
    )
    # a single outer pass is exactly one inner loop with zero frozen scores
    n_inner = len(rep_i.iterations)
    assert [r.objective for r in rep_o.iterations[:n_inner]] == [
        r.objective for r in rep_i.iterations
    ]


def test_outer_loop_bookkeeping_and_weights():
    split = make_split(M=4, overlap=0.95, S=300, seed=11)
    dictionary = build_dict(split, orders=(1,))
    clf, report = boosting.outer_loop_train(
        dictionary, split, 4, boosting.lambda_grid(4), solvers.exhaustive_solver(),
        max_passes=3,
    )
    assert report.total_weak_learners == len(clf.stumps)
    assert np.all(clf.alphas == 1.0)
    assert 0.0 <= report.final_test_error <= 1.0


def test_lambda_grid_shape():
    grid = boosting.lambda_grid(8)
    assert grid[0] == 0.0
    assert len(grid) == 17
    lam_w = 2.0 / 8 + 1.0 / 64
    assert grid[1] == pytest.approx(1e-3 * lam_w)
    assert grid[-1] == pytest.approx(1e2 * lam_w)


def test_weight_distribution_invariants_through_training():
    rng = np.random.default_rng(12)
    d = data.uniform_weights(50)
    y = rng.choice([-1.0, 1.0], size=50)
    for _ in range(20):
        scores = rng.uniform(-1, 1, 50)
        d = boosting.update_sample_weights(d, scores, y)
        assert abs(d.sum() - 1.0) < 1e-9
        assert np.all(d >= 0)

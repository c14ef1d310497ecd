import numpy as np
import pytest

from qboost import qubo
from qboost.solvers import assignment_bits, enumerate_energies, solve_exhaustive


def random_instance(rng, N, S):
    H = rng.choice([-1, 1], size=(S, N))
    y = rng.choice([-1, 1], size=S)
    return H, y


def direct_training_loss(H, y, kappa, lam, w, F=None):
    S, N = H.shape
    F = np.zeros(S) if F is None else F
    scores = kappa * (F + H @ w)
    return float(((scores - y) ** 2).sum() + lam * w.sum())


def all_assignments(n):
    return np.array([assignment_bits(z, n) for z in range(1 << n)], dtype=float)


def test_energy_basics():
    p = qubo.QuboProblem(3, np.zeros(3), {}, 2.5)
    for z in range(8):
        assert qubo.energy(p, assignment_bits(z, 3)) == 2.5
    p2 = qubo.QuboProblem(2, np.array([1.5, 0.0]), {}, -1.0)
    assert qubo.energy(p2, [1, 0]) == 0.5
    with pytest.raises(ValueError):
        qubo.energy(p2, [1, 0, 1])


def test_energy_random_term_oracle():
    rng = np.random.default_rng(0)
    n = 6
    lin = rng.normal(size=n)
    quad = {(i, j): rng.normal() for i in range(n) for j in range(i + 1, n) if rng.random() < 0.5}
    p = qubo.QuboProblem(n, lin, quad, rng.normal())
    for _ in range(20):
        z = rng.integers(0, 2, n)
        expected = p.offset + sum(lin[i] * z[i] for i in range(n))
        expected += sum(v * z[i] * z[j] for (i, j), v in quad.items())
        assert abs(qubo.energy(p, z) - expected) < 1e-12


def test_training_qubo_perfect_single_classifier():
    H = np.array([[1], [-1], [1]])
    y = np.array([1, -1, 1])
    p = qubo.build_training_qubo(H, y, kappa=1.0, lam=0.0)
    assert qubo.energy(p, [1]) == pytest.approx(0.0)
    assert qubo.energy(p, [0]) == pytest.approx(3.0)


def test_training_qubo_matches_direct_formula():
    rng = np.random.default_rng(1)
    H, y = random_instance(rng, 8, 12)
    kappa, lam = 0.31, 0.07
    p = qubo.build_training_qubo(H, y, kappa, lam)
    A = all_assignments(8)
    for w in A:
        direct = direct_training_loss(H, y, kappa, lam, w)
        got = qubo.energy(p, w)
        assert abs(got - direct) <= 1e-9 * max(1.0, abs(direct))


def test_training_qubo_frozen_scores():
    rng = np.random.default_rng(2)
    H, y = random_instance(rng, 5, 9)
    F = rng.normal(size=9) * 3
    kappa, lam = 0.4, 0.15
    p = qubo.build_training_qubo(H, y, kappa, lam, frozen_scores=F)
    for _ in range(30):
        w = rng.integers(0, 2, 5).astype(float)
        direct = direct_training_loss(H, y, kappa, lam, w, F)
        assert abs(qubo.energy(p, w) - direct) <= 1e-9 * max(1.0, abs(direct))


def test_training_qubo_rejects_bad_entries():
    with pytest.raises(ValueError):
        qubo.build_training_qubo(np.array([[0]]), np.array([1]), 1.0, 0.0)
    with pytest.raises(ValueError):
        qubo.build_training_qubo(np.array([[1]]), np.array([2]), 1.0, 0.0)


def test_training_qubo_large_lambda_zero_optimum():
    rng = np.random.default_rng(3)
    for _ in range(5):
        N, S = 6, 10
        H, y = random_instance(rng, N, S)
        kappa = 0.8
        lam = 4 * kappa * S + 1
        p = qubo.build_training_qubo(H, y, kappa, lam)
        res = solve_exhaustive(p)
        assert np.array_equal(res.assignment, np.zeros(N, dtype=np.uint8))


def test_threshold_qubo_matches_double_loop_oracle():
    rng = np.random.default_rng(4)
    H, y = random_instance(rng, 2, 2)
    kappa, lam = 0.7, 0.05
    p, layout = qubo.build_threshold_qubo(H, y, kappa, lam)
    K = qubo.theta_bit_count(2) - 1
    assert p.n == 2 + K + 1
    # joint enumeration vs direct loop over w and integer theta values
    best_direct = np.inf
    for wz in range(4):
        w = assignment_bits(wz, 2).astype(float)
        for tz in range(1 << (K + 1)):
            tb = assignment_bits(tz, K + 1).astype(float)
            theta = sum(tb[k] * 2**k for k in range(K + 1)) - (2.0**K - 1.0)
            val = (((kappa * (H @ w - theta)) - y) ** 2).sum() + lam * w.sum()
            best_direct = min(best_direct, val)
    res = solve_exhaustive(p)
    assert res.energy == pytest.approx(best_direct, rel=1e-9, abs=1e-9)


def test_threshold_qubo_random_assignments():
    rng = np.random.default_rng(5)
    H, y = random_instance(rng, 5, 8)
    kappa, lam = 0.33, 0.02
    p, layout = qubo.build_threshold_qubo(H, y, kappa, lam)
    K = qubo.theta_bit_count(5) - 1
    for _ in range(50):
        z = rng.integers(0, 2, p.n).astype(float)
        w = layout.extract(z, "w")
        tb = layout.extract(z, "theta")
        theta_sum = sum(tb[k] * 2**k for k in range(K + 1))
        resid = kappa * (H @ w - theta_sum + 2.0**K - 1.0) - y
        direct = (resid**2).sum() + lam * w.sum()
        assert abs(qubo.energy(p, z) - direct) <= 1e-9 * max(1.0, abs(direct))


def zero_one_v1_direct(H, y, lam, z, layout, N, S):
    K = int(np.ceil(np.log2(N))) if N > 1 else 0
    w = layout.extract(z, "w")
    yb = layout.extract(z, "ybar")
    e = layout.extract(z, "err")
    total = lam * w.sum()
    for s in range(S):
        ybar = 1.0 + sum(yb[s * K + k] * 2**k for k in range(K))
        u = H[s] @ w
        a = u - y[s] * ybar
        total += a**2 + N**2 * (a + y[s] * N * e[s]) ** 2
    return float(total)


def test_zero_one_v1_matches_unexpanded_formula():
    rng = np.random.default_rng(6)
    N, S = 4, 5
    H, y = random_instance(rng, N, S)
    lam = 0.3
    p, layout = qubo.build_zero_one_qubo_v1(H, y, lam)
    assert p.n == N + S * 2 + S
    for _ in range(100):
        z = rng.integers(0, 2, p.n).astype(float)
        direct = zero_one_v1_direct(H, y, lam, z, layout, N, S)
        assert abs(qubo.energy(p, z) - direct) <= 1e-6 * max(1.0, abs(direct))


def test_zero_one_v1_global_minimum_semantics():
    # N=2, S=2 separable: the w-block of the global optimum achieves 0-1 error 0
    H = np.array([[1, 1], [-1, 1]])
    y = np.array([1, -1])
    lam = 0.05
    p, layout = qubo.build_zero_one_qubo_v1(H, y, lam)
    res = solve_exhaustive(p)
    w = layout.extract(res.assignment, "w").astype(float)
    scores = H @ w
    pred = np.where(scores >= 0, 1, -1)
    assert np.all(pred == y)
    # and it coincides with the brute-force argmin of encoded error + L0
    N, S = 2, 2
    best = None
    for wz in range(4):
        wv = assignment_bits(wz, 2).astype(float)
        sub_best = np.inf
        for rest in range(1 << (p.n - 2)):
            z = np.concatenate([wv, assignment_bits(rest, p.n - 2).astype(float)])
            sub_best = min(sub_best, qubo.energy(p, z))
        if best is None or sub_best < best[0] - 1e-12:
            best = (sub_best, tuple(wv))
    assert tuple(w) == best[1]


def test_zero_one_v2_matches_direct_formula():
    rng = np.random.default_rng(7)
    N, S = 4, 4
    H, y = random_instance(rng, N, S)
    lam = 0.2
    p, layout = qubo.build_zero_one_objective_v2(H, y, lam)
    K = 2
    assert p.n == N + S * K + 2 * S
    for _ in range(200):
        z = rng.integers(0, 2, p.n).astype(float)
        w = layout.extract(z, "w")
        yb = layout.extract(z, "ybar")
        ep = layout.extract(z, "err_pos")
        em = layout.extract(z, "err_neg")
        direct = lam * w.sum()
        for s in range(S):
            ybar = 1.0 + sum(yb[s * K + k] * 2**k for k in range(K))
            resid = H[s] @ w - (ep[s] - em[s]) * y[s] * ybar
            direct += resid**2 + em[s]
        got = qubo.energy(p, z)
        assert abs(got - direct) <= 1e-9 * max(1.0, abs(direct))


def test_zero_one_v2_zero_assignment_and_indicators_off():
    rng = np.random.default_rng(8)
    N, S = 3, 3
    H, y = random_instance(rng, N, S)
    p, layout = qubo.build_zero_one_objective_v2(H, y, 0.0)
    z = np.zeros(p.n)
    assert qubo.energy(p, z) == pytest.approx(0.0)
    # with both indicator bits off, a sample contributes (sum w h)^2
    z = np.zeros(p.n)
    z[0] = 1.0
    expected = sum(float(H[s, 0]) ** 2 for s in range(S))
    assert qubo.energy(p, z) == pytest.approx(expected)


def test_variable_layout_validation():
    with pytest.raises(ValueError):
        qubo.VariableLayout({"a": range(0, 2), "b": range(3, 4)})
    lay = qubo.VariableLayout({"a": range(0, 2), "b": range(2, 4)})
    assert lay.n == 4
    assert np.array_equal(lay.extract(np.array([1, 0, 1, 1]), "b"), [1, 1])


@pytest.mark.xfail(
    strict=False,
    reason="counterexamples exist: dropping a weight can raise the quadratic loss "
    "by as little as 3/N^2 without flipping any sample's sign, which is below "
    "lambda = (2/N + 1/N^2)/2, so the optimizer trades loss for sparsity",
)
def test_weak_lambda_thinning_property():
    rng = np.random.default_rng(9)
    for _ in range(10):
        N = int(rng.integers(3, 9))
        S = int(rng.integers(5, 15))
        H, y = random_instance(rng, N, S)
        kappa = 1.0 / N
        lam = 0.5 * (2.0 / N + 1.0 / N**2)
        p0 = qubo.build_training_qubo(H, y, kappa, 0.0)
        e0 = enumerate_energies(p0)
        loss_min = e0.min()
        optimal = np.flatnonzero(np.abs(e0 - loss_min) < 1e-12)
        min_l0 = min(bin(int(z)).count("1") for z in optimal)
        p1 = qubo.build_training_qubo(H, y, kappa, lam)
        res = solve_exhaustive(p1)
        w = res.assignment.astype(float)
        loss_at_opt = direct_training_loss(H, y, kappa, 0.0, w)
        assert loss_at_opt == pytest.approx(loss_min, abs=1e-9)
        assert int(w.sum()) == min_l0


def test_symmetry_under_variable_relabeling():
    rng = np.random.default_rng(10)
    H, y = random_instance(rng, 6, 10)
    p = qubo.build_training_qubo(H, y, 0.25, 0.1)
    perm = rng.permutation(6)
    Hp = H[:, perm]
    pp = qubo.build_training_qubo(Hp, y, 0.25, 0.1)
    assert solve_exhaustive(p).energy == pytest.approx(solve_exhaustive(pp).energy, abs=1e-9)

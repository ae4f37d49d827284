import numpy as np
import pytest

from qresp import benchmarks as bm


def delay_line_features(inputs, taps):
    """Classical delay line: column k holds the input delayed by k+1 steps."""
    cols = [np.concatenate([np.zeros(k + 1), inputs[: -(k + 1)]]) for k in range(taps)]
    return np.stack(cols, axis=1)


# ---------------------------------------------------------------------------
# NARMA


def test_narma2_zero_input_fixed_point():
    # with u = 0: y' = 0.3 y + 0.05 y (y + y_prev) + 0.1; the stable fixed point
    # solves 0.1 y^2 - 0.7 y + 0.1 = 0
    y = bm.narma_generate(np.zeros(4000), 2)
    expected = (0.7 - np.sqrt(0.49 - 0.04)) / 0.2
    assert abs(y[-1] - expected) < 1e-10


def test_narma_recursion_by_hand():
    u = np.array([0.1, 0.2, 0.3, 0.4, 0.05])
    y = bm.narma_generate(u, 2)
    manual = np.zeros(5)
    for t in range(1, 5):
        s = manual[max(t - 2, 0) : t].sum()
        drive = u[t - 1] * u[t - 2] if t >= 2 else 0.0
        manual[t] = 0.3 * manual[t - 1] + 0.05 * manual[t - 1] * s + 1.5 * drive + 0.1
    assert np.allclose(y, manual)


def test_narma_input_domain_validation():
    with pytest.raises(ValueError):
        bm.narma_generate(np.array([0.1, 0.9, 0.1, 0.1]), 2)
    with pytest.raises(ValueError):
        bm.narma_generate(np.full(10, 0.25), 1)
    with pytest.raises(ValueError):
        bm.narma_generate(np.full(3, 0.25), 5)


def test_narma_divergence_reports_step():
    # order-10 NARMA with adversarially large admissible inputs blows up
    u = np.full(2000, 0.5)
    with pytest.raises(ValueError, match="step"):
        bm.narma_generate(u, 10)


# ---------------------------------------------------------------------------
# readout and RNMSE


def test_split_boundaries():
    split = bm.SplitSpec(washout_fraction=0.5, train_fraction_of_remainder=0.8)
    train_start, test_start = split.boundaries(1000)
    assert train_start == 500
    assert test_start == 900


def test_linear_readout_recovers_exact_map():
    rng = np.random.default_rng(0)
    feats = rng.standard_normal((500, 4))
    w_true = np.array([0.5, -1.0, 2.0, 0.25])
    target = feats @ w_true
    fit = bm.train_linear_readout(feats, target, bm.SplitSpec())
    assert np.allclose(fit.weights, w_true, atol=1e-10)
    assert bm.rnmse(fit.test_target, fit.predictions) < 1e-10
    assert not fit.degenerate


def test_linear_readout_flags_degenerate_features():
    feats = np.ones((200, 3))  # rank 1
    target = np.linspace(0, 1, 200)
    fit = bm.train_linear_readout(feats, target, bm.SplitSpec())
    assert fit.degenerate


def test_linear_readout_ridge_shrinks():
    rng = np.random.default_rng(1)
    feats = rng.standard_normal((300, 3))
    target = feats @ np.array([1.0, 1.0, 1.0]) + 0.01 * rng.standard_normal(300)
    plain = bm.train_linear_readout(feats, target, bm.SplitSpec())
    heavy = bm.train_linear_readout(feats, target, bm.SplitSpec(), ridge=1e3)
    assert np.linalg.norm(heavy.weights) < np.linalg.norm(plain.weights)


def test_rnmse_oracle():
    target = np.array([1.0, 2.0, 3.0, 4.0])
    pred = target + 0.5
    expected = np.sqrt(0.25 / target.var())
    assert abs(bm.rnmse(target, pred) - expected) < 1e-14


def test_rnmse_rejects_constant_target():
    with pytest.raises(ValueError):
        bm.rnmse(np.ones(10), np.zeros(10))


# ---------------------------------------------------------------------------
# memory capacity


def test_memory_function_perfect_recall():
    rng = np.random.default_rng(2)
    u = rng.uniform(-1, 1, 20000)
    feats = delay_line_features(u, 3)
    assert abs(bm.memory_function(u, feats, 1, washout=50) - 1.0) < 1e-10
    assert abs(bm.memory_function(u, feats, 3, washout=50) - 1.0) < 1e-10
    assert bm.memory_function(u, feats, 4, washout=50) < 1e-3


def test_memory_function_is_clamped():
    rng = np.random.default_rng(3)
    u = rng.uniform(-1, 1, 500)
    feats = delay_line_features(u, 2)
    for k in range(4):
        c = bm.memory_function(u, feats, k, washout=20)
        assert -1e-12 <= c <= 1 + 1e-6


def test_mc_report_aggregates():
    rng = np.random.default_rng(0)
    u = rng.uniform(-1, 1, 100000)
    feats = delay_line_features(u, 4)
    rep = bm.mc_report(u, feats, max_delay=8, washout=100)
    caps = rep.memory_functions
    assert caps.shape == (9,)
    assert abs(rep.total - caps.sum()) < 1e-12
    assert abs(rep.odd_sum - caps[1::2].sum()) < 1e-12
    assert abs(rep.even_sum - caps[0::2].sum()) < 1e-12
    assert abs(rep.tail_sum_2plus - caps[2:].sum()) < 1e-12
    assert rep.max_linear_delay == 4


# ---------------------------------------------------------------------------
# IPC


def test_normalized_legendre_orthonormality():
    # integral over U[-1, 1] of P_i P_j with the sqrt(2d+1) normalization is delta_ij
    x = np.linspace(-1, 1, 200001)
    for i in range(4):
        for j in range(4):
            prod = bm.normalized_legendre(i, x) * bm.normalized_legendre(j, x)
            integral = np.trapezoid(prod, x) / 2
            assert abs(integral - (1.0 if i == j else 0.0)) < 1e-6, (i, j)


def test_ipc_targets_zero_pad_and_product():
    u = np.array([0.5, -0.5, 0.25, 0.75])
    p1 = bm.normalized_legendre(1, u)
    single = bm.ipc_targets(u, ((1, 1),))
    assert np.allclose(single, [0, p1[0], p1[1], p1[2]])
    pair = bm.ipc_targets(u, ((1, 1), (2, 1)))
    assert np.allclose(pair[:2], 0)
    assert np.allclose(pair[2:], p1[1:3] * p1[0:2])


def test_ipc_targets_rejects_repeated_delay():
    with pytest.raises(ValueError):
        bm.ipc_targets(np.zeros(5), ((1, 1), (1, 2)))


def test_ipc_targets_affine_input_mapping():
    u = np.array([0.0, 0.25, 0.5])
    a = bm.ipc_targets(u, ((0, 2),), input_low=0.0, input_high=0.5)
    b = bm.ipc_targets(4 * u - 1, ((0, 2),))
    assert np.allclose(a, b)


def test_enumerate_degree_terms_counts():
    # delays run over 0..max_delay and must be distinct within a product
    terms2 = bm.enumerate_degree_terms(2, 4)
    # degree 2 = (2) on one of 5 delays, or (1,1) on a pair of distinct delays
    assert len(terms2) == 5 + 10
    for term in terms2:
        assert sum(d for _, d in term) == 2
        delays = [k for k, _ in term]
        assert len(set(delays)) == len(delays)


def test_degree1_ipc_equals_mc():
    rng = np.random.default_rng(5)
    u = rng.uniform(-1, 1, 30000)
    feats = delay_line_features(u, 3)
    rep = bm.mc_report(u, feats, max_delay=6, washout=50)
    cfg = bm.IpcConfig(budget=((1, 6),), surrogate_count=0)
    ipc = bm.ipc_report(u, feats, cfg, 50, np.random.default_rng(6))
    assert abs(ipc.degree_totals[1] - rep.total) < 1e-6


def test_ipc_surrogates_suppress_noise():
    rng = np.random.default_rng(7)
    u = rng.uniform(-1, 1, 20000)
    noise = rng.standard_normal((20000, 3))  # memoryless features
    cfg = bm.IpcConfig(budget=((1, 10), (2, 5)), surrogate_count=50)
    ipc = bm.ipc_report(u, noise, cfg, 50, np.random.default_rng(8))
    raw = bm.ipc_report(
        u, noise, bm.IpcConfig(budget=((1, 10), (2, 5)), surrogate_count=0), 50,
        np.random.default_rng(8),
    )
    assert ipc.total < 0.005
    assert ipc.total < raw.total
    assert ipc.threshold_count > 0


def test_ipc_config_validation():
    with pytest.raises(ValueError):
        bm.IpcConfig(budget=())
    with pytest.raises(ValueError):
        bm.IpcConfig(budget=((0, 5),))
    with pytest.raises(ValueError):
        bm.IpcConfig(budget=((1, 5),), surrogate_count=-1)


# ---------------------------------------------------------------------------
# rank


def test_trajectory_rank_exact_low_rank():
    rng = np.random.default_rng(9)
    basis = rng.standard_normal((3, 8))
    coeffs = rng.standard_normal((100, 3))
    m = coeffs @ basis
    res = bm.trajectory_rank(m)
    assert res.raw == 3
    assert res.centered == 3


def test_trajectory_rank_centering_removes_constant():
    m = np.ones((50, 4))
    res = bm.trajectory_rank(m)
    assert res.raw == 1
    assert res.centered == 0


def test_trajectory_rank_washout_drops_transient():
    rows = np.zeros((100, 2))
    rows[:, 0] = 1.0
    rows[:10, 1] = np.linspace(1, 0, 10)  # transient confined to the washout
    assert bm.trajectory_rank(rows, washout=10).raw == 1
    assert bm.trajectory_rank(rows, washout=0).raw == 2

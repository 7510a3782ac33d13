import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lesolab.errors import DimensionError, DivergenceError
from lesolab.learner import (
    LearnerConfig,
    LinearModel,
    OnlineLearner,
    RingBatch,
    cost,
    featurize,
    gradient,
    gradient_step,
    predict,
    project_input_gain,
    push_sample,
    refresh_batch_outputs,
)


def random_batch(rng, n_samples, n_features=6, capacity=None):
    batch = RingBatch(capacity or n_samples, n_features)
    for _ in range(n_samples):
        push_sample(batch, rng.standard_normal(n_features), rng.standard_normal(), rng.standard_normal())
    return batch


def fd_gradient(model, batch):
    """Central finite differences of the cost."""
    g = np.zeros_like(model.theta)
    for j in range(model.theta.size):
        h = 1e-6 * (1 + abs(model.theta[j]))
        up, dn = model.theta.copy(), model.theta.copy()
        up[j] += h
        dn[j] -= h
        g[j] = (cost(LinearModel(up), batch) - cost(LinearModel(dn), batch)) / (2 * h)
    return g


# -- features and batch --------------------------------------------------------

@pytest.mark.parametrize("xhat, u, want", [
    ([1, 2, 3, 4], 5, [1, 2, 3, 4, 5, 1]),
    ([0, 0, 0, 0], 0, [0, 0, 0, 0, 0, 1]),
    ([7], -1, [7, -1, 1]),
])
def test_featurize(xhat, u, want):
    assert featurize(xhat, u).tolist() == want


def test_featurize_rejects_bad_shape():
    with pytest.raises(DimensionError):
        featurize(np.zeros((2, 2)), 0.0)


def test_push_and_evict():
    b = RingBatch(2, 3)
    push_sample(b, np.array([1.0, 0, 0]), 0.1, 0.0)
    assert len(b) == 1 and not b.full
    push_sample(b, np.array([2.0, 0, 0]), 0.2, 0.0)
    push_sample(b, np.array([3.0, 0, 0]), 0.3, 0.0)
    phi, res, _ = b.ordered()
    assert len(b) == 2
    assert phi[:, 0].tolist() == [2.0, 3.0]
    assert res.tolist() == [0.2, 0.3]


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 12), st.integers(0, 30))
def test_fifo_keeps_last_capacity(capacity, extra):
    b = RingBatch(capacity, 2)
    total = capacity + extra
    for i in range(total):
        b.push(np.array([float(i), 1.0]), float(i), 0.0)
    phi, res, _ = b.ordered()
    assert phi[:, 0].tolist() == list(map(float, range(extra, total)))
    assert res.tolist() == phi[:, 0].tolist()


# -- cost and gradient ---------------------------------------------------------

def test_cost_examples():
    b = RingBatch(3, 6)
    b.push(np.array([2.0, 0, 0, 0, 0, 1]), 0.0, 0.0)
    assert cost(LinearModel.zeros(6), b) == 0.0
    assert cost(LinearModel(np.array([1.0, 0, 0, 0, 0, 0])), b) == 2.0
    b2 = RingBatch(1, 6)
    b2.push(np.array([2.0, 0, 0, 0, 0, 1]), 1.5, 0.5)
    assert cost(LinearModel(np.array([1.0, 0, 0, 0, 0, 0])), b2) == 0.0


def test_cost_empty_batch():
    with pytest.raises(ValueError):
        cost(LinearModel.zeros(6), RingBatch(3, 6))
    with pytest.raises(ValueError):
        gradient_step(LinearModel.zeros(6), RingBatch(3, 6), LearnerConfig())


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        batch = random_batch(rng, int(rng.integers(1, 40)))
        model = LinearModel(rng.standard_normal(6) * 3)
        g = gradient(model, batch)
        fd = fd_gradient(model, batch)
        worst = max(worst, np.linalg.norm(g - fd) / max(np.linalg.norm(g), 1e-12))
    assert worst < 1e-6


def test_single_sample_update():
    b = RingBatch(1, 6)
    b.push(np.array([1.0, 0, 0, 0, 0, 1]), 1.0, 0.0)
    m = gradient_step(LinearModel.zeros(6), b, LearnerConfig(alpha=0.1))
    assert np.allclose(m.theta, [0.1, 0, 0, 0, 0, 0.1], rtol=0, atol=1e-15)


def test_stationary_point_unchanged():
    rng = np.random.default_rng(5)
    theta = rng.standard_normal(6)
    b = RingBatch(10, 6)
    for _ in range(10):
        phi = rng.standard_normal(6)
        b.push(phi, 0.0, float(theta @ phi))
    m = gradient_step(LinearModel(theta), b, LearnerConfig(alpha=0.3, iterations_per_step=5))
    assert np.allclose(m.theta, theta, rtol=0, atol=1e-14)


def test_gradient_is_length_normalised():
    rng = np.random.default_rng(6)
    b = random_batch(rng, 8)
    m0 = LinearModel(rng.standard_normal(6))
    m1 = gradient_step(m0, b, LearnerConfig(alpha=0.2))
    assert np.allclose(m1.theta, m0.theta - 0.2 / 8 * gradient(m0, b), rtol=1e-14, atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 30), st.floats(0.05, 0.99))
def test_monotone_descent(seed, n_samples, frac):
    rng = np.random.default_rng(seed)
    batch = random_batch(rng, n_samples)
    phi, _, _ = batch.live()
    lam = np.linalg.eigvalsh(phi.T @ phi / n_samples).max()
    cfg = LearnerConfig(alpha=frac / lam)
    model = LinearModel(rng.standard_normal(6))
    costs = [cost(model, batch)]
    for _ in range(20):
        model = gradient_step(model, batch, cfg)
        costs.append(cost(model, batch))
    assert all(b <= a * (1 + 1e-12) + 1e-15 for a, b in zip(costs, costs[1:]))


def test_divergence_flagged():
    b = RingBatch(1, 2)
    b.push(np.array([1e7, 0.0]), 1.0, 0.0)
    with pytest.raises(DivergenceError):
        gradient_step(LinearModel(np.array([1.0, 0.0])), b, LearnerConfig(alpha=1.0, iterations_per_step=3))


# -- predict, refresh, projection ------------------------------------------------

def test_predict_examples():
    phi = np.array([2.0, 3.0, 4.0, 5.0, 6.0, 1.0])
    assert predict(LinearModel.zeros(6), phi) == 0.0
    assert predict(LinearModel(np.array([0, 0, 0, 0, 0, 2.5])), phi) == 2.5
    assert predict(LinearModel(np.array([1.0, 1, 0, 0, 0, 0])), phi) == 5.0
    with pytest.raises(DimensionError):
        predict(LinearModel.zeros(6), np.zeros(5))


def test_refresh():
    rng = np.random.default_rng(7)
    b = random_batch(rng, 12)
    res_before = b.residuals.copy()
    refresh_batch_outputs(LinearModel.zeros(6), b)
    assert not b.learner_outputs.any()
    m = LinearModel(rng.standard_normal(6))
    once = refresh_batch_outputs(m, b).learner_outputs.copy()
    twice = refresh_batch_outputs(m, b).learner_outputs.copy()
    assert np.array_equal(once, twice)
    assert np.array_equal(b.residuals, res_before)
    assert cost(m, b) == pytest.approx(0.5 * np.sum(b.residuals**2), rel=1e-12)


def test_refresh_partial_batch_leaves_empty_rows():
    b = RingBatch(5, 2)
    b.push(np.array([1.0, 1.0]), 0.0, 0.0)
    refresh_batch_outputs(LinearModel(np.array([2.0, 3.0])), b)
    assert b.learner_outputs.tolist() == [5.0, 0, 0, 0, 0]


@pytest.mark.parametrize("b0, theta_u, want", [(1.0, -0.9, -0.4), (1.0, -0.1, -0.1), (2.0, -1.0, -0.8), (-1.0, 0.9, 0.4)])
def test_input_gain_projection(b0, theta_u, want):
    m = LinearModel(np.array([0.3, theta_u, 0.2]))
    out = project_input_gain(m, b0, 0.6)
    assert out.theta[1] == pytest.approx(want)
    assert out.theta[0] == 0.3 and out.theta[2] == 0.2
    assert project_input_gain(m, b0, None) is m


# -- online learner ------------------------------------------------------------

def test_config_defaults_and_validation():
    cfg = LearnerConfig()
    assert cfg.warmup == cfg.batch_capacity
    assert LearnerConfig(batch_capacity=7).warmup == 7
    for kwargs in (dict(alpha=-1), dict(alpha=float("nan")), dict(batch_capacity=0),
                   dict(iterations_per_step=0), dict(warmup=-1)):
        with pytest.raises(ValueError):
            LearnerConfig(**kwargs)


def test_online_warmup_then_learning():
    cfg = LearnerConfig(alpha=0.5, batch_capacity=4)
    lr = OnlineLearner(cfg, 1, 1.0)
    outs = [lr.cycle(featurize([1.0], 0.0), 1.0, 0.01 * k) for k in range(8)]
    assert outs[:4] == [0.0] * 4
    assert outs[4] != 0.0
    assert np.all(np.diff(outs[4:]) > 0)


def test_online_freeze():
    cfg = LearnerConfig(alpha=0.5, batch_capacity=2, freeze_time=1.0)
    lr = OnlineLearner(cfg, 1, 1.0)
    for k in range(5):
        lr.cycle(featurize([1.0], 0.0), 1.0, 0.2 * k)
    theta = lr.theta.copy()
    for k in range(5, 10):
        lr.cycle(featurize([1.0], 0.0), 1.0, 0.2 * k)
    assert np.array_equal(lr.theta, theta)


def test_online_zero_rate_stays_zero():
    lr = OnlineLearner(LearnerConfig(alpha=0.0, batch_capacity=3), 4, 1.0)
    rng = np.random.default_rng(8)
    for k in range(20):
        assert lr.cycle(featurize(rng.standard_normal(4), rng.standard_normal()), rng.standard_normal(), k) == 0.0
    assert not lr.theta.any()

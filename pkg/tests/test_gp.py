import math

import numpy as np
import pytest

from polarongp.gp import (
    ConditioningError,
    Matern52,
    Product,
    RationalQuadratic,
    SquaredExponential,
    Sum,
    condition,
    eval_kernel,
    fit,
    gp_from_dict,
    gp_to_dict,
    kernel_from_dict,
    log_marginal_likelihood,
    parameter_count,
    predict,
)

LOG2PI = math.log(2 * math.pi)


def kernel_zoo(p):
    return [
        SquaredExponential(p, 1.3, np.linspace(0.5, 2.0, p)),
        Matern52(p, 0.7, np.linspace(3.0, 1.0, p)),
        RationalQuadratic(p, 1.1, np.linspace(1.0, 4.0, p), alpha=2.0),
        Product(SquaredExponential(p, 1.0, 2.0), Matern52(p, 2.0, 0.5)),
        Sum(Product(SquaredExponential(p, 1.0, 2.0), Matern52(p, 2.0, 0.5)), RationalQuadratic(p, 0.5, 1.0, alpha=0.7)),
        Product(Sum(Matern52(p, 0.4, 1.5), SquaredExponential(p, 0.9, 0.3)), RationalQuadratic(p, 1.2, 0.8, alpha=3.0)),
    ]


def fd_gradient(k, X, y, h=1e-5):
    theta = k.get_params()
    out = []
    for j in range(len(theta)):
        e = np.zeros_like(theta)
        e[j] = h
        k.set_params(theta + e)
        up = log_marginal_likelihood(k, X, y)[0]
        k.set_params(theta - e)
        down = log_marginal_likelihood(k, X, y)[0]
        out.append((up - down) / (2 * h))
    k.set_params(theta)
    return np.array(out)


def test_leaf_value_at_zero_distance():
    x = np.array([0.3, -1.0])
    for leaf in (SquaredExponential(2, 1.7), Matern52(2, 0.2), RationalQuadratic(2, 3.0, alpha=0.4)):
        assert eval_kernel(leaf, x, x) == pytest.approx(leaf.variance)


def test_kernel_closed_forms():
    x, xp = np.zeros(2), np.ones(2)  # r^2 = 2 with unit metric
    assert eval_kernel(SquaredExponential(2), x, xp) == pytest.approx(math.exp(-1.0), abs=1e-15)
    assert eval_kernel(SquaredExponential(2), x, xp) == pytest.approx(0.367879, abs=1e-6)
    r = math.sqrt(2.0)
    m52 = (1 + math.sqrt(5) * r + 5.0 / 3.0 * 2.0) * math.exp(-math.sqrt(5) * r)
    assert eval_kernel(Matern52(2), x, xp) == pytest.approx(m52, rel=1e-14)
    assert eval_kernel(RationalQuadratic(2, alpha=2.0), x, xp) == pytest.approx((1 + 2 / 4) ** -2, rel=1e-14)
    prod = Product(SquaredExponential(1, 2.0), Matern52(1, 3.0))
    assert eval_kernel(prod, [0.4], [0.4]) == pytest.approx(6.0)


def test_anisotropic_metric():
    k = SquaredExponential(2, 1.0, [4.0, 0.25])
    assert eval_kernel(k, [0, 0], [0.5, 2.0]) == pytest.approx(math.exp(-0.5 * (4 * 0.25 + 0.25 * 4)))


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        eval_kernel(SquaredExponential(2), [0, 0], [0, 0, 0])
    with pytest.raises(ValueError):
        Sum(SquaredExponential(2), Matern52(3))


def test_parameter_count_rule():
    assert parameter_count(Product(SquaredExponential(3), Matern52(3))) == 8
    assert parameter_count(RationalQuadratic(3)) == 5
    assert parameter_count(Sum(Product(SquaredExponential(2), Matern52(2)), RationalQuadratic(2))) == 10


def test_structure_strings_and_roundtrip():
    k = Sum(Product(SquaredExponential(3), Matern52(3)), RationalQuadratic(3, alpha=0.3))
    assert k.structure() == "(SE*M52)+RQ"
    k2 = kernel_from_dict(k.to_dict())
    assert k2.structure() == k.structure()
    np.testing.assert_array_equal(k2.get_params(), k.get_params())


def test_lml_scalar_cases():
    k = SquaredExponential(1, 1.0)
    assert log_marginal_likelihood(k, [[0.0]], [2.0])[0] == pytest.approx(-2.0 - 0.5 * LOG2PI, abs=1e-8)
    assert log_marginal_likelihood(k, [[0.0]], [2.0])[0] == pytest.approx(-2.918939, abs=1e-6)
    assert log_marginal_likelihood(k, [[0.0]], [0.0])[0] == pytest.approx(-0.918939, abs=1e-6)


@pytest.mark.parametrize("idx", range(6))
def test_lml_gradient_matches_finite_differences(idx):
    rng = np.random.default_rng(idx)
    X = rng.uniform(size=(6, 2))
    y = np.sin(3 * X[:, 0]) + X[:, 1] ** 2
    k = kernel_zoo(2)[idx]
    _, g = log_marginal_likelihood(k, X, y)
    fd = fd_gradient(k, X, y)
    assert np.all(np.abs(fd - g) <= 1e-5 * np.maximum(np.abs(g), 1e-3))


def test_gram_psd_random_kernels():
    rng = np.random.default_rng(0)
    leaves = (SquaredExponential, Matern52, RationalQuadratic)
    for trial in range(200):
        p = int(rng.integers(1, 4))
        X = rng.uniform(-1, 1, size=(12, p))

        def leaf():
            cls = leaves[rng.integers(3)]
            kw = {"alpha": float(rng.uniform(0.1, 5))} if cls is RationalQuadratic else {}
            return cls(p, float(rng.uniform(0.1, 3)), rng.uniform(0.1, 10, p), **kw)

        k = leaf()
        for _ in range(int(rng.integers(0, 3))):
            k = Sum(k, leaf()) if rng.random() < 0.5 else Product(k, leaf())
        K = k.gram(X)
        np.testing.assert_allclose(K, K.T, atol=1e-14)
        n = len(K)
        assert np.linalg.eigvalsh(K).min() >= -1e-8 * np.trace(K) / n


def _toy(n=12, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(size=(n, 2))
    y = np.sin(4 * X[:, 0]) * np.cos(2 * X[:, 1]) + 0.3 * X[:, 1]
    return X, y


def test_fit_interpolates_and_factor_reconstructs():
    X, y = _toy()
    gp = fit(Product(SquaredExponential(2), Matern52(2)), X, y, restarts=3, seed=1)
    mean, var = predict(gp, X)
    assert np.max(np.abs((mean - y) / gp.y_scale)) < 1e-6
    assert np.all(var / gp.y_scale**2 < 1e-6 * gp.kernel.diag(1)[0])
    K = gp.kernel.gram(gp.inputs_std) + gp.jitter * np.eye(gp.n)
    assert np.linalg.norm(gp.chol @ gp.chol.T - K) <= 1e-8 * np.linalg.norm(K)
    assert gp.lml >= max(h["init_lml"] for h in gp.history if h["init_lml"] is not None) - 1e-12


def test_refit_from_optimum_is_stationary():
    X, y = _toy(seed=2)
    gp = fit(SquaredExponential(2), X, y, restarts=4, seed=0)
    again = fit(gp.kernel, X, y, restarts=1, seed=0)
    assert abs(again.lml - gp.lml) < 1e-8


def test_constant_targets():
    X = np.linspace(0, 1, 8)[:, None]
    gp = fit(SquaredExponential(1), X, np.full(8, 3.25), restarts=2)
    assert gp.kernel.variance == pytest.approx(1e-3, rel=1e-3)
    np.testing.assert_allclose(gp.predict_mean(np.linspace(-1, 2, 21)[:, None]), 3.25, atol=1e-6)


def test_length_scale_recovery_from_se_samples():
    rng = np.random.default_rng(42)
    X = np.sort(rng.uniform(0, 1, 40))[:, None]
    K = SquaredExponential(1, 1.0, 1 / 0.3**2).gram(X) + 1e-10 * np.eye(40)
    y = np.linalg.cholesky(K) @ rng.standard_normal(40)
    gp = fit(SquaredExponential(1), X, y, restarts=8, seed=0)
    ell = gp.kernel.length_scales[0] * gp.x_scale[0]
    assert 0.15 <= ell <= 0.6


def test_two_point_antisymmetric_oracle():
    X = np.array([[-1.0], [1.0]])
    y = np.array([-1.0, 1.0])
    k = SquaredExponential(1, 1.0, 1.0)
    gp = condition(k, X, y, standardize=(np.zeros(1), np.ones(1), 0.0, 1.0))
    K = np.array([[1.0, math.exp(-2.0)], [math.exp(-2.0), 1.0]]) + gp.jitter * np.eye(2)
    np.testing.assert_allclose(gp.weights, np.linalg.solve(K, y), rtol=1e-12)
    assert gp.predict_mean([[0.0]])[0] == pytest.approx(0.0, abs=1e-14)


def test_far_field_reverts_to_prior():
    X, y = _toy()
    gp = fit(SquaredExponential(2), X, y, restarts=2)
    mean, var = predict(gp, [[1e4, -1e4]])
    assert mean[0] == pytest.approx(gp.y_offset)
    assert var[0] == pytest.approx(gp.kernel.variance * gp.y_scale**2)


def test_posterior_variance_bounded_by_prior():
    X, y = _toy()
    gp = fit(Sum(SquaredExponential(2), RationalQuadratic(2)), X, y, restarts=2)
    Q = np.random.default_rng(9).uniform(-0.5, 1.5, size=(300, 2))
    _, var = predict(gp, Q)
    prior = gp.kernel.diag(len(Q)) * gp.y_scale**2
    assert np.all(var <= prior + 1e-10)


def test_permutation_invariance():
    X, y = _toy()
    k = Product(SquaredExponential(2, 1.0, 3.0), Matern52(2, 1.0, 2.0))
    a = condition(k, X, y)
    perm = np.random.default_rng(1).permutation(len(y))
    b = condition(k, X[perm], y[perm])
    Q = np.random.default_rng(2).uniform(size=(50, 2))
    np.testing.assert_allclose(a.predict_mean(Q), b.predict_mean(Q), atol=1e-8)


def test_serialization_round_trip():
    X, y = _toy()
    gp = fit(Sum(Product(SquaredExponential(2), Matern52(2)), RationalQuadratic(2)), X, y, restarts=2)
    gp2 = gp_from_dict(gp_to_dict(gp))
    Q = np.random.default_rng(3).uniform(size=(40, 2))
    m1, v1 = predict(gp, Q)
    m2, v2 = predict(gp2, Q)
    np.testing.assert_allclose(m2, m1, rtol=0, atol=1e-12)
    np.testing.assert_allclose(v2, v1, rtol=0, atol=1e-12)


def test_fit_input_errors():
    with pytest.raises(ValueError, match="duplicate"):
        fit(SquaredExponential(1), [[0.0], [0.0], [1.0]], [1.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        fit(SquaredExponential(1), [[0.0]], [1.0])


class _Indefinite(SquaredExponential):
    def gram_from_sqdist(self, D2, grad=False):
        K = super().gram_from_sqdist(D2, grad)
        if grad:
            return -K[0], [-g for g in K[1]]
        return -K


def test_conditioning_error_when_ladder_exhausted():
    X = np.array([[0.0], [0.5], [1.0]])
    with pytest.raises(ConditioningError, match="jitter ladder"):
        log_marginal_likelihood(_Indefinite(1), X, [1.0, 2.0, 3.0])
    with pytest.raises(ConditioningError, match="every restart"):
        fit(_Indefinite(1), X, [1.0, 2.0, 3.0], restarts=2)

import numpy as np
import pytest

from skillforge.numkit import (
    AdamState,
    MLPSpec,
    ParamVector,
    SgdState,
    entropy,
    init_mlp_params,
    mlp_forward,
    mlp_gradient,
    optimizer_step,
    softmax,
)


def finite_diff_gradient(spec, params, x, output_grad, h=1e-5):
    """Central-difference gradient of output . output_grad, the independent oracle."""
    base = params.values.copy()
    grad = np.zeros_like(base)
    for i in range(base.size):
        plus = base.copy()
        plus[i] += h
        minus = base.copy()
        minus[i] -= h
        f_plus = float(mlp_forward(spec, ParamVector(plus, params.layout), x) @ output_grad)
        f_minus = float(mlp_forward(spec, ParamVector(minus, params.layout), x) @ output_grad)
        grad[i] = (f_plus - f_minus) / (2.0 * h)
    return grad


def rel_error(a, b):
    scale = max(np.abs(a).max(), np.abs(b).max(), 1e-12)
    return np.abs(a - b).max() / scale


class TestMLPForward:
    def test_zero_params_give_zero_output(self):
        spec = MLPSpec(3, (4,), 2)
        params = ParamVector.zeros(spec.layout())
        out = mlp_forward(spec, params, np.array([0.3, -1.2, 5.0]))
        assert np.all(out == 0.0)

    def test_identity_linear_layer(self):
        spec = MLPSpec(3, (), 3)
        params = ParamVector.zeros(spec.layout())
        params.view("W0")[...] = np.eye(3)
        x = np.array([0.7, -0.2, 1.5])
        assert np.allclose(mlp_forward(spec, params, x), x)

    def test_hand_evaluated_2_3_1_tanh_net(self):
        # value frozen from an independent step-by-step composition
        spec = MLPSpec(2, (3,), 1)
        params = ParamVector.zeros(spec.layout())
        params.view("W0")[...] = [[0.1, 0.2, -0.1], [0.3, -0.2, 0.4]]
        params.view("b0")[...] = [0.05, -0.05, 0.1]
        params.view("W1")[...] = [[0.2], [-0.3], [0.5]]
        params.view("b1")[...] = [0.1]
        out = mlp_forward(spec, params, np.array([1.0, -0.5]))
        assert out.shape == (1,)
        assert out[0] == pytest.approx(-0.072163258834, abs=1e-9)

    def test_batch_matches_single(self):
        rng = np.random.default_rng(3)
        spec = MLPSpec(4, (5,), 3)
        params = init_mlp_params(spec, rng)
        xs = rng.normal(size=(6, 4))
        batch = mlp_forward(spec, params, xs)
        for i in range(6):
            assert np.allclose(batch[i], mlp_forward(spec, params, xs[i]))

    def test_dimension_mismatch_raises(self):
        spec = MLPSpec(3, (4,), 2)
        params = ParamVector.zeros(spec.layout())
        with pytest.raises(ValueError):
            mlp_forward(spec, params, np.zeros(5))


class TestMLPGradient:
    def test_zero_output_grad_gives_zero_gradient(self):
        rng = np.random.default_rng(0)
        spec = MLPSpec(2, (3,), 2)
        params = init_mlp_params(spec, rng)
        g = mlp_gradient(spec, params, rng.normal(size=2), np.zeros(2))
        assert np.all(g.values == 0.0)

    def test_linear_layer_weight_gradient_is_outer_product(self):
        spec = MLPSpec(3, (), 2)
        params = ParamVector.zeros(spec.layout())
        x = np.array([1.0, 2.0, -1.0])
        og = np.array([0.5, -0.25])
        g = mlp_gradient(spec, params, x, og)
        assert np.allclose(g.view("W0"), np.outer(x, og))
        assert np.allclose(g.view("b0"), og)

    def test_matches_finite_differences_small_net(self):
        rng = np.random.default_rng(7)
        spec = MLPSpec(3, (4, 3), 2, activation="tanh")
        params = init_mlp_params(spec, rng)
        x = rng.normal(size=3)
        og = rng.normal(size=2)
        analytic = mlp_gradient(spec, params, x, og).values
        fd = finite_diff_gradient(spec, params, x, og)
        assert rel_error(analytic, fd) <= 1e-5

    def test_relu_gradient_on_safe_inputs(self):
        # pre-activations kept away from the kink so FD is valid
        spec = MLPSpec(2, (3,), 1, activation="relu")
        params = ParamVector.zeros(spec.layout())
        params.view("W0")[...] = [[0.5, -0.8, 0.3], [0.2, 0.4, -0.6]]
        params.view("b0")[...] = [0.3, -0.2, 0.5]
        params.view("W1")[...] = [[0.7], [-0.4], [0.9]]
        x = np.array([1.0, -1.0])
        og = np.array([1.0])
        analytic = mlp_gradient(spec, params, x, og).values
        fd = finite_diff_gradient(spec, params, x, og)
        assert rel_error(analytic, fd) <= 1e-5

    def test_gradient_check_50_random_nets(self):
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(50):
            dims = rng.integers(1, 5, size=rng.integers(1, 3))
            spec = MLPSpec(int(rng.integers(1, 4)), tuple(int(d) for d in dims),
                           int(rng.integers(1, 4)), activation="tanh")
            params = init_mlp_params(spec, rng)
            x = rng.normal(size=spec.input_dim)
            og = rng.normal(size=spec.output_dim)
            analytic = mlp_gradient(spec, params, x, og).values
            fd = finite_diff_gradient(spec, params, x, og)
            worst = max(worst, rel_error(analytic, fd))
        assert worst <= 1e-4

    def test_batched_gradient_is_sum_of_per_sample(self):
        rng = np.random.default_rng(11)
        spec = MLPSpec(3, (4,), 2)
        params = init_mlp_params(spec, rng)
        xs = rng.normal(size=(5, 3))
        ogs = rng.normal(size=(5, 2))
        batched = mlp_gradient(spec, params, xs, ogs).values
        summed = sum(mlp_gradient(spec, params, xs[i], ogs[i]).values for i in range(5))
        assert np.allclose(batched, summed)


class TestSoftmax:
    def test_equal_logits_uniform(self):
        for temp in (0.1, 1.0, 10.0):
            p = softmax(np.array([2.0, 2.0, 2.0, 2.0]), temp)
            assert np.allclose(p, 0.25)

    def test_closed_form_two_logits(self):
        p = softmax(np.array([0.2, 0.0]), temperature=0.1)
        assert p[0] == pytest.approx(0.8808, abs=1e-4)
        assert p[1] == pytest.approx(0.1192, abs=1e-4)

    def test_large_temperature_approaches_uniform(self):
        p = softmax(np.array([1.0, 0.0]), temperature=1e6)
        assert np.allclose(p, 0.5, atol=1e-6)

    def test_sums_to_one_and_shift_invariant(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            logits = rng.normal(scale=5.0, size=rng.integers(2, 12))
            temp = float(rng.uniform(0.05, 10.0))
            p = softmax(logits, temp)
            assert abs(p.sum() - 1.0) <= 1e-12
            shifted = softmax(logits + rng.normal(scale=3.0), temp)
            assert np.argmax(shifted) == np.argmax(p)
            assert np.abs(shifted - p).max() <= 1e-12

    def test_entropy_nondecreasing_in_temperature(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            logits = rng.normal(scale=2.0, size=6)
            temps = np.linspace(0.05, 20.0, 40)
            ents = [entropy(softmax(logits, t)) for t in temps]
            diffs = np.diff(ents)
            assert np.all(diffs >= -1e-12)

    def test_nonpositive_temperature_rejected(self):
        with pytest.raises(ValueError):
            softmax(np.array([1.0, 2.0]), temperature=0.0)
        with pytest.raises(ValueError):
            softmax(np.array([1.0, 2.0]), temperature=-1.0)


class TestEntropy:
    def test_one_hot_is_zero(self):
        assert entropy(np.array([0.0, 1.0, 0.0])) == 0.0

    def test_uniform_is_log_n(self):
        for n in (2, 5, 20):
            assert entropy(np.full(n, 1.0 / n)) == pytest.approx(np.log(n), abs=1e-12)

    def test_hand_computed_case(self):
        assert entropy(np.array([0.5, 0.25, 0.25])) == pytest.approx(1.0397, abs=1e-4)

    def test_bounds(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            p = rng.dirichlet(np.ones(rng.integers(2, 10)))
            h = entropy(p)
            assert 0.0 <= h <= np.log(len(p)) + 1e-12

    def test_invalid_distributions_rejected(self):
        with pytest.raises(ValueError):
            entropy(np.array([0.5, 0.6]))
        with pytest.raises(ValueError):
            entropy(np.array([-0.1, 1.1]))


class TestOptimizer:
    def test_sgd_zero_gradient_is_noop(self):
        layout = (("w", (2,)),)
        params = ParamVector(np.array([1.0, -2.0]), layout)
        out = optimizer_step(params, ParamVector.zeros(layout), SgdState(lr=0.1))
        assert np.array_equal(out.values, params.values)

    def test_sgd_definition(self):
        layout = (("w", (1,)),)
        params = ParamVector(np.array([1.0]), layout)
        grads = ParamVector(np.array([2.0]), layout)
        out = optimizer_step(params, grads, SgdState(lr=0.1))
        assert out.values[0] == pytest.approx(0.8, abs=1e-15)

    def test_quadratic_bowl_convergence(self):
        layout = (("x", (1,)),)
        params = ParamVector(np.array([1.0]), layout)
        state = SgdState(lr=0.1)
        for _ in range(100):
            grads = ParamVector(2.0 * params.values, layout)
            params = optimizer_step(params, grads, state)
        assert abs(params.values[0]) < 1e-3

    def test_adam_quadratic_bowl_convergence(self):
        layout = (("x", (1,)),)
        params = ParamVector(np.array([1.0]), layout)
        state = AdamState(lr=0.05)
        for _ in range(500):
            grads = ParamVector(2.0 * params.values, layout)
            params = optimizer_step(params, grads, state)
        assert abs(params.values[0]) < 1e-3

    def test_adam_deterministic_given_state(self):
        layout = (("x", (3,)),)
        rng = np.random.default_rng(1)
        p0 = ParamVector(rng.normal(size=3), layout)
        g = ParamVector(rng.normal(size=3), layout)
        a = optimizer_step(p0.copy(), g, AdamState(lr=0.01))
        b = optimizer_step(p0.copy(), g, AdamState(lr=0.01))
        assert np.array_equal(a.values, b.values)

    def test_shape_mismatch_raises(self):
        p = ParamVector(np.zeros(2), (("w", (2,)),))
        g = ParamVector(np.zeros(3), (("w", (3,)),))
        with pytest.raises(ValueError):
            optimizer_step(p, g, SgdState())


class TestParamVector:
    def test_layout_size_mismatch_raises(self):
        with pytest.raises(ValueError):
            ParamVector(np.zeros(5), (("w", (2, 3)),))

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            ParamVector(np.array([1.0, np.nan]), (("w", (2,)),))

    def test_views_alias_flat_vector(self):
        spec = MLPSpec(2, (3,), 1)
        params = ParamVector.zeros(spec.layout())
        params.view("W0")[0, 0] = 7.0
        assert params.values[0] == 7.0

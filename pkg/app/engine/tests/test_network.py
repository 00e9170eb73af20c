import numpy as np
from django.test import SimpleTestCase

from app.engine.network import (
    cross_entropy,
    forward,
    loss_and_grad,
    predict,
    predict_proba,
)
from app.engine.tests.factories import (
    LabeledDatasetFactory,
    ModelArchFactory,
    ParameterVectorFactory,
)
from app.engine.types import Activation

STEP = 1e-5


def finite_difference(params, features, labels):
    grad = np.zeros(len(params))
    for i in range(len(params)):
        up, down = params.values.copy(), params.values.copy()
        up[i] += STEP
        down[i] -= STEP
        loss_up, _ = loss_and_grad(params.with_values(up), features, labels)
        loss_down, _ = loss_and_grad(params.with_values(down), features, labels)
        grad[i] = (loss_up - loss_down) / (2 * STEP)
    return grad


def relative_error(a, b):
    return np.linalg.norm(a - b) / max(1e-12, np.linalg.norm(a) + np.linalg.norm(b))


class ForwardTestCase(SimpleTestCase):
    def test_it_should_produce_probabilities_that_sum_to_one(self):
        params = ParameterVectorFactory(arch=ModelArchFactory(layer_dims=(4, 5, 3)))
        data = LabeledDatasetFactory(rows=20, classes=3)

        probs = predict_proba(params, data.features)

        self.assertEqual(probs.shape, (20, 3))
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)

    def test_predict_argmax(self):
        params = ParameterVectorFactory(arch=ModelArchFactory(layer_dims=(4, 3)))
        data = LabeledDatasetFactory(rows=10, classes=3)

        logits, _ = forward(params, data.features)

        np.testing.assert_array_equal(
            predict(params, data.features), np.argmax(logits, axis=1)
        )

    def test_zero_model_loss(self):
        arch = ModelArchFactory(layer_dims=(4, 3, 5))
        params = ParameterVectorFactory(arch=arch, scale=0.0)
        data = LabeledDatasetFactory(classes=5, rows=15)

        self.assertAlmostEqual(cross_entropy(params, data), np.log(5), places=12)


class GradientCheckTestCase(SimpleTestCase):
    def check(self, layer_dims, activation, seed):
        arch = ModelArchFactory(layer_dims=layer_dims, activation=activation)
        params = ParameterVectorFactory(arch=arch, seed=seed)
        data = LabeledDatasetFactory(
            rows=7, dim=layer_dims[0], classes=layer_dims[-1], seed=seed + 100
        )
        self.assertLessEqual(len(params), 50)

        _, analytic = loss_and_grad(params, data.features, data.labels)
        numeric = finite_difference(params, data.features, data.labels)

        self.assertLess(relative_error(analytic, numeric), 1e-4)

    def test_gradient_tanh(self):
        for seed in range(5):
            with self.subTest(seed=seed):
                self.check((4, 3, 2), Activation.TANH, seed)

    def test_gradient_relu(self):
        for seed in range(5):
            with self.subTest(seed=seed):
                self.check((3, 4, 3), Activation.RELU, seed)

    def test_gradient_softmax_regression(self):
        self.check((5, 4), Activation.RELU, 11)

    def test_gradient_two_hidden_layers(self):
        self.check((3, 3, 3, 2), Activation.TANH, 3)

    def test_it_should_return_the_mean_batch_loss(self):
        params = ParameterVectorFactory()
        data = LabeledDatasetFactory()

        loss, _ = loss_and_grad(params, data.features, data.labels)

        self.assertAlmostEqual(loss, cross_entropy(params, data), places=12)

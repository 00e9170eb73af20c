import numpy as np
from django.test import SimpleTestCase

from app.core.utils import ConfigurationError
from app.data.synthetic import class_means, make_blobs
from app.engine.metrics import evaluate_ma
from app.engine.tests.factories import ModelArchFactory, TrainingConfigFactory
from app.engine.training import client_update, init_model


class MakeBlobsTestCase(SimpleTestCase):
    def test_make_blobs_zero_spread(self):
        data = make_blobs(num_classes=4, per_class=6, dim=3, spread=0.0, seed=1)
        means = class_means(4, 3)

        np.testing.assert_array_equal(data.features, means[data.labels])

    def test_make_blobs_balanced(self):
        data = make_blobs(num_classes=5, per_class=13, dim=4, spread=0.3, seed=2)

        np.testing.assert_array_equal(np.bincount(data.labels), [13] * 5)

    def test_it_should_be_deterministic_per_seed(self):
        first = make_blobs(3, 10, 2, 0.5, seed=9)
        second = make_blobs(3, 10, 2, 0.5, seed=9)

        self.assertEqual(first.features.tobytes(), second.features.tobytes())
        np.testing.assert_array_equal(first.labels, second.labels)

    def test_class_means_more_classes_than_axes(self):
        means = class_means(10, 4)

        self.assertEqual(len({tuple(m) for m in means}), 10)

    def test_it_should_be_learnable_by_a_linear_model(self):
        data = make_blobs(num_classes=3, per_class=60, dim=3, spread=0.1, seed=3)
        arch = ModelArchFactory(layer_dims=(3, 3))
        cfg = TrainingConfigFactory(learning_rate=0.5, local_epochs=30, batch_size=16)

        trained = client_update(init_model(arch, 0), data, cfg)

        self.assertGreaterEqual(evaluate_ma(trained, data), 0.99)

    def test_make_blobs_invalid_sizes(self):
        with self.assertRaises(ConfigurationError):
            make_blobs(0, 10, 2, 0.1, seed=0)
        with self.assertRaises(ConfigurationError):
            make_blobs(2, 10, 2, -0.1, seed=0)

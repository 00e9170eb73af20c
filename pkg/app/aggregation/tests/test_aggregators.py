import numpy as np
from django.test import SimpleTestCase

from app.aggregation.aggregators import (
    ClientContribution,
    coordinate_median,
    fedavg_weighted,
    krum,
    krum_scores,
    krum_select,
    mean_accepted,
    trimmed_mean,
)
from app.core.utils import (
    ConfigurationError,
    DimensionMismatchError,
    EmptySelectionError,
    InsufficientModelsError,
    make_rng,
)
from app.engine.tests.factories import ModelArchFactory, ParameterVectorFactory
from app.engine.types import ParameterVector

ARCH = ModelArchFactory.build(layer_dims=(1, 1))


def model(*values):
    """Two-parameter model; missing trailing coordinates are zero."""
    padded = list(values) + [0.0] * (ARCH.param_count - len(values))
    return ParameterVector(values=np.array(padded, dtype=float), arch=ARCH)


def random_models(count, seed=0):
    arch = ModelArchFactory(layer_dims=(3, 2))
    return [ParameterVectorFactory(arch=arch, seed=seed + i) for i in range(count)]


class MeanAcceptedTestCase(SimpleTestCase):
    def test_it_should_return_a_single_accepted_model(self):
        models = random_models(3)
        np.testing.assert_array_equal(
            mean_accepted(models, [1]).values, models[1].values
        )

    def test_mean_of_opposite_models(self):
        v = random_models(1)[0]
        result = mean_accepted([v, v.with_values(-v.values)], [0, 1])
        np.testing.assert_array_equal(result.values, np.zeros(len(v)))

    def test_mean_accepted_subset(self):
        models = [model(1.0), model(2.0), model(6.0), model(1000.0)]
        self.assertEqual(mean_accepted(models, [0, 1, 2]).values[0], 3.0)

    def test_mean_accepted_empty_selection(self):
        with self.assertRaises(EmptySelectionError):
            mean_accepted(random_models(2), [])

    def test_fedavg_mixed_architectures(self):
        other = ParameterVectorFactory(arch=ModelArchFactory(layer_dims=(2, 2)))
        with self.assertRaises(DimensionMismatchError):
            mean_accepted([random_models(1)[0], other], [0, 1])

    def test_it_should_shift_with_its_inputs(self):
        models = random_models(4)
        shifted = [m.with_values(m.values + 2.5) for m in models]

        np.testing.assert_allclose(
            mean_accepted(shifted, [0, 2, 3]).values,
            mean_accepted(models, [0, 2, 3]).values + 2.5,
            atol=1e-12,
        )


class FedavgWeightedTestCase(SimpleTestCase):
    def test_fedavg_sample_weights(self):
        result = fedavg_weighted(
            [
                ClientContribution(params=model(0.0), sample_count=1),
                ClientContribution(params=model(4.0), sample_count=3),
            ]
        )
        self.assertEqual(result.values[0], 3.0)

    def test_it_should_reduce_to_the_mean_for_equal_counts(self):
        models = random_models(5)
        contribs = [ClientContribution(params=m, sample_count=7) for m in models]

        np.testing.assert_allclose(
            fedavg_weighted(contribs).values,
            mean_accepted(models, range(5)).values,
            atol=1e-12,
        )

    def test_fedavg_single_client(self):
        m = random_models(1)[0]
        result = fedavg_weighted([ClientContribution(params=m, sample_count=4)])
        np.testing.assert_allclose(result.values, m.values, atol=1e-15)

    def test_fedavg_empty_input_and_zero_counts(self):
        with self.assertRaises(EmptySelectionError):
            fedavg_weighted([])
        with self.assertRaises(ConfigurationError):
            ClientContribution(params=model(1.0), sample_count=0)


class KrumTestCase(SimpleTestCase):
    def test_krum_far_outlier(self):
        models = [model(1.0, 1.0)] * 4 + [model(50.0, -50.0)]
        models = [models[4]] + models[:4]

        chosen = krum_select(models, 1)

        self.assertIn(chosen, [1, 2, 3, 4])
        self.assertEqual(chosen, 1)

    def test_krum_scores(self):
        models = [model(0.0), model(1.0), model(3.0), model(10.0), model(11.0)]

        # K - f - 2 = 2 neighbours per model.
        np.testing.assert_array_equal(
            krum_scores(models, 1), [1 + 9, 1 + 4, 4 + 9, 1 + 49, 1 + 64]
        )

    def test_krum_identical_models(self):
        models = [model(2.0, 2.0) for _ in range(5)]
        self.assertEqual(krum_select(models, 1), 0)
        self.assertIs(krum(models, 1), models[0])

    def test_it_should_return_one_of_its_inputs(self):
        models = random_models(7, seed=3)
        chosen = krum(models, 2)
        self.assertTrue(any(chosen is m for m in models))

    def test_krum_too_few_models(self):
        with self.assertRaises(InsufficientModelsError):
            krum(random_models(3), 1)


class CoordinateMedianTestCase(SimpleTestCase):
    def test_median_outlier(self):
        result = coordinate_median([model(1.0), model(2.0), model(100.0)])
        self.assertEqual(result.values[0], 2.0)

    def test_median_even_count(self):
        self.assertEqual(coordinate_median([model(1.0), model(3.0)]).values[0], 2.0)

    def test_it_should_return_a_single_model_unchanged(self):
        m = random_models(1)[0]
        np.testing.assert_array_equal(coordinate_median([m]).values, m.values)

    def test_model_order_invariance(self):
        models = random_models(6)
        order = make_rng(1).permutation(6)

        np.testing.assert_array_equal(
            coordinate_median(models).values,
            coordinate_median([models[i] for i in order]).values,
        )


class TrimmedMeanTestCase(SimpleTestCase):
    def test_trimmed_mean_zero_beta(self):
        models = random_models(4)
        np.testing.assert_allclose(
            trimmed_mean(models, 0.0).values,
            mean_accepted(models, range(4)).values,
            atol=1e-12,
        )

    def test_trimmed_mean_drops_both_tails(self):
        models = [model(v) for v in (3.0, 100.0, 1.0, 0.0, 2.0)]
        self.assertEqual(trimmed_mean(models, 0.2).values[0], 2.0)

    def test_median_identical_models(self):
        m = random_models(1)[0]
        np.testing.assert_allclose(
            trimmed_mean([m] * 5, 0.3).values, m.values, atol=1e-15
        )

    def test_trimmed_mean_odd_count_median(self):
        models = random_models(7, seed=11)
        np.testing.assert_allclose(
            trimmed_mean(models, 0.49).values,
            coordinate_median(models).values,
            atol=1e-15,
        )

    def test_model_order_invariance(self):
        models = random_models(6)
        order = make_rng(2).permutation(6)
        np.testing.assert_allclose(
            trimmed_mean(models, 0.2).values,
            trimmed_mean([models[i] for i in order], 0.2).values,
            atol=1e-15,
        )

    def test_trimmed_mean_beta_out_of_range(self):
        with self.assertRaises(ConfigurationError):
            trimmed_mean(random_models(4), 0.5)
        with self.assertRaises(ConfigurationError):
            trimmed_mean(random_models(4), -0.1)

import numpy as np
from django.test import SimpleTestCase

from app.attacks.tests.factories import AttackConfigFactory, TriggerSpecFactory
from app.attacks.types import (
    AttackKind,
    apply_trigger,
    corner_trigger,
    poisoned_count,
)
from app.core.utils import ConfigurationError, DimensionMismatchError, make_rng
from app.engine.types import LabeledDataset


class AttackConfigTestCase(SimpleTestCase):
    def test_malicious_count_floor(self):
        self.assertEqual(AttackConfigFactory(pmr=0.3).malicious_count(10), 3)
        self.assertEqual(AttackConfigFactory(pmr=0.49).malicious_count(10), 4)
        self.assertEqual(AttackConfigFactory(pmr=0.0).malicious_count(10), 0)

    def test_automatic_gamma(self):
        cfg = AttackConfigFactory(pmr=0.3, scale_gamma=None)

        self.assertAlmostEqual(cfg.gamma_for(10), 10 / 7)
        self.assertEqual(AttackConfigFactory(scale_gamma=3.0).gamma_for(10), 3.0)

    def test_pmr_without_honest_majority(self):
        with self.assertLogs("app.attacks.types", level="WARNING") as logs:
            AttackConfigFactory(pmr=0.6)

        self.assertIn("honest-majority", logs.output[0])

    def test_it_should_tell_backdoors_apart(self):
        adaptive = AttackConfigFactory(kind=AttackKind.ADAPTIVE_FREQUENCY)
        self.assertTrue(adaptive.is_backdoor)
        self.assertFalse(AttackConfigFactory(kind=AttackKind.LABEL_FLIP).is_backdoor)

    def test_attack_config_out_of_range(self):
        for kwargs in (
            {"kind": "model_replacement"},
            {"pmr": 1.0},
            {"pdr": 1.5},
            {"alpha": 0.0},
            {"scale_gamma": 0.5},
            {"tau": -1.0},
            {"random_sigma": 0.0},
        ):
            with self.subTest(**kwargs), self.assertRaises(ConfigurationError):
                AttackConfigFactory(**kwargs)


class TriggerTestCase(SimpleTestCase):
    def test_corner_trigger_square_image(self):
        data = LabeledDataset(
            features=make_rng(0).uniform(size=(3, 784)), labels=[0, 1, 2]
        )

        trigger = corner_trigger(data)

        self.assertEqual(trigger.pixel_indices, (0, 1, 28, 29))
        self.assertEqual(trigger.pixel_value, float(data.features.max()))

    def test_corner_trigger_non_square_input(self):
        data = LabeledDataset(features=np.ones((2, 10)), labels=[0, 1])

        self.assertEqual(corner_trigger(data).pixel_indices, (0, 1, 2, 3))

    def test_it_should_stamp_every_row_and_keep_labels(self):
        data = LabeledDataset(features=np.zeros((4, 3)), labels=[0, 1, 2, 1])

        triggered = apply_trigger(data, TriggerSpecFactory(pixel_indices=(2,)))

        np.testing.assert_array_equal(triggered.features[:, 2], np.ones(4))
        np.testing.assert_array_equal(triggered.labels, data.labels)
        np.testing.assert_array_equal(data.features, np.zeros((4, 3)))

    def test_it_should_refuse_pixels_outside_the_input(self):
        data = LabeledDataset(features=np.zeros((2, 3)), labels=[0, 1])
        with self.assertRaises(DimensionMismatchError):
            apply_trigger(data, TriggerSpecFactory(pixel_indices=(3,)))

    def test_trigger_without_pixels(self):
        with self.assertRaises(ConfigurationError):
            TriggerSpecFactory(pixel_indices=())

    def test_poisoned_count_rounding(self):
        self.assertEqual(poisoned_count(0.5, 10), 5)
        self.assertEqual(poisoned_count(0.33, 10), 4)
        self.assertEqual(poisoned_count(1.0, 7), 7)
        self.assertEqual(poisoned_count(0.0, 7), 0)

from django.test import SimpleTestCase

from app.core.utils import (
    ConfigurationError,
    DivergedTrainingError,
    RoundFailedError,
    ZeroNormFingerprintError,
)
from app.core.utils.exception_handler import (
    EXIT_CONFIG_ERROR,
    EXIT_RUNTIME_ERROR,
    exception_handler,
)


class ExceptionHandlerTestCase(SimpleTestCase):
    def test_configuration_error_exit_code(self):
        exc = ConfigurationError(
            "Invalid configuration.", errors={"rounds": ["Must be positive."]}
        )

        with self.assertLogs("app.core.utils.exception_handler", level="ERROR") as logs:
            error = exception_handler(exc)

        self.assertEqual(error.returncode, EXIT_CONFIG_ERROR)
        self.assertIn("rounds: Must be positive.", str(error))
        self.assertIn("[invalid_config]", logs.output[0])

    def test_runtime_error_exit_code(self):
        error = exception_handler(RoundFailedError(3, DivergedTrainingError()))

        self.assertEqual(error.returncode, EXIT_RUNTIME_ERROR)
        self.assertIn("Round 3 failed", str(error))

    def test_unhandled_exception(self):
        error = exception_handler(OSError("disk full"))

        self.assertEqual(error.returncode, EXIT_RUNTIME_ERROR)
        self.assertIn("disk full", str(error))

    def test_it_should_fall_back_to_default_details(self):
        self.assertEqual(
            str(DivergedTrainingError()), "Training loss became non-finite."
        )
        self.assertEqual(ConfigurationError().errors, {})
        self.assertIn("client 4", str(ZeroNormFingerprintError(4)))

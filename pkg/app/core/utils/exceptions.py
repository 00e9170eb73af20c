class FreqFedError(Exception):
    default_code = "freqfed_error"
    default_detail = "The testbed could not complete the operation."

    def __init__(self, detail=None, code=None):
        self.detail = detail if detail is not None else self.default_detail
        self.code = code or self.default_code
        super().__init__(self.detail)


class ConfigurationError(FreqFedError):
    default_code = "invalid_config"
    default_detail = "Invalid configuration."

    def __init__(self, detail=None, errors=None):
        self.errors = errors or {}
        super().__init__(detail)


class DimensionMismatchError(FreqFedError):
    default_code = "dimension_mismatch"
    default_detail = "Model, data or architecture dimensions disagree."


class DivergedTrainingError(FreqFedError):
    default_code = "diverged_training"
    default_detail = "Training loss became non-finite."


class NonFiniteInputError(FreqFedError):
    default_code = "non_finite_input"
    default_detail = "Input contains NaN or infinite values."


class ZeroNormFingerprintError(FreqFedError):
    default_code = "zero_norm_fingerprint"

    def __init__(self, client_index=None):
        self.client_index = client_index
        if client_index is None:
            super().__init__("Fingerprint has zero norm.")
        else:
            super().__init__(f"Fingerprint of client {client_index} has zero norm.")


class InsufficientModelsError(FreqFedError):
    default_code = "insufficient_models"
    default_detail = "Too few models for this operation."


class EmptySelectionError(FreqFedError):
    default_code = "empty_selection"
    default_detail = "Nothing left to aggregate or evaluate."


class DataFormatError(FreqFedError):
    default_code = "data_format"
    default_detail = "Malformed dataset."


class RoundFailedError(FreqFedError):
    default_code = "round_failed"

    def __init__(self, round_index, cause):
        self.round_index = round_index
        self.cause = cause
        super().__init__(f"Round {round_index} failed: {cause}")


class SweepFailedError(FreqFedError):
    default_code = "sweep_failed"

    def __init__(self, axis, value, cause):
        self.axis = axis
        self.value = value
        self.cause = cause
        super().__init__(f"Sweep row {axis}={value} failed: {cause}")

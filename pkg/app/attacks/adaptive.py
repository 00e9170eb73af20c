"""Attacks that try to hide a backdoor from the low-frequency filter."""
import logging

import numpy as np
from scipy.sparse.linalg import lsqr

from app.core.utils import (
    ConfigurationError,
    DimensionMismatchError,
    ZeroNormFingerprintError,
)
from app.engine.network import loss_and_grad
from app.engine.training import run_sgd
from app.engine.types import LabeledDataset, ParameterVector, TrainingConfig
from app.frequency.dct import (
    FrequencyFingerprint,
    dct2,
    fingerprint,
    fingerprint_operator,
    fingerprint_pullback,
    idct2,
    pack_to_square,
    replace_low_frequency,
    unpack_from_square,
)

logger = logging.getLogger(__name__)

INJECTION_TOLERANCE = 1e-13


def anomaly_loss_and_grad(params: ParameterVector, template: FrequencyFingerprint):
    """Cosine distance between the model's fingerprint and ``template``."""
    coeffs = fingerprint(params).coeffs
    target = np.asarray(template.coeffs, dtype=np.float64)
    if coeffs.shape != target.shape:
        raise DimensionMismatchError(
            f"Template fingerprint has {target.shape[0]} coefficients, "
            f"model fingerprint {coeffs.shape[0]}"
        )
    norm, target_norm = np.linalg.norm(coeffs), np.linalg.norm(target)
    if not norm > 0 or not target_norm > 0:
        raise ZeroNormFingerprintError()

    cosine = coeffs @ target / (norm * target_norm)
    d_cosine = target / (norm * target_norm) - cosine * coeffs / (norm * norm)
    return 1.0 - cosine, -fingerprint_pullback(d_cosine, len(params))


def adaptive_frequency_train(
    global_model: ParameterVector,
    poisoned_data: LabeledDataset,
    benign_template_fp: FrequencyFingerprint,
    alpha,
    cfg: TrainingConfig,
) -> ParameterVector:
    """SGD on ``alpha * L_class + (1 - alpha) * L_ano``."""
    if not 0 < alpha <= 1:
        raise ConfigurationError(f"alpha must lie in (0, 1], got {alpha}")

    def gradient(params, features, labels):
        class_loss, class_grad = loss_and_grad(params, features, labels)
        if alpha == 1:
            return class_loss, class_grad
        ano_loss, ano_grad = anomaly_loss_and_grad(params, benign_template_fp)
        loss = alpha * class_loss + (1 - alpha) * ano_loss
        return loss, alpha * class_grad + (1 - alpha) * ano_grad

    return run_sgd(global_model, poisoned_data, cfg, gradient=gradient)


def benign_freq_injection_epoch(
    w: ParameterVector, benign_fp_source: ParameterVector
) -> ParameterVector:
    """Overwrite the low band of ``w``'s spectrum with the benign model's.

    When the parameter count is not a perfect square the padding cells are
    dropped on unpacking, which moves the low band. The remaining gap is
    closed with the minimum-norm correction over the real weights.
    """
    if not w.same_arch(benign_fp_source):
        raise DimensionMismatchError(
            "Injection source and model have different architectures."
        )
    merged = replace_low_frequency(
        dct2(pack_to_square(w)), dct2(pack_to_square(benign_fp_source))
    )
    values = unpack_from_square(idct2(merged), len(w))

    gap = fingerprint(benign_fp_source).coeffs - fingerprint(values).coeffs
    if np.linalg.norm(gap) > INJECTION_TOLERANCE:
        correction = lsqr(
            fingerprint_operator(len(w)),
            gap,
            atol=INJECTION_TOLERANCE,
            btol=INJECTION_TOLERANCE,
        )[0]
        values = values + correction
    return w.with_values(values)


def benign_injection_train(
    global_model: ParameterVector,
    poisoned_data: LabeledDataset,
    benign_fp_source: ParameterVector,
    cfg: TrainingConfig,
) -> ParameterVector:
    """Backdoor training with the benign low band restored before each epoch.

    The last epoch's training is submitted as is, so whatever the backdoor
    writes back into the low band in that epoch remains visible.
    """

    def inject(epoch, values):
        injected = benign_freq_injection_epoch(
            global_model.with_values(values), benign_fp_source
        )
        logger.debug(f"injected benign low band before epoch {epoch + 1}")
        return injected.values

    return run_sgd(global_model, poisoned_data, cfg, before_epoch=inject)

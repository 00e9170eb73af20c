import logging

import numpy as np

from app.core.utils import ConfigurationError, make_rng
from app.engine.training import run_sgd
from app.engine.types import (
    LabeledDataset,
    ModelArch,
    ParameterVector,
    TrainingConfig,
)

logger = logging.getLogger(__name__)


def random_update(arch: ModelArch, reference: ParameterVector, sigma, seed):
    if not sigma > 0:
        raise ConfigurationError("random update sigma must be positive")
    rng = make_rng(seed)
    noise = rng.normal(0.0, sigma, size=arch.param_count)
    return ParameterVector(values=reference.values + noise, arch=arch)


def ball_projection(center, radius):
    center = np.asarray(center, dtype=np.float64)

    def project(values):
        if radius == 0:
            return center.copy()
        offset = values - center
        norm = np.linalg.norm(offset)
        if norm <= radius:
            return values
        return center + offset * (radius / norm)

    return project


def pgd_untargeted(
    global_model: ParameterVector,
    data: LabeledDataset,
    cfg: TrainingConfig,
    tau,
) -> ParameterVector:
    """Ascend the training loss, staying within ``tau`` of the global model."""
    if tau < 0:
        raise ConfigurationError("tau must be non-negative")
    logger.debug(f"pgd ascent for {cfg.local_epochs} epochs within tau={tau}")
    return run_sgd(
        global_model,
        data,
        cfg,
        ascent=True,
        project=ball_projection(global_model.values, tau),
    )


def scale_update(malicious: ParameterVector, global_model: ParameterVector, gamma):
    if gamma < 1:
        raise ConfigurationError("gamma must be at least 1")
    if gamma == 1:
        return malicious
    values = global_model.values + gamma * (malicious.values - global_model.values)
    return malicious.with_values(values)


def concentrated_submission(template: ParameterVector, count, noise_sigma, seed):
    if count < 1 or noise_sigma < 0:
        raise ConfigurationError("count >= 1 and noise_sigma >= 0 required")
    if noise_sigma == 0:
        return [template.with_values(template.values.copy()) for _ in range(count)]
    rng = make_rng(seed)
    return [
        template.with_values(
            template.values + rng.normal(0.0, noise_sigma, size=len(template))
        )
        for _ in range(count)
    ]

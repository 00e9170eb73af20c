import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

from django.db import models

from app.core.utils import ConfigurationError, DimensionMismatchError
from app.engine.types import LabeledDataset

logger = logging.getLogger(__name__)


class AttackKind(models.TextChoices):
    LABEL_FLIP = "label_flip", "Label flipping"
    RANDOM_UPDATE = "random_update", "Random updates"
    PGD_UNTARGETED = "pgd_untargeted", "Optimized untargeted PGD"
    PIXEL_BACKDOOR = "pixel_backdoor", "Pixel-pattern backdoor"
    CONCENTRATED_BACKDOOR = "concentrated_backdoor", "Concentrated backdoor"
    ADAPTIVE_FREQUENCY = "adaptive_frequency", "Frequency-constrained loss"
    BENIGN_FREQ_INJECTION = "benign_freq_injection", "Benign frequency injection"


BACKDOOR_KINDS = frozenset(
    {
        AttackKind.PIXEL_BACKDOOR,
        AttackKind.CONCENTRATED_BACKDOOR,
        AttackKind.ADAPTIVE_FREQUENCY,
        AttackKind.BENIGN_FREQ_INJECTION,
    }
)


class AdaptiveMode(models.TextChoices):
    # Template trained on the attacker's own clean samples.
    UNKNOWN_BENIGN = "unknown_benign", "Unknown benign"
    # Template taken from a real benign client of the same round.
    KNOWN_BENIGN = "known_benign", "Known benign"


@dataclass(frozen=True)
class AttackConfig:
    kind: str
    pmr: float = 0.0
    pdr: float = 0.5
    target_label: int = 0
    # None selects the constrain-and-scale preset K / (K - k_A).
    scale_gamma: Optional[float] = 1.0
    alpha: float = 0.5
    tau: float = 1.0
    seed: int = 0
    noise_sigma: float = 0.0
    random_sigma: float = 1.0
    adaptive_mode: str = AdaptiveMode.UNKNOWN_BENIGN
    dynamic: bool = False

    def __post_init__(self):
        if self.kind not in AttackKind.values:
            raise ConfigurationError(f"Unknown attack {self.kind!r}")
        if not 0.0 <= self.pmr < 1.0:
            raise ConfigurationError(f"pmr must lie in [0, 1), got {self.pmr}")
        if not 0.0 <= self.pdr <= 1.0:
            raise ConfigurationError(f"pdr must lie in [0, 1], got {self.pdr}")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigurationError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.scale_gamma is not None and self.scale_gamma < 1.0:
            raise ConfigurationError("scale_gamma must be at least 1")
        if self.tau < 0 or self.noise_sigma < 0 or self.random_sigma <= 0:
            raise ConfigurationError("tau, noise_sigma >= 0 and random_sigma > 0")
        if self.pmr >= 0.5:
            logger.warning(
                f"pmr={self.pmr} breaks the honest-majority assumption; "
                "the filter is expected to fail"
            )

    @property
    def is_backdoor(self):
        return self.kind in BACKDOOR_KINDS

    def malicious_count(self, num_clients):
        return int(math.floor(self.pmr * num_clients + 1e-9))

    def gamma_for(self, num_clients):
        if self.scale_gamma is not None:
            return self.scale_gamma
        return num_clients / max(1, num_clients - self.malicious_count(num_clients))


@dataclass(frozen=True)
class TriggerSpec:
    pixel_indices: Tuple[int, ...]
    pixel_value: float

    def __post_init__(self):
        if not self.pixel_indices:
            raise ConfigurationError("A trigger needs at least one pixel.")
        object.__setattr__(
            self, "pixel_indices", tuple(int(i) for i in self.pixel_indices)
        )

    def check_fits(self, num_features):
        if min(self.pixel_indices) < 0 or max(self.pixel_indices) >= num_features:
            raise DimensionMismatchError(
                f"Trigger pixels {self.pixel_indices} exceed {num_features} inputs"
            )


def corner_trigger(dataset: LabeledDataset, pixels=4) -> TriggerSpec:
    """Bright square in the top-left corner of a row-major square image.

    Inputs that are not square images get the first ``pixels`` features.
    The brightness is the largest feature value in ``dataset``.
    """
    dim = dataset.num_features
    side, block = math.isqrt(dim), math.isqrt(pixels)
    if side * side == dim and block * block == pixels and block <= side:
        indices = [r * side + c for r in range(block) for c in range(block)]
    else:
        indices = list(range(min(pixels, dim)))
    return TriggerSpec(
        pixel_indices=tuple(indices), pixel_value=float(dataset.features.max())
    )


def apply_trigger(dataset: LabeledDataset, trigger: TriggerSpec) -> LabeledDataset:
    """Stamp the trigger on every row and keep the true labels."""
    trigger.check_fits(dataset.num_features)
    features = dataset.features.copy()
    features[:, list(trigger.pixel_indices)] = trigger.pixel_value
    return LabeledDataset(features=features, labels=dataset.labels.copy())


def poisoned_count(pdr, size):
    return min(size, math.ceil(pdr * size - 1e-9))

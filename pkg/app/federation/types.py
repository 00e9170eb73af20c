from dataclasses import asdict, dataclass, field, replace
from typing import List, Optional

from django.db import models

from app.attacks.types import AttackConfig
from app.clustering.hdbscan import HdbscanParams
from app.core.utils import ConfigurationError
from app.engine.types import ModelArch, TrainingConfig


class Defense(models.TextChoices):
    FREQFED = "freqfed", "Frequency-domain filtering"
    NONE = "none", "Plain mean"
    KRUM = "krum", "Krum"
    MEDIAN = "median", "Coordinate-wise median"
    TRIMMED_MEAN = "trimmed_mean", "Trimmed mean"
    FEDAVG_WEIGHTED = "fedavg_weighted", "Sample-weighted FedAvg"


class DatasetKind(models.TextChoices):
    BLOBS = "blobs", "Synthetic blobs"
    IDX = "idx", "IDX files"


class SweepAxis(models.TextChoices):
    PMR = "pmr", "Poisoned model rate"
    PDR = "pdr", "Poisoned data rate"
    IID_RATE = "iid_rate", "IID rate"


class ReportFormat(models.TextChoices):
    CSV = "csv", "CSV"
    JSON = "json", "JSON"


@dataclass(frozen=True)
class DatasetSpec:
    kind: str = DatasetKind.BLOBS
    images_path: Optional[str] = None
    labels_path: Optional[str] = None
    max_samples: int = 0
    blob_classes: int = 10
    blob_per_class: int = 200
    blob_dim: int = 16
    blob_spread: float = 0.3


@dataclass(frozen=True)
class FederationConfig:
    num_clients: int
    rounds: int
    arch: ModelArch
    training: TrainingConfig
    defense: str = Defense.FREQFED
    trim_beta: float = 0.1
    krum_f: int = 1
    hdbscan: HdbscanParams = field(default_factory=HdbscanParams)
    attack: Optional[AttackConfig] = None
    dataset: DatasetSpec = field(default_factory=DatasetSpec)
    iid_rate: float = 0.7
    holdout_fraction: float = 0.1
    pretrain_rounds: int = 0
    master_seed: int = 0
    workers: int = 1
    out_dir: str = "reports"
    format: str = ReportFormat.CSV
    record_timings: bool = False

    def __post_init__(self):
        if self.num_clients < 2:
            raise ConfigurationError("A federation needs at least two clients.")
        if self.rounds < 1:
            raise ConfigurationError("A federation needs at least one round.")

    @property
    def malicious_count(self):
        if self.attack is None:
            return 0
        return self.attack.malicious_count(self.num_clients)

    def evolve(self, **changes):
        return replace(self, **changes)


@dataclass
class RoundReport:
    round: int
    ma: float
    ba: float
    accepted: List[int]
    rejected: List[int]
    cluster_sizes: List[int]
    malicious: List[int]
    wall_time_ms: int
    flagged: bool = False
    injection_drift: float = -1.0

    @property
    def malicious_detected(self):
        return len(set(self.malicious) & set(self.rejected))

    @property
    def malicious_accepted(self):
        return len(set(self.malicious) & set(self.accepted))

    @property
    def tpr(self):
        if not self.malicious:
            return -1.0
        return self.malicious_detected / len(self.malicious)

    @property
    def tnr(self):
        benign = set(self.accepted + self.rejected) - set(self.malicious)
        if not benign:
            return -1.0
        return len(benign & set(self.accepted)) / len(benign)

    def as_row(self):
        """The eight report-file columns, in file order."""
        return {
            "round": self.round,
            "ma": self.ma,
            "ba": self.ba,
            "n_accepted": len(self.accepted),
            "n_rejected": len(self.rejected),
            "n_true_malicious_rejected": self.malicious_detected,
            "n_true_malicious_accepted": self.malicious_accepted,
            "wall_time_ms": self.wall_time_ms,
        }

    def as_dict(self):
        data = asdict(self)
        data.update(
            n_true_malicious_rejected=self.malicious_detected,
            n_true_malicious_accepted=self.malicious_accepted,
            tpr=self.tpr,
            tnr=self.tnr,
        )
        return data


REPORT_COLUMNS = [
    "round",
    "ma",
    "ba",
    "n_accepted",
    "n_rejected",
    "n_true_malicious_rejected",
    "n_true_malicious_accepted",
    "wall_time_ms",
]

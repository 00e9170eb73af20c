import logging
from pathlib import Path

import yaml
from django.conf import settings
from rest_framework import serializers

from app.attacks.types import AdaptiveMode, AttackConfig, AttackKind
from app.clustering.hdbscan import HdbscanParams
from app.core.utils import ConfigurationError, FreqFedError
from app.engine.types import Activation, ModelArch, TrainingConfig
from app.federation.types import (
    DatasetKind,
    DatasetSpec,
    Defense,
    FederationConfig,
    ReportFormat,
)

logger = logging.getLogger(__name__)

NO_ATTACK = "none"
AUTO_GAMMA = "auto"


def scale_gamma_validator(value):
    if str(value).strip().lower() == AUTO_GAMMA:
        return AUTO_GAMMA
    try:
        gamma = float(value)
    except (TypeError, ValueError):
        raise serializers.ValidationError(
            "Expected a number >= 1 or 'auto'.", code="invalid_gamma"
        )
    if gamma < 1:
        raise serializers.ValidationError(
            "scale_gamma must be at least 1.", code="invalid_gamma"
        )
    return gamma


class FederationConfigSerializer(serializers.Serializer):
    """Flat experiment document; every key mirrors a FederationConfig field."""

    num_clients = serializers.IntegerField(min_value=2, default=10)
    rounds = serializers.IntegerField(min_value=1, default=20)
    layer_dims = serializers.ListField(
        child=serializers.IntegerField(min_value=1),
        min_length=2,
        default=[784, 64, 10],
    )
    activation = serializers.ChoiceField(
        choices=Activation.choices, default=Activation.RELU
    )
    learning_rate = serializers.FloatField(min_value=0.0, default=0.1)
    local_epochs = serializers.IntegerField(min_value=1, default=2)
    batch_size = serializers.IntegerField(min_value=1, default=32)

    defense = serializers.ChoiceField(choices=Defense.choices, default=Defense.FREQFED)
    trim_beta = serializers.FloatField(min_value=0.0, default=0.1)
    krum_f = serializers.IntegerField(min_value=0, default=1)
    min_cluster_size = serializers.IntegerField(min_value=2, default=2)
    min_samples = serializers.IntegerField(min_value=1, default=1)

    attack = serializers.ChoiceField(
        choices=[(NO_ATTACK, "No attack")] + AttackKind.choices, default=NO_ATTACK
    )
    pmr = serializers.FloatField(min_value=0.0, max_value=0.9999, default=0.0)
    pdr = serializers.FloatField(min_value=0.0, max_value=1.0, default=0.5)
    target_label = serializers.IntegerField(min_value=0, default=0)
    scale_gamma = serializers.CharField(default="1.0")
    alpha = serializers.FloatField(min_value=0.0001, max_value=1.0, default=0.5)
    tau = serializers.FloatField(min_value=0.0, default=1.0)
    noise_sigma = serializers.FloatField(min_value=0.0, default=0.0)
    random_sigma = serializers.FloatField(min_value=1e-12, default=1.0)
    adaptive_mode = serializers.ChoiceField(
        choices=AdaptiveMode.choices, default=AdaptiveMode.UNKNOWN_BENIGN
    )
    dynamic_malicious = serializers.BooleanField(default=False)
    pretrain_rounds = serializers.IntegerField(min_value=0, default=0)

    dataset = serializers.ChoiceField(
        choices=DatasetKind.choices, default=DatasetKind.BLOBS
    )
    images_path = serializers.CharField(required=False, allow_null=True, default=None)
    labels_path = serializers.CharField(required=False, allow_null=True, default=None)
    max_samples = serializers.IntegerField(min_value=0, default=0)
    blob_classes = serializers.IntegerField(min_value=2, default=10)
    blob_per_class = serializers.IntegerField(min_value=1, default=200)
    blob_dim = serializers.IntegerField(min_value=1, default=16)
    blob_spread = serializers.FloatField(min_value=0.0, default=0.3)
    holdout_fraction = serializers.FloatField(
        min_value=0.0001, max_value=0.9, default=settings.FREQFED_HOLDOUT_FRACTION
    )
    iid_rate = serializers.FloatField(min_value=0.0, max_value=1.0, default=0.7)

    master_seed = serializers.IntegerField(min_value=0, max_value=2**64 - 1, default=0)
    workers = serializers.IntegerField(min_value=1, default=settings.FREQFED_WORKERS)
    out_dir = serializers.CharField(default=settings.FREQFED_OUT_DIR)
    format = serializers.ChoiceField(
        choices=ReportFormat.choices, default=ReportFormat.CSV
    )
    record_timings = serializers.BooleanField(default=False)

    def to_internal_value(self, data):
        unknown = sorted(set(data) - set(self.fields))
        if unknown:
            raise serializers.ValidationError(
                {key: ["Unknown configuration key."] for key in unknown},
                code="unknown_key",
            )
        return super().to_internal_value(data)

    def validate_scale_gamma(self, value):
        return scale_gamma_validator(value)

    def validate_trim_beta(self, value):
        if value >= 0.5:
            raise serializers.ValidationError(
                "trim_beta must be below 0.5.", code="invalid_beta"
            )
        return value

    def validate(self, attrs):
        dims = attrs["layer_dims"]
        if attrs["dataset"] == DatasetKind.IDX:
            missing = [
                key for key in ("images_path", "labels_path") if not attrs.get(key)
            ]
            if missing:
                raise serializers.ValidationError(
                    {key: ["Required for idx datasets."] for key in missing}
                )
        else:
            if attrs["blob_dim"] != dims[0]:
                raise serializers.ValidationError(
                    {"layer_dims": ["Input dim must equal blob_dim."]}
                )
            if attrs["blob_classes"] > dims[-1]:
                raise serializers.ValidationError(
                    {"layer_dims": ["Output dim must cover blob_classes."]}
                )
        if attrs["target_label"] >= dims[-1]:
            raise serializers.ValidationError(
                {"target_label": ["Target label outside the model's classes."]}
            )
        if attrs["min_samples"] > attrs["num_clients"] - 1:
            raise serializers.ValidationError(
                {"min_samples": ["Must be below num_clients."]}
            )
        if attrs["min_cluster_size"] > attrs["num_clients"]:
            raise serializers.ValidationError(
                {"min_cluster_size": ["Cannot exceed num_clients."]}
            )
        if (
            attrs["defense"] == Defense.KRUM
            and attrs["num_clients"] < 2 * attrs["krum_f"] + 3
        ):
            raise serializers.ValidationError(
                {"krum_f": ["Krum needs num_clients >= 2 * krum_f + 3."]}
            )
        return attrs

    def create(self, validated_data):
        data = validated_data
        attack = None
        if data["attack"] != NO_ATTACK:
            attack = AttackConfig(
                kind=data["attack"],
                pmr=data["pmr"],
                pdr=data["pdr"],
                target_label=data["target_label"],
                scale_gamma=None
                if data["scale_gamma"] == AUTO_GAMMA
                else data["scale_gamma"],
                alpha=data["alpha"],
                tau=data["tau"],
                seed=data["master_seed"],
                noise_sigma=data["noise_sigma"],
                random_sigma=data["random_sigma"],
                adaptive_mode=data["adaptive_mode"],
                dynamic=data["dynamic_malicious"],
            )
        return FederationConfig(
            num_clients=data["num_clients"],
            rounds=data["rounds"],
            arch=ModelArch(
                layer_dims=tuple(data["layer_dims"]), activation=data["activation"]
            ),
            training=TrainingConfig(
                learning_rate=data["learning_rate"],
                local_epochs=data["local_epochs"],
                batch_size=data["batch_size"],
                seed=data["master_seed"],
            ),
            defense=data["defense"],
            trim_beta=data["trim_beta"],
            krum_f=data["krum_f"],
            hdbscan=HdbscanParams(
                min_cluster_size=data["min_cluster_size"],
                min_samples=data["min_samples"],
            ),
            attack=attack,
            dataset=DatasetSpec(
                kind=data["dataset"],
                images_path=data.get("images_path"),
                labels_path=data.get("labels_path"),
                max_samples=data["max_samples"],
                blob_classes=data["blob_classes"],
                blob_per_class=data["blob_per_class"],
                blob_dim=data["blob_dim"],
                blob_spread=data["blob_spread"],
            ),
            iid_rate=data["iid_rate"],
            holdout_fraction=data["holdout_fraction"],
            pretrain_rounds=data["pretrain_rounds"],
            master_seed=data["master_seed"],
            workers=data["workers"],
            out_dir=data["out_dir"],
            format=data["format"],
            record_timings=data["record_timings"],
        )


def read_config_file(path):
    try:
        document = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise ConfigurationError(f"Cannot read config {path}: {exc}")
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"Config {path} is not valid YAML: {exc}")
    if document is None:
        return {}
    if not isinstance(document, dict):
        raise ConfigurationError(f"Config {path} must be a flat key-value mapping.")
    return document


def build_config(raw, **overrides) -> FederationConfig:
    data = dict(raw)
    data.update({k: v for k, v in overrides.items() if v is not None})
    serializer = FederationConfigSerializer(data=data)
    if not serializer.is_valid():
        raise ConfigurationError("Invalid configuration.", errors=serializer.errors)
    try:
        return serializer.save()
    except FreqFedError as exc:
        raise ConfigurationError(str(exc))


def load_config(path, **overrides) -> FederationConfig:
    cfg = build_config(read_config_file(path), **overrides)
    logger.info(f"loaded config {path} (master_seed={cfg.master_seed})")
    return cfg

"""The server loop: prepare a federation, then run it round by round."""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np
from django.conf import settings

from app.aggregation.aggregators import (
    ClientContribution,
    coordinate_median,
    fedavg_weighted,
    krum_select,
    mean_accepted,
    trimmed_mean,
)
from app.attacks.types import TriggerSpec, apply_trigger, corner_trigger
from app.clustering.filtering import cluster_models, select_accepted
from app.core.utils import (
    EmptySelectionError,
    RoundFailedError,
    derive_seed,
    make_rng,
)
from app.data.idx import load_idx
from app.data.partition import holdout_split, iid_partition
from app.data.synthetic import make_blobs
from app.engine.metrics import evaluate_ba, evaluate_ma
from app.engine.training import init_model
from app.engine.types import LabeledDataset, ParameterVector
from app.federation.clients import (
    RoundContext,
    SeedTag,
    benign_update,
    malicious_updates,
)
from app.federation.types import (
    DatasetKind,
    DatasetSpec,
    Defense,
    FederationConfig,
    RoundReport,
)
from app.frequency.dct import fingerprint

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Federation:
    """Everything fixed for the lifetime of one run."""

    cfg: FederationConfig
    client_data: List[LabeledDataset]
    test: LabeledDataset
    triggered_test: Optional[LabeledDataset]
    trigger: Optional[TriggerSpec]
    initial_model: ParameterVector


@dataclass(frozen=True, eq=False)
class FederationState:
    round: int
    global_model: ParameterVector


@dataclass(frozen=True, eq=False)
class DefenseOutcome:
    global_model: ParameterVector
    accepted: List[int]
    cluster_sizes: List[int]
    flagged: bool = False


def load_source(spec: DatasetSpec, master_seed) -> LabeledDataset:
    if spec.kind == DatasetKind.IDX:
        source = load_idx(spec.images_path, spec.labels_path)
    else:
        source = make_blobs(
            spec.blob_classes,
            spec.blob_per_class,
            spec.blob_dim,
            spec.blob_spread,
            derive_seed(master_seed, SeedTag.DATA),
        )
    if spec.max_samples and spec.max_samples < len(source):
        rng = make_rng(derive_seed(master_seed, SeedTag.DATA, 1))
        keep = rng.choice(len(source), size=spec.max_samples, replace=False)
        source = source.subset(np.sort(keep))
    return source


def prepare_federation(cfg: FederationConfig) -> Federation:
    seed = cfg.master_seed
    source = load_source(cfg.dataset, seed)
    source.check_compatible(cfg.arch)

    train, test = holdout_split(
        source, cfg.holdout_fraction, derive_seed(seed, SeedTag.SPLIT)
    )
    plan = iid_partition(
        train, cfg.num_clients, cfg.iid_rate, derive_seed(seed, SeedTag.PARTITION)
    )
    client_data = [plan.client_dataset(train, c) for c in range(cfg.num_clients)]

    trigger = triggered_test = None
    if cfg.attack is not None and cfg.attack.is_backdoor:
        trigger = corner_trigger(source, settings.FREQFED_TRIGGER_PIXELS)
        triggered_test = apply_trigger(test, trigger)
        if (
            cfg.dataset.kind == DatasetKind.BLOBS
            and cfg.attack.target_label % cfg.dataset.blob_dim in trigger.pixel_indices
        ):
            logger.warning(
                f"trigger pixels {trigger.pixel_indices} cover the mean axis of "
                f"target class {cfg.attack.target_label}; clean models will "
                "already send triggered samples there"
            )

    model = init_model(cfg.arch, derive_seed(seed, SeedTag.INIT))
    model = pretrain(cfg, client_data, model)

    logger.info(
        f"prepared {cfg.num_clients} clients with {plan.sizes()[0]} samples "
        f"each, {len(test)} held out"
    )
    return Federation(
        cfg=cfg,
        client_data=client_data,
        test=test,
        triggered_test=triggered_test,
        trigger=trigger,
        initial_model=model,
    )


def pretrain(cfg: FederationConfig, client_data, model):
    """Benign sample-weighted FedAvg rounds that precede the reported run."""
    for index in range(cfg.pretrain_rounds):
        ctx = RoundContext(
            master_seed=derive_seed(cfg.master_seed, SeedTag.PRETRAIN),
            round=index,
            global_model=model,
            client_data=client_data,
            training=cfg.training,
        )
        model = fedavg_weighted(
            [
                ClientContribution(
                    params=benign_update(ctx, c), sample_count=len(data)
                )
                for c, data in enumerate(client_data)
            ]
        )
        logger.debug(f"pretrain round {index + 1}/{cfg.pretrain_rounds} done")
    return model


def malicious_clients(cfg: FederationConfig, round_index) -> List[int]:
    """Seeded malicious indices; fixed for the run unless the attack is dynamic."""
    count = cfg.malicious_count
    if not count:
        return []
    key = round_index if cfg.attack.dynamic else 0
    rng = make_rng(derive_seed(cfg.master_seed, SeedTag.MALICIOUS, key))
    return sorted(int(i) for i in rng.permutation(cfg.num_clients)[:count])


def _freqfed(cfg, models, client_data, previous):
    assignment = cluster_models([fingerprint(m) for m in models], cfg.hdbscan)
    sizes = [size for _, size in sorted(assignment.cluster_sizes.items())]
    try:
        accepted = select_accepted(assignment)
    except EmptySelectionError:
        return DefenseOutcome(
            global_model=previous, accepted=[], cluster_sizes=sizes, flagged=True
        )
    return DefenseOutcome(
        global_model=mean_accepted(models, accepted),
        accepted=accepted,
        cluster_sizes=sizes,
    )


def _plain_mean(cfg, models, client_data, previous):
    everyone = list(range(len(models)))
    return DefenseOutcome(mean_accepted(models, everyone), everyone, [])


def _krum(cfg, models, client_data, previous):
    chosen = krum_select(models, cfg.krum_f)
    return DefenseOutcome(models[chosen], [chosen], [])


def _median(cfg, models, client_data, previous):
    return DefenseOutcome(coordinate_median(models), list(range(len(models))), [])


def _trimmed_mean(cfg, models, client_data, previous):
    return DefenseOutcome(
        trimmed_mean(models, cfg.trim_beta), list(range(len(models))), []
    )


def _fedavg_weighted(cfg, models, client_data, previous):
    contribs = [
        ClientContribution(params=m, sample_count=len(d))
        for m, d in zip(models, client_data)
    ]
    return DefenseOutcome(fedavg_weighted(contribs), list(range(len(models))), [])


DEFENSES = {
    Defense.FREQFED: _freqfed,
    Defense.NONE: _plain_mean,
    Defense.KRUM: _krum,
    Defense.MEDIAN: _median,
    Defense.TRIMMED_MEAN: _trimmed_mean,
    Defense.FEDAVG_WEIGHTED: _fedavg_weighted,
}


def run_round(fed: Federation, state: FederationState, mapper: Callable = map):
    """One server iteration; returns ``(report, next_state)``."""
    cfg = fed.cfg
    started = time.perf_counter()
    round_index = state.round
    malicious = malicious_clients(cfg, round_index)
    benign = [c for c in range(cfg.num_clients) if c not in set(malicious)]

    ctx = RoundContext(
        master_seed=cfg.master_seed,
        round=round_index,
        global_model=state.global_model,
        client_data=fed.client_data,
        training=cfg.training,
        attack=cfg.attack,
        trigger=fed.trigger,
        mapper=mapper,
    )
    benign_models = dict(zip(benign, mapper(lambda c: benign_update(ctx, c), benign)))
    submissions = malicious_updates(ctx, malicious, benign_models)
    submitted = {**benign_models, **submissions.models}
    models = [submitted[c] for c in range(cfg.num_clients)]

    outcome = DEFENSES[Defense(cfg.defense)](
        cfg, models, fed.client_data, state.global_model
    )
    if outcome.flagged:
        logger.warning(
            f"round {round_index}: every model was labelled noise, "
            "keeping the previous global model"
        )

    ma = evaluate_ma(outcome.global_model, fed.test)
    ba = -1.0
    if fed.triggered_test is not None:
        ba = evaluate_ba(
            outcome.global_model, fed.triggered_test, cfg.attack.target_label
        )

    elapsed = int(round((time.perf_counter() - started) * 1000))
    accepted = set(outcome.accepted)
    report = RoundReport(
        round=round_index,
        ma=ma,
        ba=ba,
        accepted=sorted(accepted),
        rejected=[c for c in range(cfg.num_clients) if c not in accepted],
        cluster_sizes=outcome.cluster_sizes,
        malicious=malicious,
        wall_time_ms=elapsed if cfg.record_timings else 0,
        flagged=outcome.flagged,
        injection_drift=submissions.injection_drift,
    )
    logger.info(
        f"round {round_index}/{cfg.rounds}: ma={ma:.4f} ba={ba:.4f} "
        f"accepted={len(report.accepted)} rejected={len(report.rejected)} "
        f"malicious_rejected={report.malicious_detected}/{len(malicious)} "
        f"in {elapsed} ms"
    )
    return report, FederationState(
        round=round_index + 1, global_model=outcome.global_model
    )


@contextmanager
def client_mapper(workers):
    """Order-preserving map over client indices, threaded when ``workers > 1``."""
    if workers <= 1:
        yield map
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        yield pool.map


def run_federation(cfg: FederationConfig, on_report=None) -> List[RoundReport]:
    """Run all rounds; ``on_report`` sees each report as soon as it exists."""
    fed = prepare_federation(cfg)
    state = FederationState(round=1, global_model=fed.initial_model)
    reports = []
    with client_mapper(cfg.workers) as mapper:
        while state.round <= cfg.rounds:
            try:
                report, state = run_round(fed, state, mapper)
            except Exception as exc:
                raise RoundFailedError(state.round, exc) from exc
            reports.append(report)
            if on_report is not None:
                on_report(report)
    return reports

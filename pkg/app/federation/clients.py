"""What each client submits in a round.

Benign clients run plain local SGD from the global model. Malicious clients
follow one behaviour per attack kind; a behaviour receives the whole
malicious cohort at once because some attacks coordinate their members.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import IntEnum
from typing import Callable, Dict, List, Optional

import numpy as np

from app.attacks.adaptive import adaptive_frequency_train, benign_injection_train
from app.attacks.data_poisoning import (
    clean_portion,
    label_flip,
    pixel_backdoor_poison,
)
from app.attacks.model_poisoning import (
    concentrated_submission,
    pgd_untargeted,
    random_update,
    scale_update,
)
from app.attacks.types import AdaptiveMode, AttackConfig, AttackKind, TriggerSpec
from app.clustering.distances import cosine_distance_matrix
from app.core.utils import ConfigurationError, derive_seed
from app.engine.training import client_update
from app.engine.types import LabeledDataset, ParameterVector, TrainingConfig
from app.frequency.dct import fingerprint

logger = logging.getLogger(__name__)


class SeedTag(IntEnum):
    INIT = 1
    SPLIT = 2
    PARTITION = 3
    MALICIOUS = 4
    TRAIN = 5
    ATTACK = 6
    DATA = 7
    PRETRAIN = 8


@dataclass(frozen=True, eq=False)
class RoundContext:
    master_seed: int
    round: int
    global_model: ParameterVector
    client_data: List[LabeledDataset]
    training: TrainingConfig
    attack: Optional[AttackConfig] = None
    trigger: Optional[TriggerSpec] = None
    mapper: Callable = map

    @property
    def num_clients(self):
        return len(self.client_data)

    def training_for(self, client):
        return self.training.with_seed(
            derive_seed(self.master_seed, SeedTag.TRAIN, self.round, client)
        )

    def attack_seed(self, client):
        return derive_seed(
            self.master_seed, SeedTag.ATTACK, self.attack.seed, self.round, client
        )


@dataclass
class MaliciousSubmissions:
    models: Dict[int, ParameterVector]
    injection_drift: float = -1.0


def benign_update(ctx: RoundContext, client) -> ParameterVector:
    return client_update(
        ctx.global_model, ctx.client_data[client], ctx.training_for(client)
    )


def fingerprint_drift(model: ParameterVector, template: ParameterVector):
    """Cosine distance between the two models' fingerprints."""
    pair = [fingerprint(model), fingerprint(template)]
    return float(cosine_distance_matrix(pair)[0, 1])


class ClientBehaviour(ABC):
    def submit_all(self, ctx: RoundContext, clients, benign_models):
        models = dict(
            zip(
                clients,
                ctx.mapper(lambda c: self.submit(ctx, c, benign_models), clients),
            )
        )
        return MaliciousSubmissions(models=models)

    @abstractmethod
    def submit(self, ctx: RoundContext, client, benign_models) -> ParameterVector:
        pass

    def scaled(self, ctx: RoundContext, model):
        gamma = ctx.attack.gamma_for(ctx.num_clients)
        return scale_update(model, ctx.global_model, gamma)

    def poisoned(self, ctx: RoundContext, client):
        return pixel_backdoor_poison(
            ctx.client_data[client],
            ctx.trigger,
            ctx.attack.target_label,
            ctx.attack.pdr,
            ctx.attack_seed(client),
        )


class LabelFlipBehaviour(ClientBehaviour):
    def submit(self, ctx, client, benign_models):
        flipped = label_flip(
            ctx.client_data[client],
            ctx.attack.pdr,
            ctx.global_model.arch.num_classes,
            ctx.attack_seed(client),
        )
        model = client_update(ctx.global_model, flipped, ctx.training_for(client))
        return self.scaled(ctx, model)


class RandomUpdateBehaviour(ClientBehaviour):
    def submit(self, ctx, client, benign_models):
        return random_update(
            ctx.global_model.arch,
            ctx.global_model,
            ctx.attack.random_sigma,
            ctx.attack_seed(client),
        )


class PgdBehaviour(ClientBehaviour):
    def submit(self, ctx, client, benign_models):
        return pgd_untargeted(
            ctx.global_model,
            ctx.client_data[client],
            ctx.training_for(client),
            ctx.attack.tau,
        )


class PixelBackdoorBehaviour(ClientBehaviour):
    def submit(self, ctx, client, benign_models):
        model = client_update(
            ctx.global_model, self.poisoned(ctx, client), ctx.training_for(client)
        )
        return self.scaled(ctx, model)


class ConcentratedBehaviour(ClientBehaviour):
    """One backdoored model shared by the whole cohort, plus optional noise."""

    def submit_all(self, ctx, clients, benign_models):
        leader = clients[0]
        template = self.submit(ctx, leader, benign_models)
        copies = concentrated_submission(
            template, len(clients), ctx.attack.noise_sigma, ctx.attack_seed(leader)
        )
        return MaliciousSubmissions(models=dict(zip(clients, copies)))

    def submit(self, ctx, client, benign_models):
        model = client_update(
            ctx.global_model, self.poisoned(ctx, client), ctx.training_for(client)
        )
        return self.scaled(ctx, model)


class _TemplateBehaviour(ClientBehaviour):
    """Attacks that steer towards the fingerprint of a benign-looking model."""

    def template(self, ctx, client, benign_models) -> ParameterVector:
        if ctx.attack.adaptive_mode == AdaptiveMode.KNOWN_BENIGN:
            if not benign_models:
                raise ConfigurationError(
                    "known_benign mode needs at least one benign client"
                )
            return benign_models[min(benign_models)]
        data = ctx.client_data[client]
        clean = clean_portion(data, ctx.attack.pdr, ctx.attack_seed(client))
        if not len(clean):
            clean = data
        return client_update(ctx.global_model, clean, ctx.training_for(client))

    def submit_all(self, ctx, clients, benign_models):
        templates = dict(
            zip(
                clients,
                ctx.mapper(lambda c: self.template(ctx, c, benign_models), clients),
            )
        )
        models = dict(
            zip(
                clients,
                ctx.mapper(lambda c: self.train(ctx, c, templates[c]), clients),
            )
        )
        drift = float(
            np.mean(
                [fingerprint_drift(models[c], templates[c]) for c in clients]
            )
        )
        logger.debug(f"round {ctx.round}: fingerprint drift {drift:.5f}")
        return MaliciousSubmissions(models=models, injection_drift=drift)

    def submit(self, ctx, client, benign_models):
        template = self.template(ctx, client, benign_models)
        return self.train(ctx, client, template)

    @abstractmethod
    def train(self, ctx, client, template) -> ParameterVector:
        pass


class AdaptiveFrequencyBehaviour(_TemplateBehaviour):
    def train(self, ctx, client, template):
        model = adaptive_frequency_train(
            ctx.global_model,
            self.poisoned(ctx, client),
            fingerprint(template),
            ctx.attack.alpha,
            ctx.training_for(client),
        )
        return self.scaled(ctx, model)


class BenignInjectionBehaviour(_TemplateBehaviour):
    def train(self, ctx, client, template):
        model = benign_injection_train(
            ctx.global_model,
            self.poisoned(ctx, client),
            template,
            ctx.training_for(client),
        )
        return self.scaled(ctx, model)


BEHAVIOURS = {
    AttackKind.LABEL_FLIP: LabelFlipBehaviour(),
    AttackKind.RANDOM_UPDATE: RandomUpdateBehaviour(),
    AttackKind.PGD_UNTARGETED: PgdBehaviour(),
    AttackKind.PIXEL_BACKDOOR: PixelBackdoorBehaviour(),
    AttackKind.CONCENTRATED_BACKDOOR: ConcentratedBehaviour(),
    AttackKind.ADAPTIVE_FREQUENCY: AdaptiveFrequencyBehaviour(),
    AttackKind.BENIGN_FREQ_INJECTION: BenignInjectionBehaviour(),
}


def malicious_updates(ctx: RoundContext, clients, benign_models):
    """Submissions of ``clients`` under ``ctx.attack``, keyed by client index."""
    if not clients:
        return MaliciousSubmissions(models={})
    behaviour = BEHAVIOURS[AttackKind(ctx.attack.kind)]
    logger.debug(
        f"round {ctx.round}: {len(clients)} malicious clients run "
        f"{ctx.attack.kind} (pdr={ctx.attack.pdr})"
    )
    return behaviour.submit_all(ctx, list(clients), benign_models)

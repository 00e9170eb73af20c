import logging
from dataclasses import dataclass
from typing import List

import numpy as np

from app.core.utils import ConfigurationError, DataFormatError, make_rng
from app.engine.types import LabeledDataset

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PartitionPlan:
    client_indices: List[np.ndarray]
    iid_rate: float
    num_clients: int

    def client_dataset(self, source: LabeledDataset, client) -> LabeledDataset:
        return source.subset(self.client_indices[client])

    def sizes(self):
        return [len(indices) for indices in self.client_indices]


def _label_share(size, iid_rate):
    return int(round((1.0 - iid_rate) * size))


def _client_size(pools, groups, total, num_clients, iid_rate):
    """Largest equal per-client size every label group can still feed."""
    demand = {label: groups.count(label) for label in set(groups)}
    for size in range(total // num_clients, 0, -1):
        share = _label_share(size, iid_rate)
        if all(n * share <= len(pools[label]) for label, n in demand.items()):
            return size
    raise DataFormatError("The source is too small for this partition.")


def iid_partition(source: LabeledDataset, num_clients, iid_rate, seed):
    """Split ``source`` into disjoint client shards with a given IID rate.

    Client ``i`` is tied to label group ``i % C``. A ``1 - iid_rate`` share
    of its samples comes from that label only and the rest is drawn
    uniformly from what is left of the whole source.
    """
    if num_clients < 1:
        raise ConfigurationError("A partition needs at least one client.")
    if not 0.0 <= iid_rate <= 1.0:
        raise ConfigurationError(f"iid_rate must lie in [0, 1], got {iid_rate}")
    if len(source) < num_clients:
        raise DataFormatError(
            f"{len(source)} samples cannot feed {num_clients} clients."
        )

    rng = make_rng(seed)
    num_classes = int(source.labels.max()) + 1
    groups = [client % num_classes for client in range(num_clients)]
    pools = {
        label: rng.permutation(np.flatnonzero(source.labels == label))
        for label in range(num_classes)
    }
    for label in set(groups):
        if not len(pools[label]):
            raise DataFormatError(f"Label group {label} is empty in the source.")

    size = _client_size(pools, groups, len(source), num_clients, iid_rate)
    share = _label_share(size, iid_rate)

    taken = np.zeros(len(source), dtype=bool)
    label_parts = []
    cursor = {label: 0 for label in pools}
    for label in groups:
        start = cursor[label]
        part = pools[label][start : start + share]
        cursor[label] = start + share
        taken[part] = True
        label_parts.append(part)

    remaining = rng.permutation(np.flatnonzero(~taken))
    client_indices = []
    offset = 0
    for part in label_parts:
        extra = remaining[offset : offset + size - share]
        offset += size - share
        client_indices.append(np.sort(np.concatenate([part, extra])))

    logger.debug(
        f"partitioned {len(source)} samples into {num_clients} clients of "
        f"{size} ({share} label-bound) at iid_rate={iid_rate}"
    )
    return PartitionPlan(
        client_indices=client_indices, iid_rate=iid_rate, num_clients=num_clients
    )


def holdout_split(source: LabeledDataset, fraction, seed):
    """Return ``(train, held_out)``; the held-out rows never reach clients."""
    rng = make_rng(seed)
    order = rng.permutation(len(source))
    cut = int(round(fraction * len(source)))
    return source.subset(np.sort(order[cut:])), source.subset(np.sort(order[:cut]))

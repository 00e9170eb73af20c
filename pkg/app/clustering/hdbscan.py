"""HDBSCAN over a precomputed distance matrix.

The pipeline is the textbook one: core distances, mutual reachability,
Prim's minimum spanning tree, single-linkage hierarchy, condensed tree
under ``min_cluster_size`` and excess-of-mass cluster selection.

Merges that happen at exactly the same distance are condensed as one
multi-way split, so the resulting partition does not depend on how ties
between equal edges were broken while building the tree.

This departs from scikit-learn and the hdbscan package, which condense
equal-height merges one binary merge at a time. At ``min_samples=1`` they
agree on inputs without repeated distances. With ``min_samples >= 2``
mutual-reachability ties are common, and a point that joins at exactly its
own core distance can come out as noise here while those libraries keep it
as a member.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from app.core.utils import ConfigurationError, InsufficientModelsError

logger = logging.getLogger(__name__)

NOISE = -1


@dataclass(frozen=True)
class HdbscanParams:
    min_cluster_size: int = 2
    min_samples: int = 1

    def __post_init__(self):
        if self.min_cluster_size < 2:
            raise ConfigurationError("min_cluster_size must be at least 2")
        if self.min_samples < 1:
            raise ConfigurationError("min_samples must be at least 1")


@dataclass(frozen=True, eq=False)
class ClusterAssignment:
    labels: np.ndarray
    cluster_sizes: Dict[int, int]

    def __len__(self):
        return self.labels.shape[0]

    @property
    def noise(self):
        return [int(i) for i in np.flatnonzero(self.labels == NOISE)]

    def partition(self):
        """Clusters as a set of frozensets of indices, noise excluded."""
        return {
            frozenset(int(i) for i in np.flatnonzero(self.labels == label))
            for label in self.cluster_sizes
        }


@dataclass
class _Cluster:
    id: int
    parent: int
    birth: float
    fallen: List[tuple] = field(default_factory=list)
    children: List[int] = field(default_factory=list)
    split_lambda: float = 0.0
    split_size: int = 0

    @property
    def stability(self):
        total = sum(_excess(lam, self.birth) for _, lam in self.fallen)
        if self.split_size:
            total += self.split_size * _excess(self.split_lambda, self.birth)
        return total


def _lambda(distance):
    return 1.0 / distance if distance > 0 else np.inf


def _excess(lam, birth):
    if lam == birth:
        return 0.0
    return lam - birth


def core_distances(distances, min_samples):
    """Distance from each point to its ``min_samples``-th nearest other point."""
    others = np.array(distances, dtype=np.float64, copy=True)
    np.fill_diagonal(others, np.inf)
    return np.sort(others, axis=1)[:, min_samples - 1]


def mutual_reachability(distances, core):
    reach = np.maximum(distances, np.maximum.outer(core, core))
    np.fill_diagonal(reach, 0.0)
    return reach


def minimum_spanning_tree(graph):
    """Prim's algorithm on a dense symmetric graph.

    Returns ``K - 1`` edges ``(i, j, weight)`` with ``i < j``. Among equal
    weights the lexicographically smallest ``(i, j)`` edge wins.
    """
    k = graph.shape[0]
    in_tree = np.zeros(k, dtype=bool)
    best_weight = np.full(k, np.inf)
    best_parent = np.full(k, -1, dtype=np.int64)

    in_tree[0] = True
    best_weight[:] = graph[0]
    best_parent[:] = 0

    edges = []
    for _ in range(k - 1):
        candidate = None
        for v in np.flatnonzero(~in_tree):
            key = (
                best_weight[v],
                min(best_parent[v], v),
                max(best_parent[v], v),
            )
            if candidate is None or key < candidate[0]:
                candidate = (key, v)
        (weight, i, j), v = candidate
        edges.append((int(i), int(j), float(weight)))
        in_tree[v] = True

        for u in np.flatnonzero(~in_tree):
            pair = (min(u, v), max(u, v))
            current = (min(best_parent[u], u), max(best_parent[u], u))
            if graph[v, u] < best_weight[u] or (
                graph[v, u] == best_weight[u] and pair < current
            ):
                best_weight[u] = graph[v, u]
                best_parent[u] = v
    return edges


def single_linkage(edges, k):
    """Scipy-style linkage rows ``(left, right, distance, size)``.

    Leaves are ``0..k-1``; the merge in row ``r`` creates node ``k + r``.
    """
    ordered = sorted(edges, key=lambda e: (e[2], e[0], e[1]))
    parent = list(range(2 * k - 1))
    size = [1] * k + [0] * (k - 1)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    linkage = np.zeros((k - 1, 4))
    for row, (i, j, weight) in enumerate(ordered):
        left, right = find(i), find(j)
        node = k + row
        parent[left] = parent[right] = node
        size[node] = size[left] + size[right]
        linkage[row] = (left, right, weight, size[node])
    return linkage


class _Hierarchy:
    def __init__(self, linkage, k):
        self.k = k
        self.left = linkage[:, 0].astype(np.int64)
        self.right = linkage[:, 1].astype(np.int64)
        self.height = linkage[:, 2]
        self.sizes = linkage[:, 3].astype(np.int64)

    def size(self, node):
        return 1 if node < self.k else int(self.sizes[node - self.k])

    def distance(self, node):
        return self.height[node - self.k]

    def leaves(self, node):
        out, stack = [], [node]
        while stack:
            current = stack.pop()
            if current < self.k:
                out.append(int(current))
            else:
                stack.append(self.right[current - self.k])
                stack.append(self.left[current - self.k])
        return out

    def parts_at(self, node):
        """Children of ``node`` with same-height merges flattened away."""
        level = self.distance(node)
        parts, stack = [], [node]
        while stack:
            current = stack.pop()
            if current >= self.k and (
                current == node or self.distance(current) == level
            ):
                stack.append(self.right[current - self.k])
                stack.append(self.left[current - self.k])
            else:
                parts.append(int(current))
        return parts


def condense_tree(linkage, k, min_cluster_size) -> List[_Cluster]:
    tree = _Hierarchy(linkage, k)
    clusters = [_Cluster(id=0, parent=-1, birth=0.0)]
    pending = [(2 * k - 2, 0)]

    while pending:
        node, cluster_id = pending.pop()
        cluster = clusters[cluster_id]
        while True:
            if node < k:
                cluster.fallen.append((node, np.inf))
                break
            lam = _lambda(tree.distance(node))
            parts = tree.parts_at(node)
            big = [p for p in parts if tree.size(p) >= min_cluster_size]
            for part in parts:
                if tree.size(part) < min_cluster_size:
                    cluster.fallen.extend((p, lam) for p in tree.leaves(part))

            if len(big) >= 2:
                cluster.split_lambda = lam
                for part in big:
                    child = _Cluster(id=len(clusters), parent=cluster_id, birth=lam)
                    clusters.append(child)
                    cluster.children.append(child.id)
                    cluster.split_size += tree.size(part)
                    pending.append((part, child.id))
                break
            if len(big) == 1:
                node = big[0]
                continue
            break
    return clusters


def select_clusters(clusters: List[_Cluster]):
    """Excess-of-mass selection; returns selected cluster ids in order.

    The root takes part only when it never splits, in which case it is the
    one cluster.
    """
    selected = {}
    propagated = {}
    for cluster in reversed(clusters):
        if not cluster.children:
            selected[cluster.id] = True
            propagated[cluster.id] = cluster.stability
            continue
        children_total = sum(propagated[c] for c in cluster.children)
        if cluster.id == 0:
            selected[0] = False
            continue
        own = cluster.stability
        if children_total > own:
            selected[cluster.id] = False
            propagated[cluster.id] = children_total
        else:
            selected[cluster.id] = True
            propagated[cluster.id] = own
            for descendant in _descendants(clusters, cluster.id):
                selected[descendant] = False
    return [c.id for c in clusters if selected[c.id]]


def _descendants(clusters, cluster_id):
    stack = list(clusters[cluster_id].children)
    while stack:
        current = stack.pop()
        yield current
        stack.extend(clusters[current].children)


def _members(clusters, cluster_id):
    points = [p for p, _ in clusters[cluster_id].fallen]
    for descendant in _descendants(clusters, cluster_id):
        points.extend(p for p, _ in clusters[descendant].fallen)
    return points


def label_points(clusters, selected, k) -> ClusterAssignment:
    labels = np.full(k, NOISE, dtype=np.int64)
    for label, cluster_id in enumerate(selected):
        if cluster_id == 0:
            # Lone root: only points that stay until its final dissolution
            # belong to it; stragglers that dropped off earlier are noise.
            last = max(lam for _, lam in clusters[0].fallen)
            members = [p for p, lam in clusters[0].fallen if lam >= last]
        else:
            members = _members(clusters, cluster_id)
        labels[members] = label

    sizes = {}
    for label in range(len(selected)):
        count = int(np.sum(labels == label))
        if count:
            sizes[label] = count
    return ClusterAssignment(labels=labels, cluster_sizes=sizes)


def hdbscan(distances, params: HdbscanParams) -> ClusterAssignment:
    distances = np.asarray(distances, dtype=np.float64)
    k = distances.shape[0]
    if k < params.min_cluster_size:
        raise InsufficientModelsError(
            f"{k} models cannot form a cluster of {params.min_cluster_size}."
        )
    if params.min_samples > k - 1:
        raise InsufficientModelsError(
            f"min_samples={params.min_samples} needs more than {k} models."
        )

    core = core_distances(distances, params.min_samples)
    reach = mutual_reachability(distances, core)
    edges = minimum_spanning_tree(reach)
    linkage = single_linkage(edges, k)
    clusters = condense_tree(linkage, k, params.min_cluster_size)
    selected = select_clusters(clusters)
    assignment = label_points(clusters, selected, k)

    logger.debug(
        f"hdbscan over {k} points: {len(clusters)} condensed clusters, "
        f"selected sizes {assignment.cluster_sizes}, "
        f"{len(assignment.noise)} noise"
    )
    return assignment

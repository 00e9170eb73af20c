"""Slow HDBSCAN written straight from the level-set definitions.

Shares no code with the production pipeline: no spanning tree, no linkage
matrix. A cluster at distance level ``h`` is a connected component of the
mutual-reachability graph restricted to edges shorter than ``h``.
"""
import itertools
import math

import numpy as np


def components(points, weights, below):
    """Connected components of ``points`` using edges of weight < ``below``."""
    remaining = set(points)
    parts = []
    while remaining:
        seed = min(remaining)
        seen, frontier = {seed}, [seed]
        while frontier:
            p = frontier.pop()
            for q in list(remaining - seen):
                if weights[p][q] < below:
                    seen.add(q)
                    frontier.append(q)
        remaining -= seen
        parts.append(sorted(seen))
    return parts


def connecting_level(points, weights):
    """Smallest edge weight at which ``points`` form one component."""
    if len(points) == 1:
        return None
    levels = sorted({weights[p][q] for p, q in itertools.combinations(points, 2)})
    for level in levels:
        if len(components(points, weights, math.nextafter(level, math.inf))) == 1:
            return level
    raise AssertionError("complete graph must connect")


def inverse(distance):
    return math.inf if distance == 0 else 1.0 / distance


def gain(lam, birth):
    return 0.0 if lam == birth else lam - birth


class Node:
    def __init__(self, points, birth):
        self.points = list(points)
        self.birth = birth
        self.falls = {}
        self.children = []
        self.split = None

    def stability(self):
        total = sum(gain(lam, self.birth) for lam in self.falls.values())
        if self.split is not None:
            size = sum(len(c.points) for c in self.children)
            total += size * gain(self.split, self.birth)
        return total


def grow(node, weights, min_cluster_size):
    current = node.points
    while True:
        level = connecting_level(current, weights)
        if level is None:
            node.falls[current[0]] = math.inf
            return
        lam = inverse(level)
        parts = components(current, weights, level)
        large = [p for p in parts if len(p) >= min_cluster_size]
        for part in parts:
            if len(part) < min_cluster_size:
                node.falls.update({p: lam for p in part})
        if len(large) >= 2:
            node.split = lam
            for part in large:
                child = Node(part, lam)
                node.children.append(child)
                grow(child, weights, min_cluster_size)
            return
        if not large:
            return
        current = large[0]


def best(node):
    """``(value, selected nodes)`` under excess of mass, parents win ties."""
    if not node.children:
        return node.stability(), [node]
    below = [best(child) for child in node.children]
    total = sum(value for value, _ in below)
    own = node.stability()
    if own >= total:
        return own, [node]
    return total, [n for _, chosen in below for n in chosen]


def reference_partition(distances, min_cluster_size, min_samples):
    d = np.asarray(distances, dtype=float)
    k = d.shape[0]
    core = [
        sorted(d[i, j] for j in range(k) if j != i)[min_samples - 1]
        for i in range(k)
    ]
    weights = [
        [0.0 if i == j else max(core[i], core[j], d[i, j]) for j in range(k)]
        for i in range(k)
    ]
    root = Node(range(k), 0.0)
    grow(root, weights, min_cluster_size)

    if not root.children:
        last = max(root.falls.values())
        return {frozenset(p for p, lam in root.falls.items() if lam >= last)}
    chosen = []
    for child in root.children:
        chosen.extend(best(child)[1])
    return {frozenset(n.points) for n in chosen}


def prufer_trees(k):
    """Every labelled spanning tree of ``k`` nodes as an edge list."""
    if k == 2:
        yield [(0, 1)]
        return
    for sequence in itertools.product(range(k), repeat=k - 2):
        degree = [1] * k
        for node in sequence:
            degree[node] += 1
        edges = []
        for node in sequence:
            leaf = min(i for i in range(k) if degree[i] == 1)
            edges.append((leaf, node))
            degree[leaf] -= 1
            degree[node] -= 1
        u, v = [i for i in range(k) if degree[i] == 1]
        edges.append((u, v))
        yield edges

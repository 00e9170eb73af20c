import logging

import numpy as np

from app.clustering.distances import cosine_distance_matrix
from app.clustering.hdbscan import ClusterAssignment, HdbscanParams, hdbscan
from app.core.utils import EmptySelectionError

logger = logging.getLogger(__name__)


def select_accepted(assignment: ClusterAssignment):
    """Indices of the largest non-noise cluster; smallest label wins ties."""
    if not assignment.cluster_sizes:
        raise EmptySelectionError("Clustering labelled every model as noise.")
    largest = max(
        assignment.cluster_sizes.items(), key=lambda item: (item[1], -item[0])
    )[0]
    return [int(i) for i in np.flatnonzero(assignment.labels == largest)]


def cluster_models(fps, params: HdbscanParams) -> ClusterAssignment:
    return hdbscan(cosine_distance_matrix(fps), params)


def filter_models(fps, params: HdbscanParams):
    accepted = select_accepted(cluster_models(fps, params))
    logger.debug(f"accepted {len(accepted)} of {len(fps)} models")
    return accepted

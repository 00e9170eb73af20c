import numpy as np

from app.core.utils import (
    DimensionMismatchError,
    InsufficientModelsError,
    ZeroNormFingerprintError,
)

# K x K, symmetric, zero diagonal, entries in [0, 2].
DistanceMatrix = np.ndarray


def cosine_distance_matrix(fps) -> DistanceMatrix:
    """Pairwise ``1 - cosine similarity`` between fingerprints."""
    if len(fps) < 2:
        raise InsufficientModelsError("Need at least two fingerprints.")
    lengths = {len(fp) for fp in fps}
    if len(lengths) != 1:
        raise DimensionMismatchError(
            f"Fingerprints have different lengths: {sorted(lengths)}"
        )

    stacked = np.vstack([np.asarray(fp.coeffs, dtype=np.float64) for fp in fps])
    norms = np.linalg.norm(stacked, axis=1)
    for index, norm in enumerate(norms):
        if not norm > 0:
            raise ZeroNormFingerprintError(client_index=index)

    unit = stacked / norms[:, None]
    distances = 1.0 - unit @ unit.T
    distances = np.clip((distances + distances.T) / 2.0, 0.0, 2.0)
    # Round-off must not separate bit-identical submissions.
    for i in range(len(fps)):
        same = np.all(stacked == stacked[i], axis=1)
        distances[i, same] = 0.0
        distances[same, i] = 0.0
    np.fill_diagonal(distances, 0.0)
    return distances

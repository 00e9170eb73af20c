import numpy as np

SEED_MASK = (1 << 64) - 1


def derive_seed(master_seed, *keys):
    """Stable 64-bit child seed for ``keys`` under ``master_seed``.

    Keys are small non-negative integers (round index, client index, a
    purpose tag) so that every random draw in a federation can be replayed
    from the master seed alone, independent of evaluation order.
    """
    entropy = [int(master_seed) & SEED_MASK, *(int(k) for k in keys)]
    state = np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)
    return int(state[0])


def make_rng(seed):
    return np.random.default_rng(int(seed) & SEED_MASK)

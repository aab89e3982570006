"""Seeding and worker fan-out for Monte Carlo experiments.

Path ``i`` of an experiment seeded with ``seed`` always draws from the same
counter-based generator, whatever the number of workers:

.. code-block:: python

    from smb_lab.parallel import derive_seed, make_generator

    rng = make_generator(derive_seed(42, index=7))

Results are collected in submission order, so any reduction done on them is
independent of scheduling.
"""
from concurrent.futures import ProcessPoolExecutor
import logging
import os

import numpy as np

from .constants import THREADS_ENV_VAR

__all__ = (
    'worker_count',
    'derive_seed',
    'make_generator',
    'map_paths',
)

logger = logging.getLogger(__name__)


def worker_count(workers=None):
    """Number of worker processes to use.

    :param workers: Explicit count. Falls back to ``$SMB_LAB_THREADS``, then to
        the number of CPUs.
    """
    if workers is None:
        env = os.environ.get(THREADS_ENV_VAR)
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(workers))


def derive_seed(seed: int, index: int) -> int:
    """64-bit seed for path ``index`` of an experiment seeded with ``seed``."""
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def make_generator(seed: int) -> np.random.Generator:
    """Counter-based (Philox) generator for a single trajectory."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def map_paths(func, items, workers=None, chunksize=None):
    """``list(map(func, items))``, fanned out over a process pool.

    ``func`` must be a picklable module-level callable. Order of the results
    matches ``items``.
    """
    items = list(items)
    workers = min(worker_count(workers), max(1, len(items)))
    if workers == 1:
        return [func(item) for item in items]
    if chunksize is None:
        chunksize = max(1, len(items) // (4 * workers))
    logger.info('Fanning %d paths out to %d workers', len(items), workers)
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items, chunksize=chunksize))

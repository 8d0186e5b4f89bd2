"""Block-parallel Monte Carlo estimation with standard errors."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict

import numpy as np

from ..models import Estimate

logger = logging.getLogger(__name__)

Kernel = Callable[[np.random.Generator, int], Dict[str, np.ndarray]]


class BlockMonteCarlo:
    """Runs a sampling kernel over independent blocks and merges the moments.

    Every block draws from its own child of ``SeedSequence(seed)``, so results
    depend only on (seed, samples, block_size), never on the worker count or
    completion order.
    """

    def __init__(self, samples: int, seed: int, block_size: int = 131_072, workers: int = 1):
        if samples <= 0:
            raise ValueError(f"Monte Carlo needs a positive sample count, got {samples}")
        self.samples = samples
        self.seed = seed
        self.block_size = max(1, min(block_size, samples))
        self.workers = max(1, workers)

    def _block_sizes(self) -> list[int]:
        full, rest = divmod(self.samples, self.block_size)
        return [self.block_size] * full + ([rest] if rest else [])

    def run(self, kernel: Kernel) -> Dict[str, Estimate]:
        """
        Evaluate ``kernel(rng, n)`` on every block.

        Args:
            kernel: Returns per-sample contributions keyed by quantity name

        Returns:
            Mean and standard error for each quantity
        """
        sizes = self._block_sizes()
        streams = np.random.SeedSequence(self.seed).spawn(len(sizes))

        def one_block(args):
            stream, n = args
            values = kernel(np.random.default_rng(stream), n)
            return {
                key: (float(np.sum(arr)), float(np.sum(np.square(arr))))
                for key, arr in values.items()
            }

        jobs = list(zip(streams, sizes))
        if self.workers > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                partials = list(pool.map(one_block, jobs))
        else:
            partials = [one_block(job) for job in jobs]

        n = self.samples
        estimates: Dict[str, Estimate] = {}
        for key in partials[0]:
            total = math.fsum(p[key][0] for p in partials)
            total_sq = math.fsum(p[key][1] for p in partials)
            mean = total / n
            var = max(0.0, (total_sq - n * mean * mean) / (n - 1)) if n > 1 else 0.0
            estimates[key] = Estimate(value=mean, se=math.sqrt(var / n), samples=n)

        logger.debug(f"Monte Carlo over {len(sizes)} blocks ({n} samples, seed {self.seed})")
        return estimates

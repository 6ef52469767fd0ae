"""
Seeding - 随机流派生

每个 (n, trial) 的种子由 numpy SeedSequence 从 (master_seed, n, trial)
确定性派生，与调度顺序、线程数无关。
"""

import numpy as np

UINT64_MASK = (1 << 64) - 1


def trial_seed(master_seed: int, n: int, trial: int) -> int:
    """(master_seed, n, trial) → 64 位种子"""
    seq = np.random.SeedSequence(
        entropy=int(master_seed) & UINT64_MASK,
        spawn_key=(int(n), int(trial)),
    )
    return int(seq.generate_state(1, np.uint64)[0])


def trial_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(int(seed))


__all__ = ["trial_seed", "trial_rng", "UINT64_MASK"]

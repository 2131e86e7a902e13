"""Progressive random initialization.

Each run stores one m x k_max and one k_max x n uniform [0, 1) matrix; the
starting factors at rank k are the left / top k-slices, so the rank-(k-1)
start of a run is always a prefix of its rank-k start.

Streams are per-run: run r draws from Philox seeded with
(seed, INIT_STREAM_TAG, r), filling W column by column and then H row by
row.  Philox is a counter-based 64-bit generator, so runs are independent
of each other and of how many runs are requested.
"""

from dataclasses import dataclass

import numpy as np

INIT_STREAM_TAG = 0x57EE1  # domain separator for initialization streams


def run_rng(seed, tag, *indices):
    """Deterministic per-task generator derived from (seed, tag, indices)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, tag, *indices])))


@dataclass
class InitSet:
    """Nested random starting factors for ranks k_min..k_max over `runs` runs."""

    k_min: int
    k_max: int
    W_full: np.ndarray  # runs x m x k_max
    H_full: np.ndarray  # runs x k_max x n
    seed: int

    @property
    def runs(self):
        return self.W_full.shape[0]

    @property
    def shape(self):
        return self.W_full.shape[1], self.H_full.shape[2]


def make_init_set(m, n, k_min, k_max, a, seed):
    """Draw `a` independent progressive initializations."""
    if not (1 <= k_min <= k_max <= min(m, n)):
        raise ValueError(
            f"need 1 <= k_min <= k_max <= min(m, n); got k_min={k_min}, "
            f"k_max={k_max}, min(m, n)={min(m, n)}"
        )
    if a < 1:
        raise ValueError(f"need at least one run, got a={a}")
    W_full = np.empty((a, m, k_max))
    H_full = np.empty((a, k_max, n))
    for r in range(a):
        rng = run_rng(seed, INIT_STREAM_TAG, r)
        W_full[r] = rng.random((k_max, m)).T  # column-by-column fill
        H_full[r] = rng.random((k_max, n))    # row-by-row fill
    return InitSet(k_min, k_max, W_full, H_full, seed)


def slice_init(s, r, k):
    """Starting factors (W0, H0) for run r at rank k, as fresh copies."""
    if not (0 <= r < s.runs):
        raise ValueError(f"run index {r} out of range [0, {s.runs})")
    if not (s.k_min <= k <= s.k_max):
        raise ValueError(f"rank {k} outside [{s.k_min}, {s.k_max}]")
    return (np.array(s.W_full[r, :, :k], order="C"),
            np.array(s.H_full[r, :k, :], order="C"))


def save_init_set(s, path_w, path_h):
    """Persist the stacked W / H initializations for audit (CSV)."""
    from .matrices import save_matrix

    a, m, k_max = s.W_full.shape
    n = s.H_full.shape[2]
    save_matrix(path_w, s.W_full.reshape(a * m, k_max), fmt="csv")
    save_matrix(path_h, s.H_full.reshape(a * k_max, n), fmt="csv")


def load_init_set(path_w, path_h, a, k_min, k_max, seed=0):
    """Inverse of :func:`save_init_set` given the run count and rank bounds."""
    from .matrices import load_matrix

    W = load_matrix(path_w, fmt="csv")
    H = load_matrix(path_h, fmt="csv")
    m = W.shape[0] // a
    return InitSet(k_min, k_max, W.reshape(a, m, k_max),
                   H.reshape(a, k_max, H.shape[1]), seed)

"""Classic rank-determination baselines and their numeric building blocks.

Selectors return a :class:`MethodResult` whose ``selected`` field is either
a rank or one of the sentinels ``UNDETERMINED`` (inconclusive output) and
``RANGE_EXCEEDED`` (the criterion points past the tested range).
Tie-breaking is always toward the smallest rank.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.cluster.hierarchy import cophenet, linkage
from scipy.optimize import linear_sum_assignment
from scipy.signal import savgol_filter
from scipy.spatial.distance import squareform

from .inits import run_rng, slice_init
from .matrices import shuffle_columns_per_row
from .solver import fit

UNDETERMINED = "undetermined"
RANGE_EXCEEDED = "range_exceeded"

PERM_STREAM_TAG = 0x9E27  # domain separators, see inits.run_rng
ARI_STREAM_TAG = 0xA21D


@dataclass
class MethodResult:
    method: str
    ranks: list
    values: list
    selected: object  # rank, list of ranks, or a sentinel string
    extra: dict = field(default_factory=dict)


# --- building blocks ------------------------------------------------------

def cluster_labels(f):
    """Hard cluster assignment: the argmax basis weight per sample."""
    return np.argmax(f.W, axis=1)


def consensus(fits):
    """Co-clustering frequency matrix over samples, averaged across fits."""
    if not fits:
        raise ValueError("need at least one fit")
    if len({f.rank for f in fits}) != 1:
        raise ValueError("fits mix ranks")
    m = fits[0].W.shape[0]
    C = np.zeros((m, m))
    for f in fits:
        labels = cluster_labels(f)
        C += labels[:, None] == labels[None, :]
    return C / len(fits)


def cophenetic_coefficient(C):
    """Correlation between consensus dissimilarities and their average-linkage
    cophenetic distances.

    Constant-zero dissimilarity (perfect consensus) is defined as 1; other
    zero-variance cases return 0 with a warning.
    """
    C = np.asarray(C, dtype=np.float64)
    if C.shape[0] < 3:
        raise ValueError("cophenetic coefficient needs at least 3 samples")
    d = squareform(1.0 - C, checks=False)
    if np.all(d == 0.0):
        return 1.0
    coph_d = cophenet(linkage(d, method="average"))
    if np.std(d) == 0.0 or np.std(coph_d) == 0.0:
        warnings.warn("degenerate consensus: zero variance in distances")
        return 0.0
    return float(np.corrcoef(d, coph_d)[0, 1])


def dispersion_coefficient(C):
    """Mean of 4 (C_ij - 1/2)^2; 1 for perfectly reproducible clustering."""
    C = np.asarray(C, dtype=np.float64)
    return float(np.mean(4.0 * (C - 0.5) ** 2))


def adjusted_rand_index(a, b):
    """Hubert-Arabie adjusted Rand index from the contingency table.

    When the expected index equals the maximum index (e.g. one labeling puts
    everything in a single cluster) the usual formula is undefined; equal
    partitions then score 1 and differing ones 0.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("label vectors must be 1-d and of equal length")
    if len(a) < 2:
        raise ValueError("need at least two samples")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)

    def comb2(x):
        return x * (x - 1) // 2

    index = comb2(table).sum()
    sum_a = comb2(table.sum(axis=1)).sum()
    sum_b = comb2(table.sum(axis=0)).sum()
    expected = sum_a * sum_b / comb2(len(a))
    max_index = (sum_a + sum_b) / 2.0
    if max_index == expected:
        # same partition iff the contingency table is a permutation pattern
        same = ((np.count_nonzero(table, axis=1) <= 1).all()
                and (np.count_nonzero(table, axis=0) <= 1).all())
        return 1.0 if same else 0.0
    return float((index - expected) / (max_index - expected))


def hungarian(cost):
    """Minimum-cost assignment; returns the column permutation per row."""
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ValueError("cost matrix must be square")
    if not np.isfinite(cost).all():
        raise ValueError("cost matrix must be finite")
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(cost.shape[0], dtype=int)
    perm[rows] = cols
    return perm


def savgol_derivative(curve, window=5, polyorder=2):
    """Per-point slope estimate from a sliding least-squares polynomial fit.

    Unit sample spacing; edge points evaluate the polynomial fitted to the
    nearest full window at their own position.
    """
    curve = np.asarray(curve, dtype=np.float64)
    if window % 2 != 1:
        raise ValueError("window must be odd")
    if polyorder >= window:
        raise ValueError("polyorder must be smaller than the window")
    if window > len(curve):
        raise ValueError("window longer than the curve")
    return savgol_filter(curve, window, polyorder, deriv=1, delta=1.0, mode="interp")


def cosine_distance_matrix(U, V, eps=1e-300):
    """Pairwise cosine distances between the columns of U and of V."""
    nu = np.maximum(np.linalg.norm(U, axis=0), eps)
    nv = np.maximum(np.linalg.norm(V, axis=0), eps)
    return 1.0 - (U.T @ V) / np.outer(nu, nv)


# --- selectors ------------------------------------------------------------

def select_cophenetic(ranks, values, drop_threshold=1e-3):
    """Smallest rank right before the coefficient first drops."""
    ranks = list(ranks)
    values = np.asarray(values, dtype=np.float64)
    if len(ranks) < 2:
        raise ValueError("need a curve over at least two ranks")
    for i in range(len(ranks) - 1):
        if values[i + 1] < values[i] - drop_threshold:
            return MethodResult("cophenetic", ranks, values.tolist(), ranks[i])
    return MethodResult("cophenetic", ranks, values.tolist(), UNDETERMINED)


def select_dispersion(ranks, values):
    """Rank maximizing the coefficient; the top of the range is reported as
    range-exceeded (the maximum may lie beyond the tested ranks)."""
    ranks = list(ranks)
    values = np.asarray(values, dtype=np.float64)
    if len(ranks) < 2:
        raise ValueError("need a curve over at least two ranks")
    best = int(np.argmax(values))
    selected = RANGE_EXCEEDED if best == len(ranks) - 1 else ranks[best]
    return MethodResult("dispersion", ranks, values.tolist(), selected)


def elbow_select(ranks, values, tol=1e-8):
    """Max perpendicular distance to the endpoint chord, after min-max
    normalization of both axes; near-linear curves are undetermined."""
    ranks = list(ranks)
    values = np.asarray(values, dtype=np.float64)
    if len(ranks) < 3:
        raise ValueError("need a curve over at least three ranks")
    x = np.linspace(0.0, 1.0, len(ranks))
    span = values.max() - values.min()
    if span == 0.0:
        return MethodResult("elbow", ranks, values.tolist(), UNDETERMINED)
    y = (values - values.min()) / span
    # |cross| distance to the chord between the first and last point
    dx, dy = x[-1] - x[0], y[-1] - y[0]
    dist = np.abs(dy * (x - x[0]) - dx * (y - y[0])) / np.hypot(dx, dy)
    if dist.max() <= tol:
        return MethodResult("elbow", ranks, values.tolist(), UNDETERMINED)
    return MethodResult("elbow", ranks, values.tolist(), ranks[int(np.argmax(dist))])


def _select_permutation_once(slopes_data, slopes_perm, ranks, rtol):
    for i in range(len(ranks)):
        su, sp = slopes_data[i], slopes_perm[i]
        scale = max(abs(su), abs(sp))
        if abs(su - sp) <= rtol * scale:
            return ranks[i]
        if su > sp:
            return ranks[i - 1] if i > 0 else UNDETERMINED
    return RANGE_EXCEEDED


def permutation_select(A, init_set, repeats=10, algorithm="scd", iterations=100,
                       window=5, polyorder=2, rtol=1e-8, seed=0):
    """Rank where fitting the data stops beating fitting shuffled data.

    Each repeat shuffles A within every row, sweeps both matrices over the
    init set's rank range from a shared initialization, and compares the
    smoothed slopes of the two residual-norm curves.  The selected rank is
    the one immediately before the data slope strictly overtakes the
    shuffled slope, or the first rank at which they agree within ``rtol``.
    The final result is the low median of the per-repeat selections, or the
    dominant sentinel when sentinels are the majority.
    """
    A = np.asarray(A, dtype=np.float64)
    ranks = list(range(init_set.k_min, init_set.k_max + 1))
    if len(ranks) < 3:
        raise ValueError("permutation comparison needs at least three ranks")
    # shrink the smoothing window on short sweeps
    window = min(window, len(ranks) - (1 - len(ranks) % 2))
    polyorder = min(polyorder, window - 1)
    selections = []
    data_curves = []
    for t in range(repeats):
        rng = run_rng(seed, PERM_STREAM_TAG, t)
        A_perm = shuffle_columns_per_row(A, rng)
        r = t % init_set.runs
        res_data, res_perm = [], []
        for k in ranks:
            W0, H0 = slice_init(init_set, r, k)
            fd = fit(A, W0, H0, algorithm, iterations)
            fp = fit(A_perm, W0, H0, algorithm, iterations)
            res_data.append(np.linalg.norm(A - fd.W @ fd.H))
            res_perm.append(np.linalg.norm(A_perm - fp.W @ fp.H))
        data_curves.append(res_data)
        slopes_data = savgol_derivative(res_data, window, polyorder)
        slopes_perm = savgol_derivative(res_perm, window, polyorder)
        selections.append(_select_permutation_once(slopes_data, slopes_perm, ranks, rtol))

    numeric = sorted(s for s in selections if not isinstance(s, str))
    sentinels = [s for s in selections if isinstance(s, str)]
    if len(sentinels) > repeats // 2 or not numeric:
        selected = max(set(sentinels), key=sentinels.count) if sentinels else UNDETERMINED
    else:
        selected = numeric[(len(numeric) - 1) // 2]  # low median
    mean_curve = np.mean(data_curves, axis=0).tolist()
    return MethodResult("permutation", ranks, mean_curve, selected,
                        extra={"per_repeat": selections})


def ari_split_select(A, init_set, algorithm="scd", iterations=100, seed=0):
    """Split-half stability: fit both halves of a random feature split,
    align basis vectors by assignment on cosine distances, and pick the
    rank with the highest mean label agreement."""
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[1]
    if n < 2 * init_set.k_max:
        raise ValueError("need at least 2 * k_max feature columns to split")
    ranks = list(range(init_set.k_min, init_set.k_max + 1))
    scores = np.zeros((init_set.runs, len(ranks)))
    for r in range(init_set.runs):
        rng = run_rng(seed, ARI_STREAM_TAG, r)
        perm = rng.permutation(n)
        half = n // 2
        cols1, cols2 = perm[:half], perm[half:2 * half]
        for ki, k in enumerate(ranks):
            # both halves start from the same slice, so identical halves
            # produce identical factorizations
            W0, H0 = slice_init(init_set, r, k)
            f1 = fit(A[:, cols1], W0, H0[:, :half], algorithm, iterations)
            f2 = fit(A[:, cols2], W0, H0[:, :half], algorithm, iterations)
            assign = hungarian(cosine_distance_matrix(f1.W, f2.W))
            labels1 = cluster_labels(f1)
            # relabel the second half's clusters into the first half's order
            inverse = np.empty(k, dtype=int)
            inverse[assign] = np.arange(k)
            labels2 = inverse[cluster_labels(f2)]
            scores[r, ki] = adjusted_rand_index(labels1, labels2)
    mean_scores = scores.mean(axis=0)
    return MethodResult("ari", ranks, mean_scores.tolist(),
                        ranks[int(np.argmax(mean_scores))])


def _check_samples(samples_per_rank):
    ranks = sorted(samples_per_rank)
    for k in ranks:
        if len(samples_per_rank[k]) < 2:
            raise ValueError(f"need at least two error samples per rank (rank {k})")
    return ranks


def ks_cv_select(samples_per_rank):
    """Rank with the lowest mean held-out reconstruction error."""
    ranks = _check_samples(samples_per_rank)
    means = [float(np.mean(samples_per_rank[k])) for k in ranks]
    return MethodResult("kscv", ranks, means, ranks[int(np.argmin(means))])


def madimput_select(samples_per_rank):
    """Rank with the lowest median absolute deviation of held-out errors."""
    ranks = _check_samples(samples_per_rank)
    mads = [float(np.median(np.abs(np.asarray(samples_per_rank[k])
                                   - np.median(samples_per_rank[k]))))
            for k in ranks]
    return MethodResult("madimput", ranks, mads, ranks[int(np.argmin(mads))])

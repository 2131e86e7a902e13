"""Residual-stability analysis across random initializations.

At each rank the signed residuals of all runs are stacked row-wise; the
mean over coordinates of the across-run interquartile range (the MCI)
measures how sensitive the solution is to the starting point.  Ranks
where the curve is flat and low immediately before a significant jump
are reported as suggested ranks ("islands of stability").
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class ResidualStack:
    """Row r = row-major flattening of A - W H for run r, at a fixed rank."""

    rank: int
    data: np.ndarray  # runs x (m * n)

    @property
    def runs(self):
        return self.data.shape[0]


@dataclass
class MciCurve:
    ranks: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.ranks = np.asarray(self.ranks, dtype=int)
        self.values = np.asarray(self.values, dtype=np.float64)
        if len(self.ranks) != len(self.values):
            raise ValueError("ranks and values length mismatch")
        if len(self.ranks) and np.any(np.diff(self.ranks) != 1):
            raise ValueError("rank range must be contiguous")


def build_residual_stack(A, fits, normalize=False):
    """Stack the signed residuals of several same-rank fits.

    With ``normalize`` the residuals are divided by ||A||_F, which scales
    the MCI uniformly and leaves island locations unchanged.
    """
    if len(fits) < 2:
        raise ValueError("need at least two runs for an interquartile range")
    ranks = {f.rank for f in fits}
    if len(ranks) != 1:
        raise ValueError(f"fits mix ranks {sorted(ranks)}")
    scale = np.linalg.norm(A) if normalize else 1.0
    if normalize and scale == 0.0:
        raise ValueError("cannot normalize residuals of a zero matrix")
    data = np.stack([((A - f.W @ f.H) / scale).ravel(order="C") for f in fits])
    return ResidualStack(ranks.pop(), data)


def coordinatewise_iqr(R, batch=1 << 20):
    """Across-run IQR at every coordinate.

    Quantiles interpolate the sorted order statistics at fractional
    position 1 + (a - 1) q.  Columns are processed in batches to bound
    the quantile workspace.
    """
    if R.runs < 2:
        raise ValueError("IQR needs at least two runs")
    data = R.data
    out = np.empty(data.shape[1])
    for lo in range(0, data.shape[1], batch):
        block = data[:, lo:lo + batch]
        q1, q3 = np.quantile(block, [0.25, 0.75], axis=0)
        out[lo:lo + block.shape[1]] = q3 - q1
    return out


def mci(R):
    """Mean over coordinates of the across-run IQR."""
    return float(coordinatewise_iqr(R).mean())


# default eps_floor scale relative to the root-mean-square entry of A;
# suppresses jump detection inside the numerical convergence noise of the
# solver without masking real structure
EPS_FLOOR_SCALE = 3e-5


def default_eps_floor(A):
    """Noise floor for island detection, proportional to the RMS entry of A."""
    A = np.asarray(A, dtype=np.float64)
    return EPS_FLOOR_SCALE * np.linalg.norm(A) / np.sqrt(A.size)


def detect_islands(curve, theta=0.25, theta_flat=0.05, eps_floor=0.0,
                   theta_drop=2.0):
    """Suggested ranks where the curve is stable against its neighbourhood.

    Two patterns qualify rank k:

    * flat-before-rise: the curve rises by more than a factor (1 + theta)
      from k to k+1 (with ``eps_floor`` guarding near-zero values) while k
      itself sits on a flat stretch — it does not exceed its left
      neighbour by more than a factor (1 + theta_flat), or it ends the
      leading plateau;
    * terminal collapse: the curve falls by more than a factor
      (1 + theta_drop) into k from a level above ``eps_floor`` and every
      later value stays within a factor (1 + theta_flat) of the value at
      k.  Only the first such rank is reported; later ranks lie inside
      the stable region rather than at its edge.
    """
    ranks = np.asarray(curve.ranks)
    v = np.asarray(curve.values, dtype=np.float64)
    if len(ranks) < 3:
        raise ValueError("island detection needs at least three ranks")
    if theta <= 0:
        raise ValueError("theta must be positive")

    # end of the non-increasing-within-tolerance run starting at k_min
    plateau_end = 0
    while (plateau_end + 1 < len(v)
           and v[plateau_end + 1] <= v[plateau_end] * (1.0 + theta_flat)):
        plateau_end += 1

    islands = []
    for i in range(len(v) - 1):
        jump = v[i + 1] >= (1.0 + theta) * max(v[i], eps_floor)
        if not jump:
            continue
        # a plateau must be a genuine flat stretch: the first rank alone
        # does not qualify just because the curve rises right away
        flat = ((i > 0 and v[i] <= v[i - 1] * (1.0 + theta_flat))
                or (i == plateau_end and plateau_end >= 1))
        if flat:
            islands.append(int(ranks[i]))

    # the final rank has no trailing evidence of stability and never counts
    for i in range(1, len(v) - 1):
        drop = (v[i - 1] > eps_floor
                and v[i] * (1.0 + theta_drop) <= v[i - 1])
        if not drop:
            continue
        if np.all(v[i + 1:] <= v[i] * (1.0 + theta_flat)):
            if int(ranks[i]) not in islands:
                islands.append(int(ranks[i]))
            break  # first collapse point only

    return sorted(islands)


def smooth_curve(curve, window=3):
    """Moving-median smoothing of an MCI curve (odd window)."""
    if window % 2 != 1 or window < 1:
        raise ValueError("window must be odd and positive")
    if window == 1 or len(curve.values) < window:
        return curve
    half = window // 2
    padded = np.pad(curve.values, half, mode="edge")
    smoothed = np.array([np.median(padded[i:i + window])
                         for i in range(len(curve.values))])
    return MciCurve(curve.ranks, smoothed)


def max_delta_map(A, fits, tol=0.10):
    """Coordinatewise spread of absolute errors among comparable fits.

    Fits whose residual norm is within ``tol`` relative distance of the
    median residual norm qualify; the output holds max - min of |A - W H|
    over the qualifying fits at each coordinate.
    """
    if not fits:
        raise ValueError("need at least one fit")
    errors = [np.abs(A - f.W @ f.H) for f in fits]
    norms = np.array([np.linalg.norm(A - f.W @ f.H) for f in fits])
    med = float(np.median(norms))
    if med == 0.0:
        qualify = norms == 0.0
    else:
        qualify = np.abs(norms - med) <= tol * med
    stack = np.stack([e for e, q in zip(errors, qualify) if q])
    return stack.max(axis=0) - stack.min(axis=0)

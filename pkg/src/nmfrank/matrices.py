"""Dense matrix I/O, the synthetic swimmer dataset, per-row shuffling, and
scattered-holdout mask generation.

Matrices are plain float64 numpy arrays throughout the package.  Holdout
masks are boolean arrays with True marking a held-out entry.
"""

import numpy as np
from scipy.io import mmread, mmwrite


class MatrixFormatError(ValueError):
    """Input file could not be parsed in the declared format."""


FORMATS = ("csv", "matrix-market")


def _infer_format(path):
    p = str(path).lower()
    if p.endswith(".mtx") or p.endswith(".mtx.gz"):
        return "matrix-market"
    return "csv"


def validate_nonneg(A, name="matrix"):
    """Check that A is finite and non-negative, naming the first offender."""
    A = np.asarray(A)
    bad = ~np.isfinite(A) | (A < 0)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise ValueError(
            f"{name} has a negative or non-finite entry at ({i}, {j}): {A[i, j]!r}"
        )


def load_matrix(path, fmt=None, header=False):
    """Load a dense non-negative matrix from CSV or MatrixMarket.

    Entries must all be finite and >= 0; the first offending coordinate is
    reported otherwise.
    """
    fmt = fmt or _infer_format(path)
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}, expected one of {FORMATS}")
    try:
        if fmt == "csv":
            A = np.loadtxt(path, delimiter=",", ndmin=2,
                           skiprows=1 if header else 0, dtype=np.float64)
        else:
            A = np.asarray(mmread(path), dtype=np.float64)
            if A.ndim != 2:
                raise ValueError("not a 2-d matrix")
    except OSError:
        raise
    except Exception as exc:
        raise MatrixFormatError(f"failed to parse {path} as {fmt}: {exc}") from exc
    if A.size == 0:
        raise MatrixFormatError(f"{path}: empty matrix")
    validate_nonneg(A, name=str(path))
    return np.ascontiguousarray(A)


def save_matrix(path, A, fmt=None):
    """Write a matrix to CSV or MatrixMarket at full float64 precision."""
    fmt = fmt or _infer_format(path)
    A = np.asarray(A, dtype=np.float64)
    if fmt == "csv":
        np.savetxt(path, A, delimiter=",", fmt="%.17g")
    elif fmt == "matrix-market":
        mmwrite(path, A, precision=17)
    else:
        raise ValueError(f"unknown format {fmt!r}, expected one of {FORMATS}")


# --- synthetic swimmer dataset -------------------------------------------

_CANVAS = 32
_TORSO_ROWS = range(12, 20)
_TORSO_COLS = (15, 16)
_LIMB_LEN = 6

# per limb: anchor (torso corner) and its four direction vectors
_LIMBS = (
    ((12, 15), ((0, -1), (-1, -1), (-1, 0), (1, -1))),   # top left
    ((12, 16), ((0, 1), (-1, 1), (-1, 0), (1, 1))),      # top right
    ((19, 15), ((0, -1), (1, -1), (1, 0), (-1, -1))),    # bottom left
    ((19, 16), ((0, 1), (1, 1), (1, 0), (-1, 1))),       # bottom right
)


def torso_pixels():
    """Flattened canvas indices of the fixed torso."""
    return sorted(r * _CANVAS + c for r in _TORSO_ROWS for c in _TORSO_COLS)


def limb_pixels(limb, position):
    """Flattened canvas indices of one limb at one of its four positions."""
    (r0, c0), dirs = _LIMBS[limb]
    dr, dc = dirs[position]
    out = []
    for step in range(1, _LIMB_LEN + 1):
        r, c = r0 + step * dr, c0 + step * dc
        if not (0 <= r < _CANVAS and 0 <= c < _CANVAS):
            raise AssertionError("limb segment leaves the canvas")
        out.append(r * _CANVAS + c)
    return out


def generate_swimmer():
    """Binary 256 x 1024 stick-figure dataset.

    Each row is a flattened 32x32 image: a fixed torso plus one of four
    positions for each of four limbs.  All 4^4 = 256 combinations appear
    exactly once, so the underlying component count is 16.
    """
    A = np.zeros((256, _CANVAS * _CANVAS), dtype=np.float64)
    torso = torso_pixels()
    for row in range(256):
        A[row, torso] = 1.0
        combo = row
        for limb in range(4):
            A[row, limb_pixels(limb, combo % 4)] = 1.0
            combo //= 4
    return A


def shuffle_columns_per_row(A, rng):
    """Independently permute the entries within every row."""
    A = np.asarray(A, dtype=np.float64)
    return rng.permuted(A, axis=1)


def generate_wold_mask(rows, cols, fraction, rng):
    """Scattered random holdout pattern with a repaired solvability guarantee.

    Roughly ``fraction * rows * cols`` entries are held out (True), chosen
    uniformly; the pattern is then repaired so that every row and column
    keeps at least one observed entry.
    """
    if not (0.0 < fraction < 1.0):
        raise ValueError(f"holdout fraction must be in (0, 1), got {fraction}")
    size = rows * cols
    target = int(round(fraction * size))
    if size - target < max(rows, cols):
        raise ValueError(
            f"fraction {fraction} leaves too few observed entries to cover "
            f"every row and column of a {rows}x{cols} matrix"
        )
    mask = np.zeros(size, dtype=bool)
    if target > 0:
        mask[rng.choice(size, size=target, replace=False)] = True
    mask = mask.reshape(rows, cols)

    def _eligible():
        # observed entries whose removal empties no row or column
        obs = ~mask
        row_obs = obs.sum(axis=1)
        col_obs = obs.sum(axis=0)
        return obs & (row_obs[:, None] > 1) & (col_obs[None, :] > 1)

    def _rehold():
        elig = np.argwhere(_eligible())
        if len(elig):
            i, j = elig[rng.integers(len(elig))]
            mask[i, j] = True

    for i in np.flatnonzero(mask.all(axis=1)):
        mask[i, rng.integers(cols)] = False
        _rehold()
    for j in np.flatnonzero(mask.all(axis=0)):
        mask[rng.integers(rows), j] = False
        _rehold()

    assert not mask.all(axis=1).any() and not mask.all(axis=0).any()
    return mask

"""Maximum interpoint distance over the rows of a data matrix.

Two kernels are provided. ``naive`` sweeps row ``i`` against rows ``i+1..p-1``
with direct differences and works for any ``q >= 1``. ``blocked_gram`` (q = 2
only) screens row-pair tiles with the Gram identity

    ||x - y||^2 = ||x||^2 + ||y||^2 - 2 <x, y>

and then re-evaluates every pair whose screened value is within the Gram
rounding bound of the maximum with the same direct differences ``naive``
uses. The final value and arg pair therefore do not depend on the tile size
or on the BLAS blocking, and in practice match ``naive`` bit for bit.

Ties are broken towards the lexicographically smallest ``(i, j)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DataValidationError, DimensionError, InsufficientRowsError, ParameterError, SpecError

Kernel = Literal["naive", "blocked_gram"]

DEFAULT_TILE = 256


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """A p x n matrix of finite reals whose rows are the sample points."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            raise DimensionError(f"data matrix must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionError(f"data matrix must have p >= 1 rows and n >= 1 columns, got {arr.shape}")
        bad = np.argwhere(~np.isfinite(arr))
        if bad.size:
            r, c = bad[0]
            raise DataValidationError(f"non-finite value at row {r + 1}, column {c + 1}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def __eq__(self, other):
        return isinstance(other, DataMatrix) and np.array_equal(self.values, other.values)

    __hash__ = None


def as_matrix(x) -> DataMatrix:
    return x if isinstance(x, DataMatrix) else DataMatrix(x)


@dataclass(frozen=True)
class DistanceSpec:
    q: float = 2.0
    kernel: Kernel = "naive"
    tile: int = DEFAULT_TILE

    def __post_init__(self):
        if not (self.q >= 1 and math.isfinite(self.q)):
            raise ParameterError(f"norm exponent q must be >= 1, got {self.q}")
        if self.kernel not in ("naive", "blocked_gram"):
            raise SpecError(f"unknown kernel {self.kernel!r}")
        if self.kernel == "blocked_gram" and self.q != 2:
            raise SpecError(f"blocked_gram kernel requires q = 2, got q = {self.q}")
        if int(self.tile) != self.tile or self.tile < 1:
            raise ParameterError(f"tile must be a positive integer, got {self.tile}")


@dataclass(frozen=True)
class MaxDistanceResult:
    """Maximum of ``sum_k |X_ik - X_jk|^q`` over pairs, with 0-based arg pair."""

    value_pow_q: float
    value: float
    arg_i: int
    arg_j: int
    q: float = 2.0


def _check_q(q):
    if not (q >= 1 and math.isfinite(q)):
        raise ParameterError(f"norm exponent q must be >= 1, got {q}")


def _pow_q(diff: np.ndarray, q: float) -> np.ndarray:
    if q == 2:
        return diff * diff
    if q == 1:
        return np.abs(diff)
    return np.abs(diff) ** q


def _row_distances(x: np.ndarray, i: int, js, q: float) -> np.ndarray:
    """``sum_k |x[j, k] - x[i, k]|^q`` for each ``j`` in ``js``."""
    return _pow_q(x[js] - x[i], q).sum(axis=1)


def qnorm_pow_q_distance(row_a, row_b, q: float = 2.0) -> float:
    """Return ``sum_k |a_k - b_k|^q``."""
    _check_q(q)
    a = np.asarray(row_a, dtype=np.float64)
    b = np.asarray(row_b, dtype=np.float64)
    if a.ndim != 1 or a.shape != b.shape:
        raise DimensionError(f"rows must be 1-D and equal length, got {a.shape} and {b.shape}")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise DataValidationError("rows contain non-finite values")
    # difference taken as (larger index - smaller) in the kernels; |.| makes the order irrelevant
    return float(_pow_q(b - a, q).sum())


def _result(value_pow_q: float, i: int, j: int, q: float) -> MaxDistanceResult:
    value_pow_q = max(float(value_pow_q), 0.0)
    value = math.sqrt(value_pow_q) if q == 2 else value_pow_q ** (1.0 / q)
    return MaxDistanceResult(value_pow_q, value, int(i), int(j), float(q))


def _naive(x: np.ndarray, q: float) -> MaxDistanceResult:
    p = x.shape[0]
    best, bi, bj = -1.0, 0, 1
    for i in range(p - 1):
        d = _row_distances(x, i, slice(i + 1, p), q)
        k = int(np.argmax(d))
        if d[k] > best:
            best, bi, bj = float(d[k]), i, i + 1 + k
    return _result(best, bi, bj, q)


def blocked_gram_max_sq(matrix, tile: int = DEFAULT_TILE) -> MaxDistanceResult:
    """Maximum squared Euclidean interpoint distance via tiled Gram products.

    Tiles of ``tile`` rows are swept in row-major order over the upper
    triangle. Within each tile every entry within ``2 * tol`` of the tile
    maximum is kept as a candidate, where ``tol`` bounds the Gram rounding
    error; candidates close to the global maximum are then recomputed exactly.
    """
    if int(tile) != tile or tile < 1:
        raise ParameterError(f"tile must be a positive integer, got {tile}")
    tile = int(tile)
    m = as_matrix(matrix)
    if m.p < 2:
        raise InsufficientRowsError(f"need at least 2 rows, got p = {m.p}")
    x = m.values
    p, n = x.shape
    # translation-invariant; centering keeps the norms small so cancellation stays small
    xc = x - x.mean(axis=0)
    sq = np.einsum("ij,ij->i", xc, xc)
    eps = np.finfo(np.float64).eps
    tol = 16.0 * (n + 2) * eps * float(sq.max()) + np.finfo(np.float64).tiny

    tile_max = []
    tile_cands = []
    for r0 in range(0, p, tile):
        r1 = min(r0 + tile, p)
        for c0 in range(r0, p, tile):
            c1 = min(c0 + tile, p)
            d = sq[r0:r1, None] + sq[None, c0:c1] - 2.0 * (xc[r0:r1] @ xc[c0:c1].T)
            np.maximum(d, 0.0, out=d)
            if c0 == r0:
                # keep strictly upper-triangular entries only (i < j)
                d[np.tril_indices(r1 - r0, 0, c1 - c0)] = -np.inf
            top = float(d.max())
            if top == -np.inf:
                continue
            ii, jj = np.nonzero(d >= top - 2.0 * tol)
            tile_max.append(top)
            tile_cands.append((ii + r0, jj + c0, d[ii, jj]))

    gmax = max(tile_max)
    cut = gmax - 2.0 * tol
    ci = np.concatenate([c[0][c[2] >= cut] for c in tile_cands])
    cj = np.concatenate([c[1][c[2] >= cut] for c in tile_cands])
    order = np.lexsort((cj, ci))
    ci, cj = ci[order], cj[order]

    best, bi, bj = -1.0, 0, 1
    for i in np.unique(ci):
        js = cj[ci == i]
        d = _row_distances(x, int(i), js, 2.0)
        k = int(np.argmax(d))
        if d[k] > best:
            best, bi, bj = float(d[k]), int(i), int(js[k])
    return _result(best, bi, bj, 2.0)


def max_interpoint(matrix, spec: DistanceSpec | None = None) -> MaxDistanceResult:
    """Maximum interpoint l^q distance over all unordered row pairs."""
    spec = spec or DistanceSpec()
    m = as_matrix(matrix)
    if m.p < 2:
        raise InsufficientRowsError(f"need at least 2 rows, got p = {m.p}")
    if spec.kernel == "blocked_gram":
        return blocked_gram_max_sq(m, spec.tile)
    return _naive(m.values, spec.q)


def pair_distances(matrix, q: float = 2.0) -> np.ndarray:
    """All ``p(p-1)/2`` pair sums ``sum_k |X_ik - X_jk|^q`` in (i, j) lexicographic order."""
    _check_q(q)
    x = as_matrix(matrix).values
    p = x.shape[0]
    if p < 2:
        return np.empty(0)
    return np.concatenate([_row_distances(x, i, slice(i + 1, p), q) for i in range(p - 1)])

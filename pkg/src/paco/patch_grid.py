"""Patch extraction, average stitching, and consensus projections.

A :class:`PatchGrid` is the plan for decomposing an N-dimensional signal
into (possibly overlapping) rectangular patches: patch shape, strides and
the list of patch origins.  It induces three linear operators:

* ``extract``: signal -> m x n patch matrix, one vectorized patch per column;
* ``stitch``: patch matrix -> signal, averaging every sample over all the
  patches that cover it (sum then divide by the per-sample multiplicity);
* ``project_consensus``: extract(stitch(.)), the orthogonal projection of
  patch space onto the consensus subspace where overlapping patches agree.

Computing the consensus projection as a stitch/extract round trip avoids
ever materializing the m*n x m*n projection matrix; a dense oracle of that
matrix is provided for verification at small sizes only.

All operators work on plain float64 arrays; the patch matrix is an ordinary
``(m, n)`` ndarray.
"""

from __future__ import annotations

import itertools

import numpy as np

from .ndsignal import Mask, Signal

# One vectorized patch per column; shape (m, n).
PatchMatrix = np.ndarray

# Dense oracle refuses to build projectors larger than this many rows.
_ORACLE_MAX_SIZE = 10_000


class PatchGrid:
    """Patch decomposition plan over an N-dimensional signal.

    Origins may be any list of in-bounds patch start coordinates, as long
    as every sample is covered by at least one patch (that makes the
    per-sample multiplicity positive, so average stitching is well
    defined).  :func:`build_grid` generates the regular strided layout with
    origins in lexicographic order; the constructor itself preserves the
    given origin order so alternate patch enumerations remain expressible.
    """

    def __init__(self, signal_shape, patch_shape, origins, strides=None):
        self.signal_shape = tuple(int(e) for e in signal_shape)
        self.patch_shape = tuple(int(e) for e in patch_shape)
        self.strides = None if strides is None else tuple(int(s) for s in strides)
        if len(self.patch_shape) != len(self.signal_shape):
            raise ValueError("patch and signal dimensionality differ")
        if any(p < 1 or p > e for p, e in zip(self.patch_shape, self.signal_shape)):
            raise ValueError(
                f"patch shape {self.patch_shape} does not fit signal shape {self.signal_shape}"
            )
        origins = np.atleast_2d(np.asarray(origins, dtype=np.int64))
        if origins.shape[1] != len(self.signal_shape):
            raise ValueError("origin coordinates must match signal dimensionality")
        hi = np.array(self.signal_shape) - np.array(self.patch_shape)
        if origins.size and ((origins < 0).any() or (origins > hi).any()):
            raise ValueError("an origin places its patch outside the signal")
        if len(np.unique(origins, axis=0)) != len(origins):
            raise ValueError("duplicate patch origins")
        self.origins = origins

        # Row-major flat offsets of the patch elements relative to its origin.
        axis_strides = np.cumprod((self.signal_shape + (1,))[:0:-1])[::-1]
        grids = np.meshgrid(*(np.arange(p) for p in self.patch_shape), indexing="ij")
        self._patch_offsets = sum(
            g.reshape(-1) * s for g, s in zip(grids, axis_strides)
        ).astype(np.int64)
        self._origin_flat = origins @ axis_strides

        counts = np.bincount(
            (self._origin_flat[None, :] + self._patch_offsets[:, None]).reshape(-1),
            minlength=self.signal_size,
        )
        if (counts == 0).any():
            raise ValueError("every sample must be covered by at least one patch")
        self.multiplicity = counts.reshape(self.signal_shape)
        self._mult_flat = counts.astype(np.float64)
        self._no_overlap = bool((counts == 1).all())
        self._flat = None

    @property
    def m(self) -> int:
        """Patch length (number of samples per patch)."""
        return int(np.prod(self.patch_shape))

    @property
    def n(self) -> int:
        """Number of patches."""
        return len(self.origins)

    @property
    def signal_size(self) -> int:
        return int(np.prod(self.signal_shape))

    def flat_indices(self, cols=None) -> np.ndarray:
        """Flat signal index of every patch element, shape (m, len(cols))."""
        if cols is None:
            if self._flat is None:
                self._flat = self._origin_flat[None, :] + self._patch_offsets[:, None]
            return self._flat
        return self._origin_flat[None, cols] + self._patch_offsets[:, None]

    def __repr__(self):
        return (
            f"PatchGrid(signal_shape={self.signal_shape}, patch_shape={self.patch_shape}, "
            f"strides={self.strides}, n={self.n})"
        )


def build_grid(signal_shape, patch_shape, strides) -> PatchGrid:
    """Build the regular strided grid covering the whole signal.

    Per axis, origins sit at every multiple of the stride; when the stride
    does not land a patch flush with the end of the axis, one extra origin
    is added there so that every sample is covered.  Origins are emitted in
    lexicographic order, which fixes the patch-column order.
    """
    signal_shape = tuple(int(e) for e in signal_shape)
    patch_shape = tuple(int(e) for e in patch_shape)
    strides = tuple(int(s) for s in strides)
    if len({len(signal_shape), len(patch_shape), len(strides)}) != 1:
        raise ValueError("signal shape, patch shape and strides must have equal length")
    if any(s < 1 for s in strides):
        raise ValueError(f"strides must be >= 1, got {strides}")
    per_axis = []
    for extent, patch, stride in zip(signal_shape, patch_shape, strides):
        if patch > extent:
            raise ValueError(f"patch extent {patch} exceeds signal extent {extent}")
        last = extent - patch
        axis = list(range(0, last + 1, stride))
        if axis[-1] != last:
            axis.append(last)
        per_axis.append(axis)
    origins = np.array(list(itertools.product(*per_axis)), dtype=np.int64)
    return PatchGrid(signal_shape, patch_shape, origins, strides)


def _as_samples(grid: PatchGrid, signal) -> np.ndarray:
    arr = signal.samples if isinstance(signal, Signal) else np.asarray(signal, dtype=np.float64)
    if arr.shape != grid.signal_shape:
        raise ValueError(f"signal shape {arr.shape} does not match grid {grid.signal_shape}")
    return arr


def _check_dims(grid: PatchGrid, Y: np.ndarray, cols=None) -> np.ndarray:
    Y = np.asarray(Y, dtype=np.float64)
    n = grid.n if cols is None else len(cols)
    if Y.shape != (grid.m, n):
        raise ValueError(f"patch matrix shape {Y.shape} does not match grid ({grid.m}, {n})")
    return Y


def extract(grid: PatchGrid, signal, cols=None) -> PatchMatrix:
    """Extract patches as columns; column j is the patch at origin j, row-major.

    `cols` restricts extraction to a subset of patch columns.
    """
    samples = _as_samples(grid, signal)
    return samples.reshape(-1)[grid.flat_indices(cols)]


def scatter_sum(grid: PatchGrid, Y: PatchMatrix, cols=None) -> np.ndarray:
    """Sum patch-column values back onto the flat signal (no averaging).

    The accumulation is a single deterministic scatter, so results do not
    depend on any worker-thread count.
    """
    Y = _check_dims(grid, Y, cols)
    idx = grid.flat_indices(cols)
    return np.bincount(idx.reshape(-1), weights=Y.reshape(-1), minlength=grid.signal_size)


def stitch(grid: PatchGrid, Y: PatchMatrix) -> np.ndarray:
    """Average-stitch a patch matrix back into a signal-shaped array.

    Every sample is the arithmetic mean of its estimates across all covering
    patches: the scatter sum divided by the precomputed multiplicity.
    Non-overlapping grids skip the division (pure permutation scatter).
    """
    acc = scatter_sum(grid, Y)
    if not grid._no_overlap:
        acc /= grid._mult_flat
    return acc.reshape(grid.signal_shape)


def project_consensus(grid: PatchGrid, Y: PatchMatrix) -> PatchMatrix:
    """Orthogonal projection onto the consensus subspace: extract(stitch(Y))."""
    return extract(grid, stitch(grid, Y))


def project_consensus_omega(
    grid: PatchGrid, Y: PatchMatrix, mask: Mask, known_values, clip=None
) -> PatchMatrix:
    """Project onto consensus patches that also honor the observed samples.

    Stitches Y, overwrites observed samples with their known values, then
    re-extracts.  With ``clip=(lo, hi)`` the unobserved samples are also
    clamped to the range; known values are required to lie inside it.
    """
    known = np.asarray(mask.known, dtype=bool)
    if known.shape != grid.signal_shape:
        raise ValueError(f"mask shape {known.shape} does not match grid {grid.signal_shape}")
    values = _as_samples(grid, known_values)
    stitched = stitch(grid, Y)
    stitched[known] = values[known]
    if clip is not None:
        lo, hi = clip
        if known.any() and ((values[known] < lo).any() or (values[known] > hi).any()):
            raise ValueError(f"known samples fall outside the clip range [{lo}, {hi}]")
        missing = ~known
        stitched[missing] = np.clip(stitched[missing], lo, hi)
    return extract(grid, stitched)


def clip_project(grid: PatchGrid, Y: PatchMatrix, lo: float, hi: float) -> PatchMatrix:
    """Consensus projection followed by per-sample clamping to [lo, hi]."""
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    return extract(grid, np.clip(stitch(grid, Y), lo, hi))


def active_patches(grid: PatchGrid, mask: Mask) -> np.ndarray:
    """Indices of patches whose footprint contains at least one missing sample."""
    missing = np.asarray(mask.missing, dtype=bool)
    if missing.shape != grid.signal_shape:
        raise ValueError(f"mask shape {missing.shape} does not match grid {grid.signal_shape}")
    hit = missing.reshape(-1)[grid.flat_indices()].any(axis=0)
    return np.flatnonzero(hit)


def complete_patches(grid: PatchGrid, mask: Mask) -> np.ndarray:
    """Indices of patches containing no missing sample (complement of active)."""
    missing = np.asarray(mask.missing, dtype=bool)
    if missing.shape != grid.signal_shape:
        raise ValueError(f"mask shape {missing.shape} does not match grid {grid.signal_shape}")
    hit = missing.reshape(-1)[grid.flat_indices()].any(axis=0)
    return np.flatnonzero(~hit)


# ---------------------------------------------------------------------------
# Dense oracles (verification only; refuse to scale)
# ---------------------------------------------------------------------------

def dense_extraction_matrix(grid: PatchGrid) -> np.ndarray:
    """The m*n x N extraction matrix built from stacked canonical-basis rows.

    Row ``j*m + i`` selects the signal sample of patch j's i-th element;
    patch columns stack one after another (column-major patch-matrix order).
    """
    size = grid.m * grid.n
    if size > _ORACLE_MAX_SIZE:
        raise ValueError(f"oracle limited to {_ORACLE_MAX_SIZE} rows, requested {size}")
    R = np.zeros((size, grid.signal_size))
    flat = grid.flat_indices()
    for j in range(grid.n):
        for i in range(grid.m):
            R[j * grid.m + i, flat[i, j]] = 1.0
    return R


def dense_projection_oracle(grid: PatchGrid) -> np.ndarray:
    """Explicit consensus projector R (R^T R)^-1 R^T on vectorized patch matrices.

    Verification-only: the production path never materializes this matrix.
    Vectorization order matches ``Y.ravel(order='F')`` (patch columns
    stacked in sequence).
    """
    R = dense_extraction_matrix(grid)
    gram_inv = np.diag(1.0 / np.diag(R.T @ R))
    return R @ gram_inv @ R.T

"""Per-patch linear models: separable orthonormal DCT-II and dense dictionaries.

:class:`OrthoDct` applies the orthonormal DCT-II separably along every patch
axis, treating each patch-matrix column as a row-major vectorized patch.
Orthonormal scaling is the one choice for which the adjoint equals the
inverse, so analysis/synthesis round trips are exact and coefficient-space
proximal steps carry over to patch space unchanged.

:class:`Dictionary` is the general (possibly overcomplete, non-orthogonal)
synthesis model ``y = D a``.  The cached spectral-norm upper bound backs the
step-size rule of the linearized solver.
"""

from __future__ import annotations

import struct

import numpy as np
import scipy.fft

# Safety factor applied to power-iteration estimates so the cached value is
# an upper bound on the true spectral norm.
_NORM_SAFETY = 1.01


class OrthoDct:
    """Separable orthonormal DCT-II over row-major vectorized patches."""

    def __init__(self, patch_shape):
        self.patch_shape = tuple(int(p) for p in patch_shape)
        if any(p < 1 for p in self.patch_shape):
            raise ValueError(f"invalid patch shape {self.patch_shape}")
        self.m = int(np.prod(self.patch_shape))

    def _separable(self, Y: np.ndarray, dct_type: int, workers) -> np.ndarray:
        Y = np.asarray(Y, dtype=np.float64)
        if Y.ndim != 2 or Y.shape[0] != self.m:
            raise ValueError(f"expected ({self.m}, n) patch matrix, got {Y.shape}")
        n = Y.shape[1]
        arr = np.ascontiguousarray(Y.T).reshape((n,) + self.patch_shape)
        for axis in range(1, len(self.patch_shape) + 1):
            arr = scipy.fft.dct(arr, type=dct_type, axis=axis, norm="ortho", workers=workers)
        return np.ascontiguousarray(arr.reshape(n, self.m).T)

    def forward(self, Y: np.ndarray, workers: int = 1) -> np.ndarray:
        """Analysis: DCT-II coefficients of each patch column. Energy preserving."""
        return self._separable(Y, 2, workers)

    def inverse(self, A: np.ndarray, workers: int = 1) -> np.ndarray:
        """Synthesis: invert :meth:`forward` (DCT-III, the adjoint)."""
        return self._separable(A, 3, workers)

    def matrix(self) -> np.ndarray:
        """Dense m x m analysis matrix; ``forward(Y) == matrix() @ Y``."""
        out = np.ones((1, 1))
        for p in self.patch_shape:
            out = np.kron(out, dct_matrix(p))
        return out


def dct_matrix(n: int) -> np.ndarray:
    """Dense n-point orthonormal DCT-II matrix from the defining cosines."""
    k = np.arange(n)[:, None]
    i = np.arange(n)[None, :]
    mat = np.cos(np.pi * (2 * i + 1) * k / (2 * n)) * np.sqrt(2.0 / n)
    mat[0, :] /= np.sqrt(2.0)
    return mat


class Dictionary:
    """Dense synthesis dictionary ``y = D a`` with a cached spectral-norm bound.

    ``spectral_norm_bound`` may be supplied when the norm is known (1.0 for
    orthonormal atoms); otherwise it is estimated on first use by power
    iteration, inflated so it stays an upper bound.
    """

    def __init__(self, atoms, spectral_norm_bound: float | None = None):
        self.atoms = np.ascontiguousarray(atoms, dtype=np.float64)
        if self.atoms.ndim != 2 or self.atoms.shape[1] < 1:
            raise ValueError(f"atoms must be a 2-D m x p matrix, got shape {self.atoms.shape}")
        self._norm_bound = spectral_norm_bound

    @classmethod
    def identity(cls, m: int) -> "Dictionary":
        return cls(np.eye(m), spectral_norm_bound=1.0)

    @classmethod
    def from_orthonormal(cls, matrix) -> "Dictionary":
        """Wrap an orthonormal synthesis matrix (exact norm bound 1)."""
        matrix = np.asarray(matrix, dtype=np.float64)
        gram_err = np.abs(matrix.T @ matrix - np.eye(matrix.shape[1])).max()
        if gram_err > 1e-10:
            raise ValueError(f"matrix is not orthonormal (gram error {gram_err:.2e})")
        return cls(matrix, spectral_norm_bound=1.0)

    @property
    def m(self) -> int:
        return self.atoms.shape[0]

    @property
    def p(self) -> int:
        return self.atoms.shape[1]

    @property
    def spectral_norm_bound(self) -> float:
        if self._norm_bound is None:
            self._norm_bound = spectral_norm(self)
        return self._norm_bound

    def apply(self, A: np.ndarray) -> np.ndarray:
        """Synthesize patches from coefficients: D @ A."""
        A = np.asarray(A, dtype=np.float64)
        if A.shape[0] != self.p:
            raise ValueError(f"coefficient rows {A.shape[0]} do not match p={self.p}")
        return self.atoms @ A

    def adjoint(self, Y: np.ndarray) -> np.ndarray:
        """Apply the transpose: D^T @ Y."""
        Y = np.asarray(Y, dtype=np.float64)
        if Y.shape[0] != self.m:
            raise ValueError(f"patch rows {Y.shape[0]} do not match m={self.m}")
        return self.atoms.T @ Y


def spectral_norm(dictionary: Dictionary, iters: int = 500, tol: float = 1e-12) -> float:
    """Upper bound on ||D||_2 by power iteration on D^T D, inflated by 1.01."""
    D = dictionary.atoms
    if not np.any(D):
        raise ValueError("spectral norm of the zero matrix is undefined here")
    rng = np.random.default_rng(0)
    v = rng.standard_normal(D.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(iters):
        w = D.T @ (D @ v)
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            # v landed in the null space; restart from a fresh direction
            v = rng.standard_normal(D.shape[1])
            v /= np.linalg.norm(v)
            continue
        new_sigma = np.sqrt(norm_w)
        v = w / norm_w
        if abs(new_sigma - sigma) <= tol * max(new_sigma, 1.0):
            sigma = new_sigma
            break
        sigma = new_sigma
    return _NORM_SAFETY * sigma


# ---------------------------------------------------------------------------
# Dictionary file format: int64 m, int64 p, then m*p float64, all
# little-endian, atoms stored column-major.
# ---------------------------------------------------------------------------

def save_dictionary(dictionary: Dictionary, path) -> None:
    with open(path, "wb") as f:
        f.write(struct.pack("<qq", dictionary.m, dictionary.p))
        f.write(dictionary.atoms.astype("<f8").tobytes(order="F"))


def load_dictionary(path) -> Dictionary:
    with open(path, "rb") as f:
        header = f.read(16)
        if len(header) != 16:
            raise ValueError("truncated dictionary header")
        m, p = struct.unpack("<qq", header)
        if m < 1 or p < 1:
            raise ValueError(f"invalid dictionary dimensions {m} x {p}")
        payload = f.read(8 * m * p)
    if len(payload) != 8 * m * p:
        raise ValueError("truncated dictionary payload")
    atoms = np.frombuffer(payload, dtype="<f8").reshape((m, p), order="F")
    return Dictionary(atoms)

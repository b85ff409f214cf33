"""Shared fixtures and independent oracles for the solver-level tests.

Everything here recomputes expected values from first principles (dense
matrices, grid search, projected gradient) so the tested code paths never
feed their own answers back in.
"""

import numpy as np

from paco.inpaint import soft_threshold
from paco.ndsignal import Mask
from paco.patch_grid import (
    build_grid,
    dense_extraction_matrix,
    extract,
    project_consensus_omega,
)
from paco.solver import PenaltySchedule
from paco.transforms import OrthoDct


class Length4Fixture:
    """Weighted-l1 DCT problem on a length-4 signal, patch 3, stride 1.

    Samples 0 and 3 are observed; the two interior samples are free.  Small
    enough that the signal-space objective can be minimized by brute force.
    """

    def __init__(self):
        self.grid = build_grid([4], [3], [1])
        self.transform = OrthoDct((3,))
        self.M = self.transform.matrix()
        self.w = np.array([0.05, 1.0, 0.7])
        self.known = np.array([True, False, False, True])
        self.mask = Mask(self.known)
        self.x_known = np.array([1.0, 0.0, 0.0, -0.3])
        self.alpha = 1.0

    def objective(self, x1, x2):
        x = np.array([self.x_known[0], x1, x2, self.x_known[3]])
        Y = extract(self.grid, x)
        return float(np.sum(self.w[:, None] * np.abs(self.M @ Y)))

    def prox_patch(self, V, lam):
        # orthonormal transform pulls the shrinkage through unchanged
        return self.M.T @ soft_threshold(self.M @ V, self.w, lam)

    def prox_coef(self, V, lam):
        return soft_threshold(V, self.w, lam)

    def project(self, V):
        return project_consensus_omega(self.grid, V, self.mask, self.x_known)

    def cost_patch(self, Y):
        return float(np.sum(self.w[:, None] * np.abs(self.M @ Y)))

    def cost_coef(self, A):
        return float(np.sum(self.w[:, None] * np.abs(A)))

    def init_patches(self):
        x = self.x_known.copy()
        x[~self.known] = self.x_known[self.known].mean()
        return extract(self.grid, x)

    def frozen_schedule(self, lam=0.5):
        return PenaltySchedule(self.alpha, kappa=lam, frozen=True)

    def grid_search_minimum(self, stages=7, points=201):
        """Brute-force the two free samples by nested grid refinement."""
        lo1, hi1, lo2, hi2 = -2.0, 2.0, -2.0, 2.0
        for _ in range(stages):
            g1 = np.linspace(lo1, hi1, points)
            g2 = np.linspace(lo2, hi2, points)
            vals = np.zeros((points, points))
            for i, a in enumerate(g1):
                cols = np.stack([
                    np.full_like(g2, self.x_known[0]),
                    np.full_like(g2, a),
                    g2,
                    np.full_like(g2, self.x_known[3]),
                ])
                vals[i] = np.sum(self.w[:, None] * np.abs(self.M @ cols[0:3]), axis=0)
                vals[i] += np.sum(self.w[:, None] * np.abs(self.M @ cols[1:4]), axis=0)
            k = np.unravel_index(np.argmin(vals), vals.shape)
            b1, b2 = g1[k[0]], g2[k[1]]
            span1 = (hi1 - lo1) / (points - 1) * 4
            span2 = (hi2 - lo2) / (points - 1) * 4
            lo1, hi1, lo2, hi2 = b1 - span1, b1 + span1, b2 - span2, b2 + span2
        return float(b1), float(b2)


def box_qp_projection_oracle(grid, Y, lo=0.0, hi=1.0, iters=20000):
    """Projection of Y onto consensus-and-box by projected gradient.

    Consensus patch matrices are extractions of some signal x, and the box
    on every patch entry is a box on x, so the projection solves
    ``min_x ||R x - vec(Y)||^2  s.t.  lo <= x <= hi`` on the dense
    extraction matrix; step size 1/L with L the largest row multiplicity.
    """
    R = dense_extraction_matrix(grid)
    y = Y.ravel(order="F")
    L = 2.0 * grid.multiplicity.max()
    x = np.clip(np.linalg.lstsq(R, y, rcond=None)[0], lo, hi)
    for _ in range(iters):
        grad = 2.0 * R.T @ (R @ x - y)
        x = np.clip(x - grad / L, lo, hi)
    return extract(grid, x.reshape(grid.signal_shape))


def soft_threshold_scalar_oracle(a, w, lam, half_width=None, step=1e-4):
    """Minimize w|x| + (x-a)^2/(2 lam) on a fine grid around the candidates."""
    if half_width is None:
        half_width = abs(a) + lam * w + 1.0
    grid_pts = np.arange(-half_width, half_width + step, step)
    vals = w * np.abs(grid_pts) + (grid_pts - a) ** 2 / (2.0 * lam)
    return float(grid_pts[np.argmin(vals)])


def bandlimited_image(n=64):
    """Sum of three low-frequency cosines scaled to [0, 255]."""
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    img = (
        np.cos(2 * np.pi * (1.3 * i + 0.7 * j) / n)
        + 0.8 * np.cos(2 * np.pi * (2.1 * i - 1.1 * j) / n + 0.5)
        + 0.6 * np.cos(2 * np.pi * (0.4 * i + 2.6 * j) / n + 1.1)
    )
    return (img - img.min()) / (img.max() - img.min()) * 255.0


def center_hole_mask(n=64, hole=8):
    known = np.ones((n, n), dtype=bool)
    lo = (n - hole) // 2
    known[lo : lo + hole, lo : lo + hole] = False
    return Mask(known)


def harmonic_track(n_samples, window=4096):
    """Three-partial test track whose partials sit on window DCT bins.

    The bin indices are multiples of 64, which keeps every window of the
    stride-3968 layout phase-coherent, so complete windows are genuinely
    sparse under the patch DCT.
    """
    samp = np.arange(n_samples)
    partials = [(192, 12000.0), (256, 7000.0), (320, 4000.0)]
    wave = sum(
        amp * np.cos(np.pi * k * (2 * samp + 1) / (2 * window)) for k, amp in partials
    )
    return np.round(wave)

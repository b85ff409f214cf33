"""Patch-consensus signal restoration.

Generic patch extraction/stitching operators whose composition computes the
projection onto the set of mutually consistent patches, consensus ADMM and
linearized-ADMM solvers built on that projection, and a complete
weighted-l1 DCT inpainting method for 1-D (audio), 2-D (image) and 3-D
(video) signals.
"""

from .inpaint import (
    DctInpainter,
    InpaintConfig,
    LaplacianWeights,
    NoCompletePatchesError,
    estimate_weights,
    inpaint,
    inpaint_partial,
    soft_threshold,
)
from .metrics import MetricReport, bias, mad, psnr, report, rmse, ssim
from .ndsignal import (
    Mask,
    MediaFormatError,
    Signal,
    devectorize,
    load_audio,
    load_frames,
    load_image,
    load_mask,
    save_audio,
    save_frames,
    save_image,
    save_mask,
    vectorize,
)
from .patch_grid import (
    PatchGrid,
    active_patches,
    build_grid,
    clip_project,
    complete_patches,
    extract,
    project_consensus,
    project_consensus_omega,
    stitch,
)
from .solver import (
    DivergenceError,
    PenaltySchedule,
    SolverTrace,
    StopCriteria,
    admm_solve,
    check_stop,
    dykstra_project,
    ladmm_solve,
    penalty_update,
)
from .transforms import Dictionary, OrthoDct, load_dictionary, save_dictionary, spectral_norm

__version__ = "0.1.0"

__all__ = [
    "DctInpainter",
    "Dictionary",
    "DivergenceError",
    "InpaintConfig",
    "LaplacianWeights",
    "Mask",
    "MediaFormatError",
    "MetricReport",
    "NoCompletePatchesError",
    "OrthoDct",
    "PatchGrid",
    "PenaltySchedule",
    "Signal",
    "SolverTrace",
    "StopCriteria",
    "active_patches",
    "admm_solve",
    "bias",
    "build_grid",
    "check_stop",
    "clip_project",
    "complete_patches",
    "devectorize",
    "dykstra_project",
    "estimate_weights",
    "extract",
    "inpaint",
    "inpaint_partial",
    "ladmm_solve",
    "load_audio",
    "load_dictionary",
    "load_frames",
    "load_image",
    "load_mask",
    "mad",
    "penalty_update",
    "project_consensus",
    "project_consensus_omega",
    "psnr",
    "report",
    "rmse",
    "save_audio",
    "save_dictionary",
    "save_frames",
    "save_image",
    "save_mask",
    "soft_threshold",
    "spectral_norm",
    "ssim",
    "stitch",
    "vectorize",
]

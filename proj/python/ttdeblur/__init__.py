"""Python bindings for the torch-free ttdeblur core.

Arrays are float32 numpy arrays: planes are (H, W), flows, trajectories and
orientations (H, W, 2), conditions (H, W, 3) as (x, y, z), frames (H, W) or
(H, W, C).
"""

from ._ttdeblur import (
    InvalidInput,
    LoadError,
    OutOfRangeError,
    accumulate_test_trajectory,
    accumulate_training_trajectory,
    adapt_magnitude,
    assemble_condition,
    frame_sharpness_score,
    magnitude_ground_truth,
    orientation_field,
    psnr,
    read_bcf,
    read_flo,
    render_conditioned_blur,
    select_pseudo_sharp,
    selection_count,
    ssim,
    synthesize_blurred_frame,
    write_bcf,
    write_flo,
)

__all__ = [
    "InvalidInput",
    "LoadError",
    "OutOfRangeError",
    "accumulate_test_trajectory",
    "accumulate_training_trajectory",
    "adapt_magnitude",
    "assemble_condition",
    "frame_sharpness_score",
    "magnitude_ground_truth",
    "orientation_field",
    "psnr",
    "read_bcf",
    "read_flo",
    "render_conditioned_blur",
    "select_pseudo_sharp",
    "selection_count",
    "ssim",
    "synthesize_blurred_frame",
    "write_bcf",
    "write_flo",
]

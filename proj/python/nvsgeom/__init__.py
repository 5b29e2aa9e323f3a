"""Depth-based view warping, fusion and image metrics."""

from ._core import (
    Intrinsics,
    NvsError,
    Pose,
    SceneConfig,
    backproject,
    bilinear_sample,
    center_crop,
    compose,
    densify_mask,
    forward_warp_depth,
    fuse_average,
    fuse_predicted_mask,
    fuse_visibility,
    invert,
    inverse_warp,
    l1_error,
    load_depth_png,
    load_pose_file,
    lsgan_loss,
    perceptual_loss,
    project,
    recon_loss,
    save_depth_png,
    ssim,
    total_loss,
    transform_latent,
    transform_point,
    warp_from_source_depth,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"

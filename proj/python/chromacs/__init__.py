"""Compressive spectral imaging with chromatic PSFs and coded masks."""

from ._chromacs import (
    ChromacsError,
    SystemOperator,
    Transform,
    compression_ratio,
    focal_length_mm,
    gen_masks,
    load_cube,
    psf_stack,
    psnr,
    reconstruct,
    refractive_index,
    save_cube,
    synthetic_scene,
)

__all__ = [
    "ChromacsError",
    "SystemOperator",
    "Transform",
    "compression_ratio",
    "focal_length_mm",
    "gen_masks",
    "load_cube",
    "psf_stack",
    "psnr",
    "reconstruct",
    "refractive_index",
    "save_cube",
    "synthetic_scene",
]

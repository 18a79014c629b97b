"""Robust feedback ANC design toolkit (python bindings)."""

from ._anckit import (
    design,
    disk_constraint,
    evaluate_fir,
    fit,
    generate,
    grid_omegas,
    min_area_ellipse,
    smallest_circle,
    verify,
    waterbed,
)

__all__ = [
    "design",
    "disk_constraint",
    "evaluate_fir",
    "fit",
    "generate",
    "grid_omegas",
    "min_area_ellipse",
    "smallest_circle",
    "verify",
    "waterbed",
]

"""Reaction coordinates from transition manifolds embedded with kernels or random features."""

from ._tmkernel import (
    Bursts,
    Error,
    NumericalError,
    Potential,
    ValidationError,
    classical_mds,
    committor,
    diffusion_maps,
    distortion,
    empirical_gram,
    euclidean_distances,
    generator_eigs,
    grid_points,
    invariant_density,
    kernel_distance,
    rc_quality,
    sample_bursts,
    set_num_threads,
    spearman,
    whitney_embed,
)

__all__ = [
    "Bursts",
    "Error",
    "NumericalError",
    "Potential",
    "ValidationError",
    "classical_mds",
    "committor",
    "diffusion_maps",
    "distortion",
    "empirical_gram",
    "euclidean_distances",
    "generator_eigs",
    "grid_points",
    "invariant_density",
    "kernel_distance",
    "rc_quality",
    "sample_bursts",
    "set_num_threads",
    "spearman",
    "whitney_embed",
]

from .dataset import (
    Sample,
    Scaler,
    WaveDataset,
    default_bounds,
    generate_dataset,
    load_dataset,
    make_sample,
    save_dataset,
)
from .grid import GridSpec, boundary_index_arrays, extract_boundary, make_grid, restrict
from .sampling import WaveParams, lhs_sample
from .solver import energy_series, solve_wave, source_node, submodel_solve, velocity_field

__all__ = [
    "GridSpec",
    "Sample",
    "Scaler",
    "WaveDataset",
    "WaveParams",
    "boundary_index_arrays",
    "default_bounds",
    "energy_series",
    "extract_boundary",
    "generate_dataset",
    "lhs_sample",
    "load_dataset",
    "make_grid",
    "make_sample",
    "restrict",
    "save_dataset",
    "solve_wave",
    "source_node",
    "submodel_solve",
    "velocity_field",
]

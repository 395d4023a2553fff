"""Exact sparse kriging with tensor Markov kernels on (truncated) sparse grids."""

from .designs import (
    LevelIndex,
    TruncatedSparseGrid,
    classical_sg,
    component_design,
    find_tau,
    read_grid_csv,
    sg_increment,
    sg_size,
    truncated_sg,
    write_grid_csv,
)
from .errors import (
    InputError,
    KernelValidityError,
    NotPositiveDefiniteError,
    NumericalError,
    ResourceError,
    SizeOverflowError,
    TMSKError,
)
from .kernels import (
    AffineBrownian,
    BrownianBridge,
    BrownianMotion,
    DomainMap,
    GaussMarkov1D,
    Laplace,
    PQKernel,
    TMKernel,
    parse_kernel_spec,
    validate_markov,
)
from .kriging import (
    Dataset,
    NoiseModel,
    allocate_budget,
    dense_reference,
    fit,
    predict,
    predict_batch,
    sample_stats,
)
from .linalg import inv_1d, inv_lattice, inv_sg, inv_tsg, kinvk_1d, kinvk_lattice, kinvk_sg

__version__ = "0.1.0"

__all__ = [
    "LevelIndex",
    "TruncatedSparseGrid",
    "classical_sg",
    "component_design",
    "find_tau",
    "read_grid_csv",
    "sg_increment",
    "sg_size",
    "truncated_sg",
    "write_grid_csv",
    "InputError",
    "KernelValidityError",
    "NotPositiveDefiniteError",
    "NumericalError",
    "ResourceError",
    "SizeOverflowError",
    "TMSKError",
    "AffineBrownian",
    "BrownianBridge",
    "BrownianMotion",
    "DomainMap",
    "GaussMarkov1D",
    "Laplace",
    "PQKernel",
    "TMKernel",
    "parse_kernel_spec",
    "validate_markov",
    "Dataset",
    "NoiseModel",
    "allocate_budget",
    "dense_reference",
    "fit",
    "predict",
    "predict_batch",
    "sample_stats",
    "inv_1d",
    "inv_lattice",
    "inv_sg",
    "inv_tsg",
    "kinvk_1d",
    "kinvk_lattice",
    "kinvk_sg",
    "__version__",
]

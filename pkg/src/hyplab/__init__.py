"""Modal laboratory for a coupled hyperbolic-parabolic evolution family.

The generator is block diagonal over the spectrum of a positive self-adjoint
``A``; every block is a real 3x3 matrix parametrized by ``mu`` and the
exponent pair ``(alpha, beta)``.
"""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("hyplab")
except PackageNotFoundError:  # pragma: no cover - running from a source tree
    __version__ = "0.0.0"

from .blockcore import (
    BlockSpectrum,
    DomainError,
    ExponentPair,
    ModalBlock,
    block_conditioned_norm,
    block_eigenvalues,
    block_exponential,
    block_resolvent_norm,
    build_block,
    char_poly_coeffs,
    closed_form_coeffs,
)
from .operator_model import (
    GapProfile,
    OperatorModel,
    SpectrumSpec,
    default_spectrum,
    gap_profile,
    global_resolvent_norm,
    global_semigroup_norm,
    spectrum_modes,
)
from .regions import RegionLabel, StabilityPrediction, classify, predict
from .analysis import (
    BctReport,
    FitResult,
    SweepResult,
    bct_crosscheck,
    decay_sweep,
    fit_loglog,
    fit_semilog,
    region_map,
    resolvent_sweep,
)
from .kernels import BACKEND

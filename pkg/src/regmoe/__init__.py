"""Free-group word arithmetic, group-algebra norm estimates and output-entropy
bounds for the left/right shift channels on l2 of the free group."""

from .words import Word, WordTuple, parse, format_word, gen, IDENTITY
from .algebra import AlgebraElement, GaussianRational, convolve, restrict, l2_norm, trace, adjoint_elem, delta
from .specnorm import (
    NormEstimate,
    CoefficientMatrix,
    moment_lower,
    haagerup_upper,
    flatten_bilinear,
    thm2_upper,
    estimate_norm,
)
from .channels import (
    PureState,
    ChannelSpec,
    DensityMatrix,
    apply_unitary,
    complementary_output,
    direct_output_spectrum,
    j_conjugate,
)
from .entropy import (
    vn_entropy,
    renyi_entropy,
    hs_distance_check,
    hmin_lower_bound,
    reg_lower,
    violation_certificate,
    minimize_entropy,
    BoundReport,
)

__all__ = [
    "Word",
    "WordTuple",
    "parse",
    "format_word",
    "gen",
    "IDENTITY",
    "AlgebraElement",
    "GaussianRational",
    "convolve",
    "restrict",
    "l2_norm",
    "trace",
    "adjoint_elem",
    "delta",
    "NormEstimate",
    "CoefficientMatrix",
    "moment_lower",
    "haagerup_upper",
    "flatten_bilinear",
    "thm2_upper",
    "estimate_norm",
    "PureState",
    "ChannelSpec",
    "DensityMatrix",
    "apply_unitary",
    "complementary_output",
    "direct_output_spectrum",
    "j_conjugate",
    "vn_entropy",
    "renyi_entropy",
    "hs_distance_check",
    "hmin_lower_bound",
    "reg_lower",
    "violation_certificate",
    "minimize_entropy",
    "BoundReport",
]

__version__ = "0.1.0"

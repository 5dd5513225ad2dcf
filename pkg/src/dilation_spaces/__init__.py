"""Two-point dilation-homogeneous metric spaces: the canonical families, their
exact metrics, tree coding of the ultrametric family, dilations, and a
classifier that recovers the family and parameters from distance samples."""

from .classifier import ClassificationReport, TolerancePolicy, alpha_from_ball, classify, detect_type, max_equidistant_clique
from .coding import (
    Empty,
    Seq,
    address_distance,
    address_eta,
    build_ball_tree,
    canonical_decode,
    canonical_encode,
    encode_points,
    verify_coding,
)
from .dilations import (
    apply,
    compose,
    extend_partial,
    inverse,
    scale_of,
    two_point_witness,
)
from .distmat import DistanceMatrix, distance_matrix, gamma_observed
from .errors import (
    ClassificationFailed,
    DepthExhausted,
    DilationSpacesError,
    DivisionByZero,
    DomainError,
    InvalidArgument,
    InvalidDilation,
    InvariantViolation,
    PrecisionExhausted,
)
from .local_field import FieldSpec, LaurentSeries, field_make
from .products import euclidean_product, probe_product_homogeneity, sup_product
from .spaces import (
    PD,
    PF,
    PR,
    Cont,
    Fixed,
    Geo,
    Type0,
    Type1,
    Type2,
    Zero,
    distance,
    prime_decompose,
    sample,
    space_make,
)

__version__ = "0.1.0"

__all__ = [
    "ClassificationReport",
    "TolerancePolicy",
    "alpha_from_ball",
    "classify",
    "detect_type",
    "max_equidistant_clique",
    "Empty",
    "Seq",
    "address_distance",
    "address_eta",
    "build_ball_tree",
    "canonical_decode",
    "canonical_encode",
    "encode_points",
    "verify_coding",
    "apply",
    "compose",
    "extend_partial",
    "inverse",
    "scale_of",
    "two_point_witness",
    "DistanceMatrix",
    "distance_matrix",
    "gamma_observed",
    "ClassificationFailed",
    "DepthExhausted",
    "DilationSpacesError",
    "DivisionByZero",
    "DomainError",
    "InvalidArgument",
    "InvalidDilation",
    "InvariantViolation",
    "PrecisionExhausted",
    "FieldSpec",
    "LaurentSeries",
    "field_make",
    "euclidean_product",
    "probe_product_homogeneity",
    "sup_product",
    "PD",
    "PF",
    "PR",
    "Cont",
    "Fixed",
    "Geo",
    "Type0",
    "Type1",
    "Type2",
    "Zero",
    "distance",
    "prime_decompose",
    "sample",
    "space_make",
]

"""Deterministic inner-product quantization with guaranteed additive error.

Round unit vectors onto a rational grid, pack them into provably
near-minimal bit codes, and estimate or threshold inner products from
the codes alone, with a worst-case error bound that holds for every
input (no randomness, no failure probability).
"""

from .bounds import (
    AngleGap,
    SpaceBound,
    SphereCode,
    cap_area_bound,
    code_size_lb,
    greedy_sphere_code,
    space_lb,
    theta_gap,
    witness,
)
from .codec import (
    CodeWord,
    CompositionIndex,
    code_length,
    decode,
    decode_rows,
    encode,
    encode_rows,
    rank_composition,
    rank_compositions,
    unrank_composition,
    unrank_compositions,
)
from .container import Container, read_container, write_container
from .dataio import (
    VectorSet,
    general_inner,
    load,
    normalize,
    sample_pairs,
    save_csv,
    save_fvecs,
)
from .errors import (
    AllZero,
    BadMagic,
    BudgetExceeded,
    BudgetTooSmall,
    ChecksumMismatch,
    DegenerateAngle,
    DimensionMismatch,
    GapViolated,
    GridMismatch,
    IndexOutOfRange,
    InvalidEpsilon,
    InvalidThresholds,
    IpqzError,
    MalformedCode,
    NonFinite,
    NormTooLarge,
    ParseError,
    SetTooSmall,
    SpecIncompatible,
    TruncatedFile,
    VersionUnsupported,
    ZeroVector,
)
from .estimator import (
    Decision,
    FilterResult,
    PairVerdict,
    distinguish,
    estimate_inner,
    filter_pairs,
    worst_case_error,
)
from .grid import (
    GridParams,
    ZVector,
    as_delta,
    is_unit,
    quantize,
    quantize_rows,
    random_unit_rows,
    reconstruct,
    reconstruct_rows,
)
from .planner import (
    EstimatePlan,
    ThresholdSpec,
    plan_distinguish,
    plan_estimate,
    shared_grid_ok,
    threshold_for,
)

__version__ = "0.1.0"

"""Information-bottleneck curves, block-code oracles and the quantization
machinery that ties finite and continuous sources together."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BoundViolation,
    ConvergenceError,
    EmptyCurve,
    EmptySupportWarning,
    EpsilonTooSmall,
    IBRegionError,
    InfiniteDivergence,
    InvalidDistribution,
    OutOfRange,
    SizeExceeded,
)
from .probability import (  # noqa: E402
    JointPMF,
    Kernel,
    PMF,
    conditional_mutual_information,
    entropy,
    is_markov_chain,
    kl_divergence,
    linf_distance,
    mutual_information,
    product_extension,
)
from .ib_solver import IBCurve, IBCurvePoint, ib_curve, ib_iterate, ib_value_at_rate  # noqa: E402
from .gaussian import GaussianPair, analytic_ib_curve, discretize  # noqa: E402
from .quantizer import (  # noqa: E402
    GridSource,
    QuantizationReport,
    achievability_check,
    partition_simplex,
    quantize_source,
    verify_quantization_bounds,
)
from .oracle import CodePoint, enumerate_frontier, frontier_growth, witness_from_code  # noqa: E402
from .rectangles import converse_witness, letter_partition, rect_cover  # noqa: E402

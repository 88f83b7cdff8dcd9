"""Word metrics, metric estimates and subgroup distortion in wreath products."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    DifferentOrbits,
    GroupMismatchError,
    ResourceLimit,
    TooLarge,
    Unreachable,
    WordError,
)
from .groups import (  # noqa: F401
    Cyclic,
    DirectProduct,
    FreeAbelian,
    FreeGroup,
    GeneratingSet,
    Heisenberg,
    ball,
    evaluate_word,
    generating_set,
    multiply,
    parse_group,
    word_norm,
)
from .metric import (  # noqa: F401
    EstimateConfig,
    MetricSource,
    PointMetric,
    bfs_wreath_norm,
    estimate,
    exact_norm,
    fit_equivalence_constants,
    mst_weight,
    tsp_path_length,
)
from .wreath import (  # noqa: F401
    WreathElement,
    WreathProduct,
    evaluate_lamplighter_word,
    normal_form,
    parse_wreath,
    wreath_inverse,
    wreath_multiply,
    wreath_pow,
)

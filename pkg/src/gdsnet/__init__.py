"""Structure learning for networks of coupled dynamical systems.

Scalar observation series are discretised, delay-embedded and scored with
information criteria built from conditional entropies; DAG search then finds
the best-scoring coupling graph.
"""

from .dataset import (
    EmbeddingSpec,
    ObservationDataset,
    SymbolicDataset,
    TransitionRange,
    delay_embed,
    delay_vector,
    discretize,
    load_csv,
    valid_transition_range,
)
from .errors import (
    CycleError,
    DegenerateSeriesError,
    DivergenceError,
    EmptyError,
    EmptyTableError,
    GdsError,
    ParamError,
    ParseError,
    SelfLoopError,
    TooLargeError,
    TooShortError,
)
from .estimators import (
    ContextSpec,
    CountTable,
    build_counts,
    collective_te,
    conditional_entropy,
    knn_predict,
    select_embedding,
)
from .scoring import (
    CandidateGraph,
    Criterion,
    FamilyCache,
    ScoreReport,
    family_score,
    loglik_ratio,
    model_dimension,
    score,
)
from .search import (
    SearchConfig,
    SearchResult,
    enumerate_dags,
    exhaustive_search,
    greedy_search,
    is_acyclic,
    search,
    to_dot,
)
from .sim import GdsSpec, Trajectory, make_spec, simulate, validate_spec

__version__ = "0.1.0"

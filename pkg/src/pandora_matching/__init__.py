"""Exact toolkit for two-sided matching with Pandora-box inspection costs."""

from .algorithms import (
    BundledDescendingRunner,
    EnumerationBoundError,
    OrientedDescendingRunner,
    RunTrace,
    UnsupportedModelError,
    VertexBasedDescendingRunner,
    best_of_two,
    bundled_descending,
    edge_based_orientation,
    expected_welfare,
    oriented_descending,
    randomized_matching,
    vertex_based_descending,
)
from .boxes import IndexedBox, PandoraBox, bundle, capped_value, weitzman_index
from .distributions import DiscreteDistribution, convolve, expectation, surplus
from .instance import (
    EdgeSpec,
    MatchingInstance,
    Orientation,
    canonical_orientation,
    edge_to_basket,
    validate,
)
from .nested import (
    AnnotatedBasket,
    NestedTrace,
    OutcomeNode,
    amortized_contribution,
    annotate,
    check_non_exposure,
    descending_select,
    gamma_sequence,
    kappa_sequence,
)
from .oracle import PolicyValue, greedy_matching, max_weight_matching, optimal_welfare

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"

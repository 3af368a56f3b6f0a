"""Exact analysis of missing-at-random on finite full distributions."""

__version__ = "0.1.0"

from .distribution import (
    DensityFamily,
    FullDensity,
    Mechanism,
    PatternMixture,
    SelectionModel,
    marginal_r,
    marginal_y,
    pattern_mixture_factorize,
    recompose,
    recompose_pm,
    selection_factorize,
    validate,
)
from .mar_analysis import (
    MarVerdict,
    ObservedMechanism,
    Verdict,
    dependence_support,
    drawn_at_random_check,
    family_mar,
    is_everywhere_mar,
    is_realized_mar,
    observed_mechanism,
    p_r_given_yobs,
    reconstruct_full,
    restriction_range,
    shape_proportionality_check,
    standard_equation_holds,
)
from .sample_space import (
    DataSpace,
    MissingnessPattern,
    ObservableDataEvent,
    PatternSet,
    Point,
    Variable,
    enumerate_events,
    ob_equivalent,
    observable_event,
    project_missing,
    project_observed,
)

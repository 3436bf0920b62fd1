"""Quantitatively nonblocking supervisory control for finite automata."""
from .analysis import (
    FirstPassageProfile,
    MarkerCorrespondence,
    first_passage_profile,
    is_controllable,
    is_heterogeneously_quantitatively_completable,
    is_quantitatively_completable,
    is_quantitatively_nonblocking,
    marker_correspondence,
)
from .automaton import (
    Comparison,
    Event,
    Generator,
    complement,
    coreachable,
    empty,
    is_nonblocking,
    make_generator,
    mark_all,
    marked_language_compare,
    product,
    reachable,
    trim,
    union_marked,
    validate,
)
from .errors import (
    AlphabetMismatchError,
    AutomatonError,
    BoundsMismatchError,
    BudgetError,
    ContainmentError,
    EmptyMarkerSupportError,
    NondeterminismError,
    ParseError,
    StructureError,
    UnknownReferenceError,
)
from .io import export_dot, parse_automaton, serialize_automaton
from .synthesis import SynthesisTrace, sup_chqc, sup_cqc, sup_hqc, sup_qc, sup_qc_language, supcon
from .verdict import Verdict, Witness

__version__ = "0.1.0"

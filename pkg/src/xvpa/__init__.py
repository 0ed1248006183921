"""Learning datatype-aware visibly pushdown automata from XML documents."""

__version__ = "0.1.0"

from .automaton import (
    EXISTENTIAL,
    FIRST_TYPE_STRICT,
    Anomaly,
    Module,
    State,
    Verdict,
    Xvpa,
    check_single_exit,
    dfa_equivalent,
    is_deterministic,
    module_dfa,
    validate,
)
from .datatypes import DEFAULT, Datatype, DatatypeSystem, cl_inverse, first_type, types
from .estimator import XvpaAnomalyDetector
from .events import Close, Data, Open, StreamConfig, Text, abstract, iter_events, tokenize
from .learner import MergeParams, build_vppa, f_kl, infer, merge, minimize, to_xvpa
from .model_io import export_dot, load, save

__all__ = [
    "EXISTENTIAL",
    "FIRST_TYPE_STRICT",
    "Anomaly",
    "Module",
    "State",
    "Verdict",
    "Xvpa",
    "check_single_exit",
    "dfa_equivalent",
    "is_deterministic",
    "module_dfa",
    "validate",
    "DEFAULT",
    "Datatype",
    "DatatypeSystem",
    "cl_inverse",
    "first_type",
    "types",
    "XvpaAnomalyDetector",
    "Close",
    "Data",
    "Open",
    "StreamConfig",
    "Text",
    "abstract",
    "iter_events",
    "tokenize",
    "MergeParams",
    "build_vppa",
    "f_kl",
    "infer",
    "merge",
    "minimize",
    "to_xvpa",
    "export_dot",
    "load",
    "save",
]

"""Workbench for dynamic norms on multiagent systems: model, check, search.

The pieces: :mod:`normbench.model` holds the multiagent system and norm
automaton data model plus the norm-applied product; :mod:`normbench.ctl` the
branching-time checker; :mod:`normbench.synthesis` bounded norm search;
:mod:`normbench.recognition` the two norm-recognition deciders;
:mod:`normbench.ecosystem` the producer-consumer instance generator; and
:mod:`normbench.dsl` the text formats.  ``normbench.cli`` ties them together
behind a command line.
"""

from .model import (
    MAS,
    JointAction,
    KripkeStructure,
    NormativeSystem,
    ProductState,
    ValidationError,
    ValidationReport,
    Violation,
    apply_norm,
    available_joint_actions,
    identity_norm,
    make_static,
    reachable,
    validate_mas,
    validate_norm,
)
from .ctl import check, naive_sat_set, normalize, sat_set
from .synthesis import (
    BUDGET_EXCEEDED,
    FOUND,
    NONE_EXISTS,
    SynthesisBudget,
    SynthesisOutcome,
    synthesize_dynamic,
    synthesize_static,
    verify,
)
from .recognition import (
    NFA,
    Lasso,
    NormFamily,
    RecognitionVerdict,
    build_nfa_recognition_instance,
    build_sync_product,
    decide_nc1,
    decide_nc2,
    extend_observation,
    nc1_bruteforce,
    nc2_bruteforce,
    nfa_run_universal,
    replay_nc1_witness,
    replay_nc2_witness,
)

__all__ = [
    "MAS",
    "JointAction",
    "KripkeStructure",
    "NormativeSystem",
    "ProductState",
    "ValidationError",
    "ValidationReport",
    "Violation",
    "apply_norm",
    "available_joint_actions",
    "identity_norm",
    "make_static",
    "reachable",
    "validate_mas",
    "validate_norm",
    "check",
    "naive_sat_set",
    "normalize",
    "sat_set",
    "BUDGET_EXCEEDED",
    "FOUND",
    "NONE_EXISTS",
    "SynthesisBudget",
    "SynthesisOutcome",
    "synthesize_dynamic",
    "synthesize_static",
    "verify",
    "NFA",
    "Lasso",
    "NormFamily",
    "RecognitionVerdict",
    "build_nfa_recognition_instance",
    "build_sync_product",
    "decide_nc1",
    "decide_nc2",
    "extend_observation",
    "nc1_bruteforce",
    "nc2_bruteforce",
    "nfa_run_universal",
    "replay_nc1_witness",
    "replay_nc2_witness",
]

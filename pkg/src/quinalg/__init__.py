"""quinalg: a workbench for a small equational calculus of self-reproducing programs.

The calculus has one binary constructor for concatenation, one for program
application, and a handful of named constants.  This package provides the
syntax (`terms`), the rewrite engine and the standard rule systems
(`rewriting`), critical-pair / termination / loop analyses (`analysis`),
normal-form grammars and quine search (`normalforms`), the expression map and
its graph (`exprgraph`), a concrete string-machine model (`machine`), and a
command-line front end (`cli`).
"""

from .terms import (
    App,
    Const,
    D, E, W,
    FRAGMENTS,
    Node,
    ParseError,
    Pattern,
    Plus,
    Position,
    PositionError,
    ROOT,
    Term,
    Var,
    d_count,
    enumerate_terms,
    in_fragment,
    is_ground,
    occurs_e,
    parse_pattern,
    parse_term,
    positions,
    print_term,
    replace_at,
    shared_size,
    size,
    subterm_at,
    variables,
)
from .rewriting import (
    Answer,
    DEFAULT_FUEL,
    FuelExhausted,
    Normalized,
    Rule,
    RewriteSystem,
    SYS_D,
    SYS_DW,
    SYS_FULL,
    SYS_W,
    SYSTEMS,
    Step,
    Trace,
    all_one_step_rewrites,
    equal,
    format_position,
    is_normal_form,
    match,
    normalize,
    normalize_random,
    parse_rules_file,
    render_trace,
    rewrite_step,
    substitute,
)
from .analysis import (
    ConfluenceReport,
    CriticalPair,
    LoopSearch,
    LoopWitness,
    Precedence,
    TerminationReport,
    check_local_confluence,
    check_termination,
    critical_pairs,
    find_loop,
    parse_precedence,
    rpo_greater,
    search_precedence,
    unify,
)
from .normalforms import (
    Cycle,
    QuineResult,
    TwinClassification,
    TwinPair,
    case_shape,
    classify_twins_dw,
    enumerate_normal_forms,
    find_cycles,
    find_quines,
    nf_grammar_member,
    twin_pairs,
)
from .exprgraph import (
    ExpressionGraph,
    build_graph,
    export_graph,
    expresses,
    yang_sequence,
)
from .machine import (
    Diag,
    EquationReport,
    Instruction,
    Lit,
    MalformedProgram,
    Program,
    Quote,
    STANDARD_PROBES,
    behaviorally_equal,
    canonicalize,
    check_equations,
    decode,
    encode,
    interp_term,
    kleene_apply,
    quote_text,
    run,
)

__version__ = "0.1.0"

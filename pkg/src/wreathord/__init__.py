"""Exact order-preserving (and verbal) embeddings of the additive
rationals into 2-generator fully ordered groups built from iterated
wreath products, with a computable bi-invariant comparison."""

from .groundwork import (
    CyclicCoordinate,
    Ordering,
    Rational,
    UndecidedVerdict,
    Verdict,
    canonical_fraction,
    format_rational,
    parse_rational,
    rat_add,
    rat_cmp,
)
from .nilpotent import (
    CommutatorWord,
    MalcevElement,
    Nil2Group,
    PowerWord,
    UnsupportedWordSet,
    VerbalWitness,
    Word,
    classify_word,
    eval_word,
    nil2_compare,
    nil2_mul,
    parse_word,
    select_S,
    verify_witness,
)
from .wreath import (
    Atom,
    BaseFunction,
    FiberSteps,
    MixedAtomError,
    PointFn,
    RayStepFunction,
    StepFunction,
    WreathElement,
    WreathGroup,
    derived_commutator,
    stepfun_canonicalize,
    support_min_difference,
    tail_symbol,
    w_comm,
    w_compare,
    w_conj,
    w_eval,
    w_inv,
    w_mul,
    w_pow,
)
from .embed_rationals import (
    GNormalForm,
    GWord,
    QC,
    W,
    alpha,
    beta_tilde,
    big_phi,
    commutator_table,
    g_normal_form,
    g_word_element,
    phi,
    phi_element,
    subnormal_chain,
    tau,
    verify_order_laws,
    verify_section2,
    verify_theorem1,
)
# the embed_verbal *operation* stays namespaced (wreathord.embed_verbal.embed_verbal)
# so the submodule name is not shadowed
from .embed_verbal import (
    ConstructionViolation,
    VerbalContext,
    get_context,
    omega,
    omega_commutator,
    psi_from_witness,
    verify_theorem2,
)
from .reporting import CheckRecord, Report, emit_report, exit_status
from .exprs import ExprSyntaxError, build_element, parse_expr, print_expr
from .cli import Command, main, run_command

__version__ = "0.1.0"

"""pilerace: exact probabilities for the two-pile coin-flip race game.

Two players each flip a fair coin every turn to add ``a`` or ``b`` chips
to their own pile; whoever collects ``n`` chips first wins.  This package
computes the second player's win probability (equal or distinct targets),
win-within-k curves and expected game lengths -- exactly where the math
is exact, and with honest tail estimates where an infinite series has to
be truncated.  A vectorized, reproducibly seeded simulator provides an
independent Monte Carlo check, and a small recurrence lab verifies and
guesses the linear recurrences satisfied by the exact constants.
"""

from .closedforms import (
    catalan_count,
    passage_prob_m1p2,
    passage_prob_pm1,
    raney_count,
    survival_one,
    win_within_one,
)
from .numeric import (
    ApproxValue,
    PiLinear,
    as_fraction,
    parse_rational,
    pi_value,
    pilinear_eval,
    rational_pow2_scale,
    rational_str,
)
from .passage import (
    GameSpec,
    MoveSet,
    PassageTable,
    Reachability,
    build_passage_table,
    enumerate_first_passage,
    iter_passage,
    passage_gcd_reachability,
)
from .recurrence import LinearRecurrence, VerifyResult, guess_recurrence, verify_recurrence
from .series import (
    SeriesResult,
    TailPolicy,
    expected_duration,
    passage_product_sum,
    race_identity_residual,
    square_sum_sequence,
    square_sum_value,
    win_prob_direct,
    win_prob_squares,
    win_prob_targets,
    win_within,
    win_within_result,
)
from .simulate import SimConfig, SimReport, run_simulation

__version__ = "0.1.0"

__all__ = [
    "ApproxValue",
    "GameSpec",
    "LinearRecurrence",
    "MoveSet",
    "PassageTable",
    "PiLinear",
    "Reachability",
    "SeriesResult",
    "SimConfig",
    "SimReport",
    "TailPolicy",
    "VerifyResult",
    "as_fraction",
    "build_passage_table",
    "catalan_count",
    "enumerate_first_passage",
    "expected_duration",
    "guess_recurrence",
    "iter_passage",
    "parse_rational",
    "passage_gcd_reachability",
    "passage_product_sum",
    "passage_prob_m1p2",
    "passage_prob_pm1",
    "pi_value",
    "pilinear_eval",
    "race_identity_residual",
    "raney_count",
    "rational_pow2_scale",
    "rational_str",
    "run_simulation",
    "square_sum_sequence",
    "square_sum_value",
    "survival_one",
    "verify_recurrence",
    "win_prob_direct",
    "win_prob_squares",
    "win_prob_targets",
    "win_within",
    "win_within_one",
    "win_within_result",
]

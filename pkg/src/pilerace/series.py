"""Truncated evaluation of the race's infinite series with explicit
tail policies.

Everything here is a sum over the per-move first-passage probabilities
``r(n, k)`` and survival probabilities ``q(n, k)`` of a single walk:

* the second player's win probability, through the squared-passage
  series ``1/2 - (1/2) sum r**2`` or through the direct sum of
  ``q * r`` terms;
* the asymmetric-target variant ``sum q(n1, k) r(n2, k)``;
* the accounting residual ``p12 + p21 + sum r1 r2 - 1`` (zero when the
  race almost surely ends);
* the expected game length ``sum q**2``;
* exact win-within-k partial sums.

Tail policy, by drift of the move set: positive or negative drift gives
geometrically decaying terms, so the tail is bounded from the fitted
ratio of recent nonzero terms; zero drift gives power-law terms, so a
power-law exponent is fitted and a diverging series is recognized by a
persistently small exponent (or by the partial sum running away).  Each
converged result carries the tail estimate that justified stopping; the
test suite validates the estimates by doubling the truncation point.

Direct sums of ``q * r`` converge too slowly at zero drift to meet any
reasonable tolerance on their own: the truncation error is exactly half
the squared surviving mass plus half the tail of the ``r1 r2`` and
cross-difference series (a consequence of the telescoped partial sums).
The evaluators therefore add the exact split correction ``q1 q2 / 2``
whenever the race almost surely terminates, and the reported tail
estimate bounds the residual error of the corrected value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import count

from mpmath import mp, mpf

from .closedforms import catalan_count
from .passage import (
    GameSpec,
    MoveSet,
    Reachability,
    iter_passage,
    passage_gcd_reachability,
    reduce_zero_drift,
)

WORK_DPS = 40
EXACT_SUM_CAP = 10_000  # above this, terms go straight to decimals
DEFAULT_TOLERANCE = 1e-9
DEFAULT_MAX_K = 5_000
DEFAULT_MAX_K_ZERO_DRIFT = 200_000
DIVERGENCE_SUM_CAP = 1e6
DIVERGENCE_ALPHA = 1.05
FIT_WINDOW = 8
_MIN_FIT_TERMS = 5
_DIVERGENCE_MIN_K = 512
_DIVERGENCE_STRIKES = 3

CONVERGED = "converged"
DIVERGED = "diverged"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class TailPolicy:
    """Stopping rule for truncated summation.

    ``max_k`` defaults by drift: 200000 at zero drift (power-law tails),
    5000 otherwise (geometric tails).  ``min_k`` forces summation at
    least that far even if the tolerance is met earlier; it exists for
    honesty checks that re-run a converged series twice as far.
    """

    tolerance: float = DEFAULT_TOLERANCE
    max_k: int | None = None
    min_k: int = 0

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_k is not None and self.max_k < 16:
            raise ValueError("max_k must be at least 16")
        if self.min_k < 0:
            raise ValueError("min_k must be >= 0")

    def mode_for(self, moves: MoveSet) -> str:
        return "power" if moves.a + moves.b == 0 else "geometric"

    def resolved_max_k(self, moves: MoveSet) -> int:
        if self.max_k is not None:
            cap = self.max_k
        elif moves.a + moves.b == 0:
            cap = DEFAULT_MAX_K_ZERO_DRIFT
        else:
            cap = DEFAULT_MAX_K
        return max(cap, self.min_k)


@dataclass(frozen=True)
class SeriesResult:
    """Outcome of one truncated series evaluation.

    ``value`` is the estimate (exact partial sums are converted only at
    the end when the summation stayed exact); ``tail_estimate`` bounds
    what truncation may still be missing, and ``eval_error`` bounds
    arithmetic rounding.  A diverged verdict always carries a witness.
    """

    value: mpf
    truncation_k: int
    last_term: mpf
    tail_estimate: mpf
    verdict: str
    method: str
    witness: str | None = None
    no_winner: mpf | None = None
    eval_error: mpf = field(default_factory=lambda: mpf(0))

    def error_bound(self) -> mpf:
        return self.tail_estimate + self.eval_error

    def formatted(self, max_digits: int = 17) -> str:
        from .numeric import ApproxValue

        return ApproxValue(self.value, self.error_bound()).formatted(max_digits)

    def to_json_dict(self) -> dict:
        def num(x):
            if x is None:
                return None
            if not isinstance(x, mpf):
                with mp.workdps(WORK_DPS):
                    x = mpf(x)
            return mp.nstr(x, 24)

        return {
            "value": num(self.value),
            "display": self.formatted(),
            "truncation_k": self.truncation_k,
            "last_term": num(self.last_term),
            "tail_estimate": num(self.tail_estimate),
            "eval_error": num(self.eval_error),
            "verdict": self.verdict,
            "method": self.method,
            "witness": self.witness,
            "no_winner": num(self.no_winner),
        }


# ---------------------------------------------------------------------------
# term streams


def _stream_unit_exact(n: int):
    """(k, r, q) for the unit-step symmetric walk, exact rationals."""
    q = Fraction(1)
    for k in count(1):
        r = Fraction(catalan_count(n, k - 1), 1 << k)
        q -= r
        yield k, r, q


def _stream_unit_float(n: int):
    """(k, r, q) for the unit-step symmetric walk as mpf values.

    One multiplicative update per index: the closed-form counts reduce to
    a running central-binomial ratio, so this stream is O(1) per term and
    carries no big integers.  Intended for zero-drift summations truncated
    far beyond the exact-summation cap.
    """
    if n % 2 == 1:
        s = (n - 1) // 2
        parity = 1
    else:
        s = n // 2
        parity = 0
    u = mpf(4) ** (-s)  # C(2m, m-s) / 4**m at m = s
    m = s
    q = mpf(1)
    zero = mpf(0)
    for k in count(1):
        r = zero
        if k % 2 == parity:
            mm = k // 2 if parity == 0 else (k - 1) // 2
            while m < mm:
                u *= mpf((2 * m + 1) * (m + 1)) / (2 * (m + 1 - s) * (m + 1 + s))
                m += 1
            if parity == 1 and mm >= s:
                r = mpf(2 * s + 1) / (2 * (mm + s + 1)) * u
            elif parity == 0 and mm >= max(s, 1) and s > 0:
                r = mpf(s) / mm * u
        if r:
            q = q - r
        yield k, r, q


def rq_stream(spec: GameSpec, *, prefer_float: bool = False):
    """(k, r, q) for any move set.

    Zero-drift sets reduce to the unit-step walk and use closed forms
    (exact, or O(1)-per-term floats when ``prefer_float``).  Everything
    else runs the exact window DP.  DP-backed streams end once the walk
    is absorbed; closed-form streams are infinite.
    """
    reduced = reduce_zero_drift(spec)
    if reduced is not None:
        if prefer_float:
            return _stream_unit_float(reduced)
        return _stream_unit_exact(reduced)
    return iter_passage(spec)


# ---------------------------------------------------------------------------
# adaptive summation


class _Channel:
    """One summed series: exact-or-float accumulator plus a ring of
    recent nonzero block magnitudes for tail fitting.

    ``block`` consecutive indices are fitted as one unit; the asymmetric
    cross-difference series alternates sign with parity and only its
    2-blocks decay cleanly.
    """

    def __init__(self, exact: bool, block: int = 1, scale: float = 1.0):
        self.exact = exact
        self.block = block
        self.scale = scale  # weight of this channel's tail in the stop rule
        self.total_exact = Fraction(0)
        self.total_float = mpf(0)
        self.ring: list[tuple[float, float]] = []  # (k, |block sum|)
        self.nterms = 0
        self.last_nonzero = 0.0
        self.last_nonzero_k = 0
        self.structural_zero = False
        self._bsum = 0.0
        self._bstart = 1

    def add(self, k: int, term) -> None:
        if term:
            if self.exact:
                self.total_exact += term
            else:
                self.total_float += term
            self.nterms += 1
            t = float(term)
            self.last_nonzero = abs(t)
            self.last_nonzero_k = k
            self._bsum += t
        if k >= 1 and (k - self._bstart + 1) >= self.block:
            if self._bsum != 0.0:
                mid = k - (self.block - 1) / 2
                self.ring.append((mid, abs(self._bsum)))
                if len(self.ring) > FIT_WINDOW:
                    self.ring.pop(0)
            self._bsum = 0.0
            self._bstart = k + 1

    def value(self) -> mpf:
        if self.exact:
            return mpf(self.total_exact.numerator) / self.total_exact.denominator
        return self.total_float

    def sum_magnitude(self) -> float:
        if self.exact:
            num, den = self.total_exact.numerator, self.total_exact.denominator
            try:
                return abs(num / den)
            except OverflowError:
                return math.inf
        return abs(float(self.total_float))

    def tail(self, mode: str, k: int) -> tuple[mpf | None, float | None]:
        """(tail bound, fitted rho-or-alpha); None when not yet fittable."""
        if self.structural_zero or (self.nterms == 0 and self._bsum == 0.0):
            # nothing ever contributed; only trusted when marked structural
            return (mpf(0), None) if self.structural_zero else (None, None)
        if len(self.ring) < _MIN_FIT_TERMS:
            return None, None
        if mode == "geometric":
            rho = max(
                self.ring[i][1] / self.ring[i - 1][1]
                for i in range(1, len(self.ring))
                if self.ring[i - 1][1] > 0
            )
            if rho >= 1:
                return None, rho
            last = self.ring[-1][1]
            return mpf(last) * rho / (1 - rho), rho
        alpha = _power_fit(self.ring)
        if alpha is None or alpha <= 1:
            return None, alpha
        stride = self._stride()
        last = self.ring[-1][1]
        return mpf(last) * (k / stride) / (alpha - 1), alpha

    def _stride(self) -> float:
        if len(self.ring) < 2:
            return float(self.block)
        return max((self.ring[-1][0] - self.ring[0][0]) / (len(self.ring) - 1), 1.0)


def _power_fit(ring) -> float | None:
    """Least-squares slope of log|term| against log k; returns -slope."""
    pts = [(math.log(k), math.log(t)) for k, t in ring if k > 0 and t > 0]
    if len(pts) < 2:
        return None
    mx = sum(x for x, _ in pts) / len(pts)
    my = sum(y for _, y in pts) / len(pts)
    sxx = sum((x - mx) ** 2 for x, _ in pts)
    if sxx == 0:
        return None
    sxy = sum((x - mx) * (y - my) for x, y in pts)
    return -sxy / sxx


@dataclass
class _DriveResult:
    channels: list
    truncation_k: int
    tails: list
    verdict: str
    witness: str | None
    exhausted: bool

    def tail_at(self, i: int) -> mpf:
        """The i-th channel's tail bound: zero when the series provably
        ended, +inf when no fit was available (never on a converged run)."""
        t = self.tails[i]
        if t is not None:
            return mpf(t)
        if self.exhausted or self.channels[i].structural_zero:
            return mpf(0)
        return mpf("inf")


def _drive(
    terms,
    channels: list[_Channel],
    *,
    mode: str,
    tolerance: float,
    max_k: int,
    min_k: int = 0,
    divergence_watch: bool = False,
) -> _DriveResult:
    """Pull ``(k, contributions...)`` from ``terms`` until every channel's
    scaled tail estimate fits under ``tolerance`` (or divergence / the
    truncation cap is hit).  Convergence cannot be declared before
    ``min_k`` or while any channel's fit window is still filling.
    """
    next_check = 16
    strikes = 0
    k = 0
    witness = None
    verdict = None
    exhausted = False
    tails: list = [None] * len(channels)

    stream = iter(terms)
    while True:
        try:
            item = next(stream)
        except StopIteration:
            # the walk was absorbed: every later term is exactly zero
            exhausted = True
            verdict = CONVERGED
            tails = [mpf(0)] * len(channels)
            break
        k = item[0]
        for ch, term in zip(channels, item[1:]):
            ch.add(k, term)
        if k < next_check and k < max_k:
            continue
        next_check = min(next_check * 2, max_k)

        fits = [ch.tail(mode, k) for ch in channels]
        tails = [f[0] for f in fits]
        if divergence_watch and k >= _DIVERGENCE_MIN_K:
            lead = fits[0][1]
            if lead is not None and (
                (mode == "power" and lead <= DIVERGENCE_ALPHA)
                or (mode == "geometric" and lead >= 1 - 1e-6)
            ):
                strikes += 1
                if strikes >= _DIVERGENCE_STRIKES:
                    verdict = DIVERGED
                    kind = "exponent" if mode == "power" else "term ratio"
                    witness = (
                        f"fitted {kind} {lead:.4f} shows non-summable terms "
                        f"at k={k} (three consecutive checks)"
                    )
                    break
            else:
                strikes = 0
        if divergence_watch and channels[0].sum_magnitude() > DIVERGENCE_SUM_CAP:
            verdict = DIVERGED
            witness = f"partial sum exceeded {DIVERGENCE_SUM_CAP:g} at k={k}"
            break
        if k >= min_k and all(t is not None for t in tails):
            weighted = sum(float(t) * ch.scale for t, ch in zip(tails, channels))
            if weighted <= tolerance:
                verdict = CONVERGED
                break
        if k >= max_k:
            ok = all(t is not None for t in tails)
            if ok:
                weighted = sum(float(t) * ch.scale for t, ch in zip(tails, channels))
                verdict = CONVERGED if weighted <= tolerance else INCONCLUSIVE
            else:
                verdict = INCONCLUSIVE
            if verdict == INCONCLUSIVE:
                witness = f"tail not below tolerance by the truncation cap k={max_k}"
            break

    return _DriveResult(channels, k, tails, verdict, witness, exhausted)


def _eval_rounding_bound(channels) -> mpf:
    n = sum(ch.nterms for ch in channels)
    return mpf(10) ** (-(WORK_DPS - 5)) * (n + 1)


def _fit_block(*specs: GameSpec) -> int:
    """Tail fits operate on blocks spanning one congruence period of the
    participating walks, so that within-period term structure (zeros and
    non-monotone wiggles) cannot masquerade as non-decay."""
    block = 1
    for spec in specs:
        rv = passage_gcd_reachability(spec)
        if not rv.never and rv.deterministic_k is None:
            block = math.lcm(block, rv.modulus)
    return min(block, 128)


# ---------------------------------------------------------------------------
# evaluators


def _validated(spec: GameSpec) -> GameSpec:
    if not isinstance(spec, GameSpec):
        raise TypeError("spec must be a GameSpec")
    return spec


def _policy(policy: TailPolicy | None) -> TailPolicy:
    return policy if policy is not None else TailPolicy()


def _trivial_result(value, method: str, witness: str | None = None, no_winner=None) -> SeriesResult:
    return SeriesResult(
        value=mpf(value),
        truncation_k=0,
        last_term=mpf(0),
        tail_estimate=mpf(0),
        verdict=CONVERGED,
        method=method,
        witness=witness,
        no_winner=None if no_winner is None else mpf(no_winner),
    )


def _prefer_float(spec: GameSpec, policy: TailPolicy) -> bool:
    return (
        reduce_zero_drift(spec) is not None
        and policy.resolved_max_k(spec.moves) > EXACT_SUM_CAP
    )


def win_prob_squares(spec: GameSpec, policy: TailPolicy | None = None) -> SeriesResult:
    """Second player's win probability via ``1/2 - (1/2) sum r**2``.

    Valid only when the race almost surely ends (non-negative drift and a
    reachable target); otherwise the direct method must be used.
    """
    spec = _validated(spec)
    policy = _policy(policy)
    if spec.n == 0:
        return _trivial_result(0, "squares", witness="zero target: the first player has already won")
    if spec.moves.a + spec.moves.b < 0:
        raise ValueError(
            "the squared-passage identity needs non-negative drift; "
            "use the direct method for this move set"
        )
    if passage_gcd_reachability(spec).never:
        raise ValueError(
            "the squared-passage identity needs an almost surely finished race, "
            "but these moves can never reach the target"
        )
    mode = policy.mode_for(spec.moves)
    max_k = policy.resolved_max_k(spec.moves)
    exact = not _prefer_float(spec, policy)
    with mp.workdps(WORK_DPS):
        stream = rq_stream(spec, prefer_float=not exact)
        terms = ((k, r * r) for k, r, _ in stream)
        ch = _Channel(exact, block=_fit_block(spec), scale=0.5)
        res = _drive(
            terms, [ch], mode=mode, tolerance=policy.tolerance,
            max_k=max_k, min_k=policy.min_k,
        )
        if exact:
            value_fr = (1 - ch.total_exact) / 2
            value = mpf(value_fr.numerator) / value_fr.denominator
        else:
            value = (1 - ch.total_float) / 2
        return SeriesResult(
            value=value,
            truncation_k=res.truncation_k,
            last_term=mpf(ch.last_nonzero) / 2,
            tail_estimate=res.tail_at(0) / 2,
            verdict=res.verdict,
            method="squares",
            witness=res.witness,
            eval_error=_eval_rounding_bound([ch]),
        )


def win_prob_direct(spec: GameSpec, policy: TailPolicy | None = None) -> SeriesResult:
    """Second player's win probability via the direct sum of ``q * r``.

    Valid for every drift.  When the race almost surely ends, the exact
    split correction ``q_K**2 / 2`` is added (the not-yet-decided mass
    divides evenly in the limit); the truncation error of the corrected
    value is exactly half the remaining ``r**2`` tail, which is what the
    tail estimate bounds.  With negative drift no correction applies and
    the never-decided probability estimate ``q_K**2`` is reported.
    """
    spec = _validated(spec)
    policy = _policy(policy)
    if spec.n == 0:
        return _trivial_result(0, "direct", witness="zero target: the first player has already won")
    if passage_gcd_reachability(spec).never:
        return _trivial_result(
            0, "direct", witness="moves can never reach the target", no_winner=1,
        )
    mode = policy.mode_for(spec.moves)
    max_k = policy.resolved_max_k(spec.moves)
    exact = not _prefer_float(spec, policy)
    negative_drift = spec.moves.a + spec.moves.b < 0
    block = _fit_block(spec)
    with mp.workdps(WORK_DPS):
        stream = rq_stream(spec, prefer_float=not exact)
        last_q = Fraction(1) if exact else mpf(1)

        def terms():
            nonlocal last_q
            for k, r, q in stream:
                last_q = q
                # the fit channel carries r**2: it bounds the corrected
                # value's error under non-negative drift, and decays like
                # the q*r terms under negative drift
                yield k, q * r, r * r

        main = _Channel(exact, block=block, scale=0.0)
        fit = _Channel(exact, block=block, scale=0.5)
        res = _drive(
            terms(), [main, fit], mode=mode, tolerance=policy.tolerance,
            max_k=max_k, min_k=policy.min_k,
        )
        no_winner = None
        if negative_drift:
            correction = 0
            nw = last_q * last_q
            no_winner = mpf(nw.numerator) / nw.denominator if exact else mpf(nw)
        else:
            correction = last_q * last_q / 2
        if exact:
            value_fr = main.total_exact + correction
            value = mpf(value_fr.numerator) / value_fr.denominator
        else:
            value = main.total_float + correction
        return SeriesResult(
            value=value,
            truncation_k=res.truncation_k,
            last_term=mpf(main.last_nonzero),
            tail_estimate=res.tail_at(1) / 2,
            verdict=res.verdict,
            method="direct",
            witness=res.witness,
            no_winner=no_winner,
            eval_error=_eval_rounding_bound([main, fit]),
        )


def _zip_two_streams(s1, s2):
    """Zip two (k, r, q) streams, padding an absorbed walk with zeros."""
    done1 = done2 = False
    r1 = q1 = r2 = q2 = Fraction(0)
    k = 0
    while True:
        k += 1
        if not done1:
            try:
                _, r1, q1 = next(s1)
            except StopIteration:
                done1, r1, q1 = True, type(q1)(0), type(q1)(0)
        else:
            r1 = q1 = type(q1)(0)
        if not done2:
            try:
                _, r2, q2 = next(s2)
            except StopIteration:
                done2, r2, q2 = True, type(q2)(0), type(q2)(0)
        else:
            r2 = q2 = type(q2)(0)
        if done1 and done2:
            return
        yield k, r1, q1, r2, q2


def _targets_reachability_overlap(rv1: Reachability, rv2: Reachability) -> bool:
    """Whether any index can carry simultaneous first-passage mass."""
    if rv1.never or rv2.never:
        return False
    if rv1.deterministic_k is not None:
        return rv2.allows(rv1.deterministic_k)
    if rv2.deterministic_k is not None:
        return rv1.allows(rv2.deterministic_k)
    if rv1.max_k is not None and rv1.max_k < rv2.min_k:
        return False
    if rv2.max_k is not None and rv2.max_k < rv1.min_k:
        return False
    lcm = math.lcm(rv1.modulus, rv2.modulus)
    return any(
        (t % rv1.modulus) in rv1.residues and (t % rv2.modulus) in rv2.residues
        for t in range(lcm)
    )


def win_prob_targets(
    n1: int, n2: int, moves: MoveSet, policy: TailPolicy | None = None
) -> SeriesResult:
    """Probability the second player reaches ``n2`` before the first
    player reaches ``n1``: the sum of ``q(n1, k) r(n2, k)``.

    When the race almost surely ends, the sum is evaluated in its
    symmetrized form ``(1 - sum r1 r2 + sum (q1 r2 - q2 r1)) / 2``,
    algebraically equal to the direct partial sum plus the split
    correction ``q1 q2 / 2``; both component series have summable tails
    even at zero drift, where the direct terms alone decay too slowly.
    The cross-difference series is fitted on blocks of two indices
    because consecutive terms alternate in sign across parities.
    """
    if n1 < 1 or n2 < 1:
        raise ValueError("both targets must be >= 1")
    policy = _policy(policy)
    spec1 = GameSpec(moves, n1)
    spec2 = GameSpec(moves, n2)
    rv1 = passage_gcd_reachability(spec1)
    rv2 = passage_gcd_reachability(spec2)
    if rv2.never:
        return _trivial_result(
            0, "asymmetric", witness="the second walk can never reach its target",
        )
    mode = policy.mode_for(moves)
    max_k = policy.resolved_max_k(moves)
    negative_drift = moves.a + moves.b < 0
    exact = not (_prefer_float(spec1, policy) or _prefer_float(spec2, policy))
    zero = Fraction(0) if exact else mpf(0)

    with mp.workdps(WORK_DPS):
        stream = _zip_two_streams(
            rq_stream(spec1, prefer_float=not exact),
            rq_stream(spec2, prefer_float=not exact),
        )
        block = _fit_block(spec1, spec2)
        if negative_drift:
            last_qs = [Fraction(1), Fraction(1)] if exact else [mpf(1), mpf(1)]

            def direct_terms():
                for k, r1, q1, r2, q2 in stream:
                    last_qs[0], last_qs[1] = q1, q2
                    yield k, q1 * r2

            ch = _Channel(exact, block=block, scale=1.0)
            res = _drive(
                direct_terms(), [ch], mode=mode, tolerance=policy.tolerance,
                max_k=max_k, min_k=policy.min_k,
            )
            nw = last_qs[0] * last_qs[1]
            return SeriesResult(
                value=ch.value(),
                truncation_k=res.truncation_k,
                last_term=mpf(ch.last_nonzero),
                tail_estimate=res.tail_at(0),
                verdict=res.verdict,
                method="asymmetric",
                witness=res.witness,
                no_winner=mpf(nw.numerator) / nw.denominator if exact else mpf(nw),
                eval_error=_eval_rounding_bound([ch]),
            )

        overlap = _targets_reachability_overlap(rv1, rv2)

        def sym_terms():
            for k, r1, q1, r2, q2 in stream:
                rr = r1 * r2 if overlap else zero
                delta = zero
                if n1 != n2:
                    if r2:
                        delta = q1 * r2
                    if r1:
                        delta = delta - q2 * r1
                yield k, rr, delta

        rr_ch = _Channel(exact, block=block, scale=0.5)
        rr_ch.structural_zero = not overlap
        delta_ch = _Channel(exact, block=block, scale=0.5)
        delta_ch.structural_zero = n1 == n2
        res = _drive(
            sym_terms(), [rr_ch, delta_ch], mode=mode, tolerance=policy.tolerance,
            max_k=max_k, min_k=policy.min_k,
        )
        if exact:
            value_fr = (1 - rr_ch.total_exact + delta_ch.total_exact) / 2
            value = mpf(value_fr.numerator) / value_fr.denominator
        else:
            value = (1 - rr_ch.total_float + delta_ch.total_float) / 2
        tail = (res.tail_at(0) + res.tail_at(1)) / 2
        return SeriesResult(
            value=value,
            truncation_k=res.truncation_k,
            last_term=mpf(max(rr_ch.last_nonzero, delta_ch.last_nonzero)) / 2,
            tail_estimate=tail,
            verdict=res.verdict,
            method="asymmetric",
            witness=res.witness,
            eval_error=_eval_rounding_bound([rr_ch, delta_ch]),
        )


def passage_product_sum(
    n1: int, n2: int, moves: MoveSet, policy: TailPolicy | None = None
) -> SeriesResult:
    """The simultaneous-win series ``sum r(n1, k) r(n2, k)``."""
    if n1 < 1 or n2 < 1:
        raise ValueError("both targets must be >= 1")
    policy = _policy(policy)
    spec1, spec2 = GameSpec(moves, n1), GameSpec(moves, n2)
    rv1, rv2 = passage_gcd_reachability(spec1), passage_gcd_reachability(spec2)
    overlap = _targets_reachability_overlap(rv1, rv2)
    if not overlap:
        return _trivial_result(
            0, "asymmetric", witness="no index admits simultaneous first passage",
        )
    mode = policy.mode_for(moves)
    max_k = policy.resolved_max_k(moves)
    exact = not (_prefer_float(spec1, policy) or _prefer_float(spec2, policy))
    with mp.workdps(WORK_DPS):
        stream = _zip_two_streams(
            rq_stream(spec1, prefer_float=not exact),
            rq_stream(spec2, prefer_float=not exact),
        )
        terms = ((k, r1 * r2) for k, r1, _, r2, _ in stream)
        ch = _Channel(exact, block=_fit_block(spec1, spec2), scale=1.0)
        res = _drive(
            terms, [ch], mode=mode, tolerance=policy.tolerance,
            max_k=max_k, min_k=policy.min_k,
        )
        return SeriesResult(
            value=ch.value(),
            truncation_k=res.truncation_k,
            last_term=mpf(ch.last_nonzero),
            tail_estimate=res.tail_at(0),
            verdict=res.verdict,
            method="asymmetric",
            witness=res.witness,
            eval_error=_eval_rounding_bound([ch]),
        )


def race_identity_residual(
    n1: int, n2: int, moves: MoveSet, policy: TailPolicy | None = None
) -> SeriesResult:
    """|p12 + p21 + sum r1 r2 - 1|, each summand evaluated independently.

    The identity holds exactly when one of the players almost surely
    wins, so negative drift (or an unreachable target) is rejected.
    """
    if moves.a + moves.b < 0:
        raise ValueError("the accounting identity needs non-negative drift")
    if passage_gcd_reachability(GameSpec(moves, max(n1, n2))).never:
        raise ValueError("the accounting identity needs a reachable target")
    policy = _policy(policy)
    p12 = win_prob_targets(n1, n2, moves, policy)
    p21 = win_prob_targets(n2, n1, moves, policy)
    both = passage_product_sum(n1, n2, moves, policy)
    with mp.workdps(WORK_DPS):
        residual = abs(p12.value + p21.value + both.value - 1)
    verdicts = {p12.verdict, p21.verdict, both.verdict}
    verdict = CONVERGED if verdicts == {CONVERGED} else INCONCLUSIVE
    return SeriesResult(
        value=residual,
        truncation_k=max(p12.truncation_k, p21.truncation_k, both.truncation_k),
        last_term=both.last_term,
        tail_estimate=p12.tail_estimate + p21.tail_estimate + both.tail_estimate,
        verdict=verdict,
        method="asymmetric",
        witness=None if verdict == CONVERGED else "a component series did not converge",
        eval_error=p12.eval_error + p21.eval_error + both.eval_error,
    )


def expected_duration(spec: GameSpec, policy: TailPolicy | None = None) -> SeriesResult:
    """Expected number of rounds until someone wins: ``sum_k q(n, k)**2``
    over k >= 0.

    The verdict is diverged when the fitted decay of the terms is not
    summable: exponent <= 1 at zero drift (the symmetric race has
    harmonic-tail terms for every target) or a term ratio pinned at 1
    under negative drift (a positive fraction of races never ends).
    """
    spec = _validated(spec)
    policy = _policy(policy)
    if spec.n == 0:
        return _trivial_result(0, "duration", witness="zero target: the race is over before any move")
    drift = spec.moves.a + spec.moves.b
    mode = policy.mode_for(spec.moves)
    max_k = policy.resolved_max_k(spec.moves)
    exact = not _prefer_float(spec, policy)
    watch = drift <= 0
    with mp.workdps(WORK_DPS):
        stream = rq_stream(spec, prefer_float=not exact)

        def terms():
            one = Fraction(1) if exact else mpf(1)
            yield 0, one
            for k, _, q in stream:
                yield k, q * q

        ch = _Channel(exact, block=_fit_block(spec), scale=1.0)
        res = _drive(
            terms(), [ch], mode=mode, tolerance=policy.tolerance,
            max_k=max_k, min_k=policy.min_k, divergence_watch=watch,
        )
        tail = res.tail_at(0)
        if res.verdict == DIVERGED:
            tail = mpf("inf")
        return SeriesResult(
            value=ch.value(),
            truncation_k=res.truncation_k,
            last_term=mpf(ch.last_nonzero),
            tail_estimate=tail,
            verdict=res.verdict,
            method="duration",
            witness=res.witness,
            eval_error=_eval_rounding_bound([ch]),
        )


def win_within(spec: GameSpec, k: int) -> Fraction:
    """Exact probability the second player wins within ``k`` moves: the
    partial sum of ``q * r`` through ``k`` as a rational."""
    spec = _validated(spec)
    if spec.n < 1:
        raise ValueError("target must be >= 1")
    if k < 1:
        raise ValueError("k must be >= 1")
    total = Fraction(0)
    for j, r, q in rq_stream(spec):
        if j > k:
            break
        total += q * r
    return total


def win_within_result(spec: GameSpec, k: int) -> SeriesResult:
    """The win-within-k partial sum packaged with its (zero) tail."""
    exact = win_within(spec, k)
    with mp.workdps(WORK_DPS):
        value = mpf(exact.numerator) / exact.denominator
    return SeriesResult(
        value=value,
        truncation_k=k,
        last_term=mpf(0),
        tail_estimate=mpf(0),
        verdict=CONVERGED,
        method="within_k",
    )


def square_sum_value(
    moves: MoveSet, n: int, policy: TailPolicy | None = None
) -> SeriesResult:
    """The sum ``sum_k r(n, k)**2`` for a single target."""
    if n < 1:
        raise ValueError("target must be >= 1")
    policy = _policy(policy)
    spec = GameSpec(moves, n)
    mode = policy.mode_for(moves)
    max_k = policy.resolved_max_k(moves)
    exact = not _prefer_float(spec, policy)
    with mp.workdps(WORK_DPS):
        stream = rq_stream(spec, prefer_float=not exact)
        terms = ((k, r * r) for k, r, _ in stream)
        ch = _Channel(exact, block=_fit_block(spec), scale=1.0)
        res = _drive(
            terms, [ch], mode=mode, tolerance=policy.tolerance,
            max_k=max_k, min_k=policy.min_k,
        )
        return SeriesResult(
            value=ch.value(),
            truncation_k=res.truncation_k,
            last_term=mpf(ch.last_nonzero),
            tail_estimate=res.tail_at(0),
            verdict=res.verdict,
            method="square_sum",
            witness=res.witness,
            eval_error=_eval_rounding_bound([ch]),
        )


def square_sum_sequence(
    moves: MoveSet, n_max: int, policy: TailPolicy | None = None
) -> list[SeriesResult]:
    """The sums ``sum_k r(n, k)**2`` for n = 1..n_max."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    return [square_sum_value(moves, n, policy) for n in range(1, n_max + 1)]

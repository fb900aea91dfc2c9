"""Exact first-passage engine for two-move coin-flip walks.

A player's pile follows a walk that adds ``a`` or ``b`` chips per move,
each with probability 1/2.  For a target ``n`` the engine computes, as
exact rationals,

* ``r[k]``: probability the pile first reaches ``>= n`` on move ``k``
  (overshoot counts; there is no exact-landing mode), and
* ``q[k]``: probability the pile stays strictly below ``n`` through move
  ``k`` (``q[0] = 1``),

by stepping the full distribution of surviving positions.  Position
weights are big-integer numerators over the common denominator ``2**k``,
so one step costs a single pass over the position window and no per-cell
gcd work.  The window is never truncated probabilistically: tables are
exact by construction.

The degenerate target ``n = 0`` is refused here; a zero-target race is
decided before anyone moves and is answered directly by the series layer.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .numeric import parse_rational, rational_str


@dataclass(frozen=True, slots=True)
class MoveSet:
    """The two equally likely per-move increments; order-insensitive."""

    a: int
    b: int

    def __post_init__(self):
        for v in (self.a, self.b):
            if isinstance(v, bool) or not isinstance(v, int):
                raise TypeError(f"moves must be integers, got {v!r}")
        if self.a > self.b:
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)

    @classmethod
    def parse(cls, text: str) -> "MoveSet":
        """Parse "a,b" (e.g. "-1,2")."""
        parts = text.split(",")
        if len(parts) != 2:
            raise ValueError(f"expected two comma-separated integers, got {text!r}")
        return cls(int(parts[0].strip()), int(parts[1].strip()))

    @property
    def drift(self) -> Fraction:
        """Mean increment per move, (a + b) / 2."""
        return Fraction(self.a + self.b, 2)

    @property
    def deterministic(self) -> bool:
        return self.a == self.b

    def __str__(self) -> str:
        return f"{self.a},{self.b}"


@dataclass(frozen=True, slots=True)
class GameSpec:
    """A move set together with the chip target ``n >= 0``."""

    moves: MoveSet
    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, int):
            raise TypeError(f"target must be an integer, got {self.n!r}")
        if self.n < 0:
            raise ValueError(f"target must be >= 0, got {self.n}")


def iter_passage(spec: GameSpec):
    """Yield ``(k, r_k, q_k)`` exactly for k = 1, 2, ...

    The generator ends once the surviving mass hits zero (every later r
    and q is exactly zero), which happens iff both moves are positive or
    the walk is deterministic.
    """
    if spec.n < 1:
        raise ValueError(
            "the passage engine needs a target >= 1; a zero-target race is "
            "decided before any move"
        )
    a, b = spec.moves.a, spec.moves.b
    n = spec.n
    span = b - a
    counts = [1]  # weights over positions [lo, lo + len - 1], denominator 2**k
    lo = 0
    pow2 = 1
    k = 0
    while True:
        k += 1
        pow2 <<= 1
        nlo = lo + a
        nhi = min(lo + len(counts) - 1 + b, n - 1)
        new = [0] * max(nhi - nlo + 1, 0)
        win = 0
        for i, c in enumerate(counts):
            if not c:
                continue
            pa = nlo + i
            if pa >= n:
                win += c
            else:
                new[i] += c
            if pa + span >= n:
                win += c
            else:
                new[i + span] += c
        survived = sum(new)
        yield k, Fraction(win, pow2), Fraction(survived, pow2)
        if survived == 0:
            return
        counts = new
        lo = nlo


@dataclass(frozen=True)
class PassageTable:
    """Exact ``r`` and ``q`` arrays for one game, k = 0..k_max.

    ``r[0]`` is a structural zero (there is no move 0); ``q[0] = 1``.
    Completed tables are immutable and safe to share between workers.
    """

    spec: GameSpec
    k_max: int
    r: tuple
    q: tuple

    def to_json_dict(self) -> dict:
        return {
            "moves": [self.spec.moves.a, self.spec.moves.b],
            "n": self.spec.n,
            "k_max": self.k_max,
            "r": [rational_str(x) for x in self.r[1:]],
            "q": [rational_str(x) for x in self.q],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, text: str) -> "PassageTable":
        d = json.loads(text)
        spec = GameSpec(MoveSet(d["moves"][0], d["moves"][1]), d["n"])
        r = (Fraction(0),) + tuple(parse_rational(s) for s in d["r"])
        q = tuple(parse_rational(s) for s in d["q"])
        return cls(spec, d["k_max"], r, q)

    def write_csv(self, fileobj) -> None:
        """Rows of (k, exact r, exact q, 15-digit decimals) for inspection."""
        writer = csv.writer(fileobj)
        writer.writerow(["k", "r", "q", "r_decimal", "q_decimal"])
        for k in range(self.k_max + 1):
            r_s = rational_str(self.r[k]) if k else ""
            r_d = f"{float(self.r[k]):.15g}" if k else ""
            writer.writerow([k, r_s, rational_str(self.q[k]), r_d, f"{float(self.q[k]):.15g}"])


def build_passage_table(spec: GameSpec, k_max: int) -> PassageTable:
    """Exact table of r and q up to ``k_max`` moves."""
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    r = [Fraction(0)]
    q = [Fraction(1)]
    for k, rk, qk in iter_passage(spec):
        r.append(rk)
        q.append(qk)
        if k == k_max:
            break
    while len(r) <= k_max:  # walk was absorbed early: all later mass is gone
        r.append(Fraction(0))
        q.append(Fraction(0))
    return PassageTable(spec, k_max, tuple(r), tuple(q))


def enumerate_first_passage(moves: MoveSet, n: int, k_max: int) -> list:
    """Exact r values for k <= k_max by exhausting all 2**k_max move
    sequences.  Independent of the window DP; intended as an oracle.
    """
    if n < 1:
        raise ValueError("target must be >= 1")
    if not 1 <= k_max <= 20:
        raise ValueError("exhaustive enumeration is limited to k_max in 1..20")
    seqs = np.arange(1 << k_max, dtype=np.int64)
    bits = (seqs[:, None] >> np.arange(k_max, dtype=np.int64)) & 1
    steps = np.where(bits == 1, moves.b, moves.a).astype(np.int32)
    sums = np.cumsum(steps, axis=1)
    hit = sums >= n
    reached = hit.any(axis=1)
    first = hit.argmax(axis=1)
    counts = np.bincount(first[reached], minlength=k_max)
    return [Fraction(0)] + [
        Fraction(int(counts[k - 1]), 1 << k_max) for k in range(1, k_max + 1)
    ]


@dataclass(frozen=True)
class Reachability:
    """Congruence structure of the k with possibly nonzero r.

    ``never`` means no move index can win (both moves non-positive).  For a
    deterministic walk the single winning index is ``deterministic_k``.
    Otherwise r can be nonzero only for ``k % modulus in residues`` with
    ``k >= min_k`` (and ``k <= max_k`` when both moves are positive).  The
    condition is necessary, not sufficient; it is what tail estimation
    needs to skip structural zeros.
    """

    modulus: int
    residues: frozenset
    min_k: int
    max_k: int | None
    never: bool = False
    deterministic_k: int | None = None

    def allows(self, k: int) -> bool:
        if self.never or k < 1:
            return False
        if self.deterministic_k is not None:
            return k == self.deterministic_k
        if k < self.min_k or (self.max_k is not None and k > self.max_k):
            return False
        return (k % self.modulus) in self.residues

    @property
    def stride(self) -> float:
        """Mean spacing between admissible indices."""
        if self.never or not self.residues:
            return 1.0
        return self.modulus / len(self.residues)

    def to_json_dict(self) -> dict:
        return {
            "modulus": self.modulus,
            "residues": sorted(self.residues),
            "min_k": self.min_k,
            "max_k": self.max_k,
            "never": self.never,
            "deterministic_k": self.deterministic_k,
        }


def passage_gcd_reachability(spec: GameSpec) -> Reachability:
    """Diagnose which move indices can carry nonzero first-passage mass."""
    a, b = spec.moves.a, spec.moves.b
    n = spec.n
    if n == 0 or b <= 0:
        # n = 0: the race is over before any move; b <= 0: the pile never climbs.
        return Reachability(1, frozenset(), 1, None, never=True)
    if a == b:
        k0 = -(-n // b)  # ceil(n / b)
        return Reachability(1, frozenset({0}), k0, k0, deterministic_k=k0)
    min_k = -(-n // b)
    max_k = (n - 1) // a + 1 if a >= 1 else None
    g = b - a
    # A win at move k happens from a previous position s in [n-b, n-1], and
    # every position after j moves is congruent to b*j (mod b-a).
    window = range(n - b, n)
    residues = frozenset(
        t for t in range(g) if any((b * (t - 1) - s) % g == 0 for s in window)
    )
    return Reachability(g, residues, min_k, max_k)


def check_claim_partial_sums(table: PassageTable) -> None:
    """Assert the exact structural identities of a finished table.

    Raises AssertionError if mass conservation is broken anywhere:
    r[k] = q[k-1] - q[k], q[K] = 1 - sum(r), and the telescoped
    sum((q[k-1] + q[k]) * r[k]) = 1 - q[K]**2.
    """
    K = table.k_max
    total_r = Fraction(0)
    telescoped = Fraction(0)
    for k in range(1, K + 1):
        assert table.r[k] == table.q[k - 1] - table.q[k], f"delta-q identity fails at k={k}"
        total_r += table.r[k]
        telescoped += (table.q[k - 1] + table.q[k]) * table.r[k]
    assert table.q[K] == 1 - total_r, "q != 1 - sum(r)"
    assert telescoped == 1 - table.q[K] ** 2, "telescoped sum != 1 - q[K]^2"


def _ceil_div(p: int, q: int) -> int:
    return -(-p // q)


def reduce_zero_drift(spec: GameSpec) -> int | None:
    """For a zero-drift move set {-c, c}, the walk is the unit-step
    symmetric walk scaled by c: return the equivalent unit-step target
    ceil(n / c).  Returns None for any other move set (including {0, 0})."""
    a, b = spec.moves.a, spec.moves.b
    if a + b == 0 and b > 0:
        return _ceil_div(spec.n, b)
    return None


def unit_step_equivalent(spec: GameSpec) -> GameSpec | None:
    red = reduce_zero_drift(spec)
    if red is None:
        return None
    return GameSpec(MoveSet(-1, 1), red)

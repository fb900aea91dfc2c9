"""Command-line front end.

Every computation the library offers is exposed as a subcommand, each
emitting an OutputRecord: the echoed command, its inputs, the results
(exact strings, decimals with only guaranteed digits, error bounds) and
a one-line provenance note saying which reference object the numbers
reproduce.  ``--json`` switches to the machine-readable rendering of the
same record; the two renderings always agree because the human table is
generated from the JSON dictionary.

Exit codes: 0 on success, 1 on usage errors, 2 when a series fails to
converge or a verification suite finds a broken identity.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from mpmath import mp, mpf

from . import reference
from .numeric import rational_str
from .passage import GameSpec, MoveSet, build_passage_table, passage_gcd_reachability
from .recurrence import verify_recurrence
from .series import (
    CONVERGED,
    DIVERGED,
    SeriesResult,
    TailPolicy,
    expected_duration,
    race_identity_residual,
    square_sum_sequence,
    square_sum_value,
    win_prob_direct,
    win_prob_squares,
    win_prob_targets,
    win_within,
    win_within_result,
)
from .simulate import SimConfig, run_simulation

USAGE_ERROR = 1
CONVERGENCE_ERROR = 2


@dataclass
class OutputRecord:
    """One command's machine- and human-readable output."""

    command: str
    inputs: dict
    results: dict
    provenance: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "command": self.command,
                "inputs": self.inputs,
                "results": self.results,
                "provenance": self.provenance,
            },
            indent=2,
            sort_keys=False,
        )

    @classmethod
    def from_json(cls, text: str) -> "OutputRecord":
        d = json.loads(text)
        return cls(d["command"], d["inputs"], d["results"], d["provenance"])

    def render_human(self) -> str:
        lines = [f"# {self.command}: {self.provenance}"]
        inputs = ", ".join(f"{k}={v}" for k, v in self.inputs.items())
        lines.append(f"inputs: {inputs}")
        for key, value in self.results.items():
            if isinstance(value, list) and value and isinstance(value[0], dict):
                lines.append(f"{key}:")
                lines.extend(_render_table(value))
            elif isinstance(value, dict):
                lines.append(f"{key}:")
                for k2, v2 in value.items():
                    lines.append(f"  {k2}: {_scalar(v2)}")
            else:
                lines.append(f"{key}: {_scalar(value)}")
        return "\n".join(lines)


def _scalar(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _render_table(rows: list[dict]) -> list[str]:
    columns = list(rows[0].keys())
    cells = [[_scalar(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(columns)]
    out = ["  " + "  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    for row in cells:
        out.append("  " + "  ".join(v.ljust(w) for v, w in zip(row, widths)))
    return out


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the contract here is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _add_series_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=None, help="tail tolerance (default 1e-9)")
    p.add_argument("--max-k", type=int, default=None, help="truncation cap")
    p.add_argument("--min-k", type=int, default=0, help="force summation at least this far")
    p.add_argument("--digits", type=int, default=17, help="max displayed digits")


def _policy_from(args) -> TailPolicy:
    kwargs = {}
    if args.tol is not None:
        kwargs["tolerance"] = args.tol
    if args.max_k is not None:
        kwargs["max_k"] = args.max_k
    if args.min_k:
        kwargs["min_k"] = args.min_k
    return TailPolicy(**kwargs)


def _series_dict(res: SeriesResult, digits: int = 17) -> dict:
    d = res.to_json_dict()
    d["display"] = res.formatted(digits)
    return d


def build_parser() -> _Parser:
    parser = _Parser(prog="pilerace", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, targets=("--n",)):
        p.add_argument("--moves", type=MoveSet.parse, required=True,
                       help="the two per-move increments, e.g. --moves=-1,1")
        for t in targets:
            p.add_argument(t, type=int, required=True)
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("pn", help="second player's win probability, equal targets")
    common(p)
    _add_series_flags(p)

    p = sub.add_parser("pmn", help="second player's win probability, distinct targets")
    common(p, targets=("--n1", "--n2"))
    _add_series_flags(p)

    p = sub.add_parser("within", help="exact win-within-k probability")
    common(p)
    p.add_argument("--k", type=int, required=True)

    p = sub.add_parser("duration", help="expected number of rounds until someone wins")
    common(p)
    _add_series_flags(p)

    p = sub.add_parser("table", help="reproduce a verification table")
    p.add_argument("which", choices=["table1", "case_minus1_2", "t_values"])
    p.add_argument("--json", action="store_true")
    p.add_argument("--csv", type=str, default=None, help="also write the rows as CSV")
    _add_series_flags(p)

    p = sub.add_parser("passage", help="exact r/q table for one walk")
    common(p)
    p.add_argument("--max-k", type=int, default=40)
    p.add_argument("--csv", type=str, default=None, help="write the full table as CSV")

    p = sub.add_parser("simulate", help="Monte Carlo estimate from full games")
    common(p, targets=("--n1", "--n2"))
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--horizon", type=int, default=None,
                   help="censoring horizon in rounds (default by drift)")

    p = sub.add_parser("verify", help="run the identity/oracle verification suites")
    p.add_argument("suite", nargs="?", default="all",
                   choices=["all", "identities", "oracles", "residuals", "recurrence"])
    p.add_argument("--json", action="store_true")
    _add_series_flags(p)

    return parser


# ---------------------------------------------------------------------------
# subcommand bodies


def _exit_code_for(*results: SeriesResult) -> int:
    for r in results:
        if r.verdict not in (CONVERGED, DIVERGED):
            return CONVERGENCE_ERROR
    return 0


def _cmd_pn(args) -> tuple[OutputRecord, int]:
    spec = GameSpec(args.moves, args.n)
    policy = _policy_from(args)
    direct = win_prob_direct(spec, policy)
    results = {"direct": _series_dict(direct, args.digits)}
    outputs = [direct]
    if args.moves.a + args.moves.b >= 0 and spec.n >= 1 and not passage_gcd_reachability(spec).never:
        squares = win_prob_squares(spec, policy)
        results["squares"] = _series_dict(squares, args.digits)
        with mp.workdps(30):
            results["agreement_delta"] = mp.nstr(abs(squares.value - direct.value), 8)
        outputs.append(squares)
    record = OutputRecord(
        command="pn",
        inputs={"moves": str(args.moves), "n": args.n},
        results=results,
        provenance="second player's win probability for equal targets",
    )
    return record, _exit_code_for(*outputs)


def _cmd_pmn(args) -> tuple[OutputRecord, int]:
    policy = _policy_from(args)
    res = win_prob_targets(args.n1, args.n2, args.moves, policy)
    record = OutputRecord(
        command="pmn",
        inputs={"moves": str(args.moves), "n1": args.n1, "n2": args.n2},
        results={"p": _series_dict(res, args.digits)},
        provenance="second player's win probability for distinct targets",
    )
    return record, _exit_code_for(res)


def _cmd_within(args) -> tuple[OutputRecord, int]:
    spec = GameSpec(args.moves, args.n)
    exact = win_within(spec, args.k)
    res = win_within_result(spec, args.k)
    record = OutputRecord(
        command="within",
        inputs={"moves": str(args.moves), "n": args.n, "k": args.k},
        results={
            "exact": rational_str(exact),
            "decimal": res.formatted(17),
        },
        provenance="probability the second player wins within k moves",
    )
    return record, 0


def _cmd_duration(args) -> tuple[OutputRecord, int]:
    spec = GameSpec(args.moves, args.n)
    res = expected_duration(spec, _policy_from(args))
    record = OutputRecord(
        command="duration",
        inputs={"moves": str(args.moves), "n": args.n},
        results={"expected_rounds": _series_dict(res, args.digits)},
        provenance="expected number of rounds until someone wins",
    )
    return record, _exit_code_for(res)


def _fmt_delta(x, y) -> str:
    with mp.workdps(30):
        return mp.nstr(abs(mpf(x) - mpf(y)), 6)


def _cmd_table(args) -> tuple[OutputRecord, int]:
    policy = _policy_from(args)
    rows: list[dict] = []
    outputs: list[SeriesResult] = []
    if args.which == "table1":
        moves = MoveSet(-1, 1)
        for (n1, n2), form in sorted(reference.TARGET_TABLE_PM1.items()):
            res = win_prob_targets(n1, n2, moves, policy)
            exact = form.approx(20)
            rows.append(
                {
                    "n1": n1,
                    "n2": n2,
                    "exact_form": str(form),
                    "exact_decimal": exact.formatted(17),
                    "computed": res.formatted(args.digits),
                    "abs_delta": _fmt_delta(res.value, exact.value),
                }
            )
            outputs.append(res)
        provenance = "win-probability table for distinct targets, unit-step race"
    elif args.which == "t_values":
        moves = MoveSet(-1, 1)
        series = square_sum_sequence(moves, 6, policy)
        for n, res in enumerate(series, start=1):
            form = reference.SQUARE_SUMS_PM1[n]
            exact = form.approx(20)
            rows.append(
                {
                    "n": n,
                    "exact_form": str(form),
                    "exact_decimal": exact.formatted(17),
                    "computed": res.formatted(args.digits),
                    "abs_delta": _fmt_delta(res.value, exact.value),
                }
            )
            outputs.append(res)
        provenance = "squared-passage sums for the unit-step race"
    else:  # case_minus1_2
        moves = MoveSet(-1, 2)
        for n, (sumsq_ref, p_ref) in sorted(reference.MINUS12_REFERENCE.items()):
            t_res = square_sum_value(moves, n, policy)
            p_res = win_prob_squares(GameSpec(moves, n), policy)
            rows.append(
                {
                    "n": n,
                    "sum_squares": t_res.formatted(args.digits),
                    "sum_squares_ref": sumsq_ref,
                    "p": p_res.formatted(args.digits),
                    "p_ref": p_ref,
                    "abs_delta_p": _fmt_delta(p_res.value, mpf(p_ref)),
                }
            )
            outputs.extend([t_res, p_res])
        provenance = "win probabilities for the {-1,2} move set"
    record = OutputRecord(
        command="table",
        inputs={"which": args.which},
        results={"rows": rows},
        provenance=provenance,
    )
    if args.csv:
        _write_rows_csv(args.csv, rows)
    return record, _exit_code_for(*outputs)


def _write_rows_csv(path: str, rows: list[dict]) -> None:
    import csv

    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def _cmd_passage(args) -> tuple[OutputRecord, int]:
    spec = GameSpec(args.moves, args.n)
    table = build_passage_table(spec, args.max_k)
    reach = passage_gcd_reachability(spec)
    shown = min(args.max_k, 20)
    rows = [
        {
            "k": k,
            "r": rational_str(table.r[k]) if k else "",
            "q": rational_str(table.q[k]),
            "r_decimal": f"{float(table.r[k]):.15g}" if k else "",
            "q_decimal": f"{float(table.q[k]):.15g}",
        }
        for k in range(shown + 1)
    ]
    results = {
        "rows": rows,
        "reachability": reach.to_json_dict(),
    }
    if args.max_k > shown:
        results["note"] = f"showing k <= {shown} of {args.max_k}; use --csv for the full table"
    if args.csv:
        with open(args.csv, "w", newline="") as f:
            table.write_csv(f)
    record = OutputRecord(
        command="passage",
        inputs={"moves": str(args.moves), "n": args.n, "max_k": args.max_k},
        results=results,
        provenance="exact first-passage and survival probabilities",
    )
    return record, 0


def _cmd_simulate(args) -> tuple[OutputRecord, int]:
    cfg = SimConfig(
        moves=args.moves,
        n1=args.n1,
        n2=args.n2,
        trials=args.trials,
        seed=args.seed,
        max_moves_per_game=args.horizon,
    )
    report = run_simulation(cfg)
    record = OutputRecord(
        command="simulate",
        inputs={
            "moves": str(args.moves),
            "n1": args.n1,
            "n2": args.n2,
            "trials": args.trials,
            "seed": args.seed,
            "horizon": cfg.horizon,
        },
        results=report.to_json_dict(),
        provenance="Monte Carlo estimates from full simulated games",
    )
    return record, 0


# ---------------------------------------------------------------------------
# verification suites


def _verify_identities(policy: TailPolicy, lines: list[dict]) -> bool:
    from .passage import check_claim_partial_sums

    ok = True
    move_sets = [MoveSet(-1, 1), MoveSet(-1, 2), MoveSet(1, 2), MoveSet(-2, 1), MoveSet(0, 1)]
    for moves in move_sets:
        for n in range(1, 5):
            table = build_passage_table(GameSpec(moves, n), 100)
            try:
                check_claim_partial_sums(table)
                lines.append({"check": f"mass identities moves={moves} n={n} K=100", "ok": True})
            except AssertionError as exc:
                lines.append(
                    {"check": f"mass identities moves={moves} n={n} K=100", "ok": False,
                     "detail": str(exc)}
                )
                ok = False
    return ok


def _verify_oracles(policy: TailPolicy, lines: list[dict]) -> bool:
    from .closedforms import passage_prob_m1p2, passage_prob_pm1, survival_one, win_within_one

    ok = True
    table = build_passage_table(GameSpec(MoveSet(-1, 1), 1), 100)
    good = all(survival_one(k) == table.q[k] for k in range(101))
    good &= all(
        win_within_one(k) == win_within(GameSpec(MoveSet(-1, 1), 1), k) for k in range(1, 101)
    )
    lines.append({"check": "unit-step closed forms equal exact partial sums (k<=100)", "ok": bool(good)})
    ok &= good
    for n in range(1, 6):
        t = build_passage_table(GameSpec(MoveSet(-1, 1), n), 40)
        good = all(passage_prob_pm1(n, k) == t.r[k] for k in range(1, 41))
        lines.append({"check": f"catalan counts equal unit-step DP (n={n}, k<=40)", "ok": bool(good)})
        ok &= good
    for n in range(1, 5):
        t = build_passage_table(GameSpec(MoveSet(-1, 2), n), 30)
        good = all(passage_prob_m1p2(n, k) == t.r[k] for k in range(1, 31))
        lines.append({"check": f"raney counts equal {{-1,2}} DP (n={n}, k<=30)", "ok": bool(good)})
        ok &= good
    return ok


def _verify_residuals(policy: TailPolicy, lines: list[dict]) -> bool:
    ok = True
    for moves in (MoveSet(-1, 1), MoveSet(-1, 2)):
        for n1 in range(1, 4):
            for n2 in range(1, 4):
                res = race_identity_residual(n1, n2, moves, policy)
                good = res.verdict == CONVERGED and float(res.value) < 3 * policy.tolerance
                lines.append(
                    {
                        "check": f"accounting residual moves={moves} n1={n1} n2={n2}",
                        "ok": bool(good),
                        "residual": mp.nstr(res.value, 6),
                    }
                )
                ok &= good
    return ok


def _verify_recurrence_suite(policy: TailPolicy, lines: list[dict]) -> bool:
    seq = [reference.SQUARE_SUMS_PM1[n] for n in range(1, 7)]
    res = verify_recurrence(reference.SQUARE_SUM_RECURRENCE, seq, n_start=1)
    lines.append(
        {
            "check": "squared-sum recurrence on the six exact values",
            "ok": bool(res.ok),
            "instances": res.checked,
        }
    )
    return res.ok


def _cmd_verify(args) -> tuple[OutputRecord, int]:
    policy = _policy_from(args)
    lines: list[dict] = []
    ok = True
    suites = {
        "identities": _verify_identities,
        "oracles": _verify_oracles,
        "residuals": _verify_residuals,
        "recurrence": _verify_recurrence_suite,
    }
    chosen = suites if args.suite == "all" else {args.suite: suites[args.suite]}
    for fn in chosen.values():
        ok &= fn(policy, lines)
    record = OutputRecord(
        command="verify",
        inputs={"suite": args.suite},
        results={"checks": lines, "all_ok": bool(ok)},
        provenance="exact identity and oracle verification",
    )
    return record, 0 if ok else CONVERGENCE_ERROR


_COMMANDS = {
    "pn": _cmd_pn,
    "pmn": _cmd_pmn,
    "within": _cmd_within,
    "duration": _cmd_duration,
    "table": _cmd_table,
    "passage": _cmd_passage,
    "simulate": _cmd_simulate,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        record, code = _COMMANDS[args.subcommand](args)
    except (ValueError, TypeError) as exc:
        print(f"pilerace: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    print(record.to_json() if getattr(args, "json", False) else record.render_human())
    return code


def script() -> None:
    sys.exit(main())


if __name__ == "__main__":
    script()

"""Command-line front end: validate, simulate, attack, optimize, demo.

Machine contract: exit codes (0 ok/secure, 3 insecure, 2 invalid input)
and deterministic JSON bodies.  Same seed and flags give byte-identical
reports; stderr is for humans only.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys

import numpy as np

from . import __version__
from .adversary import (
    best_message_attack,
    key_distinguishability,
    key_reuse_feasibility,
    message_attack_sim,
    no_message_attack_sim,
    no_message_optimal,
)
from .config import DEFAULT_TOL
from .conditions import validate
from .designer import optimize
from .fixtures import BUILTIN, secure_example_unitary
from .linalg import matrix_from_json, matrix_to_json
from .protocol import TaggingUnitary, simulate_honest_batch

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INSECURE = 3


def _parse_tol_overrides(pairs):
    overrides = {}
    for item in pairs or []:
        name, _, value = item.partition("=")
        if not _:
            raise ValueError(f"--tol expects NAME=VALUE, got {item!r}")
        if name not in DEFAULT_TOL.as_dict():
            raise ValueError(f"unknown tolerance {name!r}")
        overrides[name] = float(value)
    return overrides


def _load_unitary(args, tol):
    if args.input is None:
        raise ValueError("--input PATH (or a builtin name) is required")
    if args.input in BUILTIN:
        mat = BUILTIN[args.input]()
    else:
        with open(args.input, "r", encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValueError(
                    f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
                ) from exc
        mat = matrix_from_json(obj)
    if mat.shape != (4, 4):
        raise ValueError(f"tagging unitary must be 4x4, got {mat.shape}")
    return TaggingUnitary(mat, tol)


def _matrix_hash(mat) -> str:
    canonical = json.dumps(matrix_to_json(mat), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()


def _report_header(args, tol, mat) -> dict:
    return {
        "tool": "qmac",
        "version": __version__,
        "subcommand": args.command,
        "seed": args.seed,
        "tolerances": tol.as_dict(),
        "input_sha256": _matrix_hash(mat),
    }


def _emit(report: dict, out_path):
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_validate(args, tol) -> int:
    u = _load_unitary(args, tol)
    report = validate(u, attack_budget=args.budget, seed=args.seed)
    body = _report_header(args, tol, u.u)
    body["report"] = report.to_json()
    _emit(body, args.out)
    return EXIT_OK if report.overall_secure else EXIT_INSECURE


def cmd_simulate(args, tol) -> int:
    u = _load_unitary(args, tol)
    rng = np.random.default_rng(args.seed)
    records = []
    correct = accepted = 0
    fidelities = []
    for message in (0, 1):
        outcomes, fid = simulate_honest_batch(u, message, args.trials, rng)
        for outcome in outcomes:
            acc = int(outcome) in (0, 1)
            records.append(
                {
                    "message": message,
                    "outcome": int(outcome),
                    "accepted": acc,
                    "decoded": int(outcome) if acc else None,
                    "key_fidelity": fid,
                }
            )
            accepted += acc
            correct += acc and int(outcome) == message
        fidelities.append(fid)
    total = 2 * args.trials
    summary = {
        "trials_per_message": args.trials,
        "empty": total == 0,
        "acceptance_rate": accepted / total if total else None,
        "decode_accuracy": correct / total if total else None,
        "mean_key_fidelity": float(np.mean(fidelities)),
    }
    body = _report_header(args, tol, u.u)
    body["records"] = records
    body["summary"] = summary
    _emit(body, args.out)
    return EXIT_OK


def cmd_attack(args, tol) -> int:
    u = _load_unitary(args, tol)
    p0, p1 = args.priors
    rng = np.random.default_rng(args.seed)
    opt = no_message_optimal(u)
    nm_freq = no_message_attack_sim(u, opt.strategy, args.trials, rng)
    search = best_message_attack(u, p0=p0, p1=p1, budget=args.budget, rng=rng)
    msg_freq = message_attack_sim(u, search.strategy, args.trials, rng, p0=p0, p1=p1)
    dist = key_distinguishability(u)
    reuse = key_reuse_feasibility(u)
    body = _report_header(args, tol, u.u)
    body["attacks"] = {
        "no_message": {
            **opt.to_json(),
            "monte_carlo_frequency": nm_freq,
            "monte_carlo_delta": nm_freq - opt.probability,
        },
        "message": {
            **search.to_json(),
            "priors": [p0, p1],
            "monte_carlo_frequency": msg_freq,
            "monte_carlo_delta": msg_freq - search.probability,
        },
        "key_distinguishing": dist.to_json(),
        "key_reuse": reuse.to_json(),
    }
    body["trials"] = args.trials
    _emit(body, args.out)
    return EXIT_OK


def cmd_optimize(args, tol) -> int:
    rng = np.random.default_rng(args.seed)
    warm = None
    if args.warm_start:
        warm_args = argparse.Namespace(input=args.warm_start, command=args.command)
        warm = _load_unitary(warm_args, tol).u
    result = optimize(
        restarts=args.restarts, budget=args.budget, rng=rng, warm_start=warm
    )
    body = _report_header(args, tol, result.unitary)
    body["result"] = result.to_json()
    _emit(body, args.out)
    if args.trace_out:
        with open(args.trace_out, "w", encoding="utf-8") as fh:
            for restart, it, score in result.trace:
                fh.write(
                    json.dumps(
                        {"restart": restart, "iter": it, "score": score},
                        sort_keys=True,
                    )
                    + "\n"
                )
    return EXIT_OK


def cmd_demo(args, tol) -> int:
    """Validate and attack the built-in secure example end to end."""
    args.input = "secure_example"
    u = _load_unitary(args, tol)
    report = validate(u, attack_budget=args.budget, seed=args.seed)
    rng = np.random.default_rng(args.seed)
    opt = no_message_optimal(u)
    search = best_message_attack(u, budget=args.budget, rng=rng)
    body = _report_header(args, tol, u.u)
    body["unitary"] = matrix_to_json(u.u)
    body["report"] = report.to_json()
    body["attacks"] = {
        "no_message_optimal": opt.probability,
        "message_attack_best": search.probability,
        "key_distinguishing": key_distinguishability(u).to_json(),
        "key_reuse": key_reuse_feasibility(u).to_json(),
    }
    _emit(body, args.out)
    print(
        f"secure={report.overall_secure} "
        f"no_message_pf={opt.probability:.6f} "
        f"message_pf_best={search.probability:.6f}",
        file=sys.stderr,
    )
    return EXIT_OK if report.overall_secure else EXIT_INSECURE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmac",
        description="Simulator and security analyzer for the singlet-keyed "
        "one-bit quantum authentication protocol.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument(
                "--input",
                help="matrix JSON path, or a builtin name: "
                + ", ".join(sorted(BUILTIN)),
            )
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--trials", type=int, default=10_000)
        p.add_argument("--budget", type=int, default=2000)
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument(
            "--tol", action="append", metavar="NAME=VALUE",
            help="tolerance override, repeatable",
        )

    common(sub.add_parser("validate", help="run the security condition checklist"))
    common(sub.add_parser("simulate", help="honest-protocol Monte Carlo runs"))
    p_attack = sub.add_parser("attack", help="run all four attack analyses")
    common(p_attack)
    p_attack.add_argument(
        "--priors", type=lambda s: tuple(float(x) for x in s.split(",")),
        default=(0.5, 0.5), help="message priors p0,p1",
    )
    p_opt = sub.add_parser("optimize", help="search for a secure tagging unitary")
    common(p_opt, needs_input=False)
    p_opt.add_argument("--restarts", type=int, default=4)
    p_opt.add_argument("--warm-start", help="matrix JSON path or builtin name")
    p_opt.add_argument("--trace-out", help="write the search trace JSONL here")
    common(sub.add_parser("demo", help="full story on the builtin secure example"),
           needs_input=False)
    return parser


COMMANDS = {
    "validate": cmd_validate,
    "simulate": cmd_simulate,
    "attack": cmd_attack,
    "optimize": cmd_optimize,
    "demo": cmd_demo,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tol = DEFAULT_TOL.override(**_parse_tol_overrides(args.tol))
        return COMMANDS[args.command](args, tol)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

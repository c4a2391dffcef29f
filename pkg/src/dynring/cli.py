"""Command line front end: run, sweep, verify and replay experiments."""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

from .adversaries import ADVERSARIES, Dynamism, get_adversary
from .policies import POLICIES, get_policy
from .ring import (
    ACTION_FROM_SHORT,
    Mode,
    MoveIntent,
    Orientation,
    RingConfiguration,
    ScenarioError,
    all_on_one,
    classify,
    random_configuration,
    resolve_moves,
    ring_from_multiplicities,
)
from .scheduler import initial_robots, run_simulation
from .verifier import default_verification_roots, verify_impossibility, verify_worst_case

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAIL = 2


@dataclass
class ExperimentSpec:
    """One runnable scenario, serialisable for repeatable experiments."""

    n: int
    policy: str
    adversary: str = "benign"
    mode: str = "none"
    k: int | None = None
    config: str = "all-on-one"
    orientations: str | None = None
    seed: int | None = None
    max_rounds: int | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentSpec":
        return cls(**json.loads(text))


def parse_int_range(text: str) -> list[int]:
    """Sizes like "4", "2,3,5" or "3..17:2" (inclusive, optional step)."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            span, _, step = part.partition(":")
            lo, hi = span.split("..")
            out.extend(range(int(lo), int(hi) + 1, int(step) if step else 1))
        else:
            out.append(int(part))
    return out


def build_config(spec: ExperimentSpec, rng: random.Random) -> RingConfiguration:
    if spec.config == "all-on-one":
        return all_on_one(spec.n)
    if spec.config == "random":
        return random_configuration(spec.n, rng)
    counts = [int(x) for x in spec.config.split(",")]
    if len(counts) != spec.n:
        raise ScenarioError(f"--config lists {len(counts)} nodes but --n is {spec.n}")
    return ring_from_multiplicities(counts)


def build_orientations(spec: ExperimentSpec, rng: random.Random) -> dict[int, Orientation]:
    if spec.orientations is None:
        return {label: Orientation.ALIGNED for label in range(1, spec.n + 1)}
    if spec.orientations == "random":
        return {label: rng.choice((Orientation.ALIGNED, Orientation.REVERSED))
                for label in range(1, spec.n + 1)}
    text = spec.orientations
    if len(text) != spec.n or any(ch not in "AR" for ch in text):
        raise ScenarioError(
            f"--orientations needs {spec.n} letters over A/R or 'random', got {text!r}")
    return {label: Orientation(text[label - 1]) for label in range(1, spec.n + 1)}


def execute(spec: ExperimentSpec, record_views: bool = False):
    mode = Mode.from_string(spec.mode)
    policy = get_policy(spec.policy)
    adversary = get_adversary(spec.adversary)
    rng = random.Random(spec.seed)
    cfg = build_config(spec, rng)
    robots = initial_robots(cfg, policy, build_orientations(spec, rng))
    result = run_simulation(
        policy, adversary, cfg, mode,
        robots=robots, k=spec.k, seed=rng.randrange(2 ** 32),
        max_rounds=spec.max_rounds, record_views=record_views)
    return cfg, result


def _config_cells(cfg: RingConfiguration) -> list[list[int]]:
    return [list(slot) for slot in cfg.slots]


def trace_records(spec: ExperimentSpec, initial: RingConfiguration, result):
    start = classify(initial)
    yield {
        "round": 0,
        "perm": None,
        "edge": None,
        "intents": None,
        "config": _config_cells(initial),
        "holes": start.holes,
        "multinodes": start.multinodes,
    }
    for trace in result.traces:
        perm = trace.dynamism.permutation
        yield {
            "round": trace.index + 1,
            "perm": None if perm is None else list(perm),
            "edge": trace.dynamism.edge_removal,
            "intents": {str(i.label): i.action.short for i in trace.intents},
            "config": _config_cells(trace.config_after),
            "holes": trace.metrics_after.holes,
            "multinodes": trace.metrics_after.multinodes,
        }


def write_jsonl(spec: ExperimentSpec, initial, result, fh) -> None:
    for record in trace_records(spec, initial, result):
        fh.write(json.dumps(record, sort_keys=True) + "\n")
    summary = {
        "summary": True,
        "outcome": result.outcome,
        "rounds": result.rounds,
        "violations": len(result.violations),
        "spec": asdict(spec),
    }
    fh.write(json.dumps(summary, sort_keys=True) + "\n")


def write_run_csv(spec: ExperimentSpec, initial, result, fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(["round", "perm", "edge", "intents", "config", "holes", "multinodes"])
    for record in trace_records(spec, initial, result):
        intents = record["intents"]
        writer.writerow([
            record["round"],
            "" if record["perm"] is None else ";".join(map(str, record["perm"])),
            "" if record["edge"] is None else record["edge"],
            "" if intents is None else "|".join(f"{k}:{v}" for k, v in sorted(intents.items())),
            "|".join(",".join(map(str, cell)) if cell else "." for cell in record["config"]),
            record["holes"],
            record["multinodes"],
        ])


def cmd_run(args) -> int:
    if args.spec is not None:
        with open(args.spec, encoding="utf-8") as fh:
            spec = ExperimentSpec.from_json(fh.read())
    else:
        if args.n is None or args.policy is None:
            raise ScenarioError("run needs --n and --policy (or --spec)")
        spec = ExperimentSpec(
            n=args.n, policy=args.policy, adversary=args.adversary, mode=args.mode,
            k=args.k, config=args.config, orientations=args.orientations,
            seed=args.seed, max_rounds=args.max_rounds)
    initial, result = execute(spec, record_views=args.record_views)
    writer = write_jsonl if args.format == "jsonl" else write_run_csv
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer(spec, initial, result, fh)
    else:
        writer(spec, initial, result, sys.stdout)
    if result.violations:
        print(f"error: {len(result.violations)} per-round guarantee violations",
              file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK if result.dispersed else EXIT_FAIL


def _sweep_cell(task) -> tuple:
    n, policy_id, adversary_id, mode, config, seed, max_rounds = task
    spec = ExperimentSpec(
        n=n, policy=policy_id, adversary=adversary_id, mode=mode,
        config=config, seed=seed, max_rounds=max_rounds)
    bound = get_policy(policy_id).proven_bound(n)
    _, result = execute(spec)
    budget = bound if bound is not None else (max_rounds or 4 * n)
    passed = result.dispersed and result.rounds <= budget and not result.violations
    return (n, policy_id, adversary_id, seed, result.rounds,
            "" if bound is None else bound, "yes" if passed else "no")


def cmd_sweep(args) -> int:
    sizes = parse_int_range(args.n)
    tasks = [
        (n, args.policy, args.adversary, args.mode, args.config, seed, args.max_rounds)
        for n in sizes
        for seed in range(args.trials)
    ]
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        rows = sorted(pool.map(_sweep_cell, tasks))
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(["n", "policy", "adversary", "seed", "rounds", "bound", "pass"])
    writer.writerows(rows)
    text = buffer.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if all(row[-1] == "yes" for row in rows) else EXIT_FAIL


def cmd_verify(args) -> int:
    mode = Mode.from_string(args.mode)
    if args.check == "bound":
        if args.policy is None:
            raise ScenarioError("verify --check bound needs --policy")
        policy = get_policy(args.policy)
        starts, orientations = default_verification_roots(policy, args.n)
        report = verify_worst_case(
            policy, args.n, mode,
            starts=starts, orientations=orientations,
            bound=args.bound if args.bound is not None else "auto")
        print(f"bound-check policy={report.policy_id} n={report.n} mode={mode.value} "
              f"bound={report.bound} worst={report.worst_rounds} "
              f"states={report.states_explored} holds={'yes' if report.holds else 'no'}")
        for key, dynamism, violation in report.lemma_violations[:5]:
            print(f"  guarantee broken: {violation.guarantee}: {violation.detail}")
        if report.worst_root is not None and not report.holds:
            print(f"  worst start: {report.worst_root}")
        return EXIT_OK if report.holds else EXIT_FAIL
    if args.adversary is None:
        raise ScenarioError("verify --check impossibility needs --adversary")
    adversary = get_adversary(args.adversary)
    report = verify_impossibility(adversary, args.n, mode, horizon=args.horizon)
    print(f"impossibility adversary={report.adversary_id} n={report.n} mode={mode.value} "
          f"policies={report.policies_checked} starts={report.starts_checked} "
          f"stalled-forever={report.proven_infinite} horizon-hits={report.horizon_hits} "
          f"dispersals={len(report.dispersals)}")
    for item in report.dispersals[:5]:
        print(f"  escaped: policy={item.policy_id} start={item.start} round={item.round_index}")
    return EXIT_OK if report.all_blocked else EXIT_FAIL


def cmd_replay(args) -> int:
    with open(args.trace, encoding="utf-8") as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    if not lines or lines[0].get("round") != 0:
        print("error: trace must start with a round 0 record", file=sys.stderr)
        return EXIT_ERROR
    records = [line for line in lines if not line.get("summary")]
    summary = next((line for line in lines if line.get("summary")), None)

    cfg = RingConfiguration(
        len(records[0]["config"]), tuple(tuple(c) for c in records[0]["config"]))
    checked = 0
    for record in records[1:]:
        perm = record["perm"]
        shaped = Dynamism(None if perm is None else tuple(perm), record["edge"]).apply(cfg)
        intents = [MoveIntent(int(label), ACTION_FROM_SHORT[action])
                   for label, action in record["intents"].items()]
        landed = resolve_moves(shaped, intents)
        expected = tuple(tuple(c) for c in record["config"])
        metrics = classify(landed)
        if (landed.slots != expected or metrics.holes != record["holes"]
                or metrics.multinodes != record["multinodes"]):
            print(f"replay mismatch at round {record['round']}: "
                  f"reconstructed {landed.slots}, trace says {expected}")
            return EXIT_FAIL
        cfg = RingConfiguration(landed.n, landed.slots, None)
        checked += 1
    if summary is not None:
        dispersed = classify(cfg).dispersed
        recorded = summary["outcome"] == "dispersed"
        if dispersed != recorded:
            print(f"replay mismatch: final config dispersed={dispersed}, "
                  f"summary says {summary['outcome']}")
            return EXIT_FAIL
    print(f"replayed {checked} rounds, consistent")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dynring",
        description="Simulate and verify robot dispersion on dynamic rings.")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_flags(p):
        p.add_argument("--n", type=int, help="ring size (= robot count)")
        p.add_argument("--policy",
                       help=f"decision rule: one of {', '.join(sorted(POLICIES))}, "
                            "or k0:<6 letters over s/c/a> for zero-visibility tables")
        p.add_argument("--adversary", default="benign", choices=sorted(ADVERSARIES))
        p.add_argument("--mode", default="none",
                       choices=[m.value for m in Mode])
        p.add_argument("--k", type=int, default=None, help="visibility radius")
        p.add_argument("--config", default="all-on-one",
                       help="'all-on-one', 'random', or per-node counts like 2,1,0")
        p.add_argument("--orientations", default=None,
                       help="one letter (A/R) per label, or 'random'")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--max-rounds", type=int, default=None)

    run = sub.add_parser("run", help="run one scenario and write its trace")
    scenario_flags(run)
    run.add_argument("--spec", default=None, help="JSON experiment spec file")
    run.add_argument("--record-views", action="store_true",
                     help="include per-robot view digests in the trace")
    run.add_argument("--out", default=None)
    run.add_argument("--format", default="jsonl", choices=["jsonl", "csv"])
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="run many seeds across ring sizes")
    sweep.add_argument("--n", required=True,
                       help="sizes: 4 or 2,3,4 or 3..17:2")
    sweep.add_argument("--policy", required=True)
    sweep.add_argument("--adversary", default="random", choices=sorted(ADVERSARIES))
    sweep.add_argument("--mode", default="none", choices=[m.value for m in Mode])
    sweep.add_argument("--config", default="random")
    sweep.add_argument("--trials", type=int, default=10)
    sweep.add_argument("--max-rounds", type=int, default=None)
    sweep.add_argument("--jobs", type=int, default=None)
    sweep.add_argument("--out", default=None)
    sweep.add_argument("--format", default="csv", choices=["csv"])
    sweep.set_defaults(func=cmd_sweep)

    verify = sub.add_parser("verify", help="exhaustive bound or impossibility check")
    verify.add_argument("--check", required=True, choices=["bound", "impossibility"])
    verify.add_argument("--n", type=int, required=True)
    verify.add_argument("--policy", default=None)
    verify.add_argument("--adversary", default=None)
    verify.add_argument("--mode", default="none", choices=[m.value for m in Mode])
    verify.add_argument("--bound", type=int, default=None,
                        help="override the bound to check against")
    verify.add_argument("--horizon", type=int, default=200)
    verify.set_defaults(func=cmd_verify)

    replay = sub.add_parser("replay", help="re-derive every round of a saved trace")
    replay.add_argument("trace", help="JSONL trace produced by run")
    replay.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

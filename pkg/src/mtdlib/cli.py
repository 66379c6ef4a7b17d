"""
Command-line interface: scenario generation, range and topology planning, validation,
adversary simulation and manifest replay.

Exit codes: 0 success, 1 input error, 2 infeasible, 3 validation failure.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from mtdlib.adversary import (
    compare,
    compare_ensembles,
    metrics_frame,
    reference_adversary,
    run_monte_carlo,
    static_configuration,
    topology_configurations,
)
from mtdlib.constants.defaults import (
    CANDIDATE_REACH,
    DEFAULT_HORIZON,
    DEFAULT_LOOKBACK,
    EXIT_INFEASIBLE,
    EXIT_INPUT_ERROR,
    EXIT_OK,
    EXIT_VIOLATIONS,
    HANDOFF_COST,
    NODE_BUDGET,
)
from mtdlib.mutation import (
    Infeasible,
    RnmOptions,
    RtmOptions,
    initial_deployment,
    plan_deployment,
    plan_movement,
    plan_topology_sequence,
    schedule_rnm,
    schedule_timeline,
)
from mtdlib.scenario import generate_lattice_scenario, generate_scenario
from mtdlib.utils.json_format import (
    adversary_from_dict,
    aggregate_to_dict,
    comparison_to_dict,
    deployment_from_dict,
    deployment_to_dict,
    ensemble_to_dict,
    metrics_to_dict,
    plan_from_dict,
    plan_to_dict,
    read_json,
    read_scenario,
    scenario_to_dict,
    schedule_from_dict,
    schedule_to_dict,
    timeline_to_list,
    trace_frame,
    violations_to_list,
    write_frame,
    write_json,
)
from mtdlib.validation import check_deployment, check_movement, check_range_schedule
from mtdlib.version import __version__

LOG = logging.getLogger(__name__)

PROG = "mtdlib"


def _die(message: str, code: int = EXIT_INPUT_ERROR) -> int:
    print(f"{PROG}: {message}", file=sys.stderr)
    return code


def _emit(doc: Any, out: Optional[str]) -> None:

    if out is None:
        write_json(doc, sys.stdout)
        return

    Path(out).parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as f:
        write_json(doc, f)


def _write_manifest(args: argparse.Namespace, argv: List[str], outputs: List[str]) -> None:
    """Writes ``<out>.manifest.json`` beside the main output. Nothing is written when the
    output went to stdout.
    """

    if args.out is None:
        return

    parameters = {
        key: value for key, value in sorted(vars(args).items()) if key not in ("func", "verbose", "out") and not callable(value)
    }

    manifest = {
        "command": args.command,
        "scenario": getattr(args, "scenario", None),
        "seeds": getattr(args, "seeds", None) or getattr(args, "seed", None),
        "parameters": parameters,
        "version": __version__,
        "outputs": [args.out, *outputs],
        "argv": argv,
    }

    _emit(manifest, f"{args.out}.manifest.json")


def _infeasible(outcome: Infeasible) -> int:
    return _die(str(outcome), EXIT_INFEASIBLE)


def parse_seeds(text: str) -> List[int]:
    """``"a..b"`` (inclusive), ``"a,b,c"`` or a single seed."""

    text = text.strip()

    if ".." in text:
        first, last = text.split("..", 1)
        a, b = int(first), int(last)
        if b < a:
            raise ValueError(f"empty seed range {text}")
        return list(range(a, b + 1))

    seeds = [int(s) for s in text.split(",") if s.strip()]
    if not seeds:
        raise ValueError("expected at least one seed")

    return seeds


def _grid_size(text: str):

    try:
        width, height = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise ValueError(f"expected grid as WxH, got {text}") from None

    return width, height


def cmd_generate(args: argparse.Namespace, argv: List[str]) -> int:

    if args.lattice:
        scenario = generate_lattice_scenario(horizon=args.horizon)
    else:
        if args.aps is None or args.users is None or args.grid is None:
            raise ValueError("--aps, --users and --grid are required")
        width, height = _grid_size(args.grid)
        scenario = generate_scenario(
            args.aps,
            args.users,
            width,
            height,
            args.ranges,
            args.seed,
            cell_size=args.cell_size,
            candidate_reach=args.candidate_reach,
            horizon=args.horizon,
        )

    _emit(scenario_to_dict(scenario), args.out)
    _write_manifest(args, argv, [])

    return EXIT_OK


def cmd_rnm(args: argparse.Namespace, argv: List[str]) -> int:

    scenario = read_scenario(args.scenario)
    horizon = scenario.horizon_default if args.horizon is None else args.horizon
    options = RnmOptions(lookback=args.lookback, node_budget=args.node_budget, restarts=args.restarts)

    schedule = schedule_rnm(scenario, horizon, args.seed, options)
    if isinstance(schedule, Infeasible):
        return _infeasible(schedule)

    doc = schedule_to_dict(scenario, schedule)
    if args.interval_seconds is not None:
        doc = dict(doc, timeline=timeline_to_list(scenario, schedule_timeline(scenario, schedule, args.interval_seconds)))

    _emit(doc, args.out)
    _write_manifest(args, argv, [])

    return EXIT_OK


def _current_deployment(scenario, path: Optional[str]):

    if path is None:
        return initial_deployment(scenario)

    return deployment_from_dict(scenario, read_json(path))


def cmd_rtm_deploy(args: argparse.Namespace, argv: List[str]) -> int:

    scenario = read_scenario(args.scenario)
    current = _current_deployment(scenario, args.current)
    options = RtmOptions(node_budget=args.node_budget, restarts=args.restarts)

    deployment = plan_deployment(scenario, current, args.delta, args.seed, options)
    if isinstance(deployment, Infeasible):
        return _infeasible(deployment)

    _emit(deployment_to_dict(scenario, deployment), args.out)
    _write_manifest(args, argv, [])

    return EXIT_OK


def cmd_rtm_move(args: argparse.Namespace, argv: List[str]) -> int:

    scenario = read_scenario(args.scenario)
    start = deployment_from_dict(scenario, read_json(getattr(args, "from")))
    end = deployment_from_dict(scenario, read_json(args.to))
    options = RtmOptions(node_budget=args.node_budget, restarts=args.restarts)

    plan = plan_movement(scenario, start, end, args.max_steps, args.seed, options)
    if isinstance(plan, Infeasible):
        return _infeasible(plan)

    _emit(plan_to_dict(scenario, plan), args.out)
    _write_manifest(args, argv, [])

    return EXIT_OK


def cmd_rtm_sequence(args: argparse.Namespace, argv: List[str]) -> int:

    scenario = read_scenario(args.scenario)
    current = _current_deployment(scenario, args.current)
    options = RtmOptions(node_budget=args.node_budget, restarts=args.restarts)

    sequence = plan_topology_sequence(scenario, args.periods, args.delta, args.max_steps, args.seed, current, options)
    if isinstance(sequence, Infeasible):
        return _infeasible(sequence)

    doc = {
        "deployments": [deployment_to_dict(scenario, d) for d in sequence.deployments],
        "plans": [plan_to_dict(scenario, p) for p in sequence.plans],
    }

    _emit(doc, args.out)
    _write_manifest(args, argv, [])

    return EXIT_OK


def _plan_source(scenario, doc: Dict[str, Any]):
    """A configuration source from a schedule, deployment or deployment sequence document."""

    if "ranges" in doc:
        return schedule_from_dict(scenario, doc)

    if "deployments" in doc:
        deployments = [deployment_from_dict(scenario, d) for d in doc["deployments"]]
        plans = [plan_from_dict(scenario, p) for p in doc.get("plans", [])]
        return topology_configurations(scenario, deployments, plans)

    if "positions" in doc:
        return topology_configurations(scenario, [deployment_from_dict(scenario, doc)])

    raise ValueError("unrecognised plan document")


def cmd_simulate(args: argparse.Namespace, argv: List[str]) -> int:

    if args.intervals < 1:
        raise ValueError("intervals must be positive")

    if not 0.0 <= args.handoff_cost <= 1.0:
        raise ValueError("handoff cost must lie in [0, 1]")

    scenario = read_scenario(args.scenario)
    seeds = parse_seeds(args.seeds)

    if args.adversary is not None:
        adversary = adversary_from_dict(read_json(args.adversary))
    else:
        adversary = reference_adversary()

    baseline_source = static_configuration(scenario)

    if args.static:
        source = None
    elif args.plan is not None:
        source = _plan_source(scenario, read_json(args.plan))
    else:
        options = RnmOptions(lookback=args.lookback, node_budget=args.node_budget)
        schedules = {}
        for seed in seeds:
            schedule = schedule_rnm(scenario, args.rnm_horizon, seed, options)
            if isinstance(schedule, Infeasible):
                return _infeasible(schedule)
            schedules[seed] = schedule
        source = schedules.__getitem__

    baseline = run_monte_carlo(scenario, baseline_source, adversary, args.intervals, args.handoff_cost, seeds)

    outputs = []

    if source is None:
        doc: Dict[str, Any] = {"static": aggregate_to_dict(baseline)}
        if len(seeds) == 1:
            doc["report"] = metrics_to_dict(scenario, baseline.reports[0], trace=False)
        shown = baseline
    else:
        mutated = run_monte_carlo(scenario, source, adversary, args.intervals, args.handoff_cost, seeds)
        doc = ensemble_to_dict(compare_ensembles(baseline, mutated))
        if len(seeds) == 1:
            doc["report"] = metrics_to_dict(scenario, mutated.reports[0], trace=False)
            doc["comparison"] = comparison_to_dict(compare(baseline.reports[0], mutated.reports[0]))
        shown = mutated

    if args.csv is not None:
        write_frame(trace_frame(scenario, adversary, shown.reports[0]), args.csv)
        outputs.append(args.csv)

    if args.seed_csv is not None:
        frame = metrics_frame(baseline.reports)
        frame.insert(0, "configuration", "static")
        if source is not None:
            other = metrics_frame(shown.reports)
            other.insert(0, "configuration", "mutated")
            frame = pd.concat([frame, other], ignore_index=True)
        write_frame(frame, args.seed_csv)
        outputs.append(args.seed_csv)

    _emit(doc, args.out)
    _write_manifest(args, argv, outputs)

    return EXIT_OK


def cmd_validate(args: argparse.Namespace, argv: List[str]) -> int:

    scenario = read_scenario(args.scenario)

    if args.schedule is not None:
        schedule = schedule_from_dict(scenario, read_json(args.schedule))
        violations = check_range_schedule(scenario, schedule, args.lookback)

    elif args.deployment is not None:
        deployment = deployment_from_dict(scenario, read_json(args.deployment))
        current = _current_deployment(scenario, args.current)
        violations = check_deployment(scenario, current, deployment, args.delta)

    else:
        if getattr(args, "from") is None or args.to is None:
            raise ValueError("--plan needs --from and --to")
        plan = plan_from_dict(scenario, read_json(args.plan))
        start = deployment_from_dict(scenario, read_json(getattr(args, "from")))
        end = deployment_from_dict(scenario, read_json(args.to))
        violations = check_movement(scenario, plan, start, end)

    _emit(violations_to_list(violations), args.out)

    if violations:
        return EXIT_VIOLATIONS

    _write_manifest(args, argv, [])

    return EXIT_OK


def cmd_replay(args: argparse.Namespace, argv: List[str]) -> int:

    manifest = read_json(args.manifest)
    recorded = manifest.get("argv") if isinstance(manifest, dict) else None

    if not isinstance(recorded, list) or not recorded or recorded[0] == "replay":
        raise ValueError("manifest has no replayable command")

    if manifest.get("version") != __version__:
        LOG.warning("manifest written by version %s, replaying with %s", manifest.get("version"), __version__)

    return main([str(a) for a in recorded])


def _add_search_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, required=True)
    parser.add_argument("--node-budget", type=int, default=NODE_BUDGET)
    parser.add_argument("--restarts", type=int, default=1, help="seeded restarts when the node budget runs out")
    parser.add_argument("--out", default=None, help="output path; stdout when omitted")


def build_parser() -> argparse.ArgumentParser:

    parser = argparse.ArgumentParser(prog=PROG, description="Moving-target defense planning for wireless AP networks.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    commands = parser.add_subparsers(dest="command", required=True)

    generate = commands.add_parser("generate", help="generate a scenario")
    generate.add_argument("--aps", type=int)
    generate.add_argument("--users", type=int)
    generate.add_argument("--grid", help="WxH in cells")
    generate.add_argument("--ranges", type=int, default=3)
    generate.add_argument("--seed", type=int, default=0)
    generate.add_argument("--cell-size", type=float, default=1.0)
    generate.add_argument("--candidate-reach", type=int, default=CANDIDATE_REACH)
    generate.add_argument("--horizon", type=int, default=DEFAULT_HORIZON)
    generate.add_argument("--lattice", action="store_true", help="the reference lattice scenario")
    generate.add_argument("--out", default=None)
    generate.set_defaults(func=cmd_generate)

    rnm = commands.add_parser("rnm", help="plan a range mutation schedule")
    rnm.add_argument("--scenario", required=True)
    rnm.add_argument("--horizon", type=int, default=None)
    rnm.add_argument("--lookback", type=int, default=DEFAULT_LOOKBACK)
    rnm.add_argument("--interval-seconds", type=float, default=None, help="also emit a wall-clock timeline")
    _add_search_flags(rnm)
    rnm.set_defaults(func=cmd_rnm)

    rtm = commands.add_parser("rtm", help="plan a topology mutation")
    phases = rtm.add_subparsers(dest="phase", required=True)

    deploy = phases.add_parser("deploy", help="pick a new deployment")
    deploy.add_argument("--scenario", required=True)
    deploy.add_argument("--current", default=None, help="current deployment; the scenario positions when omitted")
    deploy.add_argument("--delta", type=int, required=True)
    _add_search_flags(deploy)
    deploy.set_defaults(func=cmd_rtm_deploy)

    move = phases.add_parser("move", help="plan the movement between two deployments")
    move.add_argument("--scenario", required=True)
    move.add_argument("--from", required=True)
    move.add_argument("--to", required=True)
    move.add_argument("--max-steps", type=int, required=True)
    _add_search_flags(move)
    move.set_defaults(func=cmd_rtm_move)

    sequence = phases.add_parser("sequence", help="chain several deployments and movements")
    sequence.add_argument("--scenario", required=True)
    sequence.add_argument("--current", default=None)
    sequence.add_argument("--periods", type=int, required=True)
    sequence.add_argument("--delta", type=int, required=True)
    sequence.add_argument("--max-steps", type=int, required=True)
    _add_search_flags(sequence)
    sequence.set_defaults(func=cmd_rtm_sequence)

    simulate = commands.add_parser("simulate", help="run the adversary against a configuration")
    simulate.add_argument("--scenario", required=True)
    source = simulate.add_mutually_exclusive_group(required=True)
    source.add_argument("--plan", help="schedule, deployment or deployment sequence file")
    source.add_argument("--static", action="store_true")
    source.add_argument("--rnm-horizon", type=int, help="plan a range schedule per seed")
    attackers = simulate.add_mutually_exclusive_group(required=True)
    attackers.add_argument("--adversary")
    attackers.add_argument("--reference-adversary", action="store_true")
    simulate.add_argument("--lookback", type=int, default=DEFAULT_LOOKBACK)
    simulate.add_argument("--node-budget", type=int, default=NODE_BUDGET)
    simulate.add_argument("--intervals", type=int, required=True)
    simulate.add_argument("--handoff-cost", type=float, default=HANDOFF_COST)
    simulate.add_argument("--seeds", default="0", help="a..b, a,b,c or a single seed")
    simulate.add_argument("--csv", default=None, help="per-interval trace of the first seed")
    simulate.add_argument("--seed-csv", default=None, help="metrics per seed")
    simulate.add_argument("--out", default=None)
    simulate.set_defaults(func=cmd_simulate)

    validate = commands.add_parser("validate", help="check a schedule, deployment or movement plan")
    validate.add_argument("--scenario", required=True)
    target = validate.add_mutually_exclusive_group(required=True)
    target.add_argument("--schedule")
    target.add_argument("--deployment")
    target.add_argument("--plan")
    validate.add_argument("--lookback", type=int, default=DEFAULT_LOOKBACK)
    validate.add_argument("--current", default=None)
    validate.add_argument("--delta", type=int, default=0)
    validate.add_argument("--from", default=None)
    validate.add_argument("--to", default=None)
    validate.add_argument("--out", default=None)
    validate.set_defaults(func=cmd_validate)

    replay = commands.add_parser("replay", help="re-run the command recorded in a manifest")
    replay.add_argument("manifest")
    replay.add_argument("--out", default=None, help=argparse.SUPPRESS)
    replay.set_defaults(func=cmd_replay)

    return parser


def _configure_logging(verbose: int) -> None:

    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose > 1:
        level = logging.DEBUG

    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def main(argv: Optional[List[str]] = None) -> int:

    if argv is None:
        argv = sys.argv[1:]

    parser = build_parser()

    try:
        args = parser.parse_args(argv)
    except SystemExit as exit:
        return EXIT_OK if exit.code in (0, None) else EXIT_INPUT_ERROR

    _configure_logging(args.verbose)

    try:
        return args.func(args, list(argv))
    except (ValueError, OSError, KeyError) as error:
        return _die(str(error))


if __name__ == "__main__":
    raise SystemExit(main())

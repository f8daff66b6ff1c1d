"""Command line entry point: ``exfilgame {solve,characterize,sweep,simulate}``.

Exit status: 0 success, 2 usage, 3 scenario parse error, 4 validation error,
5 solver failure, 6 strategy space over capacity.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from typing import Sequence

import numpy as np

from . import analytics, simulate
from .model import CapacityError, DefenderStrategy, NetworkError, enumerate_routes
from .scenario import ScenarioError, ScenarioValidationError, load_scenario
from .solver import SolverError, solve_scenario
from .sweep import characterize, summarize, sweep_data_size, sweep_variance

log = logging.getLogger("exfilgame")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_SOLVER = 5
EXIT_CAPACITY = 6

CHARACTERIZE_THRESHOLDS = (1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0)
SHOW_PROB = 1e-4


def fmt(x) -> str:
    """Shortest round-trip decimal for floats; plain text otherwise."""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def tuple_label(values) -> str:
    return "|".join(fmt(float(v)) for v in values)


def write_csv(rows: Sequence[Sequence], header: Sequence[str], out: str | None) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    text = buf.getvalue()
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def sweep_table(rows, routes, network) -> tuple[list[str], list[list]]:
    header = ["parameter", "value", "attacker_reward", "defender_cost"]
    header += [f"weight[{r.describe(network)}]" for r in routes]
    header += ["modal_duration"]
    for k in range(3):
        header += [f"defender_{k + 1}", f"defender_{k + 1}_prob"]
    header += ["epsilon", "equilibria"]
    table = []
    for row in rows:
        line = [row.parameter, row.value, row.attacker_reward, row.defender_cost, *row.route_weights, row.modal_duration]
        for k in range(3):
            if k < len(row.top_defender):
                strat, p = row.top_defender[k]
                line += [tuple_label(strat.values), p]
            else:
                line += ["", ""]
        line += [row.epsilon, row.equilibria]
        table.append(line)
    return header, table


def parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def parse_ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def dump_matrices(solution, path: str) -> None:
    m = solution.matrices
    header = ["matrix", "attacker_strategy"] + [tuple_label(d.values) for d in m.col_labels]
    rows = []
    for name, mat in (("attacker_reward", m.attacker_reward), ("defender_cost", m.defender_cost)):
        for label, values in zip(m.row_labels, mat):
            rows.append([name, label.label(), *values])
    write_csv(rows, header, path)


def print_equilibrium(solution, eq, network, title: str) -> None:
    m = solution.matrices
    print(title)
    print(f"  defender cost   {eq.defender_cost_value:.6g}")
    print(f"  attacker reward {eq.attacker_value:.6g}")
    print(f"  regret bound    {eq.epsilon:.3g}")
    row = summarize(solution, "", 0.0, eq)
    for route, w in zip(m.routes, row.route_weights):
        print(f"  route {route.describe(network)}: {w:.6g}")
    print(f"  modal duration  {row.modal_duration}")
    print("  attacker strategy:")
    for i in np.flatnonzero(eq.attacker_mix > SHOW_PROB):
        s = m.row_labels[i]
        print(f"    {m.routes[s.route_index].describe(network)} n={s.duration}: {eq.attacker_mix[i]:.6g}")
    print("  defender strategy (" + ", ".join(network.link_ids) + "):")
    for j in np.flatnonzero(eq.defender_mix > SHOW_PROB):
        print(f"    [{', '.join(f'{v:g}' for v in m.col_labels[j].values)}]: {eq.defender_mix[j]:.6g}")


def cmd_solve(args) -> int:
    scenario = load_scenario(args.scenario)
    solution = solve_scenario(
        scenario.network, scenario.economics, scenario.durations,
        solver=args.solver, max_defender_strategies=args.max_strategies,
    )
    if solution.failures:
        for label, msg in sorted(solution.failures.items()):
            print(f"warning: label {label}: {msg}", file=sys.stderr)
    network = scenario.network
    rows, cols = solution.matrices.shape
    print(f"game {rows}x{cols}; {len(solution.equilibria)} equilibria, {len(solution.pure)} pure")
    print_equilibrium(solution, solution.canonical, network, "canonical equilibrium")
    if args.all:
        for k, eq in enumerate(solution.equilibria):
            print_equilibrium(solution, eq, network, f"equilibrium {k}")
    if args.matrix_out:
        dump_matrices(solution, args.matrix_out)
    if args.out:
        summaries = [summarize(solution, "equilibrium", k, eq) for k, eq in enumerate(solution.equilibria)]
        header, table = sweep_table(summaries, solution.matrices.routes, network)
        write_csv(table, header, args.out)
    return EXIT_OK


def cmd_characterize(args) -> int:
    scenario = load_scenario(args.scenario)
    rows = characterize(scenario, args.thresholds, args.durations, args.route)
    header = ["threshold", "duration", "p_undetected", "attacker_reward", "defender_cost"]
    table = [[r.threshold, r.duration, r.p_undetected, r.attacker_reward, r.defender_cost] for r in rows]
    write_csv(table, header, args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.param == "data-size":
        rows = sweep_data_size(scenario, args.values, workers=args.workers)
    else:
        rows = sweep_variance(scenario, args.values, args.mode, args.link, workers=args.workers)
    header, table = sweep_table(rows, enumerate_routes(scenario.network), scenario.network)
    write_csv(table, header, args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    scenario = load_scenario(args.scenario)
    network, econ = scenario.network, scenario.economics
    routes = enumerate_routes(network)
    if len(args.thresholds) == 1:
        defense = DefenderStrategy.uniform(network, args.thresholds[0])
    elif len(args.thresholds) == len(network.links):
        defense = DefenderStrategy(network.link_ids, args.thresholds)
    else:
        raise NetworkError(f"--thresholds needs 1 or {len(network.links)} values")
    config = simulate.SimulationConfig(args.trials, args.seed, args.horizon)
    route_ids = range(len(routes)) if args.route is None else [args.route]
    durations = scenario.durations if args.duration is None else [args.duration]

    table = []
    base = simulate.simulate_base_alerts(network, defense, config)
    analytic_rate = math.fsum(
        l.multiplicity * analytics.distribution_sf(l.distribution, l.mean + defense[l.id] * l.std) for l in network.links
    )
    table.append(["", "", "base_alert_rate", analytic_rate, base.mean, base.std_error, base.trials])
    cost = base.scaled(econ.inspection_cost / (1 - econ.discount))
    table.append(["", "", "base_cost", analytics.defender_base_cost(network, defense, econ), cost.mean, cost.std_error, cost.trials])
    for r in route_ids:
        route = routes[r]
        for n in durations:
            p = analytics.per_round_undetected(route, defense, econ.data_size, n, network)
            det = simulate.simulate_detection(route, defense, econ.data_size / n, network, config)
            table.append([route.describe(network), n, "detection_rate", 1.0 - p, det.mean, det.std_error, det.trials])
            att = simulate.simulate_attack(route, defense, econ, n, network, config)
            reward = analytics.attacker_reward(route, defense, econ, n, network)
            table.append([route.describe(network), n, "attacker_reward", reward, att.mean, att.std_error, att.trials])
    header = ["route", "duration", "quantity", "analytic", "mc_mean", "mc_std_error", "trials"]
    write_csv(table, header, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="exfilgame", description="Data exfiltration game toolkit")
    parser.add_argument("-v", "--verbose", action="store_true", help="log defaults and solver progress")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_arg(p):
        p.add_argument("--scenario", required=True, help="scenario JSON path or builtin name (table1, variance_symmetric, variance_single)")
        p.add_argument("--out", help="CSV output path (default stdout)")

    p = sub.add_parser("solve", help="solve the bimatrix game for equilibria")
    scenario_arg(p)
    p.add_argument("--solver", choices=["lemke-howson", "support-enum", "auto"], default="lemke-howson")
    p.add_argument("--all", action="store_true", help="print every deduplicated equilibrium")
    p.add_argument("--matrix-out", help="dump both payoff matrices as CSV")
    p.add_argument("--max-strategies", type=int, default=100_000, help="cap on defender strategies")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("characterize", help="closed-form curves for one route and shared thresholds")
    scenario_arg(p)
    p.add_argument("--thresholds", type=parse_floats, default=list(CHARACTERIZE_THRESHOLDS))
    p.add_argument("--durations", type=parse_ints, default=None, help="default: scenario durations")
    p.add_argument("--route", type=int, default=0, help="route index in enumeration order")
    p.set_defaults(func=cmd_characterize)

    p = sub.add_parser("sweep", help="equilibrium parameter sweep")
    scenario_arg(p)
    p.add_argument("--param", choices=["data-size", "variance"], required=True)
    p.add_argument("--values", type=parse_floats, required=True)
    p.add_argument("--mode", choices=["symmetric", "single"], default="symmetric")
    p.add_argument("--link", help="link id for --mode single (default: last sink-facing link)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="Monte Carlo check of the analytic quantities")
    scenario_arg(p)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=int, default=1, help="rounds per trial for base alerts")
    p.add_argument("--thresholds", type=parse_floats, default=[2.0], help="one shared value or one per link")
    p.add_argument("--route", type=int, default=None)
    p.add_argument("--duration", type=int, default=None)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ScenarioValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (NetworkError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER



def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()

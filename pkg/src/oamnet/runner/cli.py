"""Command line: modes, sort, run and verify."""

import argparse
import logging
import sys
from pathlib import Path

import pandas as pd

from oamnet.errors import OamnetError, ScenarioError
from oamnet.optics.mode_algebra import (
    DEFAULT_ORDER_CAP,
    ModeIndices,
    eigenphase_residual,
    indices_from_lp,
    lg_coefficients,
    rotation_matrix,
)
from oamnet.optics.polarization import Basis, Bb84State, canonical_state
from oamnet.optics.sorter_optics import (
    PhotonRecord,
    SorterTree,
    build_sorter_tree,
    route_photon,
    stage_paths,
)
from oamnet.runner.report import (
    build_report,
    default_report_path,
    override_sessions,
    run_scenario,
    write_report,
)
from oamnet.runner.scenario import parse_scenario
from oamnet.runner.verify import run_checks
from oamnet.utils import format_angle, make_streams

LOG_FORMAT = "%(asctime)s [%(levelname)s] [%(name)s] %(message)s"


def format_amplitude(value: complex, digits: int = 4) -> str:
    real = round(value.real, digits) + 0.0
    imag = round(value.imag, digits) + 0.0
    if imag == 0:
        return f"{real:g}"
    if real == 0:
        return f"{imag:g}i"
    return f"{real:g}{imag:+g}i"


def _print_matrix(matrix) -> None:
    for row in matrix:
        print("    [" + ", ".join(f"{format_amplitude(value):>14}" for value in row) + "]")


def cmd_modes(args: argparse.Namespace) -> int:
    if args.n is not None or args.m is not None:
        indices = ModeIndices(args.n or 0, args.m or 0)
    else:
        indices = indices_from_lp(args.l or 0, args.p or 0)

    mode = lg_coefficients(indices.n, indices.m, cap=args.cap)
    print(
        f"LG mode n={indices.n} m={indices.m} (ell={indices.ell}, p={indices.p}, "
        f"order {indices.order})"
    )
    print("  • HG amplitudes, k = 0..N:")
    print("    (" + ", ".join(format_amplitude(a) for a in mode.amplitudes) + ")")
    print(f"  • norm = {mode.norm():.12f}")

    if args.alpha is not None:
        print(f"  • rotation matrix at alpha = {args.alpha:g}:")
        _print_matrix(rotation_matrix(mode.order, args.alpha, cap=args.cap))
        residual = eigenphase_residual(indices.ell, indices.p, args.alpha)
        mark = "✓" if residual < 1e-10 else "⚠"
        print(f"  {mark} eigenphase residual = {residual:.3e}")
    return 0


def _port_members(tree: SorterTree, path: str) -> tuple[list[int], list[int]]:
    port0, port1 = [], []
    for leaf in tree.leaves():
        if leaf.path.startswith(path + "0"):
            port0.extend(leaf.addresses)
        elif leaf.path.startswith(path + "1"):
            port1.extend(leaf.addresses)
    return sorted(port0), sorted(port1)


def stage_table(tree: SorterTree) -> pd.DataFrame:
    rows = []
    for path, stage in stage_paths(tree):
        port0, port1 = _port_members(tree, "" if path == "root" else path)
        rows.append(
            {
                "stage": path,
                "alpha": format_angle(stage.alpha),
                "delta_phi_c": format_angle(stage.delta_phi_c),
                "qwp": stage.applies_qwp,
                "port0": port0,
                "port1": port1,
            }
        )
    return pd.DataFrame(rows, columns=["stage", "alpha", "delta_phi_c", "qwp", "port0", "port1"])


def leaf_histogram(tree: SorterTree, ells, photons: int, seed: int) -> tuple[pd.DataFrame, int]:
    """Route photons with ell drawn uniformly from ells; returns the leaf x ell table and strays."""
    streams = make_streams(seed)
    draws = streams["sender"].choice(list(ells), size=photons)
    polarization = canonical_state(Bb84State(Basis.DIAGONAL, 0))
    leaves, stray = [], 0
    for index, ell in enumerate(draws.tolist()):
        photon = PhotonRecord(ell=ell, p=0, polarization=polarization, sequence=index)
        result = route_photon(photon, tree, streams["channel"])
        leaves.append(result.leaf.leaf_id)
        stray += result.stray
    table = pd.crosstab(pd.Series(leaves, name="leaf"), pd.Series(draws, name="ell"))
    return table, stray


def cmd_sort(args: argparse.Namespace) -> int:
    if args.scenario:
        tree = parse_scenario(args.scenario).network.sorter
    elif args.addresses:
        tree = build_sorter_tree(args.addresses, use_qwp=not args.no_qwp)
    else:
        print("⚠ sort needs --addresses or --scenario")
        return 2

    print(f"Sorter for addresses {sorted(tree.addresses)}: {tree.stage_count()} stages")
    print(stage_table(tree).to_string(index=False))

    ells = args.ells or sorted(tree.addresses)
    print(f"\nRouting {args.photons} photons, ell drawn from {ells}, seed {args.seed}...")
    table, stray = leaf_histogram(tree, ells, args.photons, args.seed)
    print(table.to_string())
    mark = "✓" if stray == 0 else "⚠"
    print(f"  {mark} stray photons: {stray}")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    scenario = parse_scenario(args.scenario)
    scenario = override_sessions(scenario, seed=args.seed, photons=args.photons)
    output_path = Path(args.output) if args.output else default_report_path(scenario)

    print(f"Running {len(scenario.sessions)} sessions from {args.scenario}...")
    outcomes = run_scenario(scenario, parallel=args.parallel)
    for outcome in outcomes:
        session = outcome.session
        if outcome.result is None:
            print(f"  ⚠ {session.session_id}: {outcome.error}")
            continue
        result = outcome.result
        mark = "✓" if result.verdict == "ok" else "⚠"
        print(
            f"  {mark} {session.session_id} {session.sender} -> {session.receiver}: "
            f"sifted {result.sifted_count}, qber {result.qber_estimate:.4f}, {result.verdict}"
        )

    write_report(build_report(outcomes), output_path)
    print(f"✓ Report written to {output_path}")
    errored = sum(outcome.result is None for outcome in outcomes)
    return 1 if errored else 0


def cmd_verify(args: argparse.Namespace) -> int:
    results = run_checks()
    for result in results:
        mark = "✓" if result.passed else "⚠"
        print(f"  {mark} {result.name}: {result.detail}")
    failed = [result.name for result in results if not result.passed]
    if failed:
        print(f"⚠ {len(failed)} of {len(results)} checks failed")
        return 1
    print(f"✓ All {len(results)} checks passed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oamnet", description="OAM-addressed BB84 network simulator"
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--verbose", action="store_true", default=argparse.SUPPRESS, help="debug logging"
    )
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    modes = commands.add_parser(
        "modes", parents=[common], help="LG mode coefficients and rotation matrices"
    )
    modes.add_argument("--n", type=int)
    modes.add_argument("--m", type=int)
    modes.add_argument("--l", type=int, help="signed azimuthal index ell")
    modes.add_argument("--p", type=int, help="radial index")
    modes.add_argument("--alpha", type=float, help="rotation angle in radians")
    modes.add_argument("--cap", type=int, default=DEFAULT_ORDER_CAP, help="mode order cap")
    modes.set_defaults(handler=cmd_modes)

    sort = commands.add_parser(
        "sort", parents=[common], help="route a photon stream through a sorter"
    )
    sort.add_argument("--addresses", type=int, nargs="+")
    sort.add_argument("--ells", type=int, nargs="+", help="ell values to send")
    sort.add_argument("--no-qwp", action="store_true", help="stages without prisms")
    sort.add_argument("--scenario", type=Path)
    sort.add_argument("--photons", type=int, default=1000)
    sort.add_argument("--seed", type=int, default=0)
    sort.set_defaults(handler=cmd_sort)

    run = commands.add_parser(
        "run", parents=[common], help="execute a scenario and write its report"
    )
    run.add_argument("--scenario", type=Path, required=True)
    run.add_argument("--seed", type=int, help="override session seeds with seed + index")
    run.add_argument("--photons", type=int, help="override every session's photon count")
    run.add_argument("--output", type=Path, help="report path")
    run.add_argument(
        "--parallel",
        action="store_true",
        help="dispatch sessions to worker threads; they still take turns on the single in-port",
    )
    run.set_defaults(handler=cmd_run)

    verify = commands.add_parser(
        "verify", parents=[common], help="run the built-in invariant checks"
    )
    verify.set_defaults(handler=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING, format=LOG_FORMAT
    )
    try:
        return args.handler(args)
    except ScenarioError as exc:
        print(f"⚠ Invalid scenario: {exc}")
        return 2
    except (OamnetError, ValueError, OSError) as exc:
        print(f"⚠ {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""
Delayed-choice simulator - Entry point
"""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table as RichTable

from . import __version__
from .config import ConfigError, Experiment, RunConfig, config_from_dict, load_config
from .eraser import (
    DETECTORS,
    CircuitMode,
    build_state,
    conditional_pattern,
    idler_marginals,
    schedule_equivalence,
)
from .everett import (
    branch_stability,
    epr_events,
    epr_worlds,
    order_independence,
)
from .measure import correlation, joint_distribution
from .orderprop import (
    GENERATOR_NAME,
    fuzz_campaign,
    make_rng,
    random_state,
    random_unitary,
    same_slot_control,
)
from .qcore import TOLERANCE, singlet_state, spin_family
from .tables import Table, emit_table, write_output
from .wheeler import (
    TELESCOPE_LABELS,
    delayed_choice,
    exact_screen_pattern,
    far_field_relative_error,
    predicted_maxima,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VIOLATION = 3
EXIT_IO = 4

# the same-slot control must show at least this spread
CONTROL_MIN_SPREAD = 0.1
SPIN_LABELS = ("up", "down")
SPECTATOR_DIM = 3


class InvariantViolation(RuntimeError):
    """One or more property checks failed on a finished run"""


class Simulator:
    """Runs one configured experiment and collects its table and checks"""

    def __init__(self, config: RunConfig):
        self.config = config
        self.violations: List[str] = []
        self.summary: Dict[str, Any] = {}

    def check(self, ok: bool, message: str):
        if not ok:
            logger.debug("Property violated: %s", message)
            self.violations.append(message)

    def verify(self):
        if self.violations:
            raise InvariantViolation("; ".join(self.violations))

    def base_meta(self) -> Dict[str, Any]:
        return {
            "experiment": self.config.experiment.value,
            "seed": self.config.seed,
            "version": __version__,
            "generator": GENERATOR_NAME,
        }

    def run_epr(self) -> Table:
        """Singlet measured along angle_a (Alice) and angle_b (Bob), in both orders"""
        s = singlet_state()
        fam_a = spin_family(self.config.get("angle_a"))
        fam_b = spin_family(self.config.get("angle_b"))
        a_first = joint_distribution(s, [(0, fam_a), (1, fam_b)])
        b_first = joint_distribution(s, [(1, fam_b), (0, fam_a)])

        rows = []
        worst = 0.0
        for a in range(2):
            for b in range(2):
                p, q = a_first[(a, b)], b_first[(b, a)]
                worst = max(worst, abs(p - q))
                rows.append((SPIN_LABELS[a], SPIN_LABELS[b], p, q))
        self.check(worst < TOLERANCE, f"EPR order difference {worst:.3e}")
        self.check(abs(a_first.total() - 1.0) < TOLERANCE, "EPR distribution does not sum to 1")

        meta = self.base_meta()
        meta.update(
            angle_a=self.config.get("angle_a"),
            angle_b=self.config.get("angle_b"),
            correlation=correlation(a_first),
            max_order_difference=worst,
        )
        self.summary.update(correlation=meta["correlation"], max_order_difference=worst)
        return Table(("outcome_a", "outcome_b", "p_a_first", "p_b_first"), rows, meta)

    def run_eraser(self) -> Table:
        eraser_config = self.config.eraser_config()
        state = build_state(eraser_config.mode)
        marginals = idler_marginals(state)
        report = schedule_equivalence(state, eraser_config)
        self.check(report.consistent, f"eraser schedule difference {report.max_difference:.3e}")
        self.check(abs(marginals.total() - 1.0) < TOLERANCE, "detector marginals do not sum to 1")

        patterns = [conditional_pattern(state, det, eraser_config) for det in DETECTORS]
        density = report.signal_first.density
        rows = []
        for i, theta in enumerate(eraser_config.theta_grid):
            rows.append(
                (float(theta),)
                + tuple(float(x) for x in density[i])
                + tuple(float(p.intensity[i]) for p in patterns)
            )

        meta = self.base_meta()
        meta.update(
            mode=eraser_config.mode.value,
            k=eraser_config.k,
            d=eraser_config.d,
            idler_marginals={det: marginals[(j,)] for j, det in enumerate(DETECTORS)},
            visibilities={det: p.visibility for det, p in zip(DETECTORS, patterns)},
            max_schedule_difference=report.max_difference,
        )
        self.summary.update(
            mode=eraser_config.mode.value,
            max_schedule_difference=report.max_difference,
            **{f"visibility_{det}": p.visibility for det, p in zip(DETECTORS, patterns)},
        )
        columns = ("theta",) + tuple(f"p_{d}" for d in DETECTORS) + tuple(f"cond_{d}" for d in DETECTORS)
        return Table(columns, rows, meta)

    def run_wheeler(self) -> Table:
        wheeler_config = self.config.wheeler_config()
        screen_in = self.config.get("screen_in")
        meta = self.base_meta()
        meta.update(
            k=wheeler_config.k,
            d=wheeler_config.d,
            screen_distance=wheeler_config.screen_distance,
            screen_in=screen_in,
        )
        result = delayed_choice(wheeler_config, screen_in)
        if screen_in:
            exact = exact_screen_pattern(wheeler_config)
            rows = [
                (float(t), float(f), float(e))
                for t, f, e in zip(result.theta, result.intensity, exact.intensity)
            ]
            # compare the two models at the first bright fringe off the axis
            maxima = predicted_maxima(wheeler_config)
            off_axis = maxima[maxima > 0]
            check_theta = float(off_axis[0]) if off_axis.size else 0.0
            error = far_field_relative_error(check_theta, wheeler_config)
            meta.update(
                visibility=result.visibility,
                far_field_check_theta=check_theta,
                far_field_relative_error=error,
            )
            self.summary.update(visibility=result.visibility, far_field_relative_error=error)
            return Table(("theta", "far_field", "exact"), rows, meta)

        probabilities = [result[(i,)] for i in range(len(TELESCOPE_LABELS))]
        self.check(abs(sum(probabilities) - 1.0) < TOLERANCE, "telescope chances do not sum to 1")
        meta.update(acceptance_halfwidth=wheeler_config.acceptance_halfwidth)
        self.summary.update(dict(zip(TELESCOPE_LABELS, probabilities)))
        return Table(("telescope", "probability"), list(zip(TELESCOPE_LABELS, probabilities)), meta)

    def run_orderprop(self) -> Table:
        summary = fuzz_campaign(
            trials=self.config.get("trials"),
            max_dims=tuple(self.config.get("max_dims")),
            max_len=self.config.get("max_len"),
            seed=self.config.seed,
            workers=self.config.get("workers"),
        )
        control = same_slot_control()
        self.check(summary.consistent, f"worst interleaving spread {summary.worst_spread:.3e}")
        self.check(
            control.max_spread > CONTROL_MIN_SPREAD,
            f"same-slot control spread {control.max_spread:.3e} is too small",
        )

        rows = [
            (r.trial, r.dims[0], r.dims[1], r.len_a, r.len_b, r.num_interleavings, r.max_spread)
            for r in summary.results
        ]
        meta = self.base_meta()
        meta.update(
            trials=summary.trials,
            max_dims=list(self.config.get("max_dims")),
            max_len=self.config.get("max_len"),
            worst_spread=summary.worst_spread,
            worst_trial=summary.worst_trial,
            total_interleavings=summary.total_interleavings,
            control_spread=control.max_spread,
        )
        self.summary.update(worst_spread=summary.worst_spread, control_spread=control.max_spread)
        columns = ("trial", "dim_a", "dim_b", "len_a", "len_b", "interleavings", "max_spread")
        return Table(columns, rows, meta)

    def run_everett(self) -> Table:
        alice, bob = epr_events()
        report = order_independence(singlet_state(), (alice, bob), (bob, alice))
        self.check(report.consistent, f"branch sets differ by {report.max_difference:.3e}")

        rng = make_rng(self.config.seed)
        spectator = random_state((SPECTATOR_DIM,), int(rng.integers(2**62)))
        world = epr_worlds(alice_first=True, spectator=spectator)
        drift = 0.0
        for _ in range(self.config.get("trials")):
            stability = branch_stability(world, random_unitary(SPECTATOR_DIM, rng), slot=2)
            drift = max(drift, stability.max_drift)
        self.check(drift < TOLERANCE, f"branch weights drifted by {drift:.3e}")

        rows = []
        for order, branches in (("alice_first", report.first), ("bob_first", report.second)):
            for branch in branches:
                rows.append(
                    (order, str(branch.label), branch.amplitude.real, branch.amplitude.imag, branch.weight)
                )
        meta = self.base_meta()
        meta.update(
            trials=self.config.get("trials"),
            max_order_difference=report.max_difference,
            max_weight_drift=drift,
        )
        self.summary.update(max_order_difference=report.max_difference, max_weight_drift=drift)
        return Table(("order", "label", "amplitude_re", "amplitude_im", "weight"), rows, meta)

    def build_table(self) -> Table:
        runners = {
            Experiment.EPR: self.run_epr,
            Experiment.ERASER: self.run_eraser,
            Experiment.WHEELER: self.run_wheeler,
            Experiment.ORDERPROP: self.run_orderprop,
            Experiment.EVERETT: self.run_everett,
        }
        logger.info("Running %s (seed %d)", self.config.experiment.value, self.config.seed)
        return runners[self.config.experiment]()


def run(config: RunConfig, console: Optional[Console] = None) -> int:
    """Run an experiment, write its table and return the exit status"""
    simulator = Simulator(config)
    try:
        table = simulator.build_table()
    except (ConfigError, ValueError) as e:
        logger.error("Invalid parameters: %s", e)
        return EXIT_CONFIG

    try:
        text = emit_table(table, config.format.value)
    except ValueError as e:
        # a non-finite result is itself a failed check
        logger.error("Cannot serialize results: %s", e)
        return EXIT_VIOLATION

    try:
        write_output(text, config.output_path)
    except OSError as e:
        logger.error("Cannot write output to %s: %s", config.output_path, e)
        return EXIT_IO

    if console is not None:
        print_summary(console, config, simulator.summary)
    try:
        simulator.verify()
    except InvariantViolation as e:
        logger.error("Property check failed: %s", e)
        return EXIT_VIOLATION
    return EXIT_OK


def print_summary(console: Console, config: RunConfig, summary: Dict[str, Any]):
    table = RichTable(title=f"{config.experiment.value} (seed {config.seed})")
    table.add_column("quantity")
    table.add_column("value", justify="right")
    for key, value in summary.items():
        table.add_row(key, f"{value:.6g}" if isinstance(value, float) else str(value))
    console.print(table)


def configure_logging(verbose: bool) -> Console:
    console = Console(stderr=True)
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )
    return console


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="delayed-choice",
        description="Delayed-choice measurement simulator - EPR, quantum eraser, "
        "Wheeler double slit and branch analyses",
    )
    parser.add_argument(
        "--version",
        "-V",
        action="version",
        version=f"delayed-choice v{__version__}",
    )

    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", "-c", type=str, default=None, help="JSON config file")
    shared.add_argument("--seed", type=int, default=None, help="Random seed")
    shared.add_argument("--out", "-o", type=str, default=None, help="Output path (default: stdout)")
    shared.add_argument("--format", choices=["csv", "json"], default=None, help="Output format")
    shared.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    shared.add_argument("--quiet", "-q", action="store_true", help="Skip the summary table")

    commands = parser.add_subparsers(dest="experiment", required=True)
    for experiment in Experiment:
        sub = commands.add_parser(experiment.value, parents=[shared])
        if experiment is Experiment.ERASER:
            sub.add_argument(
                "--mode",
                choices=[m.value for m in CircuitMode],
                default=None,
                help="Beamsplitter circuit (default: unitary)",
            )
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge flags over the config file (or the defaults when no file is given)"""
    overrides = {
        "seed": args.seed,
        "output_path": args.out,
        "format": args.format,
        "mode": getattr(args, "mode", None),
    }
    if args.config:
        config = load_config(args.config, overrides)
        if config.experiment.value != args.experiment:
            raise ConfigError(
                "config.experiment",
                f"file declares {config.experiment.value!r} but the subcommand is {args.experiment!r}",
            )
        return config
    return config_from_dict({"experiment": args.experiment}, overrides)


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point"""
    args = build_parser().parse_args(argv)
    console = configure_logging(args.verbose)

    try:
        config = resolve_config(args)
    except ConfigError as e:
        logger.error("Configuration error: %s", e)
        return EXIT_CONFIG

    return run(config, console=None if args.quiet else console)


if __name__ == "__main__":
    sys.exit(main())

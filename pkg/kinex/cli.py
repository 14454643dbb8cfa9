"""
Command-line front end.

    python -m kinex simulate --ratio 1 --seed 42 --out results/wealth
    python -m kinex sweep --ratios 0.1,0.5,1,2,10
    python -m kinex compare --lambda 0.5
    python -m kinex evolve --preset 100:1 --snapshots 0,100,1000
    python -m kinex analyze --input results/wealth/wealth_samples.csv
    python -m kinex plot --csv results/wealth/wealth_ccdf.csv --x x --y ccdf --xscale log --yscale log

Configuration is resolved as: defaults < KINEX_SEED < JSON config file < flags.
Exit status: 0 success, 1 invalid input, 2 I/O or runtime failure.
"""

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

from pydantic import ValidationError

from .errors import ConfigParseError, ConfigurationError, KinexError, OutputError, UsageError
from .experiments.runners import (
    PRICE_PRESETS,
    analyze_wealth_samples,
    preset_config,
    run_comparison,
    run_demand_sweep,
    run_price_evolution,
    run_wealth_experiment,
    run_wealth_family,
)
from .experiments.sinks import DirectorySink
from .models import ExperimentConfig, ModelKind
from .plotting import PlotSpec, emit_plot_svg
from .progress import IProgressReporter, TerminalProgress

logger = logging.getLogger(__name__)

SEED_ENV = "KINEX_SEED"
SUBCOMMANDS = ("simulate", "sweep", "compare", "analyze", "plot", "evolve")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_FAILURE = 2


# ======================================================================================
# CONFIG RESOLUTION
# ======================================================================================

def _validation_error(error: ValidationError) -> ConfigurationError:
    fields: List[str] = []
    lines: List[str] = []
    for item in error.errors():
        loc = ".".join(str(part) for part in item["loc"]) or "config"
        fields.append(loc)
        if item["type"] == "extra_forbidden":
            lines.append(f"{loc}: unknown key")
        else:
            lines.append(f"{loc}: {item['msg']}")
    return ConfigurationError("invalid configuration: " + "; ".join(lines), fields)


def parse_config(
    text: Optional[str],
    overrides: Mapping[str, Any],
    env: Optional[Mapping[str, str]] = None,
) -> ExperimentConfig:
    """
    Merge the JSON config text and flag overrides over the defaults. A `ratio` key
    (file or flag) sets total_goods = ratio * total_money at fixed money.
    """
    env = os.environ if env is None else env
    data: Dict[str, Any] = {}

    seed_text = env.get(SEED_ENV)
    if seed_text:
        try:
            data["seed"] = int(seed_text)
        except ValueError:
            raise ConfigurationError(f"{SEED_ENV} must be an integer, got '{seed_text}'", ["seed"])

    if text is not None and text.strip():
        try:
            file_data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigParseError(f"malformed JSON: {e.msg}", e.lineno, e.colno)
        if not isinstance(file_data, dict):
            raise ConfigurationError("config file must hold a JSON object", ["config"])
        data.update(file_data)

    data.update({k: v for k, v in overrides.items() if v is not None})
    ratio = data.pop("ratio", None)

    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise _validation_error(e)

    if ratio is not None:
        if not isinstance(ratio, (int, float)) or not ratio > 0:
            raise ConfigurationError(f"ratio must be a positive number, got {ratio!r}", ["ratio"])
        config = config.with_ratio(float(ratio))
    return config


# ======================================================================================
# ARGUMENT PARSING
# ======================================================================================

class KinexArgumentParser(argparse.ArgumentParser):
    """argparse that raises UsageError instead of exiting."""

    def error(self, message: str):
        raise UsageError(f"{message}\n{self.format_usage().rstrip()}")


def _float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got '{text}'")


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got '{text}'")


def build_parser() -> KinexArgumentParser:
    common = KinexArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int)
    common.add_argument("--n-agents", type=int, dest="n_agents")
    common.add_argument("--goods", type=int, dest="total_goods")
    common.add_argument("--money", type=float, dest="total_money")
    common.add_argument("--ratio", type=float, help="goods = ratio * money at fixed money")
    common.add_argument("--ratios", type=_float_list)
    common.add_argument("--model", choices=[m.value for m in ModelKind])
    common.add_argument("--lambda", type=float, dest="saving", help="saving propensity for the cc model")
    common.add_argument("--sweeps", type=int, dest="n_sweeps")
    common.add_argument("--burn-in", type=int, dest="burn_in_sweeps")
    common.add_argument("--snapshots", type=_int_list, dest="snapshot_sweeps")
    common.add_argument("--sampling", choices=["final", "time_averaged"], dest="wealth_sampling")
    common.add_argument("--workers", type=int)
    common.add_argument("--out", dest="output_dir")
    common.add_argument("--verbose", action="store_true")

    parser = KinexArgumentParser(prog="kinex", description="Kinetic economy simulator")
    sub = parser.add_subparsers(dest="subcommand", metavar="{" + ",".join(SUBCOMMANDS) + "}")
    sub.required = True

    simulate = sub.add_parser("simulate", parents=[common], help="wealth distribution experiment")
    simulate.add_argument("--family", action="store_true", help="one run per ratio in --ratios")
    sub.add_parser("sweep", parents=[common], help="demand curve over --ratios")
    sub.add_parser("compare", parents=[common], help="buyer vs dy vs cc comparison")
    analyze = sub.add_parser("analyze", parents=[common], help="refit an existing wealth_samples.csv")
    analyze.add_argument("--input", required=True)
    plot = sub.add_parser("plot", parents=[common], help="render two CSV columns as SVG")
    plot.add_argument("--csv", required=True)
    plot.add_argument("--x", required=True)
    plot.add_argument("--y", required=True)
    plot.add_argument("--xscale", choices=["linear", "log"], default="linear")
    plot.add_argument("--yscale", choices=["linear", "log"], default="linear")
    plot.add_argument("--kind", choices=["scatter", "line"], default="scatter")
    plot.add_argument("--title", default="")
    plot.add_argument("--name", help="output SVG file name")
    evolve = sub.add_parser("evolve", parents=[common], help="price distribution snapshots")
    evolve.add_argument("--preset", choices=sorted(PRICE_PRESETS))
    return parser


OVERRIDE_KEYS = (
    "seed", "n_agents", "total_goods", "total_money", "ratio", "ratios", "model", "n_sweeps",
    "burn_in_sweeps", "snapshot_sweeps", "wealth_sampling", "workers", "output_dir",
)


@dataclass
class CliInvocation:
    subcommand: str
    config_path: Optional[str] = None
    overrides: Dict[str, Any] = field(default_factory=dict)
    output_dir: Optional[str] = None
    options: Dict[str, Any] = field(default_factory=dict)
    verbose: bool = False


def parse_invocation(argv: Sequence[str]) -> CliInvocation:
    args = build_parser().parse_args(list(argv))
    overrides = {key: getattr(args, key) for key in OVERRIDE_KEYS}
    overrides["lambda"] = args.saving
    options = {
        k: v for k, v in vars(args).items()
        if k not in OVERRIDE_KEYS and k not in ("subcommand", "config", "saving", "verbose")
    }
    return CliInvocation(
        subcommand=args.subcommand,
        config_path=args.config,
        overrides=overrides,
        output_dir=args.output_dir,
        options=options,
        verbose=args.verbose,
    )


# ======================================================================================
# DISPATCH
# ======================================================================================

def resolve_config(invocation: CliInvocation, env: Optional[Mapping[str, str]] = None) -> ExperimentConfig:
    text = None
    if invocation.config_path:
        try:
            text = Path(invocation.config_path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigurationError(f"cannot read config file {invocation.config_path}: {e.strerror or e}",
                                     ["config"])
    return parse_config(text, invocation.overrides, env)


def _default_snapshots(config: ExperimentConfig) -> List[int]:
    n = config.n_sweeps
    return sorted({0, n // 10, n // 2, n})


def _run_plot(invocation: CliInvocation, config: ExperimentConfig, ui: IProgressReporter) -> None:
    opts = invocation.options
    spec = PlotSpec(
        x=opts["x"], y=opts["y"], xscale=opts["xscale"], yscale=opts["yscale"],
        kind=opts["kind"], title=opts["title"],
    )
    started = time.perf_counter()
    sink = DirectorySink(config.output_dir)
    path = emit_plot_svg(opts["csv"], spec, sink, opts.get("name"))
    sink.finalize("plot", config, time.perf_counter() - started)
    ui.log_info(f"Plot written to {path}")


def _route(invocation: CliInvocation, config: ExperimentConfig, ui: IProgressReporter) -> None:
    command = invocation.subcommand
    opts = invocation.options
    if command == "simulate":
        if opts.get("family"):
            run_wealth_family(config, ui=ui)
        else:
            run_wealth_experiment(config, ui=ui)
    elif command == "sweep":
        run_demand_sweep(config, ui=ui)
    elif command == "compare":
        run_comparison(config, ui=ui)
    elif command == "analyze":
        analyze_wealth_samples(opts["input"], config, ui=ui)
    elif command == "evolve":
        if opts.get("preset"):
            config = preset_config(config, opts["preset"])
        if not config.snapshot_sweeps:
            config = config.model_copy(update={"snapshot_sweeps": _default_snapshots(config)})
        run_price_evolution(config, ui=ui)
    elif command == "plot":
        _run_plot(invocation, config, ui)
    else:
        raise UsageError(f"unknown subcommand '{command}'")


def dispatch(
    invocation: CliInvocation,
    ui: Optional[IProgressReporter] = None,
    env: Optional[Mapping[str, str]] = None,
) -> int:
    """Run the invocation and map the outcome to an exit status."""
    ui = ui if ui is not None else TerminalProgress()
    try:
        config = resolve_config(invocation, env)
        _route(invocation, config, ui)
        return EXIT_OK
    except OutputError as e:
        ui.log_error(f"Output failed: {e}")
        return EXIT_FAILURE
    except KinexError as e:
        ui.log_error(str(e))
        return EXIT_INVALID
    except OSError as e:
        ui.log_error(f"I/O failure: {e}")
        return EXIT_FAILURE
    except Exception as e:
        logger.exception("Unexpected failure: %s", e)
        return EXIT_FAILURE
    finally:
        ui.close()


# ======================================================================================
# MAIN ENTRY POINT
# ======================================================================================

def main(argv: Optional[Sequence[str]] = None) -> int:
    # 1. Environment
    try:
        from dotenv import load_dotenv
        load_dotenv()
    except ImportError:
        pass  # dotenv not installed, ignore

    # 2. Logging (stderr only; data goes to files)
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format='%(asctime)s - %(levelname)s - %(message)s')

    # 3. Arguments
    try:
        invocation = parse_invocation(sys.argv[1:] if argv is None else argv)
    except UsageError as e:
        logger.error(str(e))
        return EXIT_INVALID
    if invocation.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    # 4. Run
    return dispatch(invocation)


if __name__ == "__main__":
    sys.exit(main())

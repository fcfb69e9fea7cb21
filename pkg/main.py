#!/usr/bin/env python3
import argparse
import logging
import os
import sys

import yaml

from cli.config import ConfigError, RunConfig, load_config_file, load_profile
from cli.interpreter import COMMANDS, SCHEMAS, Run, run_command
from cli.table import TableError
from estimation.fitting import FitError
from estimation.inversion import BracketError
from ion_cavity.model import ModelParameterError
from lindblad.errors import LindbladError
from optics.cavity import OpticsError
from run_log.run import RunLogger
from spatial.mode import SpatialModelError

log = logging.getLogger("ioncavity")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

NUMERICAL_ERRORS = (LindbladError, ModelParameterError, OpticsError, SpatialModelError,
                    FitError, BracketError, ArithmeticError)

LEVELS = {"debug": logging.DEBUG, "info": logging.INFO, "warn": logging.WARNING,
          "warning": logging.WARNING, "error": logging.ERROR}


def load_settings(settings_path="config/default.yaml"):
    try:
        with open(settings_path) as f:
            return yaml.safe_load(f) or {}
    except OSError as e:
        raise ConfigError(f"cannot read settings: {e.strerror}", source=settings_path) from None
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid YAML: {e}", source=settings_path) from None


def build_config(args, settings, profiles_dir="config/profiles"):
    """Defaults, then the parameter profile, then the key=value file, then --seed."""
    cfg = RunConfig()
    profile = args.profile or settings.get("profile")
    if profile:
        cfg = load_profile(profile, cfg, profiles_dir)
    if args.config:
        cfg = load_config_file(args.config, cfg)
    if args.seed is not None:
        cfg = cfg.replace(noise_seed=args.seed)
    return cfg


def error_line(code, exc):
    message = str(exc).replace('"', "'").replace("\n", " ")
    return f'error code={code} kind={type(exc).__name__} message="{message}"'


def build_parser():
    epilog = "output columns:\n" + "\n".join(f"  {name}: {SCHEMAS[name]}" for name in COMMANDS)
    parser = argparse.ArgumentParser(
        description="Single-ion fiber-cavity simulation and parameter extraction",
        epilog=epilog, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="key=value parameter file")
    parser.add_argument("--out", help="result table path (printed to stdout if omitted)")
    parser.add_argument("--seed", type=int, help="noise seed, overrides noise_seed")
    parser.add_argument("--profile", help="parameter profile under config/profiles")
    parser.add_argument("--settings", default="config/default.yaml",
                        help="application settings (integrator, fitting, logging)")
    parser.add_argument("--data", help="measured curve for fit-tau")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)

    run_logger = None
    try:
        settings = load_settings(args.settings)
        log_cfg = settings.get("logging", {})
        logging.basicConfig(
            level=LEVELS.get(str(log_cfg.get("level", "info")).lower(), logging.INFO),
            format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        )
        profiles_dir = os.path.join(os.path.dirname(os.path.abspath(args.settings)), "profiles")
        config = build_config(args, settings, profiles_dir)
        run_logger = RunLogger(settings)
        run = Run(config, settings, out=args.out, data=args.data, run_logger=run_logger)
        table = run_command(args.command, run)
    except ConfigError as e:
        return _fail(EXIT_CONFIG, e, run_logger)
    except NUMERICAL_ERRORS as e:
        return _fail(EXIT_NUMERICAL, e, run_logger)
    except (OSError, TableError) as e:
        return _fail(EXIT_CONFIG, e, run_logger)

    if not args.out:
        sys.stdout.write(table.render())
    run_logger.end_run(EXIT_OK)
    return EXIT_OK


def _fail(code, exc, run_logger):
    log.error(f"{type(exc).__name__}: {exc}")
    print(error_line(code, exc), file=sys.stderr)
    if run_logger:
        run_logger.log_error(type(exc).__name__, str(exc), code)
        run_logger.end_run(code)
    return code


if __name__ == "__main__":
    sys.exit(main())

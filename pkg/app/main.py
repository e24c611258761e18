import argparse
import json
import logging
import sys
from typing import Any, Optional, Sequence

from pydantic import ValidationError

from app.api.commands import run_command
from app.core.config import settings
from app.core.exceptions import InvalidConfigError, InvalidMetricError
from app.schemas.run import Command, RunConfig

logger = logging.getLogger(__name__)

PARAM_KEYS = ("rho", "lambda", "x", "y")
METRIC_KEYS = ("r2", "s2", "k2")
BUNDLE_KEYS = ("tr2", "ts2", "tk2")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise InvalidConfigError(f"expected comma separated numbers, got {text!r}")


def parse_metric(value: Any) -> dict:
    """
    Metric from ``r2,s2,k2[,u_re,u_im[,v_re,v_im,z_re,z_im]]`` text, a list or a dict.

    Raises:
        InvalidConfigError: If the number of values is wrong
    """
    if isinstance(value, dict):
        return value
    values = _floats(value) if isinstance(value, str) else [float(v) for v in value]
    if len(values) not in (3, 5, 9):
        raise InvalidConfigError(f"--metric takes 3, 5 or 9 values, got {len(values)}")
    values += [0.0] * (9 - len(values))
    r2, s2, k2, u_re, u_im, v_re, v_im, z_re, z_im = values
    return {"r2": r2, "s2": s2, "k2": k2, "u": [u_re, u_im], "v": [v_re, v_im], "z": [z_re, z_im]}


def parse_bundle(value: Any) -> dict:
    """Bundle metric from ``tr2,ts2,tk2`` text, a list or a dict."""
    if isinstance(value, dict):
        return value
    values = _floats(value) if isinstance(value, str) else [float(v) for v in value]
    if len(values) != 3:
        raise InvalidConfigError(f"--bundle takes 3 values, got {len(values)}")
    return dict(zip(BUNDLE_KEYS, values))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.PROJECT_NAME,
        description="Invariant Hermitian geometry and the Anomaly flow on 2-step nilpotent Lie groups",
    )
    parser.add_argument("command", choices=[c.value for c in Command], help="Subcommand to run")
    parser.add_argument("--config", type=str, default=None, help="JSON file whose keys mirror the long flags")
    parser.add_argument("--group", type=str, default=None, help="Catalog group N2, N3, N5 or N8")
    parser.add_argument("--rho", type=int, default=None)
    parser.add_argument("--lambda", dest="lam", type=float, default=None)
    parser.add_argument("--x", type=float, default=None)
    parser.add_argument("--y", type=float, default=None)
    parser.add_argument("--metric", type=str, default=None, help="r2,s2,k2,u_re,u_im,v_re,v_im,z_re,z_im")
    parser.add_argument("--bundle", type=str, default=None, help="tr2,ts2,tk2")
    parser.add_argument("--tau", type=float, default=None)
    parser.add_argument("--kappa", type=float, default=None)
    parser.add_argument("--alpha-prime", type=float, default=None)
    parser.add_argument("--dt", type=float, default=None)
    parser.add_argument("--t-max", type=float, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--draws", type=int, default=None)
    parser.add_argument("--settle", action="store_true", default=None, help="hsi: integrate before evaluating")
    parser.add_argument("--k1-grid", type=str, default=None, help="Comma separated K1 values for classify")
    parser.add_argument("--k2-grid", type=str, default=None, help="Comma separated K2 values for classify")
    parser.add_argument("--out", type=str, default=None, help="Output path; stdout when omitted")
    parser.add_argument("--format", choices=["json", "csv"], default=None)
    return parser


def load_config_file(path: str) -> dict:
    """
    Raises:
        InvalidConfigError: If the file is missing or not a JSON object
    """
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidConfigError(f"cannot read config file {path}: {str(e)}")
    if not isinstance(data, dict):
        raise InvalidConfigError(f"config file {path} must hold a JSON object")
    return {key.replace("-", "_"): value for key, value in data.items()}


def build_config(args: argparse.Namespace) -> RunConfig:
    """
    Merge flags over the optional config file into a RunConfig.

    Raises:
        InvalidConfigError: On unreadable files or malformed values
        ValidationError: If a value violates the RunConfig schema
    """
    raw = load_config_file(args.config) if args.config else {}
    flags = {key: value for key, value in vars(args).items() if value is not None and key != "config"}
    if "lam" in flags:
        flags["lambda"] = flags.pop("lam")
    raw.update(flags)

    data: dict[str, Any] = {"command": raw.pop("command")}
    params = dict(raw.pop("params", {}))
    params.update({key: raw.pop(key) for key in PARAM_KEYS if key in raw})
    data["params"] = params
    if "metric" in raw:
        data["metric"] = parse_metric(raw.pop("metric"))
    bundle = raw.pop("bundle", raw.pop("bundle_metric", None))
    if bundle is not None:
        data["bundle_metric"] = parse_bundle(bundle)
    for key in ("k1_grid", "k2_grid"):
        if isinstance(raw.get(key), str):
            raw[key] = _floats(raw[key])
    data.update(raw)
    return RunConfig.model_validate(data)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = build_config(args)
    except ValidationError as e:
        logger.error(f"Invalid configuration: {str(e)}")
        return InvalidConfigError.exit_code
    except (InvalidConfigError, InvalidMetricError) as e:
        logger.error(f"Invalid configuration: {e.detail}")
        return InvalidConfigError.exit_code
    logger.info(f"Running {config.command.value}")
    return run_command(config)


if __name__ == "__main__":
    sys.exit(main())

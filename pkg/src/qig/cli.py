"""Command line entry point: ``qig run --config cfg.json [overrides]``.

Exit status is 0 when every in-run check passes, 1 when a check fails (the
violating instances go to stderr as JSON) and 2 for an invalid config.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .errors import DomainError, NotSmallError
from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, run_experiment
from .models import ModelSpec

CONFIG_FIELDS = {"experiment", "model", "ensemble_size", "eps_grid_points", "seed",
                 "output_path", "format"}
MODEL_FIELDS = {"family", "dim", "params", "beta0"}


def _line_of(text: str, key: str) -> int | None:
    needle = f'"{key}"'
    for n, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return n
    return None


def _where(text, key):
    n = _line_of(text, key) if text else None
    return f"line {n}, field {key!r}" if n else f"field {key!r}"


def load_config(path: str | None, overrides: dict) -> ExperimentConfig:
    text, raw = "", {}
    if path is not None:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config", "top level must be a JSON object")
    for key in raw:
        if key not in CONFIG_FIELDS:
            raise ConfigError(_where(text, key), "unknown field")
    raw.update({k: v for k, v in overrides.items() if v is not None})
    if "experiment" not in raw:
        raise ConfigError("experiment", "missing (set it in the config or pass --experiment)")
    model = raw.get("model", {"family": "oscillator", "dim": 8})
    if not isinstance(model, dict):
        raise ConfigError(_where(text, "model"), "must be an object")
    for key in model:
        if key not in MODEL_FIELDS:
            raise ConfigError(_where(text, key), "unknown model field")
    if "dim" in model and (isinstance(model["dim"], bool) or not isinstance(model["dim"], int)):
        raise ConfigError(_where(text, "dim"), f"must be an integer, got {model['dim']!r}")
    if not isinstance(model.get("params", {}), dict):
        raise ConfigError(_where(text, "params"), "must be an object")
    try:
        spec = ModelSpec.from_dict(model)
    except (KeyError, TypeError, ValueError) as exc:
        bad = next((k for k in ("family", "dim", "beta0", "params") if k in str(exc)), "model")
        raise ConfigError(_where(text, bad), str(exc).strip("'\"")) from None
    try:
        cfg = ExperimentConfig(
            experiment=raw["experiment"], model=spec,
            ensemble_size=raw.get("ensemble_size", 10),
            eps_grid_points=raw.get("eps_grid_points", 21),
            seed=raw.get("seed", 0), output_path=raw.get("output_path"),
            format=raw.get("format", "csv"))
        return cfg.validate()
    except ConfigError as exc:
        raise ConfigError(_where(text, exc.field), str(exc).split(": ", 1)[1]) from None


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def to_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v) if math.isfinite(v) else None
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def to_json(cfg, result) -> str:
    doc = {
        "experiment": cfg.experiment,
        "config": cfg.to_dict(),
        "passed": result.passed,
        "columns": list(result.columns),
        "rows": [dict(zip(result.columns, r)) for r in result.rows],
        "summary": result.summary,
    }
    return json.dumps(_jsonable(doc), indent=1)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qig")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one experiment")
    r.add_argument("--config", help="JSON config file")
    r.add_argument("--experiment", choices=EXPERIMENTS)
    r.add_argument("--seed", type=int)
    r.add_argument("--out", dest="output_path")
    r.add_argument("--format", choices=("csv", "json"))
    r.add_argument("--ensemble-size", dest="ensemble_size", type=int)
    r.add_argument("--eps-grid-points", dest="eps_grid_points", type=int)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: getattr(args, k) for k in
                 ("experiment", "seed", "output_path", "format", "ensemble_size", "eps_grid_points")}
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"qig: invalid config: {exc}", file=sys.stderr)
        return 2
    try:
        result = run_experiment(cfg)
    except ConfigError as exc:
        print(f"qig: invalid config: {exc}", file=sys.stderr)
        return 2
    except (NotSmallError, DomainError) as exc:
        print(f"qig: invalid config: model produced an inadmissible instance: {exc}", file=sys.stderr)
        return 2
    text = to_json(cfg, result) if cfg.format == "json" else to_csv(result.columns, result.rows)
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if not result.passed:
        print(json.dumps(_jsonable({"experiment": cfg.experiment, "violations": result.violations}),
                         indent=1), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

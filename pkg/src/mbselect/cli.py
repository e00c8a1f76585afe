"""Command-line interface: simulate | select | calibrate | bench.

Every command takes a strict JSON config (--config); unknown keys anywhere
are rejected, defaults are materialized, and the fully resolved config is
echoed into each artifact so outputs are self-describing. Artifacts go under
--out; logs go to stderr. Exit codes: 0 success, 1 runtime failure, 2
usage/config error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .boosting import EnsembleParams
from .data import load_table, write_table_csv
from .evalbench import f1, rcit_calibration, replicate_study
from .multigroup import MultiGroupConfig, run_m3
from .rcit import RcitParams
from .simgen import SimSpec, generate

SCHEMA_VERSION = 1

ALPHA_PRESETS = {"simulation": 1e-4, "real-data": 1e-6}

_REQUIRED = object()


class ConfigError(Exception):
    pass


class _Section:
    """One dict level of the config; tracks consumed keys to reject unknowns."""

    def __init__(self, raw, path: str):
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: expected an object")
        self.raw = raw
        self.path = path
        self.used: set[str] = set()

    def take(self, key, default=_REQUIRED, kind=None, choices=None):
        self.used.add(key)
        if key not in self.raw:
            if default is _REQUIRED:
                raise ConfigError(f"{self.path}.{key}: required key missing")
            return default
        value = self.raw[key]
        if kind is bool:
            if not isinstance(value, bool):
                raise ConfigError(f"{self.path}.{key}: expected a boolean")
        elif kind is int:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{self.path}.{key}: expected an integer")
        elif kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{self.path}.{key}: expected a number")
            value = float(value)
        elif kind is str:
            if not isinstance(value, str):
                raise ConfigError(f"{self.path}.{key}: expected a string")
        if choices is not None and value not in choices:
            raise ConfigError(f"{self.path}.{key}: must be one of {sorted(choices)}")
        return value

    def subsection(self, key) -> "_Section":
        self.used.add(key)
        return _Section(self.raw.get(key, {}), f"{self.path}.{key}")

    def finish(self) -> None:
        unknown = set(self.raw) - self.used
        if unknown:
            raise ConfigError(f"{self.path}: unknown keys {sorted(unknown)}")


def _resolve_alpha(value, path: str) -> float:
    if isinstance(value, str):
        if value not in ALPHA_PRESETS:
            raise ConfigError(f"{path}: unknown alpha preset {value!r}")
        return ALPHA_PRESETS[value]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number or preset name")
    alpha = float(value)
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"{path}: alpha must be in (0, 1)")
    return alpha


def _resolve_simulate(section: _Section) -> dict:
    resolved = {
        "kind": section.take("kind", kind=str, choices={"linear_interactions", "complex"}),
        "rho": section.take("rho", 0.5, kind=float),
        "n": section.take("n", 5000, kind=int),
        "response": section.take(
            "response", "continuous", kind=str, choices={"continuous", "binary"}
        ),
        "seed": section.take("seed", 0, kind=int),
    }
    section.finish()
    return resolved


def _resolve_rcit(section: _Section) -> dict:
    resolved = {
        "m": section.take("m", 5, kind=int),
        "q": section.take("q", 5, kind=int),
        "d_per_cond_var": section.take("d_per_cond_var", 20, kind=int),
        "d_min": section.take("d_min", 25, kind=int),
        "d_total": section.take("d_total", None),
        "ridge": section.take("ridge", 1e-8, kind=float),
        "null_method": section.take(
            "null_method", "gamma3", kind=str, choices={"gamma2", "gamma3", "montecarlo"}
        ),
        "mc_samples": section.take("mc_samples", 100_000, kind=int),
    }
    if resolved["d_total"] is not None and (
        isinstance(resolved["d_total"], bool) or not isinstance(resolved["d_total"], int)
    ):
        raise ConfigError(f"{section.path}.d_total: expected an integer or null")
    section.finish()
    return resolved


def _resolve_ensemble(section: _Section, n_trees: int, max_depth: int) -> dict:
    resolved = {
        "n_trees": section.take("n_trees", n_trees, kind=int),
        "max_depth": section.take("max_depth", max_depth, kind=int),
        "learning_rate": section.take("learning_rate", 0.2, kind=float),
        "min_samples_leaf": section.take("min_samples_leaf", 20, kind=int),
    }
    section.finish()
    return resolved


def _resolve_algo(section: _Section, with_target: bool) -> dict:
    resolved = {}
    if with_target:
        resolved["target"] = section.take("target", kind=str)
        hints = section.take("schema_hints", {})
        if not isinstance(hints, dict) or not all(
            isinstance(k, str) and v in ("continuous", "categorical") for k, v in hints.items()
        ):
            raise ConfigError(
                f"{section.path}.schema_hints: expected a map of column -> kind"
            )
        resolved["schema_hints"] = hints
    resolved["alpha"] = _resolve_alpha(
        section.take("alpha", 1e-4), f"{section.path}.alpha"
    )
    resolved["group_threshold"] = section.take("group_threshold", 0.2, kind=float)
    resolved["max_group_size"] = section.take("max_group_size", 5, kind=int)
    resolved["fbed_k"] = section.take("fbed_k", 1, kind=int)
    resolved["max_outer_iterations"] = section.take("max_outer_iterations", 10, kind=int)
    resolved["pack_singletons"] = section.take("pack_singletons", True, kind=bool)
    resolved["seed"] = section.take("seed", 0, kind=int)
    groups = section.take("groups", None)
    if groups is not None and not (
        isinstance(groups, list)
        and all(
            isinstance(g, list) and g and all(isinstance(n, str) for n in g) for g in groups
        )
    ):
        raise ConfigError(f"{section.path}.groups: expected a list of name lists")
    resolved["groups"] = groups
    resolved["rcit"] = _resolve_rcit(section.subsection("rcit"))
    resolved["ensemble_regression"] = _resolve_ensemble(
        section.subsection("ensemble_regression"), 200, 4
    )
    resolved["ensemble_classification"] = _resolve_ensemble(
        section.subsection("ensemble_classification"), 300, 5
    )
    section.finish()
    return resolved


def _resolve_calibrate(section: _Section) -> dict:
    cond_sizes = section.take("cond_sizes")
    d_values = section.take("d_values")
    for name, values in (("cond_sizes", cond_sizes), ("d_values", d_values)):
        if not (
            isinstance(values, list)
            and values
            and all(isinstance(v, int) and not isinstance(v, bool) for v in values)
        ):
            raise ConfigError(f"{section.path}.{name}: expected a non-empty integer list")
    resolved = {
        "cond_sizes": cond_sizes,
        "d_values": d_values,
        "n": section.take("n", 10_000, kind=int),
        "n_reps": section.take("n_reps", 100, kind=int),
        "rho": section.take("rho", 0.5, kind=float),
        "alpha": section.take("alpha", 0.05, kind=float),
        "seed": section.take("seed", 0, kind=int),
    }
    section.finish()
    return resolved


def _resolve_bench(section: _Section) -> dict:
    study = section.subsection("study")
    resolved = {
        "study": _resolve_simulate(study),
        "n_reps": section.take("n_reps", 5, kind=int),
        "base_seed": section.take("base_seed", 0, kind=int),
        "select": _resolve_algo(section.subsection("select"), with_target=False),
    }
    section.finish()
    return resolved


def _load_config(path: str, command: str) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}")
    top = _Section(raw, "config")
    version = top.take("schema_version", kind=int)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"config.schema_version: expected {SCHEMA_VERSION}")
    sections = {}
    for name in ("simulate", "select", "calibrate", "bench"):
        top.used.add(name)
        if name in raw:
            sections[name] = raw[name]
    top.finish()
    if command not in sections:
        raise ConfigError(f"config has no {command!r} section")
    resolvers = {
        "simulate": _resolve_simulate,
        "calibrate": _resolve_calibrate,
        "bench": _resolve_bench,
    }
    if command == "select":
        resolved = _resolve_algo(_Section(sections["select"], "config.select"), True)
    else:
        resolved = resolvers[command](_Section(sections[command], f"config.{command}"))
    return {"schema_version": SCHEMA_VERSION, command: resolved}


def _algo_to_config(resolved: dict) -> MultiGroupConfig:
    rc = resolved["rcit"]
    reg = resolved["ensemble_regression"]
    clf = resolved["ensemble_classification"]
    return MultiGroupConfig(
        group_threshold=resolved["group_threshold"],
        max_group_size=resolved["max_group_size"],
        alpha=resolved["alpha"],
        fbed_k=resolved["fbed_k"],
        max_outer_iterations=resolved["max_outer_iterations"],
        pack_singletons=resolved["pack_singletons"],
        rcit_params=RcitParams(
            m=rc["m"],
            q=rc["q"],
            d_per_cond_var=rc["d_per_cond_var"],
            d_min=rc["d_min"],
            d_total=rc["d_total"],
            ridge=rc["ridge"],
            null_method=rc["null_method"],
            mc_samples=rc["mc_samples"],
        ),
        ensemble_params_regression=EnsembleParams(
            n_trees=reg["n_trees"],
            max_depth=reg["max_depth"],
            learning_rate=reg["learning_rate"],
            min_samples_leaf=reg["min_samples_leaf"],
            objective="squared_error",
        ),
        ensemble_params_classification=EnsembleParams(
            n_trees=clf["n_trees"],
            max_depth=clf["max_depth"],
            learning_rate=clf["learning_rate"],
            min_samples_leaf=clf["min_samples_leaf"],
            objective="logistic",
        ),
        prespecified_groups=(
            tuple(tuple(g) for g in resolved["groups"]) if resolved["groups"] else None
        ),
        seed=resolved["seed"],
    )


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def cmd_simulate(config: dict, out_dir: Path) -> int:
    resolved = config["simulate"]
    sim = generate(
        SimSpec(
            kind=resolved["kind"],
            rho=resolved["rho"],
            n=resolved["n"],
            response=resolved["response"],
            seed=resolved["seed"],
        )
    )
    csv_path = out_dir / "data.csv"
    write_table_csv(sim.table, csv_path)
    _write_json(
        out_dir / "truth.json",
        {
            "schema_version": SCHEMA_VERSION,
            "true_mb": sorted(sim.true_mb),
            "roles": sim.dag_roles,
            "resolved_config": config,
        },
    )
    print(f"wrote {csv_path} and truth.json", file=sys.stderr)
    return 0


def cmd_select(config: dict, data_path: str, out_dir: Path) -> int:
    resolved = config["select"]
    try:
        table = load_table(data_path, resolved["schema_hints"] or None)
    except FileNotFoundError:
        raise ConfigError(f"data file not found: {data_path}")
    except ValueError as err:
        raise ConfigError(str(err))
    target = resolved["target"]
    if not table.has_column(target):
        raise ConfigError(f"target column {target!r} not present in {data_path}")
    start = time.perf_counter()
    state = run_m3(table, target, _algo_to_config(resolved))
    elapsed = time.perf_counter() - start
    groups = {"g" + str(i): list(g) for i, g in enumerate(state.partition.continuous_groups)}
    if state.partition.categorical_group:
        groups["cat"] = list(state.partition.categorical_group)
    report = {
        "schema_version": SCHEMA_VERSION,
        "selected": sorted(state.mb_set),
        "iterations": state.outer_iteration,
        "converged": state.converged,
        "grouping": "prespecified" if resolved["groups"] else "clustered",
        "groups": groups,
        "per_group_selected": {k: list(v) for k, v in state.per_group_selected.items()},
        "trace_summary": {
            gid: {
                "events": len(trace.events),
                "added": trace.variables("added"),
                "removed": trace.variables("removed"),
            }
            for gid, trace in state.traces.items()
        },
        "runtime_s": elapsed,
        "resolved_config": config,
    }
    _write_json(out_dir / "report.json", report)
    print(
        f"selected {len(state.mb_set)} variables in {state.outer_iteration} passes",
        file=sys.stderr,
    )
    return 0


def cmd_calibrate(config: dict, out_dir: Path) -> int:
    resolved = config["calibrate"]
    rows = rcit_calibration(
        resolved["cond_sizes"],
        resolved["d_values"],
        resolved["n"],
        resolved["n_reps"],
        seed=resolved["seed"],
        rho=resolved["rho"],
        alpha=resolved["alpha"],
    )
    path = out_dir / "calibration.csv"
    lines = ["cond_size,d,fpr,mean_runtime_s"]
    for row in rows:
        lines.append(f"{row.cond_size},{row.d},{row.fpr!r},{row.mean_runtime_s!r}")
    path.write_text("\n".join(lines) + "\n")
    print(f"wrote {path} ({len(rows)} rows)", file=sys.stderr)
    return 0


def cmd_bench(config: dict, out_dir: Path) -> int:
    resolved = config["bench"]
    study = resolved["study"]
    report = replicate_study(
        SimSpec(
            kind=study["kind"],
            rho=study["rho"],
            n=study["n"],
            response=study["response"],
            seed=study["seed"],
        ),
        _algo_to_config(resolved["select"]),
        resolved["n_reps"],
        resolved["base_seed"],
    )
    payload = report.to_dict()
    payload["schema_version"] = SCHEMA_VERSION
    payload["resolved_config"] = config
    _write_json(out_dir / "bench_report.json", payload)
    print(f"mean F1 {report.mean_f1:.3f} over {len(report.records)} reps", file=sys.stderr)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mbselect",
        description="Markov-boundary feature selection toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("simulate", "select", "calibrate", "bench"):
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="JSON config path")
        cmd.add_argument("--data", help="input CSV (select only)")
        cmd.add_argument("--out", default=".", help="output directory")
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as err:
        return int(err.code or 0)
    try:
        config = _load_config(args.config, args.command)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "simulate":
            return cmd_simulate(config, out_dir)
        if args.command == "select":
            if not args.data:
                raise ConfigError("select requires --data <csv>")
            return cmd_select(config, args.data, out_dir)
        if args.command == "calibrate":
            return cmd_calibrate(config, out_dir)
        return cmd_bench(config, out_dir)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # runtime failure
        print(f"error: {err}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

"""Command-line front end: config-driven design runs, verification,
order-rule comparison, and the exhaustive oracle for small problems.

One JSON config file describes a run: a problem section (either an inline
filter spec or a path to a halfspace-set file), a search section, an output
directory, and emit flags.  Command-line flags can override the seed, the
output directory, and any leaf key.  Trace output is byte-reproducible for a
fixed config and seed; wall-clock information is isolated in the summary
file so it never perturbs the trace.

Exit codes: 0 success, 1 configuration or usage or parse error, 2 infeasible
problem, 3 internal solver failure, 4 verification failure, 5 oracle size
limit.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import statistics
import sys
import time
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import numpy as np

from .filters import (FilterSpec, build_filter_set, filter_spec_from_config,
                      impulse_to_x, load_impulse_csv, load_impulse_json,
                      save_impulse_csv, save_impulse_json, verify_filter,
                      x_to_impulse)
from .lp import MaxIterationsExceeded
from .polytope import ZERO_TOL, Polytope
from .search import (SamplingStalled, SearchConfig, SearchTrace,
                     SizeLimitExceeded, brute_force_oracle, run_breadth_first,
                     run_depth_first, trace_from_dict, trace_to_dict)
from .sets import HalfspaceSet, InfeasibleSet, halfspace_set_from_dict

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2
EXIT_SOLVER = 3
EXIT_VERIFY = 4
EXIT_SIZE_LIMIT = 5


class ConfigError(ValueError):
    """Bad, missing, or contradictory configuration."""


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this artifact reserves 2 for
    infeasible problems, so usage errors are remapped to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _bundled_config_text(name: str) -> str | None:
    base = resources.files("sparsewalk").joinpath("configs")
    for candidate in (name, f"{name}.json"):
        target = base.joinpath(candidate)
        if target.is_file():
            return target.read_text()
    return None


def _read_config_document(ref: str) -> tuple[dict, str, Path | None]:
    """Load a config by path or bundled name.  Returns the parsed document,
    a display name, and the on-disk directory when there is one (used to
    resolve relative file references inside the config)."""
    path = Path(ref)
    if path.is_file():
        try:
            return json.loads(path.read_text()), str(path), path.parent
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    text = _bundled_config_text(ref)
    if text is None:
        raise ConfigError(f"config {ref!r} is neither a file nor a bundled config")
    return json.loads(text), ref, None


def _parse_override(item: str) -> tuple[list[str], object]:
    if "=" not in item:
        raise ConfigError(f"--set expects path=value, got {item!r}")
    raw_path, raw_value = item.split("=", 1)
    keys = [k for k in raw_path.strip().split(".") if k]
    if not keys:
        raise ConfigError(f"--set has an empty key path in {item!r}")
    try:
        value = json.loads(raw_value)
    except json.JSONDecodeError:
        value = raw_value
    return keys, value


def _apply_override(config: dict, keys: list[str], value: object) -> None:
    node = config
    for key in keys[:-1]:
        nxt = node.get(key)
        if nxt is None:
            nxt = node[key] = {}
        if not isinstance(nxt, dict):
            raise ConfigError(f"--set path {'.'.join(keys)} crosses non-object key {key!r}")
        node = nxt
    node[keys[-1]] = value


def load_run_config(args) -> tuple[dict, str, Path | None]:
    if not getattr(args, "config", None):
        raise ConfigError("--config is required")
    config, name, base_dir = _read_config_document(args.config)
    for item in getattr(args, "set", None) or []:
        keys, value = _parse_override(item)
        _apply_override(config, keys, value)
    if getattr(args, "seed", None) is not None:
        config.setdefault("search", {})["seed"] = args.seed
    if getattr(args, "out", None):
        config["output_dir"] = args.out
    return config, name, base_dir


def build_problem(config: dict, base_dir: Path | None) -> tuple[HalfspaceSet, FilterSpec | None]:
    problem = config.get("problem")
    if not isinstance(problem, dict):
        raise ConfigError("config needs a `problem` object")
    has_filter = "filter" in problem
    has_file = "halfspace_file" in problem
    if has_filter == has_file:
        raise ConfigError("problem needs exactly one of `filter`, `halfspace_file`")
    if has_filter:
        try:
            spec = filter_spec_from_config(problem["filter"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad filter section: {exc}") from exc
        return build_filter_set(spec), spec
    ref = str(problem["halfspace_file"])
    for candidate in ([Path(ref)] + ([base_dir / ref] if base_dir else [])):
        if candidate.is_file():
            return halfspace_set_from_dict(json.loads(candidate.read_text())), None
    text = _bundled_config_text(ref)
    if text is None:
        raise ConfigError(f"halfspace_file {ref!r} not found")
    return halfspace_set_from_dict(json.loads(text)), None


def build_search_config(config: dict) -> SearchConfig:
    section = config.get("search", {})
    if not isinstance(section, dict):
        raise ConfigError("`search` must be an object")
    known = {f.name for f in dataclasses.fields(SearchConfig)}
    unknown = set(section) - known
    if unknown:
        raise ConfigError(f"unknown search keys: {sorted(unknown)}")
    try:
        return SearchConfig(**section)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad search section: {exc}") from exc


def _emit_flags(config: dict) -> dict:
    defaults = {"trace_json": True, "impulse_csv": True,
                "plot_script": True, "summary": True}
    flags = dict(defaults)
    section = config.get("emit", {})
    if not isinstance(section, dict):
        raise ConfigError("`emit` must be an object")
    unknown = set(section) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown emit flags: {sorted(unknown)}")
    flags.update({k: bool(v) for k, v in section.items()})
    return flags


_PLOT_SCRIPT = """\
#!/usr/bin/env python
\"\"\"Plot the designed filter: taps from impulse.csv and the amplitude
response they imply.  Requires numpy and matplotlib.\"\"\"

import csv
from pathlib import Path

import numpy as np
import matplotlib.pyplot as plt

here = Path(__file__).parent
with open(here / "impulse.csv", newline="") as fh:
    reader = csv.reader(fh)
    next(reader)
    taps = np.array([float(row[1]) for row in reader])

center = (taps.size - 1) // 2
x = np.concatenate([[taps[center]], 2.0 * taps[center + 1:]])
omega = np.linspace(0.0, np.pi, 2048)
T = np.cos(np.outer(omega, np.arange(x.size))) @ x

fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(8, 7))
ax0.stem(np.arange(taps.size), taps)
ax0.set_title("impulse response (%d of %d taps nonzero)"
              % (int(np.sum(np.abs(taps) > 1e-9)), taps.size))
ax0.set_xlabel("n")
ax1.plot(omega / np.pi, T)
ax1.set_title("amplitude response")
ax1.set_xlabel("omega / pi")
ax1.grid(True)
fig.tight_layout()
fig.savefig(here / "design.png", dpi=150)
print("wrote", here / "design.png")
"""


def _write_summary(path: Path, lines: list[str]) -> None:
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    path.write_text("\n".join(lines + [f"timestamp: {stamp}", ""]))


def _pick_trace(traces: list[SearchTrace]) -> SearchTrace:
    return max(traces, key=lambda t: t.walk_length)


def cmd_design(args) -> int:
    config, name, base_dir = load_run_config(args)
    hs, spec = build_problem(config, base_dir)
    scfg = build_search_config(config)
    emit = _emit_flags(config)
    out_dir = Path(config.get("output_dir") or f"runs/{Path(name).stem}")
    out_dir.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    if scfg.protocol == "bfs":
        traces = run_breadth_first(hs, scfg)
        trace = _pick_trace(traces)
        n_leaves = len(traces)
    else:
        trace = run_depth_first(hs, scfg)
        n_leaves = 1
    wall = time.perf_counter() - t0

    if emit["trace_json"]:
        payload = trace_to_dict(trace)
        (out_dir / "trace.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n")
    x = trace.chosen_solution
    if spec is not None and emit["impulse_csv"]:
        h = x_to_impulse(x)
        save_impulse_csv(h, out_dir / "impulse.csv")
        save_impulse_json(h, out_dir / "impulse.json")
    if spec is not None and emit["plot_script"]:
        (out_dir / "plot_design.py").write_text(_PLOT_SCRIPT)

    nnz = int(np.count_nonzero(np.abs(x) > ZERO_TOL))
    vanish_time = sum(rec.elapsed for rec in trace.per_generation)
    lines = [
        f"config: {name}",
        f"problem: {hs.label or 'halfspace set'} (dimension {hs.dim}, {hs.n_rows} rows)",
        f"protocol: {scfg.protocol}",
        f"seed: {scfg.seed}",
        f"walk length: {trace.walk_length}",
        f"vanished coordinates: {trace.walk}",
        f"nonzero coefficients: {nnz} of {hs.dim}",
        f"restarts: {trace.restarts}",
        f"leaves examined: {n_leaves}",
        f"vanish time: {vanish_time:.3f} s",
        f"wall time: {wall:.3f} s",
    ]
    if spec is not None:
        report = verify_filter(x, spec, dense_factor=1)
        lines.append(f"nonzero taps: {report.tap_nonzeros} of {spec.n_taps}")
        lines.append(f"design-grid check: {'PASS' if report.passed else 'FAIL'}")
    if emit["summary"]:
        _write_summary(out_dir / "summary.txt", lines)
    if not args.quiet:
        for line in lines:
            print(line)
        print(f"outputs in {out_dir}")
    return EXIT_OK


def _solution_from_input(path: Path) -> np.ndarray:
    if not path.is_file():
        raise ConfigError(f"input file {path} not found")
    if path.suffix.lower() == ".csv":
        return impulse_to_x(load_impulse_csv(path))
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    if isinstance(data, dict) and "walk" in data:
        return trace_from_dict(data).chosen_solution
    if isinstance(data, dict) and "taps" in data:
        return impulse_to_x(load_impulse_json(path))
    raise ConfigError(f"{path}: neither a trace nor an impulse file")


def cmd_verify(args) -> int:
    config, _, _ = load_run_config(args)
    problem = config.get("problem", {})
    if "filter" not in problem:
        raise ConfigError("verify requires a config with a filter problem")
    spec = filter_spec_from_config(problem["filter"])
    try:
        x = _solution_from_input(Path(args.input))
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from exc
    if x.shape[0] != spec.N:
        raise ConfigError(
            f"input has {x.shape[0]} coefficients, spec wants {spec.N}")
    report = verify_filter(x, spec, dense_factor=args.dense_factor)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_compare_orders(args) -> int:
    config, name, base_dir = load_run_config(args)
    seeds = args.seeds
    if len(seeds) < 2:
        raise ConfigError("compare-orders needs at least 2 seeds")
    hs, _ = build_problem(config, base_dir)
    scfg = build_search_config(config)
    out_dir = Path(config.get("output_dir") or f"runs/{Path(name).stem}")
    out_dir.mkdir(parents=True, exist_ok=True)

    from .search import fixed_order_from_l1
    order = fixed_order_from_l1(hs)

    rows = []
    for seed in seeds:
        rt = run_depth_first(hs, dataclasses.replace(
            scfg, protocol="dfs_runtime", seed=seed))
        fx = run_depth_first(hs, dataclasses.replace(
            scfg, protocol="dfs_fixed_order", fixed_order=order, seed=seed))
        rows.append((seed, rt.walk_length, fx.walk_length))

    table_path = out_dir / "order_comparison.csv"
    with open(table_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["seed", "walk_runtime", "walk_fixed"])
        writer.writerows(rows)

    med_rt = statistics.median(r[1] for r in rows)
    med_fx = statistics.median(r[2] for r in rows)
    if not args.quiet:
        for seed, wr, wf in rows:
            print(f"seed {seed}: runtime-order walk {wr}, fixed-order walk {wf}")
    print(f"median walk length: runtime order {med_rt}, fixed order {med_fx}")
    print(f"table: {table_path}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    config, name, base_dir = load_run_config(args)
    hs, _ = build_problem(config, base_dir)
    scfg = build_search_config(config)

    roots: list[Polytope] = []

    def grab_root(generation: int, polytope: Polytope) -> None:
        if generation == len(polytope.vanished) == 0 and not roots:
            roots.append(polytope)

    run_cfg = scfg if scfg.protocol != "bfs" else dataclasses.replace(
        scfg, protocol="dfs_runtime")
    trace = run_depth_first(hs, run_cfg, checkpoint_callback=grab_root)
    over_s, pattern_s = brute_force_oracle(hs, "over_S")
    over_hull, pattern_hull = brute_force_oracle(hs, "over_hull", polytope=roots[0])
    gap = over_hull - trace.walk_length

    print(f"problem: {hs.label or name} (dimension {hs.dim})")
    print(f"max vanish over the set: {over_s}  witness {list(pattern_s)}")
    print(f"max vanish over the sampled hull: {over_hull}  witness {list(pattern_hull)}")
    print(f"greedy walk length (seed {run_cfg.seed}): {trace.walk_length}")
    print(f"gap (hull oracle - greedy): {gap}")
    return EXIT_OK


def build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="JSON config file or bundled config name")
    common.add_argument("--seed", type=int, metavar="U64",
                        help="override the search seed")
    common.add_argument("--set", action="append", metavar="PATH=VALUE",
                        help="override a config key, e.g. search.M=200")
    common.add_argument("--out", metavar="DIR", help="override the output directory")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")

    parser = _Parser(prog="sparsewalk",
                     description="greedy sparse solutions over convex feasible sets")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_design = sub.add_parser("design", parents=[common],
                              help="run a configured search and write artifacts")
    p_design.set_defaults(func=cmd_design)

    p_verify = sub.add_parser("verify", parents=[common],
                              help="check a designed filter against its spec")
    p_verify.add_argument("input", help="impulse CSV/JSON or trace JSON")
    p_verify.add_argument("--dense-factor", type=int, default=1,
                          help="verification grid refinement (default 1)")
    p_verify.set_defaults(func=cmd_verify)

    p_cmp = sub.add_parser("compare-orders", parents=[common],
                           help="run both depth-first order rules over seeds")
    p_cmp.add_argument("--seeds", type=_seed_list, required=True,
                       metavar="S1,S2,...", help="comma-separated seed list")
    p_cmp.set_defaults(func=cmd_compare_orders)

    p_oracle = sub.add_parser("oracle", parents=[common],
                              help="exhaustive vanish-count bound for small problems")
    p_oracle.set_defaults(func=cmd_oracle)
    return parser


def _seed_list(text: str) -> list[int]:
    try:
        seeds = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from exc
    if any(s < 0 for s in seeds):
        raise argparse.ArgumentTypeError("seeds must be nonnegative")
    return seeds


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleSet as exc:
        print(f"infeasible problem: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SizeLimitExceeded as exc:
        print(f"size limit: {exc}", file=sys.stderr)
        return EXIT_SIZE_LIMIT
    except (MaxIterationsExceeded, SamplingStalled) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: scenario files in, CSV tables and a manifest out.

Example::

    midband-ris run uc1 --sweep power --sweep elements=250:4000:250 --out results/
    midband-ris run uc4 --sweep qos --set tx_power_dbm=40 --plot

Every sweep is validated against the scenario before anything is computed.
Exit status is 0 on success, 2 for configuration errors and 1 for any other
failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, DomainError, UnsupportedRegimeError
from .mcengine import coverage_probability, run_trials
from .scenario_file import (
    bundled_names,
    dump_scenario,
    parse_scenario_file,
    parse_value,
    resolve_path,
)
from .scenarios import SweepSpec, cdf_table, ris_sweep_position, run_sweep, to_mapping
from .sizing import (
    KAPPA_RANGE,
    SizingQuery,
    benchmark_target,
    metric_name,
    required_elements_formula,
    required_elements_simulated,
)

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2

# sweep name -> (axis, default grid); axis None for non-grid experiments
SWEEPS = {
    "power": ("tx_power_dbm", "0:50:5"),
    "qos": ("qos_r", "0:6:0.1"),
    "elements": ("n_elements", "250:4000:250"),
    "placement": ("ris_y", "10:190:10"),
    "cdf": (None, None),
    "sizing": (None, None),
}
DEFAULT_SWEEPS = {"UC1": ("power",), "UC2": ("cdf",), "UC3": ("cdf",), "UC4": ("qos",)}
SIZING_BOUNDS = (1, 16_384)
SIZING_HEADER = [
    "metric",
    "benchmark",
    "n_required",
    "n_formula_kappa40",
    "n_formula_kappa45",
    "f_c_ghz",
    "d_3d_m",
]


def parse_grid(text):
    """``start:stop:step`` (stop included) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if not step > 0 or stop < start:
                raise ValueError
            n = int(round((stop - start) / step)) + 1
            values = start + step * np.arange(n)
            values = values[values <= stop + 1e-9 * max(1.0, abs(step))]
            return tuple(float(round(v, 12)) for v in values)
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError("sweep", f"bad grid {text!r}; use start:stop:step or a,b,c") from None


def parse_sweep(text):
    """``NAME`` or ``NAME=GRID`` -> (name, grid text or None)."""
    name, _, grid = text.partition("=")
    name = name.strip().lower()
    if name not in SWEEPS:
        raise ConfigError("sweep", f"unknown sweep {name!r}; choose from {', '.join(SWEEPS)}")
    if grid and SWEEPS[name][0] is None:
        raise ConfigError("sweep", f"sweep {name!r} takes no grid")
    return name, grid or SWEEPS[name][1]


@dataclass
class RunManifest:
    """Everything that determines the bytes a run writes."""

    scenario: str
    sweeps: tuple = ()
    trials: int | None = None
    seed: int | None = None
    out_dir: Path = Path("results")
    modes: tuple | None = None
    overrides: dict = field(default_factory=dict)
    plot: bool = False
    checksums: dict = field(default_factory=dict)

    def scenario_overrides(self):
        over = dict(self.overrides)
        if self.trials is not None:
            over["trials"] = self.trials
        if self.seed is not None:
            over["seed"] = self.seed
        if self.modes is not None:
            over["modes"] = list(self.modes)
        return over


@dataclass
class Plan:
    scenario: object
    sweeps: list  # (name, SweepSpec or None)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.6g}"
    return str(value)


def csv_bytes(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue().encode()


def _check_sweep(scenario, name, spec):
    """Raise ConfigError if ``spec`` cannot run on ``scenario``."""
    if name in ("elements", "sizing", "placement") and scenario.ris is None:
        raise ConfigError("sweep", f"sweep {name!r} needs an RIS")
    if name == "qos" and any(r < 0 for r in spec.grid):
        raise ConfigError("sweep", "QoS thresholds must be >= 0")
    if name == "sizing":
        metric_name(scenario, None)
    if name == "placement":
        if scenario.rx is None:
            raise ConfigError("sweep", "a placement sweep needs a fixed receiver")
        for y in spec.grid:
            center = ris_sweep_position(y, scenario.tx.y, scenario.rx.y, scenario.ris.center.z)
            scenario.with_ris_at(center)


def plan(manifest):
    """Resolve the scenario and every sweep; no simulation happens here."""
    scenario = parse_scenario_file(manifest.scenario, manifest.scenario_overrides())
    defaults = DEFAULT_SWEEPS.get(scenario.use_case, ("cdf",))
    names = manifest.sweeps or tuple((n, SWEEPS[n][1]) for n in defaults)
    sweeps = []
    seen = set()
    for name, grid in names:
        if name not in SWEEPS:
            raise ConfigError("sweep", f"unknown sweep {name!r}; choose from {', '.join(SWEEPS)}")
        if name in seen:
            raise ConfigError("sweep", f"sweep {name!r} requested twice")
        seen.add(name)
        axis = SWEEPS[name][0]
        spec = None
        if axis is not None:
            spec = SweepSpec(axis, parse_grid(grid or SWEEPS[name][1]))
        _check_sweep(scenario, name, spec)
        sweeps.append((name, spec))
    return Plan(scenario, sweeps)


def _sizing_rows(scenario):
    trials, seed = scenario.trials, scenario.seed
    metric = metric_name(scenario, None)
    target = benchmark_target(scenario, trials, seed)
    n_req = required_elements_simulated(scenario, target, SIZING_BOUNDS, trials, seed)
    n40 = n45 = d_3d = None
    if scenario.rx is not None:
        d_3d = scenario.tx.distance(scenario.rx)
        n40, n45 = (
            required_elements_formula(SizingQuery(scenario.f_c, d_3d, k, allow_any_kappa=True))
            for k in KAPPA_RANGE
        )
    return [[metric, target, n_req, n40, n45, scenario.f_c, d_3d]]


def _summary(manifest, scenario, samples, files):
    lines = [
        f"midband-ris {__version__}",
        f"scenario: {manifest.scenario} ({scenario.use_case})",
        f"carrier_ghz: {_fmt(scenario.f_c)}",
        f"tx_power_dbm: {_fmt(scenario.radio.p_tx_dbm)}",
        f"trials: {scenario.trials}",
        f"seed: {scenario.seed}",
        f"large_scale: {scenario.large_scale}",
    ]
    if scenario.ris is not None:
        lines.append(f"n_elements: {scenario.ris.n_elements}")
    for mode, se in samples.se.items():
        lines.append(f"mean_se_{mode.value}: {_fmt(np.mean(se))}")
    if scenario.qos_r is not None:
        for mode, se in samples.se.items():
            cov = coverage_probability(se, scenario.qos_r)
            lines.append(f"coverage_{mode.value}_at_{_fmt(scenario.qos_r)}: {_fmt(cov)}")
    lines.append("files: " + " ".join(files))
    return ("\n".join(lines) + "\n").encode()


@dataclass
class Table:
    name: str
    header: list
    rows: list
    kind: str  # "sweep", "cdf" or "plain"


def compute(run_plan):
    """Run every planned experiment; returns the tables and the full-run samples."""
    scenario = run_plan.scenario
    samples = run_trials(scenario)
    tables = []
    for name, spec in run_plan.sweeps:
        if name == "cdf":
            header, rows = cdf_table(samples)
            tables.append(Table(name, header, list(rows), "cdf"))
        elif name == "sizing":
            tables.append(Table(name, SIZING_HEADER, _sizing_rows(scenario), "plain"))
        else:
            result = run_sweep(scenario, spec)
            tables.append(Table(name, result.header, list(result.rows()), "sweep"))
    return tables, samples


def write_outputs(manifest, scenario, tables, samples):
    """Write CSVs, optional PNGs and the summary; returns sha256 per file."""
    out_dir = Path(manifest.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    checksums = {}

    def emit(fname, payload):
        (out_dir / fname).write_bytes(payload)
        checksums[fname] = hashlib.sha256(payload).hexdigest()

    for t in tables:
        emit(f"{t.name}.csv", csv_bytes(t.header, t.rows))
    if manifest.plot:
        from . import plotting

        draw = {"sweep": plotting.plot_sweep, "cdf": plotting.plot_cdf}
        for t in tables:
            if t.kind in draw:
                path = out_dir / f"{t.name}.png"
                draw[t.kind](t.header, t.rows, path, f"{manifest.scenario}: {t.name}")
                checksums[path.name] = hashlib.sha256(path.read_bytes()).hexdigest()
    emit("summary.txt", _summary(manifest, scenario, samples, [f"{t.name}.csv" for t in tables]))
    return checksums


def manifest_record(manifest, scenario):
    return {
        "version": __version__,
        "scenario": manifest.scenario,
        "overrides": manifest.overrides,
        "sweeps": [{"name": n, "grid": g} for n, g in manifest.sweeps],
        "trials": scenario.trials,
        "seed": scenario.seed,
        "modes": [m.value for m in scenario.modes],
        "resolved": {k: list(v) if isinstance(v, tuple) else v for k, v in to_mapping(scenario).items()},
        "checksums": manifest.checksums,
    }


def execute(manifest, stderr=None):
    """Validate, simulate and write; returns the process exit status."""
    stderr = stderr or sys.stderr
    try:
        run_plan = plan(manifest)
    except (ConfigError, DomainError, UnsupportedRegimeError) as exc:
        print(f"config error: {exc}", file=stderr)
        return EXIT_CONFIG
    try:
        tables, samples = compute(run_plan)
        manifest.checksums = write_outputs(manifest, run_plan.scenario, tables, samples)
        record = manifest_record(manifest, run_plan.scenario)
        text = json.dumps(record, indent=2, sort_keys=True) + "\n"
        (Path(manifest.out_dir) / "manifest.json").write_text(text)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_FAILURE
    return EXIT_OK


def _key_value(text):
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    return key.strip(), parse_value(value.strip())


def build_parser():
    parser = argparse.ArgumentParser(
        prog="midband-ris",
        description="Monte-Carlo link simulation of RIS-assisted upper mid-band cells.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a scenario and write CSV tables")
    run.add_argument("scenario", help="scenario file, or a bundled name (see 'list')")
    run.add_argument(
        "--sweep",
        action="append",
        default=[],
        metavar="NAME[=GRID]",
        help=f"experiment to run, repeatable: {', '.join(SWEEPS)}; "
        "GRID is start:stop:step (inclusive) or a comma list",
    )
    run.add_argument("--trials", type=int, help="Monte-Carlo trials (overrides the file)")
    run.add_argument("--seed", type=int, help="master seed (overrides the file)")
    run.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    run.add_argument("--modes", help="comma list of modes: static_only, ris_only, ris_plus_static")
    run.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        type=_key_value,
        metavar="KEY=VALUE",
        help="override a scenario key, repeatable",
    )
    run.add_argument("--plot", action="store_true", help="also render a PNG per table")

    show = sub.add_parser("show", help="print the fully resolved scenario")
    show.add_argument("scenario")
    show.add_argument("--set", dest="overrides", action="append", default=[], type=_key_value)

    sub.add_parser("list", help="list bundled scenarios")
    return parser


def _first_comment(path):
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            return line.lstrip("# ").strip()
    return ""


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for name in bundled_names():
            print(f"{name:<12} {_first_comment(resolve_path(name))}")
        return EXIT_OK
    if args.command == "show":
        try:
            cfg = parse_scenario_file(args.scenario, dict(args.overrides))
        except (ConfigError, DomainError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        sys.stdout.write(dump_scenario(cfg))
        return EXIT_OK

    try:
        sweeps = tuple(parse_sweep(s) for s in args.sweep)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    modes = None
    if args.modes:
        modes = tuple(m.strip() for m in args.modes.split(",") if m.strip())
    manifest = RunManifest(
        scenario=args.scenario,
        sweeps=sweeps,
        trials=args.trials,
        seed=args.seed,
        out_dir=args.out,
        modes=modes,
        overrides=dict(args.overrides),
        plot=args.plot,
    )
    return execute(manifest)


if __name__ == "__main__":
    raise SystemExit(main())

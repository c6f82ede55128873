"""Command-line interface.

Subcommands: simulate, analyze, sweep, ingest, plot, report. All randomness
is seeded through the config file or explicit flags; the worker-pool size
for sweeps comes from the CSGI_WORKERS environment variable.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
divergence.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .errors import (
    ConfigInvalidError,
    CsgiError,
    CsvParseError,
    DivergedError,
    MissingChannelError,
    NonUniformSamplingError,
)
from .pipeline import (
    ExperimentConfig,
    ingest_csv,
    load_config,
    run_single,
    run_sweep,
    simulate_system,
    write_line_plot,
)

CONFIG_EXIT = 2
DATA_EXIT = 3
DIVERGED_EXIT = 4


def _exit_code(err: CsgiError) -> int:
    if isinstance(err, ConfigInvalidError):
        return CONFIG_EXIT
    if isinstance(err, DivergedError):
        return DIVERGED_EXIT
    if isinstance(err, (CsvParseError, NonUniformSamplingError, MissingChannelError)):
        return DATA_EXIT
    return DATA_EXIT


def _run(fn):
    try:
        fn()
    except CsgiError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(_exit_code(err))


@click.group()
def main():
    """Time-varying causal coupling inference between time-series pairs."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=False))
@click.option("--coupling", type=float, default=None, help="restrict to one coupling value")
@click.option("--out", "out_path", required=True, type=click.Path())
def simulate(config_path, coupling, out_path):
    """Simulate the configured system and write its components as CSV."""

    def work():
        cfg = load_config(config_path)
        value = coupling
        if value is None:
            value = cfg.coupling_values[0] if cfg.coupling_values else None
        sim = simulate_system(cfg, value)
        Path(out_path).write_text(sim.to_csv())
        click.echo(f"wrote {out_path}")

    _run(work)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--coupling", type=float, default=None)
@click.option("--out", "out_dir", default=None, type=click.Path())
def analyze(config_path, coupling, out_dir):
    """Run the configured method at a single coupling value and emit its
    artifacts (timecourse or convergence CSV plus a summary row)."""

    def work():
        cfg = load_config(config_path)
        value = coupling
        if value is None:
            value = cfg.coupling_values[0] if cfg.coupling_values else None
        outcome = run_single(cfg, value)
        directory = Path(out_dir or cfg.output_dir)
        directory.mkdir(parents=True, exist_ok=True)
        row = outcome["row"]
        (directory / "analysis.json").write_text(json.dumps(row, indent=2))
        for kind, text in outcome["artifacts"].items():
            (directory / f"{kind}.csv").write_text(text)
        click.echo(
            f"coupling={row['coupling']} score_xy={row['score_xy']:.4f} "
            f"score_yx={row['score_yx']:.4f}"
        )

    _run(work)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
def sweep(config_path):
    """Run the full sweep described by a config file."""

    def work():
        cfg = load_config(config_path)
        written = run_sweep(cfg)
        for path in written:
            click.echo(f"wrote {path}")

    _run(work)


@main.command()
@click.option("--input", "in_path", required=True, type=click.Path())
@click.option("--datetime-column", required=True)
@click.option("--datetime-format", default="%d.%m.%Y %H:%M:%S", show_default=True)
@click.option("--sentinel", "sentinels", multiple=True, type=float, default=(-9999.0,))
@click.option("--policy", type=click.Choice(["drop", "clip"]), default="drop")
@click.option("--gap-tolerance", type=int, default=10, show_default=True)
@click.option("--out", "out_path", default=None, type=click.Path())
def ingest(in_path, datetime_column, datetime_format, sentinels, policy, gap_tolerance, out_path):
    """Validate and clean a timestamped CSV; optionally write the cleaned
    numeric columns back out."""

    def work():
        series = ingest_csv(
            in_path,
            datetime_column=datetime_column,
            datetime_format=datetime_format,
            sentinel_values=sentinels,
            policy=policy,
            gap_tolerance=gap_tolerance,
        )
        names = list(series)
        first = series[names[0]]
        click.echo(f"{len(names)} series of length {len(first)}, dt={first.dt}s")
        if out_path:
            import io

            buf = io.StringIO()
            buf.write(",".join(names) + "\n")
            cols = [series[n].values for n in names]
            for row in zip(*cols):
                buf.write(",".join(repr(float(v)) for v in row) + "\n")
            Path(out_path).write_text(buf.getvalue())
            click.echo(f"wrote {out_path}")

    _run(work)


@main.command()
@click.option("--input", "in_path", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--title", default="")
def plot(in_path, out_path, title):
    """Render a sweep summary CSV (or timecourse CSV) as an SVG per
    direction; OUT is used as a prefix."""

    def work():
        text = Path(in_path).read_text().strip().splitlines()
        header = text[0].split(",")
        rows = [list(map(float, ln.split(","))) for ln in text[1:]]
        if not rows:
            raise CsvParseError(f"{in_path}: no data rows")
        cols = {name: [r[i] for r in rows] for i, name in enumerate(header)}
        if header[0] == "coupling":
            xs = cols["coupling"]
            pairs = (("score_xy", "err_xy"), ("score_yx", "err_yx"))
        elif header[0] == "window_start":
            xs = cols["window_start"]
            pairs = (("chi_xy", "std_xy"), ("chi_yx", "std_yx"))
        else:
            raise CsvParseError(f"{in_path}: unrecognized header {header[0]!r}")
        for value_col, err_col in pairs:
            direction = value_col.split("_")[-1]
            target = Path(f"{out_path}_{direction}.svg")
            write_line_plot(
                target,
                xs,
                cols[value_col],
                cols[err_col],
                title=title or f"{direction}",
                xlabel=header[0],
                ylabel=value_col,
            )
            click.echo(f"wrote {target}")

    _run(work)


@main.command()
@click.option("--dir", "out_dir", required=True, type=click.Path())
def report(out_dir):
    """Summarize a sweep output directory from its manifest."""

    def work():
        directory = Path(out_dir)
        manifest_path = directory / "manifest.json"
        if not manifest_path.exists():
            raise CsvParseError(f"{out_dir}: no manifest.json found")
        manifest = json.loads(manifest_path.read_text())
        cfg = manifest["config"]
        click.echo(f"experiment : {cfg.get('name')}")
        click.echo(f"system     : {cfg.get('system')}  method: {cfg.get('method')}")
        click.echo(f"seed       : {cfg.get('seed')}")
        click.echo(f"config hash: {manifest.get('config_sha256', '')[:16]}")
        click.echo(f"version    : {manifest.get('package_version')}")
        summary = directory / "summary.csv"
        if summary.exists():
            lines = summary.read_text().strip().splitlines()
            header = lines[0].split(",")
            click.echo("  ".join(f"{h:>10}" for h in header))
            for ln in lines[1:]:
                vals = [float(v) for v in ln.split(",")]
                click.echo("  ".join(f"{v:>10.4f}" for v in vals))

    _run(work)


if __name__ == "__main__":
    main()

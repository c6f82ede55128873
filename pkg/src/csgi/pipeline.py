"""Experiment orchestration: declarative sweep configs, reproducible runs
over coupling values, CSV/SVG emission with manifests, data ingestion, and
channel-group aggregation.

Every output directory carries a manifest.json with the full config, its
hash, the seeds, and the package version, so any emitted file can be
regenerated bit-for-bit from the manifest alone.
"""
from __future__ import annotations

import csv as _csv
import hashlib
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .ccm import ccm_pair
from .dynsys import (
    CouplingSchedule,
    SimOutput,
    simulate_coupled_ar,
    simulate_henon,
    simulate_henon_nonstationary,
    simulate_rossler_lorenz,
    simulate_two_species,
)
from .errors import (
    ConfigInvalidError,
    CsvParseError,
    DomainError,
    MissingChannelError,
    NonUniformSamplingError,
)
from .metrics import CsgiTimecourse
from .slgc import slgc_pair
from .surrogate import SurrogateKind
from .taci import TaciConfig, desk_config, evaluate_pair, train_pair
from .te import TeConfig, te_pair
from .timeseries import TimeSeries

__all__ = [
    "ExperimentConfig",
    "ChannelGroups",
    "load_config",
    "run_sweep",
    "ingest_csv",
    "rh_from_t_tdew",
    "group_average",
    "write_line_plot",
]

WORKERS_ENV = "CSGI_WORKERS"

_SYSTEMS = {
    "rossler_lorenz": ("x2", "y2"),
    "two_species": ("x", "y"),
    "coupled_ar": ("x", "y"),
    "henon": ("x1", "y1"),
    "henon_nonstationary": ("x1", "y1"),
}
_METHODS = ("taci", "slgc", "ccm", "te")

_TOP_KEYS = {
    "schema_version",
    "name",
    "system",
    "coupling_values",
    "coupling_schedules",
    "n_samples",
    "burn_in",
    "seed",
    "channels",
    "method",
    "method_params",
    "windowing",
    "desk_scale",
    "output_dir",
}
_WINDOW_KEYS = {"window_len", "stride", "n_bootstrap"}
_METHOD_KEYS = {
    "slgc": {"order", "surrogate_kind"},
    "ccm": {"E", "tau", "lib_sizes", "n_replicates"},
    "te": {"history", "bins", "n_shuffles"},
    "taci": set(TaciConfig.__dataclass_fields__),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated sweep description; see load_config for the file schema."""

    name: str
    system: str
    coupling_values: tuple
    coupling_schedules: dict | None
    n_samples: int
    burn_in: int
    seed: int
    channels: tuple
    method: str
    method_params: dict
    windowing: dict
    desk_scale: bool
    output_dir: str
    schema_version: int = 1

    def to_dict(self) -> dict:
        out = {
            "schema_version": self.schema_version,
            "name": self.name,
            "system": self.system,
            "coupling_values": list(self.coupling_values),
            "n_samples": self.n_samples,
            "burn_in": self.burn_in,
            "seed": self.seed,
            "channels": list(self.channels),
            "method": self.method,
            "method_params": dict(self.method_params),
            "windowing": dict(self.windowing),
            "desk_scale": self.desk_scale,
            "output_dir": self.output_dir,
        }
        if self.coupling_schedules is not None:
            out["coupling_schedules"] = {
                k: [list(bp) for bp in v] for k, v in self.coupling_schedules.items()
            }
        return out


def _fail(msg: str) -> ConfigInvalidError:
    return ConfigInvalidError(msg)


def validate_config(raw: dict) -> ExperimentConfig:
    """Schema-check a parsed config mapping; unknown keys are rejected."""
    if not isinstance(raw, dict):
        raise _fail("config must be a mapping")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise _fail(f"unknown config keys: {sorted(unknown)}")
    for key in ("system", "method", "n_samples", "seed", "output_dir"):
        if key not in raw:
            raise _fail(f"missing required key: {key}")
    if int(raw.get("schema_version", 1)) != 1:
        raise _fail("schema_version must be 1")
    system = raw["system"]
    if system not in _SYSTEMS:
        raise _fail(f"field system: unknown system {system!r}")
    method = raw["method"]
    if method not in _METHODS:
        raise _fail(f"field method: unknown method {method!r}")
    values = raw.get("coupling_values")
    schedules = raw.get("coupling_schedules")
    if system == "henon_nonstationary":
        if schedules is None or values is not None:
            raise _fail("henon_nonstationary requires coupling_schedules only")
        if set(schedules) != {"cxy", "cyx"}:
            raise _fail("coupling_schedules must define exactly cxy and cyx")
        for k, bps in schedules.items():
            try:
                CouplingSchedule(tuple((int(s), float(v)) for s, v in bps))
            except (TypeError, ValueError) as err:
                raise _fail(f"field coupling_schedules.{k}: {err}") from err
        values = ()
    else:
        if values is None or schedules is not None:
            raise _fail(f"system {system} requires coupling_values only")
        if not values or not all(
            isinstance(v, (int, float)) and v >= 0 for v in values
        ):
            raise _fail("coupling_values must be non-negative numbers")
        values = tuple(float(v) for v in values)
    n_samples = int(raw["n_samples"])
    burn_in = int(raw.get("burn_in", 30_000))
    if n_samples < 1 or burn_in < 0:
        raise _fail("n_samples must be >= 1 and burn_in >= 0")
    channels = tuple(raw.get("channels", _SYSTEMS[system]))
    if len(channels) != 2:
        raise _fail("channels must name exactly two components")
    params = dict(raw.get("method_params", {}))
    unknown = set(params) - _METHOD_KEYS[method]
    if unknown:
        raise _fail(f"field method_params: unknown keys for {method}: {sorted(unknown)}")
    windowing = {"window_len": 1000, "stride": None, "n_bootstrap": 100}
    user_win = dict(raw.get("windowing", {}))
    unknown = set(user_win) - _WINDOW_KEYS
    if unknown:
        raise _fail(f"field windowing: unknown keys: {sorted(unknown)}")
    windowing.update(user_win)
    if windowing["stride"] is None:
        windowing["stride"] = windowing["window_len"]
    return ExperimentConfig(
        name=str(raw.get("name", "experiment")),
        system=system,
        coupling_values=values,
        coupling_schedules=schedules,
        n_samples=n_samples,
        burn_in=burn_in,
        seed=int(raw["seed"]),
        channels=channels,
        method=method,
        method_params=params,
        windowing=windowing,
        desk_scale=bool(raw.get("desk_scale", False)),
        output_dir=str(raw["output_dir"]),
    )


def load_config(path) -> ExperimentConfig:
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as err:
        raise _fail(f"could not parse config file {path}: {err}") from err
    return validate_config(raw)


def simulate_system(cfg: ExperimentConfig, coupling: float | None) -> SimOutput:
    if cfg.system == "rossler_lorenz":
        return simulate_rossler_lorenz(
            coupling, n=cfg.n_samples, burn_in=cfg.burn_in, seed=cfg.seed
        )
    if cfg.system == "two_species":
        return simulate_two_species(
            coupling, n=cfg.n_samples, burn_in=cfg.burn_in, seed=cfg.seed
        )
    if cfg.system == "coupled_ar":
        return simulate_coupled_ar(
            coupling, n=cfg.n_samples, burn_in=cfg.burn_in, seed=cfg.seed
        )
    if cfg.system == "henon":
        return simulate_henon(
            coupling, n=cfg.n_samples, burn_in=cfg.burn_in, seed=cfg.seed
        )
    if cfg.system == "henon_nonstationary":
        sched = cfg.coupling_schedules
        return simulate_henon_nonstationary(
            CouplingSchedule(tuple((int(s), float(v)) for s, v in sched["cxy"])),
            CouplingSchedule(tuple((int(s), float(v)) for s, v in sched["cyx"])),
            n=cfg.n_samples,
            burn_in=cfg.burn_in,
            seed=cfg.seed,
        )
    raise _fail(f"unknown system {cfg.system}")


def _taci_config(cfg: ExperimentConfig) -> TaciConfig:
    overrides = dict(cfg.method_params)
    overrides.setdefault("window_len", cfg.windowing["window_len"])
    if cfg.desk_scale:
        return desk_config(**overrides)
    return TaciConfig(**overrides)


def run_single(cfg: ExperimentConfig, coupling: float | None) -> dict:
    """One (system, coupling, method) task; returns the summary row and any
    per-run artifacts (timecourse or convergence-curve CSV text)."""
    sim = simulate_system(cfg, coupling)
    try:
        x = sim[cfg.channels[0]]
        y = sim[cfg.channels[1]]
    except KeyError as err:
        raise _fail(f"field channels: {err} not produced by {cfg.system}") from err
    win = cfg.windowing
    artifacts = {}
    if cfg.method == "slgc":
        params = cfg.method_params
        tc = slgc_pair(
            x,
            y,
            order=params.get("order"),
            surrogate_kind=SurrogateKind(params.get("surrogate_kind", "uniform")),
            window_len=win["window_len"],
            stride=win["stride"],
            n_bootstrap=win["n_bootstrap"],
            seed=cfg.seed,
        )
        row = _timecourse_row(tc)
        artifacts["timecourse"] = tc.to_csv()
    elif cfg.method == "taci":
        model_cfg = _taci_config(cfg)
        models = train_pair(x, y, model_cfg, seed=cfg.seed)
        tc = evaluate_pair(
            models,
            x,
            y,
            window_len=win["window_len"],
            stride=win["stride"],
            n_bootstrap=win["n_bootstrap"],
            seed=cfg.seed,
        )
        row = _timecourse_row(tc)
        artifacts["timecourse"] = tc.to_csv()
    elif cfg.method == "ccm":
        params = cfg.method_params
        result = ccm_pair(
            x,
            y,
            E=params.get("E", 2),
            tau=params.get("tau", 1),
            lib_sizes=params.get("lib_sizes", (250, 500, 1000, 2000, 4000)),
            n_replicates=params.get("n_replicates", 2),
            seed=cfg.seed,
        )
        row = {
            "score_xy": float(result.skill_xy[-1]),
            "err_xy": 0.0,
            "score_yx": float(result.skill_yx[-1]),
            "err_yx": 0.0,
        }
        artifacts["convergence"] = result.to_csv()
    elif cfg.method == "te":
        params = cfg.method_params
        te_cfg = TeConfig(
            history=params.get("history", 1),
            bins=params.get("bins", 8),
            n_shuffles=params.get("n_shuffles", 20),
            seed=cfg.seed,
        )
        te_xy, te_yx = te_pair(x, y, te_cfg)
        row = {"score_xy": te_xy, "err_xy": 0.0, "score_yx": te_yx, "err_yx": 0.0}
    else:  # pragma: no cover - validate_config forbids this
        raise _fail(f"unknown method {cfg.method}")
    row["coupling"] = 0.0 if coupling is None else coupling
    return {"row": row, "artifacts": artifacts}


def _timecourse_row(tc: CsgiTimecourse) -> dict:
    # error bars: std of the pooled bootstrap-replicate population, i.e.
    # within-window bootstrap variance plus between-window variance
    return {
        "score_xy": float(np.mean(tc.chi_xy)),
        "err_xy": float(np.sqrt(np.mean(tc.std_xy**2) + np.var(tc.chi_xy))),
        "score_yx": float(np.mean(tc.chi_yx)),
        "err_yx": float(np.sqrt(np.mean(tc.std_yx**2) + np.var(tc.chi_yx))),
    }


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _coupling_tag(value: float) -> str:
    return repr(float(value)).replace(".", "p").replace("-", "m")


def _worker(args):
    cfg_dict, coupling = args
    cfg = ExperimentConfig(**cfg_dict)
    return coupling, run_single(cfg, coupling)


def run_sweep(cfg: ExperimentConfig) -> list:
    """Run the sweep described by the config and write all result files.

    Results land in cfg.output_dir: a summary CSV over coupling values,
    per-coupling artifact CSVs, one SVG per direction, and a manifest. The
    summary is rewritten atomically after each coupling value completes, so
    partial progress is always consistent on disk. Worker count comes from
    the CSGI_WORKERS environment variable (default 1); output bytes do not
    depend on it.
    """
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    couplings = list(cfg.coupling_values) if cfg.coupling_values else [None]
    workers = max(1, int(os.environ.get(WORKERS_ENV, "1")))
    results: dict = {}
    written: list[Path] = []

    def flush_summary():
        done = [c for c in couplings if c in results]
        buf = io.StringIO()
        buf.write("coupling,score_xy,err_xy,score_yx,err_yx\n")
        for c in done:
            row = results[c]["row"]
            buf.write(
                f"{row['coupling']!r},{row['score_xy']!r},{row['err_xy']!r},"
                f"{row['score_yx']!r},{row['err_yx']!r}\n"
            )
        _atomic_write(out_dir / "summary.csv", buf.getvalue())

    def store(coupling, outcome):
        results[coupling] = outcome
        tag = "schedule" if coupling is None else _coupling_tag(coupling)
        for kind, text in outcome["artifacts"].items():
            path = out_dir / f"{kind}_C{tag}.csv"
            _atomic_write(path, text)
            written.append(path)
        flush_summary()

    if workers > 1 and len(couplings) > 1:
        cfg_dict = _config_kwargs(cfg)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for coupling, outcome in pool.map(
                _worker, [(cfg_dict, c) for c in couplings]
            ):
                store(coupling, outcome)
    else:
        for coupling in couplings:
            store(coupling, run_single(cfg, coupling))

    written.append(out_dir / "summary.csv")
    xs = [results[c]["row"]["coupling"] for c in couplings]
    for direction in ("xy", "yx"):
        svg_path = out_dir / f"sweep_{direction}.svg"
        write_line_plot(
            svg_path,
            xs,
            [results[c]["row"][f"score_{direction}"] for c in couplings],
            [results[c]["row"][f"err_{direction}"] for c in couplings],
            title=f"{cfg.name}: {cfg.method} {direction}",
            xlabel="coupling",
            ylabel="score",
        )
        written.append(svg_path)
    manifest = {
        "config": cfg.to_dict(),
        "config_sha256": hashlib.sha256(
            json.dumps(cfg.to_dict(), sort_keys=True).encode()
        ).hexdigest(),
        "package_version": __version__,
        "files": sorted(p.name for p in written),
    }
    manifest_path = out_dir / "manifest.json"
    _atomic_write(manifest_path, json.dumps(manifest, indent=2, sort_keys=True))
    written.append(manifest_path)
    return written


def _config_kwargs(cfg: ExperimentConfig) -> dict:
    return {f: getattr(cfg, f) for f in cfg.__dataclass_fields__}


# ---------------------------------------------------------------------------
# data ingestion


def ingest_csv(
    path,
    datetime_column: str,
    datetime_format: str = "%d.%m.%Y %H:%M:%S",
    sentinel_values=(-9999.0,),
    policy: str = "drop",
    gap_tolerance: int = 10,
) -> dict:
    """Read a timestamped CSV into one TimeSeries per numeric column.

    Rows holding a sentinel value are dropped (or each sentinel cell is
    replaced by the nearest valid value in its column when policy="clip").
    The sampling interval is the median timestamp delta in seconds; any gap
    that is not a whole multiple of it, or exceeds gap_tolerance multiples,
    raises NonUniformSamplingError.
    """
    if policy not in ("drop", "clip"):
        raise ConfigInvalidError(f"unknown sentinel policy {policy!r}")
    sentinels = set(float(v) for v in sentinel_values)
    path = Path(path)
    if not path.exists():
        raise CsvParseError(f"{path}: file not found")
    with path.open(newline="") as fh:
        reader = _csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvParseError(f"{path}: empty file") from None
        if datetime_column not in header:
            raise CsvParseError(f"{path}: no column named {datetime_column!r}")
        time_idx = header.index(datetime_column)
        value_names = [h for i, h in enumerate(header) if i != time_idx]
        times = []
        rows = []
        for row_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise CsvParseError(f"{path}:{row_no}: expected {len(header)} cells")
            try:
                stamp = datetime.strptime(row[time_idx], datetime_format)
            except ValueError as err:
                raise CsvParseError(f"{path}:{row_no}: bad timestamp: {err}") from err
            try:
                values = [
                    float(cell) for i, cell in enumerate(row) if i != time_idx
                ]
            except ValueError as err:
                raise CsvParseError(f"{path}:{row_no}: bad number: {err}") from err
            times.append(stamp.timestamp())
            rows.append(values)
    if len(rows) < 2:
        raise CsvParseError(f"{path}: need at least two data rows")
    data = np.asarray(rows)
    times_arr = np.asarray(times)
    is_sentinel = np.isin(data, list(sentinels)) if sentinels else np.zeros_like(data, bool)
    if policy == "drop":
        keep = ~is_sentinel.any(axis=1)
        data = data[keep]
        times_arr = times_arr[keep]
    else:
        for col in range(data.shape[1]):
            bad = is_sentinel[:, col]
            if bad.all():
                raise CsvParseError(
                    f"{path}: column {value_names[col]!r} is entirely sentinel"
                )
            if bad.any():
                good_idx = np.nonzero(~bad)[0]
                nearest = good_idx[
                    np.abs(np.nonzero(bad)[0][:, None] - good_idx).argmin(axis=1)
                ]
                data[bad, col] = data[nearest, col]
    if data.shape[0] < 2:
        raise CsvParseError(f"{path}: fewer than two rows after cleaning")
    deltas = np.diff(times_arr)
    dt = float(np.median(deltas))
    if dt <= 0:
        raise NonUniformSamplingError(f"{path}: non-increasing timestamps")
    ratio = deltas / dt
    whole = np.rint(ratio)
    if np.any(np.abs(ratio - whole) > 1e-6) or np.any(whole < 1) or np.any(
        whole > gap_tolerance
    ):
        raise NonUniformSamplingError(
            f"{path}: timestamp gaps are not clean multiples of {dt}s within "
            f"tolerance {gap_tolerance}"
        )
    return {
        name: TimeSeries(data[:, i], dt=dt, label=name)
        for i, name in enumerate(value_names)
    }


def rh_from_t_tdew(T, T_dew):
    """Relative humidity (percent) from air and dew-point temperature in
    Celsius, via the Magnus-form ratio with constants 17.625 and 243.04."""
    T = np.asarray(T, dtype=np.float64)
    T_dew = np.asarray(T_dew, dtype=np.float64)
    if np.any(T <= -243.04) or np.any(T_dew <= -243.04):
        raise DomainError("temperatures must exceed -243.04 degC")
    out = 100.0 * np.exp(17.625 * T_dew / (T_dew + 243.04)) / np.exp(
        17.625 * T / (T + 243.04)
    )
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# channel-group aggregation


@dataclass(frozen=True)
class ChannelGroups:
    """Mapping from region label to the channels assigned to it."""

    groups: dict

    def __post_init__(self):
        if not self.groups:
            raise ConfigInvalidError("at least one group is required")
        clean = {}
        for label, channels in self.groups.items():
            channels = tuple(channels)
            if not channels:
                raise ConfigInvalidError(f"group {label!r} is empty")
            if len(set(channels)) != len(channels):
                raise ConfigInvalidError(f"group {label!r} repeats a channel")
            clean[str(label)] = channels
        object.__setattr__(self, "groups", clean)

    @property
    def labels(self) -> tuple:
        return tuple(self.groups)


def group_average(pairwise: dict, groups: ChannelGroups) -> tuple:
    """Average directional pair scores up to region level.

    pairwise maps ordered channel pairs (i, j) to a 1-D array of per-epoch
    scores for direction i -> j. Entry [e, a, b] of the result averages all
    channel pairs with the source in group a and the destination in group b;
    diagonal entries use within-group pairs excluding self-pairs (NaN for a
    singleton group, which has none). Returns (labels, array of shape
    (n_epochs, n_groups, n_groups)).
    """
    labels = groups.labels
    arrays = {k: np.atleast_1d(np.asarray(v, dtype=np.float64)) for k, v in pairwise.items()}
    lengths = {a.shape[0] for a in arrays.values()}
    if len(lengths) != 1:
        raise ConfigInvalidError("all pairwise score arrays must share length")
    n_epochs = lengths.pop()
    out = np.full((n_epochs, len(labels), len(labels)), np.nan)
    for a, label_a in enumerate(labels):
        for b, label_b in enumerate(labels):
            acc = []
            for ch_i in groups.groups[label_a]:
                for ch_j in groups.groups[label_b]:
                    if ch_i == ch_j:
                        continue
                    if (ch_i, ch_j) not in arrays:
                        raise MissingChannelError(
                            f"no pairwise result for ({ch_i}, {ch_j})"
                        )
                    acc.append(arrays[(ch_i, ch_j)])
            if acc:
                out[:, a, b] = np.mean(acc, axis=0)
            elif a != b:
                raise MissingChannelError(
                    f"group pair ({label_a}, {label_b}) has no usable channel pairs"
                )
    return labels, out


# ---------------------------------------------------------------------------
# plotting (dependency-free deterministic SVG)


def _svg_coords(values, lo, hi, out_lo, out_hi):
    span = hi - lo if hi > lo else 1.0
    return [(out_lo + (v - lo) / span * (out_hi - out_lo)) for v in values]


def write_line_plot(
    path,
    x,
    y,
    err=None,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
) -> None:
    """Minimal deterministic SVG: one line with an optional +/-1 err band."""
    x = [float(v) for v in x]
    y = [float(v) for v in y]
    err = [0.0] * len(y) if err is None else [float(e) for e in err]
    if not (len(x) == len(y) == len(err)):
        raise ValueError("x, y, err must share length")
    width, height = 640, 420
    margin = 60
    lo_y = min(v - e for v, e in zip(y, err))
    hi_y = max(v + e for v, e in zip(y, err))
    if lo_y == hi_y:
        lo_y, hi_y = lo_y - 1.0, hi_y + 1.0
    pad = 0.05 * (hi_y - lo_y)
    lo_y, hi_y = lo_y - pad, hi_y + pad
    px = _svg_coords(x, min(x), max(x), margin, width - margin)
    py = _svg_coords(y, lo_y, hi_y, height - margin, margin)
    upper = _svg_coords([v + e for v, e in zip(y, err)], lo_y, hi_y, height - margin, margin)
    lower = _svg_coords([v - e for v, e in zip(y, err)], lo_y, hi_y, height - margin, margin)
    band_points = " ".join(
        f"{px[i]:.2f},{upper[i]:.2f}" for i in range(len(px))
    ) + " " + " ".join(f"{px[i]:.2f},{lower[i]:.2f}" for i in reversed(range(len(px))))
    line_points = " ".join(f"{px[i]:.2f},{py[i]:.2f}" for i in range(len(px)))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.0f}" y="24" text-anchor="middle" font-size="16">{title}</text>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
        f'<text x="{width / 2:.0f}" y="{height - 16}" text-anchor="middle" font-size="12">{xlabel}</text>',
        f'<text x="18" y="{height / 2:.0f}" text-anchor="middle" font-size="12" transform="rotate(-90 18 {height / 2:.0f})">{ylabel}</text>',
        f'<polygon points="{band_points}" fill="#9ecae1" opacity="0.5"/>',
        f'<polyline points="{line_points}" fill="none" stroke="#08519c" stroke-width="2"/>',
    ]
    for xi, yi, xv, yv in zip(px, py, x, y):
        parts.append(f'<circle cx="{xi:.2f}" cy="{yi:.2f}" r="3" fill="#08519c"/>')
        parts.append(
            f'<text x="{xi:.2f}" y="{height - margin + 16:.2f}" text-anchor="middle" font-size="10">{xv:.6g}</text>'
        )
    parts.append("</svg>")
    _atomic_write(Path(path), "\n".join(parts) + "\n")

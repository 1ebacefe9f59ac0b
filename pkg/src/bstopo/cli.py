"""Command-line front end.

Every subcommand reads its options from an optional TOML/JSON config file
section named after the command, then applies command-line flags on top.
Each run writes a ``.run.json`` sidecar holding the effective config, the
tool version and the list of files it produced.

Exit codes: 0 ok, 2 input-format error, 3 insufficient data, 4 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import BstopoError, DomainError, FormatError
from .filtration import build_filtration
from .fractal import feature_report, hurst_rs, series_from_points
from .geometry import delaunay
from .homology import betti_curve
from .ingest import (
    DEFAULT_COLUMN_MAP,
    DEFAULT_TOL_M,
    PointSet,
    clip_and_dedup,
    load_bounds,
    load_mapping,
    parse_records,
)
from .presets import detection_defaults
from .stats import analyze, euler_samples
from .synth import GenSpec, generate, preset_spec

REQUIRED = object()

# per-command options and their defaults; REQUIRED marks mandatory keys
OPTIONS = {
    "ingest": {
        "input": REQUIRED,
        "bounds": REQUIRED,
        "city": None,
        "tol": DEFAULT_TOL_M,
        "out_dir": ".",
        "delimiter": ",",
        "radio": None,
        "lon_col": DEFAULT_COLUMN_MAP["lon"],
        "lat_col": DEFAULT_COLUMN_MAP["lat"],
        "radio_col": DEFAULT_COLUMN_MAP["radio_tech"],
    },
    "generate": {
        "out": REQUIRED,
        "preset": None,
        "seed": 0,
        "kind": None,
        "region": None,
        "intensity": None,
        "levels": None,
        "branching": None,
        "subdivision": None,
        "scatter": None,
    },
    "betti": {
        "input": REQUIRED,
        "out_dir": ".",
        "name": None,
        "seed": 0,
        "perturbation": "auto",
        "write_filtration": False,
        **{k: None for k in ("grid_points", "min_strength", "separation_frac",
                              "min_prominence_frac", "beta1_floor")},
    },
    "hurst": {
        "input": REQUIRED,
        "input_kind": "points",
        "out_dir": ".",
        "name": None,
        "grid_k": 64,
        "ordering": "hilbert",
    },
    "eulerfit": {
        "input": REQUIRED,
        "input_kind": "points",
        "out_dir": ".",
        "name": None,
        "block": 1000.0,
        "stride": 1000.0,
        "alpha_rule": "quantile",
        "q": 0.5,
        "alpha": None,
        "min_points": 10,
        "binning": "freedman-diaconis",
        "seed": 0,
    },
    "report": {
        "dir": REQUIRED,
        "out": REQUIRED,
    },
}

CHOICES = {
    "perturbation": ("auto", "always", "never"),
    "input_kind": ("points", "series", "samples"),
    "ordering": ("hilbert", "row-major"),
    "alpha_rule": ("quantile", "fixed"),
}


def _dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_run(out_dir: Path, stem: str, command: str, cfg: dict, outputs: list) -> Path:
    path = out_dir / f"{stem}.{command}.run.json"
    _dump_json(path, {
        "command": command,
        "config": cfg,
        "outputs": sorted(p.name for p in outputs),
        "version": __version__,
    })
    return path


def _stem(cfg: dict) -> str:
    if cfg.get("name"):
        return cfg["name"]
    name = Path(cfg["input"]).name
    for suffix in (".points.csv", ".csv", ".txt"):
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return name


def _out_dir(cfg: dict) -> Path:
    d = Path(cfg["out_dir"])
    d.mkdir(parents=True, exist_ok=True)
    return d


def _read_column(path: str) -> np.ndarray:
    """First column of a numeric CSV; a non-numeric first line is a header."""
    values = []
    with open(path) as fh:
        for k, line in enumerate(fh):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cell = line.split(",")[0]
            try:
                values.append(float(cell))
            except ValueError:
                if k == 0:
                    continue
                raise FormatError(f"{path}: line {k + 1}: not a number: {cell!r}") from None
    return np.array(values)


# -- commands -----------------------------------------------------------------

def cmd_ingest(cfg: dict) -> list:
    cmap = {"lon": cfg["lon_col"], "lat": cfg["lat_col"], "radio_tech": cfg["radio_col"]}
    radio = cfg["radio"]
    if isinstance(radio, str):
        radio = [r for r in radio.split(",") if r]
    parsed = parse_records(cfg["input"], cmap, cfg["delimiter"], radio)
    cities = load_bounds(cfg["bounds"])
    if cfg["city"] is not None:
        if cfg["city"] not in cities:
            raise FormatError(f"city {cfg['city']!r} not in bounds file; has {sorted(cities)}")
        cities = {cfg["city"]: cities[cfg["city"]]}
    out_dir = _out_dir(cfg)
    written = []
    for name in sorted(cities):
        ps = clip_and_dedup(parsed.records, cities[name], cfg["tol"])
        csv_path = out_dir / f"{name}.points.csv"
        side = ps.save(csv_path, {"skipped_rows": parsed.skipped, "config": cfg, "version": __version__})
        written += [csv_path, side]
    return written + [_write_run(out_dir, Path(cfg["input"]).stem, "ingest", cfg, written)]


def _spec_from(cfg: dict) -> GenSpec:
    keys = ("kind", "region", "intensity", "levels", "branching", "subdivision", "scatter")
    given = {k: cfg[k] for k in keys if cfg[k] is not None}
    if "region" in given:
        given["region"] = tuple(float(v) for v in given["region"])
    if cfg["preset"] is not None:
        base = preset_spec(cfg["preset"], cfg["seed"]).to_dict()
        base["region"] = tuple(base["region"])
        base.update(given)
        return GenSpec(**base)
    if "kind" not in given:
        raise DomainError("generate needs a preset or a kind")
    return GenSpec(seed=cfg["seed"], **given)


def cmd_generate(cfg: dict) -> list:
    spec = _spec_from(cfg)
    ps = generate(spec)
    out = Path(cfg["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    side = ps.save(out, {"config": cfg, "version": __version__})
    return [out, side, _write_run(out.parent, out.name.removesuffix(".csv"), "generate", cfg, [out, side])]


def cmd_betti(cfg: dict) -> list:
    ps = PointSet.load(cfg["input"])
    mode = {"auto": "auto", "always": True, "never": False}[cfg["perturbation"]]
    tri = delaunay(ps, perturbation=mode, seed=cfg["seed"])
    filt = build_filtration(tri)
    curve = betti_curve(filt)
    # record the thresholds actually used, not the unset placeholders
    cfg = {**cfg, **{k: v for k, v in detection_defaults().items() if cfg.get(k) is None}}
    report = feature_report(curve, **{k: cfg[k] for k in detection_defaults()})

    out_dir, stem = _out_dir(cfg), _stem(cfg)
    curve_path = out_dir / f"{stem}.betti.csv"
    curve.save(curve_path)
    feat_path = out_dir / f"{stem}.features.json"
    doc = report.to_dict()
    doc["triangulation"] = {
        "vertices": tri.n_vertices,
        "edges": int(len(tri.edges)),
        "triangles": int(len(tri.triangles)),
        "perturbed": tri.perturbed,
        **tri.meta,
    }
    _dump_json(feat_path, doc)
    written = [curve_path, feat_path]
    if cfg["write_filtration"]:
        fpath = out_dir / f"{stem}.filtration.csv"
        filt.save(fpath)
        written.append(fpath)
    return written + [_write_run(out_dir, stem, "betti", cfg, written)]


def cmd_hurst(cfg: dict) -> list:
    if cfg["input_kind"] == "points":
        series = series_from_points(PointSet.load(cfg["input"]), cfg["grid_k"], cfg["ordering"])
    elif cfg["input_kind"] == "series":
        series = _read_column(cfg["input"])
    else:
        raise DomainError("hurst input_kind must be 'points' or 'series'")
    est = hurst_rs(series)
    out_dir, stem = _out_dir(cfg), _stem(cfg)
    json_path = out_dir / f"{stem}.hurst.json"
    csv_path = out_dir / f"{stem}.hurst.csv"
    _dump_json(json_path, {**est.to_dict(), "series_length": int(len(series))})
    csv_path.write_text(est.regression_csv())
    return [json_path, csv_path, _write_run(out_dir, stem, "hurst", cfg, [json_path, csv_path])]


def cmd_eulerfit(cfg: dict) -> list:
    if cfg["input_kind"] == "points":
        samples = euler_samples(
            PointSet.load(cfg["input"]), cfg["block"], cfg["stride"], cfg["alpha_rule"],
            q=cfg["q"], alpha=cfg["alpha"], seed=cfg["seed"], min_points=cfg["min_points"],
        )
    elif cfg["input_kind"] == "samples":
        samples = _read_column(cfg["input"])
    else:
        raise DomainError("eulerfit input_kind must be 'points' or 'samples'")
    binning = cfg["binning"]
    if isinstance(binning, str) and binning.isdigit():
        binning = int(binning)
    rep = analyze(samples, binning)
    out_dir, stem = _out_dir(cfg), _stem(cfg)
    json_path = out_dir / f"{stem}.eulerfit.json"
    csv_path = out_dir / f"{stem}.overlay.csv"
    doc = rep.to_dict()
    doc["samples"] = [float(v) for v in samples]
    _dump_json(json_path, doc)
    csv_path.write_text(rep.overlay_csv())
    return [json_path, csv_path, _write_run(out_dir, stem, "eulerfit", cfg, [json_path, csv_path])]


def _read_curve(path: Path) -> dict:
    cols = {"alpha": [], "beta0": [], "beta1": [], "chi": []}
    lines = [ln for ln in path.read_text().splitlines() if ln and not ln.startswith("#")]
    for ln in lines[1:]:
        a, b0, b1, c = ln.split(",")
        cols["alpha"].append(float(a))
        cols["beta0"].append(int(b0))
        cols["beta1"].append(int(b1))
        cols["chi"].append(int(c))
    return cols


def cmd_report(cfg: dict) -> list:
    d = Path(cfg["dir"])
    if not d.is_dir():
        raise FormatError(f"{d} is not a directory")
    suffixes = {
        ".betti.csv": "betti_curve",
        ".features.json": "features",
        ".hurst.json": "hurst",
        ".eulerfit.json": "eulerfit",
    }
    cities: dict = {}
    for path in sorted(d.iterdir()):
        for suffix, key in suffixes.items():
            if path.name.endswith(suffix):
                stem = path.name[: -len(suffix)]
                value = _read_curve(path) if suffix.endswith(".csv") else json.loads(path.read_text())
                cities.setdefault(stem, {})[key] = value
    if not cities:
        raise FormatError(f"{d} holds no analysis outputs")
    out = Path(cfg["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    _dump_json(out, {"cities": cities, "config": cfg, "version": __version__})
    return [out]


COMMANDS = {
    "ingest": cmd_ingest,
    "generate": cmd_generate,
    "betti": cmd_betti,
    "hurst": cmd_hurst,
    "eulerfit": cmd_eulerfit,
    "report": cmd_report,
}


# -- argument handling --------------------------------------------------------

def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _flag_type(default):
    if isinstance(default, bool):
        return _bool
    if isinstance(default, int):
        return int
    if isinstance(default, float):
        return float
    return str


_FLOAT_KEYS = {"intensity", "scatter", "min_strength", "separation_frac", "min_prominence_frac",
               "beta1_floor", "alpha"}
_INT_KEYS = {"levels", "branching", "subdivision", "grid_points"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bstopo", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="TOML or JSON file with one table per command")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, opts in OPTIONS.items():
        p = sub.add_parser(name, argument_default=argparse.SUPPRESS)
        for key, default in opts.items():
            flag = "--" + key.replace("_", "-")
            if key == "region":
                p.add_argument(flag, type=float, nargs=4, metavar=("XMIN", "YMIN", "XMAX", "YMAX"))
                continue
            kind = float if key in _FLOAT_KEYS else int if key in _INT_KEYS else _flag_type(default)
            p.add_argument(flag, dest=key, type=kind, choices=CHOICES.get(key),
                           help="required" if default is REQUIRED else f"default: {default}")
    return parser


def effective_config(command: str, config_path: str | None, flags: dict) -> dict:
    """Defaults, then the config file's table for ``command``, then flags."""
    opts = OPTIONS[command]
    cfg = {k: v for k, v in opts.items()}
    if config_path:
        doc = load_mapping(Path(config_path))
        unknown_sections = set(doc) - set(OPTIONS)
        if unknown_sections:
            raise FormatError(f"{config_path}: unknown sections {sorted(unknown_sections)}")
        section = doc.get(command, {})
        if not isinstance(section, dict):
            raise FormatError(f"{config_path}: [{command}] is not a table")
        unknown = set(section) - set(opts)
        if unknown:
            raise FormatError(f"{config_path}: unknown keys {sorted(unknown)} in [{command}]")
        cfg.update(section)
    cfg.update(flags)
    missing = [k for k, v in cfg.items() if v is REQUIRED]
    if missing:
        raise FormatError(f"{command}: missing required option(s) {missing}")
    for key, allowed in CHOICES.items():
        if key in cfg and cfg[key] not in allowed:
            raise FormatError(f"{command}: {key} must be one of {allowed}, got {cfg[key]!r}")
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config", None)
    try:
        cfg = effective_config(command, config_path, args)
        outputs = COMMANDS[command](cfg)
    except BstopoError as exc:
        print(f"bstopo {command}: {exc}", file=sys.stderr)
        return exc.exit_code if exc.exit_code in (2, 3, 4) else 4
    except OSError as exc:
        print(f"bstopo {command}: {exc}", file=sys.stderr)
        return 2
    for path in outputs:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())

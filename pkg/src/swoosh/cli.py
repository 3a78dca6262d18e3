"""Command-line entry point.

Exit codes: 0 success, 2 validation or usage error, 3 some data rows failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import io as sio
from .errors import SwooshError
from .geometry import (
    Point2,
    circumference,
    dod_order,
    ellipse_from_axes,
    landmark_distance,
    map_coordinates,
    standard_spaces,
)
from .heatmap import optimum_mse_pair
from .loss import LossConfig
from .metrics import RaterTable, icc_2_1, mean_difference
from .optim import SCENARIOS, OptimConfig, run_arms, summarize
from .saf import SafCoefficients, saf_derivative, saf_eval, solve_coefficients


OUTPUT_DIR_ENV = "SWOOSH_OUTPUT_DIR"
EXIT_OK, EXIT_USAGE, EXIT_PARTIAL = 0, 2, 3


class UsageError(Exception):
    pass


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# -- solve-coeffs ----------------------------------------------------------


def cmd_solve_coeffs(args) -> int:
    coeffs = solve_coefficients(args.a, args.x_star, args.min)
    _emit(json.dumps(coeffs.to_json(), indent=2) + "\n", args.out)
    return EXIT_OK


# -- saf-table -------------------------------------------------------------


def _table_grid(args) -> np.ndarray:
    if args.values is not None:
        parts = [p for p in args.values.split(",") if p.strip()]
        return np.array([float(p) for p in parts], dtype=float)
    start, stop, num = args.log
    num = int(num)
    if num < 0 or not (float(start) > 0 and float(stop) > 0):
        raise UsageError("--log needs START > 0, STOP > 0 and NUM >= 0")
    return np.geomspace(float(start), float(stop), num) if num else np.empty(0)


def cmd_saf_table(args) -> int:
    if args.coeffs:
        coeffs = SafCoefficients.from_json(json.loads(Path(args.coeffs).read_text()))
    else:
        if args.a is None or args.x_star is None:
            raise UsageError("give --coeffs FILE or both --a and --x-star")
        coeffs = solve_coefficients(args.a, args.x_star, args.min)
    xs = _table_grid(args)
    if args.include_x_star and xs.size:
        xs = np.unique(np.append(xs, coeffs.x_star))
    lines = ["x,saf,dsaf"]
    for x in xs:
        lines.append(f"{float(x)!r},{saf_eval(coeffs, float(x))!r},{saf_derivative(coeffs, float(x))!r}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


# -- optimize --------------------------------------------------------------


@dataclass
class ExperimentConfig:
    width: int = 96
    height: int = 96
    sigma: float = 3.0
    a: float = 1.0
    min_offset: float = 0.001
    pair_x_star: float | str = "auto"
    gate_threshold: float = 0.0009
    learning_rate: float = 500.0
    steps: int = 3000
    seed: int = 0
    init_scale: float = 0.1
    scenarios: list[str] = field(default_factory=lambda: ["disjoint"])
    output_dir: str | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        hm, saf, opt = d.get("heatmap", {}), d.get("saf", {}), d.get("optimizer", {})
        cfg = cls(
            width=int(hm.get("width", 96)),
            height=int(hm.get("height", 96)),
            sigma=float(hm.get("sigma", 3.0)),
            a=float(saf.get("a", 1.0)),
            min_offset=float(saf.get("min_offset", 0.001)),
            pair_x_star=saf.get("pair_x_star", "auto"),
            gate_threshold=float(saf.get("gate_threshold", 0.0009)),
            learning_rate=float(opt.get("learning_rate", 500.0)),
            steps=int(opt.get("steps", 3000)),
            seed=int(opt.get("seed", 0)),
            init_scale=float(opt.get("init_scale", 0.1)),
            scenarios=list(d.get("scenarios", ["disjoint"])),
            output_dir=d.get("output_dir"),
        )
        cfg.validate()
        return cfg

    def resolved_x_star(self) -> float:
        if self.pair_x_star == "auto":
            return optimum_mse_pair(self.width, self.height, self.sigma, self.width // 2)
        return float(self.pair_x_star)

    def loss_config(self) -> LossConfig:
        return LossConfig.from_values(self.a, self.resolved_x_star(), self.min_offset, self.gate_threshold)

    def optim_config(self) -> OptimConfig:
        return OptimConfig(self.learning_rate, self.steps, self.seed, self.init_scale, True)

    def validate(self) -> None:
        if self.width < 1 or self.height < 1 or not self.sigma > 0:
            raise UsageError("heatmap width/height must be >= 1 and sigma > 0")
        if self.pair_x_star != "auto" and not isinstance(self.pair_x_star, (int, float)):
            raise UsageError("saf.pair_x_star must be a number or \"auto\"")
        unknown = [s for s in self.scenarios if s not in SCENARIOS]
        if unknown:
            raise UsageError(f"unknown scenarios {unknown}; choose from {sorted(SCENARIOS)}")
        if len(set(self.scenarios)) != len(self.scenarios):
            raise UsageError("scenario names must be unique")
        # constructing these runs every module precondition
        self.loss_config()
        self.optim_config()


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    if not p.exists():
        bundled = resources.files("swoosh") / "configs" / p.name
        if p.parent == Path(".") and bundled.is_file():
            return ExperimentConfig.from_dict(json.loads(bundled.read_text()))
        raise UsageError(f"config file not found: {path}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from exc
    return ExperimentConfig.from_dict(data)


def _run_scenario(name, cfg: ExperimentConfig, loss_config, opt, out_dir: Path):
    sc = SCENARIOS[name](cfg.width, cfg.height, cfg.sigma)
    traces = run_arms(sc, loss_config, opt)
    rows = []
    for flag in (False, True):
        arm = "saf" if flag else "nosaf"
        tr = traces[flag]
        sio.write_trace_csv(tr, out_dir / f"{name}_{arm}_trace.csv")
        for i, h in enumerate(tr.final, start=1):
            sio.write_pgm(h, out_dir / f"{name}_{arm}_pH{i}.pgm")
        rows.append(summarize(name, flag, tr, sc.truth))
    return rows


def cmd_optimize(args) -> int:
    cfg = load_config(args.config)
    out_dir = Path(args.out_dir or cfg.output_dir or os.environ.get(OUTPUT_DIR_ENV) or "swoosh-out")
    loss_config = cfg.loss_config()
    opt = cfg.optim_config()
    out_dir.mkdir(parents=True, exist_ok=True)
    workers = max(1, min(args.workers, len(cfg.scenarios)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda n: _run_scenario(n, cfg, loss_config, opt, out_dir), cfg.scenarios))
    rows = [r for rs in results for r in rs]
    sio.write_summary(rows, out_dir / "summary.csv", out_dir / "summary.txt")
    sio.dump_json(
        {
            "loss_config": loss_config.to_json(),
            "optimizer": asdict(opt) | {"use_saf": "both"},
            "rows": [asdict(r) for r in rows],
        },
        out_dir / "summary.json",
    )
    sys.stdout.write(sio.format_summary_table(rows))
    return EXIT_OK


# -- measure ---------------------------------------------------------------

ANNOTATION_COLUMNS = ["image_id", "point_role", "x", "y", "space", "pixel_spacing_mm"]
ROLES = {"ftd": ("ftd_1", "ftd_2"), "hc": ("major_1", "major_2", "minor_1", "minor_2")}


def _read_crops(path) -> dict[str, tuple[float, float, float, float]]:
    crops = {}
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        need = {"image_id", "x0", "y0", "w", "h"}
        if not need <= set(reader.fieldnames or []):
            raise UsageError(f"{path}: crop CSV needs columns {sorted(need)}")
        for row in reader:
            crops[row["image_id"]] = tuple(float(row[k]) for k in ("x0", "y0", "w", "h"))
    return crops


def _measure_image(mode, pts: dict[str, Point2], spacing: float) -> float:
    if mode == "ftd":
        p1, p2 = dod_order(pts["ftd_1"], pts["ftd_2"])
        return landmark_distance(p1, p2, spacing)
    e = ellipse_from_axes((pts["major_1"], pts["major_2"]), (pts["minor_1"], pts["minor_2"]))
    if not spacing > 0:
        raise SwooshError(f"pixel spacing must be > 0, got {spacing!r}")
    return circumference(e) * spacing


def cmd_measure(args) -> int:
    crops = _read_crops(args.crops) if args.crops else {}
    roles = ROLES[args.mode]
    errors: list[str] = []
    images: dict[str, dict] = {}
    with open(args.annotations, newline="") as f:
        reader = csv.DictReader(f)
        missing = [c for c in ANNOTATION_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise UsageError(f"{args.annotations}: missing columns {missing}")
        for idx, row in enumerate(reader, start=1):
            img = images.setdefault(row["image_id"], {"pts": {}, "rows": [], "spacing": set(), "bad": False})
            img["rows"].append(idx)
            try:
                role = row["point_role"]
                if role not in roles:
                    raise SwooshError(f"point_role {role!r} not valid for mode {args.mode}")
                if role in img["pts"]:
                    raise SwooshError(f"duplicate point_role {role!r}")
                p = Point2(float(row["x"]), float(row["y"]))
                space = row["space"]
                if space not in ("original", "input", "heatmap"):
                    raise SwooshError(f"unknown space {space!r}")
                if space != "original":
                    if row["image_id"] not in crops:
                        raise SwooshError(f"no crop box for image {row['image_id']!r}; pass --crops")
                    spaces = standard_spaces(crops[row["image_id"]], input_size=args.input_size,
                                             heatmap_size=args.heatmap_size)
                    p = map_coordinates(p, spaces[space], spaces["original"])
                img["spacing"].add(float(row["pixel_spacing_mm"]))
                img["pts"][role] = p
            except (SwooshError, ValueError) as exc:
                img["bad"] = True
                errors.append(f"row {idx}: {type(exc).__name__}: {exc}")

    out_lines = ["image_id,biometry,value_mm"]
    for image_id, img in images.items():
        if img["bad"]:
            continue
        rows = ",".join(map(str, img["rows"]))
        try:
            lacking = [r for r in roles if r not in img["pts"]]
            if lacking:
                raise SwooshError(f"missing point roles {lacking}")
            if len(img["spacing"]) != 1:
                raise SwooshError("pixel_spacing_mm differs between rows of one image")
            value = _measure_image(args.mode, img["pts"], img["spacing"].pop())
        except (SwooshError, ValueError) as exc:
            errors.append(f"rows {rows} (image {image_id}): {type(exc).__name__}: {exc}")
            continue
        out_lines.append(f"{image_id},{args.mode},{value!r}")

    _emit("\n".join(out_lines) + "\n", args.out)
    for e in errors:
        sys.stderr.write(e + "\n")
    return EXIT_PARTIAL if errors else EXIT_OK


# -- metrics ---------------------------------------------------------------


def _read_values(path) -> list[float]:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        cols = reader.fieldnames or []
        col = next((c for c in ("value_mm", "value") if c in cols), None)
        if col is None:
            raise UsageError(f"{path}: needs a 'value_mm' or 'value' column")
        try:
            return [float(r[col]) for r in reader]
        except ValueError as exc:
            raise UsageError(f"{path}: {exc}") from exc


def _read_rater_table(path) -> RaterTable:
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if len(rows) < 2:
        raise UsageError(f"{path}: needs a header row and at least one subject row")
    try:
        values = [[float(v) for v in r] for r in rows[1:] if r]
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from exc
    if any(len(r) != len(rows[0]) for r in values):
        raise UsageError(f"{path}: ragged rows")
    return RaterTable(np.array(values))


def cmd_metrics(args) -> int:
    if args.metric == "icc":
        if not args.table:
            raise UsageError("--metric icc needs --table")
        table = _read_rater_table(args.table)
        result = {"metric": "icc_2_1", "icc": icc_2_1(table), "n": table.n, "k": table.k}
    else:
        if not (args.pred and args.truth):
            raise UsageError("--metric meandiff needs --pred and --truth")
        result = {"metric": "mean_difference", **mean_difference(_read_values(args.pred),
                                                                   _read_values(args.truth)).to_json()}
    _emit(json.dumps(result, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


# -- wiring ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swoosh", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-coeffs", help="solve b and c for a swoosh curve")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--x-star", type=float, required=True)
    p.add_argument("--min", type=float, default=0.001)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve_coeffs)

    p = sub.add_parser("saf-table", help="tabulate the curve and its derivative as CSV")
    p.add_argument("--coeffs", help="coefficients JSON written by solve-coeffs")
    p.add_argument("--a", type=float)
    p.add_argument("--x-star", type=float)
    p.add_argument("--min", type=float, default=0.001)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--log", nargs=3, metavar=("START", "STOP", "NUM"))
    g.add_argument("--values", help="comma-separated x values")
    p.add_argument("--include-x-star", action="store_true", help="add the minimum location to the grid")
    p.add_argument("--out")
    p.set_defaults(func=cmd_saf_table)

    p = sub.add_parser("optimize", help="run the heatmap-pair optimization experiment")
    p.add_argument("config", help="experiment JSON (bundled: disjoint.json, ambiguous.json)")
    p.add_argument("--out-dir", help=f"output directory (default: config, ${OUTPUT_DIR_ENV}, ./swoosh-out)")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("measure", help="biometry from landmark annotations")
    p.add_argument("annotations")
    p.add_argument("--mode", choices=sorted(ROLES), required=True)
    p.add_argument("--crops", help="CSV image_id,x0,y0,w,h mapping input space into the original image")
    p.add_argument("--input-size", type=int, default=384)
    p.add_argument("--heatmap-size", type=int, default=96)
    p.add_argument("--out")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("metrics", help="ICC(2,1) or mean absolute difference")
    p.add_argument("--metric", choices=["icc", "meandiff"], required=True)
    p.add_argument("--table", help="rater table CSV (header of rater ids, one row per subject)")
    p.add_argument("--pred")
    p.add_argument("--truth")
    p.add_argument("--out")
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (UsageError, SwooshError, ValueError, OSError, KeyError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

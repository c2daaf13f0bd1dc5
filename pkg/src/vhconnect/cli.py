"""Command-line front end: ``vhconnect {generate,combine,evaluate,stats}``."""

from __future__ import annotations

import argparse
import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
import logging
import os
from pathlib import Path
import sys
import time

import yaml

from .boxes import open_text, parse_ground_truth, parse_proposals, write_proposals
from .combiner import BudgetSplit, combine_all
from .evaluation import evaluate_at_budgets, format_summary, gt_stats, write_report
from .exceptions import ConfigurationError, InvalidInputError, ParseError, VHConnectError
from .generator import VHConfig, debug_stages, generate
from .pnm import PNM_SUFFIXES, read_pnm, read_pnm_size, write_pnm

log = logging.getLogger("vhconnect")

_VH_KEYS = ("se_size", "scales", "kernel_lengths", "fill_ratio", "max_side")
_CONFIG_KEYS = set(_VH_KEYS) | {"fill_ratio_p", "split", "budgets", "budget", "step", "jobs"}


@dataclass(frozen=True)
class TimingRecord:
    images_processed: int
    total_seconds: float

    @property
    def seconds_per_image(self):
        return self.total_seconds / self.images_processed if self.images_processed else 0.0


def load_config(path):
    """Read a YAML (or JSON) mapping of run settings."""
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"invalid config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigurationError(f"config {path} must hold a mapping")
    unknown = sorted(set(data) - _CONFIG_KEYS)
    if unknown:
        raise ConfigurationError(f"unknown config keys {unknown}")
    if "fill_ratio_p" in data:
        data.setdefault("fill_ratio", data.pop("fill_ratio_p"))
    return data


def _pick(args, cfg, key, default=None):
    value = getattr(args, key, None)
    if value is not None:
        return value
    return cfg.get(key, default)


def _vh_config(args, cfg):
    kwargs = {k: _pick(args, cfg, k) for k in _VH_KEYS}
    kwargs = {k: v for k, v in kwargs.items() if v is not None}
    for k in ("scales", "kernel_lengths"):
        if k in kwargs:
            kwargs[k] = tuple(kwargs[k])
    return VHConfig(**kwargs)


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _tagged_path(text):
    tag, sep, path = text.partition("=")
    if not sep:
        return None, text
    return tag, path


def list_images(directory):
    directory = Path(directory)
    if not directory.is_dir():
        raise ConfigurationError(f"image directory {directory} does not exist")
    files = sorted(p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in PNM_SUFFIXES)
    if not files:
        raise ConfigurationError(f"no PGM/PPM images in {directory}")
    ids = {}
    for p in files:
        if p.stem in ids:
            raise ConfigurationError(f"image id {p.stem!r} is ambiguous: {ids[p.stem].name} and {p.name}")
        ids[p.stem] = p
    return ids


def read_sizes(path):
    """Read ``image_id,width,height`` rows."""
    sizes = {}
    with open_text(path, "r") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["image_id", "width", "height"]:
            raise ParseError("sizes CSV must start with 'image_id,width,height'", line=1)
        for row in reader:
            if not row:
                continue
            try:
                image_id, w, h = row
                sizes[image_id] = (int(w), int(h))
            except ValueError:
                raise ParseError(f"malformed sizes row {row}", line=reader.line_num) from None
    return sizes


def _image_sizes(args):
    if getattr(args, "sizes", None):
        return read_sizes(args.sizes)
    if getattr(args, "images", None):
        sizes = {}
        for image_id, path in list_images(args.images).items():
            try:
                sizes[image_id] = read_pnm_size(path)
            except (OSError, ParseError) as exc:
                log.warning("skipping %s: %s", path, exc)
        return sizes
    return None


def _process_image(job):
    image_id, path, cfg, dump_dir = job
    try:
        img = read_pnm(path)
    except (OSError, ParseError) as exc:
        return image_id, None, 0.0, str(exc)
    start = time.perf_counter()
    props = generate(img, cfg, image_id)
    elapsed = time.perf_counter() - start
    if dump_dir is not None:
        for s, (grad, _, edges) in debug_stages(img, cfg).items():
            write_pnm(Path(dump_dir) / f"{image_id}_s{s:g}_gradient.pgm", grad)
            write_pnm(Path(dump_dir) / f"{image_id}_s{s:g}_edges.pgm", edges * 255)
    return image_id, props, elapsed, None


def run_generator(images_dir, cfg, jobs=1, dump_dir=None):
    """Generate VH proposals for every image; returns ``(proposals, timing, skipped)``."""
    files = list_images(images_dir)
    if dump_dir is not None:
        Path(dump_dir).mkdir(parents=True, exist_ok=True)
    work = [(image_id, path, cfg, dump_dir) for image_id, path in files.items()]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_process_image, work))
    else:
        results = [_process_image(w) for w in work]

    proposals, skipped, per_image = [], [], []
    for image_id, props, elapsed, error in sorted(results, key=lambda r: r[0]):
        if error is not None:
            log.warning("skipping %s: %s", image_id, error)
            skipped.append(image_id)
            continue
        proposals.extend(props)
        per_image.append((image_id, len(props), elapsed))
    timing = TimingRecord(len(per_image), sum(e for _, _, e in per_image))
    return proposals, timing, skipped, per_image


def cmd_generate(args, cfg):
    vh_cfg = _vh_config(args, cfg)
    jobs = _pick(args, cfg, "jobs", 1)
    proposals, timing, skipped, per_image = run_generator(args.images, vh_cfg, jobs, args.dump_dir)
    if timing.images_processed == 0:
        raise ConfigurationError("no readable images")
    write_proposals(proposals, sys.stdout if args.out == "-" else args.out)
    for image_id, n, elapsed in per_image:
        print(f"{image_id}: {n} proposals in {elapsed:.4f} s", file=sys.stderr)
    print(f"{timing.images_processed} images, {len(proposals)} proposals, "
          f"mean {timing.seconds_per_image:.4f} s/image", file=sys.stderr)
    if skipped:
        print(f"skipped {len(skipped)}: {', '.join(skipped)}", file=sys.stderr)
    return 0


def _read_sources(items):
    sources = {}
    for item in items or []:
        tag, path = _tagged_path(item)
        if not tag:
            raise ConfigurationError(f"--proposals {item!r} must be TAG=FILE")
        if tag in sources:
            raise ConfigurationError(f"source {tag!r} given twice")
        if not os.path.isfile(path):
            raise ConfigurationError(f"proposal file for {tag!r} not found: {path}")
        sources[tag] = parse_proposals(path, tag)
    return sources


def cmd_combine(args, cfg):
    split_text = _pick(args, cfg, "split")
    if split_text is None:
        raise ConfigurationError("combine needs --split")
    split = split_text if isinstance(split_text, BudgetSplit) else BudgetSplit.parse(str(split_text))
    budget = args.budget[-1] if args.budget else cfg.get("budget", 2000)
    sources = _read_sources(args.proposals)
    if "vh" in split.tags and "vh" not in sources and args.images:
        jobs = _pick(args, cfg, "jobs", 1)
        sources["vh"], _, _, _ = run_generator(args.images, _vh_config(args, cfg), jobs)
    if set(sources) != set(split.tags):
        raise ConfigurationError(f"split sources {split.tags} do not match provided sources {sorted(sources)}")
    merged = combine_all(sources, budget, split)
    write_proposals(merged, sys.stdout if args.out == "-" else args.out)
    log.info("combined %s at budget %d: %d proposals", split, budget, len(merged))
    return 0


def _budgets(args, cfg):
    budgets = args.budget or cfg.get("budgets") or ([cfg["budget"]] if "budget" in cfg else None)
    if budgets is None:
        return [2000]
    budgets = [int(b) for b in budgets]
    if any(b <= 0 for b in budgets) or any(b2 <= b1 for b1, b2 in zip(budgets, budgets[1:])):
        raise ConfigurationError(f"budgets must be positive and strictly ascending, got {budgets}")
    return budgets


def cmd_evaluate(args, cfg):
    gts = parse_ground_truth(args.gt)
    if not gts:
        raise ConfigurationError(f"{args.gt} holds no annotations")
    tag, path = _tagged_path(args.proposals)
    proposals = parse_proposals(path, tag or "")
    gt_ids = {g.image_id for g in gts}
    if proposals and not gt_ids & {p.image_id for p in proposals}:
        raise ConfigurationError("ground truth and proposals share no image ids")
    budgets = _budgets(args, cfg)
    step = _pick(args, cfg, "step", 0.01)
    sizes = _image_sizes(args)
    reports = evaluate_at_budgets(gts, proposals, budgets, image_sizes=sizes, step=step)
    if args.out:
        write_report(reports, sys.stdout if args.out == "-" else args.out)
    print(format_summary(reports))
    return 0


def cmd_stats(args, cfg):
    sizes = _image_sizes(args)
    if sizes is None:
        raise ConfigurationError("stats needs --images or --sizes")
    rows = []
    for path in args.gt:
        gts = parse_ground_truth(path)
        if not gts:
            raise InvalidInputError(f"{path} holds no annotations")
        s = gt_stats(gts, sizes)
        rows.append([Path(path).stem, repr(s.avg_width), repr(s.avg_height), repr(s.avg_area_ratio)])
    with open_text(sys.stdout if args.out == "-" else args.out, "w") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "avg_width", "avg_height", "avg_area_ratio"])
        w.writerows(rows)
    return 0


def _add_vh_flags(p):
    g = p.add_argument_group("VH-Connect parameters (override --config)")
    g.add_argument("--se-size", dest="se_size", type=int, help="gradient element size (default 3)")
    g.add_argument("--scales", type=_float_list, help="pyramid scales, e.g. 1,0.5,0.25")
    g.add_argument("--kernel-lengths", dest="kernel_lengths", type=_int_list, help="e.g. 9,15,30,45")
    g.add_argument("--fill-ratio", dest="fill_ratio", type=float, help="minimum structure fill ratio (default 0.5)")
    g.add_argument("--max-side", dest="max_side", type=int, help="prescale limit in px (default 1024)")


def build_parser():
    parser = argparse.ArgumentParser(prog="vhconnect", description="Generate, combine and evaluate object proposals.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-image progress")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML/JSON file with default settings")
    common.add_argument("--jobs", type=int, help="worker processes (default 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="run VH-Connect on a directory of PGM/PPM images")
    p.add_argument("--images", required=True, help="image directory")
    p.add_argument("--out", default="-", help="proposal CSV (default stdout)")
    p.add_argument("--dump-dir", dest="dump_dir", help="write per-scale gradient/edge PGMs here")
    _add_vh_flags(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("combine", parents=[common], help="merge ranked sources under a proposal budget")
    p.add_argument("--proposals", action="append", metavar="TAG=FILE", help="ranked proposal CSV (repeatable)")
    p.add_argument("--split", help="e.g. ss=0.5,eb=0.4,vh=0.1")
    p.add_argument("--budget", type=int, action="append", help="total proposals per image (default 2000)")
    p.add_argument("--images", help="image directory, used to run the built-in vh source")
    p.add_argument("--out", default="-", help="merged proposal CSV (default stdout)")
    _add_vh_flags(p)
    p.set_defaults(func=cmd_combine)

    p = sub.add_parser("evaluate", parents=[common], help="MABO, recall curve and AR at given budgets")
    p.add_argument("--gt", required=True, help="ground-truth CSV")
    p.add_argument("--proposals", required=True, metavar="[TAG=]FILE", help="ranked proposal CSV")
    p.add_argument("--budget", type=int, action="append", help="budget (repeatable, ascending; default 2000)")
    p.add_argument("--step", type=float, help="recall threshold grid step (default 0.01)")
    p.add_argument("--images", help="image directory for ground-truth statistics")
    p.add_argument("--sizes", help="CSV image_id,width,height for ground-truth statistics")
    p.add_argument("--out", help="report CSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("stats", parents=[common], help="average ground-truth box size and area ratio")
    p.add_argument("--gt", required=True, action="append", help="ground-truth CSV (repeatable, one row each)")
    p.add_argument("--images", help="image directory")
    p.add_argument("--sizes", help="CSV image_id,width,height")
    p.add_argument("--out", default="-", help="stats CSV (default stdout)")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except (VHConnectError, OSError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

    hftsal run IMAGE|DIR ... --model hft --out results/
    hftsal scalespace IMAGE --out scales/
    hftsal eval --manifest data/manifest.json --border-cut 8 --model hft --model sr
    hftsal patterns generate --out patterns/ --seed 0
    hftsal bench

All outputs are files.  HFTSAL_OUT and HFTSAL_JOBS override the default
output directory and worker count.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .evaluation import (CalibrationOptions, GroundTruth, SIGMA_GRID, calibrate, load_ground_truth,
                         load_manifest, report_tables)
from .imageio import read_image, write_image, write_map, write_raw
from .imaging import normalize_minmax
from .models import MODEL_NAMES, POST_SIGMA_FACTOR, ModelConfig, hft_saliency, hft_spectrum, run_model
from .quaternion import PureUnitAxis
from .report import dumps_json, rows_to_csv, write_report
from .scalespace import build_scale_space

IMAGE_SUFFIXES = {".pgm", ".ppm", ".pnm", ".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"}
HFT_MODELS = ("hft", "hft-e", "hft-star")


class CliError(Exception):
    """Rejected invocation; reported as a usage error."""


# ---------------------------------------------------------------- helpers

def _floats(text: str, n: int | None = None) -> tuple:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise argparse.ArgumentTypeError(f"expected {n} numbers, got {len(vals)}")
    return vals


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def _pos_int(text: str) -> int:
    v = _nonneg_int(text)
    if v == 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _default_out(args_out) -> Path:
    return Path(args_out or os.environ.get("HFTSAL_OUT") or "hftsal-out")


def _jobs(args_jobs) -> int:
    if args_jobs is not None:
        return args_jobs
    env = os.environ.get("HFTSAL_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise CliError(f"HFTSAL_JOBS must be an integer, got {env!r}") from None
    return 1


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model configuration")
    g.add_argument("--weights", type=lambda s: _floats(s, 4), metavar="W1,W2,W3,W4",
                   help="feature weights for motion, I, RG, BY (default 0,0.5,0.25,0.25)")
    g.add_argument("--resolution", type=_pos_int, help="HFT working resolution (default 128)")
    g.add_argument("--post-sigma", type=float, dest="post_sigma",
                   help=f"post-smoothing sigma as a fraction of width (default {POST_SIGMA_FACTOR})")
    g.add_argument("--axis", type=lambda s: _floats(s, 3), metavar="B,C,D",
                   help="pure unit quaternion axis for the transform (normalized if needed)")
    g.add_argument("--domain", choices=("amplitude", "log-amplitude"), help="scale-space domain")
    g.add_argument("--varsigma", type=float, help="entropy smoothing as a fraction of width")
    g.add_argument("--t0", type=float, help="base scale of the kernel family")


def _config(args) -> ModelConfig:
    changes = {}
    if getattr(args, "weights", None) is not None:
        changes["weights"] = args.weights
    if getattr(args, "resolution", None) is not None:
        changes["resolution"] = args.resolution
    if getattr(args, "post_sigma", None) is not None:
        changes["post_sigma_factor"] = args.post_sigma
    if getattr(args, "axis", None) is not None:
        b, c, d = args.axis
        n = float(np.sqrt(b * b + c * c + d * d))
        if n == 0:
            raise CliError("--axis must be nonzero")
        changes["axis"] = PureUnitAxis(b / n, c / n, d / n)
    if getattr(args, "domain", None) is not None:
        changes["domain"] = args.domain
    if getattr(args, "varsigma", None) is not None:
        changes["varsigma_factor"] = args.varsigma
    if getattr(args, "t0", None) is not None:
        changes["t0"] = args.t0
    try:
        return ModelConfig(**changes)
    except (ValueError, TypeError) as exc:
        raise CliError(f"invalid model configuration: {exc}") from exc


def config_dict(cfg: ModelConfig) -> dict:
    return {
        "weights": [float(w) for w in cfg.weights],
        "resolution": list(cfg.shape),
        "post_sigma_factor": float(cfg.post_sigma_factor),
        "axis": [float(v) for v in cfg.axis.as_array()],
        "domain": cfg.domain,
        "selection": cfg.selection,
        "varsigma_factor": float(cfg.varsigma_factor),
        "t0": float(cfg.t0),
        "bins": int(cfg.bins),
    }


def expand_inputs(paths) -> list[Path]:
    """Files as given, directories expanded to their image files (sorted)."""
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            out.extend(sorted(q for q in p.iterdir() if q.suffix.lower() in IMAGE_SUFFIXES))
        else:
            out.append(p)
    return out


def _unique_stems(paths) -> list[str]:
    seen: dict[str, int] = {}
    stems = []
    for p in paths:
        n = seen.get(p.stem, 0) + 1
        seen[p.stem] = n
        stems.append(p.stem if n == 1 else f"{p.stem}-{n}")
    return stems


def montage(planes, columns: int = 4, gap: int = 2) -> np.ndarray:
    """Tile min-max normalized planes on a grid with a white gap."""
    h, w = planes[0].shape
    rows = -(-len(planes) // columns)
    cols = min(columns, len(planes))
    canvas = np.ones((rows * h + (rows - 1) * gap, cols * w + (cols - 1) * gap))
    for i, plane in enumerate(planes):
        r, c = divmod(i, columns)
        canvas[r * (h + gap): r * (h + gap) + h, c * (w + gap): c * (w + gap) + w] = normalize_minmax(plane)
    return canvas


# ---------------------------------------------------------------- run

def _run_one(path: Path, stem: str, args, cfg: ModelConfig, gt) -> dict:
    img = read_image(path)
    out = args.out
    suffix = "." + args.format
    record = {"input": str(path), "status": "ok", "outputs": []}
    prov = {"input": str(path), "model": args.model, "seed": args.seed, "version": __version__,
            "input_shape": list(img.shape[:2]), "config": config_dict(cfg)}
    base = f"{stem}_{args.model}"

    if args.model in HFT_MODELS:
        mode = {"hft": "full", "hft-e": "entropy-only", "hft-star": "oracle"}[args.model]
        res = hft_saliency(img, cfg.with_(selection=mode), gt=gt)
        smap = res.saliency
        smap.model = args.model
        prov.update(scale=res.k_p, K=res.K, post_sigma=float(smap.post_sigma))
        if args.dump_scales:
            sdir = out / f"{base}_scales"
            for k, m in enumerate(res.maps, start=1):
                record["outputs"].append(str(write_map(sdir / f"scale_{k:02d}{suffix}", m, args.bits)))
            mpath = out / f"{base}_montage{suffix}"
            record["outputs"].append(str(write_image(mpath, montage([m.values for m in res.maps]), args.bits)))
        if args.trace:
            record["outputs"].append(str(write_report(res.trace, "csv", out / f"{base}_trace.csv")))
    else:
        smap = run_model(args.model, img, cfg, seed=args.seed)
        prov.update(scale=None, post_sigma=float(smap.post_sigma))
    prov["working_shape"] = list(smap.shape)

    record["outputs"].insert(0, str(write_map(out / f"{base}{suffix}", smap, args.bits)))
    if args.raw:
        record["outputs"].append(str(write_raw(out / f"{base}.f64", smap, prov)))
    side = out / f"{base}.json"
    side.write_text(dumps_json(prov), encoding="utf-8")
    record["outputs"].append(str(side))
    return record


def cmd_run(args) -> int:
    cfg = _config(args)
    args.out = _default_out(args.out)
    inputs = expand_inputs(args.inputs)
    if not inputs:
        raise CliError("no input images found")
    gt = None
    if args.model == "hft-star":
        if not args.gt:
            raise CliError("--model hft-star needs --gt (ground-truth mask)")
        m = read_image(args.gt)
        gt = GroundTruth.region((m.mean(axis=2) if m.ndim == 3 else m) > 0.5)
    args.out.mkdir(parents=True, exist_ok=True)

    def work(item):
        path, stem = item
        try:
            return _run_one(path, stem, args, cfg, gt)
        except (OSError, ValueError) as exc:
            return {"input": str(path), "status": "error", "error": str(exc)}

    items = list(zip(inputs, _unique_stems(inputs)))
    jobs = _jobs(args.jobs)
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            records = list(pool.map(work, items))
    else:
        records = [work(it) for it in items]

    failed = [r for r in records if r["status"] != "ok"]
    for r in failed:
        print(f"hftsal: error: {r['input']}: {r['error']}", file=sys.stderr)
    summary = {"command": "run", "model": args.model, "n_inputs": len(records),
               "n_failed": len(failed), "records": records}
    write_report(summary, "json", args.out / f"run_{args.model}.json")
    if not args.quiet:
        print(f"{len(records) - len(failed)}/{len(records)} images processed -> {args.out}")
    return 1 if failed else 0


# ---------------------------------------------------------------- scalespace

def cmd_scalespace(args) -> int:
    cfg = _config(args)
    out = _default_out(args.out)
    img = read_image(args.input)
    spec = hft_spectrum(img, cfg)
    space = build_scale_space(spec.amplitude, cfg.domain, cfg.t0)
    suffix = "." + args.format
    layers = []
    for k in range(1, space.K + 1):
        # display layers as log amplitude with the DC term at the centre
        disp = np.fft.fftshift(np.log1p(space.amplitude(k)))
        write_map(out / f"layer_{k:02d}{suffix}", disp, args.bits)
        if args.raw:
            write_raw(out / f"layer_{k:02d}.f64", space.amplitude(k), {"k": k})
        a = space.amplitude(k)
        layers.append({"k": k, "sigma": space.sigma(k), "file": f"layer_{k:02d}{suffix}",
                       "min": float(a.min()), "max": float(a.max())})
    meta = {"input": str(args.input), "domain": cfg.domain, "t0": float(cfg.t0), "K": space.K,
            "shape": list(spec.amplitude.shape), "display": "fftshift(log(1 + amplitude)), min-max",
            "config": config_dict(cfg), "layers": layers}
    write_report(meta, "json", out / "scalespace.json")
    write_image(out / f"montage{suffix}",
                montage([np.fft.fftshift(np.log1p(space.amplitude(k))) for k in range(1, space.K + 1)]),
                args.bits)
    if not args.quiet:
        print(f"{space.K} layers -> {out}")
    return 0


# ---------------------------------------------------------------- eval

def cmd_eval(args) -> int:
    cfg = _config(args)
    out = _default_out(args.out)
    try:
        records = load_manifest(args.manifest)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot load manifest: {exc}") from exc
    if not records:
        raise CliError("manifest has no entries")
    base = Path(args.manifest).parent
    images, gts, cats, names, errors = [], [], [], [], []
    for rec in records:
        name = os.path.relpath(rec.image, base)
        try:
            img = read_image(rec.image)
            gt = load_ground_truth(rec, img.shape)
        except (OSError, ValueError) as exc:
            errors.append({"image": name, "error": str(exc)})
            print(f"hftsal: error: {name}: {exc}", file=sys.stderr)
            continue
        images.append(img)
        gts.append(gt)
        cats.append(rec.category)
        names.append(name)

    sigma_factors = SIGMA_GRID if args.smoothing_sweep else (cfg.post_sigma_factor,)
    options = CalibrationOptions(border_cut=args.border_cut, smoothing_sweep=args.smoothing_sweep,
                                 sigma_factors=sigma_factors, center_bias=args.center_bias)
    reports = []
    if images:
        for model in args.models:
            if model in HFT_MODELS:
                def runner(img, gt, model=model):
                    return run_model(model, img, cfg, gt=gt, raw=True)
            else:
                def runner(img, gt, model=model):
                    return run_model(model, img, cfg, seed=args.seed, raw=True)
            try:
                rep = calibrate(runner, images, gts, options, model=model, categories=cats,
                                jobs=_jobs(args.jobs), with_gt=True)
            except ValueError as exc:
                raise CliError(f"evaluation failed for {model}: {exc}") from exc
            for entry in rep.per_image:
                entry["image"] = names[entry["index"]]
            reports.append(rep)

    report = {"command": "eval", "version": __version__, "manifest": Path(args.manifest).name,
              "n_records": len(records), "n_scored": len(images), "border_cut": args.border_cut,
              "smoothing_sweep": bool(args.smoothing_sweep), "center_bias": bool(args.center_bias),
              "seed": args.seed, "config": config_dict(cfg), "errors": errors,
              "models": [r.to_dict() for r in reports]}
    write_report(report, "json", out / "report.json")
    for name, (header, rows) in report_tables(reports).items():
        path = out / f"{name}.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(rows_to_csv(header, rows), encoding="utf-8")
    if not args.quiet:
        for r in reports:
            pod = "" if r.podsc is None else f"  PoDSC {r.podsc:.4f}"
            print(f"{r.model:16s} AUC {r.auc:.4f}{pod}  (sigma {r.best_sigma_factor:.2f}W)")
        print(f"report -> {out / 'report.json'}")
    if not images:
        return 1
    return 1 if errors else 0


# ---------------------------------------------------------------- patterns

def generate_patterns(out: Path, seed: int = 0, noise_level: float = 0.05,
                      natural: bool = True, chaos: bool = True) -> list[dict]:
    """Write the synthetic corpus as PPM/PGM files plus ``manifest.json``."""
    from . import patterns as pl

    out.mkdir(parents=True, exist_ok=True)
    manifest = []

    def emit(name, img, mask, category):
        write_image(out / f"{name}.ppm", img)
        write_image(out / f"{name}_mask.pgm", mask.astype(np.float64))
        manifest.append({"image": f"{name}.ppm", "gt": f"{name}_mask.pgm",
                         "gt_kind": "region-mask", "category": category})

    for name, spec in pl.popout_battery(seed):
        img, mask = pl.make_pattern(spec)
        emit(name, img, mask, 5)
    size_cat = {8: 3, 24: 2, 48: 1}
    for name, spec in pl.size_series(seed=seed):
        img, mask = pl.make_pattern(spec)
        emit(name, img, mask, size_cat.get(int(spec.token_size), 2))
    odd = dict(pl.popout_battery(seed))["color-red-among-green"]
    img, mask = pl.make_pattern(odd)
    for kind in ("gaussian", "salt-pepper"):
        emit(f"noisy-{kind}-{noise_level:g}", pl.add_noise(img, kind, noise_level, seed), mask, 4)
    write_report(manifest, "json", out / "manifest.json")

    if natural:
        for i, im in enumerate(pl.natural_corpus(seed=seed)):
            write_image(out / "natural" / f"natural-{i:02d}.ppm", im)
    if chaos:
        for i, im in enumerate(pl.chaos_sequence(seed=seed)):
            write_image(out / "chaos" / f"chaos-{i}.pgm", im)
    return manifest


def cmd_patterns(args) -> int:
    out = _default_out(args.out)
    if not 0 <= args.noise_level <= 1:
        raise CliError("--noise-level must lie in [0, 1]")
    manifest = generate_patterns(out, args.seed, args.noise_level,
                                 natural=not args.no_natural, chaos=not args.no_chaos)
    if not args.quiet:
        print(f"{len(manifest)} labelled patterns -> {out / 'manifest.json'}")
    return 0


# ---------------------------------------------------------------- bench

def cmd_bench(args) -> int:
    from . import patterns as pl

    cfg = _config(args)
    if args.inputs:
        paths = expand_inputs(args.inputs)
        images = [read_image(p) for p in paths]
    else:
        images = [pl.make_pattern(spec)[0] for _, spec in pl.popout_battery(args.seed)]
    rows = []
    for model in args.models:
        run_model(model, images[0], cfg, seed=args.seed)  # warm-up
        times = []
        for img in images:
            for _ in range(args.repeat):
                t = time.perf_counter()
                run_model(model, img, cfg, seed=args.seed)
                times.append(time.perf_counter() - t)
        rows.append({"model": model, "n": len(times), "mean_s": float(np.mean(times)),
                     "max_s": float(np.max(times))})
        print(f"{model:16s} mean {1000 * np.mean(times):8.2f} ms   max {1000 * np.max(times):8.2f} ms")
    if args.out:
        write_report({"command": "bench", "results": rows}, "json", Path(args.out) / "bench.json")
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hftsal", description="Spectrum scale-space saliency detection.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="compute saliency maps")
    r.add_argument("inputs", nargs="+", help="image files or directories")
    r.add_argument("--model", choices=MODEL_NAMES, default="hft")
    r.add_argument("--out", help="output directory (env HFTSAL_OUT)")
    r.add_argument("--format", choices=("png", "pgm"), default="png")
    r.add_argument("--bits", type=int, choices=(8, 16), default=8)
    r.add_argument("--raw", action="store_true", help="also dump float64 maps with a JSON sidecar")
    r.add_argument("--dump-scales", action="store_true", help="write every per-scale HFT map and a montage")
    r.add_argument("--trace", action="store_true", help="write the scale-selection criterion trace as CSV")
    r.add_argument("--gt", help="ground-truth mask for --model hft-star")
    r.add_argument("--seed", type=int, default=0, help="seed for the noise diagnostic")
    r.add_argument("--jobs", type=_pos_int, help="parallel workers (env HFTSAL_JOBS)")
    r.add_argument("-q", "--quiet", action="store_true")
    _add_config_flags(r)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("scalespace", help="dump the amplitude-spectrum scale space of one image")
    s.add_argument("input")
    s.add_argument("--out", help="output directory (env HFTSAL_OUT)")
    s.add_argument("--format", choices=("png", "pgm"), default="png")
    s.add_argument("--bits", type=int, choices=(8, 16), default=8)
    s.add_argument("--raw", action="store_true")
    s.add_argument("-q", "--quiet", action="store_true")
    _add_config_flags(s)
    s.set_defaults(func=cmd_scalespace)

    e = sub.add_parser("eval", help="calibrated ROC / DSC evaluation over a manifest")
    e.add_argument("--manifest", required=True, help="JSON array of {image, gt, gt_kind, category}")
    e.add_argument("--border-cut", type=_nonneg_int, required=True,
                   help="frame width (map pixels) excluded from scoring")
    e.add_argument("--model", dest="models", action="append", choices=MODEL_NAMES,
                   help="model to evaluate (repeatable; default hft)")
    e.add_argument("--out", help="output directory (env HFTSAL_OUT)")
    e.add_argument("--center-bias", action="store_true", help="fit the centre-bias blend")
    e.add_argument("--no-smoothing-sweep", dest="smoothing_sweep", action="store_false",
                   help="score only at the configured post-smoothing")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--jobs", type=_pos_int)
    e.add_argument("-q", "--quiet", action="store_true")
    _add_config_flags(e)
    e.set_defaults(func=cmd_eval)

    pt = sub.add_parser("patterns", help="synthetic stimuli")
    psub = pt.add_subparsers(dest="action", required=True)
    g = psub.add_parser("generate", help="write the pattern corpus and its manifest")
    g.add_argument("--out", help="output directory (env HFTSAL_OUT)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--noise-level", type=float, default=0.05)
    g.add_argument("--no-natural", action="store_true", help="skip the natural-statistics corpus")
    g.add_argument("--no-chaos", action="store_true", help="skip the spatial-chaos sequence")
    g.add_argument("-q", "--quiet", action="store_true")
    g.set_defaults(func=cmd_patterns)

    b = sub.add_parser("bench", help="time the detectors")
    b.add_argument("inputs", nargs="*", help="images (default: the pop-out battery)")
    b.add_argument("--model", dest="models", action="append", choices=MODEL_NAMES)
    b.add_argument("--repeat", type=_pos_int, default=3)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", help="write bench.json here")
    _add_config_flags(b)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "models", "unset") is None:
        args.models = ["hft"] if args.command == "eval" else list(MODEL_NAMES[:1]) + ["sr", "pft", "pqft", "gs"]
    try:
        return args.func(args)
    except CliError as exc:
        parser.error(str(exc))
    except (OSError, ValueError) as exc:
        print(f"hftsal: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

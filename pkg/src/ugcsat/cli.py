"""Command-line entry point: ``ugcsat {gaussian-model,synth,analyze,corpus}``.

Settings are layered: built-in defaults, then ``--config`` (a JSON run
config, as written next to every output), then explicit flags.  Exit codes:
0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import analytic
from .codec import index_frames, jpeg_bytes, load_frames, synthesize_ugc
from .corpus import run_corpus, write_report
from .pipeline import RunConfig, analyze_source, write_clip_outputs, write_csv
from .planes import mse, read_plane, write_plane

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("ugcsat")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _frames(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected start,stride,count")
    return [int(p) for p in parts]


def _common(p):
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="JSON run config (flags override it)")
    p.add_argument("--out-dir", dest="out_dir", default=S)
    p.add_argument("--grid", default=S, help="quality grid a:b:step or comma list")
    p.add_argument("--block-size", dest="block_size", type=int, default=S)
    p.add_argument("--denoiser", default=S,
                   choices=["bayes_shrink", "gaussian_blur", "identity", "external"])
    p.add_argument("--wavelet", default=S)
    p.add_argument("--levels", type=int, default=S)
    p.add_argument("--blur-sigma", dest="blur_sigma", type=float, default=S)
    p.add_argument("--denoiser-command", dest="denoiser_command", default=S,
                   help="external denoiser template with {input} and {output}")
    p.add_argument("--frames", type=_frames, default=S, help="start,stride,count")
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--jobs", type=int, default=S, help="worker processes (0 = all cores)")
    p.add_argument("--svg", action="store_true", default=S, help="also write SVG plots")


def build_parser():
    parser = _Parser(prog="ugcsat", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    S = argparse.SUPPRESS

    g = sub.add_parser("gaussian-model", help="analytic Gaussian distortion-rate curves")
    _common(g)
    g.add_argument("--var-x", dest="var_x", type=float, default=S)
    g.add_argument("--var-eta", dest="var_eta", type=float, default=S)
    g.add_argument("--rate-max", dest="rate_max", type=float, default=S)
    g.add_argument("--rate-step", dest="rate_step", type=float, default=S)

    s = sub.add_parser("synth", help="degrade pristine frames into synthetic UGC")
    _common(s)
    s.add_argument("--input", default=S, help="image file or directory of frames")
    s.add_argument("--qp", type=int, default=S)
    s.add_argument("--degradation", default=S,
                   choices=["dct_quantize", "recompress_jpeg", "external"])
    s.add_argument("--quality", type=int, default=S)
    s.add_argument("--degradation-command", dest="degradation_command", default=S)

    a = sub.add_parser("analyze", help="saturation analysis of one clip")
    _common(a)
    a.add_argument("--input", default=S, help="image, .npy stack or frame directory")
    a.add_argument("--save-jpeg", dest="save_jpeg", action="store_true", default=S)

    c = sub.add_parser("corpus", help="QV* over a manifest and MOS correlation")
    _common(c)
    c.add_argument("--manifest", default=S)
    c.add_argument("--category", default=S)
    return parser


def resolve_config(ns) -> RunConfig:
    data = {}
    if getattr(ns, "config", None):
        data.update(RunConfig.load(ns.config).__dict__)
    for key in RunConfig.keys():
        if hasattr(ns, key):
            data[key] = getattr(ns, key)
    return RunConfig.from_mapping(data)


def cmd_gaussian_model(cfg: RunConfig) -> int:
    if cfg.var_x is None or cfg.var_eta is None:
        raise UsageError("gaussian-model needs --var-x and --var-eta")
    if cfg.rate_step <= 0 or cfg.rate_max < 0:
        raise UsageError("rate grid needs rate-step > 0 and rate-max >= 0")
    try:
        ch = analytic.GaussianChannel(cfg.var_x, cfg.var_eta)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    n = int(round(cfg.rate_max / cfg.rate_step)) + 1
    rates = np.round(np.arange(n) * cfg.rate_step, 12)
    d_trad = analytic.traditional_drf(ch, rates)
    d_ugc = analytic.ugc_drf(ch, rates)
    floor = analytic.d0(ch)

    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "gaussian.csv", ["rate", "d_traditional", "d_ugc", "d0"],
              zip(rates, d_trad, d_ugc, [floor] * n))
    if cfg.svg:
        from .plots import rd_curves_svg

        pristine = analytic.traditional_drf(analytic.GaussianChannel(cfg.var_x), rates)
        rd_curves_svg(out / "gaussian.svg", rates, {
            "x, reference x": pristine,
            "u, reference u": d_trad,
            "u, reference x": d_ugc,
        }, floor=floor)
    cfg.dump(out / "run_config.json", "gaussian-model")
    print(f"D0 = {floor!r}; wrote {out / 'gaussian.csv'}")
    return EXIT_OK


def _synth_inputs(src: Path):
    if src.is_dir():
        frames = index_frames(src)
        if not frames:
            raise FileNotFoundError(f"no numbered PNG/PGM frames in {src}")
        return [frames[i] for i in sorted(frames)]
    if not src.exists():
        raise FileNotFoundError(f"input not found: {src}")
    return [src]


def cmd_synth(cfg: RunConfig) -> int:
    if not cfg.input:
        raise UsageError("synth needs --input")
    spec = cfg.degradation_spec()
    paths = _synth_inputs(Path(cfg.input))
    planes = [read_plane(p) for p in paths]
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for path, x in zip(paths, planes):
        u = synthesize_ugc(x, spec, cfg.seed)
        name = path.with_suffix(".png").name
        write_plane(out / name, u)
        rows.append((name, mse(u, x)))
    write_csv(out / "synth.csv", ["frame", "mse_vs_input"], rows)
    cfg.dump(out / "run_config.json", "synth")
    print(f"wrote {len(rows)} degraded frame(s) to {out}")
    return EXIT_OK


def cmd_analyze(cfg: RunConfig) -> int:
    if not cfg.input:
        raise UsageError("analyze needs --input")
    analysis = analyze_source(cfg.input, cfg)
    out = Path(cfg.out_dir)
    write_clip_outputs(analysis, out)
    if cfg.save_jpeg:
        jdir = out / "jpeg"
        jdir.mkdir(exist_ok=True)
        _, planes = load_frames(cfg.input, cfg.frames)
        for f, u in zip(analysis.result.frames, planes):
            for qv in f.qvs:
                (jdir / f"frame{f.frame_index:05d}_qv{qv:03d}.jpg").write_bytes(jpeg_bytes(u, qv))
    if cfg.svg:
        from .plots import iqr_svg

        iqr_svg(out / "iqr.svg", analysis.result.frames)
    cfg.dump(out / "run_config.json", "analyze")
    print(f"clip QV* = {analysis.result.qv_star_clip}")
    return EXIT_OK


def cmd_corpus(cfg: RunConfig) -> int:
    if not cfg.manifest:
        raise UsageError("corpus needs --manifest")
    report = run_corpus(cfg.manifest, cfg, category=cfg.category)
    out = Path(cfg.out_dir)
    write_report(report, out)
    if cfg.svg:
        from .plots import scatter_svg

        pts = [(q, m) for _, _, m, q in report.rows if m is not None]
        if pts:
            scatter_svg(out / "scatter.svg", *zip(*pts))
    cfg.dump(out / "run_config.json", "corpus")
    if report.defined:
        print(f"n = {report.n}, Pearson r = {report.pearson:.4f}, "
              f"Spearman rho = {report.spearman:.4f}")
    else:
        print(f"n = {report.n}, correlation undefined")
    if report.failures:
        print(f"{len(report.failures)} clip(s) failed; see failures.csv", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING)
        if ns.command is None:
            raise UsageError(parser.format_usage().strip())
        try:
            cfg = resolve_config(ns)
        except (ValueError, TypeError, OSError) as exc:
            raise UsageError(f"invalid configuration: {exc}") from exc
        if ns.command == "gaussian-model":
            return cmd_gaussian_model(cfg)
        if ns.command == "synth":
            return cmd_synth(cfg)
        if ns.command == "analyze":
            return cmd_analyze(cfg)
        return cmd_corpus(cfg)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        log.debug("traceback", exc_info=True)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

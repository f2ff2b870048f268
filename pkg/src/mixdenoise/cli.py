"""Command-line interface: corruption, filters, lookup tables, denoising,
and experiment sweeps."""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import vst
from .denoisers import DenoiserKind, DenoiserSpec
from .experiments import ExperimentConfig, TableFormat, emit_table, run_experiment
from .filters import AcwmfParams, acwmf, amf
from .fixtures import FIXTURE_NAMES, get_fixture
from .image import Image
from .imageio import FileFormat, ImageFileMeta, read_image, write_image
from .noise import ImpulseType, NoiseSpec, corrupt, rescale_to_peak
from .operators import RegularizerConfig
from .solver import SolverParams, denoise_mixed


def _load(path_or_fixture: str, peak: float | None = None) -> Image:
    if path_or_fixture in FIXTURE_NAMES:
        img = get_fixture(path_or_fixture)
    else:
        img, _ = read_image(path_or_fixture)
    if peak is not None:
        img = rescale_to_peak(img, peak)
    return img


def _save(img: Image, path: str, depth16: bool = False) -> None:
    if path.lower().endswith(".png"):
        fmt = FileFormat.PNG16 if depth16 else FileFormat.PNG8
    else:
        fmt = FileFormat.PGM16 if depth16 else FileFormat.PGM8
    write_image(img, path, ImageFileMeta(fmt, 65535 if depth16 else 255))


def _impulse_type(name: str) -> ImpulseType:
    return ImpulseType(name)


def _cmd_corrupt(args) -> int:
    img = _load(args.input, args.peak)
    spec = NoiseSpec(img.peak, args.sigma, args.ratio,
                     _impulse_type(args.type), args.seed)
    noisy, mask = corrupt(img, spec)
    # clamp only for export; the pipeline itself consumes unclamped values
    _save(Image(np.clip(noisy.data, 0, noisy.peak), noisy.peak),
          args.out, args.depth16)
    if args.mask_out:
        _save(Image(mask.bits.astype(float), 1.0), args.mask_out, False)
    return 0


def _cmd_filter(args, which: str) -> int:
    img = _load(args.input, args.peak)
    if which == "amf":
        out = amf(img.data)
    else:
        out = acwmf(img.data, AcwmfParams.for_peak(img.peak))
    _save(Image(np.clip(out, 0, img.peak), img.peak), args.out, args.depth16)
    return 0


def _cmd_lut(args) -> int:
    lut = vst.build_exact_unbiased_lut(args.sigma, args.x_max, args.grid_size)
    lut.save(args.out)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(lut.to_csv())
    print(f"wrote lookup table ({len(lut.grid)} entries, "
          f"range [{lut.range[0]:.4f}, {lut.range[1]:.4f}]) to {args.out}")
    return 0


def _cmd_denoise(args) -> int:
    img = _load(args.input, args.peak)
    impulse_type = _impulse_type(args.type)
    denoiser = None
    if args.lambda2 > 0:
        denoiser = DenoiserSpec(DenoiserKind(args.denoiser), args.strength)
    reg = RegularizerConfig(args.lambda1, args.lambda2, denoiser, rho=args.rho)
    outer = args.outer
    if outer is None:
        outer = 1 if impulse_type is ImpulseType.SALT_PEPPER else 10
    params = SolverParams(reg, mu=args.mu, outer_iters=outer,
                          inner_iters=args.inner,
                          log_convergence=args.log_trace)
    out, state = denoise_mixed(img, args.sigma, params, impulse_type,
                               lut_cache_dir=args.lut_cache)
    _save(Image(np.clip(out.data, 0, out.peak), out.peak),
          args.out, args.depth16)
    if args.log_trace:
        for i, val in enumerate(state.objective_trace):
            print(f"outer {i + 1}: objective {val:.6f}")
    return 0


def _cmd_experiment(args) -> int:
    with open(args.config) as fh:
        config = ExperimentConfig.from_json(fh.read())
    if args.seed is not None:
        config = ExperimentConfig.from_dict(
            {**config.to_dict(), "seed": args.seed})
    table = run_experiment(config)
    csv_bytes = emit_table(table, TableFormat.CSV)
    with open(args.out, "wb") as fh:
        fh.write(csv_bytes)
    if args.markdown:
        with open(args.markdown, "wb") as fh:
            fh.write(emit_table(table, TableFormat.MARKDOWN))
    failed = sum(1 for r in table.rows if r.psnr_db is None)
    print(f"{len(table.rows)} cells ({failed} failed) -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixdenoise",
        description="Mixed impulse + Poisson + Gaussian image denoising")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p, needs_sigma=True):
        p.add_argument("--input", required=True,
                       help=f"image path or fixture name {FIXTURE_NAMES}")
        p.add_argument("--out", required=True)
        p.add_argument("--peak", type=float, default=None,
                       help="rescale the input to this peak first")
        p.add_argument("--depth16", action="store_true",
                       help="write 16-bit output")
        if needs_sigma:
            p.add_argument("--sigma", type=float, required=True,
                           help="Gaussian noise std in intensity units")

    p = sub.add_parser("corrupt", help="synthesize mixed noise")
    add_io(p)
    p.add_argument("--ratio", type=float, default=0.5)
    p.add_argument("--type", choices=[t.value for t in ImpulseType],
                   default="salt-pepper")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mask-out", default=None,
                   help="write the impulse-free mask image here")
    p.set_defaults(func=_cmd_corrupt)

    for name, help_text in (("amf", "adaptive median filter"),
                            ("acwmf", "adaptive center-weighted median filter")):
        p = sub.add_parser(name, help=help_text)
        add_io(p, needs_sigma=False)
        p.set_defaults(func=lambda a, which=name: _cmd_filter(a, which))

    p = sub.add_parser("lut", help="build an exact unbiased inverse table")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--x-max", type=float, required=True)
    p.add_argument("--grid-size", type=int, default=vst.DEFAULT_GRID_SIZE)
    p.add_argument("--out", required=True)
    p.add_argument("--csv", default=None, help="also export CSV here")
    p.set_defaults(func=_cmd_lut)

    p = sub.add_parser("denoise", help="run the full denoising pipeline")
    add_io(p)
    p.add_argument("--type", choices=[t.value for t in ImpulseType],
                   default="salt-pepper")
    p.add_argument("--lambda1", type=float, default=1.2)
    p.add_argument("--lambda2", type=float, default=0.0)
    p.add_argument("--denoiser", choices=[k.value for k in DenoiserKind],
                   default="patch-transform")
    p.add_argument("--strength", type=float, default=1.0)
    p.add_argument("--rho", type=float, default=5.0)
    p.add_argument("--mu", type=int, default=None)
    p.add_argument("--outer", type=int, default=None)
    p.add_argument("--inner", type=int, default=300)
    p.add_argument("--lut-cache", default=None)
    p.add_argument("--log-trace", action="store_true")
    p.set_defaults(func=_cmd_denoise)

    p = sub.add_parser("experiment", help="run a configured sweep")
    p.add_argument("--config", required=True, help="JSON config (schema v1)")
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--markdown", default=None)
    p.add_argument("--seed", type=int, default=None,
                   help="override the config's master seed")
    p.set_defaults(func=_cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

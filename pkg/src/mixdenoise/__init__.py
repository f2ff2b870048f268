"""Grayscale denoising of mixed impulse + Poisson + Gaussian noise.

Pipeline: variance stabilization, alternating l0 outlier pursuit with a
primal-dual inner solver (TV and optional plug-in denoiser priors), and
the exact unbiased inverse transform.
"""
from .image import INFINITE_PSNR, Image, PixelMask, clamp_to_range, psnr
from .noise import ImpulseType, NoiseSpec, corrupt, rescale_to_peak
from .vst import (GatLut, build_exact_unbiased_lut, expected_forward,
                  gat_forward, gat_inverse_algebraic, igat_exact_unbiased,
                  load_or_build_lut)
from .filters import AcwmfParams, AmfParams, acwmf, amf, init_outlier_field
from .denoisers import DenoiserKind, DenoiserSpec, denoise
from .operators import RegularizerConfig
from .solver import SolverParams, SolverState, denoise_mixed
from .experiments import (ExperimentConfig, ExperimentKind, Method,
                          ResultTable, TableFormat, emit_table,
                          run_experiment)

__version__ = "0.1.0"

__all__ = [
    "INFINITE_PSNR", "Image", "PixelMask", "clamp_to_range", "psnr",
    "ImpulseType", "NoiseSpec", "corrupt", "rescale_to_peak",
    "GatLut", "build_exact_unbiased_lut", "expected_forward", "gat_forward",
    "gat_inverse_algebraic", "igat_exact_unbiased", "load_or_build_lut",
    "AcwmfParams", "AmfParams", "acwmf", "amf", "init_outlier_field",
    "DenoiserKind", "DenoiserSpec", "denoise",
    "RegularizerConfig", "SolverParams", "SolverState", "denoise_mixed",
    "ExperimentConfig", "ExperimentKind", "Method", "ResultTable",
    "TableFormat", "emit_table", "run_experiment",
]

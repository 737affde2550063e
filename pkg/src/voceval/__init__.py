"""Vocoder evaluation toolkit: mel features, a Griffin-Lim baseline,
objective quality metrics (SSIM, LS-MSE, PSNR, FAD), real-time-factor
benchmarking, dataset manifests, and a listening-test service."""

from .kernels import backend as kernel_backend

__version__ = "0.1.0"

__all__ = ["__version__", "kernel_backend"]

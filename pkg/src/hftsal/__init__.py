"""Saliency detection by smoothing the amplitude spectrum of a hypercomplex image."""
from __future__ import annotations

__version__ = "0.1.0"

from .evaluation import CalibrationOptions, GroundTruth, calibrate, dsc_curve, roc_auc
from .models import (MODEL_NAMES, ModelConfig, SaliencyMap, gs_saliency, hft_saliency,
                     noise_amplitude_saliency, pft_saliency, pqft_saliency, run_model, sr_saliency)
from .quaternion import LUMINANCE_AXIS, PureUnitAxis, Quaternion, QuaternionImage
from .spectral import hft_forward, hft_inverse

__all__ = [
    "CalibrationOptions", "GroundTruth", "LUMINANCE_AXIS", "MODEL_NAMES", "ModelConfig",
    "PureUnitAxis", "Quaternion", "QuaternionImage", "SaliencyMap", "calibrate", "dsc_curve",
    "gs_saliency", "hft_forward", "hft_inverse", "hft_saliency", "noise_amplitude_saliency",
    "pft_saliency", "pqft_saliency", "roc_auc", "run_model", "sr_saliency",
]

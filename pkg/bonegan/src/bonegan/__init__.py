"""Adversarial trainer for plane-wave bone-enhancement targets."""

from .container import ContainerFormatError, read_container, read_records
from .data import BoneDataset, fit_window, normalize_rf
from .evaluate import MetricConfig, evaluate, record_metrics
from .models import (DiscriminatorConfig, GeneratorConfig,
                     build_discriminator, build_generator, patch_grid_shape)
from .train import (EarlyStopper, StepLosses, TrainConfig, fit,
                    make_optimizers, train_step, validation_loss)

__all__ = [
    "BoneDataset",
    "ContainerFormatError",
    "DiscriminatorConfig",
    "EarlyStopper",
    "GeneratorConfig",
    "MetricConfig",
    "StepLosses",
    "TrainConfig",
    "build_discriminator",
    "build_generator",
    "evaluate",
    "fit",
    "fit_window",
    "make_optimizers",
    "normalize_rf",
    "patch_grid_shape",
    "read_container",
    "read_records",
    "record_metrics",
    "train_step",
    "validation_loss",
]

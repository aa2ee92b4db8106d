"""Generator and patch discriminator for the enhancement GAN."""

import math
from dataclasses import dataclass

import torch
import torch.nn.functional as F
from torch import nn

DISCRIMINATOR_SCHEDULE = (16, 64, 128, 256, 512)


@dataclass(frozen=True)
class GeneratorConfig:
    """Encoder/decoder shape contract.

    input_shape is (depth_samples, lateral, channels); the network is
    fully convolutional, so the spatial sizes document the intended
    window while channels is structural.  Three levels with skip
    connections are fixed; arbitrary sizes are handled by padding.
    """

    input_shape: tuple = (128, 64, 1)
    encoder_levels: int = 3
    base_filters: int = 16

    def __post_init__(self):
        if len(self.input_shape) != 3:
            raise ValueError("input_shape must be (depth, lateral, channels)")
        depth, lateral, channels = self.input_shape
        if depth < 1 or lateral < 1:
            raise ValueError("input_shape spatial sizes must be positive")
        if channels != 1:
            raise ValueError(f"generator takes 1 channel, got {channels}")
        if self.encoder_levels != 3:
            raise ValueError("the architecture is fixed at 3 encoder levels")
        if self.base_filters < 1:
            raise ValueError("base_filters must be positive")


@dataclass(frozen=True)
class DiscriminatorConfig:
    """Patch head contract: the published filter schedule, 4x4 stride 2."""

    filter_schedule: tuple = DISCRIMINATOR_SCHEDULE
    kernel: int = 4
    stride: int = 2
    conditioning_channels: int = 1

    def __post_init__(self):
        if tuple(self.filter_schedule) != DISCRIMINATOR_SCHEDULE:
            raise ValueError(
                f"filter schedule is fixed to {DISCRIMINATOR_SCHEDULE}")
        if self.kernel != 4 or self.stride != 2:
            raise ValueError("patch layers are fixed at 4x4 kernels, stride 2")
        if self.conditioning_channels != 1:
            raise ValueError("conditioning is a single bone-map channel")


def _double_conv(cin: int, cout: int) -> nn.Sequential:
    # plain convolutions, no normalization in the generator
    return nn.Sequential(
        nn.Conv2d(cin, cout, 3, padding=1), nn.ReLU(inplace=True),
        nn.Conv2d(cout, cout, 3, padding=1), nn.ReLU(inplace=True))


class _UNetGenerator(nn.Module):
    """3-level U-Net with skip connections and a sigmoid output head."""

    def __init__(self, base: int):
        super().__init__()
        self.enc1 = _double_conv(1, base)
        self.enc2 = _double_conv(base, 2 * base)
        self.enc3 = _double_conv(2 * base, 4 * base)
        self.bottleneck = _double_conv(4 * base, 8 * base)
        self.pool = nn.MaxPool2d(2)
        self.up3 = nn.ConvTranspose2d(8 * base, 4 * base, 2, stride=2)
        self.dec3 = _double_conv(8 * base, 4 * base)
        self.up2 = nn.ConvTranspose2d(4 * base, 2 * base, 2, stride=2)
        self.dec2 = _double_conv(4 * base, 2 * base)
        self.up1 = nn.ConvTranspose2d(2 * base, base, 2, stride=2)
        self.dec1 = _double_conv(2 * base, base)
        self.head = nn.Conv2d(base, 1, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.ndim != 4 or x.shape[1] != 1:
            raise ValueError("generator input must be (N, 1, H, W)")
        h, w = x.shape[2], x.shape[3]
        # three poolings need multiples of 8; pad bottom/right, crop back
        ph = (-h) % 8
        pw = (-w) % 8
        if ph or pw:
            x = F.pad(x, (0, pw, 0, ph))
        e1 = self.enc1(x)
        e2 = self.enc2(self.pool(e1))
        e3 = self.enc3(self.pool(e2))
        b = self.bottleneck(self.pool(e3))
        d3 = self.dec3(torch.cat([self.up3(b), e3], dim=1))
        d2 = self.dec2(torch.cat([self.up2(d3), e2], dim=1))
        d1 = self.dec1(torch.cat([self.up1(d2), e1], dim=1))
        out = torch.sigmoid(self.head(d1))
        return out[:, :, :h, :w]


def build_generator(config: GeneratorConfig | None = None) -> nn.Module:
    """Construct the U-Net generator for a validated config."""
    if config is None:
        config = GeneratorConfig()
    return _UNetGenerator(config.base_filters)


class _HalvingConv(nn.Module):
    """4x4 stride-2 conv that first pads odd sizes, so out = ceil(in / 2)."""

    def __init__(self, cin: int, cout: int, normalize: bool):
        super().__init__()
        self.conv = nn.Conv2d(cin, cout, 4, stride=2, padding=1)
        self.act = nn.LeakyReLU(0.2, inplace=True) if normalize else None
        self.norm = nn.BatchNorm2d(cout) if normalize else None

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        ph = x.shape[2] % 2
        pw = x.shape[3] % 2
        if ph or pw:
            x = F.pad(x, (0, pw, 0, ph))
        x = self.conv(x)
        if self.act is not None:
            x = self.norm(self.act(x))
        return x


class _PatchDiscriminator(nn.Module):
    """Stack of halving convs over a 2-channel (image, bone map) input."""

    def __init__(self, config: DiscriminatorConfig):
        super().__init__()
        cin = 1 + config.conditioning_channels
        stages = []
        for cout in config.filter_schedule:
            stages.append(_HalvingConv(cin, cout, normalize=True))
            cin = cout
        # single-filter sigmoid patch head, still 4x4 stride 2
        stages.append(_HalvingConv(cin, 1, normalize=False))
        self.stages = nn.Sequential(*stages)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.ndim != 4 or x.shape[1] != 2:
            got = "x".join(str(int(s)) for s in x.shape)
            raise ValueError(
                f"discriminator expects (N, 2, H, W) input, got {got}")
        return torch.sigmoid(self.stages(x))


def build_discriminator(config: DiscriminatorConfig | None = None) -> nn.Module:
    """Construct the BPM-conditioned patch discriminator."""
    if config is None:
        config = DiscriminatorConfig()
    return _PatchDiscriminator(config)


def patch_grid_shape(input_hw, config: DiscriminatorConfig | None = None) -> tuple:
    """Analytic patch-grid size: ceil-divide by the stride once per layer."""
    if config is None:
        config = DiscriminatorConfig()
    h, w = int(input_hw[0]), int(input_hw[1])
    for _ in range(len(config.filter_schedule) + 1):
        h = math.ceil(h / config.stride)
        w = math.ceil(w / config.stride)
    return h, w

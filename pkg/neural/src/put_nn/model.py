"""Generator, discriminator, and patch projection heads.

The generator is the Johnson-style resnet translator: three convolution
layers (the first optionally with horizontally-circular padding for
panoramas), nine residual blocks, two fractionally-strided (stride 1/2)
convolutions back up, and a final 7x7 convolution to RGB. Spatial dims are
preserved for any H,W divisible by 4.
"""

from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F


class EquirectConv2d(nn.Module):
    """Conv2d whose receptive field wraps across the x=0/x=W seam.

    Horizontal padding is circular, vertical padding is reflected, so a
    circular column shift of the input circularly shifts the output.
    """

    def __init__(self, in_ch: int, out_ch: int, kernel_size: int, stride: int = 1):
        super().__init__()
        self.pad = kernel_size // 2
        self.conv = nn.Conv2d(in_ch, out_ch, kernel_size, stride=stride, padding=0)

    def forward(self, x):
        x = F.pad(x, (self.pad, self.pad, 0, 0), mode="circular")
        x = F.pad(x, (0, 0, self.pad, self.pad), mode="reflect")
        return self.conv(x)


class ResnetBlock(nn.Module):
    def __init__(self, ch: int):
        super().__init__()
        self.block = nn.Sequential(
            nn.ReflectionPad2d(1),
            nn.Conv2d(ch, ch, 3),
            nn.InstanceNorm2d(ch),
            nn.ReLU(inplace=True),
            nn.ReflectionPad2d(1),
            nn.Conv2d(ch, ch, 3),
            nn.InstanceNorm2d(ch),
        )

    def forward(self, x):
        return x + self.block(x)


class ResnetGenerator(nn.Module):
    """Image translator g. forward(x) decodes; encode(x, layers) taps the
    shared encoder features used by the contrastive losses."""

    N_BLOCKS = 9

    def __init__(self, in_channels: int = 3, ngf: int = 64, equirect: bool = True):
        super().__init__()
        self.in_channels = in_channels
        self.ngf = ngf
        self.equirect = equirect

        if equirect:
            first: nn.Module = EquirectConv2d(in_channels, ngf, 7)
        else:
            first = nn.Sequential(nn.ReflectionPad2d(3), nn.Conv2d(in_channels, ngf, 7))
        self.first = first
        self.enc1 = nn.Sequential(nn.InstanceNorm2d(ngf), nn.ReLU(inplace=True))
        self.down1 = nn.Sequential(
            nn.Conv2d(ngf, ngf * 2, 3, stride=2, padding=1),
            nn.InstanceNorm2d(ngf * 2),
            nn.ReLU(inplace=True),
        )
        self.down2 = nn.Sequential(
            nn.Conv2d(ngf * 2, ngf * 4, 3, stride=2, padding=1),
            nn.InstanceNorm2d(ngf * 4),
            nn.ReLU(inplace=True),
        )
        self.blocks = nn.ModuleList([ResnetBlock(ngf * 4) for _ in range(self.N_BLOCKS)])
        self.up1 = nn.Sequential(
            nn.ConvTranspose2d(ngf * 4, ngf * 2, 3, stride=2, padding=1, output_padding=1),
            nn.InstanceNorm2d(ngf * 2),
            nn.ReLU(inplace=True),
        )
        self.up2 = nn.Sequential(
            nn.ConvTranspose2d(ngf * 2, ngf, 3, stride=2, padding=1, output_padding=1),
            nn.InstanceNorm2d(ngf),
            nn.ReLU(inplace=True),
        )
        self.final = nn.Sequential(nn.ReflectionPad2d(3), nn.Conv2d(ngf, 3, 7), nn.Tanh())

    def first_preactivation(self, x):
        """Output of the first convolution before norm/nonlinearity."""
        return self.first(x)

    def _encoder_stages(self, x):
        # Encoder taps 0..4: raw input, first conv block, both downsampling
        # blocks, and the middle of the residual stack.
        feats = [x]
        h = self.enc1(self.first(x))
        feats.append(h)
        h = self.down1(h)
        feats.append(h)
        h = self.down2(h)
        feats.append(h)
        for i, block in enumerate(self.blocks):
            h = block(h)
            if i == 3:
                feats.append(h)
        return feats, h

    def encode(self, x, layers):
        feats, _ = self._encoder_stages(x)
        return [feats[i] for i in layers]

    def forward(self, x):
        _, h = self._encoder_stages(x)
        h = self.up1(h)
        h = self.up2(h)
        return self.final(h)


class PatchDiscriminator(nn.Module):
    """70x70 PatchGAN over RGB images; outputs a logit map."""

    def __init__(self, in_channels: int = 3, ndf: int = 64):
        super().__init__()
        self.net = nn.Sequential(
            nn.Conv2d(in_channels, ndf, 4, stride=2, padding=1),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(ndf, ndf * 2, 4, stride=2, padding=1),
            nn.InstanceNorm2d(ndf * 2),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(ndf * 2, ndf * 4, 4, stride=2, padding=1),
            nn.InstanceNorm2d(ndf * 4),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(ndf * 4, ndf * 8, 4, stride=1, padding=1),
            nn.InstanceNorm2d(ndf * 8),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(ndf * 8, 1, 4, stride=1, padding=1),
        )

    def forward(self, x):
        return self.net(x)


class PatchProjector(nn.Module):
    """Per-layer two-layer MLP heads projecting sampled patch features.

    Heads are materialized lazily on the first forward (feature dims depend
    on the tapped layer), matching the contrastive-translation convention.
    """

    def __init__(self, out_dim: int = 256):
        super().__init__()
        self.out_dim = out_dim
        self.heads = nn.ModuleDict()

    def _head(self, key: str, in_dim: int, device, dtype):
        if key not in self.heads:
            head = nn.Sequential(
                nn.Linear(in_dim, self.out_dim),
                nn.ReLU(inplace=True),
                nn.Linear(self.out_dim, self.out_dim),
            )
            self.heads[key] = head.to(device=device, dtype=dtype)
        return self.heads[key]

    def forward(self, feats: list[torch.Tensor], n_locations: int, sample_ids=None):
        """Sample n_locations per layer and project.

        Returns (projected list of (B, N, out_dim), ids list). Pass sample_ids
        to reuse the location choice of a previous call (positive pairs must
        come from the same spatial locations).
        """
        out = []
        ids_out = []
        for li, feat in enumerate(feats):
            b, c, h, w = feat.shape
            flat = feat.permute(0, 2, 3, 1).reshape(b, h * w, c)
            if sample_ids is None:
                n = min(n_locations, h * w)
                ids = torch.randperm(h * w, device=feat.device)[:n]
            else:
                ids = sample_ids[li]
            patches = flat[:, ids]
            proj = self._head(f"l{li}", c, feat.device, feat.dtype)(patches)
            proj = F.normalize(proj, dim=-1, eps=1e-10)
            out.append(proj)
            ids_out.append(ids)
        return out, ids_out

"""The affinity network.

A small stem (7x7 conv, instance norm, ReLU, three 8-channel residual
blocks) produces an intermediate 8-channel map; a multi-scale stack of
five side-output blocks with widths (64, 128, 256, 512, 512), each
projected to 8 channels and bilinearly upsampled to full resolution,
feeds a 40-to-8 fusion conv; a sigmoid yields the affinity map.

Four stride-2 poolings require the spatial size to be a multiple of
16; arbitrary inputs are reflect-padded up and the output cropped back.
"""

from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F

SIDE_WIDTHS = (64, 128, 256, 512, 512)
# conv count per side block, per the growing receptive-field design
SIDE_DEPTHS = (2, 2, 3, 3, 3)


class ResBlock(nn.Module):
    def __init__(self, channels: int = 8):
        super().__init__()
        self.conv1 = nn.Conv2d(channels, channels, 3, padding=1)
        self.norm1 = nn.InstanceNorm2d(channels)
        self.conv2 = nn.Conv2d(channels, channels, 3, padding=1)
        self.norm2 = nn.InstanceNorm2d(channels)

    def forward(self, x):
        out = F.relu(self.norm1(self.conv1(x)))
        out = self.norm2(self.conv2(out))
        return F.relu(x + out)


def _side_block(in_ch: int, out_ch: int, depth: int) -> nn.Sequential:
    layers = [nn.Conv2d(in_ch, out_ch, 3, padding=1), nn.ReLU(inplace=True)]
    for _ in range(depth - 1):
        layers += [nn.Conv2d(out_ch, out_ch, 3, padding=1), nn.ReLU(inplace=True)]
    return nn.Sequential(*layers)


class DalModel(nn.Module):
    def __init__(self):
        super().__init__()
        self.stem = nn.Sequential(
            nn.Conv2d(3, 8, 7, padding=3),
            nn.InstanceNorm2d(8),
            nn.ReLU(inplace=True),
            ResBlock(8),
            ResBlock(8),
            ResBlock(8),
        )
        sides = []
        projections = []
        in_ch = 8
        for width, depth in zip(SIDE_WIDTHS, SIDE_DEPTHS):
            sides.append(_side_block(in_ch, width, depth))
            projections.append(nn.Conv2d(width, 8, 1))
            in_ch = width
        self.sides = nn.ModuleList(sides)
        self.projections = nn.ModuleList(projections)
        self.pool = nn.MaxPool2d(2, stride=2)
        self.fusion = nn.Conv2d(40, 8, 1)

    def forward_logits(self, x: torch.Tensor) -> torch.Tensor:
        """(B, 3, H, W) in [0, 1] -> (B, 8, H, W) pre-sigmoid activations."""
        _, _, h, w = x.shape
        pad_h = (16 - h % 16) % 16
        pad_w = (16 - w % 16) % 16
        if pad_h or pad_w:
            x = F.pad(x, (0, pad_w, 0, pad_h), mode="reflect")
        size = x.shape[2:]

        feat = self.stem(x)
        side_maps = []
        for i, (side, proj) in enumerate(zip(self.sides, self.projections)):
            if i > 0:
                feat = self.pool(feat)
            feat = side(feat)
            up = F.interpolate(
                proj(feat), size=size, mode="bilinear", align_corners=False
            )
            side_maps.append(up)
        fused = self.fusion(torch.cat(side_maps, dim=1))
        if pad_h or pad_w:
            fused = fused[:, :, :h, :w]
        return fused

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """(B, 3, H, W) in [0, 1] -> (B, 8, H, W) affinities in (0, 1)."""
        return torch.sigmoid(self.forward_logits(x))

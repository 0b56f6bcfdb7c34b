"""Layer inventory and resolution arithmetic of the network.

Encoder resolution rule (square input of side S):

- stem: 7×7 conv, stride 2, padding 3        → ceil(S / 2)
- pool: 3×3 max pool, stride 2, padding 1 on even input and 0 on odd input
                                             → floor(d / 2)
- stages 3-5: 3×3 conv, stride 2, padding 1  → ceil(d / 2)

For S = 218 this gives 109, 54, 27, 14, 7; for S = 64 it gives 32, 16, 8, 4, 2.
The pool padding deviates from the usual fixed padding 1 so that both chains hold.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Literal

from pydantic import BaseModel, ConfigDict

from mslesion.autodiff.ops import conv_output_size

if TYPE_CHECKING:
    from mslesion.models.config import ModelConfig

LayerKind = Literal["conv", "upconv", "bn"]


class LayerSpec(BaseModel):
    """One parameterised layer: a conv/upconv weight (+ optional bias) or a batch norm."""

    model_config = ConfigDict(frozen=True)

    kind: LayerKind
    name: str
    cin: int
    cout: int
    kernel: int = 1
    bias: bool = False


def pool_padding(size: int) -> int:
    return 1 if size % 2 == 0 else 0


def encoder_resolutions(size: int) -> list[int]:
    """Spatial side of the five encoder levels for an S×S input."""
    level1 = conv_output_size(size, 7, 2, 3)
    level2 = conv_output_size(level1, 3, 2, pool_padding(level1))
    levels = [level1, level2]
    for _ in range(3):
        levels.append(conv_output_size(levels[-1], 3, 2, 1))
    return levels


def encoder_prefix(config: ModelConfig, branch: str) -> str:
    return "shared" if config.share_weights else branch


def bottleneck_names(prefix: str, level: int, block: int) -> str:
    return f"{prefix}.level{level}.block{block}"


def _conv_bn(name: str, cin: int, cout: int, kernel: int) -> list[LayerSpec]:
    """Post-activation conv followed by its batch norm (encoder style)."""
    return [
        LayerSpec(kind="conv", name=f"{name}.conv", cin=cin, cout=cout, kernel=kernel),
        LayerSpec(kind="bn", name=f"{name}.bn", cin=cout, cout=cout),
    ]


def _bn_conv(name: str, cin: int, cout: int, kernel: int, kind: LayerKind = "conv",
             bias: bool = False) -> list[LayerSpec]:
    """Pre-activation batch norm followed by a conv (MMFF/MSFU style)."""
    return [
        LayerSpec(kind="bn", name=f"{name}.bn", cin=cin, cout=cin),
        LayerSpec(kind=kind, name=f"{name}.conv", cin=cin, cout=cout, kernel=kernel, bias=bias),
    ]


def encoder_specs(config: ModelConfig, prefix: str) -> list[LayerSpec]:
    widths = config.level_widths
    specs = _conv_bn(f"{prefix}.stem", config.branch_channels, widths[0], 7)
    cin = widths[0]
    for level in range(2, 6):
        cout = widths[level - 1]
        mid = max(1, cout // 4)
        for block in range(config.stage_depths[level - 2]):
            name = bottleneck_names(prefix, level, block)
            bcin = cin if block == 0 else cout
            stride = 2 if level > 2 and block == 0 else 1
            specs += _conv_bn(f"{name}.conv1", bcin, mid, 1)
            specs += _conv_bn(f"{name}.conv2", mid, mid, 3)
            specs += _conv_bn(f"{name}.conv3", mid, cout, 1)
            if bcin != cout or stride != 1:
                specs += _conv_bn(f"{name}.shortcut", bcin, cout, 1)
        cin = cout
    return specs


def layer_specs(config: ModelConfig) -> list[LayerSpec]:
    """Every parameterised layer in construction (and initialisation) order."""
    specs: list[LayerSpec] = []
    seen: set[str] = set()
    for branch in config.branches:
        prefix = encoder_prefix(config, branch)
        if prefix not in seen:
            seen.add(prefix)
            specs += encoder_specs(config, prefix)

    for level, width in enumerate(config.level_widths, start=1):
        half = width // 2
        for branch in config.branches:
            specs += _bn_conv(f"mmff{level}.{branch}.reduce", width, half, 1)
            specs += _bn_conv(f"mmff{level}.{branch}.adapt", half, half, 3)

    fused = config.fused_widths
    low = fused[-1]
    for level, out in zip(range(4, 0, -1), config.decoder_widths, strict=True):
        reduced = max(1, low // 2)
        specs += _bn_conv(f"msfu{level}.reduce", low, reduced, 1)
        specs += _bn_conv(f"msfu{level}.up", reduced, reduced, 2, kind="upconv")
        specs += _bn_conv(f"msfu{level}.fuse", reduced + fused[level - 1], out, 1)
        specs += _bn_conv(f"msfu{level}.adapt", out, out, 3)
        low = out

    specs += _bn_conv("head.up", low, low, 2, kind="upconv")
    specs += _bn_conv("head.out", low, 2, 3, bias=True)
    return specs

"""Named parameter store and Gaussian initialisation."""

from __future__ import annotations

import copy
from typing import TYPE_CHECKING

import numpy as np

from mslesion.autodiff.tensor import RunningStats, Tensor
from mslesion.exceptions import CheckpointError, InvalidModelConfigError
from mslesion.logging import get_logger
from mslesion.models.config import ModelConfig
from mslesion.network.layout import LayerSpec, layer_specs

if TYPE_CHECKING:
    from collections.abc import Iterator, Mapping

logger = get_logger(__name__)

_STATS_SEP = "#"


def init_std(fan_in: int, fan_out: int) -> float:
    """Standard deviation sqrt(2 / (a + b)) with a, b the in/out channel counts."""
    return float(np.sqrt(2.0 / (fan_in + fan_out)))


class ModelParams:
    """Trainable tensors and batch-norm running statistics, keyed by layer name.

    Conv weights live under ``<layer>.conv.w`` (bias ``<layer>.conv.b``), batch
    norm affine parameters under ``<layer>.bn.gamma`` / ``<layer>.bn.beta`` and
    running statistics under ``<layer>``.
    """

    def __init__(
        self,
        config: ModelConfig,
        tensors: dict[str, Tensor],
        stats: dict[str, RunningStats],
    ) -> None:
        self.config = config
        self.tensors = tensors
        self.stats = stats

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def __contains__(self, name: object) -> bool:
        return name in self.tensors

    def __len__(self) -> int:
        return len(self.tensors)

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    def conv(self, layer: str) -> tuple[Tensor, Tensor | None]:
        """Weight and optional bias of the (up)conv of ``layer``."""
        return self.tensors[f"{layer}.conv.w"], self.tensors.get(f"{layer}.conv.b")

    def bn(self, layer: str) -> tuple[Tensor, Tensor, RunningStats]:
        return (
            self.tensors[f"{layer}.bn.gamma"],
            self.tensors[f"{layer}.bn.beta"],
            self.stats[layer],
        )

    def count(self) -> int:
        return sum(t.data.size for t in self.tensors.values())

    def copy(self) -> ModelParams:
        """Deep copy detached from any tape."""
        tensors = {
            name: Tensor(t.data.copy(), requires_grad=True, name=name)
            for name, t in self.tensors.items()
        }
        return ModelParams(self.config, tensors, copy.deepcopy(self.stats))

    def state_arrays(self) -> dict[str, np.ndarray]:
        """Flat array map suitable for a checkpoint."""
        arrays = {name: t.data for name, t in self.tensors.items()}
        for layer, st in self.stats.items():
            arrays[f"{layer}{_STATS_SEP}mean"] = st.mean
            arrays[f"{layer}{_STATS_SEP}var"] = st.var
        return arrays

    def load_arrays(self, arrays: Mapping[str, np.ndarray]) -> None:
        """Replace every tensor and statistic in place; names and shapes must match."""
        expected = self.state_arrays()
        missing = sorted(set(expected) - set(arrays))
        extra = sorted(set(arrays) - set(expected))
        if missing or extra:
            raise CheckpointError(
                f"checkpoint does not match model: missing {missing[:3]}, unexpected {extra[:3]}"
            )
        for name, ref in expected.items():
            if arrays[name].shape != ref.shape:
                raise CheckpointError(
                    f"checkpoint array {name} has shape {arrays[name].shape}, expected {ref.shape}"
                )
        for name, t in self.tensors.items():
            t.data = np.array(arrays[name], dtype=t.dtype)
        for layer, st in self.stats.items():
            st.mean = np.array(arrays[f"{layer}{_STATS_SEP}mean"], dtype=st.mean.dtype)
            st.var = np.array(arrays[f"{layer}{_STATS_SEP}var"], dtype=st.var.dtype)


def _init_layer(
    spec: LayerSpec,
    rng: np.random.Generator,
    dtype: type,
) -> tuple[dict[str, np.ndarray], RunningStats | None]:
    if spec.kind == "bn":
        return {
            f"{spec.name}.gamma": np.ones(spec.cin, dtype=dtype),
            f"{spec.name}.beta": np.zeros(spec.cin, dtype=dtype),
        }, RunningStats.fresh(spec.cin, dtype)

    std = init_std(spec.cin, spec.cout)
    k = spec.kernel
    shape = (spec.cout, spec.cin, k, k) if spec.kind == "conv" else (spec.cin, spec.cout, k, k)
    arrays = {f"{spec.name}.w": rng.normal(0.0, std, size=shape).astype(dtype)}
    if spec.bias:
        arrays[f"{spec.name}.b"] = np.zeros(spec.cout, dtype=dtype)
    return arrays, None


def build_model(config: ModelConfig, dtype: type = np.float32) -> ModelParams:
    """Randomly initialise every layer of the network from ``config.seed``.

    Layers are drawn in :func:`layer_specs` order from one PCG64 stream, so
    equal configs give bit-identical parameters.
    """
    if not isinstance(config, ModelConfig):
        raise InvalidModelConfigError(f"expected a ModelConfig, got {type(config).__name__}")
    rng = np.random.Generator(np.random.PCG64(config.seed))
    tensors: dict[str, Tensor] = {}
    stats: dict[str, RunningStats] = {}
    for spec in layer_specs(config):
        arrays, running = _init_layer(spec, rng, dtype)
        for name, data in arrays.items():
            if name in tensors:
                raise InvalidModelConfigError(f"duplicate parameter name {name}")
            tensors[name] = Tensor(data, requires_grad=True, name=name)
        if running is not None:
            stats[spec.name.removesuffix(".bn")] = running

    params = ModelParams(config, tensors, stats)
    logger.debug(
        "Built model: %d branches, %d tensors, %d weights",
        len(config.branches), len(tensors), params.count(),
    )
    return params

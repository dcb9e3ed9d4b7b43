"""Network architecture descriptions.

A network is an ordered list of layers drawn from a small fixed set
(conv / relu / maxpool / flatten / dense / residual block), plus an input
shape and a class count. Specs serialize to a compact text descriptor, e.g.

    in:28x28x1;conv:16,3,1,0;relu;pool:2;conv:32,3,1,0;relu;pool:2;flatten;dense:10

which is what gets embedded in checkpoint files.
"""

from dataclasses import dataclass
from math import prod

import numpy as np

from ..errors import InvalidInputError


@dataclass(frozen=True)
class Conv2d:
    out_channels: int
    kernel: int
    stride: int = 1
    pad: int = 0


@dataclass(frozen=True)
class Relu:
    pass


@dataclass(frozen=True)
class MaxPool2d:
    kernel: int


@dataclass(frozen=True)
class Flatten:
    pass


@dataclass(frozen=True)
class Dense:
    out_features: int


@dataclass(frozen=True)
class ResidualBlock:
    """Two 3x3 stride-1 pad-1 convs with a skip: relu(x + conv2(relu(conv1(x))))."""

    channels: int


Layer = Conv2d | Relu | MaxPool2d | Flatten | Dense | ResidualBlock


@dataclass(frozen=True)
class NetworkSpec:
    input_shape: tuple[int, int, int]  # H, W, C
    layers: tuple[Layer, ...]
    classes: int

    def __post_init__(self):
        shapes = self.layer_shapes()
        if shapes[-1] != (self.classes,):
            raise InvalidInputError(
                f"final layer shape {shapes[-1]} does not produce {self.classes} classes"
            )

    def layer_shapes(self) -> list[tuple[int, ...]]:
        """Shape after each layer, starting with the input shape."""
        shape: tuple[int, ...] = self.input_shape
        shapes = [shape]
        for layer in self.layers:
            shape = _next_shape(shape, layer)
            shapes.append(shape)
        return shapes

    def param_count(self) -> int:
        return sum(prod(s) for _, s in param_layout(self))

    def descriptor(self) -> str:
        h, w, c = self.input_shape
        parts = [f"in:{h}x{w}x{c}"]
        for layer in self.layers:
            parts.append(_layer_token(layer))
        return ";".join(parts)


def _next_shape(shape: tuple[int, ...], layer: Layer) -> tuple[int, ...]:
    if isinstance(layer, Conv2d):
        if len(shape) != 3:
            raise InvalidInputError(f"conv needs HxWxC input, got shape {shape}")
        h, w, c = shape
        oh = (h + 2 * layer.pad - layer.kernel) // layer.stride + 1
        ow = (w + 2 * layer.pad - layer.kernel) // layer.stride + 1
        if oh < 1 or ow < 1:
            raise InvalidInputError(f"conv kernel {layer.kernel} too large for {shape}")
        return (oh, ow, layer.out_channels)
    if isinstance(layer, Relu):
        return shape
    if isinstance(layer, MaxPool2d):
        if len(shape) != 3:
            raise InvalidInputError(f"pool needs HxWxC input, got shape {shape}")
        h, w, c = shape
        oh, ow = h // layer.kernel, w // layer.kernel
        if oh < 1 or ow < 1:
            raise InvalidInputError(f"pool kernel {layer.kernel} too large for {shape}")
        return (oh, ow, c)
    if isinstance(layer, Flatten):
        return (prod(shape),)
    if isinstance(layer, Dense):
        if len(shape) != 1:
            raise InvalidInputError(f"dense needs flat input, got shape {shape}")
        return (layer.out_features,)
    if isinstance(layer, ResidualBlock):
        if len(shape) != 3 or shape[2] != layer.channels:
            raise InvalidInputError(
                f"residual block of {layer.channels} channels cannot follow shape {shape}"
            )
        return shape
    raise InvalidInputError(f"unknown layer {layer!r}")


def _layer_token(layer: Layer) -> str:
    if isinstance(layer, Conv2d):
        return f"conv:{layer.out_channels},{layer.kernel},{layer.stride},{layer.pad}"
    if isinstance(layer, Relu):
        return "relu"
    if isinstance(layer, MaxPool2d):
        return f"pool:{layer.kernel}"
    if isinstance(layer, Flatten):
        return "flatten"
    if isinstance(layer, Dense):
        return f"dense:{layer.out_features}"
    if isinstance(layer, ResidualBlock):
        return f"res:{layer.channels}"
    raise InvalidInputError(f"unknown layer {layer!r}")


def parse_descriptor(text: str) -> NetworkSpec:
    tokens = [t.strip() for t in text.strip().split(";") if t.strip()]
    if not tokens or not tokens[0].startswith("in:"):
        raise InvalidInputError(f"descriptor must start with in:HxWxC, got {text!r}")
    dims = tokens[0][3:].split("x")
    if len(dims) != 3:
        raise InvalidInputError(f"bad input shape token {tokens[0]!r}")
    input_shape = tuple(int(d) for d in dims)
    layers: list[Layer] = []
    for tok in tokens[1:]:
        name, _, args = tok.partition(":")
        try:
            if name == "conv":
                oc, k, s, p = (int(a) for a in args.split(","))
                layers.append(Conv2d(oc, k, s, p))
            elif name == "relu":
                layers.append(Relu())
            elif name == "pool":
                layers.append(MaxPool2d(int(args)))
            elif name == "flatten":
                layers.append(Flatten())
            elif name == "dense":
                layers.append(Dense(int(args)))
            elif name == "res":
                layers.append(ResidualBlock(int(args)))
            else:
                raise ValueError(name)
        except ValueError as exc:
            raise InvalidInputError(f"bad layer token {tok!r} in descriptor") from exc
    if not layers or not isinstance(layers[-1], Dense):
        raise InvalidInputError("descriptor must end with a dense layer")
    return NetworkSpec(input_shape, tuple(layers), layers[-1].out_features)


def param_layout(spec: NetworkSpec) -> list[tuple[str, tuple[int, ...]]]:
    """Flat parameter layout: ordered (name, shape) pairs.

    Order is fixed (layer by layer, weight before bias) so that flat vectors
    are interchangeable between runs of the same spec.
    """
    layout: list[tuple[str, tuple[int, ...]]] = []
    shape: tuple[int, ...] = spec.input_shape
    for i, layer in enumerate(spec.layers):
        if isinstance(layer, Conv2d):
            c_in = shape[2]
            layout.append((f"{i}.w", (layer.kernel, layer.kernel, c_in, layer.out_channels)))
            layout.append((f"{i}.b", (layer.out_channels,)))
        elif isinstance(layer, Dense):
            layout.append((f"{i}.w", (shape[0], layer.out_features)))
            layout.append((f"{i}.b", (layer.out_features,)))
        elif isinstance(layer, ResidualBlock):
            ch = layer.channels
            layout.append((f"{i}.w1", (3, 3, ch, ch)))
            layout.append((f"{i}.b1", (ch,)))
            layout.append((f"{i}.w2", (3, 3, ch, ch)))
            layout.append((f"{i}.b2", (ch,)))
        shape = _next_shape(shape, layer)
    return layout


def init_params(spec: NetworkSpec, seed: int) -> np.ndarray:
    """He-normal weights, zero biases, flat float32 vector.

    The second conv of each residual block is scaled down so blocks start
    close to identity, which keeps high learning rates stable without
    batch norm.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    chunks = []
    for name, shape in param_layout(spec):
        if name.endswith(".b") or name.endswith(".b1") or name.endswith(".b2"):
            chunks.append(np.zeros(prod(shape), dtype=np.float32))
            continue
        fan_in = prod(shape[:-1])
        std = np.sqrt(2.0 / fan_in)
        if name.endswith(".w2"):
            std *= 0.1
        w = rng.normal(0.0, std, size=prod(shape))
        chunks.append(w.astype(np.float32))
    return np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.float32)


def split_params(spec: NetworkSpec, flat: np.ndarray) -> dict[str, np.ndarray]:
    """View the flat vector as named per-layer arrays (no copies)."""
    views: dict[str, np.ndarray] = {}
    offset = 0
    for name, shape in param_layout(spec):
        size = prod(shape)
        views[name] = flat[offset : offset + size].reshape(shape)
        offset += size
    if offset != flat.size:
        raise InvalidInputError(
            f"parameter vector has {flat.size} entries, spec needs {offset}"
        )
    return views

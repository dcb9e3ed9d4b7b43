from .adam import AdamConfig, adam_step
from .gradcheck import finite_diff_check
from .model import (
    Model,
    forward,
    init_model,
    input_gradient,
    load_checkpoint,
    loss_and_param_gradients,
    save_checkpoint,
)
from .network import (
    Conv2d,
    Dense,
    Flatten,
    MaxPool2d,
    NetworkSpec,
    Relu,
    ResidualBlock,
    init_params,
    parse_descriptor,
    param_layout,
    split_params,
)

__all__ = [
    "AdamConfig",
    "adam_step",
    "finite_diff_check",
    "Model",
    "forward",
    "init_model",
    "input_gradient",
    "load_checkpoint",
    "loss_and_param_gradients",
    "save_checkpoint",
    "Conv2d",
    "Dense",
    "Flatten",
    "MaxPool2d",
    "NetworkSpec",
    "Relu",
    "ResidualBlock",
    "init_params",
    "parse_descriptor",
    "param_layout",
    "split_params",
    "victim_spec",
    "attributor_spec",
]


def victim_spec(input_shape=(28, 28, 1), classes=10) -> NetworkSpec:
    """Small CNN the attacks target: conv16-pool-conv32-pool-dense."""
    return NetworkSpec(
        input_shape,
        (
            Conv2d(16, 3),
            Relu(),
            MaxPool2d(2),
            Conv2d(32, 3),
            Relu(),
            MaxPool2d(2),
            Flatten(),
            Dense(classes),
        ),
        classes,
    )


def attributor_spec(input_shape=(28, 28, 1), classes=17) -> NetworkSpec:
    """Residual variant of the same backbone used to classify fingerprints."""
    return NetworkSpec(
        input_shape,
        (
            Conv2d(16, 3),
            Relu(),
            MaxPool2d(2),
            Conv2d(32, 3),
            Relu(),
            MaxPool2d(2),
            ResidualBlock(32),
            ResidualBlock(32),
            Flatten(),
            Dense(classes),
        ),
        classes,
    )

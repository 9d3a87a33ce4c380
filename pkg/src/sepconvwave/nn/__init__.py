from .layers import (
    BatchNorm,
    Conv,
    Dense,
    Layer,
    Parameter,
    Reshape,
    SeparableConv,
    Tanh,
    Upsample,
)
from .losses import euler_residual, euler_residual_grads, mse, mse_grad
from .model import Model, count_params
from .optim import Adam, lr_schedule

__all__ = [
    "Adam",
    "BatchNorm",
    "Conv",
    "Dense",
    "Layer",
    "Model",
    "Parameter",
    "Reshape",
    "SeparableConv",
    "Tanh",
    "Upsample",
    "count_params",
    "euler_residual",
    "euler_residual_grads",
    "lr_schedule",
    "mse",
    "mse_grad",
]

"""Trainable layers with explicit forward/backward passes.

Every layer consumes a batch-first float64 array and caches whatever its
backward pass needs.  Convolutions follow the channel-summed contract of
the reference operations in :mod:`sepconvwave.tensor_core`: one kernel
per output channel, applied to the sum over input channels, stride 1, no
padding.  The separable layer replaces each d-way kernel with a sequence
of small per-stage kernels (one per axis group) connected by axis moves,
so a filter costs the sum of its extents instead of their product.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

__all__ = [
    "Parameter",
    "Layer",
    "Dense",
    "Conv",
    "SeparableConv",
    "BatchNorm",
    "Tanh",
    "Reshape",
    "Upsample",
]


class Parameter:
    """A trainable tensor together with its accumulated gradient."""

    __slots__ = ("value", "grad")

    def __init__(self, value: np.ndarray):
        self.value = np.ascontiguousarray(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)

    @property
    def size(self) -> int:
        return self.value.size


class Layer:
    """Base layer: shape propagation, parameters, persistent state."""

    kind = "layer"

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def output_shape(self, in_shape: tuple[int, ...]) -> tuple[int, ...]:
        """Per-sample output shape for a per-sample input shape."""
        raise NotImplementedError

    def parameters(self) -> list[tuple[str, Parameter]]:
        return []

    def state(self) -> dict[str, np.ndarray]:
        """All persistent tensors (trainable or not) for checkpointing."""
        return {name: p.value for name, p in self.parameters()}

    def load_state(self, tensors: dict[str, np.ndarray]) -> None:
        own = {name: p for name, p in self.parameters()}
        for name, array in tensors.items():
            if name not in own:
                raise ValueError(f"unknown state tensor {name!r} for {self.kind}")
            if own[name].value.shape != array.shape:
                raise ValueError(
                    f"shape mismatch for {name!r}: {own[name].value.shape} vs {array.shape}"
                )
            own[name].value[...] = array


def _uniform_init(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    bound = np.sqrt(1.0 / max(fan_in, 1))
    return rng.uniform(-bound, bound, size=shape)


# batch-chunked im2col: window copies stay below this many float64s
_CHUNK_BUDGET = 8_000_000


def _batch_chunks(n_batch: int, per_sample_elements: int):
    step = max(1, _CHUNK_BUDGET // max(per_sample_elements, 1))
    for start in range(0, n_batch, step):
        yield start, min(start + step, n_batch)


def _conv_trailing(z: np.ndarray, kernel: np.ndarray, filters_in_z: bool) -> np.ndarray:
    """Valid correlation over the trailing axes, one kernel per filter.

    ``kernel`` is ``[n_f, *taps]``.  With ``filters_in_z`` the filter
    axis of ``z`` is axis 1 and each filter convolves its own slice (a
    short tap loop, kernels are small); otherwise one kernel per output
    filter runs over the shared input as a batched im2col matrix product.
    """
    taps = kernel.shape[1:]
    g = len(taps)
    out_sp = tuple(z.shape[z.ndim - g + i] - taps[i] + 1 for i in range(g))
    if any(n < 1 for n in out_sp):
        raise ValueError(f"kernel taps {taps} do not fit {z.shape[-g:]}")
    n_f = kernel.shape[0]
    if filters_in_z:
        out = np.zeros(z.shape[:-g] + out_sp)
        coef_shape = (1, n_f) + (1,) * (out.ndim - 2)
        for tap in np.ndindex(*taps):
            window = (Ellipsis,) + tuple(slice(t, t + n) for t, n in zip(tap, out_sp))
            out += kernel[(slice(None),) + tap].reshape(coef_shape) * z[window]
        return out
    flat_kernel = kernel.reshape(n_f, -1)
    out = np.empty((z.shape[0], n_f) + z.shape[1:-g] + out_sp)
    per_sample = int(np.prod(z.shape[1:-g] + out_sp)) * flat_kernel.shape[1]
    for a, b in _batch_chunks(z.shape[0], per_sample):
        win = sliding_window_view(z[a:b], taps, axis=tuple(range(z.ndim - g, z.ndim)))
        cols = np.ascontiguousarray(win).reshape(-1, flat_kernel.shape[1])
        block = cols @ flat_kernel.T  # [rows, n_f]
        block = block.reshape((b - a,) + z.shape[1:-g] + out_sp + (n_f,))
        out[a:b] = np.moveaxis(block, -1, 1)
    return out


def _conv_trailing_input_grad(grad: np.ndarray, kernel: np.ndarray, sum_filters: bool) -> np.ndarray:
    """Gradient of :func:`_conv_trailing` with respect to its input.

    Full correlation of the zero-padded output gradient with the
    tap-reversed kernel; with ``sum_filters`` the filter axis (axis 1 of
    ``grad``) is contracted away (that stage broadcast its input over
    filters).
    """
    taps = kernel.shape[1:]
    g = len(taps)
    n_f = kernel.shape[0]
    out_sp = grad.shape[-g:]
    in_sp = tuple(w + k - 1 for w, k in zip(out_sp, taps))
    if sum_filters:
        gin = np.zeros((grad.shape[0],) + grad.shape[2:-g] + in_sp)
        gm = np.ascontiguousarray(np.moveaxis(grad, 1, -1))  # filters last for matmul
        for tap in np.ndindex(*taps):
            window = (Ellipsis,) + tuple(slice(t, t + n) for t, n in zip(tap, out_sp))
            gin[window] += gm @ kernel[(slice(None),) + tap]
        return gin
    gin = np.zeros(grad.shape[:-g] + in_sp)
    coef_shape = (1, n_f) + (1,) * (grad.ndim - 2)
    for tap in np.ndindex(*taps):
        window = (Ellipsis,) + tuple(slice(t, t + n) for t, n in zip(tap, out_sp))
        gin[window] += kernel[(slice(None),) + tap].reshape(coef_shape) * grad
    return gin


def _conv_trailing_kernel_grad(z: np.ndarray, grad: np.ndarray, taps, filters_in_z: bool) -> np.ndarray:
    """Gradient of :func:`_conv_trailing` with respect to the kernel."""
    taps = tuple(taps)
    g = len(taps)
    out_sp = grad.shape[-g:]
    if filters_in_z:
        gk = np.empty((grad.shape[1],) + taps)
        sum_axes = tuple(a for a in range(grad.ndim) if a != 1)
        for tap in np.ndindex(*taps):
            window = (Ellipsis,) + tuple(slice(t, t + n) for t, n in zip(tap, out_sp))
            gk[(slice(None),) + tap] = np.sum(z[window] * grad, axis=sum_axes)
        return gk
    n_f = grad.shape[1]
    n_taps = int(np.prod(taps))
    acc = np.zeros((n_f, n_taps))
    per_sample = int(np.prod(z.shape[1:-g] + out_sp)) * n_taps
    for a, b in _batch_chunks(z.shape[0], per_sample):
        win = sliding_window_view(z[a:b], taps, axis=tuple(range(z.ndim - g, z.ndim)))
        cols = np.ascontiguousarray(win).reshape(-1, n_taps)
        gmat = np.moveaxis(grad[a:b], 1, -1).reshape(-1, n_f)
        acc += gmat.T @ cols
    return acc.reshape((n_f,) + taps)


class Dense(Layer):
    """Affine map on the trailing feature axis: ``y = x W^T + b``."""

    kind = "dense"

    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator):
        self.n_in = n_in
        self.n_out = n_out
        self.weight = Parameter(_uniform_init(rng, (n_out, n_in), n_in))
        self.bias = Parameter(_uniform_init(rng, (n_out,), n_in))
        self._x = None

    def forward(self, x, training=False):
        if x.ndim != 2 or x.shape[1] != self.n_in:
            raise ValueError(f"dense expects [batch, {self.n_in}], got {x.shape}")
        self._x = x
        return x @ self.weight.value.T + self.bias.value

    def backward(self, grad):
        self.weight.grad += grad.T @ self._x
        self.bias.grad += grad.sum(axis=0)
        return grad @ self.weight.value

    def output_shape(self, in_shape):
        if in_shape != (self.n_in,):
            raise ValueError(f"dense expects ({self.n_in},), got {in_shape}")
        return (self.n_out,)

    def parameters(self):
        return [("weight", self.weight), ("bias", self.bias)]


class Conv(Layer):
    """Full N-dimensional convolution layer (N = 1, 2 or 3).

    Input ``[batch, c_in, *spatial]``, output ``[batch, n_f, *spatial -
    extents + 1]``.  Kernel tensor is ``[n_f, *extents]``; the tap loop
    runs over kernel entries, which stay small by construction.
    """

    kind = "conv"

    def __init__(self, c_in: int, n_f: int, extents, rng: np.random.Generator):
        self.c_in = c_in
        self.n_f = n_f
        self.extents = tuple(int(e) for e in extents)
        if any(e < 1 for e in self.extents):
            raise ValueError(f"kernel extents must be >= 1, got {self.extents}")
        fan_in = c_in * int(np.prod(self.extents))
        self.kernel = Parameter(_uniform_init(rng, (n_f,) + self.extents, fan_in))
        self.bias = Parameter(_uniform_init(rng, (n_f,), fan_in))
        self._xsum = None

    def _out_spatial(self, spatial):
        out = tuple(n - k + 1 for n, k in zip(spatial, self.extents))
        if len(spatial) != len(self.extents) or any(n < 1 for n in out):
            raise ValueError(f"kernel {self.extents} does not fit spatial shape {spatial}")
        return out

    def forward(self, x, training=False):
        if x.ndim != 2 + len(self.extents) or x.shape[1] != self.c_in:
            raise ValueError(
                f"conv expects [batch, {self.c_in}, *spatial({len(self.extents)})], got {x.shape}"
            )
        out_sp = self._out_spatial(x.shape[2:])
        xsum = x.sum(axis=1)
        self._xsum = xsum
        out = _conv_trailing(xsum, self.kernel.value, filters_in_z=False)
        return out + self.bias.value.reshape((1, self.n_f) + (1,) * len(out_sp))

    def backward(self, grad):
        nd = len(self.extents)
        self.bias.grad += grad.sum(axis=(0,) + tuple(range(2, 2 + nd)))
        self.kernel.grad += _conv_trailing_kernel_grad(
            self._xsum, grad, self.extents, filters_in_z=False
        )
        gxsum = _conv_trailing_input_grad(grad, self.kernel.value, sum_filters=True)
        return np.repeat(gxsum[:, None], self.c_in, axis=1)

    def output_shape(self, in_shape):
        if len(in_shape) != 1 + len(self.extents) or in_shape[0] != self.c_in:
            raise ValueError(f"conv expects ({self.c_in}, *spatial), got {in_shape}")
        return (self.n_f,) + self._out_spatial(in_shape[1:])

    def parameters(self):
        return [("kernel", self.kernel), ("bias", self.bias)]


class SeparableConv(Layer):
    """A-priori decomposed convolution: one small kernel per axis group.

    ``groups`` lists spatial-axis tuples in application order; the
    default decomposes fully into 1D stages applied from the last spatial
    axis to the first, mirroring the reshape/transpose pipeline (apply
    the spatial kernel along the trailing axis, transpose, apply the
    temporal kernel, combine, add bias).  A 2.5D layer over (t, x, y)
    uses ``groups=((1, 2), (0,))``: a 2D spatial stage then a 1D temporal
    stage.  The layer stores ``n_f * sum(group sizes)`` kernel weights
    plus ``n_f`` biases, never the full product.

    With ``stage_activation=True`` a tanh is inserted between stages,
    making the decomposition nonlinear; the default keeps stages linear
    so the layer matches the full convolution with the outer-product
    kernels exactly.
    """

    kind = "sepconv"

    def __init__(
        self,
        c_in: int,
        n_f: int,
        extents,
        rng: np.random.Generator,
        groups=None,
        stage_activation: bool = False,
    ):
        self.c_in = c_in
        self.n_f = n_f
        self.extents = tuple(int(e) for e in extents)
        nd = len(self.extents)
        if groups is None:
            groups = tuple((a,) for a in reversed(range(nd)))
        self.groups = tuple(tuple(g) for g in groups)
        covered = sorted(a for g in self.groups for a in g)
        if covered != list(range(nd)):
            raise ValueError(f"groups {self.groups} must partition axes 0..{nd - 1}")
        self.stage_activation = stage_activation
        fan_in = c_in * sum(self.extents)
        self.stage_kernels = [
            Parameter(_uniform_init(rng, (n_f,) + tuple(self.extents[a] for a in g), fan_in))
            for g in self.groups
        ]
        self.bias = Parameter(_uniform_init(rng, (n_f,), fan_in))
        self._cache = None

    def equivalent_kernels(self) -> np.ndarray:
        """Full kernels ``[n_f, *extents]`` as outer products of the stages."""
        full = np.ones((self.n_f,) + (1,) * len(self.extents))
        for g, ker in zip(self.groups, self.stage_kernels):
            shape = [self.n_f] + [1] * len(self.extents)
            for a in g:
                shape[1 + a] = self.extents[a]
            full = full * ker.value.reshape(shape)
        return full

    def set_stage_kernels(self, factors) -> None:
        """Overwrite stage kernels, e.g. with SVD factors of full kernels."""
        if len(factors) != len(self.stage_kernels):
            raise ValueError("one factor tensor per stage required")
        for p, f in zip(self.stage_kernels, factors):
            if p.value.shape != f.shape:
                raise ValueError(f"stage kernel shape {p.value.shape} vs {f.shape}")
            p.value[...] = f

    def forward(self, x, training=False):
        nd = len(self.extents)
        if x.ndim != 2 + nd or x.shape[1] != self.c_in:
            raise ValueError(
                f"sepconv expects [batch, {self.c_in}, *spatial({nd})], got {x.shape}"
            )
        self._out_spatial(x.shape[2:])
        # channels fold into the multi-index first; the filter axis is
        # created by the first stage and carried through the pipeline of
        # axis moves (the reshape/transpose steps) and 1D convolutions
        z = x.sum(axis=1)
        stage_inputs = []
        preacts = []
        for s, (group, ker) in enumerate(zip(self.groups, self.stage_kernels)):
            offset = 1 if s == 0 else 2
            z = np.moveaxis(z, [offset + a for a in group], range(z.ndim - len(group), z.ndim))
            stage_inputs.append(z)
            z = _conv_trailing(z, ker.value, filters_in_z=(s > 0))
            z = np.moveaxis(z, range(z.ndim - len(group), z.ndim), [2 + a for a in group])
            if self.stage_activation and s < len(self.groups) - 1:
                preacts.append(z)
                z = np.tanh(z)
            else:
                preacts.append(None)
        self._cache = (stage_inputs, preacts)
        return z + self.bias.value.reshape((1, self.n_f) + (1,) * nd)

    def backward(self, grad):
        stage_inputs, preacts = self._cache
        nd = len(self.extents)
        self.bias.grad += grad.sum(axis=(0,) + tuple(range(2, 2 + nd)))
        g = grad
        for s in reversed(range(len(self.groups))):
            if preacts[s] is not None:
                g = g * (1.0 - np.tanh(preacts[s]) ** 2)
            group = self.groups[s]
            ker = self.stage_kernels[s]
            g = np.moveaxis(g, [2 + a for a in group], range(g.ndim - len(group), g.ndim))
            ker.grad += _conv_trailing_kernel_grad(
                stage_inputs[s], g, ker.value.shape[1:], filters_in_z=(s > 0)
            )
            g = _conv_trailing_input_grad(g, ker.value, sum_filters=(s == 0))
            offset = 1 if s == 0 else 2
            g = np.moveaxis(g, range(g.ndim - len(group), g.ndim), [offset + a for a in group])
        return np.repeat(g[:, None], self.c_in, axis=1)

    def _out_spatial(self, spatial):
        if len(spatial) != len(self.extents):
            raise ValueError(f"expected {len(self.extents)} spatial axes, got {spatial}")
        out = tuple(n - k + 1 for n, k in zip(spatial, self.extents))
        if any(n < 1 for n in out):
            raise ValueError(f"kernel extents {self.extents} do not fit {spatial}")
        return out

    def output_shape(self, in_shape):
        if in_shape[0] != self.c_in:
            raise ValueError(f"sepconv expects {self.c_in} channels, got {in_shape[0]}")
        return (self.n_f,) + self._out_spatial(in_shape[1:])

    def parameters(self):
        out = [(f"stage{i}", p) for i, p in enumerate(self.stage_kernels)]
        out.append(("bias", self.bias))
        return out


class BatchNorm(Layer):
    """Per-channel batch normalization over batch and spatial axes."""

    kind = "batchnorm"

    def __init__(self, channels: int, eps: float = 1e-5, momentum: float = 0.1):
        self.channels = channels
        self.eps = eps
        self.momentum = momentum
        self.gamma = Parameter(np.ones(channels))
        self.beta = Parameter(np.zeros(channels))
        self.running_mean = np.zeros(channels)
        self.running_var = np.ones(channels)
        self._cache = None

    def _shape_for(self, ndim):
        return (1, self.channels) + (1,) * (ndim - 2)

    def forward(self, x, training=False):
        if x.ndim < 2 or x.shape[1] != self.channels:
            raise ValueError(f"batchnorm expects channel axis {self.channels}, got {x.shape}")
        axes = (0,) + tuple(range(2, x.ndim))
        bshape = self._shape_for(x.ndim)
        if training:
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            self.running_mean = (1 - self.momentum) * self.running_mean + self.momentum * mean
            self.running_var = (1 - self.momentum) * self.running_var + self.momentum * var
        else:
            mean = self.running_mean
            var = self.running_var
        inv_std = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mean.reshape(bshape)) * inv_std.reshape(bshape)
        self._cache = (xhat, inv_std, axes, training)
        return self.gamma.value.reshape(bshape) * xhat + self.beta.value.reshape(bshape)

    def backward(self, grad):
        xhat, inv_std, axes, training = self._cache
        bshape = self._shape_for(grad.ndim)
        self.gamma.grad += (grad * xhat).sum(axis=axes)
        self.beta.grad += grad.sum(axis=axes)
        gxhat = grad * self.gamma.value.reshape(bshape)
        if not training:
            return gxhat * inv_std.reshape(bshape)
        n = grad.size // self.channels
        a = gxhat.sum(axis=axes, keepdims=True)
        b = (gxhat * xhat).sum(axis=axes, keepdims=True)
        return inv_std.reshape(bshape) * (gxhat - a / n - xhat * b / n)

    def output_shape(self, in_shape):
        if in_shape[0] != self.channels:
            raise ValueError(f"batchnorm expects {self.channels} channels, got {in_shape}")
        return in_shape

    def parameters(self):
        return [("gamma", self.gamma), ("beta", self.beta)]

    def state(self):
        out = dict(super().state())
        out["running_mean"] = self.running_mean
        out["running_var"] = self.running_var
        return out

    def load_state(self, tensors):
        tensors = dict(tensors)
        for name in ("running_mean", "running_var"):
            if name in tensors:
                setattr(self, name, np.ascontiguousarray(tensors.pop(name)))
        super().load_state(tensors)


class Tanh(Layer):
    kind = "tanh"

    def __init__(self):
        self._out = None

    def forward(self, x, training=False):
        self._out = np.tanh(x)
        return self._out

    def backward(self, grad):
        return grad * (1.0 - self._out ** 2)

    def output_shape(self, in_shape):
        return in_shape


class Reshape(Layer):
    """Per-sample reshape; element count must be preserved."""

    kind = "reshape"

    def __init__(self, out_shape):
        self.out = tuple(int(n) for n in out_shape)
        self._in = None

    def forward(self, x, training=False):
        if int(np.prod(x.shape[1:])) != int(np.prod(self.out)):
            raise ValueError(f"cannot reshape per-sample {x.shape[1:]} to {self.out}")
        self._in = x.shape
        return x.reshape((x.shape[0],) + self.out)

    def backward(self, grad):
        return grad.reshape(self._in)

    def output_shape(self, in_shape):
        if int(np.prod(in_shape)) != int(np.prod(self.out)):
            raise ValueError(f"cannot reshape per-sample {in_shape} to {self.out}")
        return self.out


class Upsample(Layer):
    """Repeat entries along per-sample axes (reshape-and-repeat upsampling)."""

    kind = "upsample"

    def __init__(self, factors):
        self.factors = tuple(int(f) for f in factors)
        if any(f < 1 for f in self.factors):
            raise ValueError(f"factors must be >= 1, got {self.factors}")

    def forward(self, x, training=False):
        if x.ndim - 1 != len(self.factors):
            raise ValueError(f"expected {len(self.factors)} per-sample axes, got {x.shape}")
        out = x
        for ax, f in enumerate(self.factors, start=1):
            if f > 1:
                out = np.repeat(out, f, axis=ax)
        return out

    def backward(self, grad):
        g = grad
        for ax, f in enumerate(self.factors, start=1):
            if f > 1:
                shape = g.shape[:ax] + (g.shape[ax] // f, f) + g.shape[ax + 1:]
                g = g.reshape(shape).sum(axis=ax + 1)
        return g

    def output_shape(self, in_shape):
        if len(in_shape) != len(self.factors):
            raise ValueError(f"expected {len(self.factors)} per-sample axes, got {in_shape}")
        return tuple(n * f for n, f in zip(in_shape, self.factors))

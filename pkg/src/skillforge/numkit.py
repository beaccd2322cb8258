"""Dense numeric kernels: tiny MLPs with hand-rolled backprop, softmax,
entropy, and first-order optimizers (SGD / Adam).

Parameters live in a single flat float64 vector plus a layout descriptor,
which keeps optimizer state trivial and makes finite-difference checks a
one-liner. Everything here is a pure function of explicit state; all
randomness comes from a generator passed by the caller.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ACTIVATIONS = ("tanh", "relu")


@dataclass(frozen=True)
class MLPSpec:
    """Shape of a fully-connected network: input -> hidden... -> output."""

    input_dim: int
    hidden_dims: tuple[int, ...]
    output_dim: int
    activation: str = "tanh"

    def __post_init__(self):
        dims = (self.input_dim, *self.hidden_dims, self.output_dim)
        if any(int(d) < 1 for d in dims):
            raise ValueError(f"all dimensions must be >= 1, got {dims}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    def layer_dims(self) -> list[tuple[int, int]]:
        dims = (self.input_dim, *self.hidden_dims, self.output_dim)
        return list(zip(dims[:-1], dims[1:]))

    def layout(self) -> tuple[tuple[str, tuple[int, ...]], ...]:
        entries = []
        for i, (fan_in, fan_out) in enumerate(self.layer_dims()):
            entries.append((f"W{i}", (fan_in, fan_out)))
            entries.append((f"b{i}", (fan_out,)))
        return tuple(entries)

    def param_count(self) -> int:
        return sum(int(np.prod(shape)) for _, shape in self.layout())


@dataclass
class ParamVector:
    """Flat parameter vector with named, shaped views into it."""

    values: np.ndarray
    layout: tuple[tuple[str, tuple[int, ...]], ...]
    _offsets: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        offsets, start = {}, 0
        for name, shape in self.layout:
            size = int(np.prod(shape))
            offsets[name] = (start, tuple(shape))
            start += size
        if start != self.values.size:
            raise ValueError(
                f"layout describes {start} parameters, vector holds {self.values.size}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("parameter vector contains non-finite values")
        self._offsets = offsets

    def view(self, name: str) -> np.ndarray:
        start, shape = self._offsets[name]
        return self.values[start : start + int(np.prod(shape))].reshape(shape)

    def copy(self) -> "ParamVector":
        return ParamVector(self.values.copy(), self.layout)

    @classmethod
    def zeros(cls, layout) -> "ParamVector":
        size = sum(int(np.prod(shape)) for _, shape in layout)
        return cls(np.zeros(size), tuple(layout))


def init_mlp_params(spec: MLPSpec, rng: np.random.Generator, scale: float = 1.0) -> ParamVector:
    """Weights ~ N(0, scale/sqrt(fan_in)), biases zero."""
    chunks = []
    for name, shape in spec.layout():
        if name.startswith("W"):
            fan_in = shape[0]
            chunks.append(rng.normal(0.0, scale / np.sqrt(fan_in), size=shape).ravel())
        else:
            chunks.append(np.zeros(shape).ravel())
    return ParamVector(np.concatenate(chunks), spec.layout())


def _activate(z: np.ndarray, kind: str) -> np.ndarray:
    return np.tanh(z) if kind == "tanh" else np.maximum(z, 0.0)


def _activation_grad(h: np.ndarray, kind: str) -> np.ndarray:
    # derivative written in terms of the post-activation value
    return 1.0 - h * h if kind == "tanh" else (h > 0.0).astype(np.float64)


def mlp_forward(spec: MLPSpec, params: ParamVector, x: np.ndarray) -> np.ndarray:
    """Evaluate the network. Accepts a single input vector or a batch matrix."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    h = x[None, :] if single else x
    if h.shape[-1] != spec.input_dim:
        raise ValueError(f"input dim {h.shape[-1]} != spec input dim {spec.input_dim}")
    n_layers = len(spec.layer_dims())
    for i in range(n_layers):
        h = h @ params.view(f"W{i}") + params.view(f"b{i}")
        if i < n_layers - 1:
            h = _activate(h, spec.activation)
    return h[0] if single else h


def mlp_forward_cached(spec: MLPSpec, params: ParamVector, x: np.ndarray):
    """Forward pass that keeps per-layer activations for a later backward pass.

    Returns (output, cache) where cache is the list of activations entering
    each layer (cache[0] is the input batch).
    """
    x = np.asarray(x, dtype=np.float64)
    h = x[None, :] if x.ndim == 1 else x
    if h.shape[-1] != spec.input_dim:
        raise ValueError(f"input dim {h.shape[-1]} != spec input dim {spec.input_dim}")
    cache = [h]
    n_layers = len(spec.layer_dims())
    for i in range(n_layers):
        h = h @ params.view(f"W{i}") + params.view(f"b{i}")
        if i < n_layers - 1:
            h = _activate(h, spec.activation)
            cache.append(h)
    return h, cache


def mlp_backward(spec: MLPSpec, params: ParamVector, cache, output_grad: np.ndarray) -> ParamVector:
    """Gradient of sum_b output_b . output_grad_b w.r.t. all parameters."""
    og = np.asarray(output_grad, dtype=np.float64)
    delta = og[None, :] if og.ndim == 1 else og
    if delta.shape[-1] != spec.output_dim:
        raise ValueError(f"output grad dim {delta.shape[-1]} != spec output dim {spec.output_dim}")
    n_layers = len(spec.layer_dims())
    grads = ParamVector.zeros(spec.layout())
    for i in reversed(range(n_layers)):
        h_in = cache[i]
        grads.view(f"W{i}")[...] = h_in.T @ delta
        grads.view(f"b{i}")[...] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ params.view(f"W{i}").T) * _activation_grad(h_in, spec.activation)
    return grads


def mlp_gradient(spec: MLPSpec, params: ParamVector, x: np.ndarray, output_grad: np.ndarray) -> ParamVector:
    """Backpropagation: d(output . output_grad)/d(params)."""
    _, cache = mlp_forward_cached(spec, params, x)
    return mlp_backward(spec, params, cache, output_grad)


def softmax(logits: np.ndarray, temperature: float = 1.0) -> np.ndarray:
    """Temperature softmax over the last axis; shift-invariant in the logits."""
    if not temperature > 0.0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    z = np.asarray(logits, dtype=np.float64) / temperature
    if not np.all(np.isfinite(z)):
        raise ValueError("logits must be finite")
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def entropy(p: np.ndarray) -> float:
    """Shannon entropy in nats, with the 0 * log 0 = 0 convention."""
    p = np.asarray(p, dtype=np.float64)
    if np.any(p < 0.0):
        raise ValueError("probabilities must be nonnegative")
    total = p.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {total}, expected 1")
    nz = p[p > 0.0]
    return float(-(nz * np.log(nz)).sum())


@dataclass
class SgdState:
    lr: float = 0.01


@dataclass
class AdamState:
    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m: np.ndarray | None = None
    v: np.ndarray | None = None
    t: int = 0


def optimizer_step(params: ParamVector, grads: ParamVector, state) -> ParamVector:
    """One descent step along the supplied gradient; mutates optimizer state."""
    if params.values.size != grads.values.size:
        raise ValueError("parameter/gradient size mismatch")
    g = grads.values
    if isinstance(state, SgdState):
        new_values = params.values - state.lr * g
    elif isinstance(state, AdamState):
        if state.m is None:
            state.m = np.zeros_like(params.values)
            state.v = np.zeros_like(params.values)
        state.t += 1
        state.m = state.beta1 * state.m + (1.0 - state.beta1) * g
        state.v = state.beta2 * state.v + (1.0 - state.beta2) * g * g
        m_hat = state.m / (1.0 - state.beta1**state.t)
        v_hat = state.v / (1.0 - state.beta2**state.t)
        new_values = params.values - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    else:
        raise TypeError(f"unknown optimizer state {type(state).__name__}")
    return ParamVector(new_values, params.layout)

"""Minimal dense neural network: forward pass, two loss heads, Adam.

The network produces one output per action (or class) with an identity final
layer; callers append a softmax themselves when they want probabilities.
Everything is double precision so gradient checks against central finite
differences are meaningful.

Gradients are exchanged as a list of (dW, db) pairs, one per layer, with the
same shapes as the parameters. Both loss heads return the *sum* over the
batch; training loops that want a mean divide by the batch size (a positive
rescaling, so the minimizer is unchanged).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, InputError

ACTIVATIONS = ("relu", "identity")

Grads = list[tuple[np.ndarray, np.ndarray]]


@dataclass
class Layer:
    weights: np.ndarray  # (out_dim, in_dim)
    bias: np.ndarray  # (out_dim,)
    activation: str

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2:
            raise InputError(f"layer weights must be 2-D, got shape {self.weights.shape}")
        if self.bias.shape != (self.weights.shape[0],):
            raise InputError(
                f"bias shape {self.bias.shape} does not match weights {self.weights.shape}"
            )
        if self.activation not in ACTIVATIONS:
            raise InputError(f"unknown activation {self.activation!r}; expected one of {ACTIVATIONS}")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise InputError("layer parameters must be finite")

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]


@dataclass
class DenseNet:
    layers: list[Layer]

    def __post_init__(self):
        if not self.layers:
            raise InputError("network needs at least one layer")
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if nxt.in_dim != prev.out_dim:
                raise InputError(
                    f"layer dimensions do not chain: {prev.out_dim} -> {nxt.in_dim}"
                )
        if self.layers[-1].activation != "identity":
            raise InputError("final layer activation must be identity")

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    def copy(self) -> "DenseNet":
        return DenseNet(
            [Layer(l.weights.copy(), l.bias.copy(), l.activation) for l in self.layers]
        )


def init_dense(layer_sizes: list[int], rng: np.random.Generator) -> DenseNet:
    """Fresh network with the given [input, hidden..., output] widths.

    Weights are uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero. Hidden
    layers use relu, the final layer is identity.
    """
    if len(layer_sizes) < 2:
        raise InputError("need at least input and output sizes")
    layers = []
    for k, (fan_in, fan_out) in enumerate(zip(layer_sizes, layer_sizes[1:])):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        act = "identity" if k == len(layer_sizes) - 2 else "relu"
        layers.append(Layer(weights, np.zeros(fan_out), act))
    return DenseNet(layers)


def _check_batch(net: DenseNet, batch: np.ndarray) -> np.ndarray:
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2:
        raise InputError(f"batch must be 2-D (n, input_dim), got shape {batch.shape}")
    if batch.shape[1] != net.input_dim:
        raise InputError(
            f"batch has {batch.shape[1]} columns, network expects {net.input_dim}"
        )
    if not np.all(np.isfinite(batch)):
        raise InputError("batch entries must be finite")
    return batch


def forward(net: DenseNet, batch: np.ndarray) -> np.ndarray:
    """Row i of the result holds the per-action outputs for sample i."""
    batch = _check_batch(net, batch)
    a = batch
    for layer in net.layers:
        z = a @ layer.weights.T + layer.bias
        a = np.maximum(z, 0.0) if layer.activation == "relu" else z
    return a


def _forward_cached(net: DenseNet, batch: np.ndarray):
    """Forward pass keeping per-layer inputs and pre-activations for backprop."""
    inputs = []  # input to each layer
    preacts = []  # z of each layer
    a = batch
    for layer in net.layers:
        inputs.append(a)
        z = a @ layer.weights.T + layer.bias
        preacts.append(z)
        a = np.maximum(z, 0.0) if layer.activation == "relu" else z
    return a, inputs, preacts


def _backprop(net: DenseNet, inputs, preacts, d_out: np.ndarray) -> Grads:
    grads: Grads = [None] * len(net.layers)  # type: ignore[list-item]
    delta = d_out
    for k in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[k]
        if layer.activation == "relu":
            delta = delta * (preacts[k] > 0.0)
        grads[k] = (delta.T @ inputs[k], delta.sum(axis=0))
        if k > 0:
            delta = delta @ layer.weights
    return grads


def backward_q_mse(
    net: DenseNet, batch: np.ndarray, actions: np.ndarray, targets: np.ndarray
) -> tuple[float, Grads]:
    """Squared TD-error loss on the taken actions.

    loss = sum_i (target_i - out[i, action_i])^2. Gradients flow only through
    the taken action's output; the other action's column receives none.
    """
    batch = _check_batch(net, batch)
    actions = np.asarray(actions)
    targets = np.asarray(targets, dtype=np.float64)
    n = batch.shape[0]
    if actions.shape != (n,) or targets.shape != (n,):
        raise InputError("actions and targets must be 1-D with one entry per sample")
    if not np.issubdtype(actions.dtype, np.integer):
        raise InputError("actions must be integer indices")
    if np.any(actions < 0) or np.any(actions >= net.output_dim):
        raise InputError(f"action indices must lie in [0, {net.output_dim})")
    if not np.all(np.isfinite(targets)):
        raise InputError("targets must be finite")

    out, inputs, preacts = _forward_cached(net, batch)
    rows = np.arange(n)
    residual = targets - out[rows, actions]
    loss = float(np.sum(residual**2))
    d_out = np.zeros_like(out)
    d_out[rows, actions] = -2.0 * residual
    return loss, _backprop(net, inputs, preacts, d_out)


def backward_weighted_ce(
    net: DenseNet, batch: np.ndarray, labels: np.ndarray, class_weights: np.ndarray
) -> tuple[float, Grads]:
    """Class-weighted cross-entropy on the softmax of the outputs.

    loss = sum_i class_weights[label_i] * (-log softmax(out_i)[label_i]).
    With unit weights this is plain cross-entropy.
    """
    batch = _check_batch(net, batch)
    labels = np.asarray(labels)
    if net.output_dim != 2:
        raise InputError("weighted cross-entropy head requires a 2-output network")
    if labels.shape != (batch.shape[0],):
        raise InputError("labels must be 1-D with one entry per sample")
    if not np.issubdtype(labels.dtype, np.integer) or np.any((labels != 0) & (labels != 1)):
        raise InputError("labels must be binary (0 or 1)")
    class_weights = np.asarray(class_weights, dtype=np.float64)
    if class_weights.shape != (2,) or np.any(class_weights <= 0):
        raise InputError("class_weights must be two positive values")

    out, inputs, preacts = _forward_cached(net, batch)
    shifted = out - out.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    rows = np.arange(batch.shape[0])
    log_p_true = shifted[rows, labels] - log_norm
    sample_w = class_weights[labels]
    loss = float(np.sum(sample_w * -log_p_true))

    probs = np.exp(shifted - log_norm[:, None])
    d_out = probs
    d_out[rows, labels] -= 1.0
    d_out *= sample_w[:, None]
    return loss, _backprop(net, inputs, preacts, d_out)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction; never changes the row argmax."""
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def zero_grads(net: DenseNet) -> Grads:
    return [(np.zeros_like(l.weights), np.zeros_like(l.bias)) for l in net.layers]


def scale_grads(grads: Grads, factor: float) -> Grads:
    return [(gw * factor, gb * factor) for gw, gb in grads]


def add_grads(a: Grads, b: Grads) -> Grads:
    return [(aw + bw, ab + bb) for (aw, ab), (bw, bb) in zip(a, b)]


@dataclass
class AdamHyper:
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps_stability: float = 1e-8


@dataclass
class AdamState:
    first_moment: Grads
    second_moment: Grads
    step_count: int
    hyper: AdamHyper = field(default_factory=AdamHyper)

    @classmethod
    def for_net(cls, net: DenseNet, lr: float = 0.001) -> "AdamState":
        return cls(zero_grads(net), zero_grads(net), 0, AdamHyper(lr=lr))


def adam_step(net: DenseNet, grads: Grads, state: AdamState) -> tuple[DenseNet, AdamState]:
    """One Adam update, in place; returns the mutated (net, state) pair."""
    if len(grads) != len(net.layers):
        raise InputError("gradient list length does not match layer count")
    for (gw, gb), layer in zip(grads, net.layers):
        if gw.shape != layer.weights.shape or gb.shape != layer.bias.shape:
            raise InputError("gradient shapes do not mirror parameter shapes")
    h = state.hyper
    state.step_count += 1
    t = state.step_count
    bias1 = 1.0 - h.beta1**t
    bias2 = 1.0 - h.beta2**t
    for k, layer in enumerate(net.layers):
        for param, grad, m, v in (
            (layer.weights, grads[k][0], state.first_moment[k][0], state.second_moment[k][0]),
            (layer.bias, grads[k][1], state.first_moment[k][1], state.second_moment[k][1]),
        ):
            m *= h.beta1
            m += (1.0 - h.beta1) * grad
            v *= h.beta2
            v += (1.0 - h.beta2) * grad**2
            param -= h.lr * (m / bias1) / (np.sqrt(v / bias2) + h.eps_stability)
    return net, state


def network_to_dict(net: DenseNet) -> dict:
    return {
        "input_dim": net.input_dim,
        "layers": [
            {
                "weights": l.weights.tolist(),  # row-major: weights[out][in]
                "bias": l.bias.tolist(),
                "activation": l.activation,
            }
            for l in net.layers
        ],
    }


def network_from_dict(obj: dict) -> DenseNet:
    try:
        layers = [
            Layer(np.array(l["weights"]), np.array(l["bias"]), l["activation"])
            for l in obj["layers"]
        ]
        net = DenseNet(layers)
        if net.input_dim != obj["input_dim"]:
            raise FormatError(
                f"checkpoint input_dim {obj['input_dim']} does not match layers ({net.input_dim})"
            )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed network checkpoint: {exc}") from exc
    return net


def save_network(net: DenseNet, path: str | Path) -> None:
    """Write the network as JSON; doubles keep their exact decimal repr."""
    Path(path).write_text(json.dumps(network_to_dict(net), sort_keys=True, indent=1))


def load_network(path: str | Path) -> DenseNet:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"checkpoint is not valid JSON: {exc}") from exc
    return network_from_dict(obj)

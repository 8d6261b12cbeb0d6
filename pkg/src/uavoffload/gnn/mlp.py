"""Dense multilayer perceptron with hand-written reverse mode."""
from __future__ import annotations

import numpy as np

_ACTIVATIONS = {
    "relu": (lambda z: np.maximum(z, 0.0), lambda z: (z > 0).astype(z.dtype)),
    "tanh": (np.tanh, lambda z: 1.0 - np.tanh(z) ** 2),
    "identity": (lambda z: z, np.ones_like),
}


class ShapeError(ValueError):
    pass


class Mlp:
    """Affine layers with an activation between them; the last layer is
    linear. Weights are stored (fan_in, fan_out) so rows are samples."""

    def __init__(self, weights, biases, activation: str = "relu"):
        if activation not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        if len(weights) != len(biases) or not weights:
            raise ShapeError("need one bias per weight matrix")
        for k, (w, b) in enumerate(zip(weights, biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ShapeError(f"layer {k}: weight {w.shape} / bias {b.shape}")
            if k and weights[k - 1].shape[1] != w.shape[0]:
                raise ShapeError(f"layer {k} expects {w.shape[0]} inputs, previous gives {weights[k - 1].shape[1]}")
        self.weights = [np.asarray(w, dtype=float) for w in weights]
        self.biases = [np.asarray(b, dtype=float) for b in biases]
        self.activation = activation

    @classmethod
    def init(cls, widths, rng: np.random.Generator, activation: str = "relu") -> "Mlp":
        weights, biases = [], []
        for fan_in, fan_out in zip(widths[:-1], widths[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            biases.append(rng.uniform(-bound, bound, size=fan_out))
        return cls(weights, biases, activation)

    @classmethod
    def zeros(cls, widths, activation: str = "relu") -> "Mlp":
        return cls([np.zeros((a, b)) for a, b in zip(widths[:-1], widths[1:])],
                   [np.zeros(b) for b in widths[1:]], activation)

    @property
    def widths(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def params(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def copy(self) -> "Mlp":
        return Mlp([w.copy() for w in self.weights], [b.copy() for b in self.biases], self.activation)

    def forward(self, x: np.ndarray, keep: bool = False):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.widths[0]:
            raise ShapeError(f"input width {x.shape[-1]} != {self.widths[0]}")
        act = _ACTIVATIONS[self.activation][0]
        inputs, pre = [], []
        h = x
        last = len(self.weights) - 1
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            inputs.append(h)
            z = h @ w + b
            pre.append(z)
            h = z if k == last else act(z)
        if keep:
            return h, (inputs, pre)
        return h

    def backward(self, cache, dy: np.ndarray):
        """Returns (grads aligned with ``params``, gradient w.r.t. the input)."""
        inputs, pre = cache
        dact = _ACTIVATIONS[self.activation][1]
        dy = np.asarray(dy, dtype=float)
        if dy.shape != pre[-1].shape:
            raise ShapeError(f"upstream gradient {dy.shape} != output {pre[-1].shape}")
        grads = [None] * (2 * len(self.weights))
        g = dy
        for k in range(len(self.weights) - 1, -1, -1):
            if k != len(self.weights) - 1:
                g = g * dact(pre[k])
            h = inputs[k]
            if h.ndim == 1:
                grads[2 * k] = np.outer(h, g)
                grads[2 * k + 1] = g.copy()
            else:
                grads[2 * k] = h.T @ g
                grads[2 * k + 1] = g.sum(axis=0)
            g = g @ self.weights[k].T
        return grads, g


def mlp_forward(mlp: Mlp, x) -> np.ndarray:
    return mlp.forward(x)


def mlp_backward(mlp: Mlp, x, upstream):
    _, cache = mlp.forward(x, keep=True)
    return mlp.backward(cache, upstream)

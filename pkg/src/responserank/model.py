"""Small ReLU MLP utility network with hand-written backprop and AdamW."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class TrainingError(RuntimeError):
    pass


@dataclass
class UtilityNet:
    """Feed-forward net mapping items (rows) to scalar utilities.

    ``weights[l]`` has shape (fan_in, fan_out); hidden layers use ReLU and the
    output layer is linear.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self):
        # all parameters live in one flat buffer; weights/biases are views into it
        parts = [np.asarray(p, dtype=float) for p in (*self.weights, *self.biases)]
        self.flat = np.concatenate([p.ravel() for p in parts])
        views, k = [], 0
        for p in parts:
            views.append(self.flat[k:k + p.size].reshape(p.shape))
            k += p.size
        n = len(self.weights)
        self.weights, self.biases = views[:n], views[n:]

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def params(self) -> list[np.ndarray]:
        return [*self.weights, *self.biases]

    def copy(self) -> "UtilityNet":
        return UtilityNet([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def __call__(self, X) -> np.ndarray:
        return utility(self, X)

    def to_dict(self) -> dict:
        return {
            "layer_sizes": self.layer_sizes,
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "UtilityNet":
        return cls([np.asarray(w, dtype=float) for w in d["weights"]],
                   [np.asarray(b, dtype=float) for b in d["biases"]])

    def dump(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f)


def init_net(layer_sizes, rng: np.random.Generator) -> UtilityNet:
    """He-normal weights (variance 2/fan_in), zero biases."""
    layer_sizes = list(layer_sizes)
    if len(layer_sizes) < 2:
        raise ValueError("need at least an input and an output layer")
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return UtilityNet(weights, biases)


def _forward(net: UtilityNet, X: np.ndarray):
    acts = [X]
    h = X
    last = len(net.weights) - 1
    for i, (W, b) in enumerate(zip(net.weights, net.biases)):
        z = h @ W + b
        h = z if i == last else np.maximum(z, 0.0)
        acts.append(h)
    return h[:, 0], acts


def utility(net: UtilityNet, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != net.weights[0].shape[0]:
        raise ValueError(f"item dimension {X.shape[1]} does not match input layer "
                         f"{net.weights[0].shape[0]}")
    u, _ = _forward(net, X)
    return u[0] if single else u


def strength_score(net: UtilityNet, winner, loser):
    """Signed utility difference u(winner) - u(loser)."""
    return utility(net, winner) - utility(net, loser)


def backward(net: UtilityNet, acts, du: np.ndarray) -> list[np.ndarray]:
    """Parameter gradients given d loss / d utility for each forward row.

    Returned in ``net.params`` order (all weights, then all biases).
    """
    n_layers = len(net.weights)
    gW = [None] * n_layers
    gb = [None] * n_layers
    delta = du[:, None]
    for i in range(n_layers - 1, -1, -1):
        gW[i] = acts[i].T @ delta
        gb[i] = delta.sum(axis=0)
        if i:
            delta = (delta @ net.weights[i].T) * (acts[i] > 0)
    return gW + gb


def pair_scores_and_grad(net: UtilityNet, A: np.ndarray, B: np.ndarray,
                         score_loss: Callable[[np.ndarray], tuple[float, np.ndarray]]):
    """Evaluate ``score_loss(u(A) - u(B))`` and chain its gradient into the net.

    One forward pass over the stacked items keeps this cheap for tiny nets.
    """
    n = len(A)
    u, acts = _forward(net, np.concatenate([A, B]))
    s = u[:n] - u[n:]
    loss, gs = score_loss(s)
    return loss, backward(net, acts, np.concatenate([gs, -gs]))


@dataclass
class AdamWState:
    lr: float = 1e-3
    weight_decay: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)


def adamw_step(params: list[np.ndarray], grads: list[np.ndarray], state: AdamWState,
               names: list[str] | None = None) -> AdamWState:
    """Decoupled-weight-decay Adam update, applied in place to ``params``."""
    for i, g in enumerate(grads):
        if not np.isfinite(g).all():
            name = names[i] if names else f"param[{i}]"
            raise TrainingError(f"non-finite gradient for {name}")
    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        p *= 1.0 - state.lr * state.weight_decay
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return state


def param_names(net: UtilityNet) -> list[str]:
    n = len(net.weights)
    return [f"W{i}" for i in range(n)] + [f"b{i}" for i in range(n)]


def flatten_grads(grads: list[np.ndarray]) -> np.ndarray:
    return np.concatenate([g.ravel() for g in grads])


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 200
    lr: float = 1e-3
    weight_decay: float = 0.01
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    hidden: tuple[int, ...] = (64,)

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")


def train(net: UtilityNet, loss_and_grad, cfg: TrainConfig = TrainConfig(),
          history: list | None = None) -> UtilityNet:
    """Full-batch AdamW for ``cfg.steps`` steps; returns the trained net.

    ``loss_and_grad(net) -> (loss, grads)``. If ``history`` is given, the loss
    before each step is appended to it.
    """
    state = AdamWState(lr=cfg.lr, weight_decay=cfg.weight_decay,
                       beta1=cfg.betas[0], beta2=cfg.betas[1], eps=cfg.eps)
    names = param_names(net)
    for step in range(cfg.steps):
        loss, grads = loss_and_grad(net)
        if not np.isfinite(loss):
            raise TrainingError(f"non-finite loss at step {step}")
        if history is not None:
            history.append(loss)
        flat = flatten_grads(grads)
        if not np.isfinite(flat).all():
            bad = next(nm for nm, g in zip(names, grads) if not np.isfinite(g).all())
            raise TrainingError(f"non-finite gradient for {bad} at step {step}")
        adamw_step([net.flat], [flat], state)
    return net

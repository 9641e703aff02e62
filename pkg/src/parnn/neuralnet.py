"""Single-hidden-layer feed-forward network with logistic hidden units.

The output is ``c + sum_j v[j] * sigmoid(b[j] + sum_i W[i, j] * x[i])``.
Training is full-batch gradient descent on the mean squared error.

Ensembles are trained as a stack: every array gains a leading member
axis and all members step together. Members never interact, so a stack
is numerically the same as training each member on its own.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import DivergenceError, ShapeError

log = logging.getLogger(__name__)

# members trained per batch; fixed so results do not depend on ensemble size
CHUNK = 64


@dataclass(frozen=True, eq=False)
class NetworkWeights:
    input_to_hidden: np.ndarray  # (n_inputs, k)
    hidden_bias: np.ndarray  # (k,)
    hidden_to_output: np.ndarray  # (k,)
    output_bias: float

    @property
    def n_inputs(self) -> int:
        return self.input_to_hidden.shape[0]

    @property
    def k(self) -> int:
        return self.input_to_hidden.shape[1]

    def flat(self) -> np.ndarray:
        return np.concatenate([self.input_to_hidden.ravel(), self.hidden_bias,
                               self.hidden_to_output, [self.output_bias]])

    @classmethod
    def from_flat(cls, theta, n_inputs: int, k: int) -> "NetworkWeights":
        theta = np.asarray(theta, dtype=np.float64)
        if theta.size != count_weights(n_inputs, k):
            raise ShapeError("flat weight vector has the wrong length")
        a = n_inputs * k
        return cls(theta[:a].reshape(n_inputs, k).copy(), theta[a:a + k].copy(),
                   theta[a + k:a + 2 * k].copy(), float(theta[-1]))


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 1500
    learning_rate: float = 0.05
    seed: int = 0
    init_scale: float = 0.5

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not 0 < self.learning_rate < 1:
            raise ValueError("learning_rate must lie in (0, 1)")
        if self.init_scale < 0:
            raise ValueError("init_scale must be nonnegative")


def count_weights(n_inputs: int, k: int) -> int:
    return (n_inputs + 1) * k + (k + 1)


def init_network(n_inputs: int, k: int, seed: int, init_scale: float = 0.5) -> NetworkWeights:
    """Weights i.i.d. uniform on (-init_scale, init_scale), reproducible from ``seed``."""
    rng = np.random.default_rng(seed)
    theta = rng.uniform(-1.0, 1.0, count_weights(n_inputs, k)) * init_scale
    return NetworkWeights.from_flat(theta, n_inputs, k)


def predict(net: NetworkWeights, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != net.n_inputs:
        raise ShapeError(f"expected {net.n_inputs} inputs, got {X.shape[1]}")
    H = expit(X @ net.input_to_hidden + net.hidden_bias)
    return H @ net.hidden_to_output + net.output_bias


def forward(net: NetworkWeights, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size != net.n_inputs:
        raise ShapeError(f"expected a vector of {net.n_inputs} inputs, got shape {x.shape}")
    return float(predict(net, x[None, :])[0])


def loss_and_grad(net: NetworkWeights, X, y):
    """Mean squared error and its gradient as a NetworkWeights."""
    st = Stack.of([net])
    loss, grads = _loss_grad(st, np.asarray(X, dtype=np.float64), np.asarray(y, dtype=np.float64))
    gW, gb, gv, gc = grads
    return float(loss[0]), NetworkWeights(gW[0], gb[0], gv[0], float(gc[0]))


@dataclass(eq=False)
class Stack:
    """Networks of identical shape with a leading member axis."""

    W: np.ndarray  # (m, d, k)
    b: np.ndarray  # (m, k)
    v: np.ndarray  # (m, k)
    c: np.ndarray  # (m,)

    @classmethod
    def of(cls, nets) -> "Stack":
        nets = list(nets)
        return cls(np.stack([n.input_to_hidden for n in nets]),
                   np.stack([n.hidden_bias for n in nets]),
                   np.stack([n.hidden_to_output for n in nets]),
                   np.array([n.output_bias for n in nets], dtype=np.float64))

    def __len__(self):
        return self.c.size

    def members(self) -> list[NetworkWeights]:
        return [NetworkWeights(self.W[i].copy(), self.b[i].copy(), self.v[i].copy(),
                               float(self.c[i])) for i in range(len(self))]

    def take(self, idx) -> "Stack":
        return Stack(self.W[idx], self.b[idx], self.v[idx], self.c[idx])

    def predict(self, X) -> np.ndarray:
        """Outputs of every member, shape (m, n)."""
        H = expit(np.matmul(X, self.W) + self.b[:, None, :])
        return np.matmul(H, self.v[:, :, None])[..., 0] + self.c[:, None]

    def mean_predict(self, X) -> np.ndarray:
        return self.predict(X).mean(axis=0)


def _loss_grad(st: Stack, X, y):
    n = X.shape[0]
    H = expit(np.matmul(X, st.W) + st.b[:, None, :])
    r = np.matmul(H, st.v[:, :, None])[..., 0] + st.c[:, None] - y
    loss = np.mean(r * r, axis=1)
    g = (2.0 / n) * r
    gc = g.sum(axis=1)
    gv = np.matmul(g[:, None, :], H)[:, 0, :]
    dZ = g[:, :, None] * st.v[:, None, :] * H * (1.0 - H)
    gW = np.matmul(X.T, dZ)
    gb = dZ.sum(axis=1)
    return loss, (gW, gb, gv, gc)


def _loss(st: Stack, X, y):
    r = st.predict(X) - y
    return np.mean(r * r, axis=1)


def _train_chunk(st: Stack, X, y, cfg: TrainConfig):
    lr = cfg.learning_rate
    m = len(st)
    start = Stack(st.W.copy(), st.b.copy(), st.v.copy(), st.c.copy())
    cur = Stack(st.W.copy(), st.b.copy(), st.v.copy(), st.c.copy())
    live = np.ones(m, dtype=bool)
    failed_at = np.full(m, -1)
    init_loss = None
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(cfg.epochs):
            loss, (gW, gb, gv, gc) = _loss_grad(cur, X, y)
            if init_loss is None:
                init_loss = loss.copy()
            bad = live & ~np.isfinite(loss)
            if bad.any():
                failed_at[bad] = epoch
                live &= ~bad
            step = np.where(live, lr, 0.0)
            cur.W -= step[:, None, None] * np.nan_to_num(gW)
            cur.b -= step[:, None] * np.nan_to_num(gb)
            cur.v -= step[:, None] * np.nan_to_num(gv)
            cur.c -= step * np.nan_to_num(gc)
        final = _loss(cur, X, y)
    late = live & ~np.isfinite(final)
    failed_at[late] = cfg.epochs
    live &= ~late
    # never hand back a member that ended worse than it started
    revert = live & (final > init_loss)
    for idx in np.flatnonzero(revert | ~live):
        cur.W[idx], cur.b[idx], cur.v[idx], cur.c[idx] = start.W[idx], start.b[idx], start.v[idx], start.c[idx]
    if revert.any():
        log.debug("%d members reverted to their initial weights", int(revert.sum()))
    return cur, failed_at


def train_stack(st: Stack, X, y, cfg: TrainConfig):
    """Train every member; returns (trained stack, per-member divergence epoch or -1)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if X.ndim != 2 or X.shape[0] != y.size or X.shape[0] < 1:
        raise ShapeError("design matrix and targets disagree")
    if X.shape[1] != st.W.shape[1]:
        raise ShapeError(f"networks take {st.W.shape[1]} inputs, design has {X.shape[1]}")
    parts, fails = [], []
    for lo in range(0, len(st), CHUNK):
        out, failed = _train_chunk(st.take(slice(lo, lo + CHUNK)), X, y, cfg)
        parts.append(out)
        fails.append(failed)
    trained = Stack(np.concatenate([p.W for p in parts]), np.concatenate([p.b for p in parts]),
                    np.concatenate([p.v for p in parts]), np.concatenate([p.c for p in parts]))
    return trained, np.concatenate(fails)


def backprop_train(net: NetworkWeights, X, y, cfg: TrainConfig) -> NetworkWeights:
    """Full-batch gradient descent on mean squared error for ``cfg.epochs`` steps."""
    trained, failed = train_stack(Stack.of([net]), X, y, cfg)
    if failed[0] >= 0:
        raise DivergenceError(
            f"non-finite training loss at epoch {failed[0]}; try a smaller learning rate",
            epoch=int(failed[0]),
        )
    return trained.members()[0]

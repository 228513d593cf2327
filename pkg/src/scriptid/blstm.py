"""Stacked bidirectional LSTM sequence classifier, implemented from scratch.

Each layer runs one LSTM over the sequence forwards and one backwards; their
per-timestep outputs are concatenated and fed to the next layer.  The final
layer's outputs are mean-pooled over time and mapped through a dense softmax
read-out.  Training is momentum SGD with early stopping on validation
accuracy; gradients are exact BPTT and are checked against central finite
differences by `gradient_check`.

All arithmetic is double precision.  Gate layout inside the fused (4H)
pre-activation is [input, forget, candidate, output].
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .errors import InvalidSplit, ShapeError

EPS = 1e-12


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-4
    momentum: float = 0.9
    patience: int = 20
    max_epochs: int = 200
    batch_size: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if not (0.0 <= self.momentum < 1.0):
            raise ValueError("momentum must be in [0, 1)")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")


@dataclass
class TrainReport:
    train_loss: list
    val_accuracy: list
    best_epoch: int
    epochs_run: int
    wall_time: float


@dataclass(frozen=True)
class ClassPosterior:
    probs: np.ndarray
    predicted: int
    error: float | None = None


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


class BlstmNetwork:
    """Parameter container with seeded initialization.

    Parameters live in a flat dict of float64 arrays:
    ``layer{l}.{fwd|bwd}.{W|U|b}`` plus ``readout.W`` and ``readout.b``.
    """

    def __init__(self, input_size: int, hidden_sizes=(64, 64, 64),
                 n_classes: int = 2, seed: int = 0, params: dict | None = None):
        if n_classes < 2:
            raise ShapeError("need at least 2 classes")
        self.input_size = input_size
        self.hidden_sizes = tuple(hidden_sizes)
        self.n_classes = n_classes
        self.seed = seed
        if params is not None:
            self.params = params
            return
        rng = np.random.default_rng(seed)
        self.params = {}
        d_in = input_size
        for l, h in enumerate(self.hidden_sizes):
            for direction in ("fwd", "bwd"):
                r_w = 1.0 / np.sqrt(d_in)
                r_u = 1.0 / np.sqrt(h)
                self.params[f"layer{l}.{direction}.W"] = rng.uniform(-r_w, r_w, (d_in, 4 * h))
                self.params[f"layer{l}.{direction}.U"] = rng.uniform(-r_u, r_u, (h, 4 * h))
                b = np.zeros(4 * h)
                b[h:2 * h] = 1.0  # forget-gate bias
                self.params[f"layer{l}.{direction}.b"] = b
            d_in = 2 * h
        r = 1.0 / np.sqrt(d_in)
        self.params["readout.W"] = rng.uniform(-r, r, (d_in, self.n_classes))
        self.params["readout.b"] = np.zeros(self.n_classes)

    def copy_params(self) -> dict:
        return {k: v.copy() for k, v in self.params.items()}

    def zeros_like_params(self) -> dict:
        return {k: np.zeros_like(v) for k, v in self.params.items()}


def _dir_forward(X, W, U, b, reverse: bool):
    T = X.shape[0]
    H = U.shape[0]
    pre = X @ W + b
    I = np.empty((T, H)); F = np.empty((T, H))
    G = np.empty((T, H)); O = np.empty((T, H))
    C = np.empty((T, H)); TC = np.empty((T, H))
    Hprev = np.empty((T, H)); Cprev = np.empty((T, H))
    Hout = np.empty((T, H))
    h = np.zeros(H)
    c = np.zeros(H)
    order = range(T - 1, -1, -1) if reverse else range(T)
    for t in order:
        a = pre[t] + h @ U
        i = _sigmoid(a[:H])
        f = _sigmoid(a[H:2 * H])
        g = np.tanh(a[2 * H:3 * H])
        o = _sigmoid(a[3 * H:])
        Hprev[t] = h; Cprev[t] = c
        c = f * c + i * g
        tc = np.tanh(c)
        h = o * tc
        I[t] = i; F[t] = f; G[t] = g; O[t] = o
        C[t] = c; TC[t] = tc; Hout[t] = h
    return Hout, (I, F, G, O, C, TC, Hprev, Cprev)


def _dir_backward(dHout, cache, X, W, U, reverse: bool):
    I, F, G, O, C, TC, Hprev, Cprev = cache
    T, H = I.shape
    dW = np.zeros_like(W)
    dU = np.zeros_like(U)
    db = np.zeros(4 * H)
    dX = np.zeros_like(X)
    dh_next = np.zeros(H)
    dc_next = np.zeros(H)
    order = range(T) if reverse else range(T - 1, -1, -1)
    da = np.empty(4 * H)
    for t in order:
        dh = dHout[t] + dh_next
        do = dh * TC[t]
        dc = dh * O[t] * (1.0 - TC[t] ** 2) + dc_next
        di = dc * G[t]
        dg = dc * I[t]
        df = dc * Cprev[t]
        dc_next = dc * F[t]
        da[:H] = di * I[t] * (1.0 - I[t])
        da[H:2 * H] = df * F[t] * (1.0 - F[t])
        da[2 * H:3 * H] = dg * (1.0 - G[t] ** 2)
        da[3 * H:] = do * O[t] * (1.0 - O[t])
        dW += np.outer(X[t], da)
        dU += np.outer(Hprev[t], da)
        db += da
        dh_next = U @ da
        dX[t] = W @ da
    return dX, dW, dU, db


def _forward_cache(net: BlstmNetwork, X: np.ndarray):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != net.input_size:
        raise ShapeError(
            f"sequence width {X.shape} does not match network input size {net.input_size}"
        )
    if X.shape[0] < 1:
        raise ShapeError("sequence must have at least one timestep")
    layer_caches = []
    cur = X
    for l in range(len(net.hidden_sizes)):
        hf, cf = _dir_forward(cur, net.params[f"layer{l}.fwd.W"],
                              net.params[f"layer{l}.fwd.U"],
                              net.params[f"layer{l}.fwd.b"], reverse=False)
        hb, cb = _dir_forward(cur, net.params[f"layer{l}.bwd.W"],
                              net.params[f"layer{l}.bwd.U"],
                              net.params[f"layer{l}.bwd.b"], reverse=True)
        layer_caches.append((cur, cf, cb))
        cur = np.hstack([hf, hb])
    pooled = cur.mean(axis=0)
    z = pooled @ net.params["readout.W"] + net.params["readout.b"]
    z = z - z.max()
    e = np.exp(z)
    probs = e / e.sum()
    return probs, (layer_caches, cur, pooled)


def forward(net: BlstmNetwork, seq) -> ClassPosterior:
    X = getattr(seq, "vectors", seq)
    probs, _ = _forward_cache(net, X)
    return ClassPosterior(probs, int(np.argmax(probs)))


def predict(net: BlstmNetwork, seq) -> ClassPosterior:
    return forward(net, seq)


def loss(posterior: ClassPosterior, target: int, n_classes: int | None = None) -> float:
    """Cross-entropy of the posterior against a one-hot target, clamped."""
    p = np.clip(posterior.probs, EPS, 1.0 - EPS)
    k = n_classes if n_classes is not None else len(p)
    if k == 2:
        y = p[1]
        z = 1.0 if target == 1 else 0.0
        return float(-(z * np.log(y) + (1.0 - z) * np.log(1.0 - y)))
    return float(-np.log(p[target]))


def sequence_likelihood(posterior: ClassPosterior, target: int) -> float:
    """Product over classes of y_k ** z_k; equals y_target for one-hot targets."""
    p = np.clip(posterior.probs, EPS, 1.0 - EPS)
    return float(p[target])


def _backward_from_cache(net: BlstmNetwork, X, target: int, probs, cache):
    layer_caches, final_out, pooled = cache
    grads = net.zeros_like_params()
    T = final_out.shape[0]
    dz = probs.copy()
    dz[target] -= 1.0
    grads["readout.W"] = np.outer(pooled, dz)
    grads["readout.b"] = dz
    dpooled = net.params["readout.W"] @ dz
    dcur = np.tile(dpooled / T, (T, 1))
    for l in range(len(net.hidden_sizes) - 1, -1, -1):
        h = net.hidden_sizes[l]
        X_l, cf, cb = layer_caches[l]
        dXf, dWf, dUf, dbf = _dir_backward(dcur[:, :h], cf, X_l,
                                           net.params[f"layer{l}.fwd.W"],
                                           net.params[f"layer{l}.fwd.U"],
                                           reverse=False)
        dXb, dWb, dUb, dbb = _dir_backward(dcur[:, h:], cb, X_l,
                                           net.params[f"layer{l}.bwd.W"],
                                           net.params[f"layer{l}.bwd.U"],
                                           reverse=True)
        grads[f"layer{l}.fwd.W"] = dWf
        grads[f"layer{l}.fwd.U"] = dUf
        grads[f"layer{l}.fwd.b"] = dbf
        grads[f"layer{l}.bwd.W"] = dWb
        grads[f"layer{l}.bwd.U"] = dUb
        grads[f"layer{l}.bwd.b"] = dbb
        dcur = dXf + dXb
    return grads, dcur


def backward(net: BlstmNetwork, seq, target: int):
    """Gradients of the cross-entropy loss w.r.t. every parameter."""
    X = np.asarray(getattr(seq, "vectors", seq), dtype=float)
    probs, cache = _forward_cache(net, X)
    grads, _ = _backward_from_cache(net, X, target, probs, cache)
    return grads


def input_gradient(net: BlstmNetwork, seq, target: int) -> np.ndarray:
    X = np.asarray(getattr(seq, "vectors", seq), dtype=float)
    probs, cache = _forward_cache(net, X)
    _, dX = _backward_from_cache(net, X, target, probs, cache)
    return dX


def accuracy(net: BlstmNetwork, sequences, labels) -> float:
    hits = sum(1 for x, y in zip(sequences, labels)
               if forward(net, x).predicted == y)
    return hits / len(labels)


def train(net: BlstmNetwork, train_seqs, train_labels, val_seqs, val_labels,
          config: TrainConfig = TrainConfig()) -> TrainReport:
    """Momentum SGD with early stopping on validation accuracy.

    Restores the parameters from the best validation epoch before returning.
    Deterministic for a fixed (network, data, config.seed).
    """
    if len(train_seqs) == 0 or len(val_seqs) == 0:
        raise InvalidSplit("train and validation splits must be non-empty")
    if max(list(train_labels) + list(val_labels)) >= net.n_classes:
        raise InvalidSplit("labels must be < n_classes")
    t0 = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    xs = [np.asarray(getattr(s, "vectors", s), dtype=float) for s in train_seqs]
    ys = list(train_labels)
    velocity = net.zeros_like_params()
    losses = []
    val_accs = []
    best_acc = -1.0
    best_epoch = 0
    best_params = net.copy_params()
    epochs_run = 0
    for epoch in range(1, config.max_epochs + 1):
        epochs_run = epoch
        order = rng.permutation(len(xs))
        total = 0.0
        for s in range(0, len(order), config.batch_size):
            batch = order[s:s + config.batch_size]
            grads = net.zeros_like_params()
            for i in batch:
                probs, cache = _forward_cache(net, xs[i])
                p = np.clip(probs, EPS, 1.0 - EPS)
                total += -np.log(p[ys[i]])
                g, _ = _backward_from_cache(net, xs[i], ys[i], probs, cache)
                for k in grads:
                    grads[k] += g[k]
            inv = 1.0 / len(batch)
            for k in net.params:
                velocity[k] = config.momentum * velocity[k] - config.learning_rate * grads[k] * inv
                net.params[k] += velocity[k]
        losses.append(total / len(xs))
        val_acc = accuracy(net, val_seqs, val_labels)
        val_accs.append(val_acc)
        if val_acc > best_acc:
            best_acc = val_acc
            best_epoch = epoch
            best_params = net.copy_params()
        elif epoch - best_epoch >= config.patience:
            break
    net.params = best_params
    return TrainReport(losses, val_accs, best_epoch, epochs_run,
                       time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# Finite-difference gradient checking
# ---------------------------------------------------------------------------

def _loss_at(net, X, target) -> float:
    probs, _ = _forward_cache(net, X)
    p = np.clip(probs, EPS, 1.0 - EPS)
    return float(-np.log(p[target]))


def gradient_check(input_size=3, hidden_sizes=(4, 4), n_classes=3, seq_len=8,
                   trials=3, seed=0, h=1e-5, check_inputs=True) -> float:
    """Max relative error between BPTT and central finite differences."""
    max_err = 0.0
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        net = BlstmNetwork(input_size, hidden_sizes, n_classes,
                           seed=int(rng.integers(1 << 31)))
        X = rng.normal(size=(seq_len, input_size))
        target = int(rng.integers(n_classes))
        grads = backward(net, X, target)
        for key, arr in net.params.items():
            g = grads[key]
            flat = arr.ravel()
            gflat = g.ravel()
            for j in range(flat.size):
                orig = flat[j]
                flat[j] = orig + h
                lp = _loss_at(net, X, target)
                flat[j] = orig - h
                lm = _loss_at(net, X, target)
                flat[j] = orig
                num = (lp - lm) / (2 * h)
                denom = max(1e-3, abs(num) + abs(gflat[j]))
                max_err = max(max_err, abs(num - gflat[j]) / denom)
        if check_inputs:
            dX = input_gradient(net, X, target)
            for t in range(seq_len):
                for j in range(input_size):
                    orig = X[t, j]
                    X[t, j] = orig + h
                    lp = _loss_at(net, X, target)
                    X[t, j] = orig - h
                    lm = _loss_at(net, X, target)
                    X[t, j] = orig
                    num = (lp - lm) / (2 * h)
                    denom = max(1e-3, abs(num) + abs(dX[t, j]))
                    max_err = max(max_err, abs(num - dX[t, j]) / denom)
    return max_err


# ---------------------------------------------------------------------------
# Estimator wrapper
# ---------------------------------------------------------------------------

class BlstmClassifier(BaseEstimator, ClassifierMixin):
    """Sequence classifier over lists of (T, n_features) arrays."""

    def __init__(self, hidden_sizes=(64, 64, 64), learning_rate=1e-4,
                 momentum=0.9, patience=20, max_epochs=200, batch_size=16,
                 validation_fraction=0.1, seed=0):
        self.hidden_sizes = hidden_sizes
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.patience = patience
        self.max_epochs = max_epochs
        self.batch_size = batch_size
        self.validation_fraction = validation_fraction
        self.seed = seed

    def _encode_labels(self, y):
        return np.array([self._class_index[label] for label in y])

    def fit(self, X, y, X_val=None, y_val=None):
        if len(X) == 0:
            raise InvalidSplit("empty training set")
        self.classes_ = np.array(sorted(set(y)))
        self._class_index = {c: i for i, c in enumerate(self.classes_)}
        yi = self._encode_labels(y)
        xs = [np.asarray(getattr(s, "vectors", s), dtype=float) for s in X]
        if X_val is None:
            rng = np.random.default_rng(self.seed)
            order = rng.permutation(len(xs))
            n_val = max(1, int(round(self.validation_fraction * len(xs))))
            val_idx = set(order[:n_val].tolist())
            xv = [xs[i] for i in sorted(val_idx)]
            yv = [int(yi[i]) for i in sorted(val_idx)]
            xt = [xs[i] for i in range(len(xs)) if i not in val_idx]
            yt = [int(yi[i]) for i in range(len(xs)) if i not in val_idx]
        else:
            xt, yt = xs, [int(v) for v in yi]
            xv = [np.asarray(getattr(s, "vectors", s), dtype=float) for s in X_val]
            yv = [self._class_index[label] for label in y_val]
        self.net_ = BlstmNetwork(xt[0].shape[1], tuple(self.hidden_sizes),
                                 len(self.classes_), seed=self.seed)
        cfg = TrainConfig(self.learning_rate, self.momentum, self.patience,
                          self.max_epochs, self.batch_size, self.seed)
        self.report_ = train(self.net_, xt, yt, xv, yv, cfg)
        return self

    def predict_proba(self, X):
        return np.vstack([forward(self.net_, x).probs for x in X])

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[np.argmax(proba, axis=1)]

    def decision_details(self, X):
        """Per-sequence (predicted class, cross-entropy of the prediction)."""
        out = []
        for x in X:
            post = forward(self.net_, x)
            err = loss(post, post.predicted, len(self.classes_))
            out.append((self.classes_[post.predicted], err))
        return out

"""Per-class diagonal-Gaussian HMM baseline.

One HMM is fitted per label class with Baum-Welch (EM); classification picks
the class whose model assigns the highest forward log-likelihood.  Because EM
converges to local optima, several seeded restarts are trained per class and
the best combination is chosen on a validation set.

Topology is left-to-right with self-loops; the forward pass uses per-step
scaling so long sequences do not underflow.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .errors import InvalidInput, ShapeError

VAR_FLOOR = 1e-6


@dataclass
class GaussianHmm:
    pi: np.ndarray       # (N,)
    A: np.ndarray        # (N, N)
    means: np.ndarray    # (N, D)
    variances: np.ndarray  # (N, D), diagonal covariance
    ll_trace: tuple = ()   # per-EM-iteration total log-likelihood

    @property
    def n_states(self) -> int:
        return len(self.pi)

    @property
    def n_features(self) -> int:
        return self.means.shape[1]


def _log_emissions(model: GaussianHmm, X: np.ndarray) -> np.ndarray:
    """(T, N) log densities of each point under each state's Gaussian."""
    diff = X[:, None, :] - model.means[None, :, :]
    return -0.5 * np.sum(
        np.log(2.0 * np.pi * model.variances)[None, :, :]
        + diff ** 2 / model.variances[None, :, :],
        axis=2,
    )


def _scaled_forward(model: GaussianHmm, logb: np.ndarray):
    """Scaled forward pass; returns (alpha_hat, log scale per step, total ll)."""
    T, N = logb.shape
    m = logb.max(axis=1)
    b = np.exp(logb - m[:, None])
    alpha = np.empty((T, N))
    logc = np.empty(T)
    a = model.pi * b[0]
    s = a.sum()
    if s <= 0:
        s = 1e-300
    alpha[0] = a / s
    logc[0] = np.log(s) + m[0]
    for t in range(1, T):
        a = (alpha[t - 1] @ model.A) * b[t]
        s = a.sum()
        if s <= 0:
            s = 1e-300
        alpha[t] = a / s
        logc[t] = np.log(s) + m[t]
    return alpha, b, logc


def log_likelihood(model: GaussianHmm, seq) -> float:
    """Forward-algorithm log-likelihood with per-step scaling."""
    X = np.asarray(getattr(seq, "vectors", seq), dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ShapeError(
            f"sequence width {X.shape} does not match model width {model.n_features}"
        )
    _, _, logc = _scaled_forward(model, _log_emissions(model, X))
    return float(logc.sum())


def naive_log_likelihood(model: GaussianHmm, seq) -> float:
    """Unscaled forward recursion; only usable for short sequences."""
    X = np.asarray(getattr(seq, "vectors", seq), dtype=float)
    b = np.exp(_log_emissions(model, X))
    a = model.pi * b[0]
    for t in range(1, len(X)):
        a = (a @ model.A) * b[t]
    return float(np.log(a.sum()))


def _left_right_A(n_states: int) -> np.ndarray:
    A = np.zeros((n_states, n_states))
    for i in range(n_states - 1):
        A[i, i] = 0.6
        A[i, i + 1] = 0.4
    A[-1, -1] = 1.0
    return A


def _init_model(xs, n_states: int, rng) -> GaussianHmm:
    allv = np.concatenate(xs)
    d = allv.shape[1]
    global_var = np.maximum(allv.var(axis=0), VAR_FLOOR)
    means = np.empty((n_states, d))
    chunks = [[] for _ in range(n_states)]
    for x in xs:
        bounds = np.linspace(0, len(x), n_states + 1).astype(int)
        for j in range(n_states):
            if bounds[j + 1] > bounds[j]:
                chunks[j].append(x[bounds[j]:bounds[j + 1]])
    for j in range(n_states):
        means[j] = (np.concatenate(chunks[j]).mean(axis=0)
                    if chunks[j] else allv.mean(axis=0))
    means = means + rng.normal(0.0, 0.25, size=means.shape) * np.sqrt(global_var)
    variances = np.tile(global_var, (n_states, 1))
    pi = np.zeros(n_states)
    pi[0] = 1.0
    return GaussianHmm(pi, _left_right_A(n_states), means, variances)


def fit(sequences, n_states: int = 8, seed: int = 0, max_iter: int = 100,
        tol: float = 1e-4) -> GaussianHmm:
    """Baum-Welch until the total log-likelihood improves by less than `tol`."""
    if len(sequences) == 0:
        raise InvalidInput("cannot fit an HMM on an empty training set")
    xs = [np.asarray(getattr(s, "vectors", s), dtype=float) for s in sequences]
    widths = {x.shape[1] for x in xs}
    if len(widths) != 1:
        raise ShapeError("all sequences must share one feature width")
    d = widths.pop()

    if n_states == 1:
        allv = np.concatenate(xs)
        model = GaussianHmm(np.ones(1), np.ones((1, 1)),
                            allv.mean(axis=0).reshape(1, d),
                            np.maximum(allv.var(axis=0), VAR_FLOOR).reshape(1, d))
        model.ll_trace = (sum(log_likelihood(model, x) for x in xs),)
        return model

    rng = np.random.default_rng(seed)
    model = _init_model(xs, n_states, rng)
    trace = []
    prev_ll = -np.inf
    for _ in range(max_iter):
        pi_acc = np.zeros(n_states)
        A_num = np.zeros((n_states, n_states))
        gamma_sum = np.zeros(n_states)
        mean_num = np.zeros((n_states, d))
        var_num = np.zeros((n_states, d))
        total_ll = 0.0
        for x in xs:
            logb = _log_emissions(model, x)
            alpha, b, logc = _scaled_forward(model, logb)
            total_ll += logc.sum()
            T = len(x)
            beta = np.empty((T, n_states))
            beta[-1] = 1.0
            for t in range(T - 2, -1, -1):
                v = model.A @ (b[t + 1] * beta[t + 1])
                s = v.sum()
                beta[t] = v / (s if s > 0 else 1e-300)
            gamma = alpha * beta
            gamma /= np.maximum(gamma.sum(axis=1, keepdims=True), 1e-300)
            pi_acc += gamma[0]
            for t in range(T - 1):
                xi = (alpha[t][:, None] * model.A) * (b[t + 1] * beta[t + 1])[None, :]
                s = xi.sum()
                if s > 0:
                    A_num += xi / s
            gamma_sum += gamma.sum(axis=0)
            mean_num += gamma.T @ x
            var_num += gamma.T @ (x ** 2)
        trace.append(float(total_ll))
        if total_ll - prev_ll < tol and np.isfinite(prev_ll):
            break
        prev_ll = total_ll

        new_pi = pi_acc / pi_acc.sum()
        new_A = model.A.copy()
        row = A_num.sum(axis=1)
        nz = row > 0
        new_A[nz] = A_num[nz] / row[nz, None]
        occ = np.maximum(gamma_sum, 1e-300)
        new_means = mean_num / occ[:, None]
        new_vars = var_num / occ[:, None] - new_means ** 2
        new_vars = np.maximum(new_vars, VAR_FLOOR)
        keep = gamma_sum < 1e-6
        new_means[keep] = model.means[keep]
        new_vars[keep] = model.variances[keep]
        model = GaussianHmm(new_pi, new_A, new_means, new_vars)
    model.ll_trace = tuple(trace)
    return model


def classify(models: dict, seq):
    """(label, per-class log-likelihood); ties resolved to the lowest class."""
    if len(models) < 2:
        raise InvalidInput("need at least 2 class models")
    scores = {}
    best_label = None
    best_ll = -np.inf
    for label in sorted(models):
        ll = log_likelihood(models[label], seq)
        scores[label] = ll
        if ll > best_ll:
            best_ll = ll
            best_label = label
    return best_label, scores


@dataclass(frozen=True)
class HmmEnsembleChoice:
    chosen: dict           # label -> candidate index
    accuracy: float
    mode: str              # "exhaustive" | "greedy"
    combination_accuracy: dict = field(default_factory=dict)


def select_restarts(candidates: dict, val_seqs, val_labels,
                    exhaustive_limit: int = 256) -> HmmEnsembleChoice:
    """Pick the per-class restart combination with the best validation accuracy."""
    labels = sorted(candidates)
    if any(len(candidates[lab]) == 0 for lab in labels):
        raise InvalidInput("need at least one candidate model per class")
    # cache log-likelihoods: lls[label][cand][seq]
    lls = {
        lab: np.array([[log_likelihood(m, s) for s in val_seqs]
                       for m in candidates[lab]])
        for lab in labels
    }
    y = np.array([labels.index(lab) for lab in val_labels])

    def combo_accuracy(combo):
        stacked = np.vstack([lls[lab][idx] for lab, idx in zip(labels, combo)])
        pred = np.argmax(stacked, axis=0)
        return float(np.mean(pred == y))

    n_combos = int(np.prod([len(candidates[lab]) for lab in labels]))
    if n_combos <= exhaustive_limit:
        records = {}
        best_combo, best_acc = None, -1.0
        for combo in itertools.product(*(range(len(candidates[lab])) for lab in labels)):
            acc = combo_accuracy(combo)
            records[",".join(map(str, combo))] = acc
            if acc > best_acc:
                best_acc, best_combo = acc, combo
        return HmmEnsembleChoice(dict(zip(labels, best_combo)), best_acc,
                                 "exhaustive", records)

    combo = [0] * len(labels)
    best_acc = combo_accuracy(combo)
    for pos, lab in enumerate(labels):
        for idx in range(len(candidates[lab])):
            trial = list(combo)
            trial[pos] = idx
            acc = combo_accuracy(trial)
            if acc > best_acc:
                best_acc = acc
                combo = trial
    return HmmEnsembleChoice(dict(zip(labels, combo)), best_acc, "greedy")


class HmmClassifier(BaseEstimator, ClassifierMixin):
    """One Gaussian HMM per class with restart selection on a validation set."""

    def __init__(self, n_states=8, n_restarts=5, max_iter=100, tol=1e-4, seed=0):
        self.n_states = n_states
        self.n_restarts = n_restarts
        self.max_iter = max_iter
        self.tol = tol
        self.seed = seed

    def fit(self, X, y, X_val=None, y_val=None):
        if len(X) == 0:
            raise InvalidInput("empty training set")
        self.classes_ = np.array(sorted(set(y)))
        xs = [np.asarray(getattr(s, "vectors", s), dtype=float) for s in X]
        by_label = {}
        for x, lab in zip(xs, y):
            by_label.setdefault(lab, []).append(x)
        candidates = {}
        for ci, lab in enumerate(self.classes_):
            candidates[lab] = [
                fit(by_label[lab], self.n_states,
                    seed=int(np.random.default_rng([self.seed, ci, r]).integers(1 << 31)),
                    max_iter=self.max_iter, tol=self.tol)
                for r in range(self.n_restarts)
            ]
        if X_val is None:
            X_val, y_val = xs, list(y)
        xv = [np.asarray(getattr(s, "vectors", s), dtype=float) for s in X_val]
        self.choice_ = select_restarts(candidates, xv, list(y_val))
        self.models_ = {lab: candidates[lab][self.choice_.chosen[lab]]
                        for lab in candidates}
        return self

    def predict(self, X):
        return np.array([classify(self.models_, x)[0] for x in X])

    def score_details(self, X):
        return [classify(self.models_, x) for x in X]

"""Two-layer LSTM binary classifier over windows of similarity values.

Forward pass, backpropagation through time and Adam are written directly
in numpy (float64). Gate blocks are ordered input, forget, candidate,
output inside every ``4*H`` wide weight matrix.
"""

from __future__ import annotations

import csv
import json
import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from typing import IO

import numpy as np

from .errors import (
    CheckpointError,
    DivergedNonFinite,
    LengthMismatch,
    MetricMismatch,
    NonFiniteInput,
    SingleClass,
    TooShort,
)
from .similarity import SimilaritySeries


@dataclass(frozen=True)
class ModelConfig:
    input_units: int = 42
    hidden_units: int = 12
    output_units: int = 1
    dropout_rate: float = 0.20
    learning_rate: float = 0.01
    batch_size: int = 128
    epochs: int = 128
    train_fraction: float = 2 / 3
    lookback: int = 10
    seed: int = 0
    n_features: int = 1
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    standardize: bool = True

    def __post_init__(self):
        for name in ("input_units", "hidden_units", "output_units", "batch_size", "epochs", "lookback", "n_features"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.output_units != 1:
            raise ValueError("only a single sigmoid output is supported")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")


PARAM_NAMES = ("W1", "U1", "b1", "W2", "U2", "b2", "Wd", "bd")


def param_shapes(cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
    h1, h2, f = cfg.input_units, cfg.hidden_units, cfg.n_features
    return {
        "W1": (f, 4 * h1),
        "U1": (h1, 4 * h1),
        "b1": (4 * h1,),
        "W2": (h1, 4 * h2),
        "U2": (h2, 4 * h2),
        "b2": (4 * h2,),
        "Wd": (h2, cfg.output_units),
        "bd": (cfg.output_units,),
    }


@dataclass
class LstmModel:
    """Network parameters plus the per-feature input scaling fitted on training data."""

    config: ModelConfig
    params: dict[str, np.ndarray]
    input_mean: np.ndarray | None = None
    input_scale: np.ndarray | None = None

    def __post_init__(self):
        f = self.config.n_features
        self.input_mean = np.zeros(f) if self.input_mean is None else np.asarray(self.input_mean, dtype=np.float64)
        self.input_scale = np.ones(f) if self.input_scale is None else np.asarray(self.input_scale, dtype=np.float64)
        if self.input_mean.shape != (f,) or self.input_scale.shape != (f,):
            raise CheckpointError(f"input scaling must have shape ({f},)")
        if np.any(self.input_scale <= 0):
            raise CheckpointError("input_scale must be positive")
        shapes = param_shapes(self.config)
        if set(self.params) != set(shapes):
            raise CheckpointError(f"parameter names {sorted(self.params)} != {sorted(shapes)}")
        for name, shape in shapes.items():
            arr = np.asarray(self.params[name], dtype=np.float64)
            if arr.shape != shape:
                raise CheckpointError(f"{name} has shape {arr.shape}, expected {shape}")
            self.params[name] = arr

    def copy(self) -> LstmModel:
        return LstmModel(
            self.config, {k: v.copy() for k, v in self.params.items()}, self.input_mean.copy(), self.input_scale.copy()
        )

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in self.params.values())

    def to_json(self) -> str:
        return json.dumps(
            {
                "format": "canmsg-lstm",
                "version": 1,
                "config": asdict(self.config),
                "input_mean": self.input_mean.tolist(),
                "input_scale": self.input_scale.tolist(),
                "params": {k: {"shape": list(v.shape), "data": v.ravel().tolist()} for k, v in self.params.items()},
            }
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def from_json(cls, text: str) -> LstmModel:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CheckpointError(f"not a JSON checkpoint: {exc}") from exc
        if doc.get("format") != "canmsg-lstm":
            raise CheckpointError("not a canmsg LSTM checkpoint")
        cfg = ModelConfig(**doc["config"])
        params = {}
        for name, entry in doc["params"].items():
            data = np.asarray(entry["data"], dtype=np.float64)
            shape = tuple(entry["shape"])
            if data.size != math.prod(shape):
                raise CheckpointError(f"{name}: {data.size} values for shape {shape}")
            params[name] = data.reshape(shape)
        return cls(cfg, params, doc.get("input_mean"), doc.get("input_scale"))

    @classmethod
    def load(cls, path) -> LstmModel:
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int, shape) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def _gate_stack(rng, fan_in: int, hidden: int) -> np.ndarray:
    return np.concatenate([_glorot(rng, fan_in, hidden, (fan_in, hidden)) for _ in range(4)], axis=1)


def init_model(cfg: ModelConfig, rng: np.random.Generator | None = None) -> LstmModel:
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    h1, h2, f = cfg.input_units, cfg.hidden_units, cfg.n_features
    b1 = np.zeros(4 * h1)
    b1[h1 : 2 * h1] = 1.0
    b2 = np.zeros(4 * h2)
    b2[h2 : 2 * h2] = 1.0
    params = {
        "W1": _gate_stack(rng, f, h1),
        "U1": _gate_stack(rng, h1, h1),
        "b1": b1,
        "W2": _gate_stack(rng, h1, h2),
        "U2": _gate_stack(rng, h2, h2),
        "b2": b2,
        "Wd": _glorot(rng, h2, cfg.output_units, (h2, cfg.output_units)),
        "bd": np.zeros(cfg.output_units),
    }
    return LstmModel(cfg, params)


def zero_model(cfg: ModelConfig) -> LstmModel:
    return LstmModel(cfg, {k: np.zeros(s) for k, s in param_shapes(cfg).items()})


# --------------------------------------------------------------------------
# forward / backward


def _sigmoid(z):
    # split by sign so exp never overflows
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _lstm_forward(x, W, U, b):
    B, T, _ = x.shape
    H = U.shape[0]
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    hs = np.empty((B, T, H))
    cache = []
    for t in range(T):
        z = x[:, t] @ W + h @ U + b
        i = _sigmoid(z[:, :H])
        f = _sigmoid(z[:, H : 2 * H])
        g = np.tanh(z[:, 2 * H : 3 * H])
        o = _sigmoid(z[:, 3 * H :])
        c_prev = c
        c = f * c_prev + i * g
        tc = np.tanh(c)
        h_prev = h
        h = o * tc
        hs[:, t] = h
        cache.append((h_prev, c_prev, i, f, g, o, tc))
    return hs, cache


def _lstm_backward(x, W, U, cache, dhs):
    B, T, _ = x.shape
    H = U.shape[0]
    dW = np.zeros_like(W)
    dU = np.zeros_like(U)
    db = np.zeros(4 * H)
    dx = np.empty_like(x)
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    dz = np.empty((B, 4 * H))
    for t in range(T - 1, -1, -1):
        h_prev, c_prev, i, f, g, o, tc = cache[t]
        dh = dhs[:, t] + dh_next
        dc = dc_next + dh * o * (1.0 - tc * tc)
        dz[:, :H] = dc * g * i * (1.0 - i)
        dz[:, H : 2 * H] = dc * c_prev * f * (1.0 - f)
        dz[:, 2 * H : 3 * H] = dc * i * (1.0 - g * g)
        dz[:, 3 * H :] = dh * tc * o * (1.0 - o)
        dW += x[:, t].T @ dz
        dU += h_prev.T @ dz
        db += dz.sum(axis=0)
        dx[:, t] = dz @ W.T
        dh_next = dz @ U.T
        dc_next = dc * f
    return dx, dW, dU, db


def dropout_masks(cfg: ModelConfig, batch: int, lookback: int, rng: np.random.Generator):
    """Inverted-dropout masks for layer-1 outputs (B, T, H1) and the final layer-2 state (B, H2)."""
    keep = 1.0 - cfg.dropout_rate
    m1 = (rng.random((batch, lookback, cfg.input_units)) < keep) / keep
    m2 = (rng.random((batch, cfg.hidden_units)) < keep) / keep
    return m1, m2


def _check_input(X: np.ndarray, model: LstmModel) -> np.ndarray:
    cfg = model.config
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :, None]
    elif X.ndim == 2:
        X = X[:, :, None]
    if X.shape[2] != cfg.n_features:
        raise LengthMismatch(f"{X.shape[2]} features per step, model expects {cfg.n_features}")
    if not np.all(np.isfinite(X)):
        raise NonFiniteInput("input sequence contains non-finite values")
    return (X - model.input_mean) / model.input_scale


def _forward_full(model: LstmModel, X: np.ndarray, masks):
    p = model.params
    hs1, cache1 = _lstm_forward(X, p["W1"], p["U1"], p["b1"])
    h1 = hs1 if masks is None else hs1 * masks[0]
    hs2, cache2 = _lstm_forward(h1, p["W2"], p["U2"], p["b2"])
    h2 = hs2[:, -1]
    h2d = h2 if masks is None else h2 * masks[1]
    logits = (h2d @ p["Wd"] + p["bd"])[:, 0]
    return logits, (hs1, cache1, h1, hs2, cache2, h2d)


def layer1_outputs(model: LstmModel, X) -> np.ndarray:
    """Deterministic layer-1 hidden states, shape (B, T, H1)."""
    X = _check_input(X, model)
    p = model.params
    return _lstm_forward(X, p["W1"], p["U1"], p["b1"])[0]


def predict_proba(model: LstmModel, X, training: bool = False, rng: np.random.Generator | None = None) -> np.ndarray:
    X = _check_input(X, model)
    masks = None
    if training and model.config.dropout_rate > 0:
        if rng is None:
            raise ValueError("training=True needs an rng for the dropout masks")
        masks = dropout_masks(model.config, X.shape[0], X.shape[1], rng)
    logits, _ = _forward_full(model, X, masks)
    return _sigmoid(logits)


def forward(model: LstmModel, sequence, training: bool = False, rng: np.random.Generator | None = None) -> float:
    """Probability that ``sequence`` (lookback values, or lookback x features) is injected."""
    seq = np.asarray(sequence, dtype=np.float64)
    if seq.ndim == 1:
        seq = seq[:, None]
    return float(predict_proba(model, seq[None], training, rng)[0])


def bce_from_logits(logits: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.maximum(logits, 0.0) - logits * y + np.log1p(np.exp(-np.abs(logits)))


def loss_and_grads(model: LstmModel, X, y, masks=None) -> tuple[float, dict[str, np.ndarray]]:
    """Mean binary cross-entropy and its gradient for every parameter.

    ``masks`` are fixed dropout masks from :func:`dropout_masks`, or None for
    the deterministic network.
    """
    X = _check_input(X, model)
    y = np.asarray(y, dtype=np.float64).ravel()
    B = X.shape[0]
    p = model.params
    logits, (hs1, cache1, h1, hs2, cache2, h2d) = _forward_full(model, X, masks)
    loss = float(np.mean(bce_from_logits(logits, y)))

    dlogit = (_sigmoid(logits) - y)[:, None] / B
    g = {"Wd": h2d.T @ dlogit, "bd": dlogit.sum(axis=0)}
    dh2 = dlogit @ p["Wd"].T
    if masks is not None:
        dh2 = dh2 * masks[1]
    dhs2 = np.zeros_like(hs2)
    dhs2[:, -1] = dh2
    dh1, g["W2"], g["U2"], g["b2"] = _lstm_backward(h1, p["W2"], p["U2"], cache2, dhs2)
    if masks is not None:
        dh1 = dh1 * masks[0]
    _, g["W1"], g["U1"], g["b1"] = _lstm_backward(X, p["W1"], p["U1"], cache1, dh1)
    return loss, g


# --------------------------------------------------------------------------
# datasets


@dataclass
class LabeledSequenceDataset:
    X: np.ndarray  # (N, lookback, n_features)
    y: np.ndarray  # (N,) int 0/1
    n_train: int
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        if self.X.ndim == 2:
            self.X = self.X[:, :, None]
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.shape[0] != self.y.shape[0]:
            raise LengthMismatch(f"{self.X.shape[0]} sequences for {self.y.shape[0]} labels")
        if not np.isin(self.y, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")

    def __len__(self) -> int:
        return self.y.shape[0]

    @property
    def lookback(self) -> int:
        return self.X.shape[1]

    @property
    def train(self) -> tuple[np.ndarray, np.ndarray]:
        return self.X[: self.n_train], self.y[: self.n_train]

    @property
    def test(self) -> tuple[np.ndarray, np.ndarray]:
        return self.X[self.n_train :], self.y[self.n_train :]

    @property
    def samples(self) -> list[tuple[np.ndarray, int]]:
        return [(self.X[i, :, 0] if self.X.shape[2] == 1 else self.X[i], int(self.y[i])) for i in range(len(self))]


def _series_tuple(s) -> tuple[SimilaritySeries, ...]:
    return (s,) if isinstance(s, SimilaritySeries) else tuple(s)


def build_constructed_dataset(
    benign: SimilaritySeries | Sequence[SimilaritySeries],
    injected: SimilaritySeries | Sequence[SimilaritySeries],
    lookback: int = 10,
    train_fraction: float = 2 / 3,
) -> LabeledSequenceDataset:
    """Append the injected series to the benign one and slide a window over it.

    Each sample is ``lookback`` consecutive values (stride 1) labelled by its
    last value. Unlabelled benign values count as benign, unlabelled
    injected values as injected. The split is chronological. Passing a
    sequence of series (e.g. cosine and Pearson) stacks them as features.
    """
    ben = _series_tuple(benign)
    inj = _series_tuple(injected)
    if len(ben) != len(inj) or not ben:
        raise MetricMismatch("benign and injected need the same number of feature series")
    for b, i in zip(ben, inj):
        if b.metric != i.metric:
            raise MetricMismatch(f"benign series is {b.metric.value}, injected is {i.metric.value}")
        if b.window_size != i.window_size:
            raise MetricMismatch(f"window sizes differ: {b.window_size} vs {i.window_size}")
    for group in (ben, inj):
        if len({len(s) for s in group}) != 1:
            raise LengthMismatch("feature series of one log must have equal length")
    feats = np.stack([np.concatenate([b.values, i.values]) for b, i in zip(ben, inj)], axis=1)
    lab_b = ben[0].labels if ben[0].labels is not None else np.zeros(len(ben[0]), dtype=bool)
    lab_i = inj[0].labels if inj[0].labels is not None else np.ones(len(inj[0]), dtype=bool)
    labels = np.concatenate([lab_b, lab_i]).astype(np.int64)
    total = feats.shape[0]
    if lookback < 1 or total < lookback:
        raise TooShort(f"{total} values cannot fill a lookback of {lookback}")
    n = total - lookback + 1
    idx = np.arange(n)[:, None] + np.arange(lookback)[None, :]
    X = feats[idx]
    y = labels[lookback - 1 :]
    provenance = {
        "metrics": [s.metric.value for s in ben],
        "window_size": ben[0].window_size,
        "benign_values": len(ben[0]),
        "injected_values": len(inj[0]),
        "lookback": lookback,
    }
    return LabeledSequenceDataset(X, y, int(math.floor(n * train_fraction)), provenance)


# --------------------------------------------------------------------------
# training


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    train_acc: float


def write_history_csv(history: Sequence[EpochRecord], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["epoch", "loss", "train_acc"])
    for r in history:
        w.writerow([r.epoch, repr(r.loss), repr(r.train_acc)])


class Adam:
    def __init__(self, params: dict[str, np.ndarray], lr: float, beta1: float, beta2: float, eps: float):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for k, g in grads.items():
            m = self.m[k]
            v = self.v[k]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            params[k] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def train(
    dataset: LabeledSequenceDataset,
    config: ModelConfig | None = None,
    model: LstmModel | None = None,
) -> tuple[LstmModel, list[EpochRecord]]:
    """Fit on the training split with mini-batch Adam.

    Samples are reshuffled every epoch with the seeded generator, which also
    draws the dropout masks. ``loss`` in the history is the mean training
    loss of the epoch; ``train_acc`` is measured afterwards without dropout.
    """
    cfg = config or ModelConfig()
    if cfg.n_features != dataset.X.shape[2] or cfg.lookback != dataset.lookback:
        cfg = ModelConfig(**{**asdict(cfg), "n_features": dataset.X.shape[2], "lookback": dataset.lookback})
    Xtr, ytr = dataset.train
    if ytr.size == 0:
        raise SingleClass("training split is empty")
    if ytr.min() == ytr.max():
        raise SingleClass("training split holds a single class")
    rng = np.random.default_rng(cfg.seed)
    if model is None:
        model = init_model(cfg, rng)
        if cfg.standardize:
            flat = Xtr.reshape(-1, Xtr.shape[2])
            sd = flat.std(axis=0)
            model.input_mean = flat.mean(axis=0)
            model.input_scale = np.where(sd > 0, sd, 1.0)
    else:
        model = model.copy()
    opt = Adam(model.params, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps)
    history: list[EpochRecord] = []
    n = ytr.size
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for s in range(0, n, cfg.batch_size):
            idx = order[s : s + cfg.batch_size]
            xb, yb = Xtr[idx], ytr[idx]
            masks = dropout_masks(cfg, idx.size, xb.shape[1], rng) if cfg.dropout_rate > 0 else None
            loss, grads = loss_and_grads(model, xb, yb, masks)
            opt.step(model.params, grads)
            if not model.all_finite():
                raise DivergedNonFinite(epoch)
            total += loss * idx.size
        acc = float(np.mean((predict_proba(model, Xtr) >= 0.5) == ytr))
        history.append(EpochRecord(epoch, total / n, acc))
    return model, history


@dataclass
class Prediction:
    probabilities: np.ndarray
    verdicts: np.ndarray
    accuracy: float | None


def predict(model: LstmModel, data: LabeledSequenceDataset | np.ndarray, labels=None) -> Prediction:
    """Verdict is ``p >= 0.5``. A dataset is scored on its test split."""
    if isinstance(data, LabeledSequenceDataset):
        X, labels = data.test
    else:
        X = data
    p = predict_proba(model, X)
    verdicts = (p >= 0.5).astype(np.int64)
    acc = None if labels is None else float(np.mean(verdicts == np.asarray(labels)))
    return Prediction(p, verdicts, acc)

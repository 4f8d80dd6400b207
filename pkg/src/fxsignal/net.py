"""From-scratch stacked-LSTM binary classifier.

Forward pass, backpropagation through time, mini-batch SGD with momentum on
binary cross-entropy, inter-layer dropout, finite-difference gradient
checking, and a versioned npz checkpoint format.  All randomness flows from
a single seed; training is bit-reproducible.  The per-timestep recurrence
runs on the selected kernel backend (compiled or numpy).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from ._backend import lstm_backward_loop, lstm_forward_loop
from .dataset import WindowedDataset
from .errors import ConfigError, PreconditionError, TrainingDivergedError

CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class LstmConfig:
    layers: int = 1
    hidden_size: int = 32
    back_days: int = 20
    epochs: int = 20
    dropout_rate: float = 0.1
    learning_rate: float = 0.001
    momentum: float = 0.9
    batch_size: int = 32
    seed: int = 0
    l1_penalty: float = 0.0

    def __post_init__(self):
        if min(self.layers, self.hidden_size, self.back_days, self.batch_size) < 1:
            raise ConfigError("layers, hidden_size, back_days, batch_size must be positive")
        if self.epochs < 0:
            raise ConfigError("epochs must be non-negative")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError("dropout_rate must be in [0, 1)")


@dataclass
class TrainReport:
    seed: int
    epoch_loss: list[float] = field(default_factory=list)
    epoch_acc: list[float] = field(default_factory=list)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class LstmNetwork:
    """Stacked LSTM layers plus a single-logit output head."""

    def __init__(self, input_dim: int, hidden_size: int, layers: int, seed: int = 0):
        if input_dim < 1:
            raise ConfigError("input_dim must be positive")
        self.input_dim = input_dim
        self.hidden_size = hidden_size
        self.layers = layers
        rng = np.random.default_rng(seed)
        k = 1.0 / np.sqrt(hidden_size)
        self.wx: list[np.ndarray] = []
        self.wh: list[np.ndarray] = []
        self.b: list[np.ndarray] = []
        dim = input_dim
        for _ in range(layers):
            self.wx.append(rng.uniform(-k, k, size=(dim, 4 * hidden_size)))
            self.wh.append(rng.uniform(-k, k, size=(hidden_size, 4 * hidden_size)))
            bias = np.zeros(4 * hidden_size)
            bias[hidden_size: 2 * hidden_size] = 1.0  # forget-gate bias
            self.b.append(bias)
            dim = hidden_size
        self.w_out = rng.uniform(-k, k, size=hidden_size)
        self.b_out = np.zeros(1)

    # --- parameter plumbing -------------------------------------------------

    def parameters(self) -> list[np.ndarray]:
        params: list[np.ndarray] = []
        for l in range(self.layers):
            params += [self.wx[l], self.wh[l], self.b[l]]
        params += [self.w_out, self.b_out]
        return params

    # --- forward / backward -------------------------------------------------

    def _run(self, x: np.ndarray, dropout_rate: float = 0.0, rng: np.random.Generator | None = None):
        """Process a batch (B, T, D); returns probabilities and layer caches."""
        if x.ndim != 3 or x.shape[2] != self.input_dim:
            raise PreconditionError(f"expected input (B, T, {self.input_dim}), got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise PreconditionError("non-finite values in network input")
        B, T, _ = x.shape
        H = self.hidden_size
        inp = np.ascontiguousarray(x.transpose(1, 0, 2))  # (T, B, D)
        caches = []
        for l in range(self.layers):
            pre = inp.reshape(T * B, -1) @ self.wx[l] + self.b[l]
            pre = np.ascontiguousarray(pre.reshape(T, B, 4 * H))
            h_all = np.empty((T, B, H))
            c_all = np.empty((T, B, H))
            lstm_forward_loop(pre, self.wh[l], h_all, c_all)
            mask = None
            out = h_all
            if dropout_rate > 0.0 and l < self.layers - 1:
                mask = (rng.random((T, B, H)) >= dropout_rate) / (1.0 - dropout_rate)
                out = h_all * mask
            caches.append({"inp": inp, "gates": pre, "c": c_all, "h": h_all, "mask": mask})
            inp = np.ascontiguousarray(out)
        h_last = caches[-1]["h"][-1]
        logit = h_last @ self.w_out + self.b_out[0]
        prob = _sigmoid(logit)
        return prob, caches

    def forward(self, sample: np.ndarray) -> float:
        """Probability for one (back_days, feature_dim) sample; dropout off."""
        prob, _ = self._run(np.asarray(sample, dtype=np.float64)[None, :, :])
        return float(prob[0])

    def predict_batch(self, x: np.ndarray) -> np.ndarray:
        prob, _ = self._run(np.asarray(x, dtype=np.float64))
        return prob

    def _backward(self, caches, dlogit: np.ndarray) -> list[np.ndarray]:
        """Gradients in the order of parameters(), given d(loss)/d(logit)."""
        T, B, H = caches[-1]["h"].shape
        h_last = caches[-1]["h"][-1]
        d_w_out = h_last.T @ dlogit
        d_b_out = np.array([dlogit.sum()])
        d_up = np.zeros((T, B, H))
        d_up[-1] = np.outer(dlogit, self.w_out)
        grads_per_layer: list[list[np.ndarray]] = [None] * self.layers
        for l in range(self.layers - 1, -1, -1):
            cache = caches[l]
            if cache["mask"] is not None:
                d_up = d_up * cache["mask"]
            da = np.empty_like(cache["gates"])
            wh_t = np.ascontiguousarray(self.wh[l].T)
            lstm_backward_loop(cache["gates"], cache["c"], wh_t, np.ascontiguousarray(d_up), da)
            inp = cache["inp"]
            D = inp.shape[2]
            da_flat = da.reshape(T * B, 4 * H)
            d_wx = inp.reshape(T * B, D).T @ da_flat
            h_prev = np.concatenate([np.zeros((1, B, H)), cache["h"][:-1]], axis=0)
            d_wh = h_prev.reshape(T * B, H).T @ da_flat
            d_b = da_flat.sum(axis=0)
            grads_per_layer[l] = [d_wx, d_wh, d_b]
            if l > 0:
                d_up = (da_flat @ self.wx[l].T).reshape(T, B, D)
        grads: list[np.ndarray] = []
        for layer_grads in grads_per_layer:
            grads += layer_grads
        grads += [d_w_out, d_b_out]
        return grads

    def loss_and_grads(
        self,
        x: np.ndarray,
        y: np.ndarray,
        dropout_rate: float = 0.0,
        rng: np.random.Generator | None = None,
        l1_penalty: float = 0.0,
    ) -> tuple[float, np.ndarray, list[np.ndarray]]:
        """Mean BCE loss, probabilities, and parameter gradients for a batch."""
        prob, caches = self._run(x, dropout_rate, rng)
        B = len(y)
        eps = 1e-12
        p = np.clip(prob, eps, 1.0 - eps)
        loss = float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))
        dlogit = (prob - y) / B
        grads = self._backward(caches, dlogit)
        if l1_penalty > 0.0:
            weights = self._weight_indices()
            params = self.parameters()
            for i in weights:
                loss += l1_penalty * float(np.abs(params[i]).sum())
                grads[i] = grads[i] + l1_penalty * np.sign(params[i])
        return loss, prob, grads

    def _weight_indices(self) -> list[int]:
        """Indices of weight matrices (not biases) in parameters()."""
        idx = []
        for l in range(self.layers):
            idx += [3 * l, 3 * l + 1]
        idx.append(3 * self.layers)  # w_out
        return idx


def train(net: LstmNetwork, dataset: WindowedDataset, cfg: LstmConfig) -> TrainReport:
    """Mini-batch SGD with momentum on BCE; deterministic given cfg.seed."""
    if len(dataset) == 0:
        raise PreconditionError("training dataset is empty")
    rng = np.random.default_rng(cfg.seed)
    params = net.parameters()
    velocity = [np.zeros_like(p) for p in params]
    report = TrainReport(seed=cfg.seed)
    n = len(dataset)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        total_loss = 0.0
        correct = 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start: start + cfg.batch_size]
            xb = dataset.x[idx]
            yb = dataset.y[idx]
            loss, prob, grads = net.loss_and_grads(
                xb, yb, dropout_rate=cfg.dropout_rate, rng=rng, l1_penalty=cfg.l1_penalty
            )
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch)
            total_loss += loss * len(idx)
            correct += int(((prob >= 0.5).astype(float) == yb).sum())
            for p, v, g in zip(params, velocity, grads):
                v *= cfg.momentum
                v -= cfg.learning_rate * g
                p += v
        report.epoch_loss.append(total_loss / n)
        report.epoch_acc.append(correct / n)
    return report


def predict_series(net: LstmNetwork, dataset: WindowedDataset, batch_size: int = 256) -> np.ndarray:
    """Ordered probabilities for every sample; dropout disabled."""
    probs = []
    for start in range(0, len(dataset), batch_size):
        probs.append(net.predict_batch(dataset.x[start: start + batch_size]))
    return np.concatenate(probs) if probs else np.empty(0)


def gradient_check(net: LstmNetwork, sample: np.ndarray, label: float,
                   step: float = 1e-5, floor: float = 1e-6) -> float:
    """Max relative error of analytic vs central finite-difference gradients.

    The denominator is floored at `floor`: central differences at this step
    size carry ~eps*|loss|/step of roundoff noise (~1e-11), so components
    smaller than the floor are effectively compared absolutely -- a relative
    comparison against an unresolvable numeric gradient is meaningless.
    """
    x = np.asarray(sample, dtype=np.float64)[None, :, :]
    y = np.array([float(label)])
    _, _, grads = net.loss_and_grads(x, y)

    def loss_only() -> float:
        loss, _, _ = net.loss_and_grads(x, y)
        return loss

    max_rel = 0.0
    for p, g in zip(net.parameters(), grads):
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = loss_only()
            flat[i] = orig - step
            down = loss_only()
            flat[i] = orig
            numeric = (up - down) / (2.0 * step)
            denom = max(abs(numeric), abs(gflat[i]), floor)
            max_rel = max(max_rel, abs(numeric - gflat[i]) / denom)
    return max_rel


def save_checkpoint(
    net: LstmNetwork,
    cfg: LstmConfig,
    path: str,
    feature_names: list[str] | None = None,
    scale_min: np.ndarray | None = None,
    scale_max: np.ndarray | None = None,
    split_fraction: float | None = None,
) -> None:
    """Versioned npz container: config, parameters, and the fitted scaler."""
    meta = {
        "version": CHECKPOINT_VERSION,
        "input_dim": net.input_dim,
        "config": asdict(cfg),
        "feature_names": feature_names or [],
        "split_fraction": split_fraction,
    }
    arrays: dict[str, np.ndarray] = {"meta": np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8)}
    for l in range(net.layers):
        arrays[f"wx_{l}"] = net.wx[l]
        arrays[f"wh_{l}"] = net.wh[l]
        arrays[f"b_{l}"] = net.b[l]
    arrays["w_out"] = net.w_out
    arrays["b_out"] = net.b_out
    if scale_min is not None:
        arrays["scale_min"] = scale_min
        arrays["scale_max"] = scale_max
    np.savez(path, **arrays)


def load_checkpoint(path: str):
    """Rebuild (net, cfg, meta, scale_min, scale_max) from an npz checkpoint."""
    data = np.load(path)
    meta = json.loads(bytes(data["meta"]).decode())
    if meta.get("version") != CHECKPOINT_VERSION:
        raise ConfigError(f"unsupported checkpoint version {meta.get('version')}")
    cfg = LstmConfig(**meta["config"])
    net = LstmNetwork(meta["input_dim"], cfg.hidden_size, cfg.layers, seed=cfg.seed)
    for l in range(net.layers):
        net.wx[l] = data[f"wx_{l}"].copy()
        net.wh[l] = data[f"wh_{l}"].copy()
        net.b[l] = data[f"b_{l}"].copy()
    net.w_out = data["w_out"].copy()
    net.b_out = data["b_out"].copy()
    scale_min = data["scale_min"].copy() if "scale_min" in data else None
    scale_max = data["scale_max"].copy() if "scale_max" in data else None
    return net, cfg, meta, scale_min, scale_max

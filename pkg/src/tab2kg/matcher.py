"""One-shot column mapping: a Siamese encoder over jointly normalized profiles.

Both profiles of a pair are normalized feature-wise against the sum of their
magnitudes, encoded by a shared ReLU layer, and scored through a sigmoid on
the absolute encoding difference. Training minimizes binary cross-entropy
with Adam updates and early stopping on validation accuracy. Everything is
seeded and bitwise deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CorruptModelError,
    DegenerateDatasetError,
    DimensionMismatchError,
    NonFiniteInputError,
    VersionMismatchError,
)
from .profiler import FEATURE_COUNT, DomainProfile, ColumnProfile, FeatureVector

MODEL_FORMAT = "TAB2KG-MODEL"
MODEL_VERSION = 1

DEFAULT_HIDDEN_DIM = 256
SCORE_THRESHOLD = 0.5

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class SiameseModel:
    w1: np.ndarray  # (hidden, input)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden,)
    b2: float
    version: int = MODEL_VERSION

    @property
    def input_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[0]

    def parameters(self):
        return [self.w1, self.b1, self.w2, np.array([self.b2])]

    def copy(self) -> "SiameseModel":
        return SiameseModel(self.w1.copy(), self.b1.copy(), self.w2.copy(),
                            float(self.b2), self.version)


@dataclass(frozen=True)
class TrainingPair:
    a: FeatureVector
    b: FeatureVector
    label: float

    def __post_init__(self):
        if self.label not in (0.0, 1.0):
            raise ValueError("pair labels are binary")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 1000
    batch_size: int = 100
    learning_rate: float = 0.0001
    patience: int = 100
    validation_fraction: float = 0.1
    hidden_dim: int = DEFAULT_HIDDEN_DIM
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size <= 0 or self.learning_rate <= 0:
            raise ValueError("epochs/batch size/learning rate must be positive")
        if not 0 < self.validation_fraction < 1:
            raise ValueError("validation fraction must be in (0, 1)")


@dataclass
class TrainResult:
    model: SiameseModel
    history: list[dict] = field(default_factory=list)


def init_model(input_dim: int = FEATURE_COUNT,
               hidden_dim: int = DEFAULT_HIDDEN_DIM,
               seed: int = 0) -> SiameseModel:
    """Glorot-uniform initialization, fully determined by the seed."""
    rng = np.random.Generator(np.random.PCG64(seed))
    limit1 = np.sqrt(6.0 / (input_dim + hidden_dim))
    w1 = rng.uniform(-limit1, limit1, size=(hidden_dim, input_dim))
    limit2 = np.sqrt(6.0 / (hidden_dim + 1))
    w2 = rng.uniform(-limit2, limit2, size=hidden_dim)
    return SiameseModel(w1=w1, b1=np.zeros(hidden_dim), w2=w2, b2=0.0)


# --- pair normalization ---------------------------------------------------------


def normalize_pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    """Joint feature-wise normalization: divide by |a_i| + |b_i|.

    Signs are preserved, a zero denominator maps both sides to zero, and
    matching features land on (0.5, 0.5) regardless of scale.
    """
    va = np.asarray(a.values if isinstance(a, FeatureVector) else a, dtype=float)
    vb = np.asarray(b.values if isinstance(b, FeatureVector) else b, dtype=float)
    if va.shape != vb.shape:
        raise DimensionMismatchError(f"{va.shape} vs {vb.shape}")
    if not (np.isfinite(va).all() and np.isfinite(vb).all()):
        raise NonFiniteInputError("feature vectors must be finite")
    denom = np.abs(va) + np.abs(vb)
    safe = np.where(denom == 0.0, 1.0, denom)
    na = np.where(denom == 0.0, 0.0, va / safe)
    nb = np.where(denom == 0.0, 0.0, vb / safe)
    return na, nb


def _sigmoid(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _encode(model: SiameseModel, x: np.ndarray) -> np.ndarray:
    return np.maximum(x @ model.w1.T + model.b1, 0.0)


def _forward(model: SiameseModel, xa: np.ndarray, xb: np.ndarray) -> np.ndarray:
    diff = np.abs(_encode(model, xa) - _encode(model, xb))
    return _sigmoid(diff @ model.w2 + model.b2)


def score_pair(a, b, model: SiameseModel) -> float:
    """Similarity in [0, 1]; symmetric in its two arguments."""
    na, nb = normalize_pair(a, b)
    if na.shape[0] != model.input_dim:
        raise DimensionMismatchError(
            f"vector dim {na.shape[0]} vs model input {model.input_dim}")
    return float(_forward(model, na[None, :], nb[None, :])[0])


# --- training -------------------------------------------------------------------


def _bce_loss_and_grads(model, xa, xb, y):
    za = xa @ model.w1.T + model.b1
    zb = xb @ model.w1.T + model.b1
    ea, eb = np.maximum(za, 0.0), np.maximum(zb, 0.0)
    u = ea - eb
    d = np.abs(u)
    logits = d @ model.w2 + model.b2
    # stable BCE on logits: softplus(z) - y*z
    loss = float(np.mean(np.logaddexp(0.0, logits) - y * logits))
    p = _sigmoid(logits)
    dlogits = (p - y) / len(y)
    gw2 = d.T @ dlogits
    gb2 = float(np.sum(dlogits))
    dd = np.outer(dlogits, model.w2)
    du = dd * np.sign(u)
    dza = du * (za > 0)
    dzb = -du * (zb > 0)
    gw1 = dza.T @ xa + dzb.T @ xb
    gb1 = (dza + dzb).sum(axis=0)
    return loss, [gw1, gb1, gw2, np.array([gb2])]


def _bce_loss(model, xa, xb, y) -> float:
    logits = np.abs(_encode(model, xa) - _encode(model, xb)) @ model.w2 + model.b2
    return float(np.mean(np.logaddexp(0.0, logits) - y * logits))


def _accuracy(model, xa, xb, y, threshold=SCORE_THRESHOLD) -> float:
    predictions = _forward(model, xa, xb) > threshold
    return float(np.mean(predictions == (y > 0.5)))


class _Adam:
    def __init__(self, shapes, lr):
        self.lr = lr
        self.t = 0
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]

    def step(self, params, grads):
        self.t += 1
        out = []
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = ADAM_BETA1 * self.m[i] + (1 - ADAM_BETA1) * g
            self.v[i] = ADAM_BETA2 * self.v[i] + (1 - ADAM_BETA2) * g * g
            m_hat = self.m[i] / (1 - ADAM_BETA1 ** self.t)
            v_hat = self.v[i] / (1 - ADAM_BETA2 ** self.t)
            out.append(p - self.lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS))
        return out


def _pairs_to_arrays(pairs: list[TrainingPair]):
    xa = np.empty((len(pairs), len(pairs[0].a.values)))
    xb = np.empty_like(xa)
    y = np.empty(len(pairs))
    for i, pair in enumerate(pairs):
        xa[i], xb[i] = normalize_pair(pair.a, pair.b)
        y[i] = pair.label
    return xa, xb, y


def train(pairs: list[TrainingPair], config: TrainConfig = TrainConfig()) -> TrainResult:
    """Mini-batch Adam on binary cross-entropy with seeded determinism.

    Stops early when validation accuracy has not improved for
    ``config.patience`` epochs (ties broken by lower validation loss) and
    returns the best-validation parameters.
    """
    labels = {p.label for p in pairs}
    if labels != {0.0, 1.0}:
        raise DegenerateDatasetError(
            "training needs at least one positive and one negative pair")
    xa, xb, y = _pairs_to_arrays(pairs)
    input_dim = xa.shape[1]
    model = init_model(input_dim, config.hidden_dim, seed=config.seed)
    if config.epochs == 0:
        return TrainResult(model=model, history=[])

    rng = np.random.Generator(np.random.PCG64(config.seed + 1))
    order = rng.permutation(len(pairs))
    n_val = max(1, int(round(len(pairs) * config.validation_fraction)))
    if n_val >= len(pairs):
        n_val = len(pairs) - 1
    val_idx, train_idx = order[:n_val], order[n_val:]
    xa_tr, xb_tr, y_tr = xa[train_idx], xb[train_idx], y[train_idx]
    xa_va, xb_va, y_va = xa[val_idx], xb[val_idx], y[val_idx]

    optimizer = _Adam([p.shape for p in model.parameters()], config.learning_rate)
    history: list[dict] = []
    best = model.copy()
    best_acc, best_loss, best_epoch = -1.0, np.inf, 0
    for epoch in range(config.epochs):
        perm = rng.permutation(len(train_idx))
        epoch_loss = 0.0
        for start in range(0, len(perm), config.batch_size):
            batch = perm[start:start + config.batch_size]
            loss, grads = _bce_loss_and_grads(
                model, xa_tr[batch], xb_tr[batch], y_tr[batch])
            epoch_loss += loss * len(batch)
            new_params = optimizer.step(model.parameters(), grads)
            model.w1, model.b1, model.w2 = new_params[0], new_params[1], new_params[2]
            model.b2 = float(new_params[3][0])
        val_acc = _accuracy(model, xa_va, xb_va, y_va)
        val_loss = _bce_loss(model, xa_va, xb_va, y_va)
        history.append({
            "epoch": epoch,
            "train_loss": epoch_loss / len(train_idx),
            "val_loss": val_loss,
            "val_accuracy": val_acc,
        })
        if val_acc > best_acc or (val_acc == best_acc and val_loss < best_loss):
            best, best_acc, best_loss, best_epoch = model.copy(), val_acc, val_loss, epoch
        if epoch - best_epoch >= config.patience:
            break
    return TrainResult(model=best, history=history)


# --- persistence ----------------------------------------------------------------


def save_model(model: SiameseModel, sink) -> None:
    """Line-oriented text format; full float precision (repr round-trip)."""
    lines = [f"{MODEL_FORMAT} {model.version}",
             f"dims {model.input_dim} {model.hidden_dim}"]
    for row in model.w1:
        lines.append(" ".join(repr(float(x)) for x in row))
    lines.append(" ".join(repr(float(x)) for x in model.b1))
    lines.append(" ".join(repr(float(x)) for x in model.w2))
    lines.append(repr(float(model.b2)))
    text = "\n".join(lines) + "\n"
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        with open(sink, "w", encoding="utf-8") as handle:
            handle.write(text)


def load_model(source) -> SiameseModel:
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as handle:
            text = handle.read()
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise CorruptModelError("empty model file")
    header = lines[0].split()
    if len(header) != 2 or header[0] != MODEL_FORMAT:
        raise CorruptModelError(f"bad header {lines[0]!r}")
    if header[1] != str(MODEL_VERSION):
        raise VersionMismatchError(
            f"model format version {header[1]}, supported {MODEL_VERSION}")
    try:
        tag, input_dim, hidden_dim = lines[1].split()
        if tag != "dims":
            raise ValueError
        input_dim, hidden_dim = int(input_dim), int(hidden_dim)
    except (ValueError, IndexError):
        raise CorruptModelError("missing dims line") from None
    expected = hidden_dim + 3
    rows = lines[2:]
    if len(rows) != expected:
        raise CorruptModelError(
            f"expected {expected} parameter lines, found {len(rows)}")
    try:
        w1 = np.array([[float(x) for x in rows[i].split()] for i in range(hidden_dim)])
        b1 = np.array([float(x) for x in rows[hidden_dim].split()])
        w2 = np.array([float(x) for x in rows[hidden_dim + 1].split()])
        b2 = float(rows[hidden_dim + 2])
    except ValueError:
        raise CorruptModelError("unparseable parameter value") from None
    if w1.shape != (hidden_dim, input_dim) or b1.shape != (hidden_dim,) \
            or w2.shape != (hidden_dim,):
        raise CorruptModelError("parameter shapes do not match dims")
    if not all(np.isfinite(p).all() for p in (w1, b1, w2, np.array([b2]))):
        raise CorruptModelError("non-finite parameter")
    return SiameseModel(w1=w1, b1=b1, w2=w2, b2=b2)


# --- candidate generation ---------------------------------------------------------


def candidate_mappings(
    table_profiles: list[ColumnProfile],
    domain_profile: DomainProfile,
    model: SiameseModel,
    threshold: float = SCORE_THRESHOLD,
) -> dict[str, list[tuple[tuple[str, str], float]]]:
    """Score every column against every relation of the same coarse type.

    Returns, per column (in table order), candidates with score strictly
    above the threshold, sorted by descending score with lexicographic
    relation ties.
    """
    relations = sorted(domain_profile.relation_profiles.values(),
                       key=lambda r: r.key)
    candidates: dict[str, list[tuple[tuple[str, str], float]]] = {}
    for column in table_profiles:
        scored = []
        for relation in relations:
            if relation.typing.coarse != column.typing.coarse:
                continue
            score = score_pair(column.vector, relation.vector, model)
            if score > threshold:
                scored.append((relation.key, score))
        scored.sort(key=lambda item: (-item[1], item[0]))
        candidates[column.column_id] = scored
    return candidates

"""Dataset ingestion, synthetic generators, and the simple baseline
representation learners used by the end-to-end pipeline.

CSV conventions: header row; UTF-8; LF line endings; '.' decimal separator.
The representation exchange format is ``row_id,z_0,...,z_{d-1},y,a`` with
strictly increasing integer row ids.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .classification import joint_from_probabilities
from .gaussian import GaussianModel
from .linalg import psd_sqrt
from .metrics import InfoPlaneError, RepresentationSample


class DataError(InfoPlaneError, ValueError):
    """Malformed input files or schema mismatches."""


class TrainingError(InfoPlaneError, RuntimeError):
    """Baseline training diverged or hit a singular system."""


@dataclass(frozen=True)
class TabularDataset:
    """Numeric design matrix with named columns and role assignments."""

    feature_names: tuple[str, ...]
    x: np.ndarray
    y: np.ndarray
    a: np.ndarray
    target_name: str = "y"
    attribute_name: str = "a"

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 2:
            raise DataError("feature matrix must be 2-D")
        y = np.asarray(self.y, dtype=float).ravel()
        a = np.asarray(self.a, dtype=float).ravel()
        if x.shape[0] != y.shape[0] or x.shape[0] != a.shape[0]:
            raise DataError("features, target, attribute must be aligned")
        if len(self.feature_names) != x.shape[1]:
            raise DataError("feature_names must match the matrix width")
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    def is_classification(self) -> bool:
        return bool(np.isin(self.y, (0.0, 1.0)).all() and np.isin(self.a, (0.0, 1.0)).all())


def _format_value(v: float) -> str:
    return repr(float(v))


def save_dataset_csv(path: str, dataset: TabularDataset) -> None:
    """Write a dataset so that a reload is value-identical."""
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([dataset.target_name, dataset.attribute_name, *dataset.feature_names])
        for i in range(dataset.n):
            writer.writerow(
                [_format_value(dataset.y[i]), _format_value(dataset.a[i])]
                + [_format_value(v) for v in dataset.x[i]]
            )


def load_csv(
    path: str,
    schema: dict[str, object],
    roles: dict[str, object],
    split: dict[str, object] | None = None,
) -> tuple[TabularDataset, TabularDataset]:
    """Load a CSV, one-hot expand declared categoricals, and split.

    ``schema`` maps column name to "continuous", "discrete" (levels inferred
    from the training split), or an explicit list of discrete levels.
    ``roles`` holds target, attribute, and the feature column list.  The
    split is a deterministic shuffle under the given seed with a floor rule
    on the training size; ``split=None`` keeps everything in the first
    dataset.  Unseen discrete levels in the test split one-hot to all zeros
    with a warning.
    """
    target = roles["target"]
    attribute = roles["attribute"]
    features = list(roles["features"])
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = [row for row in reader if row]
    missing = [c for c in [target, attribute, *features] if c not in header]
    if missing:
        raise DataError(f"{path}: missing columns {missing}")
    col_idx = {name: header.index(name) for name in header}
    n = len(rows)
    if n < 1:
        raise DataError(f"{path}: no data rows")

    def parse_numeric(name: str) -> np.ndarray:
        out = np.empty(n)
        j = col_idx[name]
        for i, row in enumerate(rows):
            try:
                out[i] = float(row[j])
            except (ValueError, IndexError):
                raise DataError(f"{path}: non-numeric value {row[j]!r} in column {name!r} row {i}") from None
        return out

    y_all = parse_numeric(target)
    a_all = parse_numeric(attribute)

    if split is None:
        train_idx = np.arange(n)
        test_idx = np.arange(0)
    else:
        rng = np.random.default_rng(int(split.get("seed", 0)))
        perm = rng.permutation(n)
        n_train = int(math.floor(float(split["train_frac"]) * n))
        train_idx, test_idx = perm[:n_train], perm[n_train:]

    # one-hot levels come from declarations or from the training split only
    blocks_train: list[np.ndarray] = []
    blocks_test: list[np.ndarray] = []
    names: list[str] = []
    for col in features:
        kind = schema.get(col, "continuous")
        if kind == "continuous":
            vals = parse_numeric(col)
            blocks_train.append(vals[train_idx, None])
            blocks_test.append(vals[test_idx, None])
            names.append(col)
            continue
        j = col_idx[col]
        raw = np.array([row[j] for row in rows], dtype=object)
        levels = [str(v) for v in kind] if isinstance(kind, (list, tuple)) else sorted(
            {str(v) for v in raw[train_idx]}
        )
        level_pos = {lev: k for k, lev in enumerate(levels)}
        onehot = np.zeros((n, len(levels)))
        unseen = set()
        for i, v in enumerate(raw):
            k = level_pos.get(str(v))
            if k is None:
                unseen.add(str(v))
            else:
                onehot[i, k] = 1.0
        if unseen:
            warnings.warn(
                f"{path}: unseen levels {sorted(unseen)} in column {col!r} mapped to all-zeros",
                RuntimeWarning,
                stacklevel=2,
            )
        blocks_train.append(onehot[train_idx])
        blocks_test.append(onehot[test_idx])
        names.extend(f"{col}={lev}" for lev in levels)
    x_train = np.hstack(blocks_train) if blocks_train else np.zeros((len(train_idx), 0))
    x_test = np.hstack(blocks_test) if blocks_test else np.zeros((len(test_idx), 0))
    make = lambda x, idx: TabularDataset(
        feature_names=tuple(names),
        x=x,
        y=y_all[idx],
        a=a_all[idx],
        target_name=target,
        attribute_name=attribute,
    )
    return make(x_train, train_idx), make(x_test, test_idx)


# ---------------------------------------------------------------------------
# Synthetic generators
# ---------------------------------------------------------------------------


def bernoulli_pair_joint(p_a: float, p_y_given_a0: float, p_y_given_a1: float):
    """Exact (Y, A) joint of the binary generator, without sampling."""
    return joint_from_probabilities(p_a, p_y_given_a0, p_y_given_a1)


def synth_bernoulli_pair(
    p_a: float, p_y_given_a0: float, p_y_given_a1: float, n: int, seed: int = 0
) -> TabularDataset:
    """Binary (A, Y) pairs with the given group base rates, plus features
    (target copy, attribute copy, noise) so perfect predictors exist."""
    if n < 1:
        raise ValueError("n must be >= 1")
    for name, p in (
        ("p_a", p_a),
        ("p_y_given_a0", p_y_given_a0),
        ("p_y_given_a1", p_y_given_a1),
    ):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} must be a probability")
    rng = np.random.default_rng(seed)
    a = (rng.random(n) >= p_a).astype(float)  # Pr(A=0) = p_a
    p_y = np.where(a == 0.0, p_y_given_a0, p_y_given_a1)
    y = (rng.random(n) < p_y).astype(float)
    noise = rng.standard_normal(n)
    x = np.column_stack([y, a, noise])
    return TabularDataset(feature_names=("y_signal", "a_signal", "noise"), x=x, y=y, a=a)


def synth_gaussian(model: GaussianModel, n: int, seed: int = 0) -> TabularDataset:
    """Rows (phi, Y=<y,phi>, A=<a,phi>) with phi ~ N(mean, Sigma)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    half, _ = psd_sqrt(model.sigma)
    phi = model.mean + rng.standard_normal((n, model.dim)) @ half
    return TabularDataset(
        feature_names=tuple(f"phi_{i}" for i in range(model.dim)),
        x=phi,
        y=phi @ model.y,
        a=phi @ model.a,
    )


# ---------------------------------------------------------------------------
# Baseline learners
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LearnerConfig:
    kind: str  # "logit" | "ols" | "linear"
    d_out: int = 2
    learning_rate: float = 0.1
    epochs: int = 500
    seed: int = 0
    task: str | None = None  # default: inferred from the label types

    def __post_init__(self):
        if self.kind not in ("logit", "ols", "linear"):
            raise ValueError(f"unknown learner {self.kind!r}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.kind == "linear" and self.d_out < 1:
            raise ValueError("d_out must be >= 1")


def _standardize(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    return (x - mu) / sd, mu, sd


def _check_finite(loss: float, epoch: int) -> None:
    if not math.isfinite(loss):
        raise TrainingError(f"non-finite loss at epoch {epoch}")


def _logistic_loss(p: np.ndarray, y: np.ndarray) -> float:
    eps = 1e-12
    return float(-np.mean(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps)))


def train_baseline(
    train: TabularDataset, config: LearnerConfig, eval_ds: TabularDataset | None = None
) -> RepresentationSample:
    """Fit a baseline representation learner and emit the representation of
    the evaluation rows (the training rows when no held-out split is given).

    logit: full-batch gradient descent on the logistic loss; the
        representation is the 1-D logit score.
    ols: closed-form ridge (1e-8) least squares; the representation is the
        1-D prediction.
    linear: a d_out-dimensional affine map trained jointly with a task head
        by full-batch gradient descent on the task loss.
    """
    eval_ds = eval_ds if eval_ds is not None and eval_ds.n > 0 else train
    task = config.task or ("classification" if train.is_classification() else "regression")
    x, mu, sd = _standardize(train.x)
    x_eval = (eval_ds.x - mu) / sd
    y = train.y
    n = train.n
    if config.kind == "logit":
        if not np.isin(y, (0.0, 1.0)).all():
            raise TrainingError("logit requires a binary target")
        w = np.zeros(x.shape[1])
        b = 0.0
        for epoch in range(config.epochs):
            p = expit(x @ w + b)
            _check_finite(_logistic_loss(p, y), epoch)
            g = p - y
            w -= config.learning_rate * (x.T @ g) / n
            b -= config.learning_rate * float(g.mean())
        z = x_eval @ w + b
        return RepresentationSample(z=z[:, None], y=eval_ds.y, a=eval_ds.a, kind=task)
    if config.kind == "ols":
        xd = np.column_stack([x, np.ones(n)])
        gram = xd.T @ xd + 1e-8 * np.eye(xd.shape[1])
        try:
            beta = np.linalg.solve(gram, xd.T @ y)
        except np.linalg.LinAlgError as exc:
            raise TrainingError(f"singular normal equations: {exc}") from exc
        z = np.column_stack([x_eval, np.ones(x_eval.shape[0])]) @ beta
        return RepresentationSample(z=z[:, None], y=eval_ds.y, a=eval_ds.a, kind=task)
    # linear representation Z = W1 x + b1 with a task head on top
    rng = np.random.default_rng(config.seed)
    k = config.d_out
    w1 = 0.1 * rng.standard_normal((k, x.shape[1]))
    b1 = np.zeros(k)
    w2 = 0.1 * rng.standard_normal(k)
    b2 = 0.0
    classification = task == "classification"
    if classification and not np.isin(y, (0.0, 1.0)).all():
        raise TrainingError("classification head requires a binary target")
    for epoch in range(config.epochs):
        z = x @ w1.T + b1
        s = z @ w2 + b2
        if classification:
            p = expit(s)
            _check_finite(_logistic_loss(p, y), epoch)
            ds = (p - y) / n
        else:
            r = s - y
            with np.errstate(over="ignore"):  # overflow is what the check reports
                _check_finite(float(np.mean(r**2)), epoch)
            ds = 2.0 * r / n
        gw2 = z.T @ ds
        gb2 = float(ds.sum())
        dz = np.outer(ds, w2)
        gw1 = dz.T @ x
        gb1 = dz.sum(axis=0)
        w2 -= config.learning_rate * gw2
        b2 -= config.learning_rate * gb2
        w1 -= config.learning_rate * gw1
        b1 -= config.learning_rate * gb1
    z_eval = x_eval @ w1.T + b1
    return RepresentationSample(z=z_eval, y=eval_ds.y, a=eval_ds.a, kind=task)


# ---------------------------------------------------------------------------
# Representation CSV exchange format
# ---------------------------------------------------------------------------


def representation_csv_text(sample: RepresentationSample) -> str:
    """Format ``row_id,z_0,...,z_{d-1},y,a`` with LF endings."""
    lines = [",".join(["row_id", *[f"z_{j}" for j in range(sample.dim)], "y", "a"])]
    for i in range(sample.n):
        lines.append(
            ",".join(
                [str(i)]
                + [_format_value(v) for v in sample.z[i]]
                + [_format_value(sample.y[i]), _format_value(sample.a[i])]
            )
        )
    return "\n".join(lines) + "\n"


def save_representation_csv(path: str, sample: RepresentationSample) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(representation_csv_text(sample))


def load_representation_csv(path: str, kind: str) -> RepresentationSample:
    """Read the audit format back; row ids must be strictly increasing ints."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = list(reader)
    z_cols = [h for h in header if h.startswith("z_")]
    expected = ["row_id", *[f"z_{j}" for j in range(len(z_cols))], "y", "a"]
    if header != expected:
        raise DataError(f"{path}: header must be row_id,z_0,...,z_{{d-1}},y,a, got {header}")
    if not rows:
        raise DataError(f"{path}: no data rows")
    try:
        data = np.array([[float(v) for v in row] for row in rows])
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric cell ({exc})") from None
    ids = data[:, 0]
    if not np.all(ids == np.round(ids)) or not np.all(np.diff(ids) > 0):
        raise DataError(f"{path}: row_id must be strictly increasing integers")
    return RepresentationSample(z=data[:, 1:-2], y=data[:, -2], a=data[:, -1], kind=kind)

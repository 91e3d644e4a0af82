"""Dataset protocol: feature tables, min-max normalization, splits, kNN,
metrics, and the transform bench used to probe descriptor invariance."""

from __future__ import annotations

import csv
import io
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .descriptor import SCALE_ROBUST, ExtractOptions, extract
from .ecosystem import InvalidInputError, as_rgb, check_min_size


class ProtocolWarning(UserWarning):
    pass


# --------------------------------------------------------------------------
# Feature tables

@dataclass(frozen=True, eq=False)
class FeatureTable:
    sample_ids: tuple[str, ...]
    labels: tuple[str, ...]
    features: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 2:
            feats = feats.reshape(len(self.sample_ids), len(self.feature_names))
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "sample_ids", tuple(self.sample_ids))
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        n = len(self.sample_ids)
        if len(self.labels) != n or feats.shape[0] != n:
            raise InvalidInputError("sample_ids, labels and feature rows differ in length")
        if feats.shape[1] != len(self.feature_names):
            raise InvalidInputError("feature count does not match feature_names")
        if len(set(self.sample_ids)) != n:
            raise InvalidInputError("sample_ids must be unique")

    def __len__(self):
        return len(self.sample_ids)

    def subset(self, rows) -> "FeatureTable":
        rows = list(rows)
        return FeatureTable(
            tuple(self.sample_ids[i] for i in rows),
            tuple(self.labels[i] for i in rows),
            self.features[rows] if rows else np.empty((0, self.features.shape[1])),
            self.feature_names,
        )

    def with_features(self, features: np.ndarray) -> "FeatureTable":
        return FeatureTable(self.sample_ids, self.labels, features, self.feature_names)

    def sorted(self) -> "FeatureTable":
        return self.subset(sorted(range(len(self)), key=lambda i: self.sample_ids[i]))


def table_to_csv(table: FeatureTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["sample_id", "label", *table.feature_names])
    for sid, label, row in zip(table.sample_ids, table.labels, table.features):
        writer.writerow([sid, label, *(f"{v:.9g}" for v in row)])
    return buf.getvalue()


def write_csv(table: FeatureTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(table_to_csv(table))


def read_csv(path) -> FeatureTable:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:2] != ["sample_id", "label"] or len(rows[0]) < 3:
        raise InvalidInputError(f"{path}: header must start with sample_id,label and name features")
    names = rows[0][2:]
    ids, labels, feats = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(names) + 2:
            raise InvalidInputError(f"{path}:{lineno}: expected {len(names) + 2} fields, got {len(row)}")
        try:
            values = [float(v) for v in row[2:]]
        except ValueError as exc:
            raise InvalidInputError(f"{path}:{lineno}: {exc}") from None
        ids.append(row[0])
        labels.append(row[1])
        feats.append(values)
    if not ids:
        raise InvalidInputError(f"{path}: no data rows")
    return FeatureTable(ids, labels, np.array(feats), names)


def build_table(images, labels, sample_ids, opts: ExtractOptions = ExtractOptions()) -> FeatureTable:
    """Extract every image and collect the rows in sample_id order."""
    vectors = [extract(img, opts) for img in images]
    names = vectors[0].names if vectors else ()
    feats = np.array([v.values for v in vectors]).reshape(len(vectors), len(names))
    return FeatureTable(sample_ids, labels, feats, names).sorted()


# --------------------------------------------------------------------------
# Min-max normalization

@dataclass(frozen=True, eq=False)
class NormalizationParams:
    mins: np.ndarray
    maxs: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, NormalizationParams):
            return NotImplemented
        return np.array_equal(self.mins, other.mins) and np.array_equal(self.maxs, other.maxs)


def fit_minmax(train: FeatureTable) -> NormalizationParams:
    if len(train) == 0:
        raise InvalidInputError("cannot fit normalization on an empty table")
    return NormalizationParams(train.features.min(axis=0), train.features.max(axis=0))


def apply_minmax(table: FeatureTable, params: NormalizationParams) -> FeatureTable:
    """Scale each feature to the training range; out-of-range values are kept."""
    if table.features.shape[1] != params.mins.size:
        raise InvalidInputError("feature count differs from the fitted parameters")
    span = params.maxs - params.mins
    flat = span == 0
    scaled = (table.features - params.mins) / np.where(flat, 1.0, span)
    scaled[:, flat] = 0.0
    return table.with_features(scaled)


# --------------------------------------------------------------------------
# Splitting

def _class_rows(table: FeatureTable, rng: np.random.Generator) -> dict[str, list[int]]:
    by_class: dict[str, list[int]] = {}
    for i, label in enumerate(table.labels):
        by_class.setdefault(label, []).append(i)
    return {label: [rows[j] for j in rng.permutation(len(rows))] for label, rows in sorted(by_class.items())}


def holdout_split(table: FeatureTable, train_fraction: float, seed: int = 0):
    """Stratified split; each class sends round-half-up(n * fraction) rows to train."""
    if not 0 < train_fraction < 1:
        raise InvalidInputError("train_fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    train, test = [], []
    for label, rows in _class_rows(table, rng).items():
        n = len(rows)
        if n < 2:
            warnings.warn(f"class {label!r} has {n} sample; kept in train", ProtocolWarning, stacklevel=2)
            train.extend(rows)
            continue
        n_train = min(max(math.floor(n * train_fraction + 0.5), 1), n - 1)
        train.extend(rows[:n_train])
        test.extend(rows[n_train:])
    return table.subset(sorted(train)), table.subset(sorted(test))


def kfold_split(table: FeatureTable, k: int, seed: int = 0):
    """Stratified k folds; returns [(train, test), ...] with disjoint covering tests."""
    if k < 2:
        raise InvalidInputError("k must be at least 2")
    if k > len(table):
        raise InvalidInputError(f"k={k} exceeds the {len(table)} rows available")
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    position = 0
    for label, rows in _class_rows(table, rng).items():
        if len(rows) < k:
            warnings.warn(f"class {label!r} has fewer than k={k} samples", ProtocolWarning, stacklevel=2)
        # Deal classes round-robin, continuing where the previous class ended,
        # so fold sizes differ by at most one.
        for r in rows:
            folds[position % k].append(r)
            position += 1
    out = []
    for f in range(k):
        test = sorted(folds[f])
        train = sorted(r for g in range(k) if g != f for r in folds[g])
        out.append((table.subset(train), table.subset(test)))
    return out


# --------------------------------------------------------------------------
# k-nearest neighbours

@dataclass(frozen=True, eq=False)
class ClassifierModel:
    features: np.ndarray
    labels: tuple[str, ...]
    sample_ids: tuple[str, ...]
    k: int
    id_rank: np.ndarray  # position of each row when sorted by sample_id


def knn_train(train: FeatureTable, k: int) -> ClassifierModel:
    if k < 1:
        raise InvalidInputError("k must be positive")
    if k > len(train):
        raise InvalidInputError(f"k={k} exceeds the {len(train)} training rows")
    order = sorted(range(len(train)), key=lambda i: train.sample_ids[i])
    id_rank = np.empty(len(train), dtype=np.int64)
    id_rank[order] = np.arange(len(train))
    return ClassifierModel(train.features.copy(), train.labels, train.sample_ids, k, id_rank)


def _neighbour_order(model: ClassifierModel, query: np.ndarray) -> np.ndarray:
    dist = np.sqrt(((model.features - query) ** 2).sum(axis=1))
    # primary key distance, secondary sample_id (lexsort's last key is primary)
    return np.lexsort((model.id_rank, dist))


def knn_predict(model: ClassifierModel, features) -> str:
    """Majority label among the k nearest rows (Euclidean).

    A vote tie goes to the tied label whose member is nearest; equal distances
    are ordered by sample_id.
    """
    query = np.asarray(features, dtype=np.float64).reshape(-1)
    if query.size != model.features.shape[1]:
        raise InvalidInputError("query dimension does not match the model")
    nearest = _neighbour_order(model, query)[: model.k]
    votes = Counter(model.labels[i] for i in nearest)
    best = max(votes.values())
    tied = {label for label, v in votes.items() if v == best}
    for i in nearest:
        if model.labels[i] in tied:
            return model.labels[i]
    raise AssertionError("unreachable")


def knn_predict_table(model: ClassifierModel, table: FeatureTable) -> list[str]:
    return [knn_predict(model, row) for row in table.features]


# --------------------------------------------------------------------------
# Metrics

@dataclass(frozen=True)
class ClassScores:
    label: str
    sensitivity: float
    specificity: float


@dataclass(frozen=True, eq=False)
class EvalReport:
    accuracy: float
    kappa: float
    per_class: tuple[ClassScores, ...]
    confusion: np.ndarray  # rows = truth, columns = prediction
    labels: tuple[str, ...]
    degenerate: bool = False
    fold_accuracies: tuple[float, ...] = ()

    @property
    def mean_sensitivity(self) -> float:
        return float(np.nanmean([c.sensitivity for c in self.per_class]))

    @property
    def mean_specificity(self) -> float:
        return float(np.nanmean([c.specificity for c in self.per_class]))

    def to_json(self) -> dict:
        def num(v):
            return None if v is None or (isinstance(v, float) and math.isnan(v)) else v

        out = {
            "accuracy": self.accuracy,
            "kappa": num(self.kappa),
            "per_class": [
                {"label": c.label, "sensitivity": num(c.sensitivity), "specificity": num(c.specificity)}
                for c in self.per_class
            ],
            "confusion": self.confusion.tolist(),
            "labels": list(self.labels),
        }
        if self.fold_accuracies:
            out["fold_accuracies"] = list(self.fold_accuracies)
            out["accuracy_mean"] = float(np.mean(self.fold_accuracies))
            out["accuracy_std"] = float(np.std(self.fold_accuracies))
        return out

    def to_text(self) -> str:
        width = max([5] + [len(l) for l in self.labels])
        lines = []
        if self.fold_accuracies:
            acc = np.array(self.fold_accuracies)
            lines.append(f"accuracy (folds)  {acc.mean():.4f} +/- {acc.std():.4f}  over {acc.size} folds")
        lines.append(f"accuracy          {self.accuracy:.4f}")
        lines.append(f"kappa             {self.kappa:.4f}" + ("  (degenerate)" if self.degenerate else ""))
        lines.append(f"mean sensitivity  {self.mean_sensitivity:.4f}")
        lines.append(f"mean specificity  {self.mean_specificity:.4f}")
        lines.append("")
        lines.append(f"{'class':<{width}}  sensitivity  specificity")
        for c in self.per_class:
            lines.append(f"{c.label:<{width}}  {c.sensitivity:11.4f}  {c.specificity:11.4f}")
        lines.append("")
        lines.append("confusion (rows = truth, columns = prediction)")
        lines.append(" " * width + "  " + " ".join(f"{l:>{width}}" for l in self.labels))
        for label, row in zip(self.labels, self.confusion):
            lines.append(f"{label:<{width}}  " + " ".join(f"{int(v):>{width}}" for v in row))
        return "\n".join(lines)


def evaluate(predictions: Sequence[str], truths: Sequence[str]) -> EvalReport:
    if len(predictions) != len(truths):
        raise InvalidInputError("predictions and truths differ in length")
    if not truths:
        raise InvalidInputError("nothing to evaluate")
    labels = tuple(sorted(set(truths) | set(predictions)))
    index = {l: i for i, l in enumerate(labels)}
    conf = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for p, t in zip(predictions, truths):
        conf[index[t], index[p]] += 1
    total = int(conf.sum())
    correct = int(np.trace(conf))
    scores = []
    for i, label in enumerate(labels):
        tp = conf[i, i]
        fn = conf[i].sum() - tp
        fp = conf[:, i].sum() - tp
        tn = total - tp - fn - fp
        sens = tp / (tp + fn) if tp + fn else float("nan")
        spec = tn / (tn + fp) if tn + fp else float("nan")
        scores.append(ClassScores(label, float(sens), float(spec)))
    p_o = correct / total
    p_e = float(np.dot(conf.sum(axis=1), conf.sum(axis=0))) / total**2
    degenerate = False
    if p_e == 1.0:
        # only reachable when truths and predictions are one and the same class
        kappa = 1.0 if p_o == 1.0 else float("nan")
        degenerate = p_o != 1.0
    else:
        kappa = (p_o - p_e) / (1 - p_e)
    return EvalReport(p_o, kappa, tuple(scores), conf, labels, degenerate)


# --------------------------------------------------------------------------
# Protocols

@dataclass
class ProtocolResult:
    report: EvalReport
    params: list[NormalizationParams] = field(default_factory=list)
    train_ids: list[tuple[str, ...]] = field(default_factory=list)


Fitter = Callable[[FeatureTable], NormalizationParams]


def run_split(train: FeatureTable, test: FeatureTable, k: int, fitter: Fitter = fit_minmax):
    params = fitter(train)
    model = knn_train(apply_minmax(train, params), k)
    predictions = knn_predict_table(model, apply_minmax(test, params))
    return predictions, params


def run_holdout(table: FeatureTable, train_fraction: float, k: int, seed: int = 0) -> ProtocolResult:
    train, test = holdout_split(table, train_fraction, seed)
    if len(test) == 0:
        raise InvalidInputError("holdout left no test rows")
    predictions, params = run_split(train, test, k)
    return ProtocolResult(evaluate(predictions, test.labels), [params], [train.sample_ids])


def run_kfold(table: FeatureTable, folds: int, k: int, seed: int = 0, fitter: Optional[Fitter] = None) -> ProtocolResult:
    """Cross-validate kNN, refitting min-max on the merged training folds.

    ``fitter`` receives each fold's training table; it exists so tests can
    inject a leaking fitter and check that the parameters change.
    """
    fitter = fitter or fit_minmax
    all_pred, all_true, accs, params, train_ids = [], [], [], [], []
    for train, test in kfold_split(table, folds, seed):
        predictions, p = run_split(train, test, k, fitter)
        all_pred.extend(predictions)
        all_true.extend(test.labels)
        accs.append(evaluate(predictions, test.labels).accuracy)
        params.append(p)
        train_ids.append(train.sample_ids)
    pooled = evaluate(all_pred, all_true)
    report = EvalReport(
        pooled.accuracy, pooled.kappa, pooled.per_class, pooled.confusion, pooled.labels,
        pooled.degenerate, tuple(accs),
    )
    return ProtocolResult(report, params, train_ids)


# --------------------------------------------------------------------------
# Transforms and invariance

TRANSFORM_KINDS = ("rot90", "rot180", "rot270", "flip_h", "flip_v", "rescale", "replicate", "gamma", "shuffle")
EXACT_KINDS = ("rot90", "rot180", "rot270", "flip_h", "flip_v")


@dataclass(frozen=True)
class TransformSpec:
    kind: str
    param: Optional[float] = None

    def __post_init__(self):
        if self.kind not in TRANSFORM_KINDS:
            raise InvalidInputError(f"unknown transform {self.kind!r}")
        if self.kind == "rescale" and not (self.param is not None and 0 < self.param <= 1):
            raise InvalidInputError("rescale factor must lie in (0, 1]")
        if self.kind == "replicate" and not (self.param is not None and self.param >= 1 and self.param == int(self.param)):
            raise InvalidInputError("replicate factor must be a positive integer")
        if self.kind == "gamma" and not (self.param is not None and self.param > 0):
            raise InvalidInputError("gamma must be positive")
        if self.kind == "shuffle" and (self.param is None or self.param != int(self.param)):
            raise InvalidInputError("shuffle needs an integer seed")
        if self.kind in EXACT_KINDS and self.param is not None:
            raise InvalidInputError(f"{self.kind} takes no parameter")

    @property
    def token(self) -> str:
        if self.param is None:
            return self.kind
        p = int(self.param) if self.kind in ("shuffle", "replicate") else self.param
        return f"{self.kind}:{p:g}"

    @classmethod
    def parse(cls, token: str) -> "TransformSpec":
        kind, _, arg = token.strip().partition(":")
        if kind not in TRANSFORM_KINDS:
            raise InvalidInputError(f"unknown transform {token!r}")
        param = None
        if arg:
            try:
                param = float(arg)
            except ValueError:
                raise InvalidInputError(f"bad parameter in transform {token!r}") from None
        elif kind in ("rescale", "replicate", "gamma", "shuffle"):
            raise InvalidInputError(f"transform {kind!r} needs a parameter")
        return cls(kind, param)


def parse_transforms(text: str) -> list[TransformSpec]:
    return [TransformSpec.parse(tok) for tok in text.split(",") if tok.strip()]


def _nearest_indices(n_out: int, n_in: int, factor: float) -> np.ndarray:
    src = np.floor(np.arange(n_out) / factor + 0.5).astype(np.int64)
    return np.clip(src, 0, n_in - 1)


def apply_transform(image, t: TransformSpec) -> np.ndarray:
    img = as_rgb(image)
    if t.kind == "rot90":
        return np.rot90(img, 1).copy()
    if t.kind == "rot180":
        return np.rot90(img, 2).copy()
    if t.kind == "rot270":
        return np.rot90(img, 3).copy()
    if t.kind == "flip_h":
        return img[:, ::-1].copy()
    if t.kind == "flip_v":
        return img[::-1].copy()
    if t.kind == "rescale":
        h, w = img.shape[:2]
        oh, ow = math.floor(h * t.param + 0.5), math.floor(w * t.param + 0.5)
        if oh < 2 or ow < 2:
            raise InvalidInputError(f"rescaled image would be {oh}x{ow}, below 2x2")
        rows = _nearest_indices(oh, h, t.param)
        cols = _nearest_indices(ow, w, t.param)
        return img[rows][:, cols].copy()
    if t.kind == "replicate":
        f = int(t.param)
        return np.repeat(np.repeat(img, f, axis=0), f, axis=1)
    if t.kind == "gamma":
        lut = np.floor(255.0 * (np.arange(256) / 255.0) ** t.param + 0.5).astype(np.uint8)
        return lut[img]
    if t.kind == "shuffle":
        h, w = img.shape[:2]
        perm = np.random.default_rng(int(t.param)).permutation(h * w)
        return img.reshape(h * w, 3)[perm].reshape(h, w, 3)
    raise AssertionError(t.kind)


@dataclass(frozen=True, eq=False)
class TransformResult:
    transform: TransformSpec
    expectation: str  # "exact", "scale-exact", "scale" or "none"
    abs_diff: np.ndarray
    rel_diff: np.ndarray
    violated: bool

    @property
    def max_abs(self) -> float:
        return float(self.abs_diff.max())


@dataclass(frozen=True)
class InvarianceReport:
    feature_names: tuple[str, ...]
    original: np.ndarray
    results: tuple[TransformResult, ...]
    scale_tolerance: float

    @property
    def exact_violations(self) -> list[TransformResult]:
        return [r for r in self.results if r.violated and r.expectation in ("exact", "scale-exact")]

    @property
    def tolerance_breaches(self) -> list[TransformResult]:
        return [r for r in self.results if r.violated and r.expectation == "scale"]

    def to_text(self) -> str:
        tokens = [r.transform.token for r in self.results]
        width = max([12] + [len(n) for n in self.feature_names])
        col = max([10] + [len(t) for t in tokens])
        lines = [f"{'feature':<{width}}  {'original':>14}  " + "  ".join(f"{t:>{col}}" for t in tokens)]
        for j, name in enumerate(self.feature_names):
            cells = "  ".join(f"{r.abs_diff[j]:>{col}.4g}" for r in self.results)
            lines.append(f"{name:<{width}}  {self.original[j]:>14.7g}  {cells}")
        lines.append("")
        lines.append("max |diff| per transform:")
        for r in self.results:
            status = "VIOLATION" if r.violated and r.expectation != "scale" else (
                "breach" if r.violated else "ok")
            lines.append(f"  {r.transform.token:<{col}}  {r.max_abs:.6g}  expect={r.expectation}  {status}")
        return "\n".join(lines)


def _expectation(t: TransformSpec, opts: ExtractOptions) -> str:
    if t.kind in EXACT_KINDS:
        return "exact"
    if t.kind == "shuffle":
        # filters look at neighbourhoods, so only the raw pipeline is order-free
        return "none" if opts.preprocess_enabled else "exact"
    if t.kind == "replicate":
        return "scale" if opts.preprocess_enabled else "scale-exact"
    if t.kind == "rescale":
        return "scale"
    return "none"


def invariance_check(image, transforms: Sequence[TransformSpec], opts: ExtractOptions = ExtractOptions(),
                     scale_tolerance: float = 0.05) -> InvarianceReport:
    """Extract the descriptor before and after each transform and compare.

    Rotations and flips (and pixel shuffles when preprocessing is off) must
    leave every feature unchanged.  Resampling is only expected to preserve
    the scale-robust indices: exactly for block replication without
    preprocessing, within ``scale_tolerance`` relative otherwise.
    """
    img = as_rgb(image)
    check_min_size(img)
    base = extract(img, opts)
    names = base.names
    robust = np.array([n.split("_", 1)[1] in SCALE_ROBUST for n in names])
    results = []
    for t in transforms:
        other = extract(apply_transform(img, t), opts).values
        abs_diff = np.abs(other - base.values)
        # relative to the original value; a change away from zero is infinite
        rel_diff = np.divide(abs_diff, np.abs(base.values), out=np.full_like(abs_diff, np.inf),
                             where=base.values != 0)
        rel_diff[abs_diff == 0] = 0.0
        expect = _expectation(t, opts)
        if expect == "exact":
            violated = bool(np.any(abs_diff != 0))
        elif expect == "scale-exact":
            violated = bool(np.any(abs_diff[robust] != 0))
        elif expect == "scale":
            violated = bool(np.any(rel_diff[robust] >= scale_tolerance))
        else:
            violated = False
        results.append(TransformResult(t, expect, abs_diff, rel_diff, violated))
    return InvarianceReport(names, base.values, tuple(results), scale_tolerance)

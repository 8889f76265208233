"""Euclidean KNN and K-Means abnormality classification over (age, weight, toileting)."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ClassifierError, DatasetError, Issue

FEATURES = ("age", "weight", "toileting")
HEADER = FEATURES + ("abnormal",)
_BOOL = {"true": True, "false": False}


@dataclass(frozen=True)
class LabeledSample:
    age: int
    weight: int
    toileting: int
    abnormal: bool

    @property
    def point(self) -> tuple[int, int, int]:
        return (self.age, self.weight, self.toileting)


@dataclass(frozen=True)
class Dataset:
    samples: tuple[LabeledSample, ...] = ()

    def __len__(self) -> int:
        return len(self.samples)

    def features(self) -> np.ndarray:
        return np.array([s.point for s in self.samples], dtype=float).reshape(-1, len(FEATURES))

    def labels(self) -> np.ndarray:
        return np.array([s.abnormal for s in self.samples], dtype=bool)


def _as_point(q) -> tuple:
    return tuple(q.point) if hasattr(q, "point") else tuple(q)


def _parse_int(field: str) -> int:
    value = int(field)
    if value < 0:
        raise ValueError("negative feature")
    return value


def load_dataset(text: str) -> Dataset:
    """Parse ``age,weight,toileting,abnormal`` CSV with true/false labels."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip().lower() for c in rows[0]] != list(HEADER):
        raise DatasetError([Issue("BadHeader", f"header must be {','.join(HEADER)}", 1)])
    issues = []
    samples = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            if len(row) != len(HEADER):
                raise ValueError("wrong column count")
            age, weight, toileting = (_parse_int(c.strip()) for c in row[:3])
            abnormal = _BOOL[row[3].strip().lower()]
        except (ValueError, KeyError):
            issues.append(Issue("BadRow", f"cannot parse {','.join(row)!r}", lineno))
            continue
        samples.append(LabeledSample(age, weight, toileting, abnormal))
    if issues:
        raise DatasetError(issues)
    return Dataset(tuple(samples))


def load_queries(text: str) -> list[tuple[str, tuple[int, int, int]]]:
    """Parse query points; the header is ``age,weight,toileting`` with an optional leading ``name``."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        return []
    header = [c.strip().lower() for c in rows[0]]
    named = header[:1] == ["name"]
    if (header[1:] if named else header) != list(FEATURES):
        raise DatasetError([Issue("BadHeader", "header must be [name,]age,weight,toileting", 1)])
    queries = []
    issues = []
    for n, row in enumerate(rows[1:], start=1):
        cells = [c.strip() for c in row]
        name = cells.pop(0) if named else f"q{n}"
        try:
            if len(cells) != len(FEATURES):
                raise ValueError
            point = tuple(_parse_int(c) for c in cells)
        except ValueError:
            issues.append(Issue("BadRow", f"cannot parse {','.join(row)!r}", n + 1))
            continue
        queries.append((name, point))
    if issues:
        raise DatasetError(issues)
    return queries


def euclidean_distance(a: Sequence[float], b: Sequence[float]) -> float:
    a, b = _as_point(a), _as_point(b)
    if len(a) != len(b):
        raise ClassifierError("DimensionMismatch", f"points have {len(a)} and {len(b)} coordinates")
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


@dataclass(frozen=True)
class Neighbor:
    index: int
    distance: float
    abnormal: bool


@dataclass(frozen=True)
class KnnResult:
    abnormal: bool
    neighbors: tuple[Neighbor, ...]


def _minmax(X: np.ndarray):
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    span[span == 0] = 1.0
    return lo, span


def knn_classify(ds: Dataset, q, k: int, scale: bool = False) -> KnnResult:
    """Majority label of the ``k`` nearest samples; distance ties go to the lower index."""
    if len(ds) == 0:
        raise ClassifierError("EmptyDataset", "dataset has no samples")
    if k < 1 or k % 2 == 0:
        raise ClassifierError("EvenK", f"k must be an odd positive integer, got {k}")
    if k > len(ds):
        raise ClassifierError("KTooLarge", f"k={k} exceeds dataset size {len(ds)}")
    X = ds.features()
    point = np.array(_as_point(q), dtype=float)
    if point.shape != (X.shape[1],):
        raise ClassifierError("DimensionMismatch", f"query has {point.size} features, expected {X.shape[1]}")
    if scale:
        lo, span = _minmax(X)
        X = (X - lo) / span
        point = (point - lo) / span
    # squared distances keep comparisons exact for integer features
    d2 = ((X - point) ** 2).sum(axis=1)
    order = np.argsort(d2, kind="stable")[:k]
    labels = ds.labels()
    neighbors = tuple(Neighbor(int(i), math.sqrt(d2[i]), bool(labels[i])) for i in order)
    votes = sum(n.abnormal for n in neighbors)
    return KnnResult(2 * votes > k, neighbors)


# -- k-means ------------------------------------------------------------------


@dataclass(frozen=True)
class KmcModel:
    k: int
    centroids: tuple[tuple[float, ...], ...]
    assignment: tuple[int, ...]
    iterations_run: int
    converged: bool
    inertia_history: tuple[float, ...] = ()
    max_iter: int = 10

    def nearest(self, q) -> int:
        C = np.array(self.centroids)
        d2 = ((C - np.array(_as_point(q), dtype=float)) ** 2).sum(axis=1)
        return int(np.argmin(d2))

    def inertia(self, points) -> float:
        P = np.asarray(points, dtype=float)
        return _inertia(P, np.array(self.assignment), np.array(self.centroids))


def _nearest(P: np.ndarray, C: np.ndarray) -> np.ndarray:
    d2 = ((P[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)  # ties -> lowest cluster index


def _inertia(P, assign, C) -> float:
    return float(((P - C[assign]) ** 2).sum())


def _update(P: np.ndarray, assign: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Centroids as member means; an empty cluster takes over the point farthest from its centroid."""
    k = len(C)
    for j in range(k):
        if np.any(assign == j):
            continue
        d2 = ((P - C[assign]) ** 2).sum(axis=1)
        sizes = np.bincount(assign, minlength=k)
        d2[sizes[assign] < 2] = -1.0  # never empty another cluster
        i = int(np.argmax(d2))
        if d2[i] <= 0:
            raise ClassifierError("EmptyClusterUnrecoverable", f"cluster {j} is empty and cannot be reseeded")
        assign[i] = j
    return np.array([P[assign == j].mean(axis=0) for j in range(k)])


def _initial_centroids(P, k, init, labels) -> np.ndarray:
    if isinstance(init, str):
        if init == "per-class-means":
            if labels is None:
                raise ClassifierError("BadInit", "per-class-means initialization needs labels")
            labels = np.asarray(labels, dtype=bool)
            classes = [False, True]
            if k != len(classes) or not all(np.any(labels == c) for c in classes):
                raise ClassifierError("BadInit", "per-class-means needs k=2 and both classes present")
            L = P[: len(labels)]
            return np.array([L[labels == c].mean(axis=0) for c in classes])
        if init == "first-k-distinct":
            chosen = []
            for p in P:
                if not any(np.array_equal(p, c) for c in chosen):
                    chosen.append(p)
                if len(chosen) == k:
                    break
            return np.array(chosen)
        raise ClassifierError("BadInit", f"unknown initialization {init!r}")
    C = np.asarray(init, dtype=float)
    if C.shape != (k, P.shape[1]):
        raise ClassifierError("BadInit", f"explicit centroids must have shape ({k}, {P.shape[1]})")
    return C.copy()


def kmeans_fit(points, k: int = 2, init="per-class-means", max_iter: int = 10, labels=None) -> KmcModel:
    """Lloyd's iteration from a deterministic start.

    ``init`` is ``"per-class-means"`` (needs ``labels`` for the leading points),
    ``"first-k-distinct"`` or an explicit ``k x d`` centroid list. Stops as soon
    as an iteration leaves every assignment unchanged, or after ``max_iter``.
    """
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or len(P) == 0:
        raise ClassifierError("EmptyDataset", "no points to cluster")
    if k < 1 or k > len(np.unique(P, axis=0)):
        raise ClassifierError("KTooLarge", f"k={k} needs at least {k} distinct points")
    if max_iter < 1:
        raise ValueError("max_iter must be positive")

    C = _initial_centroids(P, k, init, labels)
    assign = _nearest(P, C)
    history = []
    converged = False
    iterations = 0
    while iterations < max_iter:
        iterations += 1
        C = _update(P, assign, C)
        history.append(_inertia(P, assign, C))
        new = _nearest(P, C)
        if np.array_equal(new, assign):
            converged = True
            break
        assign = new
    if not converged:
        C = _update(P, assign, C)

    return KmcModel(
        k=k,
        centroids=tuple(tuple(float(x) for x in c) for c in C),
        assignment=tuple(int(a) for a in assign),
        iterations_run=iterations,
        converged=converged,
        inertia_history=tuple(history),
        max_iter=max_iter,
    )


def fit_kmc(ds: Dataset, k: int = 2, init="per-class-means", max_iter: int = 10, extra_points=()) -> KmcModel:
    """Cluster the dataset's features, optionally with unlabeled ``extra_points`` appended."""
    if len(ds) == 0:
        raise ClassifierError("EmptyDataset", "dataset has no samples")
    points = [s.point for s in ds.samples] + [_as_point(p) for p in extra_points]
    return kmeans_fit(points, k=k, init=init, max_iter=max_iter, labels=ds.labels())


def cluster_labels(model: KmcModel, ds: Dataset) -> tuple[bool, ...]:
    """Majority abnormal vote of each cluster's labeled members; a tie counts as abnormal."""
    if not model.centroids or len(model.assignment) < len(ds):
        raise ClassifierError("UnfittedModel", "model was not fitted on this dataset")
    labels = []
    for j in range(model.k):
        votes = [s.abnormal for s, a in zip(ds.samples, model.assignment) if a == j]
        if not votes:
            raise ClassifierError("UnfittedModel", f"cluster {j} has no labeled members")
        labels.append(2 * sum(votes) >= len(votes))
    return tuple(labels)


def kmc_label(model: KmcModel, ds: Dataset, q) -> bool:
    if model is None:
        raise ClassifierError("UnfittedModel", "no model")
    return cluster_labels(model, ds)[model.nearest(q)]


def plot_rows(ds: Dataset, queries, ks=(3, 5), model: KmcModel | None = None) -> list[dict]:
    """Point data for 3-D scatter plots: every training sample, then every query."""
    rows = []
    cl = cluster_labels(model, ds) if model is not None else None
    for i, s in enumerate(ds.samples, start=1):
        row = {"kind": "train", "name": str(i), "age": s.age, "weight": s.weight, "toileting": s.toileting,
               "label": s.abnormal}
        for k in ks:
            row[f"knn_k{k}"] = None
        row["kmc"] = cl[model.assignment[i - 1]] if cl is not None else None
        rows.append(row)
    for name, q in queries:
        row = {"kind": "query", "name": name, "age": q[0], "weight": q[1], "toileting": q[2], "label": None}
        for k in ks:
            row[f"knn_k{k}"] = knn_classify(ds, q, k).abnormal
        row["kmc"] = kmc_label(model, ds, q) if model is not None else None
        rows.append(row)
    return rows

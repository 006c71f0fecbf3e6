"""Datasets, non-i.i.d. client partitioning, federation weights and file
ingestion (IDX image files and a simple CSV layout).

Examples are stored column-major friendly: an ExampleSet keeps a dense
feature matrix plus a label vector, and behaves like a list of
LabeledExample for the per-example API.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .numerics import check_probability_vector
from .rng import derive_stream

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


class IdxFormatError(ValueError):
    """Malformed IDX file (bad magic, truncation, or count mismatch)."""


@dataclass(frozen=True)
class LabeledExample:
    x: np.ndarray
    y: int | float

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        if not np.all(np.isfinite(self.x)):
            raise ValueError("non-finite feature vector")


class ExampleSet:
    """A list-like batch of labeled examples backed by dense arrays."""

    def __init__(self, X: np.ndarray, y: np.ndarray):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        if X.ndim != 2:
            raise ValueError("feature matrix must be 2-D")
        if len(X) != len(y):
            raise ValueError("feature/label count mismatch")
        if not np.all(np.isfinite(X)):
            raise ValueError("non-finite features")
        self.X = X
        self.y = y

    @classmethod
    def from_examples(cls, examples: Sequence[LabeledExample]) -> "ExampleSet":
        X = np.stack([ex.x for ex in examples])
        y = np.asarray([ex.y for ex in examples])
        return cls(X, y)

    @property
    def feature_dim(self) -> int:
        return self.X.shape[1]

    def __len__(self) -> int:
        return len(self.X)

    def __getitem__(self, i) -> "LabeledExample | ExampleSet":
        if isinstance(i, (int, np.integer)):
            return LabeledExample(self.X[i], self.y[i].item())
        return ExampleSet(self.X[i], self.y[i])

    def __iter__(self) -> Iterator[LabeledExample]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ExampleSet)
            and self.X.shape == other.X.shape
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.y, other.y)
        )


@dataclass
class ClientDataset:
    client_id: int
    train: ExampleSet
    test: ExampleSet

    def __post_init__(self):
        if len(self.train) == 0:
            raise ValueError("client train set must be non-empty")
        if len(self.test) and self.test.feature_dim != self.train.feature_dim:
            raise ValueError("train/test feature dimension mismatch")


@dataclass
class FederationData:
    clients: list[ClientDataset]
    weights: np.ndarray
    feature_dim: int
    num_classes: int

    def __post_init__(self):
        self.weights = check_probability_vector(self.weights)
        if len(self.weights) != len(self.clients):
            raise ValueError("weights length must equal number of clients")
        if sum(len(c.train) for c in self.clients) == 0:
            raise ValueError("federation has no training data")

    @property
    def num_clients(self) -> int:
        return len(self.clients)

    def with_weights(self, weights: np.ndarray) -> "FederationData":
        return FederationData(self.clients, weights, self.feature_dim, self.num_classes)


@dataclass
class EmpiricalDistribution:
    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if len(self.points) == 0:
            raise ValueError("empirical distribution needs at least one point")
        self.masses = check_probability_vector(self.masses)
        if len(self.masses) != len(self.points):
            raise ValueError("masses length must equal number of points")


# ---------------------------------------------------------------------------
# IDX ingestion


def _read_exact(fh, n: int, path: str, what: str) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise IdxFormatError(f"truncated IDX {what} in {path}")
    return buf


def read_idx_images(path: str | Path) -> np.ndarray:
    """Raw uint8 image tensor (n, rows, cols) from an IDX file."""
    path = str(path)
    with open(path, "rb") as fh:
        magic, n, rows, cols = struct.unpack(
            ">IIII", _read_exact(fh, 16, path, "header")
        )
        if magic != IDX_IMAGES_MAGIC:
            raise IdxFormatError(f"bad IDX magic {magic:#010x} in {path}")
        raw = _read_exact(fh, n * rows * cols, path, "payload")
    return np.frombuffer(raw, dtype=np.uint8).reshape(n, rows, cols)


def read_idx_labels(path: str | Path) -> np.ndarray:
    path = str(path)
    with open(path, "rb") as fh:
        magic, n = struct.unpack(">II", _read_exact(fh, 8, path, "header"))
        if magic != IDX_LABELS_MAGIC:
            raise IdxFormatError(f"bad IDX magic {magic:#010x} in {path}")
        raw = _read_exact(fh, n, path, "payload")
    return np.frombuffer(raw, dtype=np.uint8)


def write_idx_images(path: str | Path, images: np.ndarray) -> None:
    images = np.asarray(images, dtype=np.uint8)
    n, rows, cols = images.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, n, rows, cols))
        fh.write(images.tobytes())


def write_idx_labels(path: str | Path, labels: np.ndarray) -> None:
    labels = np.asarray(labels, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", IDX_LABELS_MAGIC, len(labels)))
        fh.write(labels.tobytes())


def load_idx(images_path: str | Path, labels_path: str | Path) -> ExampleSet:
    """Load an IDX image/label pair; pixels scaled to [0, 1], row-major flat."""
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if len(images) != len(labels):
        raise IdxFormatError(
            f"count mismatch: {len(images)} images in {images_path} vs "
            f"{len(labels)} labels in {labels_path}"
        )
    X = images.reshape(len(images), -1).astype(float) / 255.0
    return ExampleSet(X, labels.astype(int))


def load_csv(path: str | Path) -> ExampleSet:
    """CSV with header row "y,x0,x1,..."."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0].strip() != "y":
            raise ValueError(f"CSV header must start with 'y': {path}")
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        raise ValueError(f"empty CSV dataset: {path}")
    arr = np.asarray(rows)
    y = arr[:, 0]
    if np.allclose(y, np.round(y)):
        y = y.astype(int)
    return ExampleSet(arr[:, 1:], y)


# ---------------------------------------------------------------------------
# Synthetic data and partitioning


def _class_directions(num_classes: int, feature_dim: int) -> np.ndarray:
    # Fixed unit directions, independent of the data seed.
    gen = derive_stream(0, f"class-dirs:{num_classes}:{feature_dim}").generator()
    dirs = gen.standard_normal((num_classes, feature_dim))
    return dirs / np.linalg.norm(dirs, axis=1, keepdims=True)


def gen_synthetic_mixture(
    num_classes: int,
    feature_dim: int,
    n: int,
    class_separation: float,
    seed: int,
) -> ExampleSet:
    """Gaussian blobs: class c centered at class_separation * u_c, identity
    covariance, classes drawn in a fixed balanced order."""
    if num_classes < 2:
        raise ValueError("need at least 2 classes")
    if n < num_classes:
        raise ValueError("need at least one example per class")
    dirs = _class_directions(num_classes, feature_dim)
    gen = derive_stream(seed, f"synthetic:{num_classes}:{feature_dim}:{n}").generator()
    y = np.arange(n) % num_classes
    X = class_separation * dirs[y] + gen.standard_normal((n, feature_dim))
    perm = gen.permutation(n)
    return ExampleSet(X[perm], y[perm])


def default_weights(federation: FederationData) -> np.ndarray:
    """Data-proportional weights from train sizes."""
    sizes = np.array([len(c.train) for c in federation.clients], dtype=float)
    return sizes / sizes.sum()


def partition_noniid(
    examples: ExampleSet,
    m: int,
    labels_per_client: int,
    size_dispersion: float,
    seed: int,
    num_classes: int | None = None,
    train_fraction: float = 0.75,
) -> FederationData:
    """Label-skewed partition: each client holds exactly labels_per_client
    classes; per-client sizes follow a log-normal dispersion; every example
    lands on at most one client; 75/25 train/test split per client."""
    if m < 1:
        raise ValueError("need at least one client")
    labels = np.asarray(examples.y, dtype=int)
    present = np.unique(labels)
    if num_classes is None:
        num_classes = int(present.max()) + 1
    if labels_per_client > len(present):
        raise ValueError(
            f"labels_per_client={labels_per_client} exceeds the "
            f"{len(present)} labels present"
        )
    gen = derive_stream(seed, f"partition:{m}:{labels_per_client}").generator()

    # Cyclic label assignment keeps per-label client counts balanced.
    order = gen.permutation(present)
    assignment: list[list[int]] = []
    cursor = 0
    for _ in range(m):
        mine = [int(order[(cursor + j) % len(order)]) for j in range(labels_per_client)]
        assignment.append(mine)
        cursor = (cursor + labels_per_client) % len(order)

    size_weight = (
        np.ones(m) if size_dispersion == 0 else gen.lognormal(0.0, size_dispersion, m)
    )

    pools = {int(c): gen.permutation(np.nonzero(labels == c)[0]) for c in present}
    holders: dict[int, list[int]] = {int(c): [] for c in present}
    for i, mine in enumerate(assignment):
        for c in mine:
            holders[c].append(i)

    client_indices: list[list[np.ndarray]] = [[] for _ in range(m)]
    for c, pool in pools.items():
        takers = holders[c]
        if not takers:
            continue
        if len(pool) < len(takers):
            raise ValueError(
                f"infeasible label assignment: label {c} has {len(pool)} "
                f"examples for {len(takers)} clients"
            )
        w = size_weight[takers]
        shares = np.floor(w / w.sum() * len(pool)).astype(int)
        shares = np.maximum(shares, 1)
        # Largest-remainder style trim/pad to match the pool exactly.
        while shares.sum() > len(pool):
            shares[int(np.argmax(shares))] -= 1
        rema = len(pool) - shares.sum()
        for k in range(rema):
            shares[k % len(takers)] += 1
        start = 0
        for i, s in zip(takers, shares):
            client_indices[i].append(pool[start : start + s])
            start += s

    clients = []
    for i in range(m):
        if not client_indices[i]:
            raise ValueError(f"infeasible label assignment: client {i} got no data")
        idx = np.concatenate(client_indices[i])
        idx = idx[gen.permutation(len(idx))]
        n_train = max(1, int(np.floor(train_fraction * len(idx))))
        clients.append(
            ClientDataset(
                client_id=i,
                train=examples[idx[:n_train]],
                test=examples[idx[n_train:]],
            )
        )

    fed = FederationData(
        clients=clients,
        weights=np.full(m, 1.0 / m),
        feature_dim=examples.feature_dim,
        num_classes=num_classes,
    )
    return fed.with_weights(default_weights(fed))


def to_empirical(
    dataset: ExampleSet,
    kappa: float | None = None,
) -> EmpiricalDistribution:
    """Uniform-mass point cloud; with a finite kappa the label joins the
    point as an extra coordinate scaled by sqrt(kappa), otherwise the
    distribution lives in feature space only."""
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    if kappa is None or np.isinf(kappa):
        points = dataset.X
    else:
        labels = np.asarray(dataset.y, dtype=float)[:, None]
        points = np.hstack([dataset.X, np.sqrt(kappa) * labels])
    masses = np.full(len(dataset), 1.0 / len(dataset))
    return EmpiricalDistribution(points, masses)

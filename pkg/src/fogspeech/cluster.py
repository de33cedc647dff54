"""Hand-rolled k-means over normalized feature vectors.

Lloyd iterations minimizing J = sum_k sum_{i in c_k} ||x_i - m_k||^2,
with plain random-point initialization and multiple restarts instead of
anything cleverer. Every tie is broken deterministically (lowest index;
restarts pick the first minimal-J run), so identical inputs give
bit-identical models.

The module-level steps (init_centroids / assign_step / update_step) are
the algorithm; fit_kmeans drives them, and the KMeans class wraps the
whole thing in a scikit-learn estimator for pipeline use.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import TooManyClusters

DEFAULT_RESTARTS = 10
DEFAULT_MAX_ITER = 300
DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class Dataset:
    """Points to cluster plus the recording ids they came from."""

    points: np.ndarray  # (n, d) float
    ids: tuple[str, ...]

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise ValueError(f"points must be (n, d>=1), got shape {pts.shape}")
        if len(self.ids) != len(pts):
            raise ValueError(
                f"{len(self.ids)} ids for {len(pts)} points"
            )
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class ClusterModel:
    k: int
    centroids: np.ndarray  # (k, d)
    assignment: np.ndarray  # (n,) int, values in [0, k)
    objective_j: float
    iterations: int
    seed: int


def init_centroids(data: Dataset, k: int, seed: int) -> np.ndarray:
    """Sample k distinct points uniformly without replacement.

    Sampling is over the deduplicated point set (np.unique sorts it), so
    the draw depends only on the set of points, not their order.
    """
    distinct = np.unique(data.points, axis=0)
    if not 1 <= k <= len(distinct):
        raise TooManyClusters(
            f"k={k} but only {len(distinct)} distinct points"
        )
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(distinct), size=k, replace=False)
    return distinct[idx].copy()


def _sq_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """(n, k) squared Euclidean distances."""
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def assign_step(data: Dataset, centroids: np.ndarray) -> np.ndarray:
    """Nearest-centroid labels; exact ties go to the lowest index."""
    if len(centroids) == 0:
        raise ValueError("centroids must be nonempty")
    return np.argmin(_sq_distances(data.points, centroids), axis=1)


def update_step(data: Dataset, assignment: np.ndarray, k: int) -> np.ndarray:
    """Move each centroid to the mean of its points.

    A cluster that lost all its points is re-seeded at the point
    farthest from its nearest surviving centroid, in ascending cluster
    index, so k stays fixed.
    """
    points = data.points
    centroids = np.empty((k, points.shape[1]))
    counts = np.bincount(assignment, minlength=k)
    for j in range(k):
        if counts[j]:
            centroids[j] = points[assignment == j].mean(axis=0)
    defined = counts > 0
    for j in np.flatnonzero(~defined):
        nearest = _sq_distances(points, centroids[defined]).min(axis=1)
        centroids[j] = points[int(np.argmax(nearest))]
        defined[j] = True
    return centroids


def objective(data: Dataset, model: ClusterModel) -> float:
    """Recompute J from scratch: summed squared distance to assigned centroid."""
    diff = data.points - model.centroids[model.assignment]
    return float(np.einsum("nd,nd->", diff, diff))


def _assign_with_j(
    points: np.ndarray, centroids: np.ndarray
) -> tuple[np.ndarray, float]:
    d2 = _sq_distances(points, centroids)
    assignment = np.argmin(d2, axis=1)
    return assignment, float(d2[np.arange(len(points)), assignment].sum())


def _run_once(
    data: Dataset,
    k: int,
    seed: int,
    max_iter: int,
    tol: float,
    history: list[float] | None = None,
) -> tuple[np.ndarray, np.ndarray, float, int]:
    """One Lloyd run from a fresh initialization.

    `history` collects J after every assignment (diagnostics; the
    sequence is non-increasing by construction).
    """
    centroids = init_centroids(data, k, seed)
    assignment, j = _assign_with_j(data.points, centroids)
    if history is not None:
        history.append(j)
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        new_centroids = update_step(data, assignment, k)
        shift = np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max()
        centroids = new_centroids
        assignment, j = _assign_with_j(data.points, centroids)
        if history is not None:
            history.append(j)
        if shift < tol:
            break
    return centroids, assignment, j, iterations


def fit_kmeans(
    data: Dataset,
    k: int,
    seed: int = 0,
    restarts: int = DEFAULT_RESTARTS,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    j_history: list[list[float]] | None = None,
) -> ClusterModel:
    """Best-of-`restarts` Lloyd runs; returns the minimal-J model.

    Restart seeds are spawned deterministically from `seed`, so the
    whole fit is reproducible bit-for-bit. Pass `j_history` to receive
    one per-assignment J trajectory per restart.
    """
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    run_seeds = np.random.SeedSequence(seed).generate_state(restarts)
    best = None
    for run_seed in run_seeds:
        history: list[float] | None = None
        if j_history is not None:
            history = []
            j_history.append(history)
        result = _run_once(data, k, int(run_seed), max_iter, tol, history=history)
        if best is None or result[2] < best[2]:
            best = result
    centroids, assignment, j, iterations = best
    centroids = centroids.copy()
    centroids.setflags(write=False)
    assignment = assignment.copy()
    assignment.setflags(write=False)
    return ClusterModel(
        k=k,
        centroids=centroids,
        assignment=assignment,
        objective_j=j,
        iterations=iterations,
        seed=seed,
    )


def model_to_record(model: ClusterModel, ids: Sequence[str]) -> dict:
    """JSON-ready view of a fitted model with per-recording assignments."""
    if len(ids) != len(model.assignment):
        raise ValueError(
            f"{len(ids)} ids for {len(model.assignment)} assignments"
        )
    return {
        "k": model.k,
        "seed": model.seed,
        "objective_j": model.objective_j,
        "iterations": model.iterations,
        "centroids": [[float(c) for c in row] for row in model.centroids],
        "assignments": [
            {"recording_id": rid, "cluster": int(label)}
            for rid, label in zip(ids, model.assignment)
        ],
    }


class KMeans(ClusterMixin, BaseEstimator):
    """scikit-learn face of fit_kmeans.

    Attributes (after fit): cluster_centers_, labels_, inertia_, n_iter_.
    """

    def __init__(
        self,
        n_clusters: int = 2,
        random_state: int = 0,
        n_init: int = DEFAULT_RESTARTS,
        max_iter: int = DEFAULT_MAX_ITER,
        tol: float = DEFAULT_TOL,
    ):
        self.n_clusters = n_clusters
        self.random_state = random_state
        self.n_init = n_init
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        data = Dataset(points=X, ids=tuple(str(i) for i in range(len(X))))
        model = fit_kmeans(
            data,
            k=self.n_clusters,
            seed=self.random_state,
            restarts=self.n_init,
            max_iter=self.max_iter,
            tol=self.tol,
        )
        self.cluster_centers_ = np.asarray(model.centroids)
        self.labels_ = np.asarray(model.assignment)
        self.inertia_ = model.objective_j
        self.n_iter_ = model.iterations
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "cluster_centers_")
        X = check_array(X, dtype=np.float64)
        data = Dataset(points=X, ids=tuple(str(i) for i in range(len(X))))
        return assign_step(data, self.cluster_centers_)

"""Normalized Laplacian, eigengap model selection, spectral embedding and k-means."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import InputError

EIGEN_FLOOR = 1e-10
PSD_TOL = 1e-8
ZERO_ROW_TOL = 1e-12


@dataclass(frozen=True)
class LaplacianSpectrum:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # column i pairs with eigenvalues[i]

    @property
    def n(self) -> int:
        return len(self.eigenvalues)


@dataclass(frozen=True)
class SpectralEmbedding:
    rows: np.ndarray
    zero_rows: np.ndarray  # boolean mask of rows that could not be normalized

    @property
    def degenerate(self) -> bool:
        return bool(self.zero_rows.any())


@dataclass(frozen=True)
class ClusterAssignment:
    labels: np.ndarray
    k: int
    inertia: float = 0.0
    centers: np.ndarray | None = None
    degenerate: bool = False


def normalized_laplacian(w) -> np.ndarray:
    """Return ``I - D^-1/2 W D^-1/2`` for a non-negative affinity matrix."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise InputError(f"affinity must be square, got shape {w.shape}")
    degrees = w.sum(axis=1)
    if np.any(degrees <= 0):
        bad = int(np.flatnonzero(degrees <= 0)[0])
        raise InputError(f"segment {bad} has zero degree")
    scale = 1.0 / np.sqrt(degrees)
    lap = np.eye(len(w)) - scale[:, None] * w * scale[None, :]
    return 0.5 * (lap + lap.T)


def eigendecompose(lap) -> LaplacianSpectrum:
    """Full symmetric eigendecomposition with a reproducible sign convention.

    Eigenvalues in (-1e-8, 0) are clamped to 0. Each eigenvector is flipped so
    that its first non-negligible component is positive.
    """
    lap = np.asarray(lap, dtype=float)
    if lap.ndim != 2 or lap.shape[0] != lap.shape[1]:
        raise InputError(f"matrix must be square, got shape {lap.shape}")
    asym = np.max(np.abs(lap - lap.T)) if lap.size else 0.0
    if asym > PSD_TOL:
        raise InputError(f"matrix is not symmetric (max asymmetry {asym:.3g})")
    vals, vecs = np.linalg.eigh(lap)
    vals = np.where((vals < 0) & (vals > -PSD_TOL), 0.0, vals)
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        nz = np.flatnonzero(np.abs(col) > ZERO_ROW_TOL)
        if nz.size and col[nz[0]] < 0:
            vecs[:, j] = -col
    return LaplacianSpectrum(vals, vecs)


def _eigenvalues(spectrum) -> np.ndarray:
    if isinstance(spectrum, LaplacianSpectrum):
        return spectrum.eigenvalues
    return np.asarray(spectrum, dtype=float)


def eigengap_ratio(eigenvalues, k: int) -> float:
    """lambda_{k+1} / lambda_k with 1-based indices and a floored denominator."""
    vals = _eigenvalues(eigenvalues)
    if not 1 <= k < len(vals):
        raise InputError(f"k={k} needs 1 <= k < {len(vals)}")
    return float(vals[k] / max(vals[k - 1], EIGEN_FLOOR))


def k_candidates(k_range, n: int) -> list[int]:
    """Clamp a k range (inclusive ``(lo, hi)`` pair or iterable of ints) to [2, n-1]."""
    if isinstance(k_range, tuple) and len(k_range) == 2:
        ks: Iterable[int] = range(int(k_range[0]), int(k_range[1]) + 1)
    else:
        ks = k_range
    return sorted({int(k) for k in ks if 2 <= int(k) <= n - 1})


def estimate_num_speakers(spectrum, k_range=(2, 50)) -> int:
    """Pick k maximizing the eigengap ratio; ties go to the smallest k."""
    vals = _eigenvalues(spectrum)
    ks = k_candidates(k_range, len(vals))
    if not ks:
        raise InputError(f"k range {k_range} is empty after clamping to [2, {len(vals) - 1}]")
    best_k, best_ratio = ks[0], -np.inf
    for k in ks:
        ratio = eigengap_ratio(vals, k)
        if ratio > best_ratio:
            best_k, best_ratio = k, ratio
    return best_k


def spectral_embed(spectrum: LaplacianSpectrum, k: int) -> SpectralEmbedding:
    """Rows of the k smallest-eigenvalue eigenvectors, normalized to unit length."""
    n = spectrum.n
    if not 1 <= k <= n:
        raise InputError(f"k={k} out of range [1, {n}]")
    x = np.array(spectrum.eigenvectors[:, :k], dtype=float)
    norms = np.linalg.norm(x, axis=1)
    zero = norms < ZERO_ROW_TOL
    x[~zero] /= norms[~zero, None]
    x[zero] = 0.0
    return SpectralEmbedding(x, zero)


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(x)
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[c] = x[idx]
        d2 = np.minimum(d2, np.sum((x - centers[c]) ** 2, axis=1))
    return centers


def _sq_dists(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    return np.sum((x[:, None, :] - centers[None, :, :]) ** 2, axis=2)


def _lloyd(x, centers, max_iter, tol):
    prev = np.inf
    for _ in range(max_iter):
        d2 = _sq_dists(x, centers)
        labels = np.argmin(d2, axis=1)
        for c in range(len(centers)):
            members = labels == c
            if members.any():
                centers[c] = x[members].mean(axis=0)
            else:
                # reseed an empty cluster at the point worst served by its center
                far = int(np.argmax(d2[np.arange(len(x)), labels]))
                centers[c] = x[far]
                labels[far] = c
        inertia = float(np.sum((x - centers[labels]) ** 2))
        if inertia == 0 or (np.isfinite(prev) and prev - inertia <= tol * prev):
            break
        prev = inertia
    labels = np.argmin(_sq_dists(x, centers), axis=1)
    labels, centers = _hartigan(x, labels, len(centers))
    inertia = float(np.sum((x - centers[labels]) ** 2))
    return labels, centers, inertia


def _hartigan(x, labels, k, max_sweeps=100):
    """Single-point transfers that strictly lower inertia.

    Lloyd stops at any partition where each point is nearest its own centroid;
    moving a point also shifts both centroids, which Lloyd ignores. This pass
    accounts for that and escapes such fixed points.
    """
    labels = labels.copy()
    counts = np.bincount(labels, minlength=k).astype(float)
    centers = np.zeros((k, x.shape[1]))
    for c in range(k):
        if counts[c]:
            centers[c] = x[labels == c].mean(axis=0)
    for _ in range(max_sweeps):
        moved = False
        for i in range(len(x)):
            a = labels[i]
            if counts[a] <= 1:
                continue
            d2 = np.sum((centers - x[i]) ** 2, axis=1)
            remove_gain = counts[a] / (counts[a] - 1) * d2[a]
            add_cost = counts / (counts + 1) * d2
            add_cost[a] = np.inf
            b = int(np.argmin(add_cost))
            if add_cost[b] < remove_gain * (1 - 1e-12):
                centers[a] = (centers[a] * counts[a] - x[i]) / (counts[a] - 1)
                centers[b] = (centers[b] * counts[b] + x[i]) / (counts[b] + 1)
                counts[a] -= 1
                counts[b] += 1
                labels[i] = b
                moved = True
        if not moved:
            break
    for c in range(k):
        if counts[c]:
            centers[c] = x[labels == c].mean(axis=0)
    return labels, centers


def _canonical(labels: np.ndarray, centers: np.ndarray):
    """Relabel clusters in order of first appearance."""
    order = list(dict.fromkeys(labels.tolist()))
    order += [c for c in range(len(centers)) if c not in order]
    remap = np.empty(len(centers), dtype=int)
    remap[order] = np.arange(len(centers))
    return remap[labels], centers[order]


def kmeans(points, k: int, seed: int = 0, n_init: int = 10, max_iter: int = 300,
           tol: float = 1e-6) -> ClusterAssignment:
    """Seeded k-means++ / Lloyd with restarts; keeps the lowest-inertia run.

    Restart seeds are spawned from ``seed`` so the result does not depend on
    execution order. Ties in inertia go to the earliest restart.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = len(x)
    if not 1 <= k <= n:
        raise InputError(f"k={k} must be in [1, {n}]")
    best = None
    for child in np.random.SeedSequence(seed).spawn(n_init):
        rng = np.random.default_rng(child)
        run = _lloyd(x, _kmeans_pp_init(x, k, rng), max_iter, tol)
        if best is None or run[2] < best[2]:
            best = run
    labels, centers, inertia = best
    labels, centers = _canonical(labels, centers)
    degenerate = len(np.unique(labels)) < k
    return ClusterAssignment(labels, k, inertia, centers, degenerate)


def assign_nearest(points, centers) -> np.ndarray:
    return np.argmin(_sq_dists(np.asarray(points, float), np.asarray(centers, float)), axis=1)

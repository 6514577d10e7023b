"""Cosine affinity construction and p-thresholding refinement."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import InputError
from .spectral import eigengap_ratio, estimate_num_speakers, normalized_laplacian

DEFAULT_P_RANGE = tuple(range(40, 96, 5))


def validate_affinity(w, name: str = "affinity") -> np.ndarray:
    """Check the affinity invariants: square, exactly symmetric, in [0, 1], unit diagonal."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise InputError(f"{name} must be square, got shape {w.shape}")
    if not np.array_equal(w, w.T):
        raise InputError(f"{name} is not symmetric")
    if w.size and (w.min() < 0 or w.max() > 1):
        raise InputError(f"{name} has entries outside [0, 1]")
    if not np.all(np.diag(w) == 1.0):
        raise InputError(f"{name} diagonal is not 1")
    return w


def cosine_affinity(embeddings) -> np.ndarray:
    """Pairwise (1 + cos) / 2 similarities with a unit diagonal."""
    try:
        x = np.asarray(embeddings, dtype=float)
    except ValueError as exc:
        raise InputError(f"embeddings have inconsistent dimensions: {exc}") from None
    if x.ndim != 2:
        raise InputError(f"embeddings must be a 2-d array, got shape {x.shape}")
    if len(x) < 2:
        raise InputError(f"need at least 2 segments, got {len(x)}")
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms == 0):
        raise InputError(f"segment {int(np.flatnonzero(norms == 0)[0])} has a zero-norm embedding")
    x = x / norms[:, None]
    cos = np.clip(x @ x.T, -1.0, 1.0)
    w = 0.5 * (1.0 + cos)
    w = 0.5 * (w + w.T)
    np.fill_diagonal(w, 1.0)
    return w


def p_threshold(w, p: float, tau: float) -> np.ndarray:
    """Keep the top ceil((100-p)% of N) entries of every row at 1, scale the rest by tau.

    The diagonal of a square input is always among the kept entries; other
    ties are broken towards the lower column index. The result is generally
    not symmetric.
    """
    w = np.asarray(w, dtype=float)
    if not 0 <= p <= 100:
        raise InputError(f"p={p} outside [0, 100]")
    if tau <= 0:
        raise InputError(f"tau must be positive, got {tau}")
    n = w.shape[1]
    # the small offset absorbs float fuzz in (100 - p) * n / 100
    keep = min(n, max(0, math.ceil((100 - p) * n / 100 - 1e-9)))
    out = w * tau
    if keep:
        key = -w
        if w.shape[0] == n:
            np.fill_diagonal(key, -np.inf)  # self-affinity is always kept
        order = np.argsort(key, axis=1, kind="stable")[:, :keep]
        out[np.arange(w.shape[0])[:, None], order] = 1.0
    return out


def symmetrize(wp) -> np.ndarray:
    wp = np.asarray(wp, dtype=float)
    if wp.ndim != 2 or wp.shape[0] != wp.shape[1]:
        raise InputError(f"matrix must be square, got shape {wp.shape}")
    return 0.5 * (wp + wp.T)


def refine(w, p: float, tau: float) -> np.ndarray:
    return symmetrize(p_threshold(w, p, tau))


def _score_candidate(w, p, tau, k_hint, k_range):
    refined = refine(w, p, tau)
    vals = np.linalg.eigvalsh(normalized_laplacian(refined))
    k = k_hint if k_hint is not None else estimate_num_speakers(vals, k_range)
    return eigengap_ratio(vals, k), refined


def auto_tune_p(w, tau: float = 0.01, p_range=DEFAULT_P_RANGE, k_hint: int | None = None,
                k_range=(2, 50), jobs: int = 1):
    """Choose p by the largest Laplacian eigengap ratio over the candidates.

    When ``k_hint`` is None each candidate is scored at its own eigengap
    estimate of k. Ties resolve to the smaller p.

    Returns
    -------
    (p_best, refined_affinity)
    """
    candidates = sorted(set(p_range))
    if not candidates:
        raise InputError("p range is empty")
    if jobs > 1 and len(candidates) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            scored = list(pool.map(lambda p: _score_candidate(w, p, tau, k_hint, k_range),
                                   candidates))
    else:
        scored = [_score_candidate(w, p, tau, k_hint, k_range) for p in candidates]
    best = 0
    for i, (ratio, _) in enumerate(scored):
        if ratio > scored[best][0]:
            best = i
    return candidates[best], scored[best][1]

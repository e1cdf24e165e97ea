"""Dynamic time warping of feature sequences and frame-length alignment.

``content_loss`` aligns a source embedding sequence to a reference with DTW,
warps it onto the reference frame grid, and returns the mean per-frame
Euclidean distance between the matched frames.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DomainError
from .pitch import F0Contour

METRICS = ("euclidean", "cosine_distance")

# backtracking preference on cost ties: diagonal, then (0,1), then (1,0)
_STEPS = ((1, 1), (0, 1), (1, 0))


@dataclass(frozen=True, eq=False)
class FeatureSequence:
    """T x D matrix of frame-wise feature vectors."""

    data: np.ndarray
    frame_rate: float | None = None

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValueError(f"feature data must be 2-D, got shape {data.shape}")
        if data.shape[1] < 1:
            raise ValueError("feature dimension must be >= 1")
        if data.size and not np.all(np.isfinite(data)):
            raise ValueError("feature data must be finite")
        if self.frame_rate is not None and not self.frame_rate > 0:
            raise ValueError("frame_rate must be > 0")
        data = data.copy()
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    def __len__(self) -> int:
        return int(self.data.shape[0])

    @property
    def dim(self) -> int:
        return int(self.data.shape[1])


@dataclass(frozen=True, eq=False)
class DtwResult:
    """Monotonic boundary-complete alignment path with its accumulated cost."""

    path: np.ndarray
    cost: float
    normalized_cost: float

    def __post_init__(self) -> None:
        path = np.asarray(self.path, dtype=np.int64)
        if path.ndim != 2 or path.shape[1] != 2 or path.shape[0] < 1:
            raise ValueError("path must be an (L, 2) index array with L >= 1")
        if tuple(path[0]) != (0, 0):
            raise ValueError("path must start at (0, 0)")
        steps = np.diff(path, axis=0)
        valid = {(1, 0), (0, 1), (1, 1)}
        for step in steps:
            if (int(step[0]), int(step[1])) not in valid:
                raise ValueError("path steps must be in {(1,0), (0,1), (1,1)}")
        path = path.copy()
        path.setflags(write=False)
        object.__setattr__(self, "path", path)


def frame_distances(ref: FeatureSequence, src: FeatureSequence, metric: str) -> np.ndarray:
    """Pairwise frame distance matrix, shape (len(ref), len(src))."""
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
    a, b = ref.data, src.data
    if metric == "euclidean":
        return cdist(a, b, metric="euclidean")
    norms_a = np.linalg.norm(a, axis=1)
    norms_b = np.linalg.norm(b, axis=1)
    if np.any(norms_a == 0.0) or np.any(norms_b == 0.0):
        raise DomainError("cosine_distance is undefined for zero-norm frames")
    sim = (a @ b.T) / np.outer(norms_a, norms_b)
    return 1.0 - np.clip(sim, -1.0, 1.0)


def dtw(
    ref: FeatureSequence,
    src: FeatureSequence,
    metric: str = "euclidean",
    band: int | None = None,
) -> DtwResult:
    """Minimum-cost monotonic alignment of two feature sequences.

    Steps {(1,0), (0,1), (1,1)} with unit weights; cost is the sum of frame
    distances over every cell the path visits.  ``band`` optionally restricts
    the search to a Sakoe-Chiba band of that radius around the diagonal.
    """
    if len(ref) == 0 or len(src) == 0:
        raise DomainError("dtw requires non-empty sequences")
    if ref.dim != src.dim:
        raise DomainError(
            f"feature dimension mismatch: ref D={ref.dim}, src D={src.dim}"
        )
    d = frame_distances(ref, src, metric)
    t, s = d.shape
    if band is not None:
        mask = np.abs(
            np.arange(t)[:, None] * (s / t) - np.arange(s)[None, :]
        ) > band
        d = np.where(mask, np.inf, d)

    acc = np.full((t + 1, s + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, t + 1):
        prev = acc[i - 1]
        cur = acc[i]
        row = d[i - 1]
        for j in range(1, s + 1):
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = row[j - 1] + best

    if not np.isfinite(acc[t, s]):
        raise DomainError("no path within the requested band")
    path = [(t - 1, s - 1)]
    i, j = t - 1, s - 1
    while (i, j) != (0, 0):
        best = None
        for di, dj in _STEPS:
            pi, pj = i - di, j - dj
            if pi < 0 or pj < 0:
                continue
            c = acc[pi + 1, pj + 1]
            if best is None or c < best[0]:
                best = (c, pi, pj)
        _, i, j = best
        path.append((i, j))
    path.reverse()
    cost = float(acc[t, s])
    return DtwResult(
        path=np.asarray(path, dtype=np.int64),
        cost=cost,
        normalized_cost=cost / len(path),
    )


def warp_to_reference(
    src: FeatureSequence, result: DtwResult, ref_len: int, reduce: str = "mean"
) -> FeatureSequence:
    """Collapse a DTW path onto the reference grid.

    Output frame i is the mean of all source frames matched to reference
    frame i; with ``reduce="first"`` the first matched frame is used instead.
    """
    if reduce not in ("mean", "first"):
        raise ValueError("reduce must be 'mean' or 'first'")
    path = result.path
    if int(path[-1, 0]) != ref_len - 1:
        raise DomainError(
            f"path ends at reference index {int(path[-1, 0])}, "
            f"inconsistent with ref_len {ref_len}"
        )
    out = np.zeros((ref_len, src.dim))
    counts = np.zeros(ref_len)
    for i, j in path:
        if reduce == "first" and counts[i]:
            continue
        out[i] += src.data[j]
        counts[i] += 1
    out /= counts[:, None]
    return FeatureSequence(out, frame_rate=src.frame_rate)


def content_loss(c: FeatureSequence, c_emg: FeatureSequence) -> float:
    """DTW-aligned content distance between two embedding sequences.

    The source is aligned to the reference with Euclidean DTW, warped onto
    the reference frame grid, and the mean frame-wise Euclidean distance is
    returned.  Identical sequences give exactly 0.
    """
    result = dtw(c, c_emg, metric="euclidean")
    warped = warp_to_reference(c_emg, result, len(c))
    return float(np.mean(np.linalg.norm(c.data - warped.data, axis=1)))


def nearest_interpolate(contour: F0Contour, target_len: int) -> F0Contour:
    """Resample a contour to a new frame count by nearest-index selection.

    Output frame k copies source frame round(k * (T-1) / (target_len-1));
    a target length of 1 takes the middle frame.  f0 and voicing move
    together.
    """
    if len(contour) == 0:
        raise DomainError("cannot interpolate an empty contour")
    if target_len < 1:
        raise ValueError("target_len must be >= 1")
    t = len(contour)
    if target_len == 1:
        idx = np.asarray([int(np.rint((t - 1) / 2.0))])
    else:
        idx = np.rint(np.arange(target_len) * (t - 1) / (target_len - 1)).astype(np.int64)
    return F0Contour(
        contour.f0[idx], contour.voiced[idx], contour.hop, contour.sample_rate
    )

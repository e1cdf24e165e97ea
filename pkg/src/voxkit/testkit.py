"""Brute-force reference implementations and contour perturbation.

These oracles live in the shipped library, not only in the test suite, so
results of the fast implementations can be cross-checked at any time.  Both
enumerators walk every admissible path explicitly; they share nothing with
the dynamic-programming implementations they validate.
"""
from __future__ import annotations

import warnings

import numpy as np

from .align import DtwResult, FeatureSequence, frame_distances
from .errors import DomainError
from .pitch import F0Contour

BRUTE_DTW_MAX_LEN = 10
BRUTE_EDIT_MAX_LEN = 6

# op codes ordered by backtracking preference: diagonal, insertion, deletion
_OPS = ((1, 1), (0, 1), (1, 0))


def brute_force_dtw(
    ref: FeatureSequence, src: FeatureSequence, metric: str = "euclidean"
) -> DtwResult:
    """Exact DTW by exhaustive enumeration of all monotonic paths.

    Lengths are capped at 10 frames per side; enumeration is exponential.
    """
    t, s = len(ref), len(src)
    if t == 0 or s == 0:
        raise DomainError("brute_force_dtw requires non-empty sequences")
    if t > BRUTE_DTW_MAX_LEN or s > BRUTE_DTW_MAX_LEN:
        raise DomainError(
            f"brute_force_dtw caps lengths at {BRUTE_DTW_MAX_LEN}, got {t}x{s}"
        )
    d = frame_distances(ref, src, metric)

    best_cost = np.inf
    best_path: list[tuple[int, int]] | None = None
    stack = [((0, 0), d[0, 0], [(0, 0)])]
    while stack:
        (i, j), cost, path = stack.pop()
        if (i, j) == (t - 1, s - 1):
            if cost < best_cost:
                best_cost = cost
                best_path = path
            continue
        for di, dj in _OPS:
            ni, nj = i + di, j + dj
            if ni < t and nj < s:
                stack.append(((ni, nj), cost + d[ni, nj], path + [(ni, nj)]))
    return DtwResult(
        path=np.asarray(best_path, dtype=np.int64),
        cost=float(best_cost),
        normalized_cost=float(best_cost) / len(best_path),
    )


def brute_force_edit(ref, hyp) -> tuple[int, int, int]:
    """Exact (S, I, D) by exhaustive enumeration of all alignments.

    Among minimum-cost alignments the one whose operation sequence, read
    from the end, prefers substitution, then insertion, then deletion, is
    selected; that matches the tie-break contract of the fast edit distance.
    Lengths are capped at 6 tokens.
    """
    ref = list(ref)
    hyp = list(hyp)
    n, m = len(ref), len(hyp)
    if n > BRUTE_EDIT_MAX_LEN or m > BRUTE_EDIT_MAX_LEN:
        raise DomainError(
            f"brute_force_edit caps lengths at {BRUTE_EDIT_MAX_LEN}, got {n} and {m}"
        )

    complete: list[tuple[int, tuple[int, ...], tuple[int, int, int]]] = []
    # ops per step: 0 = diagonal (match/sub), 1 = insertion, 2 = deletion
    stack = [(0, 0, 0, (), (0, 0, 0))]
    while stack:
        i, j, cost, ops, sid = stack.pop()
        if i == n and j == m:
            complete.append((cost, ops, sid))
            continue
        s, ins, dele = sid
        if i < n and j < m:
            sub = int(ref[i] != hyp[j])
            stack.append((i + 1, j + 1, cost + sub, ops + (0,), (s + sub, ins, dele)))
        if j < m:
            stack.append((i, j + 1, cost + 1, ops + (1,), (s, ins + 1, dele)))
        if i < n:
            stack.append((i + 1, j, cost + 1, ops + (2,), (s, ins, dele + 1)))

    min_cost = min(c for c, _, _ in complete)
    best = min(
        (ops[::-1], sid) for c, ops, sid in complete if c == min_cost
    )
    return best[1]


def perturb_contour(
    contour: F0Contour,
    global_shift_hz: float = 0.0,
    local_noise_hz: float = 0.0,
    seed: int = 0,
) -> F0Contour:
    """Shift and jitter the voiced f0 values of a contour.

    Voiced frames receive the global shift plus seeded zero-mean Gaussian
    noise of the given standard deviation; voicing flags are unchanged.
    Values falling outside [1, 1000] Hz are clamped with a warning.
    """
    rng = np.random.default_rng(seed)
    f0 = contour.f0.copy()
    mask = contour.voiced == 1
    noise = rng.normal(0.0, local_noise_hz, size=int(mask.sum())) if local_noise_hz > 0 else 0.0
    f0[mask] = f0[mask] + global_shift_hz + noise
    out_of_range = mask & ((f0 < 1.0) | (f0 > 1000.0))
    n_clamped = int(out_of_range.sum())
    if n_clamped:
        warnings.warn(
            f"perturb_contour clamped {n_clamped} f0 values into [1, 1000] Hz",
            stacklevel=2,
        )
        f0[mask] = np.clip(f0[mask], 1.0, 1000.0)
    return F0Contour(f0, contour.voiced, contour.hop, contour.sample_rate)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from voxkit import (
    DomainError,
    FeatureSequence,
    brute_force_dtw,
    content_loss,
    dtw,
    nearest_interpolate,
    warp_to_reference,
)
from testutil import contour


def seq(rows):
    return FeatureSequence(np.asarray(rows, dtype=np.float64))


def test_self_alignment_is_diagonal_with_zero_cost():
    rng = np.random.default_rng(0)
    a = seq(rng.normal(size=(6, 4)))
    result = dtw(a, a)
    assert result.cost == 0.0
    assert np.array_equal(result.path, np.column_stack([np.arange(6), np.arange(6)]))


def test_hand_example_path_and_cost():
    ref = seq([[0.0], [1.0]])
    src = seq([[0.0], [0.0], [1.0]])
    result = dtw(ref, src)
    assert result.path.tolist() == [[0, 0], [0, 1], [1, 2]]
    assert result.cost == 0.0


def test_path_validity_invariants():
    rng = np.random.default_rng(1)
    for _ in range(20):
        t, s = rng.integers(1, 9, size=2)
        a = seq(rng.normal(size=(t, 2)))
        b = seq(rng.normal(size=(s, 2)))
        result = dtw(a, b)
        path = result.path
        assert tuple(path[0]) == (0, 0)
        assert tuple(path[-1]) == (t - 1, s - 1)
        steps = {tuple(d) for d in np.diff(path, axis=0)}
        assert steps <= {(1, 0), (0, 1), (1, 1)}


def test_cost_symmetry():
    rng = np.random.default_rng(2)
    a = seq(rng.normal(size=(5, 3)))
    b = seq(rng.normal(size=(7, 3)))
    for metric in ("euclidean", "cosine_distance"):
        assert dtw(a, b, metric).cost == pytest.approx(dtw(b, a, metric).cost, abs=1e-12)


def test_dimension_mismatch_and_empty_error():
    a = seq([[0.0, 1.0]])
    b = seq([[0.0]])
    with pytest.raises(DomainError):
        dtw(a, b)
    empty = FeatureSequence(np.zeros((0, 2)))
    with pytest.raises(DomainError):
        dtw(a, empty)


def test_band_constraint_wide_band_matches_unbanded():
    rng = np.random.default_rng(8)
    a = seq(rng.normal(size=(10, 2)))
    b = seq(rng.normal(size=(12, 2)))
    assert dtw(a, b, band=20).cost == dtw(a, b).cost


def test_band_constraint_zero_band_forces_near_diagonal():
    rng = np.random.default_rng(9)
    a = seq(rng.normal(size=(6, 2)))
    result = dtw(a, a, band=0)
    assert result.cost == 0.0
    assert np.array_equal(result.path[:, 0], result.path[:, 1])


def test_cosine_zero_norm_frame_errors():
    a = seq([[0.0, 0.0]])
    with pytest.raises(DomainError):
        dtw(a, a, metric="cosine_distance")


@settings(max_examples=60, deadline=None)
@given(
    t=st.integers(1, 6),
    s=st.integers(1, 6),
    d=st.integers(1, 3),
    seed=st.integers(0, 2**16),
)
def test_dtw_matches_brute_force(t, s, d, seed):
    rng = np.random.default_rng(seed)
    a = seq(rng.normal(size=(t, d)))
    b = seq(rng.normal(size=(s, d)))
    fast = dtw(a, b)
    brute = brute_force_dtw(a, b)
    assert fast.cost == pytest.approx(brute.cost, abs=1e-9)


def test_warp_identity_path():
    a = seq([[1.0], [2.0], [3.0]])
    result = dtw(a, a)
    warped = warp_to_reference(a, result, 3)
    assert np.array_equal(warped.data, a.data)


def test_warp_hand_mean():
    ref = seq([[0.0], [1.0]])
    src = seq([[0.0], [0.0], [1.0]])
    result = dtw(ref, src)
    src_values = seq([[2.0], [4.0], [6.0]])
    warped = warp_to_reference(src_values, result, 2)
    assert warped.data.tolist() == [[3.0], [6.0]]


def test_warp_single_frame_source():
    src = seq([[5.0]])
    ref = seq([[0.0], [0.0], [0.0]])
    result = dtw(ref, src)
    warped = warp_to_reference(src, result, 3)
    assert warped.data.tolist() == [[5.0], [5.0], [5.0]]


def test_warp_first_match_mode():
    ref = seq([[0.0], [1.0]])
    src = seq([[0.0], [0.0], [1.0]])
    result = dtw(ref, src)
    warped = warp_to_reference(seq([[2.0], [4.0], [6.0]]), result, 2, reduce="first")
    assert warped.data.tolist() == [[2.0], [6.0]]


def test_warp_inconsistent_ref_len_errors():
    a = seq([[1.0], [2.0]])
    result = dtw(a, a)
    with pytest.raises(DomainError):
        warp_to_reference(a, result, 5)


def test_warp_output_length_always_ref_len():
    rng = np.random.default_rng(3)
    for _ in range(10):
        t, s = rng.integers(1, 10, size=2)
        a = seq(rng.normal(size=(t, 2)))
        b = seq(rng.normal(size=(s, 2)))
        warped = warp_to_reference(b, dtw(a, b), t)
        assert len(warped) == t


def test_content_loss_identical_zero():
    rng = np.random.default_rng(4)
    for t in (1, 3, 8):
        a = seq(rng.normal(size=(t, 5)))
        assert content_loss(a, a) == 0.0


def test_content_loss_hand_zero_case():
    c = seq([[0.0], [1.0]])
    c_emg = seq([[0.0], [0.0], [1.0]])
    assert content_loss(c, c_emg) == 0.0


def test_content_loss_hand_value():
    c = seq([[0.0], [2.0]])
    c_emg = seq([[1.0], [1.0]])
    assert content_loss(c, c_emg) == pytest.approx(1.0, abs=1e-12)


def test_nearest_interpolate_identity():
    c = contour([100.0, 200.0, 300.0])
    out = nearest_interpolate(c, 3)
    assert np.array_equal(out.f0, c.f0)
    assert np.array_equal(out.voiced, c.voiced)


def test_nearest_interpolate_hand_upsample():
    c = contour([100.0, 200.0])
    out = nearest_interpolate(c, 4)
    assert out.f0.tolist() == [100.0, 100.0, 200.0, 200.0]


def test_nearest_interpolate_to_single_frame():
    c = contour([100.0, 200.0, 300.0])
    assert nearest_interpolate(c, 1).f0.tolist() == [200.0]


def test_nearest_interpolate_moves_voicing_with_f0():
    c = contour([100.0, 0.0], voiced=[1, 0])
    out = nearest_interpolate(c, 4)
    assert out.f0.tolist() == [100.0, 100.0, 0.0, 0.0]
    assert out.voiced.tolist() == [1, 1, 0, 0]


def test_nearest_interpolate_empty_errors():
    empty = contour([])
    with pytest.raises(DomainError):
        nearest_interpolate(empty, 3)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 20), target=st.integers(1, 30), seed=st.integers(0, 999))
def test_nearest_interpolate_selects_from_source_multiset(n, target, seed):
    rng = np.random.default_rng(seed)
    values = rng.uniform(50, 400, n)
    c = contour(values)
    out = nearest_interpolate(c, target)
    assert len(out) == target
    assert set(out.f0.tolist()) <= set(values.tolist())

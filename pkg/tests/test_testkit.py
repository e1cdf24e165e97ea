import itertools

import numpy as np
import pytest

from voxkit import (
    DomainError,
    FeatureSequence,
    brute_force_dtw,
    brute_force_edit,
    dtw,
    local_f0_deviation,
    perturb_contour,
)
from voxkit.metrics import edit_counts
from testutil import contour


def test_brute_dtw_self_zero():
    a = FeatureSequence(np.array([[1.0], [2.0], [3.0]]))
    assert brute_force_dtw(a, a).cost == 0.0


def test_brute_dtw_single_frames():
    a = FeatureSequence(np.array([[1.0, 0.0]]))
    b = FeatureSequence(np.array([[0.0, 0.0]]))
    assert brute_force_dtw(a, b).cost == pytest.approx(1.0)


def test_brute_dtw_length_cap():
    a = FeatureSequence(np.zeros((11, 1)))
    with pytest.raises(DomainError):
        brute_force_dtw(a, a)


def test_brute_dtw_agrees_with_fast_dtw():
    rng = np.random.default_rng(17)
    for _ in range(40):
        t, s = rng.integers(1, 9, size=2)
        a = FeatureSequence(rng.normal(size=(t, 2)))
        b = FeatureSequence(rng.normal(size=(s, 2)))
        assert dtw(a, b).cost == pytest.approx(brute_force_dtw(a, b).cost, abs=1e-9)


def test_brute_edit_identical():
    assert brute_force_edit(list("abc"), list("abc")) == (0, 0, 0)


def test_brute_edit_substitution():
    assert brute_force_edit(list("abc"), list("axc")) == (1, 0, 0)


def test_brute_edit_length_cap():
    with pytest.raises(DomainError):
        brute_force_edit(list("abcdefg"), list("a"))


def test_brute_edit_agrees_with_fast_counts_small_sweep():
    alphabet = "ab"
    seqs = [
        list(s)
        for n in range(0, 4)
        for s in itertools.product(alphabet, repeat=n)
    ]
    for ref in seqs:
        for hyp in seqs:
            assert edit_counts(ref, hyp) == brute_force_edit(ref, hyp)


def test_brute_edit_agrees_at_length_cap():
    rng = np.random.default_rng(23)
    alphabet = list("abc")
    for _ in range(150):
        n, m = rng.integers(5, 7, size=2)
        ref = list(rng.choice(alphabet, n))
        hyp = list(rng.choice(alphabet, m))
        assert edit_counts(ref, hyp) == brute_force_edit(ref, hyp)


def test_perturb_identity():
    c = contour([100.0, 150.0, 0.0], voiced=[1, 1, 0])
    out = perturb_contour(c, 0.0, 0.0, seed=1)
    assert np.array_equal(out.f0, c.f0)
    assert np.array_equal(out.voiced, c.voiced)


def test_perturb_shift_is_invisible_to_local_deviation():
    c = contour(np.linspace(100, 160, 20))
    shifted = perturb_contour(c, global_shift_hz=30.0, seed=2)
    assert np.all(shifted.f0 == c.f0 + 30.0)
    assert local_f0_deviation(shifted, c).local_dev == pytest.approx(0.0, abs=1e-9)


def test_perturb_noise_recovered_by_local_deviation():
    rng = np.random.default_rng(3)
    base = rng.uniform(120, 180, 1000)
    c = contour(base)
    noisy = perturb_contour(c, global_shift_hz=0.0, local_noise_hz=10.0, seed=42)
    dev = local_f0_deviation(noisy, c).local_dev
    assert abs(dev - 10.0) <= 1.0


def test_perturb_deterministic_given_seed():
    c = contour(np.full(50, 200.0))
    a = perturb_contour(c, 5.0, 3.0, seed=9)
    b = perturb_contour(c, 5.0, 3.0, seed=9)
    assert np.array_equal(a.f0, b.f0)


def test_perturb_clamps_with_warning():
    c = contour([100.0, 110.0])
    with pytest.warns(UserWarning, match="clamped"):
        out = perturb_contour(c, global_shift_hz=-150.0, seed=0)
    assert np.all(out.f0 >= 1.0)


def test_perturb_keeps_voicing():
    c = contour([100.0, 0.0, 140.0], voiced=[1, 0, 1])
    out = perturb_contour(c, 10.0, 2.0, seed=4)
    assert np.array_equal(out.voiced, c.voiced)
    assert out.f0[1] == 0.0

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from scriptid.errors import DegenerateComponent, StatsMismatch
from scriptid.standardize import (NormalizationStats, SequenceStandardizer,
                                  fit_standardizer, standardize, unstandardize)
from scriptid.strokes import EncodedSequence


def _seqs(rng, n=5):
    return [EncodedSequence(np.column_stack([
        rng.normal(3.0, 2.0, size=t),
        rng.normal(-1.0, 0.5, size=t),
        (np.arange(t) == 0).astype(float),
    ])) for t in rng.integers(4, 20, size=n)]


def test_fit_apply_zero_mean_unit_std(rng):
    seqs = _seqs(rng)
    stats = fit_standardizer(seqs)
    out = np.concatenate([standardize(s, stats).vectors for s in seqs])
    for idx in (0, 1):
        assert abs(out[:, idx].mean()) < 1e-9
        assert abs(out[:, idx].std() - 1.0) < 1e-9  # population std


def test_pen_flag_passes_through(rng):
    seqs = _seqs(rng)
    stats = fit_standardizer(seqs)
    for s in seqs:
        np.testing.assert_array_equal(standardize(s, stats).vectors[:, 2],
                                      s.vectors[:, 2])
    assert stats.mean[2] == 0.0 and stats.std[2] == 1.0


def test_inverse_is_identity(rng):
    seqs = _seqs(rng)
    stats = fit_standardizer(seqs)
    for s in seqs:
        back = unstandardize(standardize(s, stats), stats)
        np.testing.assert_allclose(back.vectors, s.vectors, atol=1e-9)


@given(st.integers(0, 2 ** 31 - 1))
@settings(max_examples=25, deadline=None)
def test_inverse_identity_property(seed):
    rng = np.random.default_rng(seed)
    seqs = _seqs(rng, n=3)
    stats = fit_standardizer(seqs)
    for s in seqs:
        back = unstandardize(standardize(s, stats), stats)
        assert np.max(np.abs(back.vectors - s.vectors)) < 1e-9


def test_zero_variance_component_rejected():
    flat = EncodedSequence(np.array([[1.0, 0.0, 1.0], [1.0, 1.0, 0.0]]))
    with pytest.raises(DegenerateComponent):
        fit_standardizer([flat])
    with pytest.raises(DegenerateComponent):
        fit_standardizer([])


def test_width_mismatch_rejected(rng):
    stats = fit_standardizer(_seqs(rng))
    with pytest.raises(StatsMismatch):
        standardize(EncodedSequence(np.zeros((3, 2))), stats)
    with pytest.raises(StatsMismatch):
        unstandardize(EncodedSequence(np.zeros((3, 4))), stats)


def test_stats_dict_roundtrip(rng):
    stats = fit_standardizer(_seqs(rng))
    back = NormalizationStats.from_dict(stats.to_dict())
    np.testing.assert_allclose(back.mean, stats.mean)
    np.testing.assert_allclose(back.std, stats.std)
    assert back.components == stats.components


def test_estimator_wrapper(rng):
    seqs = [s.vectors for s in _seqs(rng)]
    est = SequenceStandardizer()
    assert clone(est).get_params()["components"] == est.get_params()["components"]
    out = est.fit(seqs).transform(seqs)
    stacked = np.concatenate(out)
    assert abs(stacked[:, 0].mean()) < 1e-9
    back = est.inverse_transform(out)
    for a, b in zip(back, seqs):
        np.testing.assert_allclose(a, b, atol=1e-9)
    with pytest.raises(StatsMismatch):
        SequenceStandardizer().transform(seqs)

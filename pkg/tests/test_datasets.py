import numpy as np
import pytest

from gossipsim.datasets import (
    DatasetSpec,
    build_shards,
    dump_csv,
    full_dataset,
    load_csv,
    sample_point,
    sample_w_star,
)
from gossipsim.errors import ConfigError
from gossipsim.learning import BILINEAR, LINEAR, loss
from gossipsim.rng import make_stream


def test_w_star_support_and_mean():
    w = sample_w_star(0, 10**4, seed=11)
    assert ((w >= 0) & (w <= 1)).all()
    assert w.mean() == pytest.approx(0.5, abs=0.02)


def test_w_star_deterministic_per_distribution():
    assert np.array_equal(sample_w_star(2, 50, seed=3), sample_w_star(2, 50, seed=3))
    assert not np.array_equal(sample_w_star(2, 50, seed=3), sample_w_star(3, 50, seed=3))


def test_mixture_is_centered():
    d = 4
    w = sample_w_star(0, d, seed=5)
    stream = make_stream(5, 0, "mixture")
    xs = np.array([sample_point(w, stream, LINEAR)[0] for _ in range(10**5)])
    assert np.abs(xs.mean(axis=0)).max() <= 0.02


def test_mixture_component_variance():
    # Var(x_i) = 1 (within) + (1.5/d)^2 w_i^2 (between components)
    d = 3
    w = sample_w_star(1, d, seed=6)
    stream = make_stream(6, 0, "mixture")
    xs = np.array([sample_point(w, stream, LINEAR)[0] for _ in range(10**5)])
    expected = 1.0 + (1.5 / d) ** 2 * w**2
    assert np.abs(xs.var(axis=0) / expected - 1.0).max() <= 0.03


def test_noiseless_labels_match_ground_truth():
    d = 6
    w = sample_w_star(0, d, seed=7)
    stream = make_stream(7, 0, "mixture")
    for _ in range(100):
        x, y = sample_point(w, stream, LINEAR)
        assert y == pytest.approx(float(x @ w), rel=1e-12)


def test_single_distribution_shares_w_star():
    spec = DatasetSpec(d=5, m=1, samples_per_user=10, seed=8)
    shards = build_shards(spec, 4, LINEAR)
    assert {s.dist_id for s in shards} == {0}
    w = sample_w_star(0, 5, seed=8)
    for s in shards:
        assert loss(LINEAR, w, s.X, s.y) == pytest.approx(0.0, abs=1e-20)


def test_m_equals_n_gives_distinct_distributions():
    spec = DatasetSpec(d=2, m=4, samples_per_user=5, seed=9)
    shards = build_shards(spec, 4, BILINEAR)
    assert [s.dist_id for s in shards] == [0, 1, 2, 3]
    ws = [sample_w_star(ell, 2, seed=9) for ell in range(4)]
    assert len({tuple(w) for w in ws}) == 4


def test_round_robin_assignment():
    spec = DatasetSpec(d=2, m=3, samples_per_user=2, seed=1)
    shards = build_shards(spec, 7, LINEAR)
    assert [s.dist_id for s in shards] == [0, 1, 2, 0, 1, 2, 0]


def test_equal_shards_and_total_size():
    spec = DatasetSpec(d=4, m=2, samples_per_user=17, seed=10)
    shards = build_shards(spec, 6, LINEAR)
    assert all(len(s.y) == 17 for s in shards)
    X, y = full_dataset(shards)
    assert X.shape == (6 * 17, 4)
    assert y.shape == (6 * 17,)


def test_m_cannot_exceed_n():
    with pytest.raises(ConfigError):
        build_shards(DatasetSpec(d=2, m=5, samples_per_user=3), 4, LINEAR)


def test_normalization_scales_to_unit_max_row_norm():
    spec = DatasetSpec(d=8, m=1, samples_per_user=50, normalize=True, seed=12)
    shards = build_shards(spec, 3, LINEAR)
    max_norm = max(np.linalg.norm(s.X, axis=1).max() for s in shards)
    assert max_norm == pytest.approx(1.0, abs=1e-12)
    # Labels rescale with features, so the ground truth still fits exactly.
    w = sample_w_star(0, 8, seed=12)
    for s in shards:
        assert loss(LINEAR, w, s.X, s.y) == pytest.approx(0.0, abs=1e-20)


def test_regeneration_is_bit_identical():
    spec = DatasetSpec(d=3, m=2, samples_per_user=9, seed=13)
    a = build_shards(spec, 4, LINEAR)
    b = build_shards(spec, 4, LINEAR)
    for sa, sb in zip(a, b):
        assert np.array_equal(sa.X, sb.X)
        assert np.array_equal(sa.y, sb.y)


def test_label_noise_perturbs_labels():
    clean = build_shards(DatasetSpec(d=3, m=1, samples_per_user=20, seed=14), 2, LINEAR)
    noisy = build_shards(
        DatasetSpec(d=3, m=1, samples_per_user=20, label_noise_sd=0.5, seed=14),
        2,
        LINEAR,
    )
    assert np.array_equal(clean[0].X, noisy[0].X)
    assert not np.array_equal(clean[0].y, noisy[0].y)


def test_dump_and_load_round_trip(tmp_path):
    spec = DatasetSpec(d=3, m=2, samples_per_user=6, seed=15)
    shards = build_shards(spec, 4, LINEAR)
    path = tmp_path / "data.csv"
    dump_csv(shards, path)
    loaded = load_csv(path, 4)
    for a, b in zip(shards, loaded):
        assert a.dist_id == b.dist_id
        assert np.array_equal(a.X, b.X)
        assert np.array_equal(a.y, b.y)

import math

import numpy as np
import pytest

from fountainkit.distributions import (
    DegreeDistribution,
    DegreeInduced,
    ErasedDistribution,
    ExplicitDistribution,
    PdsSpec,
    PointMass,
    StaircaseColumn,
    cprime_pds,
    degree_to_vector_distribution,
    dist_from_json,
    erasure_transform,
    ideal_soliton,
    lt_pds,
    pds_from_json,
    robust_soliton,
    robust_soliton_spike,
    uniform_distribution,
)


def test_ideal_soliton_small():
    rho = ideal_soliton(2)
    assert np.allclose(rho.weights, [0.5, 0.5])
    rho4 = ideal_soliton(4)
    assert rho4.prob(1) == pytest.approx(0.25)
    assert rho4.prob(2) == pytest.approx(0.5)
    assert rho4.prob(3) == pytest.approx(1 / 6)
    assert rho4.prob(4) == pytest.approx(1 / 12)
    for k in (1, 2, 5, 100):
        assert abs(ideal_soliton(k).weights.sum() - 1.0) < 1e-12


def test_robust_soliton_normalized_and_spike():
    k, c, delta = 250, 0.03, 0.5
    mu = robust_soliton(k, c, delta)
    assert abs(mu.weights.sum() - 1.0) < 1e-12
    # recompute the construction directly
    r_const = c * math.log(k / delta) * math.sqrt(k)
    spike = math.ceil(k / r_const)
    assert robust_soliton_spike(k, c, delta) == spike
    assert spike == 85
    rho = ideal_soliton(k).weights
    tau = np.zeros(k)
    for d in range(1, spike):
        tau[d - 1] = r_const / (d * k)
    tau[spike - 1] = r_const * math.log(r_const / delta) / k
    z = (rho + tau).sum()
    assert z > 1.0
    assert np.allclose(mu.weights, (rho + tau) / z, atol=1e-15)
    # tau vanishes above the spike: scaled-back weights equal plain soliton
    for d in range(spike + 1, k + 1):
        assert mu.prob(d) * z == pytest.approx(rho[d - 1], abs=1e-15)


def test_robust_soliton_validation():
    with pytest.raises(ValueError):
        robust_soliton(10, -0.1, 0.5)
    with pytest.raises(ValueError):
        robust_soliton(10, 0.1, 1.5)
    with pytest.raises(ValueError):
        DegreeDistribution(3, [0.5, 0.5, 0.5])


def test_degree_induced_masses():
    mu = DegreeDistribution(2, [0.5, 0.5])
    d = degree_to_vector_distribution(2, mu)
    assert d.mass_of(0b01) == pytest.approx(0.25)  # "10"
    assert d.mass_of(0b10) == pytest.approx(0.25)  # "01"
    assert d.mass_of(0b11) == pytest.approx(0.5)  # "11"
    assert d.mass_of(0) == 0.0
    expl = d.to_explicit()
    assert sum(expl.probs.values()) == pytest.approx(1.0, abs=1e-12)


def test_degree_induced_total_mass_symbolic():
    # sum over explicit expansion equals 1 for several degree laws
    for k in (2, 3, 6):
        d = DegreeInduced(k, ideal_soliton(k))
        assert sum(d.to_explicit().probs.values()) == pytest.approx(1.0, abs=1e-12)


def test_degree_induced_never_materializes():
    big = DegreeInduced(2000, ideal_soliton(2000))
    rng = np.random.default_rng(0)
    mask = big.sample_mask(rng)
    assert mask > 0
    assert big.mass_of(mask) > 0
    with pytest.raises(ValueError):
        big.to_explicit()


def test_erasure_transform_basic():
    u = uniform_distribution(2)
    assert erasure_transform(u, 0.0) is u
    pm = PointMass(3, 0b001)
    d = erasure_transform(pm, 0.25)
    assert d.mass_of(0b001) == pytest.approx(0.75)
    assert d.mass_of(0) == pytest.approx(0.25)
    d2 = erasure_transform(u, 0.5)
    assert d2.mass_of(0) == pytest.approx(5 / 8)
    for v in (1, 2, 3):
        assert d2.mass_of(v) == pytest.approx(1 / 8)


def test_erasure_transform_composes(rng):
    for _ in range(20):
        k = int(rng.integers(1, 5))
        w = rng.random(1 << k)
        w /= w.sum()
        d = ExplicitDistribution(k, {m: float(w[m]) for m in range(1 << k)})
        e1, e2 = rng.random() * 0.6, rng.random() * 0.6
        lhs = erasure_transform(erasure_transform(d, e1), e2)
        rhs = erasure_transform(d, 1 - (1 - e1) * (1 - e2))
        for v in range(1, 1 << k):
            assert lhs.mass_of(v) == pytest.approx(rhs.mass_of(v), abs=1e-12)


def test_erased_wrapper_folds():
    base = DegreeInduced(100, ideal_soliton(100))
    w = erasure_transform(erasure_transform(base, 0.1), 0.2)
    assert isinstance(w, ErasedDistribution)
    assert w.base is base
    assert w.eps == pytest.approx(1 - 0.9 * 0.8)


def test_point_mass_sampling(rng):
    pm = PointMass(4, 0b1010)
    assert all(pm.sample_mask(rng) == 0b1010 for _ in range(10))


def test_explicit_sampling_frequencies():
    d = ExplicitDistribution(2, {0b01: 0.5, 0b10: 0.5})
    rng = np.random.default_rng(12345)
    n = 100_000
    masks = d.sample_masks(rng, n)
    p_hat = float(np.mean(masks == 0b01))
    sigma = math.sqrt(0.25 / n)
    assert abs(p_hat - 0.5) <= 3 * sigma


def test_degree_induced_weight_histogram():
    k = 16
    mu = robust_soliton(k, 0.1, 0.5)
    d = DegreeInduced(k, mu)
    rng = np.random.default_rng(777)
    n = 100_000
    masks = d.sample_masks(rng, n)
    weights = np.array([bin(int(m)).count("1") for m in masks])
    for deg in range(1, k + 1):
        p = mu.prob(deg)
        p_hat = float(np.mean(weights == deg))
        sigma = math.sqrt(max(p * (1 - p), 1e-12) / n)
        assert abs(p_hat - p) <= 3 * sigma + 1e-9, deg


def test_degree_induced_scalar_and_batch_weights_agree():
    k = 10
    d = DegreeInduced(k, ideal_soliton(k))
    rng = np.random.default_rng(5)
    masks = [d.sample_mask(rng) for _ in range(500)]
    assert all(1 <= bin(m).count("1") <= k for m in masks)


def test_staircase_structure():
    k = 6
    for t in range(1, k):
        col = StaircaseColumn(k, t, 0.03, 0.5)
        rng = np.random.default_rng(t)
        for _ in range(50):
            mask = col.sample_mask(rng)
            # pivot at coordinate k-t+1 (bit k-t), nothing above it
            assert (mask >> (k - t)) & 1
            assert mask >> (k - t + 1) == 0
        expl = col.to_explicit()
        assert sum(expl.probs.values()) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        StaircaseColumn(k, k, 0.03, 0.5)


def test_pds_at_periodic():
    a = PointMass(2, 1)
    b = PointMass(2, 2)
    spec = PdsSpec(2, (a, b), period=2)
    assert spec.at(5) is a
    assert spec.at(1) is a
    assert spec.at(2) is b
    assert spec.at(6) is b
    no_period = PdsSpec(2, (a, b))
    with pytest.raises(ValueError):
        no_period.at(3)
    with pytest.raises(ValueError):
        PdsSpec(2, (a,), period=2)


def test_cprime_pds_structure():
    k = 4
    spec = cprime_pds(k, 0.03, 0.5)
    assert len(spec.prefix) == 6  # floor(3k/2)
    assert spec.period == 6
    # t=4: last triangular column is the unit vector at coordinate 1
    d4 = spec.at(4)
    assert isinstance(d4, PointMass) and d4.mask == 1
    # t=5: robust-soliton-induced on the full length
    d5 = spec.at(5)
    assert isinstance(d5, DegreeInduced) and d5.k == 4
    assert spec.at(6) is d5
    # periodicity: step floor(3k/2)+1 reuses step 1's distribution
    assert spec.at(7) is spec.at(1)


def test_lt_pds_constant():
    spec = lt_pds(8, 0.05, 0.5)
    assert spec.at(1) is spec.at(100)


def test_json_roundtrip(rng):
    k = 4
    dists = [
        uniform_distribution(k),
        PointMass(k, 5),
        DegreeInduced(k, robust_soliton(k, 0.1, 0.4)),
        DegreeInduced(k, ideal_soliton(k)),
        DegreeInduced(k, DegreeDistribution(k, [0.25, 0.25, 0.25, 0.25])),
        StaircaseColumn(k, 2, 0.03, 0.5),
        erasure_transform(DegreeInduced(k, ideal_soliton(k)), 0.125),
    ]
    for d in dists:
        back = dist_from_json(k, d.to_json())
        for v in range(1 << k):
            assert back.mass_of(v) == pytest.approx(d.mass_of(v), abs=1e-12)
    spec = cprime_pds(5, 0.03, 0.5)
    back = pds_from_json(spec.to_json())
    assert back.k == 5 and back.period == spec.period
    for t in (1, 4, 5, 7):
        for v in range(1 << 5):
            assert back.at(t).mass_of(v) == pytest.approx(spec.at(t).mass_of(v), abs=1e-12)


def test_explicit_validation():
    with pytest.raises(ValueError):
        ExplicitDistribution(2, {0: 0.5, 1: 0.4})
    with pytest.raises(ValueError):
        ExplicitDistribution(2, {0: 1.5, 1: -0.5})
    with pytest.raises(ValueError):
        ExplicitDistribution(2, {9: 1.0})
    d = ExplicitDistribution(2, {1: 1.0, 2: 0.0})
    assert 2 not in d.probs  # zero-probability entries dropped


def test_constructed_distributions_have_unit_mass(rng):
    for _ in range(20):
        k = int(rng.integers(1, 6))
        w = rng.random(1 << k)
        w /= w.sum()
        d = ExplicitDistribution(k, {m: float(w[m]) for m in range(1 << k)})
        assert sum(d.probs.values()) == pytest.approx(1.0, abs=1e-12)

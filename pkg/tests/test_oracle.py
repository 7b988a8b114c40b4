import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covbal.core import Dataset, Sample
from covbal.errors import TooLarge
from covbal.oracle import (ThreeDMInstance, exact_min_imbalance, gen_3dm_dataset,
                           random_3dm_instance, random_instance)
from covbal.rng import SplitMix64
from helpers import INSTANCE_A, INSTANCE_B, INSTANCE_C, brute_min_imbalance, has_perfect_3dm
from strategies import small_datasets


def test_named_instances():
    assert exact_min_imbalance(INSTANCE_A, 3).objective == 0
    b = exact_min_imbalance(INSTANCE_B, 2)
    assert (b.objective, b.optimal_count, b.unique) == (4, 1, True)
    assert exact_min_imbalance(INSTANCE_C, 2).objective == 2


def test_optimal_count_counts_vectors():
    # INSTANCE_A at q=3: only the exact replica of the levels is perfect
    assert exact_min_imbalance(INSTANCE_A, 3).optimal_count == 1
    # two interchangeable cells give two optimal vectors
    ds = Dataset.from_labels([("a", "x")], [("a", "x"), ("b", "y")])
    assert exact_min_imbalance(ds, 0).optimal_count == 1
    ds2 = Dataset.from_labels([("a", "x"), ("b", "y")], [("a", "y"), ("b", "x")])
    res = exact_min_imbalance(ds2, 1)
    assert res.optimal_count == 2 and not res.unique


def test_size_guard():
    ds = random_instance(2, 3, 20, 4, 0)
    with pytest.raises(TooLarge):
        exact_min_imbalance(ds)


def test_splitmix_reference_values():
    # first outputs for seed 0 (published SplitMix64 test vector)
    g = SplitMix64(0)
    assert [g.next_u64() for _ in range(3)] == [
        0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_random_instance_reproducible_and_shaped():
    a = random_instance(2, 4, 8, (3, 3), 7)
    assert a == random_instance(2, 4, 8, 3, 7)
    assert a != random_instance(2, 4, 8, 3, 8)
    assert (a.n, a.n_control, a.P) == (4, 8, 2)
    assert all(lab in {"L0", "L1", "L2"} for s in a.treatment + a.control for lab in s.levels)


def test_3dm_planted_small():
    inst = ThreeDMInstance(2, ((1, 1, 1), (2, 2, 2), (1, 2, 2)), ((1, 1, 1), (2, 2, 2)))
    ds = gen_3dm_dataset(inst)
    assert ds.P == 3 and ds.n == 2 and ds.n_control == 3
    assert exact_min_imbalance(ds, 2).objective == 0


def test_3dm_shape():
    ds = gen_3dm_dataset(ThreeDMInstance(2, ((1, 1, 2), (2, 2, 1))))
    assert [s.levels for s in ds.treatment] == [("1", "1", "1"), ("2", "2", "2")]
    assert exact_min_imbalance(ds, 2).objective == 0


def test_3dm_collision_is_imperfect():
    ds = gen_3dm_dataset(ThreeDMInstance(2, ((1, 1, 1), (1, 2, 2))))
    assert exact_min_imbalance(ds, 2).objective > 0


def test_3dm_validation():
    with pytest.raises(ValueError):
        ThreeDMInstance(2, ((1, 1, 3),))
    with pytest.raises(ValueError):
        ThreeDMInstance(2, ((1, 1, 1), (2, 2, 2)), ((1, 1, 1),))


@pytest.mark.parametrize("seed", range(20))
def test_random_planted_3dm(seed):
    inst = random_3dm_instance(1 + seed % 4, seed % 5, seed)
    assert has_perfect_3dm(inst.size, inst.triples)
    assert exact_min_imbalance(gen_3dm_dataset(inst), inst.size).objective == 0


@settings(max_examples=100, deadline=None)
@given(small_datasets(P=3, max_control=6), st.integers(0, 6))
def test_oracle_matches_subset_enumeration(ds, q):
    q = min(q, ds.n_control)
    assert exact_min_imbalance(ds, q).objective == brute_min_imbalance(ds, q)


@settings(max_examples=100, deadline=None)
@given(small_datasets(), st.randoms(use_true_random=False))
def test_oracle_invariant_under_relabel_and_permutation(ds, rnd):
    q = min(ds.n, ds.n_control)
    base = exact_min_imbalance(ds, q).objective
    maps = []
    for p in range(ds.P):
        labels = sorted({s.levels[p] for s in ds.treatment + ds.control})
        shuffled = labels[:]
        rnd.shuffle(shuffled)
        maps.append(dict(zip(labels, ("z" + x for x in shuffled))))
    relabel = lambda s: Sample(s.id, tuple(maps[p][x] for p, x in enumerate(s.levels)))  # noqa: E731
    treatment = [relabel(s) for s in ds.treatment]
    control = [relabel(s) for s in ds.control]
    rnd.shuffle(treatment)
    rnd.shuffle(control)
    assert exact_min_imbalance(Dataset(ds.covariates, treatment, control), q).objective == base

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covbal.core import Dataset, index_levels, intersection_counts
from covbal.errors import InfeasibleSizes
from covbal.matchbal import DistanceMatrix, assign_controls, read_distance_csv, scale_distance
from helpers import brute_assignment


def cells_of(ds):
    idx = index_levels(ds)
    return idx, intersection_counts(ds, idx)


def test_zero_distances():
    ds = Dataset.from_labels([("a",), ("b",)], [("a",), ("a",), ("b",)])
    dm = DistanceMatrix.from_rows(ds, [[0, 0, 0], [0, 0, 0]])
    out = assign_controls(ds, {(0,): 1, (1,): 1}, 1, dm)
    assert out.total_cost == 0
    assert sorted(c for cs in out.controls.values() for c in cs) in (["c0", "c2"], ["c1", "c2"])


def test_identity_pairing():
    ds = Dataset.from_labels([("a",), ("b",)], [("a",), ("b",)])
    dm = DistanceMatrix.from_rows(ds, [[0, 5], [5, 0]])
    out = assign_controls(ds, {(0,): 1, (1,): 1}, 1, dm)
    assert out.total_cost == 0
    assert out.controls == {"t0": ("c0",), "t1": ("c1",)}


def test_kappa_two_picks_cheapest_in_cell():
    ds = Dataset.from_labels([("a",)], [("a",), ("a",), ("a",)])
    dm = DistanceMatrix.from_rows(ds, [[4, 1, 2]])
    out = assign_controls(ds, {(0,): 2}, 2, dm)
    assert out.total_cost == 3 and out.controls == {"t0": ("c1", "c2")}


def test_infeasible_sizes():
    ds = Dataset.from_labels([("a",)], [("a",), ("b",)])
    dm = DistanceMatrix.from_rows(ds, [[1, 1]])
    with pytest.raises(InfeasibleSizes):
        assign_controls(ds, {(0,): 2}, 2, dm)
    with pytest.raises(InfeasibleSizes):
        assign_controls(ds, {(0,): 1, (1,): 1}, 1, dm)


def test_scale_distance_rounds_half_up():
    assert scale_distance("1.2345") == 1235
    assert scale_distance("0.0005") == 1
    assert scale_distance(2) == 2000
    with pytest.raises(ValueError):
        scale_distance("-1")


def test_read_distance_csv(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("id,c0,c1\nt0,1,2\nt1,3,4\n")
    dm = read_distance_csv(f)
    assert dm.control_ids == ("c0", "c1") and dm.values == ((1, 2), (3, 4))
    g = tmp_path / "r.csv"
    g.write_text("id,c0\nt0,0.5\n")
    assert read_distance_csv(g, scale=1000).values == ((500,),)


@st.composite
def matching_cases(draw):
    kappa = draw(st.integers(1, 2))
    n = draw(st.integers(1, 6 // kappa))
    labels = st.tuples(st.sampled_from("ab"), st.sampled_from("xy"))
    treatment = draw(st.lists(labels, min_size=n, max_size=n))
    control = draw(st.lists(labels, min_size=kappa * n, max_size=kappa * n + 2))
    ds = Dataset.from_labels(treatment, control)
    rows = draw(st.lists(st.lists(st.integers(0, 9), min_size=len(control), max_size=len(control)),
                         min_size=n, max_size=n))
    idx, cells = cells_of(ds)
    # choose kappa*n controls at random to define the cell sizes
    chosen = draw(st.permutations(range(len(control))))[: kappa * n]
    sizes = {}
    for j in chosen:
        c = idx.cell_of(ds.control[j])
        sizes[c] = sizes.get(c, 0) + 1
    return ds, sizes, kappa, DistanceMatrix.from_rows(ds, rows)


@settings(max_examples=150, deadline=None)
@given(matching_cases())
def test_assignment_is_permutation_optimal(case):
    ds, sizes, kappa, dm = case
    idx = index_levels(ds)
    out = assign_controls(ds, sizes, kappa, dm)
    cell_of = {s.id: idx.cell_of(s) for s in ds.control}
    assert out.total_cost == brute_assignment(ds, sizes, cell_of, kappa, dm.lookup())
    used = [c for cs in out.controls.values() for c in cs]
    assert len(used) == len(set(used)) == kappa * ds.n
    assert all(len(cs) == kappa for cs in out.controls.values())
    per_cell = {}
    for c in used:
        per_cell[cell_of[c]] = per_cell.get(cell_of[c], 0) + 1
    assert per_cell == {c: s for c, s in sizes.items() if s}

import io
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dtnet.dataset import (COHYP, HYPER, MERO, RANDOM, DatasetFormatError, InsufficientPairsError,
                           LabeledPair, build_binary_sample, build_weeds_style, loads_pairs, parse_bless,
                           parse_label, parse_pairs, stratified_folds)

TOY = """\
snake\tcrocodile\tcoord
snake\tlizard\tcoord
snake\treptile\thyper
snake\tanimal\thyper
snake\tscale\tmero
snake\tfang\tmero
snake\tpermission\trandom-n
snake\tquilt\trandom-n
snake\trun\trandom-v
"""


def toy_rows():
    return parse_bless(io.StringIO(TOY))


def test_parse_pairs_basic():
    ds = loads_pairs("cat\tdog\tcohyp\ncat\tanimal\thyper\ncat\ttail\tMERONYM\n")
    assert len(ds) == 3
    assert ds.labels == [COHYP, HYPER, MERO]
    assert list(ds.binary_targets()) == [1, -1, -1]


def test_parse_pairs_errors():
    with pytest.raises(DatasetFormatError, match="line 1"):
        loads_pairs("cat\tcat\tcohyp\n")
    with pytest.raises(DatasetFormatError, match="line 2"):
        loads_pairs("cat\tdog\tcohyp\ncat dog cohyp\n")
    assert len(loads_pairs("")) == 0


def test_unknown_tags_preserved():
    assert parse_label("attri") == "OTHER:attri"
    ds = loads_pairs("a\tb\tattri\n")
    assert ds.labels == ["OTHER:attri"]
    assert ds.to_tsv() == "a\tb\tattri\n"


def test_bless_layouts():
    rows = parse_bless(io.StringIO("alligator-n\tamphibian_reptile\tcoord\tcrocodile-n\n"
                                   "alligator\tanimal\thyper\n"))
    assert rows[0] == LabeledPair("alligator", "crocodile", COHYP, "alligator")
    assert rows[1].label == HYPER
    assert toy_rows()[-1].label == "OTHER:random-v"


def test_weeds_toy_example():
    ds = build_weeds_style(toy_rows(), seed=42)
    c = Counter(ds.labels)
    assert c[COHYP] == 2
    assert sum(c[x] for x in (HYPER, MERO, RANDOM)) == 2
    negs = [c[x] for x in (HYPER, MERO, RANDOM)]
    assert max(negs) - min(negs) <= 1
    swapped = sum(p.w1 != p.source_concept for p in ds)
    assert swapped == len(ds) // 2
    assert len({p.key for p in ds}) == len(ds)


def test_weeds_dedups_reverse_listing():
    rows = toy_rows() + parse_bless(io.StringIO("crocodile\tsnake\tcoord\ncrocodile\tegg\tmero\n"))
    ds = build_weeds_style(rows, seed=1)
    assert len({p.key for p in ds}) == len(ds)
    assert sum(p.label == COHYP for p in ds) == 2


def test_weeds_short_class_refill_warns():
    text = "c\tx1\tcoord\nc\tx2\tcoord\nc\tx3\tcoord\nc\tx4\tcoord\nc\th1\thyper\nc\th2\thyper\nc\th3\thyper\n"
    with pytest.warns(UserWarning):
        ds = build_weeds_style(parse_bless(io.StringIO(text)), seed=0)
    assert Counter(ds.labels) == {COHYP: 4, HYPER: 3}


def test_weeds_is_deterministic():
    a = build_weeds_style(toy_rows(), seed=7).to_tsv()
    assert a == build_weeds_style(toy_rows(), seed=7).to_tsv()
    assert "# rule=weeds" in a and "# seed=7" in a


def _synthetic_bless(rng, n_concepts):
    rows = []
    for c in range(n_concepts):
        for rel, k in (("coord", rng.integers(1, 9)), ("hyper", rng.integers(0, 5)),
                       ("mero", rng.integers(0, 5)), ("random-n", rng.integers(0, 5))):
            for i in range(k):
                # relata are shared across concepts so unordered duplicates occur
                rows.append(LabeledPair(f"c{c}", f"{rel[0]}{int(rng.integers(0, 6))}_{i % 2}", parse_label(rel), f"c{c}"))
    seen, out = set(), []
    for r in rows:
        if (r.w1, r.w2) not in seen:
            seen.add((r.w1, r.w2))
            out.append(r)
    return out


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 12))
def test_weeds_properties(seed, n_concepts):
    import warnings

    rows = _synthetic_bless(np.random.default_rng(seed), n_concepts)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ds = build_weeds_style(rows, seed)
    assert len({p.key for p in ds}) == len(ds)
    assert sum(p.w1 != p.source_concept for p in ds) == len(ds) // 2


def test_binary_sample():
    ds = build_binary_sample(toy_rows(), MERO, 1, seed=0)
    assert Counter(ds.labels) == {COHYP: 1, MERO: 1}
    ds = build_binary_sample(toy_rows(), "random-n", 2, seed=0)
    assert Counter(ds.labels) == {COHYP: 2, RANDOM: 2}
    with pytest.raises(InsufficientPairsError, match="COHYP has 2"):
        build_binary_sample(toy_rows(), MERO, 3, seed=0)
    rows = toy_rows() + [LabeledPair("snake", "viper", COHYP)]
    with pytest.raises(InsufficientPairsError, match="MERO has 2"):
        build_binary_sample(rows, MERO, 3, seed=0)


def test_binary_sample_large():
    rows = [LabeledPair(f"p{i}", f"q{i}", COHYP) for i in range(1500)]
    rows += [LabeledPair(f"m{i}", f"n{i}", MERO) for i in range(1200)]
    ds = build_binary_sample(rows, MERO, 1000, seed=3)
    assert Counter(ds.labels) == {COHYP: 1000, MERO: 1000}
    assert len({p.key for p in ds}) == 2000
    assert ds.to_tsv() == build_binary_sample(rows, MERO, 1000, seed=3).to_tsv()


def test_folds_pigeonhole():
    y = [1] * 10 + [-1] * 10
    folds = stratified_folds(y, 10, seed=0)
    for _, test in folds:
        assert sorted(np.asarray(y)[test]) == [-1, 1]


def test_folds_small_and_errors():
    folds = stratified_folds([1, 1, -1, -1], 2, seed=5)
    assert all(len(te) == 2 and sorted(np.array([1, 1, -1, -1])[te]) == [-1, 1] for _, te in folds)
    with pytest.raises(ValueError):
        stratified_folds([1, 1, -1, -1], 3, seed=0)
    with pytest.raises(ValueError):
        stratified_folds([1, -1], 1, seed=0)


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 10), st.lists(st.integers(0, 3), min_size=40, max_size=120), st.integers(0, 10**6))
def test_folds_partition_and_balance(k, y, seed):
    y = np.array(y)
    if np.unique(y, return_counts=True)[1].min() < k:
        return
    folds = stratified_folds(y, k, seed)
    tests = np.concatenate([te for _, te in folds])
    assert sorted(tests) == list(range(len(y)))
    for tr, te in folds:
        assert not set(tr) & set(te) and len(tr) + len(te) == len(y)
        for c in np.unique(y):
            n_c = int(np.sum(y == c))
            assert n_c // k <= int(np.sum(y[te] == c)) <= -(-n_c // k)
    again = stratified_folds(y, k, seed)
    assert all((a[1] == b[1]).all() for a, b in zip(folds, again))

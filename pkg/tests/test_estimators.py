import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_symbolic
from gdsnet import (
    ContextSpec,
    CountTable,
    EmbeddingSpec,
    EmptyTableError,
    ObservationDataset,
    ParamError,
    SymbolicDataset,
    TooShortError,
    build_counts,
    collective_te,
    conditional_entropy,
    knn_predict,
    make_spec,
    select_embedding,
    simulate,
    valid_transition_range,
)
from gdsnet.estimators import family_entropy
from oracles import dense_conditional_entropy


def binary_entropy(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def sym(rows, kappa=1, tau=1, alphabet=2):
    rows = np.atleast_2d(rows)
    return SymbolicDataset.from_array(
        rows, alphabet=alphabet, embedding=EmbeddingSpec.uniform(rows.shape[0], kappa, tau)
    )


def test_alternating_series_counts():
    data = sym([0, 1, 0, 1, 0, 1])
    table = build_counts(data, ContextSpec(0))
    assert table.joint == {(1, (0,)): 3, (0, (1,)): 2}
    assert table.total == 5
    assert conditional_entropy(table) == 0.0


def test_first_order_transition_matrix():
    rng = np.random.default_rng(0)
    x = rng.integers(0, 3, 400)
    table = build_counts(sym(x, alphabet=3), ContextSpec(0))
    expected = np.zeros((3, 3), dtype=int)
    for a, b in zip(x[:-1], x[1:]):
        expected[a, b] += 1
    got = np.zeros((3, 3), dtype=int)
    for (nxt, (prev,)), c in table.joint.items():
        got[prev, nxt] = c
    assert np.array_equal(got, expected)
    assert sum(table.contexts.values()) == table.total == 399


def test_copy_system_rows_are_point_masses(copy_data):
    table = build_counts(copy_data, ContextSpec(1, (0,)))
    # Brute-force enumeration of the constructed sequence: context (y2[n], y1[n])
    # always determines y2[n+1] = y1[n].
    for (nxt, ctx), c in table.joint.items():
        assert c == table.contexts[ctx]
        assert nxt == ctx[1]


def test_hand_evaluated_table():
    table = CountTable.from_joint({(0, 0): 3, (1, 0): 1, (0, 1): 2, (1, 1): 2})
    expected = 0.5 * binary_entropy(3 / 4) + 0.5 * binary_entropy(1 / 2)
    assert conditional_entropy(table) == pytest.approx(expected, abs=1e-15)
    assert conditional_entropy(table) == pytest.approx(0.9056390622295664, abs=1e-15)


def test_identical_series_have_zero_entropy():
    table = CountTable.from_joint({(0, 0): 50, (1, 1): 50})
    assert conditional_entropy(table) == 0.0


def test_balanced_alternation_under_constant_context():
    table = CountTable.from_joint({(0, 7): 20, (1, 7): 20})
    assert conditional_entropy(table) == 1.0


def test_empty_table():
    with pytest.raises(EmptyTableError):
        conditional_entropy(CountTable.from_joint({}))


def test_copy_channel_te_is_one_bit(copy_data):
    assert collective_te(copy_data, 1, [0]) == 1.0


def test_factorising_counts_give_zero_te():
    # Source repeats each destination context pattern with both values equally.
    dest = np.array([0, 0, 1, 1] * 50 + [0])
    src = np.array([0, 1, 0, 1, 1, 0, 1, 0] * 25 + [0])
    data = sym(np.vstack([src, dest]))
    assert collective_te(data, 1, [0]) == pytest.approx(0.0, abs=1e-12)


def test_te_argument_checks(copy_data):
    with pytest.raises(ParamError):
        collective_te(copy_data, 1, [1])
    with pytest.raises(ParamError):
        collective_te(copy_data, 1, [])
    with pytest.raises(ParamError):
        ContextSpec(0, (1, 1))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_entropy_properties(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 4))
    data = random_symbolic(rng, m, int(rng.integers(30, 300)))
    tr = valid_transition_range(data, data.embedding)
    target = int(rng.integers(0, m))
    others = [v for v in range(m) if v != target]
    sources = tuple(rng.permutation(others)[: int(rng.integers(1, m))])
    h_self = family_entropy(data, target, (), None, tr)
    h_src = family_entropy(data, target, sources, None, tr)
    # Extra conditioning on the same sample never increases the entropy.
    assert h_self >= h_src - 1e-12
    assert 0.0 <= h_src <= math.log2(data.alphabet[target]) + 1e-12
    assert h_self <= math.log2(data.alphabet[target]) + 1e-12
    # Order of sources in the context does not matter.
    assert family_entropy(data, target, sources[::-1], None, tr) == pytest.approx(h_src, abs=1e-12)
    te = collective_te(data, target, sources, None, tr)
    assert te == pytest.approx(h_self - h_src, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_sparse_matches_dense_enumeration(seed):
    rng = np.random.default_rng(seed)
    data = random_symbolic(rng, 2, int(rng.integers(20, 400)))
    tr = valid_transition_range(data, data.embedding)
    for target, sources in ((0, ()), (1, (0,))):
        dense = dense_conditional_entropy(
            data.symbols, data.alphabet, data.embedding.kappa, data.embedding.tau,
            target, sources, tr.first, tr.last,
        )
        sparse = conditional_entropy(build_counts(data, ContextSpec(target, sources), tr))
        assert sparse == pytest.approx(dense, abs=1e-12)


def test_count_table_invariants():
    rng = np.random.default_rng(4)
    data = random_symbolic(rng, 3, 500)
    table = build_counts(data, ContextSpec(2, (0, 1)))
    assert sum(table.joint.values()) == table.total
    marg = {}
    for (_, ctx), c in table.joint.items():
        marg[ctx] = marg.get(ctx, 0) + c
    assert marg == table.contexts
    assert all(c > 0 for c in table.joint.values())


def test_large_context_space_uses_row_counting():
    rng = np.random.default_rng(6)
    data = SymbolicDataset.from_array(
        rng.integers(0, 4, (4, 300)), alphabet=4, embedding=EmbeddingSpec.uniform(4, 9, 1)
    )
    tr = valid_transition_range(data, data.embedding)
    h = conditional_entropy(build_counts(data, ContextSpec(0, (1, 2, 3)), tr))
    # 36 context coordinates over 291 rows: every context is unique.
    assert h == 0.0


# -- k-NN prediction ----------------------------------------------------------


def logistic_series(n, seed=0):
    return simulate(make_spec(1, seed=seed), n).to_dataset()


def test_knn_recovers_noiseless_logistic_map():
    data = logistic_series(2000)
    emb = EmbeddingSpec.uniform(1, 2, 1)
    pred = knn_predict(data, ContextSpec(0), emb, k=1)
    assert pred.rmse < 0.01
    assert len(pred.predictions) == valid_transition_range(data, emb).n_eff


def test_knn_on_white_noise_matches_sample_sd():
    x = np.random.default_rng(1).normal(size=4000)
    data = ObservationDataset.from_array([x])
    k = 50
    pred = knn_predict(data, ContextSpec(0), EmbeddingSpec.uniform(1, 2, 1), k=k)
    # No predictability: error of a k-mean forecast is sd * sqrt(1 + 1/k).
    sd = pred.targets.std()
    assert pred.rmse == pytest.approx(sd * math.sqrt(1 + 1 / k), rel=0.05)


def test_knn_needs_enough_transitions():
    data = ObservationDataset.from_array([np.linspace(0, 1, 8)])
    with pytest.raises(TooShortError):
        knn_predict(data, ContextSpec(0), EmbeddingSpec.uniform(1, 1, 1), k=20)


def test_knn_excludes_the_query_point():
    # Every point duplicated: without self-exclusion k=1 would predict exactly.
    x = np.repeat(np.random.default_rng(2).random(200), 1)
    x = np.concatenate([x, x])
    data = ObservationDataset.from_array([x])
    pred = knn_predict(data, ContextSpec(0), EmbeddingSpec.uniform(1, 1, 1), k=1)
    assert pred.rmse > 0.0


def test_knn_uses_source_coordinates():
    rng = np.random.default_rng(3)
    drive = rng.random(3000)
    resp = np.empty_like(drive)
    resp[0] = 0.5
    resp[1:] = drive[:-1] ** 2
    data = ObservationDataset.from_array([drive, resp])
    emb = EmbeddingSpec.uniform(2, 1, 1)
    alone = knn_predict(data, ContextSpec(1), emb, k=4).rmse
    joint = knn_predict(data, ContextSpec(1, (0,)), emb, k=4).rmse
    assert joint < 0.2 * alone


def test_select_embedding_logistic_stays_within_takens_bound():
    for seed in range(3):
        kappa, tau = select_embedding(logistic_series(1500, seed), 0, kappa_max=5, tau_max=2, k=2)
        assert kappa <= 3


def test_select_embedding_white_noise_prefers_smallest():
    x = np.random.default_rng(9).normal(size=2000)
    data = ObservationDataset.from_array([x])
    assert select_embedding(data, 0, kappa_max=3, tau_max=3, k=10) == (1, 1)


def test_select_embedding_trivial_grid():
    assert select_embedding(logistic_series(200), 0, 1, 1) == (1, 1)

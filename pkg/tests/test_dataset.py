import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gdsnet import (
    DegenerateSeriesError,
    EmbeddingSpec,
    EmptyError,
    ObservationDataset,
    ParseError,
    TooShortError,
    delay_embed,
    delay_vector,
    discretize,
    load_csv,
    valid_transition_range,
)
from gdsnet.dataset import read_symbolic, write_csv, write_symbolic


def write(tmp_path, text):
    path = tmp_path / "data.csv"
    path.write_text(text, encoding="utf-8")
    return path


def test_load_three_columns(tmp_path):
    rng = np.random.default_rng(0)
    values = rng.random((100, 3))
    lines = ["a,b,c"] + [",".join(repr(v) for v in row) for row in values.tolist()]
    data = load_csv(write(tmp_path, "\n".join(lines) + "\n"))
    assert (data.m, data.n_steps) == (3, 100)
    assert data.names == ("a", "b", "c")
    assert np.array_equal(data.values, values.T)


def test_load_single_column(tmp_path):
    data = load_csv(write(tmp_path, "only\n1\n2\n3\n"))
    assert data.m == 1 and data.n_steps == 3


def test_nan_cell_is_reported(tmp_path):
    with pytest.raises(ParseError) as info:
        load_csv(write(tmp_path, "a,b\n1,2\n3,nan\n"))
    assert info.value.line == 3 and info.value.column == "b"


def test_non_numeric_and_ragged_rows(tmp_path):
    with pytest.raises(ParseError, match="line 2"):
        load_csv(write(tmp_path, "a,b\n1,x\n"))
    with pytest.raises(ParseError, match="line 3"):
        load_csv(write(tmp_path, "a,b\n1,2\n3\n"))


def test_empty_files(tmp_path):
    with pytest.raises(EmptyError):
        load_csv(write(tmp_path, ""))
    with pytest.raises(EmptyError):
        load_csv(write(tmp_path, "a,b\n"))


def test_csv_round_trip(tmp_path):
    data = ObservationDataset.from_array(np.random.default_rng(1).normal(size=(2, 20)), ["u", "w"])
    path = tmp_path / "out.csv"
    write_csv(data, path)
    back = load_csv(path)
    assert back.names == data.names and np.array_equal(back.values, data.values)


def test_median_split():
    data = ObservationDataset.from_array([[0.1, 0.9, 0.2, 0.8]])
    sym = discretize(data, 2, "equal_frequency")
    assert sym.symbols[0].tolist() == [0, 1, 0, 1]
    assert sym.alphabet == (2,)


def test_constant_series_is_degenerate():
    data = ObservationDataset.from_array([[0.5] * 10])
    with pytest.raises(DegenerateSeriesError):
        discretize(data, 2, "equal_frequency")
    with pytest.raises(DegenerateSeriesError):
        discretize(data, 2, "equal_width")


def test_cut_point_goes_to_lower_bin():
    data = ObservationDataset.from_array([[0.0, 1.0, 2.0, 3.0, 4.0]])
    sym = discretize(data, 2, "equal_width")
    assert sym.bin_edges == ((2.0,),)
    assert sym.symbols[0].tolist() == [0, 0, 0, 1, 1]


def test_uniform_data_bins_agree():
    x = np.random.default_rng(3).random(20_000)
    data = ObservationDataset.from_array([x])
    freq = np.bincount(discretize(data, 4, "equal_frequency").symbols[0], minlength=4)
    width = np.bincount(discretize(data, 4, "equal_width").symbols[0], minlength=4)
    # Direct histogram of the raw values on [0, 1) as the oracle.
    oracle = np.histogram(x, bins=4, range=(0.0, 1.0))[0]
    assert np.all(np.abs(freq - 5000) <= 1)
    assert np.all(np.abs(width - oracle) <= 2)
    # Binomial sd at p=1/4 is ~61; both schemes agree within 4 sd.
    assert np.all(np.abs(freq - width) < 250)


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(-1e6, 1e6), min_size=8, max_size=200, unique=True),
    st.integers(2, 5),
    st.sampled_from(["equal_frequency", "equal_width"]),
)
def test_discretisation_is_monotone(values, bins, scheme):
    data = ObservationDataset.from_array([values])
    try:
        sym = discretize(data, bins, scheme)
    except DegenerateSeriesError:
        return
    order = np.argsort(values, kind="stable")
    assert np.all(np.diff(sym.symbols[0][order]) >= 0)
    assert sym.symbols.max() < bins


def test_delay_vector_examples():
    s = "abcde"
    assert delay_vector(s, 4, 3, 1) == ("e", "d", "c")
    assert delay_vector(s, 4, 2, 2) == ("e", "c")
    assert delay_vector(s, 4, 1, 1) == ("e",)
    with pytest.raises(IndexError):
        delay_vector(s, 1, 3, 1)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=10, max_size=60), st.integers(1, 4), st.integers(1, 3))
def test_delay_embed_matches_delay_vector(series, kappa, tau):
    first = (kappa - 1) * tau
    if first > len(series) - 1:
        return
    mat = delay_embed(series, kappa, tau, first, len(series) - 1)
    for r, n in enumerate(range(first, len(series))):
        assert tuple(mat[r]) == delay_vector(series, n, kappa, tau)
    if kappa == 1:
        assert mat[:, 0].tolist() == series[first:]


def test_transition_ranges():
    assert valid_transition_range(100, EmbeddingSpec.uniform(2, 2, 1)) == (1, 98, 98)
    assert valid_transition_range(100, EmbeddingSpec((3, 2), (2, 1))) == (4, 98, 95)
    with pytest.raises(TooShortError):
        valid_transition_range(3, EmbeddingSpec.uniform(1, 4, 1))


def test_symbolic_export_round_trip(tmp_path):
    data = ObservationDataset.from_array(np.random.default_rng(5).random((2, 50)))
    sym = discretize(data, 3, embedding=EmbeddingSpec((2, 1), (1, 3)))
    path = tmp_path / "sym.csv"
    write_symbolic(sym, path)
    back = read_symbolic(path)
    assert np.array_equal(back.symbols, sym.symbols)
    assert back.alphabet == sym.alphabet
    assert back.embedding == sym.embedding
    assert back.bin_edges == sym.bin_edges
    assert back.fingerprint == sym.fingerprint

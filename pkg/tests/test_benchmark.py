import csv

import pytest

from gdsnet.benchmark import COLUMNS, run_suite, run_trial, topology_edges, true_graph, write_rows


def test_topologies():
    assert topology_edges(4, "chain") == [(0, 1), (1, 2), (2, 3)]
    assert topology_edges(3, "fork") == [(0, 1), (0, 2)]
    assert topology_edges(3, "collider") == [(0, 2), (1, 2)]
    assert topology_edges(3, "empty") == []
    with pytest.raises(ValueError):
        topology_edges(3, "ring")


def test_zero_coupling_truth_is_empty():
    assert true_graph(3, "chain", 0.0).n_edges == 0
    assert true_graph(3, "chain", 0.2).edges == [(0, 1), (1, 2)]


def test_trial_returns_acyclic_graph():
    trial = run_trial(m=2, topology="chain", coupling=0.4, n=2000, seed=1, compare_greedy=True)
    assert trial.learned.is_acyclic()
    assert trial.greedy_score <= trial.score + 1e-9 * abs(trial.score)


SMALL = {"m": [2], "coupling": [0.0, 0.3], "n": [1500], "seeds": 3}


def test_suite_rows_and_determinism(tmp_path):
    rows, runtimes = run_suite(SMALL)
    assert len(rows) == 2 == len(runtimes)
    assert [r["coupling"] for r in rows] == [0.0, 0.3]
    again, _ = run_suite(SMALL, workers=2)
    assert again == rows
    path = tmp_path / "b.csv"
    write_rows(rows, path)
    with path.open() as fh:
        read = list(csv.DictReader(fh))
    assert tuple(read[0]) == COLUMNS
    assert all(0.0 <= float(r["exact_match_rate"]) <= 1.0 for r in read)


def test_failing_cell_is_recorded():
    rows, _ = run_suite({"m": [2], "coupling": [0.3, 1.5], "n": [500], "seeds": 1})
    assert rows[0]["error"] == ""
    assert rows[1]["error"].startswith("ParamError")
    assert rows[1]["exact_match_rate"] == ""


def test_unknown_suite_field():
    with pytest.raises(ValueError):
        run_suite({"colour": "red"})

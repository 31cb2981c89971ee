import numpy as np
import pytest

from gdsnet import EmbeddingSpec, SymbolicDataset

ACCEPTANCE_LINES = []


def record_criterion(label, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] {label}" + (f" -- {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def copy_system(cycles=250):
    """Exact-frequency copy channel: y2[n+1] = y1[n].

    y1 repeats the order-2 de Bruijn cycle 0011, so every (y1[n-1], y1[n])
    pair appears equally often over the ``4 * cycles`` transitions.
    """
    y1 = np.array([0, 0, 1, 1] * cycles + [0])
    y2 = np.empty_like(y1)
    y2[0] = 1
    y2[1:] = y1[:-1]
    return SymbolicDataset.from_array(
        np.vstack([y1, y2]), alphabet=2, embedding=EmbeddingSpec.uniform(2, 1, 1)
    )


@pytest.fixture
def copy_data():
    return copy_system()


def random_symbolic(rng, m, n, alphabet=None, kappa=None, tau=None):
    alphabet = alphabet or [int(rng.integers(2, 5)) for _ in range(m)]
    symbols = np.vstack([rng.integers(0, b, n) for b in alphabet])
    kappa = kappa or [int(rng.integers(1, 3)) for _ in range(m)]
    tau = tau or [int(rng.integers(1, 3)) for _ in range(m)]
    return SymbolicDataset.from_array(
        symbols, alphabet=alphabet, embedding=EmbeddingSpec(tuple(kappa), tuple(tau))
    )


def coupled_symbols(rng, m, n, alphabet=2, flip=0.2):
    """Symbol series where each vertex noisily copies vertex 0's past."""
    base = rng.integers(0, alphabet, n)
    rows = [base]
    for _ in range(1, m):
        row = np.roll(base, 1).copy()
        noise = rng.random(n) < flip
        row[noise] = rng.integers(0, alphabet, noise.sum())
        rows.append(row)
    return np.vstack(rows)

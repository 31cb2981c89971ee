import time

import numpy as np

from gdsnet import (
    EmbeddingSpec,
    SearchConfig,
    SymbolicDataset,
    enumerate_dags,
    exhaustive_search,
    greedy_search,
)

# Labelled DAG counts for 0 .. 5 vertices
print([sum(1 for _ in enumerate_dags(m)) for m in range(6)])  # [1, 1, 3, 25, 543, 29281]

# Vertex k is a noisy copy of vertex 0 delayed by k steps, so with
# one-step contexts consecutive vertices line up as a chain
rng = np.random.default_rng(3)
base = rng.integers(0, 2, 5000)
rows = [base]
for lag in range(1, 5):
    row = np.roll(base, lag)
    flip = rng.random(base.size) < 0.2
    row[flip] = 1 - row[flip]
    rows.append(row)
data = SymbolicDataset.from_array(np.vstack(rows), alphabet=2, embedding=EmbeddingSpec.uniform(5, 1, 1))

t0 = time.perf_counter()
ex = exhaustive_search(data, config=SearchConfig("exhaustive"))
print("exhaustive", ex.visited, ex.graph.edges, round(ex.best.total_score, 2), f"{time.perf_counter() - t0:.1f}s")

t0 = time.perf_counter()
gr = greedy_search(data, config=SearchConfig("greedy", restarts=3, seed=0))
print("greedy", gr.visited, gr.graph.edges, round(gr.best.total_score, 2), f"{time.perf_counter() - t0:.1f}s")

# Each greedy move and its score gain
for move, delta in gr.trace:
    print(move, round(delta, 2))

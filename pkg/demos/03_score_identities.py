import math

import numpy as np

from gdsnet import (
    CandidateGraph,
    EmbeddingSpec,
    SymbolicDataset,
    collective_te,
    enumerate_dags,
    model_dimension,
    score,
    valid_transition_range,
)

rng = np.random.default_rng(0)
symbols = rng.integers(0, 3, (3, 800))
data = SymbolicDataset.from_array(symbols, alphabet=3, embedding=EmbeddingSpec.uniform(3, 2, 1))
tr = valid_transition_range(data, data.embedding)
print(tr)  # first, last, n_eff

# Parameter counts: b**kappa * (b - 1) per vertex, times b**kappa per parent
chain = CandidateGraph.from_edges(3, [(0, 1), (1, 2)])
print(model_dimension(chain, data.alphabet, data.embedding))

# The ml score gain over the empty graph is N_eff times the summed TE into each vertex
base = score(data, CandidateGraph.empty(3), "ml").total_score
worst = 0.0
for g in enumerate_dags(3):
    gain = score(data, g, "ml").total_score - base
    te = math.fsum(collective_te(data, i, ps) for i, ps in enumerate(g.parents) if ps)
    worst = max(worst, abs(gain - tr.n_eff * te))
print(worst)  # round-off only

# The criteria differ only in how hard they charge for parameters
for crit in ("ml", "aic", "bic"):
    rep = score(data, chain, crit)
    print(crit, round(rep.total_score, 2), round(rep.penalty_weight, 3))

import numpy as np

from gdsnet import EmbeddingSpec, SymbolicDataset, collective_te, discretize, make_spec, simulate

# An exact copy channel: y2 at the next step repeats y1 now
y1 = np.array([0, 0, 1, 1] * 250 + [0])
y2 = np.concatenate([[1], y1[:-1]])
copy = SymbolicDataset.from_array(np.vstack([y1, y2]), alphabet=2, embedding=EmbeddingSpec.uniform(2, 1, 1))
print(collective_te(copy, 1, [0]))  # 1.0 bit

# The same channel built from the simulator: white noise driving its copy
spec = make_spec(
    ["src", "dst"], [("src", "dst")], 0.99, family="linear_ar", params={"a": 0.0},
    process_noise=[1.0, 0.0], obs_noise=0.001, seed=0,
)
noisy = discretize(simulate(spec, 10_000).to_dataset(), 2, embedding=EmbeddingSpec.uniform(2, 1, 1))
print(round(collective_te(noisy, 1, [0]), 4))  # close to 1
print(round(collective_te(noisy, 0, [1]), 4))  # close to 0: nothing flows back

# Coupled logistic maps: TE into b grows with the coupling strength
for eps in (0.0, 0.1, 0.2, 0.4):
    pair = make_spec(["a", "b"], [("a", "b")], eps, obs_noise=0.01, seed=1)
    sym = discretize(simulate(pair, 10_000).to_dataset(), 2, embedding=EmbeddingSpec.uniform(2, 2, 1))
    print(eps, round(collective_te(sym, 1, [0]), 4))

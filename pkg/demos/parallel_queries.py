"""Query algorithms that ask p questions per batch.

Compares batch counts of search, minimum finding and element distinctness
as the parallelism p grows.
"""

import numpy as np

from qcongest.pqalg import (
    OracleSpec, deutsch_jozsa, element_distinctness_walk, parallel_grover_any, parallel_min,
)

rng = np.random.default_rng(3)
k = 64
x = [0] * k
x[41] = 1
values = rng.integers(0, 100, size=k).tolist()
dup = rng.permutation(200)[:12].tolist()
dup[9] = dup[2]

print(" p  search: b (index)  min: b (index)  ed: b (pair)")
for p in (1, 2, 4, 8):
    i, t1 = parallel_grover_any(OracleSpec(k, 1, lambda j: x[j]), p, rng)
    m, t2 = parallel_min(OracleSpec(k, 7, lambda j: values[j]), p, rng)
    pair, t3 = element_distinctness_walk(OracleSpec(12, 8, lambda j: dup[j]), p, rng)
    print(f"{p:2d}  {t1.b:9d} ({i})  {t2.b:9d} ({m})  {t3.b:6d} {pair}")
print("true minimum at", int(np.argmin(values)))

bal = [1, 0, 0, 1, 1, 0, 1, 0]
print("Deutsch-Jozsa on", bal, "->", deutsch_jozsa(OracleSpec(8, 1, lambda j: bal[j]))[0])

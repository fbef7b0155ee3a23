"""Sparsity sweep on noisy predator-prey data.

The sweep fits one model per threshold, scores each on held-out samples and
picks the sparsest one within 5% of the best validation error.
"""

import numpy as np

from sindyc import Signal, TimeSeries, build_spec, differentiate, evaluate, make_system
from sindyc import pareto_sweep, rk4_integrate

rhs, _, x0 = make_system("lotka_volterra")
clean = rk4_integrate(rhs, x0, Signal("sinusoids", {"terms": [[2.0, 1.0], [2.0, 0.1]]}),
                      t_span=50.0, dt=0.01)
rng = np.random.default_rng(0)
noisy = TimeSeries(clean.times, clean.states + 0.01 * rng.standard_normal(clean.states.shape),
                   clean.inputs)
lib = build_spec(2, 1, 3)
deriv = differentiate(noisy, "tv", reg=1e-2, iterations=50).values[:, 1:-1]
theta = evaluate(lib, noisy.states[:, 1:-1], noisy.inputs[:, 1:-1]).values

curve = pareto_sweep(theta, deriv, np.geomspace(1e-2, 1e4, 13), library=lib)
print(f"{'alpha':>10} {'nnz':>4} {'validation':>12}")
for k, p in enumerate(curve.points):
    mark = "  <- selected" if k == curve.selected else ""
    print(f"{p.alpha:10.4g} {p.nnz:4d} {p.validation_error:12.5g}{mark}")

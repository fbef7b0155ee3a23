"""DMD and DMDc on small linear systems.

A planar rotation is sampled and handed to DMD, which should return the
eigenvalue pair exp(+-i theta). Then a forced two-state system is identified
with DMDc, which separates the internal dynamics A from the actuation B.
"""

import numpy as np

from sindyc import SnapshotPair, dmd, dmd_predict, dmdc

theta = 0.1
A = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
X = np.empty((2, 51))
X[:, 0] = [1.0, 0.3]
for k in range(50):
    X[:, k + 1] = A @ X[:, k]

result = dmd(SnapshotPair(X[:, :-1], X[:, 1:]))
print("DMD eigenvalues:", np.round(result.eigenvalues, 12))
print("exact:          ", np.round(np.exp([1j * theta, -1j * theta]), 12))
pred = dmd_predict(result, X[:, 0], 10)
print("10-step prediction error:", np.abs(pred - X[:, :11]).max())

A = np.array([[0.9, 0.1], [0.0, 0.8]])
B = np.array([[1.0], [0.5]])
U = np.random.default_rng(0).standard_normal((1, 200))
X = np.empty((2, 201))
X[:, 0] = [1.0, -1.0]
for k in range(200):
    X[:, k + 1] = A @ X[:, k] + B @ U[:, k]
fit = dmdc(SnapshotPair(X[:, :-1], X[:, 1:], U))
print("DMDc A:\n", fit.state_operator.round(10))
print("DMDc B:\n", fit.input_operator.round(10))

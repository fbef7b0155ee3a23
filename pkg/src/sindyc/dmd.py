"""Dynamic mode decomposition, with and without control inputs."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import IllConditionedWarning, IoError, ParamError, RankError, SchemaError
from .timeseries import SnapshotPair

SV_CUTOFF = 1e-12


@dataclass(eq=False)
class DmdResult:
    """Spectral data of the best-fit linear map ``X' ~ A X``.

    ``reduced_operator`` is ``U* X' V S^-1``; ``modes`` are ``X' V S^-1 W``
    where ``W`` holds the eigenvectors of the reduced operator.
    """

    eigenvalues: np.ndarray
    modes: np.ndarray
    reduced_operator: np.ndarray
    svd_basis: np.ndarray
    singular_values: np.ndarray
    right_vectors: np.ndarray
    eigvec_reduced: np.ndarray
    rank: int
    shifted_projection: np.ndarray = field(default=None, repr=False)

    @property
    def full_operator(self):
        """Least-squares operator ``X' X^+`` restricted to the retained rank."""
        return self.shifted_projection @ self.svd_basis.conj().T

    def amplitudes(self, x0):
        return np.linalg.pinv(self.modes) @ np.asarray(x0)

    def to_dict(self):
        n, r = self.modes.shape
        return {
            "rank": int(self.rank),
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "modes": {
                "shape": [n, r],
                "real": self.modes.real.flatten(order="F").tolist(),
                "imag": self.modes.imag.flatten(order="F").tolist(),
            },
            "singular_values": self.singular_values.tolist(),
            "reduced_operator": np.real_if_close(self.reduced_operator).real.tolist(),
        }


@dataclass(eq=False)
class DmdcResult:
    """Least-squares ``X' ~ A X + B Y`` plus the spectral data of ``A``."""

    state_operator: np.ndarray
    input_operator: np.ndarray
    base: DmdResult | None
    singular_values: np.ndarray
    rank: int
    warnings: list = field(default_factory=list)

    def residual(self, pair):
        return np.linalg.norm(pair.shifted - self.state_operator @ pair.current
                              - self.input_operator @ pair.inputs_current)

    def to_dict(self):
        d = {
            "A": self.state_operator.tolist(),
            "B": self.input_operator.tolist(),
            "rank": int(self.rank),
            "singular_values": self.singular_values.tolist(),
            "warnings": list(self.warnings),
        }
        if self.base is not None:
            d["base"] = self.base.to_dict()
        return d


def _retained_rank(s, rank):
    if s.size == 0 or s[0] == 0:
        raise RankError("data matrix is identically zero")
    usable = int(np.sum(s > SV_CUTOFF * s[0]))
    if rank is None:
        return usable
    if rank < 1 or rank > s.size:
        raise ParamError(f"rank must lie in [1, {s.size}], got {rank}")
    return min(int(rank), usable)


def dmd(pair: SnapshotPair, rank=None) -> DmdResult:
    """Exact DMD of a snapshot pair.

    1. economy SVD ``X = U S V*`` (truncated to ``rank`` when given),
    2. ``A_tilde = U* X' V S^-1``,
    3. ``A_tilde W = W Lambda``,
    4. ``Phi = X' V S^-1 W``.

    Singular values below ``1e-12 * s_max`` are never inverted.
    """
    X, Xp = pair.current, pair.shifted
    if X.shape[1] < 1:
        raise ParamError("need at least one snapshot pair")
    U, s, Vh = np.linalg.svd(X, full_matrices=False)
    r = _retained_rank(s, rank)
    U, s, V = U[:, :r], s[:r], Vh[:r].conj().T
    proj = Xp @ V / s
    atilde = U.conj().T @ proj
    lam, W = np.linalg.eig(atilde)
    phi = proj @ W
    return DmdResult(lam, phi, atilde, U, s, V, W, r, proj)


def dmd_predict(result: DmdResult, x0, steps: int) -> np.ndarray:
    """``x_k = Phi diag(Lambda^k) b`` with ``b = Phi^+ x0``, for ``k = 0..steps``.

    The real part is returned for real ``x0``.
    """
    if steps < 0:
        raise ParamError("steps must be >= 0")
    x0 = np.asarray(x0)
    b = result.amplitudes(x0)
    powers = result.eigenvalues[:, None] ** np.arange(steps + 1)[None, :]
    traj = result.modes @ (powers * b[:, None])
    return traj.real if np.isrealobj(x0) else traj


def dmdc(pair: SnapshotPair, rank=None) -> DmdcResult:
    """Solve ``X' ~ [A B] [X; Y]`` through the pseudo-inverse of the stack.

    Emits (and records in ``warnings``) an :class:`IllConditionedWarning`
    when the stacked data matrix is rank deficient, in which case ``A`` and
    ``B`` are only the minimum-norm solution.
    """
    if pair.inputs_current is None:
        raise ParamError("DMDc needs the input snapshot matrix")
    X, Xp, Y = pair.current, pair.shifted, np.atleast_2d(pair.inputs_current)
    if Y.shape[1] != X.shape[1]:
        Y = Y.reshape(-1, X.shape[1])
    n, m = X.shape
    q = Y.shape[0]
    notes = []
    if m < n + q:
        msg = f"{m} snapshots for {n + q} unknowns per row; (A, B) are not identifiable"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        notes.append(msg)

    omega = np.vstack([X, Y])
    Uo, s, Vh = np.linalg.svd(omega, full_matrices=False)
    r = _retained_rank(s, rank)
    if r < n + q:
        msg = f"stacked data matrix has rank {r} < {n + q}"
        warnings.warn(msg, IllConditionedWarning, stacklevel=2)
        notes.append(msg)
    G = (Xp @ Vh[:r].conj().T / s[:r]) @ Uo[:, :r].conj().T
    A, B = G[:, :n], G[:, n:]
    try:
        base = dmd(SnapshotPair(X, Xp - B @ Y))
    except RankError:
        base = None
    return DmdcResult(A, B, base, s, r, notes)


def save_dmd(result, path):
    try:
        Path(path).write_text(json.dumps(result.to_dict(), indent=2), encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def dmd_from_dict(d) -> dict:
    """Decode the arrays of a DMD JSON document."""
    try:
        eig = np.array([complex(re, im) for re, im in d["eigenvalues"]])
        n, r = d["modes"]["shape"]
        modes = (np.array(d["modes"]["real"]) + 1j * np.array(d["modes"]["imag"])).reshape(
            (n, r), order="F")
        return {"eigenvalues": eig, "modes": modes, "rank": int(d["rank"]),
                "singular_values": np.array(d["singular_values"])}
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed DMD document: {exc}") from exc

"""Least squares, sparse regression and sparsity sweeps.

All solvers work on a library matrix ``theta`` of shape ``(p, m)`` (one row
per candidate term, one column per sample) and targets of shape ``(n, m)``,
and return coefficients ``xi`` with ``targets ~ xi @ theta``.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, IoError, ParamError, SchemaError, ShapeError


@dataclass(frozen=True, eq=False)
class CoefficientMatrix:
    """``n x p`` coefficients; column ``j`` multiplies library term ``j``."""

    values: np.ndarray
    library: object = None

    def __post_init__(self):
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if not np.all(np.isfinite(values)):
            raise DataError("coefficients contain NaN or Inf")
        if self.library is not None and values.shape[1] != len(self.library.terms):
            raise ShapeError(
                f"{values.shape[1]} coefficient columns for {len(self.library.terms)} library terms"
            )
        object.__setattr__(self, "values", values)

    @property
    def nnz(self):
        return int(np.count_nonzero(self.values))

    def support(self):
        return self.values != 0

    def __eq__(self, other):
        if not isinstance(other, CoefficientMatrix):
            return NotImplemented
        return np.array_equal(self.values, other.values) and self.library == other.library

    __hash__ = None


def _as_theta(theta):
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    if not np.all(np.isfinite(theta)):
        raise DataError("library matrix contains NaN or Inf")
    return theta


def _as_targets(targets, m):
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    if targets.shape[1] != m:
        raise ShapeError(f"targets have {targets.shape[1]} samples, library has {m}")
    if not np.all(np.isfinite(targets)):
        raise DataError("targets contain NaN or Inf")
    return targets


def row_scales(theta):
    """l2 norm of each library row; all-zero rows get scale 1."""
    s = np.linalg.norm(theta, axis=1)
    s[s == 0] = 1.0
    return s


def least_squares(theta, target):
    """Minimum-norm solution of ``min ||target - xi @ theta||_2`` (SVD based)."""
    theta = _as_theta(theta)
    t = _as_targets(target, theta.shape[1])
    xi = np.linalg.lstsq(theta.T, t.T, rcond=None)[0].T
    return xi[0] if np.ndim(target) == 1 else xi


def lasso_objective(theta, target, xi, alpha):
    r = target - xi @ theta
    return 0.5 * r @ r + alpha * np.abs(xi).sum()


def lasso(theta, target, alpha, max_iters=10000, tol=1e-12, normalize=False):
    """Cyclic coordinate descent on ``0.5 ||target - xi theta||^2 + alpha ||xi||_1``.

    Stops when the largest coordinate update in a sweep is below ``tol`` (in
    the units of the coefficients) or after ``max_iters`` sweeps. With
    ``normalize`` the rows of ``theta`` are scaled to unit l2 norm for the
    solve, so ``alpha`` acts on scaled coefficients; the result is returned
    in the original units.
    """
    if alpha < 0:
        raise ParamError(f"alpha must be >= 0, got {alpha}")
    theta = _as_theta(theta)
    target = _as_targets(target, theta.shape[1])[0]
    scales = row_scales(theta) if normalize else np.ones(theta.shape[0])
    th = theta / scales[:, None]

    p = th.shape[0]
    col_sq = np.einsum("ij,ij->i", th, th)
    xi = np.zeros(p)
    r = target.copy()
    obj = lasso_objective(th, target, xi, alpha)
    for _ in range(int(max_iters)):
        max_step = 0.0
        for j in range(p):
            if col_sq[j] == 0.0:
                continue
            rho = th[j] @ r + col_sq[j] * xi[j]
            new = np.sign(rho) * max(abs(rho) - alpha, 0.0) / col_sq[j]
            step = new - xi[j]
            if step != 0.0:
                r -= step * th[j]
                xi[j] = new
                max_step = max(max_step, abs(step))
        new_obj = lasso_objective(th, target, xi, alpha)
        assert new_obj <= obj * (1 + 1e-12) + 1e-300, "lasso objective increased"
        obj = new_obj
        if max_step < tol:
            break
    return xi / scales


def stlsq(theta, targets, threshold, max_rounds=25, normalize=False, library=None):
    """Sequentially thresholded least squares.

    Per target row: fit least squares, drop terms whose coefficient is below
    ``threshold`` in magnitude, refit on the survivors, and repeat until the
    support stops changing. Coefficients off the final support are exactly 0
    and the survivors are the plain least-squares refit on that support.
    With ``normalize`` the threshold is applied to coefficients of the
    unit-norm rows.
    """
    if threshold < 0:
        raise ParamError(f"threshold must be >= 0, got {threshold}")
    theta = _as_theta(theta)
    targets = _as_targets(targets, theta.shape[1])
    scales = row_scales(theta) if normalize else np.ones(theta.shape[0])
    th = theta / scales[:, None]

    n, p = targets.shape[0], th.shape[0]
    xi = np.zeros((n, p))
    for i in range(n):
        xi[i] = _stlsq_row(th, targets[i], threshold, max_rounds)
    return CoefficientMatrix(xi / scales, library)


def _stlsq_row(th, y, threshold, max_rounds):
    p = th.shape[0]
    active = np.ones(p, dtype=bool)
    coef = np.zeros(p)
    for _ in range(max(int(max_rounds), 1)):
        coef = np.zeros(p)
        if active.any():
            coef[active] = np.linalg.lstsq(th[active].T, y, rcond=None)[0]
        keep = active & (np.abs(coef) >= threshold)
        if np.array_equal(keep, active):
            break
        active = keep
    else:
        coef = np.zeros(p)
        if active.any():
            coef[active] = np.linalg.lstsq(th[active].T, y, rcond=None)[0]
    coef[~active] = 0.0
    return coef


def rms(a):
    a = np.asarray(a, dtype=float)
    return float(np.sqrt(np.mean(a ** 2))) if a.size else 0.0


@dataclass
class ParetoPoint:
    alpha: float
    nnz: int
    train_error: float
    validation_error: float


@dataclass
class ParetoCurve:
    points: list
    selected: int = 0
    solver: str = "stlsq"
    coefficients: list = field(default_factory=list, repr=False)

    @property
    def alphas(self):
        return np.array([p.alpha for p in self.points])

    @property
    def nnz(self):
        return np.array([p.nnz for p in self.points])

    @property
    def best(self):
        return self.points[self.selected]

    @property
    def best_coefficients(self):
        return self.coefficients[self.selected] if self.coefficients else None

    def to_csv(self, path):
        path = Path(path)
        try:
            with path.open("w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(["alpha", "nnz", "train_error", "validation_error", "selected"])
                for k, p in enumerate(self.points):
                    w.writerow([repr(p.alpha), p.nnz, repr(p.train_error),
                                repr(p.validation_error), int(k == self.selected)])
        except OSError as exc:
            raise IoError(f"cannot write {path}: {exc}") from exc

    @classmethod
    def from_csv(cls, path):
        try:
            with Path(path).open(newline="", encoding="utf-8") as fh:
                rows = list(csv.DictReader(fh))
        except OSError as exc:
            raise IoError(f"cannot read {path}: {exc}") from exc
        try:
            points = [ParetoPoint(float(r["alpha"]), int(r["nnz"]), float(r["train_error"]),
                                  float(r["validation_error"])) for r in rows]
            sel = [k for k, r in enumerate(rows) if r.get("selected") == "1"]
        except (KeyError, ValueError) as exc:
            raise SchemaError(f"malformed Pareto CSV {path}: {exc}") from exc
        return cls(points, sel[0] if sel else 0)


def select_pareto(val_errors, nnz, rel_slack=0.05, abs_floor=0.0):
    """Index of the sparsest point whose validation error is within
    ``rel_slack`` of the best one (ties broken by lower error)."""
    val_errors = np.asarray(val_errors, dtype=float)
    finite = np.isfinite(val_errors)
    if not finite.any():
        return 0
    cutoff = (1 + rel_slack) * val_errors[finite].min() + abs_floor
    ok = np.flatnonzero(finite & (val_errors <= cutoff))
    return int(min(ok, key=lambda k: (nnz[k], val_errors[k])))


def _solve(theta, targets, alpha, solver, normalize, library):
    if solver == "stlsq":
        return stlsq(theta, targets, alpha, normalize=normalize, library=library)
    if solver == "lasso":
        xi = np.vstack([lasso(theta, t, alpha, normalize=normalize) for t in targets])
        return CoefficientMatrix(xi, library)
    raise ParamError(f"unknown solver {solver!r}")


def pareto_sweep(theta, targets, alphas, solver="stlsq", validation=None, refine=True,
                 normalize=True, library=None, split=0.8):
    """Sweep the sparsity knob and pick a parsimonious model.

    ``alphas`` are thresholds for STLSQ or l1 weights for LASSO. Validation
    data ``(theta_v, targets_v)`` defaults to the final ``1 - split`` of the
    training columns, in which case the fit uses only the leading part. The
    selected point is the sparsest one whose validation error is at most
    5% above the minimum; with ``refine`` the grid is then resampled ten
    times more finely between the neighbours of the selected alpha and the
    selection repeated on the merged curve.
    """
    alphas = np.asarray(alphas, dtype=float).ravel()
    if alphas.size == 0:
        raise ParamError("alpha grid is empty")
    if np.any(np.diff(alphas) <= 0):
        raise ParamError("alpha grid must be strictly increasing")
    if np.any(alphas < 0):
        raise ParamError("alphas must be non-negative")
    theta = _as_theta(theta)
    targets = _as_targets(targets, theta.shape[1])
    if validation is None:
        cut = int(round(split * theta.shape[1]))
        if cut < 1 or cut >= theta.shape[1]:
            raise ParamError("not enough samples for a validation split")
        theta, theta_v = theta[:, :cut], theta[:, cut:]
        targets, targets_v = targets[:, :cut], targets[:, cut:]
    else:
        theta_v = _as_theta(validation[0])
        targets_v = _as_targets(validation[1], theta_v.shape[1])
    # keeps "exact" fits from being separated by pure round-off
    floor = 1e-9 * (rms(targets_v) + 1e-300)

    def run(grid):
        out = []
        for a in grid:
            coef = _solve(theta, targets, a, solver, normalize, library)
            pt = ParetoPoint(float(a), coef.nnz, rms(targets - coef.values @ theta),
                             rms(targets_v - coef.values @ theta_v))
            out.append((pt, coef))
        return out

    results = run(alphas)
    sel = select_pareto([p.validation_error for p, _ in results], [p.nnz for p, _ in results],
                        abs_floor=floor)
    if refine and alphas.size > 1:
        lo = alphas[max(sel - 1, 0)]
        hi = alphas[min(sel + 1, alphas.size - 1)]
        n_int = (min(sel + 1, alphas.size - 1) - max(sel - 1, 0)) * 10 + 1
        fine = np.geomspace(lo, hi, n_int) if lo > 0 else np.linspace(lo, hi, n_int)
        known = {p.alpha for p, _ in results}
        extra = run([a for a in fine if float(a) not in known])
        results = sorted(results + extra, key=lambda r: r[0].alpha)
        sel = select_pareto([p.validation_error for p, _ in results],
                            [p.nnz for p, _ in results], abs_floor=floor)

    points = [p for p, _ in results]
    if solver == "stlsq" and np.any(np.diff([p.nnz for p in points]) > 0):
        warnings.warn("active-term count increased with the threshold", RuntimeWarning,
                      stacklevel=2)
    return ParetoCurve(points, sel, solver, [c for _, c in results])

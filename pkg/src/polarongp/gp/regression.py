"""Noise-free Gaussian-process regression trained by marginal-likelihood ascent."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
from scipy.optimize import minimize

from .kernels import Kernel, RationalQuadratic, kernel_from_dict, squared_differences

__all__ = [
    "ConditioningError",
    "JITTER_LADDER",
    "TrainedGP",
    "log_marginal_likelihood",
    "parameter_bounds",
    "fit",
    "condition",
    "predict",
    "gp_to_dict",
    "gp_from_dict",
    "save_gp",
    "load_gp",
]

log = logging.getLogger(__name__)

JITTER_LADDER = (1e-10, 1e-8, 1e-6)
_LOG2PI = math.log(2.0 * math.pi)

# search box in standardized units
LENGTH_SCALE_RANGE = (0.01, 10.0)
VARIANCE_RANGE = (1e-3, 1e3)
RQ_ALPHA_RANGE = (0.1, 10.0)


class ConditioningError(np.linalg.LinAlgError):
    """Cholesky factorization failed on every rung of the jitter ladder."""


def _factor(K: np.ndarray, noise: float, ladder=JITTER_LADDER):
    n = K.shape[0]
    scale = float(np.mean(np.diag(K)))
    for rung in ladder:
        jitter = rung * scale
        try:
            L = la.cholesky(K + (noise + jitter) * np.eye(n), lower=True, check_finite=False)
        except la.LinAlgError:
            continue
        if np.all(np.isfinite(L)):
            return L, jitter
    raise ConditioningError(
        f"Cholesky failed for jitter ladder {tuple(r * scale for r in ladder)} (mean diagonal {scale:.3e})"
    )


def _lml_from_sqdist(expr: Kernel, D2: np.ndarray, y: np.ndarray, noise: float = 0.0, grad: bool = True):
    n = len(y)
    if grad:
        K, dK = expr.gram_from_sqdist(D2, grad=True)
    else:
        K = expr.gram_from_sqdist(D2)
    L, jitter = _factor(K, noise)
    alpha = la.cho_solve((L, True), y, check_finite=False)
    value = -0.5 * float(y @ alpha) - float(np.sum(np.log(np.diag(L)))) - 0.5 * n * _LOG2PI
    if not grad:
        return value, None, jitter
    Kinv = la.cho_solve((L, True), np.eye(n), check_finite=False)
    W = np.outer(alpha, alpha) - Kinv
    # the jitter is a fixed multiple of mean(diag K), so it moves with the parameters too
    rung = jitter / float(np.mean(np.diag(K)))
    trW = float(np.trace(W))
    g = np.array([0.5 * (np.sum(W * d) + trW * rung * float(np.mean(np.diag(d)))) for d in dK])
    return value, g, jitter


def log_marginal_likelihood(expr: Kernel, X, y, noise: float = 0.0):
    """Return ``(log L, d log L / d log-params)`` on the given (unscaled) data."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    value, g, _ = _lml_from_sqdist(expr, squared_differences(X, X), y, noise)
    return value, g


def parameter_bounds(expr: Kernel) -> list[tuple[float, float]]:
    """Log-space box for every parameter of ``expr``, in :meth:`get_params` order."""
    lv = (math.log(VARIANCE_RANGE[0]), math.log(VARIANCE_RANGE[1]))
    lm = (-2.0 * math.log(LENGTH_SCALE_RANGE[1]), -2.0 * math.log(LENGTH_SCALE_RANGE[0]))
    la_ = (math.log(RQ_ALPHA_RANGE[0]), math.log(RQ_ALPHA_RANGE[1]))
    bounds = []
    for leaf in expr.leaves():
        bounds.append(lv)
        bounds.extend([lm] * leaf.input_dim)
        if isinstance(leaf, RationalQuadratic):
            bounds.append(la_)
    return bounds


@dataclass
class TrainedGP:
    """A fitted GP. Internals live in standardized coordinates.

    Inputs are mapped to the unit box of the training data and targets are
    centred and scaled; :func:`predict` takes and returns original units.
    """

    inputs: np.ndarray
    targets: np.ndarray
    kernel: Kernel
    x_offset: np.ndarray
    x_scale: np.ndarray
    y_offset: float
    y_scale: float
    jitter: float
    chol: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    lml: float
    noise: float = 0.0
    history: list = field(default_factory=list, repr=False)

    @property
    def n(self) -> int:
        return len(self.targets)

    def standardize(self, X) -> np.ndarray:
        return (np.atleast_2d(np.asarray(X, dtype=float)) - self.x_offset) / self.x_scale

    @property
    def inputs_std(self) -> np.ndarray:
        return self.standardize(self.inputs)

    @property
    def targets_std(self) -> np.ndarray:
        return (self.targets - self.y_offset) / self.y_scale

    def predict(self, X, return_var: bool = True):
        return predict(self, X, return_var=return_var)

    def predict_mean(self, X) -> np.ndarray:
        return predict(self, X, return_var=False)


def _check_inputs(X, y):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != len(y):
        raise ValueError(f"{X.shape[0]} inputs but {len(y)} targets")
    if len(y) < 2:
        raise ValueError("need at least 2 training points")
    if len(np.unique(X, axis=0)) != len(X):
        raise ValueError("duplicate input rows are not allowed with zero noise")
    return X, y


def standardization(X, y):
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    span[span == 0] = 1.0
    y_off = float(np.mean(y))
    y_scale = float(np.std(y))
    if not y_scale > 0:
        y_scale = 1.0
    return lo, span, y_off, y_scale


def _assemble(expr, X, y, x_off, x_scale, y_off, y_scale, noise, lml=None, history=None):
    Xs = (X - x_off) / x_scale
    ys = (y - y_off) / y_scale
    K = expr.gram(Xs)
    L, jitter = _factor(K, noise)
    w = la.cho_solve((L, True), ys, check_finite=False)
    if lml is None:
        lml = -0.5 * float(ys @ w) - float(np.sum(np.log(np.diag(L)))) - 0.5 * len(ys) * _LOG2PI
    return TrainedGP(inputs=X, targets=y, kernel=expr, x_offset=x_off, x_scale=x_scale, y_offset=y_off,
                     y_scale=y_scale, jitter=jitter, chol=L, weights=w, lml=lml, noise=noise,
                     history=history or [])


def fit(
    expr_template: Kernel,
    X,
    y,
    restarts: int = 8,
    seed: int = 0,
    noise: float = 0.0,
    maxiter: int = 200,
    standardize: tuple | None = None,
) -> TrainedGP:
    """Maximize the log marginal likelihood over the kernel's log-parameters.

    Restart 0 starts from the template's current parameters (warm start);
    the other ``restarts - 1`` draw log-uniformly inside
    :func:`parameter_bounds`. The restart with the highest LML wins, ties
    going to the lower restart index.

    ``standardize`` optionally fixes ``(x_offset, x_scale, y_offset, y_scale)``.
    """
    X, y = _check_inputs(X, y)
    if standardize is None:
        x_off, x_scale, y_off, y_scale = standardization(X, y)
    else:
        x_off, x_scale, y_off, y_scale = standardize
    Xs = (X - x_off) / x_scale
    ys = (y - y_off) / y_scale
    D2 = squared_differences(Xs, Xs)
    expr = expr_template.copy()
    bounds = parameter_bounds(expr)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    rng = np.random.default_rng(seed)

    def objective(theta):
        expr.set_params(theta)
        try:
            v, g, _ = _lml_from_sqdist(expr, D2, ys, noise)
        except ConditioningError:
            return 1e25, np.zeros_like(theta)
        return -v, -g

    best_theta, best_val = None, -np.inf
    history = []
    for r in range(max(1, restarts)):
        theta0 = np.clip(expr_template.get_params(), lo, hi) if r == 0 else rng.uniform(lo, hi)
        f0, _ = objective(theta0)
        res = minimize(objective, theta0, jac=True, method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": maxiter})
        cand_theta, cand_val = res.x, -float(res.fun)
        if -f0 > cand_val:
            cand_theta, cand_val = theta0, -f0
        ok = cand_val > -1e24
        history.append({"restart": r, "init_lml": -f0 if f0 < 1e24 else None,
                        "lml": cand_val if ok else None})
        if ok and cand_val > best_val:
            best_theta, best_val = cand_theta.copy(), cand_val
    if best_theta is None:
        raise ConditioningError("every restart failed to factorize the kernel matrix")
    expr.set_params(best_theta)
    return _assemble(expr, X, y, x_off, x_scale, y_off, y_scale, noise, history=history)


def condition(expr: Kernel, X, y, noise: float = 0.0, standardize: tuple | None = None) -> TrainedGP:
    """Build a :class:`TrainedGP` for fixed kernel parameters (no optimization)."""
    X, y = _check_inputs(X, y)
    consts = standardization(X, y) if standardize is None else standardize
    return _assemble(expr.copy(), X, y, *consts, noise)


def predict(gp: TrainedGP, X, return_var: bool = True):
    """Posterior mean (and variance) at the rows of ``X``, in original units."""
    Xq = gp.standardize(X)
    Ks = gp.kernel.gram(Xq, gp.inputs_std)
    mean = gp.y_offset + gp.y_scale * (Ks @ gp.weights)
    if not return_var:
        return mean
    v = la.solve_triangular(gp.chol, Ks.T, lower=True, check_finite=False)
    var = gp.kernel.diag(len(Xq)) - np.sum(v * v, axis=0)
    return mean, np.clip(var, 0.0, None) * gp.y_scale**2


def gp_to_dict(gp: TrainedGP) -> dict:
    return {
        "kernel": gp.kernel.to_dict(),
        "structure": gp.kernel.structure(),
        "inputs": gp.inputs.tolist(),
        "targets": gp.targets.tolist(),
        "x_offset": gp.x_offset.tolist(),
        "x_scale": gp.x_scale.tolist(),
        "y_offset": gp.y_offset,
        "y_scale": gp.y_scale,
        "noise": gp.noise,
        "jitter": gp.jitter,
        "weights": gp.weights.tolist(),
        "lml": gp.lml,
    }


def gp_from_dict(d: dict) -> TrainedGP:
    kernel = kernel_from_dict(d["kernel"])
    X = np.asarray(d["inputs"], dtype=float)
    y = np.asarray(d["targets"], dtype=float)
    x_off = np.asarray(d["x_offset"], dtype=float)
    x_scale = np.asarray(d["x_scale"], dtype=float)
    Xs = (X - x_off) / x_scale
    K = kernel.gram(Xs)
    L = la.cholesky(K + (d["noise"] + d["jitter"]) * np.eye(len(y)), lower=True)
    return TrainedGP(inputs=X, targets=y, kernel=kernel, x_offset=x_off, x_scale=x_scale,
                     y_offset=float(d["y_offset"]), y_scale=float(d["y_scale"]), jitter=float(d["jitter"]),
                     chol=L, weights=np.asarray(d["weights"], dtype=float), lml=float(d["lml"]),
                     noise=float(d["noise"]))


def save_gp(gp: TrainedGP, path) -> None:
    with open(path, "w") as fh:
        json.dump(gp_to_dict(gp), fh, indent=1)


def load_gp(path) -> TrainedGP:
    with open(path) as fh:
        return gp_from_dict(json.load(fh))

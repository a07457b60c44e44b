"""Greedy composite-kernel search scored by the Bayesian information criterion."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .gp import BASE_KERNELS, ConditioningError, Kernel, Product, Sum, TrainedGP, fit, parameter_count
from .gp.regression import VARIANCE_RANGE

__all__ = ["CandidateModel", "SearchResult", "bic", "expand", "search", "loo_residual_variance"]

log = logging.getLogger(__name__)

BIC_TIE = 1e-9
MIN_IMPROVEMENT = 1e-6


def bic(lml: float, param_count: int, n: int) -> float:
    """``lml - 0.5 * param_count * ln(n)``."""
    return lml - 0.5 * param_count * math.log(n)


@dataclass
class CandidateModel:
    kernel: Kernel
    fitted: TrainedGP
    lml: float
    bic: float
    depth: int

    @property
    def structure(self) -> str:
        return self.kernel.structure()

    @property
    def param_count(self) -> int:
        return parameter_count(self.kernel)


@dataclass
class SearchResult:
    """Winning candidate plus the per-round trace of every fit."""

    best: CandidateModel
    trace: list = field(default_factory=list)

    @property
    def fitted(self) -> TrainedGP:
        return self.best.fitted

    @property
    def structure(self) -> str:
        return self.best.structure


def loo_residual_variance(gp: TrainedGP) -> float:
    """Variance of the closed-form leave-one-out residuals, standardized units."""
    Kinv = np.linalg.inv(gp.chol).T @ np.linalg.inv(gp.chol)
    res = gp.weights / np.diag(Kinv)
    return float(np.var(res))


def expand(best: Kernel, init_variance: float = 1.0) -> list[Kernel]:
    """``best + B`` and ``best * B`` for each base kernel B, parameters of ``best`` kept.

    New sum leaves start at ``init_variance``; new product leaves start at unit
    variance so the product keeps the scale of ``best``. Length scales start at 1.
    """
    p = best.input_dim
    out = []
    lo, hi = VARIANCE_RANGE
    v = float(np.clip(init_variance, lo, hi))
    for cls in BASE_KERNELS:
        out.append(Sum(best.copy(), cls(p, variance=v, metric=1.0)))
    for cls in BASE_KERNELS:
        out.append(Product(best.copy(), cls(p, variance=1.0, metric=1.0)))
    return out


def _pick(cands: list[CandidateModel]) -> CandidateModel:
    best = cands[0]
    for c in cands[1:]:
        if c.bic > best.bic + BIC_TIE:
            best = c
        elif abs(c.bic - best.bic) <= BIC_TIE and c.param_count < best.param_count:
            best = c
    return best


def _fit_round(kernels, X, y, restarts, seed, depth, record):
    n = len(y)
    fitted = []
    for idx, k in enumerate(kernels):
        try:
            gp = fit(k, X, y, restarts=restarts, seed=seed + 7919 * depth + idx)
        except ConditioningError as err:
            log.warning("candidate %s skipped: %s", k.structure(), err)
            record.append({"structure": k.structure(), "failed": str(err), "param_count": parameter_count(k)})
            continue
        c = CandidateModel(gp.kernel, gp, gp.lml, bic(gp.lml, parameter_count(gp.kernel), n), depth)
        record.append({"structure": c.structure, "lml": c.lml, "bic": c.bic, "param_count": c.param_count})
        fitted.append(c)
    if not fitted:
        raise ConditioningError(f"every candidate failed in round {depth}")
    return fitted


def search(X, y, max_depth: int = 3, restarts: int = 8, seed: int = 0) -> SearchResult:
    """Greedy search: fit the three bases, then repeatedly expand the BIC leader.

    Stops when a round fails to raise the best BIC by more than 1e-6 or
    after ``max_depth`` expansion rounds.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if len(y) < 5:
        raise ValueError("kernel search needs at least 5 points")
    p = X.shape[1]
    trace = []
    record = []
    round0 = _fit_round([cls(p) for cls in BASE_KERNELS], X, y, restarts, seed, 0, record)
    trace.append({"round": 0, "candidates": record})
    best = _pick(round0)
    for depth in range(1, max_depth + 1):
        record = []
        try:
            init_var = loo_residual_variance(best.fitted)
        except np.linalg.LinAlgError:
            init_var = 1.0
        cands = _fit_round(expand(best.kernel, init_var), X, y, restarts, seed, depth, record)
        trace.append({"round": depth, "candidates": record})
        leader = _pick(cands)
        if leader.bic > best.bic + MIN_IMPROVEMENT:
            best = leader
        else:
            break
    log.info("kernel search selected %s (BIC %.4f)", best.structure, best.bic)
    return SearchResult(best=best, trace=trace)

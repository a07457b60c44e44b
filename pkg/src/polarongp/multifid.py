"""Nonlinear auto-regressive multi-fidelity GP stacks.

Level 0 is a plain GP on ``x``. Level t regresses on ``(x, u)`` where ``u``
is the level t-1 posterior mean at ``x``, with covariance::

    k_t((x, u), (x', u')) = k_z(x, x') * k_f(u, u') + k_gamma(x, x')

All three factors are Matern-5/2 leaves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gp import ConditioningError, Kernel, Matern52, Product, Sum, TrainedGP, fit

__all__ = ["FidelityDataset", "NargpStack", "nargp_kernel", "fit_stack", "predict_stack"]


@dataclass
class FidelityDataset:
    level: int
    inputs: np.ndarray
    targets: np.ndarray
    solver_spec: tuple | None = None

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        self.targets = np.asarray(self.targets, dtype=float).ravel()


@dataclass
class NargpStack:
    levels: list[TrainedGP]
    mc_samples: int = 100
    specs: list = field(default_factory=list)

    @property
    def input_dim(self) -> int:
        return self.levels[0].inputs.shape[1]

    def predict(self, X, mode: str = "mean", samples: int | None = None, seed: int = 0):
        return predict_stack(self, X, mode=mode, samples=samples, seed=seed)


def nargp_kernel(p: int) -> Kernel:
    """``M52(x) * M52(u) + M52(x)`` on inputs of width ``p + 1`` (``u`` last)."""
    x_dims = tuple(range(p))
    return Sum(
        Product(Matern52(p, dims=x_dims), Matern52(1, dims=(p,))),
        Matern52(p, dims=x_dims),
    )


def _augment(X, u):
    return np.column_stack([X, u])


def fit_stack(datasets, restarts: int = 8, seed: int = 0, mc_samples: int = 100) -> NargpStack:
    """Fit level 0 on ``x`` and each higher level on ``x`` augmented by the previous mean."""
    datasets = sorted(datasets, key=lambda d: d.level)
    if len(datasets) < 2:
        raise ValueError("a multi-fidelity stack needs at least two levels")
    p = datasets[0].inputs.shape[1]
    levels = []
    for t, ds in enumerate(datasets):
        try:
            if t == 0:
                gp = fit(Matern52(p), ds.inputs, ds.targets, restarts=restarts, seed=seed)
            else:
                partial = NargpStack(levels=list(levels))
                u = predict_stack(partial, ds.inputs, mode="mean")[0]
                gp = fit(nargp_kernel(p), _augment(ds.inputs, u), ds.targets, restarts=restarts, seed=seed + t)
        except (ConditioningError, ValueError) as err:
            raise type(err)(f"fidelity level {ds.level}: {err}") from err
        levels.append(gp)
    return NargpStack(levels=levels, mc_samples=mc_samples, specs=[d.solver_spec for d in datasets])


def predict_stack(stack: NargpStack, X, mode: str = "mean", samples: int | None = None, seed: int = 0):
    """Top-level posterior ``(mean, variance)``.

    ``mode="mean"`` feeds each level the previous posterior mean.
    ``mode="monte_carlo"`` propagates ``samples`` draws through every level
    and combines them with the law of total variance.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    mean, var = stack.levels[0].predict(X)
    if mode == "mean":
        for gp in stack.levels[1:]:
            mean, var = gp.predict(_augment(X, mean))
        return mean, var
    if mode != "monte_carlo":
        raise ValueError(f"unknown mode {mode!r}")
    S = samples or stack.mc_samples
    rng = np.random.default_rng(seed)
    m = X.shape[0]
    draws = mean[None, :] + np.sqrt(var)[None, :] * rng.standard_normal((S, m))
    mu = sig2 = None
    for t, gp in enumerate(stack.levels[1:], start=1):
        Xrep = np.tile(X, (S, 1))
        mu_flat, var_flat = gp.predict(_augment(Xrep, draws.ravel()))
        mu, sig2 = mu_flat.reshape(S, m), var_flat.reshape(S, m)
        if t < len(stack.levels) - 1:
            draws = mu + np.sqrt(sig2) * rng.standard_normal((S, m))
    return mu.mean(axis=0), sig2.mean(axis=0) + mu.var(axis=0)

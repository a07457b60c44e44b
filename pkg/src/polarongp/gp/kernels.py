"""Anisotropic base kernels and their sum/product composition trees.

Every leaf is ``variance * profile(r2)`` with
``r2 = sum_d metric_d * (x_d - x'_d)**2``, where ``metric`` is the diagonal
of the kernel metric (inverse squared length scales). Parameters are
exposed in log space, so any real vector is a valid parameter setting.
"""

from __future__ import annotations

import copy
import math

import numpy as np

__all__ = [
    "Kernel",
    "Leaf",
    "SquaredExponential",
    "Matern52",
    "RationalQuadratic",
    "Sum",
    "Product",
    "BASE_KERNELS",
    "squared_differences",
    "eval_kernel",
    "parameter_count",
    "kernel_from_dict",
]

_SQRT5 = math.sqrt(5.0)


def squared_differences(X1: np.ndarray, X2: np.ndarray) -> np.ndarray:
    """Per-dimension squared differences, shape ``(p, n1, n2)``."""
    X1 = np.atleast_2d(X1)
    X2 = np.atleast_2d(X2)
    if X1.shape[1] != X2.shape[1]:
        raise ValueError(f"dimension mismatch: {X1.shape[1]} vs {X2.shape[1]}")
    return (X1.T[:, :, None] - X2.T[:, None, :]) ** 2


class Kernel:
    """Node of a kernel expression tree."""

    def n_params(self) -> int:
        raise NotImplementedError

    def get_params(self) -> np.ndarray:
        raise NotImplementedError

    def set_params(self, theta) -> None:
        raise NotImplementedError

    def leaves(self) -> list["Leaf"]:
        raise NotImplementedError

    def gram_from_sqdist(self, D2: np.ndarray, grad: bool = False):
        """Kernel matrix from :func:`squared_differences` output.

        With ``grad=True`` also returns the list of derivatives with respect
        to each log-parameter, in :meth:`get_params` order.
        """
        raise NotImplementedError

    def diag(self, n: int) -> np.ndarray:
        raise NotImplementedError

    def structure(self) -> str:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    @property
    def input_dim(self) -> int:
        return self.leaves()[0].input_dim

    def gram(self, X1, X2=None) -> np.ndarray:
        X2 = X1 if X2 is None else X2
        return self.gram_from_sqdist(squared_differences(X1, X2))

    def copy(self) -> "Kernel":
        return copy.deepcopy(self)

    def __add__(self, other):
        return Sum(self, other)

    def __mul__(self, other):
        return Product(self, other)

    def __repr__(self):
        return f"<{self.structure()} {self.n_params()} params>"


class Leaf(Kernel):
    """Stationary base kernel acting on the input columns ``dims``.

    Parameters
    ----------
    input_dim : int
        Number of active input columns p.
    variance : float
        Signal variance; the kernel value at zero distance.
    metric : array_like or float
        Inverse squared length scale per active dimension.
    dims : sequence of int, optional
        Columns of the full input the leaf reads; defaults to ``range(input_dim)``.
    """

    symbol = "?"
    n_extra = 0

    def __init__(self, input_dim: int, variance: float = 1.0, metric=1.0, dims=None):
        self._input_dim = int(input_dim)
        self.dims = tuple(range(self._input_dim)) if dims is None else tuple(int(d) for d in dims)
        if len(self.dims) != self._input_dim:
            raise ValueError("dims must have input_dim entries")
        metric = np.broadcast_to(np.asarray(metric, dtype=float), (self._input_dim,)).copy()
        if variance <= 0 or np.any(metric <= 0):
            raise ValueError("variance and metric entries must be > 0")
        self.log_variance = math.log(variance)
        self.log_metric = np.log(metric)

    @property
    def input_dim(self) -> int:
        return self._input_dim

    @property
    def variance(self) -> float:
        return math.exp(self.log_variance)

    @property
    def metric(self) -> np.ndarray:
        return np.exp(self.log_metric)

    @property
    def length_scales(self) -> np.ndarray:
        return np.exp(-0.5 * self.log_metric)

    def leaves(self):
        return [self]

    def n_params(self):
        return 1 + self._input_dim + self.n_extra

    def get_params(self):
        return np.concatenate([[self.log_variance], self.log_metric, self._extra_get()])

    def set_params(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params(),):
            raise ValueError(f"expected {self.n_params()} parameters, got {theta.shape}")
        self.log_variance = float(theta[0])
        self.log_metric = theta[1:1 + self._input_dim].copy()
        self._extra_set(theta[1 + self._input_dim:])

    def _extra_get(self):
        return np.empty(0)

    def _extra_set(self, theta):
        pass

    def _profile(self, r2, grad):
        """Return ``profile(r2)`` and, with ``grad``, ``d profile / d r2``."""
        raise NotImplementedError

    def _extra_grads(self, r2, var):
        return []

    def gram_from_sqdist(self, D2, grad=False):
        if self.dims != tuple(range(D2.shape[0])):
            D2 = D2[list(self.dims)]
        metric = self.metric
        r2 = np.tensordot(metric, D2, axes=1)
        var = self.variance
        if not grad:
            return var * self._profile(r2, False)
        prof, dprof = self._profile(r2, True)
        K = var * prof
        grads = [K]
        scaled = var * dprof
        for d in range(self._input_dim):
            grads.append(scaled * (metric[d] * D2[d]))
        grads.extend(self._extra_grads(r2, var))
        return K, grads

    def diag(self, n):
        return np.full(n, self.variance)

    def structure(self):
        return self.symbol

    def to_dict(self):
        return {"type": self.symbol, "input_dim": self._input_dim, "dims": list(self.dims),
                "params": self.get_params().tolist()}


class SquaredExponential(Leaf):
    symbol = "SE"

    def _profile(self, r2, grad):
        e = np.exp(-0.5 * r2)
        return (e, -0.5 * e) if grad else e


class Matern52(Leaf):
    symbol = "M52"

    def _profile(self, r2, grad):
        r = np.sqrt(np.maximum(r2, 0.0))
        e = np.exp(-_SQRT5 * r)
        prof = (1.0 + _SQRT5 * r + (5.0 / 3.0) * r2) * e
        if not grad:
            return prof
        return prof, -(5.0 / 6.0) * (1.0 + _SQRT5 * r) * e


class RationalQuadratic(Leaf):
    symbol = "RQ"
    n_extra = 1

    def __init__(self, input_dim, variance=1.0, metric=1.0, alpha=1.0, dims=None):
        super().__init__(input_dim, variance, metric, dims)
        if alpha <= 0:
            raise ValueError("alpha must be > 0")
        self.log_alpha = math.log(alpha)

    @property
    def alpha(self) -> float:
        return math.exp(self.log_alpha)

    def _extra_get(self):
        return np.array([self.log_alpha])

    def _extra_set(self, theta):
        self.log_alpha = float(theta[0])

    def _profile(self, r2, grad):
        a = self.alpha
        base = 1.0 + r2 / (2.0 * a)
        prof = base ** (-a)
        if not grad:
            return prof
        return prof, -0.5 * base ** (-a - 1.0)

    def _extra_grads(self, r2, var):
        a = self.alpha
        u = r2 / (2.0 * a)
        base = 1.0 + u
        k = var * base ** (-a)
        # d k / d log(alpha) = alpha * d k / d alpha
        return [a * k * (-np.log1p(u) + u / base)]


BASE_KERNELS = (SquaredExponential, Matern52, RationalQuadratic)
_LEAF_TYPES = {cls.symbol: cls for cls in BASE_KERNELS}


class _Binary(Kernel):
    op = "?"

    def __init__(self, left: Kernel, right: Kernel):
        if left.input_dim != right.input_dim and not self._allow_mixed_dims(left, right):
            raise ValueError("children must share the input dimension")
        self.left = left
        self.right = right

    @staticmethod
    def _allow_mixed_dims(left, right):
        # leaves restricted to column subsets (multi-fidelity kernels) may differ
        return any(l.dims != tuple(range(l.input_dim)) for l in left.leaves() + right.leaves())

    @property
    def input_dim(self):
        return max(max(l.dims) + 1 for l in self.leaves())

    def leaves(self):
        return self.left.leaves() + self.right.leaves()

    def n_params(self):
        return self.left.n_params() + self.right.n_params()

    def get_params(self):
        return np.concatenate([self.left.get_params(), self.right.get_params()])

    def set_params(self, theta):
        theta = np.asarray(theta, dtype=float)
        n = self.left.n_params()
        if theta.shape != (self.n_params(),):
            raise ValueError(f"expected {self.n_params()} parameters, got {theta.shape}")
        self.left.set_params(theta[:n])
        self.right.set_params(theta[n:])

    def structure(self):
        def wrap(node):
            s = node.structure()
            return f"({s})" if isinstance(node, _Binary) else s

        return f"{wrap(self.left)}{self.op}{wrap(self.right)}"

    def to_dict(self):
        return {"type": self.op, "children": [self.left.to_dict(), self.right.to_dict()]}


class Sum(_Binary):
    op = "+"

    def gram_from_sqdist(self, D2, grad=False):
        if not grad:
            return self.left.gram_from_sqdist(D2) + self.right.gram_from_sqdist(D2)
        K1, g1 = self.left.gram_from_sqdist(D2, True)
        K2, g2 = self.right.gram_from_sqdist(D2, True)
        return K1 + K2, g1 + g2

    def diag(self, n):
        return self.left.diag(n) + self.right.diag(n)


class Product(_Binary):
    op = "*"

    def gram_from_sqdist(self, D2, grad=False):
        if not grad:
            return self.left.gram_from_sqdist(D2) * self.right.gram_from_sqdist(D2)
        K1, g1 = self.left.gram_from_sqdist(D2, True)
        K2, g2 = self.right.gram_from_sqdist(D2, True)
        return K1 * K2, [g * K2 for g in g1] + [K1 * g for g in g2]

    def diag(self, n):
        return self.left.diag(n) * self.right.diag(n)


def parameter_count(expr: Kernel) -> int:
    """Number of free kernel parameters, as penalized by the BIC."""
    return expr.n_params()


def eval_kernel(expr: Kernel, x, x_prime) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x_prime = np.atleast_1d(np.asarray(x_prime, dtype=float))
    if x.shape != x_prime.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {x_prime.shape}")
    if x.shape[0] < expr.input_dim:
        raise ValueError(f"kernel expects {expr.input_dim} inputs, got {x.shape[0]}")
    return float(expr.gram(x[None, :], x_prime[None, :])[0, 0])


def kernel_from_dict(d: dict) -> Kernel:
    kind = d["type"]
    if kind in ("+", "*"):
        left, right = (kernel_from_dict(c) for c in d["children"])
        return Sum(left, right) if kind == "+" else Product(left, right)
    leaf = _LEAF_TYPES[kind](d["input_dim"], dims=d.get("dims"))
    leaf.set_params(np.asarray(d["params"], dtype=float))
    return leaf

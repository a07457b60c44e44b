"""Latin-hypercube designs over (omega, lambda_ssh, k) boxes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

__all__ = ["SampleBox", "lhs_sample", "strata_counts", "CANONICAL_ORDER"]

CANONICAL_ORDER = ("omega", "lambda_ssh", "k")


@dataclass(frozen=True)
class SampleBox:
    """Closed per-dimension ranges, e.g. ``{"omega": (1, 1.3), "lambda_ssh": (0.25, 1.75), "k": (0, pi)}``.

    ``lambda_h`` is held fixed rather than sampled.
    """

    ranges: dict
    lambda_h: float = 0.0
    labels: tuple = field(default=None)

    def __post_init__(self):
        labels = tuple(self.ranges) if self.labels is None else tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        for name in labels:
            lo, hi = self.ranges[name]
            if lo > hi:
                raise ValueError(f"{name}: lo={lo} > hi={hi}")
        if "k" in self.ranges:
            lo, hi = self.ranges["k"]
            if lo < 0 or hi > np.pi + 1e-12:
                raise ValueError("k range must lie inside [0, pi]")

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def lower(self) -> np.ndarray:
        return np.array([self.ranges[n][0] for n in self.labels], dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.ranges[n][1] for n in self.labels], dtype=float)

    def to_dict(self) -> dict:
        return {"ranges": {n: list(map(float, self.ranges[n])) for n in self.labels}, "lambda_h": self.lambda_h}

    @classmethod
    def from_dict(cls, d: dict) -> "SampleBox":
        """Labels take the canonical order (omega, lambda_ssh, k, then the rest sorted)."""
        ranges = d["ranges"] if "ranges" in d else {k: v for k, v in d.items() if k != "lambda_h"}
        labels = [n for n in CANONICAL_ORDER if n in ranges] + sorted(set(ranges) - set(CANONICAL_ORDER))
        return cls({k: tuple(map(float, ranges[k])) for k in labels}, lambda_h=float(d.get("lambda_h", 0.0)))


def lhs_sample(n: int, box: SampleBox, seed: int = 0) -> np.ndarray:
    """``n`` points, exactly one per equal-width stratum along every dimension."""
    if n < 1:
        raise ValueError("n must be >= 1")
    unit = qmc.LatinHypercube(d=box.dim, seed=np.random.default_rng(seed)).random(n)
    return box.lower + unit * (box.upper - box.lower)


def strata_counts(points: np.ndarray, box: SampleBox) -> np.ndarray:
    """Occupancy of the ``n`` strata per dimension, shape ``(dim, n)``."""
    pts = np.atleast_2d(points)
    n = len(pts)
    span = box.upper - box.lower
    span[span == 0] = 1.0
    idx = np.floor((pts - box.lower) / span * n).astype(int)
    idx = np.clip(idx, 0, n - 1)
    return np.stack([np.bincount(idx[:, d], minlength=n) for d in range(box.dim)])

"""Synthetic Gaussian designs with independent or AR(1)-correlated columns."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import GroupPartition, ProblemData

AR_COEF = 0.5


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of one synthetic regression problem.

    ``support="group"`` picks ``gamma1`` percent of the groups, then
    ``gamma2`` percent of the features inside each picked group.
    ``support="feature"`` picks ``gamma1`` percent of all features and
    ignores ``gamma2`` (the nonnegative-lasso setup).
    """

    kind: str = "independent"
    n: int = 250
    p: int = 10000
    g: int = 1000
    gamma1: float = 10.0
    gamma2: float = 10.0
    noise_scale: float = 0.01
    seed: int = 0
    support: str = "group"

    def __post_init__(self):
        errors = []
        if self.kind not in ("independent", "ar_correlated"):
            errors.append(f"kind must be 'independent' or 'ar_correlated', got {self.kind!r}")
        if self.support not in ("group", "feature"):
            errors.append(f"support must be 'group' or 'feature', got {self.support!r}")
        if self.n < 1 or self.p < 1 or self.g < 1:
            errors.append("n, p and g must be positive")
        if self.g > self.p:
            errors.append(f"cannot split {self.p} features into {self.g} nonempty groups")
        for name in ("gamma1", "gamma2"):
            val = getattr(self, name)
            if not 0 < val <= 100:
                errors.append(f"{name} must lie in (0, 100], got {val}")
        if self.noise_scale < 0:
            errors.append("noise_scale must be nonnegative")
        if errors:
            raise ValueError("; ".join(errors))

    @classmethod
    def synthetic1(cls, **kw) -> "SyntheticSpec":
        kw.setdefault("gamma1", 10.0)
        kw.setdefault("gamma2", 10.0)
        return cls(kind="independent", **kw)

    @classmethod
    def synthetic2(cls, **kw) -> "SyntheticSpec":
        kw.setdefault("gamma1", 20.0)
        kw.setdefault("gamma2", 20.0)
        return cls(kind="ar_correlated", **kw)


def _count(percent: float, total: int) -> int:
    return min(total, max(1, int(round(percent * total / 100.0))))


def ar1_design(rng: np.random.Generator, n: int, p: int, coef: float = AR_COEF) -> np.ndarray:
    """Rows with unit-variance columns and corr(x_i, x_j) = coef^|i-j|."""
    eps = rng.standard_normal((n, p))
    x = np.empty((n, p))
    x[:, 0] = eps[:, 0]
    innov = np.sqrt(1.0 - coef * coef)
    for j in range(1, p):
        x[:, j] = coef * x[:, j - 1] + innov * eps[:, j]
    return x


def random_partition(rng: np.random.Generator, p: int, g: int) -> np.ndarray:
    """Randomly scatter p features over g groups of near-equal size."""
    sizes = np.full(g, p // g)
    sizes[: p % g] += 1
    labels = np.repeat(np.arange(g), sizes)
    return labels[rng.permutation(p)]


def gen_synthetic(spec: SyntheticSpec) -> tuple[ProblemData, np.ndarray]:
    """Draw (data, true_beta) with ``y = X beta + noise_scale * eps``.

    Identical specs give bitwise-identical output.
    """
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "independent":
        x = rng.standard_normal((spec.n, spec.p))
    else:
        x = ar1_design(rng, spec.n, spec.p)
    assignment = random_partition(rng, spec.p, spec.g)
    groups = GroupPartition(assignment, spec.g)

    beta = np.zeros(spec.p)
    if spec.support == "feature":
        chosen = np.sort(rng.choice(spec.p, _count(spec.gamma1, spec.p), replace=False))
    else:
        picked = np.sort(rng.choice(spec.g, _count(spec.gamma1, spec.g), replace=False))
        chosen = []
        for gi in picked:
            idx = groups.indices[gi]
            chosen.extend(np.sort(rng.choice(idx, _count(spec.gamma2, idx.size), replace=False)))
        chosen = np.asarray(chosen, dtype=np.int64)
    beta[chosen] = rng.standard_normal(chosen.size)

    y = x @ beta + spec.noise_scale * rng.standard_normal(spec.n)
    return ProblemData(x, y, groups), beta

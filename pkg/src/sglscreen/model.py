"""Problem data, group partitions and solution containers."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class ProblemValidationError(ValueError):
    """Raised when a problem violates one or more structural invariants.

    ``problems`` lists every violation found, not only the first.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid problem: " + "; ".join(self.problems))


class DegenerateProblemError(ValueError):
    """The regularization path is undefined because every lambda gives zero."""


@dataclass(frozen=True, eq=False)
class GroupPartition:
    """Assignment of p features to G groups.

    Features of one group need not be contiguous. ``assignment[i]`` is the
    group of feature ``i``; ``n_groups`` defaults to ``max(assignment) + 1``.
    """

    assignment: np.ndarray
    n_groups: int | None = None

    def __post_init__(self):
        a = np.asarray(self.assignment)
        if a.dtype.kind not in "iu":
            if a.size and not np.all(np.equal(np.mod(a, 1), 0)):
                raise ProblemValidationError(["group indices must be integers"])
            a = a.astype(np.int64)
        a = np.array(a, dtype=np.int64)
        a.flags.writeable = False
        object.__setattr__(self, "assignment", a)
        if self.n_groups is None:
            object.__setattr__(self, "n_groups", int(a.max()) + 1 if a.size else 0)

    @property
    def n_features(self) -> int:
        return int(self.assignment.size)

    @cached_property
    def order(self) -> np.ndarray:
        # stable sort keeps within-group column order
        return np.argsort(self.assignment, kind="stable")

    @cached_property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.n_groups)

    @cached_property
    def starts(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(self.sizes)[:-1]))

    @cached_property
    def weights(self) -> np.ndarray:
        """sqrt(n_g) for every group."""
        return np.sqrt(self.sizes.astype(float))

    @cached_property
    def indices(self) -> list[np.ndarray]:
        """Column indices of every group, in increasing order."""
        o, s, n = self.order, self.starts, self.sizes
        return [o[s[g]:s[g] + n[g]] for g in range(self.n_groups)]

    @cached_property
    def padded_index(self) -> np.ndarray:
        """(G, max n_g) matrix of member columns, right-padded with -1."""
        width = int(self.sizes.max()) if self.n_groups else 0
        out = np.full((self.n_groups, width), -1, dtype=np.int64)
        pos = np.arange(self.n_features) - np.repeat(self.starts, self.sizes)
        out[self.assignment[self.order], pos] = self.order
        return out

    def group_sum(self, v: np.ndarray) -> np.ndarray:
        return np.bincount(self.assignment, weights=v, minlength=self.n_groups)

    def group_norms(self, v: np.ndarray) -> np.ndarray:
        return np.sqrt(self.group_sum(v * v))

    def group_max(self, v: np.ndarray) -> np.ndarray:
        """Per-group maximum of ``v`` (all groups must be nonempty)."""
        return np.maximum.reduceat(v[self.order], self.starts)

    def expand(self, per_group: np.ndarray) -> np.ndarray:
        """Broadcast a per-group vector back to feature length."""
        return per_group[self.assignment]

    def reconstruct_assignment(self) -> np.ndarray:
        out = np.empty(self.n_features, dtype=np.int64)
        for g, idx in enumerate(self.indices):
            out[idx] = g
        return out

    @classmethod
    def contiguous(cls, sizes) -> "GroupPartition":
        sizes = list(sizes)
        return cls(np.repeat(np.arange(len(sizes)), sizes), len(sizes))


@dataclass(frozen=True, eq=False)
class ProblemData:
    """Design matrix ``x`` (N x p), response ``y`` (N,) and group partition."""

    x: np.ndarray
    y: np.ndarray
    groups: GroupPartition

    def __post_init__(self):
        x = np.array(self.x, dtype=np.float64, order="C")
        y = np.array(self.y, dtype=np.float64).ravel()
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if not isinstance(self.groups, GroupPartition):
            object.__setattr__(self, "groups", GroupPartition(self.groups))

    @property
    def n_samples(self) -> int:
        return self.x.shape[0]

    @property
    def n_features(self) -> int:
        return self.x.shape[1] if self.x.ndim == 2 else 0

    @cached_property
    def xty(self) -> np.ndarray:
        return self.x.T @ self.y

    @cached_property
    def column_norms(self) -> np.ndarray:
        return np.sqrt(np.einsum("ij,ij->j", self.x, self.x))

    @cached_property
    def group_spectral_norms(self) -> np.ndarray:
        """||X_g||_2 per group, computed once and shared by every (alpha, lambda)."""
        from .kernels import spectral_norm

        return np.array([spectral_norm(self.x[:, idx]) for idx in self.groups.indices])

    @cached_property
    def lipschitz(self) -> float:
        from .kernels import gram_lipschitz

        return gram_lipschitz(self.x)

    def group_block(self, g: int) -> np.ndarray:
        return self.x[:, self.groups.indices[g]]


@dataclass(frozen=True)
class PenaltyParams:
    """SGL penalty in the (lambda, alpha) parameterization.

    ``lambda1 = alpha * lambda`` weighs the group norms and ``lambda2 = lambda``
    the l1 norm.
    """

    lam: float
    alpha: float
    # lambda1 as given to from_lambdas, so that conversion round-trips exactly
    _lambda1: float | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not (self.lam > 0 and np.isfinite(self.lam)):
            raise ValueError(f"lambda must be positive and finite, got {self.lam}")
        if not (self.alpha > 0 and np.isfinite(self.alpha)):
            raise ValueError(f"alpha must be positive and finite, got {self.alpha}")

    @property
    def lambda1(self) -> float:
        return self.alpha * self.lam if self._lambda1 is None else self._lambda1

    @property
    def lambda2(self) -> float:
        return self.lam

    @classmethod
    def from_lambdas(cls, lambda1: float, lambda2: float) -> "PenaltyParams":
        if not (lambda1 > 0 and lambda2 > 0):
            raise ValueError(f"lambda1 and lambda2 must be positive, got {lambda1}, {lambda2}")
        return cls(lam=lambda2, alpha=lambda1 / lambda2, _lambda1=float(lambda1))


@dataclass(frozen=True, eq=False)
class PrimalSolution:
    beta: np.ndarray
    objective: float
    iterations: int
    duality_gap: float
    converged: bool = True
    gap_trace: tuple = field(default=(), repr=False)


@dataclass(frozen=True, eq=False)
class DualPoint:
    theta: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.theta)):
            raise ValueError("dual point has non-finite entries")


def validate_problem(data: ProblemData) -> ProblemData:
    """Check every structural invariant of ``data``.

    Returns ``data`` itself when valid; otherwise raises
    :class:`ProblemValidationError` listing all violations.
    """
    problems = []
    x, y, groups = data.x, data.y, data.groups
    if x.ndim != 2:
        problems.append(f"design matrix must be 2-D, got shape {x.shape}")
        n, p = (x.shape[0] if x.ndim else 0), 0
    else:
        n, p = x.shape
    if n < 1:
        problems.append("need at least one sample (N >= 1)")
    if p < 1:
        problems.append("need at least one feature (p >= 1)")
    if y.shape[0] != n:
        problems.append(f"response length != N ({y.shape[0]} != {n})")
    if x.size and not np.all(np.isfinite(x)):
        bad = np.argwhere(~np.isfinite(x))[0]
        problems.append(f"non-finite entry in design matrix at row {bad[0]}, column {bad[1]}")
    if y.size and not np.all(np.isfinite(y)):
        bad = int(np.flatnonzero(~np.isfinite(y))[0])
        problems.append(f"non-finite entry in response at position {bad}")

    a = groups.assignment
    if a.ndim != 1 or a.size != p:
        problems.append(f"number of features in groups != p ({a.size} != {p})")
    G = groups.n_groups
    if a.size:
        out = (a < 0) | (a >= G)
        if np.any(out):
            problems.append(
                f"group index out of range [0, {G}) at feature {int(np.flatnonzero(out)[0])}"
            )
        else:
            counts = np.bincount(a, minlength=G)
            empty = np.flatnonzero(counts == 0)
            if empty.size:
                problems.append("empty group(s): " + ", ".join(map(str, empty[:10])))
    elif G:
        problems.append("empty group(s): partition has no features")

    if problems:
        raise ProblemValidationError(problems)
    return data

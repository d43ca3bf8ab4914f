"""Plug-in estimators and exact calculators for the information-theoretic and
variance-based quantities used everywhere else in the package.

All entropies and mutual informations are in bits (log base 2).  Variance
decompositions use the population convention (ddof=0) throughout so that the
law of total variance closes exactly on finite samples:

    VarE[T|Z] + E Var(T|Z) = Var(T).

Estimators are pure plug-in (maximum likelihood) by default; the optional
Miller-Madow flag adds the usual (K-1)/(2N ln 2) bias correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .linalg import conditional_variance_matrix

LOG2 = math.log(2.0)

# Negative numerical artifacts larger than this magnitude are not clamped;
# they indicate a real inconsistency and raise instead.
CLAMP_TOL = 1e-9

# Cell-count ceiling for treating distinct representation rows as an exact
# discrete alphabet (classification) resp. exact group-by (regression).
MAX_DISCRETE_CELLS = 64
MAX_GROUPBY_CELLS = 1024


class InfoPlaneError(Exception):
    """Base class for errors raised by this package."""


class EmptyDistributionError(InfoPlaneError, ValueError):
    """A distribution or table with zero total mass was supplied."""


class DegenerateStatisticError(InfoPlaneError, ValueError):
    """A requested statistic is undefined for the supplied data."""


class EstimatorError(InfoPlaneError, ValueError):
    """Estimator preconditions (sample size, neighbor count, ...) violated."""


class ConsistencyError(InfoPlaneError, FloatingPointError):
    """A numerical result violates an internal invariant beyond tolerance."""


def bits_to_nats(bits: float) -> float:
    """Unit conversion only; every internal quantity stays in bits."""
    return bits * LOG2


def clamp_nonnegative(x: float, tol: float = CLAMP_TOL, what: str = "value") -> float:
    """Clamp tiny negative numerical artifacts to zero; reject larger ones."""
    if x >= 0.0:
        return float(x)
    if x > -tol:
        return 0.0
    raise ConsistencyError(f"{what} is negative beyond tolerance: {x!r}")


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability masses over a named finite alphabet."""

    probs: np.ndarray
    alphabet_labels: tuple

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "alphabet_labels", tuple(self.alphabet_labels))
        if probs.ndim != 1 or probs.size != len(self.alphabet_labels):
            raise ValueError("probs and alphabet_labels must have matching length")
        if np.any(probs < 0):
            raise ValueError("probability masses must be nonnegative")
        if abs(float(probs.sum()) - 1.0) > 1e-9:
            raise ValueError(f"masses must sum to 1, got {probs.sum()!r}")


@dataclass(frozen=True)
class ContingencyTable:
    """Empirical (or exact) joint over 2 or 3 named discrete axes.

    ``counts`` may hold integer counts or probability masses; only
    proportions matter to the estimators.  ``labels[i][j]`` is the symbol of
    index ``j`` on axis ``i``.
    """

    axes: tuple[str, ...]
    counts: np.ndarray
    labels: tuple[tuple, ...] = ()

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=float)
        axes = tuple(self.axes)
        if counts.ndim != len(axes):
            raise ValueError("one named axis per tensor dimension required")
        if len(axes) not in (1, 2, 3):
            raise ValueError("tables carry 1 to 3 axes")
        if len(set(axes)) != len(axes):
            raise ValueError("axis names must be unique")
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")
        labels = self.labels or tuple(tuple(range(n)) for n in counts.shape)
        labels = tuple(tuple(lab) for lab in labels)
        if tuple(len(lab) for lab in labels) != counts.shape:
            raise ValueError("labels must match the tensor shape")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "labels", labels)

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    def axis_index(self, name: str) -> int:
        try:
            return self.axes.index(name)
        except ValueError:
            raise ValueError(f"unknown axis {name!r}; table has {self.axes}") from None

    def marginal(self, *keep: str) -> "ContingencyTable":
        """Marginalize onto the named axes, in the requested order."""
        idx = [self.axis_index(name) for name in keep]
        drop = tuple(i for i in range(len(self.axes)) if i not in idx)
        reduced = self.counts.sum(axis=drop) if drop else self.counts
        # reduced axes appear in original order; permute to requested order
        remaining = [i for i in range(len(self.axes)) if i not in drop]
        perm = [remaining.index(i) for i in idx]
        return ContingencyTable(
            axes=tuple(keep),
            counts=np.transpose(reduced, perm),
            labels=tuple(self.labels[i] for i in idx),
        )

    @classmethod
    def from_observations(cls, columns: dict[str, np.ndarray]) -> "ContingencyTable":
        """Cross-tabulate aligned label arrays; absent symbols are collapsed."""
        names = tuple(columns)
        arrays = [np.asarray(columns[n]) for n in names]
        n = arrays[0].shape[0]
        if any(arr.shape != (n,) for arr in arrays):
            raise ValueError("all columns must be aligned 1-D arrays")
        labels, codes = [], []
        for arr in arrays:
            uniq, inv = np.unique(arr, return_inverse=True)
            labels.append(tuple(uniq.tolist()))
            codes.append(inv)
        shape = tuple(len(lab) for lab in labels)
        flat = np.ravel_multi_index(codes, shape)
        counts = np.bincount(flat, minlength=int(np.prod(shape))).reshape(shape)
        return cls(axes=names, counts=counts.astype(float), labels=tuple(labels))


@dataclass(frozen=True)
class RepresentationSample:
    """N aligned rows of (representation vector, target, attribute)."""

    z: np.ndarray
    y: np.ndarray
    a: np.ndarray
    kind: str  # "classification" | "regression"

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        if z.ndim == 1:
            z = z[:, None]
        y = np.asarray(self.y, dtype=float).ravel()
        a = np.asarray(self.a, dtype=float).ravel()
        if self.kind not in ("classification", "regression"):
            raise ValueError(f"unknown kind {self.kind!r}")
        n = z.shape[0]
        if n < 1 or y.shape[0] != n or a.shape[0] != n:
            raise ValueError("z, y, a must share N >= 1 rows")
        if self.kind == "classification":
            for name, v in (("y", y), ("a", a)):
                if not np.isin(v, (0.0, 1.0)).all():
                    raise ValueError(f"classification {name} must be binary 0/1")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return self.z.shape[0]

    @property
    def dim(self) -> int:
        return self.z.shape[1]


@dataclass(frozen=True)
class PlanePoint:
    """A representation's coordinates on the information plane.

    utility/leakage are bits for classification, variance units for
    regression; both are clamped at zero.
    """

    utility: float
    leakage: float
    kind: str

    def __post_init__(self):
        object.__setattr__(self, "utility", clamp_nonnegative(self.utility, what="utility"))
        object.__setattr__(self, "leakage", clamp_nonnegative(self.leakage, what="leakage"))
        if self.kind not in ("classification", "regression"):
            raise ValueError(f"unknown kind {self.kind!r}")


@dataclass(frozen=True)
class EstimatorConfig:
    """Knobs for the plug-in estimators.

    discretization_bins: equal-frequency bins per coordinate for continuous
        representations (default ceil(N^(1/3)), capped at 64 total cells).
    knn_k: neighbor count for the conditional-mean path (default ceil(sqrt(N))).
    miller_madow: apply the (K-1)/(2N ln 2) entropy bias correction.
    """

    discretization_bins: int | None = None
    knn_k: int | None = None
    miller_madow: bool = False


@dataclass(frozen=True)
class LinearGaussianPath:
    """Closed-form conditional-variance inputs for linear-Gaussian data:
    feature covariance, the representation's linear map, and the target /
    attribute coefficient vectors."""

    sigma: np.ndarray
    linear_map: np.ndarray
    coef_y: np.ndarray
    coef_a: np.ndarray


# ---------------------------------------------------------------------------
# Entropies and mutual information
# ---------------------------------------------------------------------------


def _entropy_from_counts(counts: np.ndarray, miller_madow: bool) -> float:
    total = float(counts.sum())
    if total <= 0.0:
        raise EmptyDistributionError("empty distribution")
    p = counts[counts > 0] / total
    h = float(-(p * np.log2(p)).sum())
    if miller_madow:
        h += (p.size - 1) / (2.0 * total * LOG2)
    return max(h, 0.0)


def entropy(table_or_dist, miller_madow: bool = False) -> float:
    """Shannon entropy in bits, with 0*log 0 = 0."""
    if isinstance(table_or_dist, DiscreteDistribution):
        return _entropy_from_counts(table_or_dist.probs, miller_madow)
    return _entropy_from_counts(np.asarray(table_or_dist.counts, dtype=float), miller_madow)


def mutual_information(
    table: ContingencyTable, axis_x: str, axis_y: str, miller_madow: bool = False
) -> float:
    """I(X;Y) = H(X) + H(Y) - H(X,Y) on the table's empirical joint, >= 0."""
    joint = table.marginal(axis_x, axis_y)
    hx = entropy(table.marginal(axis_x), miller_madow)
    hy = entropy(table.marginal(axis_y), miller_madow)
    hxy = entropy(joint, miller_madow)
    value = hx + hy - hxy
    if miller_madow:
        # the bias correction may legitimately push small MI below zero
        return max(value, 0.0)
    return clamp_nonnegative(value, what="mutual information")


def conditional_entropy(
    table: ContingencyTable, target_axis: str, given_axis: str, miller_madow: bool = False
) -> float:
    """H(T|G) = H(T,G) - H(G), >= 0."""
    htg = entropy(table.marginal(target_axis, given_axis), miller_madow)
    hg = entropy(table.marginal(given_axis), miller_madow)
    return clamp_nonnegative(htg - hg, what="conditional entropy")


def delta_conditional(
    table: ContingencyTable, target_axis: str | None = None, given_axis: str | None = None
) -> float:
    """Absolute difference of group base rates,
    |Pr(T=1 | G=0) - Pr(T=1 | G=1)|, for binary T and G.

    Zero iff the table factorizes; one iff T equals G or 1-G empirically.
    """
    target_axis = target_axis or table.axes[0]
    given_axis = given_axis or table.axes[1 if table.axes[0] == target_axis else 0]
    joint = table.marginal(target_axis, given_axis)
    t_labels, g_labels = joint.labels
    if not set(t_labels) <= {0, 1} or not set(g_labels) <= {0, 1}:
        raise DegenerateStatisticError("both axes must be binary with 0/1 symbols")
    if len(g_labels) < 2:
        raise DegenerateStatisticError("undefined conditional: a group is absent")
    g_mass = joint.counts.sum(axis=0)
    if np.any(g_mass <= 0):
        raise DegenerateStatisticError("undefined conditional: a group has zero mass")
    if 1 in t_labels:
        t1 = joint.counts[t_labels.index(1)]
    else:
        t1 = np.zeros_like(g_mass)
    p1 = t1 / g_mass
    return float(abs(p1[g_labels.index(0)] - p1[g_labels.index(1)]))


# ---------------------------------------------------------------------------
# Representation discretization
# ---------------------------------------------------------------------------


def _equal_frequency_codes(x: np.ndarray, bins: int) -> np.ndarray:
    """Equal-frequency bin codes; duplicate quantile edges collapse."""
    if bins < 1:
        raise EstimatorError("bins must be >= 1")
    edges = np.unique(np.quantile(x, np.linspace(0.0, 1.0, bins + 1)[1:-1]))
    return np.searchsorted(edges, x, side="right")


def discretize_rows(z: np.ndarray, bins: int | None = None) -> np.ndarray:
    """Assign each representation row a discrete cell code.

    Rows drawn from an alphabet of at most 64 distinct values are used
    verbatim.  Otherwise each coordinate gets B = ceil(N^(1/3)) equal-
    frequency bins (caller override via ``bins``); when B^d would exceed 64
    cells, the rows are first projected onto their two leading principal
    coordinates and those are quantized instead.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    n, d = z.shape
    _, inverse = np.unique(z, axis=0, return_inverse=True)
    if inverse.max() + 1 <= MAX_DISCRETE_CELLS and bins is None:
        return inverse.ravel()
    b = int(bins) if bins is not None else math.ceil(n ** (1.0 / 3.0))
    b = max(b, 1)
    if d == 1:
        return _equal_frequency_codes(z[:, 0], min(b, MAX_DISCRETE_CELLS))
    if b**d > MAX_DISCRETE_CELLS:
        centered = z - z.mean(axis=0)
        _, _, vt = np.linalg.svd(centered, full_matrices=False)
        comps = vt[:2]
        # sign-normalize so identical inputs always bin identically
        flips = np.where(comps[np.arange(comps.shape[0]), np.abs(comps).argmax(axis=1)] < 0, -1.0, 1.0)
        proj = centered @ (comps * flips[:, None]).T
        b = min(b, int(math.isqrt(MAX_DISCRETE_CELLS)))
        cols = [_equal_frequency_codes(proj[:, j], b) for j in range(proj.shape[1])]
    else:
        cols = [_equal_frequency_codes(z[:, j], b) for j in range(d)]
    code = cols[0]
    for extra in cols[1:]:
        code = code * (extra.max() + 1) + extra
    _, code = np.unique(code, return_inverse=True)
    return code.ravel()


# ---------------------------------------------------------------------------
# Conditional mean variance
# ---------------------------------------------------------------------------


def _groupby_var_e(codes: np.ndarray, t: np.ndarray) -> float:
    counts = np.bincount(codes)
    sums = np.bincount(codes, weights=t)
    mask = counts > 0
    means = sums[mask] / counts[mask]
    w = counts[mask] / codes.size
    # center on the weighted mean of group means so a single group is exactly 0
    overall = float((w * means).sum())
    return float((w * (means - overall) ** 2).sum())


def _knn_conditional_means(z: np.ndarray, t: np.ndarray, k: int) -> np.ndarray:
    """Mean of t over each row's k nearest rows, ordered by (distance, row
    index).

    All rows sharing a representation value see the same neighbor ordering,
    so the work is done once per distinct value.  Duplicate groups of size at
    least k resolve to their k lowest-index rows directly; smaller groups
    accumulate whole nearest groups plus, at the cut distance, the
    lowest-index rows of the tied groups.
    """
    uniq, inverse, counts = np.unique(z, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.ravel()
    n, n_uniq = z.shape[0], uniq.shape[0]
    # rows of each group in ascending index order, with per-group prefix sums
    order = np.argsort(inverse, kind="stable")
    starts = np.zeros(n_uniq + 1, dtype=np.int64)
    np.cumsum(counts, out=starts[1:])
    prefix = np.concatenate([[0.0], np.cumsum(t[order])])
    group_sum = np.bincount(inverse, weights=t, minlength=n_uniq)

    def lowest_rows_sum(g: int, r: int) -> float:
        base = starts[g]
        return float(prefix[base + r] - prefix[base])

    group_mean = np.empty(n_uniq)
    big = counts >= k
    for g in np.flatnonzero(big):
        group_mean[g] = lowest_rows_sum(g, k) / k
    small = np.flatnonzero(~big)
    if small.size:
        tree = cKDTree(uniq)
        kq = min(k + 1, n_uniq)
        chunk = max(1, int(4e6 // max(kq, 1)))
        for lo in range(0, small.size, chunk):
            sel = small[lo : lo + chunk]
            dist, idx = tree.query(uniq[sel], k=kq, workers=-1)
            dist = np.atleast_2d(dist)
            idx = np.atleast_2d(idx)
            cum_counts = np.cumsum(counts[idx], axis=1)
            cum_sums = np.cumsum(group_sum[idx], axis=1)
            # first candidate position at which k rows are accumulated
            pos = (cum_counts < k).sum(axis=1)
            for row, g in enumerate(sel):
                p = int(pos[row])
                cut = dist[row, p]
                # the cut-distance tier may have started before the crossing
                # candidate and membership within it goes by lowest row index
                p0 = p
                while p0 > 0 and dist[row, p0 - 1] == cut:
                    p0 -= 1
                have = int(cum_counts[row, p0 - 1]) if p0 > 0 else 0
                full_sum = float(cum_sums[row, p0 - 1]) if p0 > 0 else 0.0
                need = k - have
                q = p0
                tied = []
                while q < kq and dist[row, q] == cut:
                    tied.append(int(idx[row, q]))
                    q += 1
                if q == kq and kq < n_uniq and dist[row, kq - 1] == cut:
                    # the cut-distance tier may extend beyond the query horizon
                    ball = np.asarray(
                        tree.query_ball_point(uniq[g], cut * (1 + 1e-12) if cut > 0 else 0.0),
                        dtype=np.int64,
                    )
                    d_ball = np.linalg.norm(uniq[ball] - uniq[g], axis=1)
                    cut = _row_distance(uniq, g, int(idx[row, p]))
                    closer = ball[d_ball < cut]
                    tied = ball[d_ball == cut].tolist()
                    have = int(counts[closer].sum())
                    full_sum = float(group_sum[closer].sum())
                    need = k - have
                if len(tied) == 1 and counts[tied[0]] >= need:
                    full_sum += lowest_rows_sum(tied[0], need)
                else:
                    rows = np.sort(np.concatenate([order[starts[b] : starts[b + 1]] for b in tied]))
                    full_sum += float(t[rows[:need]].sum())
                group_mean[g] = full_sum / k
    return group_mean[inverse]


def _row_distance(uniq: np.ndarray, g: int, b: int) -> float:
    return float(np.linalg.norm(uniq[g] - uniq[b]))


def conditional_mean_variance(
    sample: RepresentationSample,
    target: str = "y",
    config: EstimatorConfig | None = None,
    linear_gaussian: LinearGaussianPath | None = None,
) -> float:
    """Estimate Var E[target | Z] in variance units.

    Three paths: exact group-by when the rows take at most 1024 distinct
    values, k-nearest-neighbor conditional means otherwise, or the closed
    linear-Gaussian form when ``linear_gaussian`` supplies model coefficients.
    """
    config = config or EstimatorConfig()
    if target not in ("y", "a"):
        raise ValueError("target must be 'y' or 'a'")
    if linear_gaussian is not None:
        coef = linear_gaussian.coef_y if target == "y" else linear_gaussian.coef_a
        coef = np.asarray(coef, dtype=float)
        v = conditional_variance_matrix(linear_gaussian.sigma, linear_gaussian.linear_map)
        return clamp_nonnegative(float(coef @ v @ coef), what="conditional mean variance")
    t = sample.y if target == "y" else sample.a
    n = sample.n
    if n < 2:
        raise EstimatorError("at least 2 rows required")
    _, codes = np.unique(sample.z, axis=0, return_inverse=True)
    codes = codes.ravel()
    if codes.max() + 1 <= MAX_GROUPBY_CELLS:
        return _groupby_var_e(codes, t)
    k = config.knn_k if config.knn_k is not None else math.ceil(math.sqrt(n))
    if k >= n:
        raise EstimatorError(f"knn_k={k} must be < N={n}")
    if k < 1:
        raise EstimatorError("knn_k must be >= 1")
    means = _knn_conditional_means(sample.z, t, k)
    return clamp_nonnegative(float(means.var()), what="conditional mean variance")


def plane_point(sample: RepresentationSample, config: EstimatorConfig | None = None) -> PlanePoint:
    """Place a representation sample on the information plane."""
    config = config or EstimatorConfig()
    if sample.kind == "classification":
        codes = discretize_rows(sample.z, config.discretization_bins)
        t_y = ContingencyTable.from_observations({"z": codes, "y": sample.y})
        t_a = ContingencyTable.from_observations({"z": codes, "a": sample.a})
        mm = config.miller_madow
        return PlanePoint(
            utility=mutual_information(t_y, "y", "z", miller_madow=mm),
            leakage=mutual_information(t_a, "a", "z", miller_madow=mm),
            kind="classification",
        )
    return PlanePoint(
        utility=conditional_mean_variance(sample, "y", config),
        leakage=conditional_mean_variance(sample, "a", config),
        kind="regression",
    )

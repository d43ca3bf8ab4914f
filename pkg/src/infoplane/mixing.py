"""Randomized interpolation between two representations.

A uniform draw S compared against the weight u selects which encoding each
row keeps; the selector is stored as an explicit final coordinate of the
mixed representation.  With the selector revealed, both plane coordinates of
the mixture are exactly the u-weighted averages of the component coordinates
(mutual informations via the chain rule, conditional-mean variances via the
law of total variance).  Dropping the selector breaks that linearity, which
is why it is never dropped.

Two backends: a seeded sample-level mixer, and an exact analytic mixer over
discrete populations for population-level statements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .metrics import (
    ContingencyTable,
    EstimatorConfig,
    PlanePoint,
    RepresentationSample,
    mutual_information,
    plane_point,
)


@dataclass(frozen=True)
class MixedRepresentation:
    """A mixture sample; ``base.z``'s last column is the selector (1 = first
    component's encoding kept)."""

    base: RepresentationSample
    selector: np.ndarray
    weight_u: float

    def __post_init__(self):
        sel = np.asarray(self.selector, dtype=float).ravel()
        if sel.shape[0] != self.base.n:
            raise ValueError("selector must align with the sample rows")
        if not np.isin(sel, (0.0, 1.0)).all():
            raise ValueError("selector must be binary")
        if not np.array_equal(self.base.z[:, -1], sel):
            raise ValueError("last z column must store the selector")
        if not 0.0 <= self.weight_u <= 1.0:
            raise ValueError("weight_u must lie in [0, 1]")
        object.__setattr__(self, "selector", sel)

    def selector_mean_consistent(self) -> bool:
        """Three-sigma binomial check of the selector frequency against u."""
        u, n = self.weight_u, self.base.n
        slack = 3.0 * math.sqrt(u * (1.0 - u) / n)
        return abs(float(self.selector.mean()) - u) <= slack


def mix(
    rep0: RepresentationSample, rep1: RepresentationSample, u: float, seed: int = 0
) -> MixedRepresentation:
    """Row-wise random selection between two encodings of the same data."""
    if not 0.0 <= u <= 1.0:
        raise ValueError("u must lie in [0, 1]")
    if rep0.n != rep1.n or rep0.kind != rep1.kind:
        raise ValueError("representations must share N and kind")
    if not (np.array_equal(rep0.y, rep1.y) and np.array_equal(rep0.a, rep1.a)):
        raise ValueError("representations must encode the same (y, a) rows")
    n = rep0.n
    if u == 0.0:
        pick0 = np.zeros(n, dtype=bool)
    elif u == 1.0:
        pick0 = np.ones(n, dtype=bool)
    else:
        pick0 = np.random.default_rng(seed).random(n) <= u
    width = max(rep0.dim, rep1.dim)
    z = np.zeros((n, width + 1))
    z[pick0, : rep0.dim] = rep0.z[pick0]
    z[~pick0, : rep1.dim] = rep1.z[~pick0]
    z[:, -1] = pick0.astype(float)
    base = RepresentationSample(z=z, y=rep0.y, a=rep0.a, kind=rep0.kind)
    return MixedRepresentation(base=base, selector=pick0.astype(float), weight_u=u)


def mix_curve(
    rep0: RepresentationSample,
    rep1: RepresentationSample,
    num_points: int,
    seed: int = 0,
    config: EstimatorConfig | None = None,
) -> list[tuple[float, PlanePoint]]:
    """Plane points of the mixture at u = 0, 1/(k-1), ..., 1."""
    if num_points < 2:
        raise ValueError("num_points must be >= 2")
    child_seeds = np.random.SeedSequence(seed).generate_state(num_points)
    out = []
    for i, u in enumerate(np.linspace(0.0, 1.0, num_points)):
        mixed = mix(rep0, rep1, float(u), seed=int(child_seeds[i]))
        out.append((float(u), plane_point(mixed.base, config)))
    return out


# ---------------------------------------------------------------------------
# Exact analytic backend
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscretePopulation:
    """A finite population of atoms (prob, z-code, y, a) for exact
    population-level computations."""

    probs: np.ndarray
    z: np.ndarray
    y: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float).ravel()
        z = np.asarray(self.z).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        a = np.asarray(self.a, dtype=float).ravel()
        if not (probs.shape == z.shape == y.shape == a.shape):
            raise ValueError("probs, z, y, a must be aligned")
        if np.any(probs < 0) or abs(float(probs.sum()) - 1.0) > 1e-9:
            raise ValueError("probs must be a distribution")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "a", a)

    def var_e(self, target: str = "y") -> float:
        """Exact Var E[target | Z] by weighted group means."""
        t = self.y if target == "y" else self.a
        _, codes = np.unique(self.z, return_inverse=True)
        mass = np.bincount(codes, weights=self.probs)
        sums = np.bincount(codes, weights=self.probs * t)
        keep = mass > 0
        means = sums[keep] / mass[keep]
        overall = float((self.probs * t).sum())
        return float((mass[keep] * (means - overall) ** 2).sum())

    def table(self, *, with_attribute: bool = True) -> ContingencyTable:
        """Probability-mass contingency table over (z, y[, a])."""
        cols = {"z": self.z, "y": self.y}
        if with_attribute:
            cols["a"] = self.a
        labels, codes = [], []
        for arr in cols.values():
            uniq, inv = np.unique(arr, return_inverse=True)
            labels.append(tuple(uniq.tolist()))
            codes.append(inv)
        shape = tuple(len(lab) for lab in labels)
        flat = np.ravel_multi_index(codes, shape)
        counts = np.bincount(flat, weights=self.probs, minlength=int(np.prod(shape))).reshape(shape)
        return ContingencyTable(axes=tuple(cols), counts=counts, labels=tuple(labels))

    def information_point(self) -> tuple[float, float]:
        """Exact (I(Y;Z), I(A;Z)) in bits."""
        t = self.table()
        return (
            mutual_information(t, "y", "z"),
            mutual_information(t, "a", "z"),
        )


def mix_population_encodings(
    probs: np.ndarray,
    y: np.ndarray,
    a: np.ndarray,
    z0: np.ndarray,
    z1: np.ndarray,
    u: float,
    *,
    keep_selector: bool = True,
) -> DiscretePopulation:
    """Exact population of the selector mixture of two encodings of one base
    population.

    With ``keep_selector`` the mixed code is the pair (selector, component
    code), which makes both information and variance coordinates exactly
    u-linear.  Without it the codes are pooled unchanged (both encodings must
    then share a code space); linearity is no longer guaranteed.
    """
    if not 0.0 <= u <= 1.0:
        raise ValueError("u must lie in [0, 1]")
    probs = np.asarray(probs, dtype=float).ravel()
    z0 = np.asarray(z0).ravel()
    z1 = np.asarray(z1).ravel()
    if keep_selector:
        _, c0 = np.unique(z0, return_inverse=True)
        _, c1 = np.unique(z1, return_inverse=True)
        tagged0 = 2 * c0 + 1
        tagged1 = 2 * c1
        return DiscretePopulation(
            probs=np.concatenate([u * probs, (1.0 - u) * probs]),
            z=np.concatenate([tagged0, tagged1]),
            y=np.concatenate([y, y]),
            a=np.concatenate([a, a]),
        )
    return DiscretePopulation(
        probs=np.concatenate([u * probs, (1.0 - u) * probs]),
        z=np.concatenate([z0, z1]),
        y=np.concatenate([y, y]),
        a=np.concatenate([a, a]),
    )


def mix_contingency_tables(
    t0: ContingencyTable, t1: ContingencyTable, u: float, z_axis: str = "z"
) -> ContingencyTable:
    """Exact mixture of two discrete joints sharing all non-representation
    axes: the mixed representation alphabet is the tagged disjoint union."""
    if not 0.0 <= u <= 1.0:
        raise ValueError("u must lie in [0, 1]")
    if t0.axes != t1.axes:
        raise ValueError("tables must share axis names and order")
    zi = t0.axis_index(z_axis)
    others = tuple(ax for ax in t0.axes if ax != z_axis)
    if t0.marginal(*others).labels != t1.marginal(*others).labels:
        raise ValueError("non-representation alphabets must agree")
    m0 = t0.marginal(*others).counts / t0.total
    m1 = t1.marginal(*others).counts / t1.total
    if np.max(np.abs(m0 - m1)) > 1e-12:
        raise ValueError("tables must share the same base joint over non-representation axes")
    p0 = np.moveaxis(t0.counts / t0.total, zi, 0)
    p1 = np.moveaxis(t1.counts / t1.total, zi, 0)
    mixed = np.concatenate([u * p0, (1.0 - u) * p1], axis=0)
    labels_z = tuple((1, lab) for lab in t0.labels[zi]) + tuple((0, lab) for lab in t1.labels[zi])
    labels = list(t0.labels)
    labels[zi] = labels_z
    return ContingencyTable(
        axes=t0.axes,
        counts=np.moveaxis(mixed, 0, zi),
        labels=tuple(labels),
    )

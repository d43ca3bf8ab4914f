"""Closed-form feasible-region geometry, loss bounds, and suboptimality
certification for binary classification under cross-entropy loss.

The plane summary consists of H(Y), H(A), the two base-rate gaps and I(A;Y),
all in bits.  From these the two extreme points follow in closed form:

    E_Y* = H(Y) - gap(Y|A) * H(A)   (max utility at zero leakage)
    E_A* = I(A;Y)                   (min leakage at full utility)

where gap(T|G) = |Pr(T=1|G=0) - Pr(T=1|G=1)|.  The known feasible region is
the convex polygon spanned by these vertices and the bounding rectangle's
corners; the chord between E_Y* and E_A* is an inner bound on the Pareto
frontier, never a claim of optimality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .metrics import (
    ContingencyTable,
    DegenerateStatisticError,
    PlanePoint,
    RepresentationSample,
    clamp_nonnegative,
    conditional_entropy,
    delta_conditional,
    entropy,
    mutual_information,
)

# Coincident polygon vertices are merged below this separation (bits).
VERTEX_MERGE_TOL = 1e-9


@dataclass(frozen=True)
class ClassificationPlane:
    """Sufficient statistics of the (Y, A) joint for the feasibility geometry."""

    h_y: float
    h_a: float
    delta_y_given_a: float
    delta_a_given_y: float
    i_ay: float

    def __post_init__(self):
        if self.h_y < 0 or self.h_a < 0:
            raise ValueError("entropies must be nonnegative")
        for name in ("delta_y_given_a", "delta_a_given_y"):
            v = getattr(self, name)
            if not -1e-12 <= v <= 1 + 1e-12:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
        if self.i_ay < -1e-12 or self.i_ay > min(self.h_y, self.h_a) + 1e-9:
            raise ValueError("I(A;Y) must lie in [0, min(H(Y), H(A))]")

    @classmethod
    def from_table(cls, table_ya: ContingencyTable, y_axis: str = "y", a_axis: str = "a") -> "ClassificationPlane":
        """Plug-in plane statistics from an empirical (Y, A) table."""
        return cls(
            h_y=entropy(table_ya.marginal(y_axis)),
            h_a=entropy(table_ya.marginal(a_axis)),
            delta_y_given_a=delta_conditional(table_ya, y_axis, a_axis),
            delta_a_given_y=delta_conditional(table_ya, a_axis, y_axis),
            i_ay=mutual_information(table_ya, y_axis, a_axis),
        )

    @classmethod
    def from_probabilities(cls, p_a0: float, p_y1_given_a0: float, p_y1_given_a1: float) -> "ClassificationPlane":
        """Exact plane statistics from Pr(A=0) and the two group base rates."""
        return cls.from_table(joint_from_probabilities(p_a0, p_y1_given_a0, p_y1_given_a1))


def joint_from_probabilities(p_a0: float, p_y1_given_a0: float, p_y1_given_a1: float) -> ContingencyTable:
    """Exact binary (Y, A) joint as a probability-mass table."""
    for name, p in (("p_a0", p_a0), ("p_y1_given_a0", p_y1_given_a0), ("p_y1_given_a1", p_y1_given_a1)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} must be a probability, got {p!r}")
    cells = np.array(
        [
            [p_a0 * (1 - p_y1_given_a0), (1 - p_a0) * (1 - p_y1_given_a1)],  # y = 0
            [p_a0 * p_y1_given_a0, (1 - p_a0) * p_y1_given_a1],  # y = 1
        ]
    )
    return ContingencyTable(axes=("y", "a"), counts=cells, labels=((0, 1), (0, 1)))


def vertex_ey(plane: ClassificationPlane) -> float:
    """Maximal utility achievable at zero leakage, in bits."""
    return max(plane.h_y - plane.delta_y_given_a * plane.h_a, 0.0)


def vertex_ea(plane: ClassificationPlane) -> float:
    """Minimal leakage achievable at full utility, in bits."""
    return plane.i_ay


@dataclass(frozen=True)
class FeasiblePolygonCE:
    """Known-feasible convex polygon, vertices counter-clockwise."""

    vertices: tuple[tuple[float, float], ...]
    frontier_segment: tuple[tuple[float, float], tuple[float, float]]

    def __post_init__(self):
        pts = np.asarray(self.vertices, dtype=float)
        if len(pts) >= 3:
            rolled = np.roll(pts, -1, axis=0)
            edges = rolled - pts
            cross = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - edges[:, 1] * np.roll(edges, -1, axis=0)[:, 0]
            if np.any(cross < -1e-9):
                raise ValueError("polygon is not convex in counter-clockwise order")

    def contains(self, point: tuple[float, float], tol: float = 1e-9) -> bool:
        pts = np.asarray(self.vertices, dtype=float)
        p = np.asarray(point, dtype=float)
        if len(pts) == 1:
            return bool(np.linalg.norm(pts[0] - p) <= tol)
        if len(pts) == 2:
            d = pts[1] - pts[0]
            t = float(np.dot(p - pts[0], d) / max(np.dot(d, d), 1e-300))
            t = min(max(t, 0.0), 1.0)
            return bool(np.linalg.norm(pts[0] + t * d - p) <= tol)
        rolled = np.roll(pts, -1, axis=0)
        edges = rolled - pts
        rel = p[None, :] - pts
        cross = edges[:, 0] * rel[:, 1] - edges[:, 1] * rel[:, 0]
        return bool(np.all(cross >= -tol))


def inner_polygon(plane: ClassificationPlane) -> FeasiblePolygonCE:
    """Convex polygon of known-feasible (utility, leakage) pairs."""
    ey = vertex_ey(plane)
    ea = vertex_ea(plane)
    left = max(plane.h_a - plane.delta_a_given_y * plane.h_y, 0.0)
    raw = [
        (0.0, 0.0),
        (ey, 0.0),
        (plane.h_y, ea),
        (plane.h_y, plane.h_a),
        (ea, plane.h_a),
        (0.0, left),
    ]
    merged: list[tuple[float, float]] = []
    for p in raw:
        if not merged or math.dist(merged[-1], p) > VERTEX_MERGE_TOL:
            merged.append(p)
    while len(merged) > 1 and math.dist(merged[0], merged[-1]) <= VERTEX_MERGE_TOL:
        merged.pop()
    return FeasiblePolygonCE(
        vertices=tuple(merged),
        frontier_segment=((ey, 0.0), (plane.h_y, ea)),
    )


@dataclass(frozen=True)
class PointAssessment:
    status: str  # interior-suboptimal | frontier-or-beyond | outside-known-bounds
    statistic: float
    frontier_distance: float


def suboptimality_statistic(plane: ClassificationPlane, utility: float, leakage: float) -> float:
    """Ratio statistic whose exceeding 1 places a point strictly inside the
    feasible region: leakage share plus residual-uncertainty share."""
    denom_leak = plane.i_ay
    denom_util = plane.delta_y_given_a * plane.h_a
    if denom_leak <= 0.0 or denom_util <= 0.0:
        raise DegenerateStatisticError(
            "no tradeoff: frontier reaches ideal corner, ratio statistic undefined"
        )
    h_y_given_z = max(plane.h_y - utility, 0.0)
    return leakage / denom_leak + h_y_given_z / denom_util


def _segment_distance(p: np.ndarray, q0: np.ndarray, q1: np.ndarray) -> float:
    d = q1 - q0
    denom = float(np.dot(d, d))
    if denom <= 1e-300:
        return float(np.linalg.norm(p - q0))
    t = min(max(float(np.dot(p - q0, d) / denom), 0.0), 1.0)
    return float(np.linalg.norm(q0 + t * d - p))


def classify_point(plane: ClassificationPlane, p: PlanePoint) -> PointAssessment:
    """Locate a classification plane point relative to the known bounds.

    Raises for a degenerate plane (no tradeoff), except at the ideal corner
    itself, which is then on the frontier by construction.
    """
    if p.kind != "classification":
        raise ValueError("expected a classification plane point")
    ey = vertex_ey(plane)
    ea = vertex_ea(plane)
    q0 = np.array([ey, 0.0])
    q1 = np.array([plane.h_y, ea])
    pt = np.array([p.utility, p.leakage])
    degenerate = plane.i_ay <= 0.0 or plane.delta_y_given_a * plane.h_a <= 0.0
    if degenerate and np.linalg.norm(pt - np.array([plane.h_y, 0.0])) <= 1e-9:
        return PointAssessment(status="frontier-or-beyond", statistic=math.nan, frontier_distance=0.0)
    statistic = suboptimality_statistic(plane, p.utility, p.leakage)
    # signed side of the chord: nonnegative means on or past it (lower right)
    d = q1 - q0
    side = float((pt - q0) @ np.array([d[1], -d[0]]))
    if p.utility > plane.h_y + 1e-9 or p.leakage > plane.h_a + 1e-9:
        status = "outside-known-bounds"
    elif side > 1e-9 * max(float(np.linalg.norm(d)), 1.0):
        # strictly below the chord by more than tolerance
        status = "outside-known-bounds"
    elif statistic > 1.0:
        status = "interior-suboptimal"
    else:
        status = "frontier-or-beyond"
    distance = 0.0 if side >= 0.0 else _segment_distance(pt, q0, q1)
    return PointAssessment(status=status, statistic=statistic, frontier_distance=distance)


def cost_bounds(plane: ClassificationPlane) -> dict[str, float]:
    """Loss floor of any zero-leakage representation and residual-attribute
    entropy ceiling of any full-utility representation."""
    return {
        "invariance_cost_lower": plane.delta_y_given_a * plane.h_a,
        "privacy_leak_upper": clamp_nonnegative(plane.h_a - plane.i_ay, what="H(A|Y)"),
    }


def dg_error_floor(plane: ClassificationPlane) -> float:
    """Weighted-error floor for domain-invariant predictors when the
    attribute indexes binary source domains."""
    return plane.delta_y_given_a * plane.h_a


@dataclass(frozen=True)
class Certificate:
    """Finite-sample suboptimality verdict for a representation."""

    statistic: float
    threshold: float
    epsilon: float
    verdict: str  # "suboptimal" | "not-certified"
    n: int
    confidence_note: str
    bootstrap_stderr: float | None = None

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        want = "suboptimal" if (math.isfinite(self.statistic) and self.statistic > self.threshold) else "not-certified"
        if self.verdict != want:
            raise ValueError("verdict inconsistent with statistic and threshold")

    def to_dict(self) -> dict:
        return {
            "statistic": None if not math.isfinite(self.statistic) else self.statistic,
            "threshold": self.threshold,
            "epsilon": self.epsilon,
            "verdict": self.verdict,
            "n": self.n,
            "confidence_note": self.confidence_note,
            "bootstrap_stderr": self.bootstrap_stderr,
        }


def _plugin_statistic(
    table_az: ContingencyTable, table_ay: ContingencyTable, table_yz: ContingencyTable
) -> float:
    i_az = mutual_information(table_az, "a", "z")
    i_ay = mutual_information(table_ay, "a", "y")
    h_a = entropy(table_ay.marginal("a"))
    delta = delta_conditional(table_ay, "y", "a")
    h_y_given_z = conditional_entropy(table_yz, "y", "z")
    if i_ay <= 0.0 or delta * h_a <= 0.0:
        raise DegenerateStatisticError("denominator degenerate at this sample")
    return i_az / i_ay + h_y_given_z / (delta * h_a)


def _bootstrap_table(table: ContingencyTable, rng: np.random.Generator) -> ContingencyTable:
    n = int(round(table.total))
    p = (table.counts / table.total).ravel()
    counts = rng.multinomial(n, p).reshape(table.counts.shape)
    return ContingencyTable(axes=table.axes, counts=counts.astype(float), labels=table.labels)


def certify(
    sample_tables: dict[str, ContingencyTable],
    epsilon: float,
    n_bootstrap: int = 1000,
    seed: int = 0,
) -> Certificate:
    """Plug-in suboptimality certificate from empirical tables.

    The verdict compares the ratio statistic against 1 + epsilon; the note
    reports (n, epsilon) together with a nonparametric bootstrap standard
    error of the statistic, since no sharper finite-sample constant is
    available.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    t_az = sample_tables["table_az"]
    t_ay = sample_tables["table_ay"]
    t_yz = sample_tables["table_yz"]
    totals = {t_az.total, t_ay.total, t_yz.total}
    if max(totals) - min(totals) > 1e-6 * max(totals):
        raise ValueError("tables must share the same total count")
    n = int(round(t_ay.total))
    threshold = 1.0 + epsilon
    try:
        statistic = _plugin_statistic(t_az, t_ay, t_yz)
    except DegenerateStatisticError as exc:
        return Certificate(
            statistic=math.nan,
            threshold=threshold,
            epsilon=epsilon,
            verdict="not-certified",
            n=n,
            confidence_note=f"not certified: {exc}",
        )
    stderr = None
    integral = abs(t_ay.total - round(t_ay.total)) < 1e-9
    if n_bootstrap > 0 and integral and n >= 1:
        rng = np.random.default_rng(seed)
        draws = []
        for _ in range(n_bootstrap):
            try:
                draws.append(
                    _plugin_statistic(
                        _bootstrap_table(t_az, rng),
                        _bootstrap_table(t_ay, rng),
                        _bootstrap_table(t_yz, rng),
                    )
                )
            except DegenerateStatisticError:
                continue
        if len(draws) >= 2:
            stderr = float(np.std(draws, ddof=1))
    verdict = "suboptimal" if statistic > threshold else "not-certified"
    note = (
        f"plug-in statistic {statistic:.6f} vs threshold 1+eps={threshold:.6f} at n={n}; "
        f"bootstrap stderr {'unavailable' if stderr is None else format(stderr, '.6f')} "
        f"({n_bootstrap} resamples); verdict uses the statistic>threshold rule only"
    )
    return Certificate(
        statistic=statistic,
        threshold=threshold,
        epsilon=epsilon,
        verdict=verdict,
        n=n,
        confidence_note=note,
        bootstrap_stderr=stderr,
    )


# ---------------------------------------------------------------------------
# Zero-leakage attainment construction
# ---------------------------------------------------------------------------


def uniform_threshold_sample(
    alpha: float, beta: float, p_a: float, n: int, seed: int = 0
) -> RepresentationSample:
    """Sample the zero-leakage construction: Z uniform on (0,1) independent of
    A (Pr(A=0)=p_a), and Y = 1 iff (Z <= alpha and A=0) or (Z <= beta and A=1).

    Its population plane point is (H(Y) - gap*H(A), 0).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    for name, p in (("alpha", alpha), ("beta", beta)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1]")
    if not 0.0 < p_a < 1.0:
        raise ValueError("p_a must lie strictly inside (0, 1)")
    rng = np.random.default_rng(seed)
    z = rng.random(n)
    a = (rng.random(n) >= p_a).astype(float)  # Pr(A=0) = p_a
    y = (((z <= alpha) & (a == 0.0)) | ((z <= beta) & (a == 1.0))).astype(float)
    return RepresentationSample(z=z[:, None], y=y, a=a, kind="classification")


def uniform_threshold_joint(alpha: float, beta: float, p_a: float) -> ContingencyTable:
    """Exact induced joint of the construction over (z-segment, y, a).

    Cutting Z at the two thresholds yields segments on which (Y, A) is
    constant in law, so the segment id is a sufficient discretization: the
    table reproduces I(A;Z)=0 and I(Y;Z)=H(Y)-gap*H(A) exactly.
    """
    lo, hi = min(alpha, beta), max(alpha, beta)
    spans = [(0.0, lo), (lo, hi), (hi, 1.0)]
    p_a_vec = {0: p_a, 1: 1.0 - p_a}
    rows = []
    seg_labels = []
    for i, (s0, s1) in enumerate(spans):
        width = s1 - s0
        if width <= 0:
            continue
        cell = np.zeros((2, 2))  # (y, a)
        for a_val in (0, 1):
            thresh = alpha if a_val == 0 else beta
            y_val = 1 if s1 <= thresh else 0  # segment lies below this group's threshold
            cell[y_val, a_val] = width * p_a_vec[a_val]
        rows.append(cell)
        seg_labels.append(i)
    counts = np.stack(rows, axis=0)
    return ContingencyTable(
        axes=("z", "y", "a"),
        counts=counts,
        labels=(tuple(seg_labels), (0, 1), (0, 1)),
    )


def uniform_threshold_expected_point(alpha: float, beta: float, p_a: float) -> PlanePoint:
    """Population plane point of the construction, in closed form."""
    plane = ClassificationPlane.from_probabilities(p_a, alpha, beta)
    return PlanePoint(utility=vertex_ey(plane), leakage=0.0, kind="classification")

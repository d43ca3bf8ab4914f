"""Feasible region, exact Pareto frontier, Lagrangian bound, and point
assessment for regression under squared loss.

All quantities derive from three second moments: Var(Y), Var(A) and
Cov(Y, A), through the squared correlation rho2.  With utility
u = Var E[Y|Z] and leakage l = Var E[A|Z], the closed forms are

    E_Y* = Var(Y) (1 - rho2)            max utility at zero leakage
    E_A* = Var(A) rho2                  min leakage at full utility
    F(alpha) = Var(Y) (2|rho| sqrt((1-rho2) alpha (1-alpha))
               + 1 - alpha - rho2 + 2 alpha rho2),   alpha = l / Var(A)

with F concave and nondecreasing on [0, rho2], F(0) = E_Y* and
F(rho2) = Var(Y).  The same formulas serve the noisy setting where the
moments are those of the conditional means given the raw input; the flag is
carried for reporting only and never changes a number.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .metrics import PlanePoint

#: inputs within this distance beyond [0, rho2] are clamped, not rejected
ALPHA_CLAMP_TOL = 1e-12

#: resolution of the distance-to-frontier grid search
DISTANCE_GRID = 10_000


@dataclass(frozen=True)
class RegressionPlane:
    """Second-moment statistics defining the regression feasible region."""

    var_y: float
    var_a: float
    cov_ya: float
    noisy: bool = False

    def __post_init__(self):
        if self.var_y < 0 or self.var_a < 0:
            raise ValueError("variances must be nonnegative")
        bound = self.var_y * self.var_a
        if self.cov_ya**2 > bound * (1 + 1e-9) + 1e-15:
            raise ValueError(
                f"Cauchy-Schwarz violated: cov^2={self.cov_ya**2!r} > var_y*var_a={bound!r}"
            )

    @property
    def rho_sq(self) -> float:
        """Squared correlation; defined as 0 when either variance vanishes."""
        denom = self.var_y * self.var_a
        if denom <= 0.0:
            return 0.0
        return min(self.cov_ya**2 / denom, 1.0)

    @classmethod
    def from_sample(cls, y: np.ndarray, a: np.ndarray, noisy: bool = False) -> "RegressionPlane":
        """Population-convention (ddof=0) moments of aligned samples."""
        y = np.asarray(y, dtype=float).ravel()
        a = np.asarray(a, dtype=float).ravel()
        if y.shape != a.shape or y.size < 2:
            raise ValueError("y and a must be aligned with at least 2 rows")
        cov = float(np.mean((y - y.mean()) * (a - a.mean())))
        return cls(var_y=float(y.var()), var_a=float(a.var()), cov_ya=cov, noisy=noisy)


def vertex_ey_ls(plane: RegressionPlane) -> float:
    """Maximal target variance explained at zero attribute leakage."""
    return plane.var_y * (1.0 - plane.rho_sq)


def vertex_ea_ls(plane: RegressionPlane) -> float:
    """Minimal attribute leakage at full explained target variance."""
    return plane.var_a * plane.rho_sq


def cost_bounds_ls(plane: RegressionPlane) -> dict[str, float]:
    """MSE floor for invariant representations and attribute-MSE ceiling for
    fully sufficient ones."""
    return {
        "mse_floor_under_invariance": plane.var_y * plane.rho_sq,
        "attribute_mse_ceiling_under_sufficiency": plane.var_a * (1.0 - plane.rho_sq),
    }


def _frontier_values(plane: RegressionPlane, alphas: np.ndarray) -> np.ndarray:
    """Vectorized frontier with exact endpoint collapses."""
    rho2 = plane.rho_sq
    rho = math.sqrt(rho2)
    a = np.asarray(alphas, dtype=float)
    mid = plane.var_y * (
        2.0 * rho * np.sqrt(np.clip((1.0 - rho2) * a * (1.0 - a), 0.0, None))
        + 1.0
        - a
        - rho2
        + 2.0 * a * rho2
    )
    return np.where(a <= 0.0, plane.var_y * (1.0 - rho2), np.where(a >= rho2, plane.var_y, mid))


def frontier(plane: RegressionPlane, alpha: float) -> float:
    """Maximal utility at normalized leakage alpha = leakage / Var(A).

    alpha beyond rho2 is the no-tradeoff regime and returns Var(Y) (with a
    warning when the excess is more than clamping slack); alpha below
    -1e-12 is rejected.
    """
    if alpha < -ALPHA_CLAMP_TOL:
        raise ValueError(f"alpha must be >= 0, got {alpha!r}")
    rho2 = plane.rho_sq
    if alpha > rho2 + ALPHA_CLAMP_TOL:
        warnings.warn(
            f"alpha={alpha!r} exceeds rho^2={rho2!r}: no tradeoff, returning Var(Y)",
            RuntimeWarning,
            stacklevel=2,
        )
        return plane.var_y
    alpha = min(max(alpha, 0.0), rho2)
    return float(_frontier_values(plane, np.asarray([alpha]))[0])


@dataclass(frozen=True)
class FrontierCurve:
    """Sampled view of the frontier for serialization and plotting."""

    plane: RegressionPlane

    @property
    def alpha_max(self) -> float:
        return self.plane.rho_sq

    def sample(self, k: int) -> list[dict[str, float]]:
        if k < 2:
            raise ValueError("at least 2 sample points required")
        alphas = np.linspace(0.0, self.alpha_max, k)
        utils = _frontier_values(self.plane, alphas)
        return [
            {"alpha": float(al), "utility": float(u), "leakage": float(al * self.plane.var_a)}
            for al, u in zip(alphas, utils)
        ]


# ---------------------------------------------------------------------------
# Lagrangian bound and rank-2 spectrum
# ---------------------------------------------------------------------------


def eigenvalues_r(var_y: float, var_a: float, cov: float, lam: float) -> tuple[float, float]:
    """Extreme eigenvalues of the rank-2 matrix lam*a'a'^T - y'y'^T expressed
    through second moments; the middle spectrum is identically zero.

        sigma = ( lam*Var(A) - Var(Y)
                  +- sqrt((lam*Var(A) + Var(Y))^2 - 4*lam*Cov^2) ) / 2

    The smaller root is computed from the product identity
    sigma_1 * sigma_d = lam*(Cov^2 - Var(A)*Var(Y)) when the direct
    difference would cancel, so both roots carry full relative precision.
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    h = lam * var_a - var_y
    disc = (lam * var_a + var_y) ** 2 - 4.0 * lam * cov**2
    s = math.sqrt(max(disc, 0.0))
    prod = lam * (cov**2 - var_a * var_y)  # == sigma_1 * sigma_d
    if h >= 0.0:
        sigma_1 = 0.5 * (h + s)
        sigma_d = prod / sigma_1 if sigma_1 > 0.0 else 0.5 * (h - s)
    else:
        sigma_d = 0.5 * (h - s)
        sigma_1 = prod / sigma_d if sigma_d < 0.0 else 0.5 * (h + s)
    return sigma_1, sigma_d


def lagrangian_bound(plane: RegressionPlane, lam: float) -> float:
    """Lower bound on min_Z lam * leakage - utility; always <= 0."""
    _, sigma_d = eigenvalues_r(plane.var_y, plane.var_a, plane.cov_ya, lam)
    return min(sigma_d, 0.0)


def _psi(lam: np.ndarray, a: float, b: float, c: float, t: float) -> np.ndarray:
    """lam*c - sqrt(a^2 + lam^2 b^2 + 2 lam t a b), evaluated stably.

    For c > 0 the difference of two large terms is rewritten as a quotient so
    large lam does not lose precision.
    """
    lam = np.asarray(lam, dtype=float)
    inner = np.clip(a**2 + lam**2 * b**2 + 2.0 * lam * t * a * b, 0.0, None)
    root = np.sqrt(inner)
    if c > 0.0:
        num = -(a**2) + lam**2 * (c**2 - b**2) - 2.0 * lam * t * a * b
        denom = lam * c + root
        return np.where(denom > 0.0, num / np.where(denom > 0.0, denom, 1.0), lam * c - root)
    return lam * c - root


@dataclass(frozen=True)
class DualFrontierSolution:
    """Frontier value recovered from the Lagrangian dual."""

    value: float  # -sup over the lambda grid (the numerical oracle)
    closed_form: float  # case-split supremum evaluated analytically
    lambda_star: float | None  # interior stationary point, when one exists
    lambda_at_max: float  # grid point attaining the supremum


def frontier_from_dual(plane: RegressionPlane, c: float, grid: int = 2048) -> DualFrontierSolution:
    """Maximal utility at leakage budget c, via -sup_lam {OPT(lam) - lam*c}.

    Serves as an independent check of :func:`frontier`: the supremum is taken
    over a geometric lambda grid augmented with the closed-form stationary
    point, and the analytic case-split value is reported alongside.
    """
    if c < 0:
        raise ValueError("c must be >= 0")
    vy, va = plane.var_y, plane.var_a
    rho2 = plane.rho_sq
    # psi parameterization: a=Var(Y), b=Var(A), c'=Var(A)-2c, t=1-2*rho2
    a, b = vy, va
    cp = va - 2.0 * c
    t = 1.0 - 2.0 * rho2
    if b <= 0.0 or c >= rho2 * va:
        # no-tradeoff regime: the supremum sits at lam = 0 with value -Var(Y)
        closed = vy
    else:
        closed = 0.5 * vy - 0.5 * (-(a / b) * (math.sqrt(max((1 - t**2) * (b**2 - cp**2), 0.0)) + cp * t))
    lam_star = None
    if b > 0.0 and b**2 - cp**2 > 0.0:
        lam_star = -(a * t) / b + (a * cp / b) * math.sqrt((1 - t**2) / (b**2 - cp**2))
        if not (math.isfinite(lam_star) and lam_star > 0.0):
            lam_star = None
    lams = np.concatenate(
        [
            [0.0],
            np.geomspace(1e-6, 1e6, grid),
            [] if lam_star is None else [lam_star],
        ]
    )
    # OPT(lam) - lam*c  ==  (psi(lam; vy, va, va-2c, t) - vy) / 2
    values = 0.5 * (_psi(lams, a, b, cp, t) - vy)
    best = int(np.argmax(values))
    return DualFrontierSolution(
        value=float(-values[best]),
        closed_form=float(closed),
        lambda_star=lam_star,
        lambda_at_max=float(lams[best]),
    )


# ---------------------------------------------------------------------------
# Point assessment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegressionAssessment:
    status: str  # interior-suboptimal | frontier-or-beyond | outside-known-bounds
    frontier_distance: float
    alpha_of_point: float


def classify_point_ls(plane: RegressionPlane, p: PlanePoint) -> RegressionAssessment:
    """Locate a regression plane point against the exact frontier.

    A point is interior-suboptimal when some frontier point weakly dominates
    it (at least as much utility at no more leakage) with a strict utility
    gap; the distance is the Euclidean gap to the frontier curve, zero on or
    past it.
    """
    if p.kind != "regression":
        raise ValueError("expected a regression plane point")
    rho2 = plane.rho_sq
    alpha_p = p.leakage / plane.var_a if plane.var_a > 0 else 0.0
    if p.leakage > plane.var_a + 1e-9 or p.utility > plane.var_y + 1e-9:
        return RegressionAssessment(
            status="outside-known-bounds", frontier_distance=0.0, alpha_of_point=alpha_p
        )
    alpha_eff = min(alpha_p, rho2)
    frontier_utility = frontier(plane, alpha_eff)
    dominated = frontier_utility >= p.utility and alpha_eff * plane.var_a <= p.leakage + 1e-12
    if p.utility < frontier_utility - 1e-12 and dominated:
        alphas = np.linspace(0.0, rho2, DISTANCE_GRID)
        utils = _frontier_values(plane, alphas)
        gaps = np.hypot(utils - p.utility, alphas * plane.var_a - p.leakage)
        return RegressionAssessment(
            status="interior-suboptimal",
            frontier_distance=float(gaps.min()),
            alpha_of_point=alpha_p,
        )
    return RegressionAssessment(
        status="frontier-or-beyond", frontier_distance=0.0, alpha_of_point=alpha_p
    )


def certify_ls(plane: RegressionPlane, utility: float, leakage: float, epsilon: float, n: int):
    """Chord-rule suboptimality certificate for regression.

    The statistic leakage/E_A* + (Var(Y) - utility)/(Var(Y) - E_Y*) equals 1
    exactly on the segment between the two extreme points and exceeds 1
    strictly above it; since the true frontier is concave above that chord,
    statistic > 1 + epsilon is a sound (conservative) suboptimality
    certificate.  The exact rule is this artifact's instantiation.
    """
    from .classification import Certificate  # shared certificate record

    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    threshold = 1.0 + epsilon
    ea = vertex_ea_ls(plane)
    utility_gap_scale = plane.var_y * plane.rho_sq  # Var(Y) - E_Y*
    if ea <= 0.0 or utility_gap_scale <= 0.0:
        return Certificate(
            statistic=math.nan,
            threshold=threshold,
            epsilon=epsilon,
            verdict="not-certified",
            n=n,
            confidence_note="not certified: denominator degenerate at this sample",
        )
    statistic = leakage / ea + (plane.var_y - utility) / utility_gap_scale
    verdict = "suboptimal" if statistic > threshold else "not-certified"
    note = (
        f"chord-rule statistic {statistic:.6f} vs threshold 1+eps={threshold:.6f} at n={n}; "
        "conservative inner-bound rule (no bootstrap on this path)"
    )
    return Certificate(
        statistic=statistic,
        threshold=threshold,
        epsilon=epsilon,
        verdict=verdict,
        n=n,
        confidence_note=note,
    )

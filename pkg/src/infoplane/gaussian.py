"""Constructive achievability engine for the regression bounds.

In the linear-Gaussian setting (features phi(X) ~ N(mean, Sigma) with
Y = <y, phi(X)> and A = <a, phi(X)>), the conditional-mean variance of any
linear representation Z = L phi(X) has the closed form

    Var E[phi(X) | Z] = Sigma L^T (L Sigma L^T)^+ L Sigma,

which equals Sigma^(1/2) P Sigma^(1/2) for the orthogonal projection P onto
the rowspace of L Sigma^(1/2).  Every extreme point of the feasible region is
realized by choosing P in whitened coordinates:

    drop the whitened attribute direction      -> zero leakage, max utility
    keep only the whitened target direction    -> full utility, min leakage
    keep the most negative eigenvector of
    R = lam a'a'^T - y'y'^T                    -> Lagrangian optimum

Arbitrary PSD targets 0 <= M <= Sigma (diagonal in Sigma's eigenbasis) are
realized exactly by randomizing over nested multi-direction maps: writing
nu_i = m_i / sigma_i and sorting descending, the mixture that plays the
top-k map with weight nu_(k) - nu_(k+1) (and a constant map with weight
1 - nu_(1)) reproduces M by the law of total variance.  The mixture selector
is an explicit extra coordinate of Z; dropping it would break the
total-variance bookkeeping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import conditional_variance_matrix, psd_eigh, psd_pinv, psd_sqrt, symmetrize
from .metrics import PlanePoint
from .regression import RegressionPlane

#: spectral slack allowed when validating 0 <= M <= Sigma
PSD_CHECK_TOL = 1e-9


@dataclass(frozen=True)
class GaussianModel:
    """Finite-dimensional feature covariance plus coefficient vectors."""

    dim: int
    mean: np.ndarray
    sigma: np.ndarray
    a: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        mean = np.asarray(self.mean, dtype=float).ravel()
        sigma = np.asarray(self.sigma, dtype=float)
        a = np.asarray(self.a, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if mean.shape != (self.dim,) or a.shape != (self.dim,) or y.shape != (self.dim,):
            raise ValueError("mean, a, y must be length-dim vectors")
        if sigma.shape != (self.dim, self.dim):
            raise ValueError("sigma must be dim x dim")
        if np.max(np.abs(sigma - sigma.T)) > 1e-10 * max(1.0, float(np.max(np.abs(sigma)))):
            raise ValueError("sigma must be symmetric within 1e-10")
        psd_eigh(sigma)  # rejects eigenvalues below -1e-10
        if not np.any(a):
            raise ValueError("a must be nonzero")
        if not np.any(y):
            raise ValueError("y must be nonzero")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "sigma", symmetrize(sigma))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "y", y)

    def plane(self) -> RegressionPlane:
        """Second moments of (Y, A) induced by the model."""
        return RegressionPlane(
            var_y=float(self.y @ self.sigma @ self.y),
            var_a=float(self.a @ self.sigma @ self.a),
            cov_ya=float(self.a @ self.sigma @ self.y),
        )

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "mean": self.mean.tolist(),
            "sigma": self.sigma.tolist(),
            "a": self.a.tolist(),
            "y": self.y.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GaussianModel":
        return cls(
            dim=int(d["dim"]),
            mean=np.asarray(d.get("mean", np.zeros(int(d["dim"]))), dtype=float),
            sigma=np.asarray(d["sigma"], dtype=float),
            a=np.asarray(d["a"], dtype=float),
            y=np.asarray(d["y"], dtype=float),
        )


@dataclass(frozen=True)
class PsdTarget:
    """A PSD matrix to be realized as a conditional-mean variance."""

    m: np.ndarray

    def __post_init__(self):
        m = symmetrize(np.asarray(self.m, dtype=float))
        psd_eigh(m, clip_tol=PSD_CHECK_TOL)
        object.__setattr__(self, "m", m)


@dataclass(frozen=True)
class Component:
    linear_map: np.ndarray
    weight: float


@dataclass(frozen=True)
class ConstructedRepresentation:
    """A (possibly randomized) linear representation: one linear map per
    mixture component, played with the stated probability."""

    components: tuple[Component, ...]
    kind: str  # "deterministic" | "randomized-mixture"

    def __post_init__(self):
        if not self.components:
            raise ValueError("at least one component required")
        w = np.array([c.weight for c in self.components], dtype=float)
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
        if self.kind not in ("deterministic", "randomized-mixture"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "deterministic" and len(self.components) != 1:
            raise ValueError("deterministic representations have a single component")

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.components], dtype=float)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "components": [
                {"linear_map": c.linear_map.tolist(), "weight": c.weight} for c in self.components
            ],
        }


@dataclass(frozen=True)
class WhitenedModel:
    a_prime: np.ndarray
    y_prime: np.ndarray
    sigma_half: np.ndarray
    sigma_half_inv: np.ndarray


def whiten(model: GaussianModel) -> WhitenedModel:
    """Whitened coefficient vectors and the PSD square root of sigma (with its
    pseudo-inverse on the range, so singular covariances are handled)."""
    half, half_inv = psd_sqrt(model.sigma)
    return WhitenedModel(
        a_prime=half @ model.a,
        y_prime=half @ model.y,
        sigma_half=half,
        sigma_half_inv=half_inv,
    )


def _deterministic_from_projection(model: GaussianModel, projection: np.ndarray) -> ConstructedRepresentation:
    """Representation realizing Var E[phi|Z] = Sigma^(1/2) P Sigma^(1/2)."""
    w = whiten(model)
    return ConstructedRepresentation(
        components=(Component(linear_map=projection @ w.sigma_half_inv, weight=1.0),),
        kind="deterministic",
    )


def _range_projection(model: GaussianModel) -> np.ndarray:
    vals, vecs = psd_eigh(model.sigma)
    cutoff = 1e-12 * max(float(vals[0]), 0.0) if vals.size else 0.0
    keep = vals > cutoff
    return vecs[:, keep] @ vecs[:, keep].T


def construct_invariant_optimal(model: GaussianModel) -> ConstructedRepresentation:
    """Zero-leakage representation attaining utility Var(Y)(1 - rho^2):
    project out the whitened attribute direction."""
    w = whiten(model)
    norm = float(np.linalg.norm(w.a_prime))
    if norm <= 1e-12:
        raise ValueError("A carries no variance; constraint vacuous")
    a0 = w.a_prime / norm
    projection = _range_projection(model) - np.outer(a0, a0)
    return _deterministic_from_projection(model, projection)


def construct_sufficiency_optimal(model: GaussianModel) -> ConstructedRepresentation:
    """Full-utility representation attaining leakage Var(A) rho^2: keep only
    the whitened target direction."""
    w = whiten(model)
    norm = float(np.linalg.norm(w.y_prime))
    if norm <= 1e-12:
        raise ValueError("Y carries no variance; constraint vacuous")
    y0 = w.y_prime / norm
    return _deterministic_from_projection(model, np.outer(y0, y0))


def construct_lagrangian_optimal(model: GaussianModel, lam: float) -> ConstructedRepresentation:
    """Representation minimizing lam * leakage - utility: keep the eigenvector
    of R = lam a'a'^T - y'y'^T with the most negative eigenvalue."""
    if lam < 0:
        raise ValueError("lam must be >= 0")
    w = whiten(model)
    r = lam * np.outer(w.a_prime, w.a_prime) - np.outer(w.y_prime, w.y_prime)
    vals, vecs = np.linalg.eigh(symmetrize(r))
    u_d = vecs[:, 0]  # most negative eigenvalue
    return _deterministic_from_projection(model, np.outer(u_d, u_d))


def rank1_linear_map(model: GaussianModel, j: int) -> np.ndarray:
    """Linear map (sigma_j u_j u_j^T) Sigma^(-1/2) realizing the j-th spectral
    rank-1 target exactly."""
    vals, vecs = psd_eigh(model.sigma)
    if not 0 <= j < model.dim:
        raise ValueError(f"eigen-index {j} out of range for dim {model.dim}")
    if vals[j] <= 1e-12 * max(float(vals[0]), 1e-300):
        raise ValueError("target outside range of Sigma")
    _, half_inv = psd_sqrt(model.sigma)
    m_j = vals[j] * np.outer(vecs[:, j], vecs[:, j])
    return m_j @ half_inv


def realize_psd_target(model: GaussianModel, target: PsdTarget) -> ConstructedRepresentation:
    """Randomized mixture whose conditional-mean variance equals the target.

    The target must be sandwiched 0 <= M <= Sigma and diagonal in Sigma's
    eigenbasis (always expressible this way when Sigma is a multiple of the
    identity, in which case M's own eigenbasis is used).
    """
    m = target.m
    if m.shape != model.sigma.shape:
        raise ValueError("target must match the model dimension")
    sig_vals, sig_vecs = psd_eigh(model.sigma)
    psd_eigh(model.sigma - m, clip_tol=PSD_CHECK_TOL)  # rejects M exceeding Sigma
    scale = max(float(sig_vals[0]), 1e-300)
    if np.allclose(model.sigma, sig_vals[0] * np.eye(model.dim), atol=1e-12 * scale):
        # isotropic covariance: any symmetric M is simultaneously diagonalizable
        m_vals, basis = psd_eigh(m)
        diag_m = m_vals
        diag_sigma = np.full(model.dim, sig_vals[0])
    else:
        basis = sig_vecs
        in_basis = basis.T @ m @ basis
        off = in_basis - np.diag(np.diag(in_basis))
        if np.max(np.abs(off)) > 1e-8 * scale:
            raise ValueError(
                "target is not diagonal in the covariance eigenbasis; "
                "pass it in those coordinates"
            )
        diag_m = np.clip(np.diag(in_basis), 0.0, None)
        diag_sigma = sig_vals
    cutoff = 1e-12 * scale
    fractions = np.zeros(model.dim)
    for i in range(model.dim):
        if diag_sigma[i] > cutoff:
            fractions[i] = min(diag_m[i] / diag_sigma[i], 1.0)
        elif diag_m[i] > PSD_CHECK_TOL * scale:
            raise ValueError("target loads on the null space of Sigma")
    _, half_inv = psd_sqrt(model.sigma)
    order = np.argsort(-fractions, kind="stable")
    nu = fractions[order]
    components: list[Component] = []
    for k in range(model.dim):
        weight = nu[k] - (nu[k + 1] if k + 1 < model.dim else 0.0)
        if weight <= 0.0:
            continue
        idx = order[: k + 1]
        m_subset = (basis[:, idx] * diag_sigma[idx]) @ basis[:, idx].T
        components.append(Component(linear_map=m_subset @ half_inv, weight=float(weight)))
    null_weight = 1.0 - (nu[0] if model.dim else 0.0)
    if null_weight > 0.0 or not components:
        components.append(
            Component(linear_map=np.zeros((model.dim, model.dim)), weight=float(max(null_weight, 0.0)))
        )
    kind = "deterministic" if len(components) == 1 else "randomized-mixture"
    return ConstructedRepresentation(components=tuple(components), kind=kind)


def mixture_fraction_weights(model: GaussianModel, target: PsdTarget) -> np.ndarray:
    """Normalized per-direction mixing fractions m_i / (s * sigma_i) with
    s = sum_i m_i / sigma_i; they always sum to one when the target is
    nontrivial."""
    sig_vals, sig_vecs = psd_eigh(model.sigma)
    diag_m = np.clip(np.diag(sig_vecs.T @ target.m @ sig_vecs), 0.0, None)
    cutoff = 1e-12 * max(float(sig_vals[0]), 1e-300)
    with np.errstate(divide="ignore", invalid="ignore"):
        fr = np.where(sig_vals > cutoff, diag_m / np.where(sig_vals > cutoff, sig_vals, 1.0), 0.0)
    s = fr.sum()
    if s <= 0.0:
        raise ValueError("trivial target: all fractions vanish")
    return fr / s


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def conditional_variance_of(model: GaussianModel, rep: ConstructedRepresentation) -> np.ndarray:
    """Mixture conditional-mean variance: the weight-average of the
    per-component closed forms (selector revealed)."""
    v = np.zeros_like(model.sigma)
    for comp in rep.components:
        if comp.weight == 0.0:
            continue
        v += comp.weight * conditional_variance_matrix(model.sigma, comp.linear_map)
    return symmetrize(v)


def closed_form_plane_point(model: GaussianModel, rep: ConstructedRepresentation) -> PlanePoint:
    """Exact plane coordinates of a constructed representation."""
    v = conditional_variance_of(model, rep)
    return PlanePoint(
        utility=float(model.y @ v @ model.y),
        leakage=float(model.a @ v @ model.a),
        kind="regression",
    )


@dataclass(frozen=True)
class AchievabilityReport:
    closed_form: PlanePoint
    monte_carlo: PlanePoint
    mc_stderr: tuple[float, float]
    bound_target: PlanePoint
    verdict: str  # "attained" | "gap"
    n: int
    seed: int

    def __post_init__(self):
        attained = (
            abs(self.closed_form.utility - self.bound_target.utility) <= 1e-8
            and abs(self.closed_form.leakage - self.bound_target.leakage) <= 1e-8
        )
        want = "attained" if attained else "gap"
        if self.verdict != want:
            raise ValueError("verdict inconsistent with closed form vs bound target")

    def to_dict(self) -> dict:
        return {
            "closed_form": {"utility": self.closed_form.utility, "leakage": self.closed_form.leakage},
            "monte_carlo": {"utility": self.monte_carlo.utility, "leakage": self.monte_carlo.leakage},
            "mc_stderr": {"utility": self.mc_stderr[0], "leakage": self.mc_stderr[1]},
            "bound_target": {"utility": self.bound_target.utility, "leakage": self.bound_target.leakage},
            "verdict": self.verdict,
            "n": self.n,
            "seed": self.seed,
        }


def _component_estimate(
    model: GaussianModel, comp: Component, phi: np.ndarray, coef: np.ndarray
) -> tuple[float, float]:
    """Sample variance (and its Gaussian stderr) of <coef, E[phi|Z]> within
    one mixture component; the conditioning is exact, only S-frequencies and
    the draw of phi are stochastic."""
    sigma, mean = model.sigma, model.mean
    L = np.atleast_2d(comp.linear_map)
    cross = sigma @ L.T
    gram = symmetrize(L @ cross)
    n_i = phi.shape[0]
    if not gram.size or np.allclose(gram, 0.0):
        return 0.0, 0.0
    gain = cross @ psd_pinv(gram)  # d x dz
    z = (phi - mean) @ L.T
    cond_means = mean + z @ gain.T
    vals = cond_means @ coef
    var = float(vals.var(ddof=1)) if n_i >= 2 else 0.0
    stderr = var * math.sqrt(2.0 / (n_i - 1)) if n_i >= 2 else 0.0
    return var, stderr


def monte_carlo_verify(
    model: GaussianModel,
    rep: ConstructedRepresentation,
    n: int,
    seed: int = 0,
    bound_target: PlanePoint | None = None,
) -> AchievabilityReport:
    """Sampled check that a construction attains its bound.

    Draws phi(X), assigns each row a mixture component via the explicit
    selector, conditions exactly within each component, and pools the
    per-component conditional-mean variances by empirical selector frequency.
    """
    if n < 1000:
        raise ValueError("n must be >= 1000")
    rng = np.random.default_rng(seed)
    half, _ = psd_sqrt(model.sigma)
    phi = model.mean + rng.standard_normal((n, model.dim)) @ half
    weights = rep.weights
    cum = np.cumsum(weights)
    comp_idx = np.searchsorted(cum, rng.random(n), side="right")
    comp_idx = np.clip(comp_idx, 0, len(weights) - 1)
    est = np.zeros(2)
    var_within = {"y": [], "a": []}
    w_hat = []
    stderr_sq = np.zeros(2)
    for i, comp in enumerate(rep.components):
        rows = comp_idx == i
        n_i = int(rows.sum())
        if n_i == 0:
            w_hat.append(0.0)
            var_within["y"].append(0.0)
            var_within["a"].append(0.0)
            continue
        frac = n_i / n
        w_hat.append(frac)
        for j, coef in enumerate((model.y, model.a)):
            var, se = _component_estimate(model, comp, phi[rows], coef)
            est[j] += frac * var
            stderr_sq[j] += (frac * se) ** 2
            var_within["y" if j == 0 else "a"].append(var)
    # selector-frequency contribution to the variance of the pooled estimate
    w_hat_arr = np.array(w_hat)
    for j, key in enumerate(("y", "a")):
        v = np.array(var_within[key])
        if len(v) > 1:
            mean_v = float((w_hat_arr * v).sum())
            stderr_sq[j] += max(float((w_hat_arr * v**2).sum()) - mean_v**2, 0.0) / n
    closed = closed_form_plane_point(model, rep)
    target = bound_target if bound_target is not None else closed
    mc = PlanePoint(utility=float(est[0]), leakage=float(est[1]), kind="regression")
    attained = (
        abs(closed.utility - target.utility) <= 1e-8 and abs(closed.leakage - target.leakage) <= 1e-8
    )
    return AchievabilityReport(
        closed_form=closed,
        monte_carlo=mc,
        mc_stderr=(float(math.sqrt(stderr_sq[0])), float(math.sqrt(stderr_sq[1]))),
        bound_target=target,
        verdict="attained" if attained else "gap",
        n=n,
        seed=seed,
    )

"""Closed-form information and synergy measures for standardized Gaussian systems.

A system here is one scalar target X and m latent predictors Z_{1:m}, all
standardized to zero mean and unit variance, so it is fully described by the
target correlations rho_j = <Z_j X> and the latent correlation matrix
Sigma_{jk} = <Z_j Z_k>.  All information quantities are returned in nats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Eigenvalues of correlation matrices may dip this far below zero and the
# matrix is still accepted as positive semidefinite.
PSD_TOL = 1e-10

# Correlations are clamped to +-(1 - RHO_CLAMP) before any rho/(1-rho^2)
# division so posterior weights stay bounded.
RHO_CLAMP = 1e-4

# Smallest latent-covariance eigenvalue we are willing to invert.
_SINGULAR_EIG = 1e-12


class ConditioningError(ValueError):
    """Latent correlation matrix is singular beyond tolerance."""


class DegeneracyError(ValueError):
    """The maximal-|rho| predictor is not unique, so the synergy-minimizing
    covariance is not unique either."""


def _as_rho_vector(rho) -> np.ndarray:
    r = np.atleast_1d(np.asarray(rho, dtype=float))
    if r.ndim != 1 or r.size == 0:
        raise ValueError("rho must be a non-empty 1-D vector of correlations")
    if not np.all(np.isfinite(r)):
        raise ValueError("rho contains non-finite entries")
    if np.any(np.abs(r) >= 1.0):
        raise ValueError("correlations must satisfy |rho_j| < 1")
    return r


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] on the real line."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo <= self.hi):
            raise ValueError(f"empty interval: lo={self.lo} > hi={self.hi}")

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class GaussianSystem:
    """Standardized Gaussian system: target correlations and latent covariance.

    Parameters
    ----------
    rho : (m,) array
        Correlations <Z_j X>, each strictly inside (-1, 1).
    sigma_z : (m, m) array
        Latent correlation matrix: symmetric, unit diagonal, positive
        semidefinite.  The full joint matrix [[sigma_z, rho], [rho^T, 1]]
        must also be positive semidefinite, otherwise no joint Gaussian
        with these marginal statistics exists.
    """

    rho: np.ndarray
    sigma_z: np.ndarray

    def __post_init__(self):
        r = _as_rho_vector(self.rho)
        s = np.asarray(self.sigma_z, dtype=float)
        if s.shape != (r.size, r.size):
            raise ValueError(f"sigma_z shape {s.shape} does not match m={r.size}")
        if not np.all(np.isfinite(s)):
            raise ValueError("sigma_z contains non-finite entries")
        if not np.allclose(s, s.T, atol=1e-12, rtol=0.0):
            raise ValueError("sigma_z must be symmetric")
        if not np.allclose(np.diag(s), 1.0, atol=1e-12, rtol=0.0):
            raise ValueError("sigma_z must have a unit diagonal")
        object.__setattr__(self, "rho", r)
        object.__setattr__(self, "sigma_z", s)
        if np.linalg.eigvalsh(s).min() < -PSD_TOL:
            raise ValueError("sigma_z is not positive semidefinite")
        if np.linalg.eigvalsh(self.joint()).min() < -PSD_TOL:
            raise ValueError(
                "joint covariance [[sigma_z, rho], [rho^T, 1]] is not positive "
                "semidefinite: the requested correlations are not realizable"
            )

    @property
    def m(self) -> int:
        return self.rho.size

    def joint(self) -> np.ndarray:
        """The (m+1) x (m+1) correlation matrix of (Z_1, ..., Z_m, X)."""
        m = self.rho.size
        j = np.empty((m + 1, m + 1))
        j[:m, :m] = self.sigma_z
        j[:m, m] = self.rho
        j[m, :m] = self.rho
        j[m, m] = 1.0
        return j

    @classmethod
    def pair(cls, rho1: float, rho2: float, sigma12: float) -> "GaussianSystem":
        """Two-predictor system with latent correlation sigma12."""
        return cls(np.array([rho1, rho2]),
                   np.array([[1.0, sigma12], [sigma12, 1.0]]))


@dataclass(frozen=True)
class CiPosterior:
    """Gaussian posterior of X given z under a conditionally independent
    encoding: mean = weights . z, fixed variance."""

    weights: np.ndarray
    variance: float

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if not np.all(np.isfinite(w)):
            raise ValueError("posterior weights must be finite")
        object.__setattr__(self, "weights", w)
        if not (0.0 < self.variance <= 1.0):
            raise ValueError("posterior variance must lie in (0, 1]")

    def mean(self, z) -> np.ndarray:
        return np.asarray(z, dtype=float) @ self.weights


def feasible_sigma12_range(rho1: float, rho2: float) -> Interval:
    """Range of latent correlations Sigma_12 that keep (Z_1, Z_2, X) realizable.

    For fixed target correlations rho1, rho2 the 3x3 joint correlation matrix
    is positive semidefinite exactly when Sigma_12 lies in

        rho1*rho2 +- sqrt((1 - rho1^2) (1 - rho2^2)).

    At the endpoints the joint matrix is singular.
    """
    for name, v in (("rho1", rho1), ("rho2", rho2)):
        if not np.isfinite(v) or abs(v) >= 1.0:
            raise ValueError(f"{name}={v} outside the open interval (-1, 1)")
    half_width = np.sqrt((1.0 - rho1 ** 2) * (1.0 - rho2 ** 2))
    center = rho1 * rho2
    return Interval(center - half_width, center + half_width)


def _explained_variance(sys: GaussianSystem) -> float:
    """rho^T Sigma_z^{-1} rho, the R^2 of the joint linear readout of X."""
    eigs = np.linalg.eigvalsh(sys.sigma_z)
    if eigs.min() < _SINGULAR_EIG:
        raise ConditioningError(
            f"sigma_z is singular (smallest eigenvalue {eigs.min():.3e}); "
            "mutual information is not defined by the closed form"
        )
    return float(sys.rho @ np.linalg.solve(sys.sigma_z, sys.rho))


def gaussian_mutual_information(sys: GaussianSystem) -> float:
    """I(Z_{1:m}; X) = -1/2 ln(1 - rho^T Sigma_z^{-1} rho), in nats.

    Returns +inf when the joint matrix is singular (X is a deterministic
    function of the latents).
    """
    q = _explained_variance(sys)
    residual = 1.0 - q
    if residual <= 0.0:
        return np.inf
    return max(0.0, -0.5 * np.log(residual))


def _single_predictor_information(rho: np.ndarray) -> np.ndarray:
    return -0.5 * np.log1p(-rho ** 2)


def wms_synergy(sys: GaussianSystem) -> float:
    """Whole-minus-sum synergy: I(Z_{1:m};X) - sum_j I(Z_j;X).

    Negative values indicate redundancy among the predictors.
    """
    return gaussian_mutual_information(sys) - float(
        _single_predictor_information(sys.rho).sum())


def gk_union_information(rho) -> float:
    """Union information of Gaussian predictors, in nats.

    Minimizing joint information subject to fixed pairwise (Z_j, X) marginals
    leaves exactly the information of the single most correlated predictor:
    U = -1/2 ln(1 - rho_k^2) with k = argmax_j |rho_j| (ties broken toward
    the lowest index).
    """
    r = _as_rho_vector(rho)
    k = int(np.argmax(np.abs(r)))
    return float(_single_predictor_information(r[k : k + 1])[0])


def gk_synergy(sys: GaussianSystem) -> float:
    """Joint information minus union information, clamped at zero.

    Equals 1/2 ln((1 - rho_k^2) / (1 - rho^T Sigma_z^{-1} rho)) and is
    computed as gaussian_mutual_information(sys) - gk_union_information(rho)
    so the two readings share one floating-point path.
    """
    s = gaussian_mutual_information(sys) - gk_union_information(sys.rho)
    return max(0.0, s)


def gk_minimizing_covariance(rho) -> GaussianSystem:
    """Latent covariance that drives the union-information gap to zero.

    The returned matrix has a unit diagonal and rho_j/rho_k in row/column k,
    where k indexes the unique largest |rho_j|.  Off that row the entries are
    zero whenever zeros keep the matrix positive semidefinite; otherwise the
    remaining block is completed as (rho_i rho_j)/rho_k^2, which leaves the
    optimal readout of X (and hence the zero synergy) unchanged.
    """
    r = _as_rho_vector(rho)
    mags = np.abs(r)
    k = int(np.argmax(mags))
    if np.count_nonzero(mags == mags[k]) > 1:
        raise DegeneracyError(
            "two or more predictors tie for the largest |rho|; the "
            "synergy-minimizing covariance is degenerate"
        )
    v = r / r[k]  # v[k] == 1
    off = np.delete(v, k)
    if off @ off <= 1.0 - 1e-6:
        sigma = np.eye(r.size)
        sigma[k, :] = v
        sigma[:, k] = v
        sigma[k, k] = 1.0
    else:
        sigma = np.outer(v, v)
        np.fill_diagonal(sigma, 1.0)
    return GaussianSystem(r, sigma)


def gaussian_ci_posterior(rho) -> CiPosterior:
    """Posterior of X given z when the encoding is treated as conditionally
    independent given X.

    With R = sum_j rho_j^2/(1 - rho_j^2):

        weight_j = rho_j / ((1 - rho_j^2) (1 + R)),   variance = 1/(1 + R).

    Correlations are clamped to +-(1 - 1e-4) first, so the weights stay
    bounded even for (numerically) perfect predictors.
    """
    r = np.atleast_1d(np.asarray(rho, dtype=float))
    if r.ndim != 1 or r.size == 0:
        raise ValueError("rho must be a non-empty 1-D vector")
    r = np.clip(r, -(1.0 - RHO_CLAMP), 1.0 - RHO_CLAMP)
    prec = r ** 2 / (1.0 - r ** 2)
    big_r = float(prec.sum())
    weights = (r / (1.0 - r ** 2)) / (1.0 + big_r)
    return CiPosterior(weights=weights, variance=1.0 / (1.0 + big_r))


def gaussian_ci_synergy(sys: GaussianSystem) -> float:
    """Expected KL divergence from the true posterior p(x|z) to the
    conditionally-independent posterior, averaged over p(z).  Nats, >= 0.

    Both posteriors are Gaussian with means linear in z, so the expectation
    reduces in closed form: with beta = Sigma_z^{-1} rho, s2 = 1 - rho.beta,
    (w, v) the conditionally-independent weights and variance, and
    d = beta - w,

        CI = 1/2 ln(v / s2) + (s2 + d^T Sigma_z d) / (2 v) - 1/2.
    """
    q = _explained_variance(sys)
    s2 = 1.0 - q
    post = gaussian_ci_posterior(sys.rho)
    if s2 <= 0.0:
        # Deterministic target: the KL to any fixed-variance posterior diverges.
        return np.inf
    beta = np.linalg.solve(sys.sigma_z, sys.rho)
    d = beta - post.weights
    gap = float(d @ sys.sigma_z @ d)
    v = post.variance
    ci = 0.5 * np.log(v / s2) + (s2 + gap) / (2.0 * v) - 0.5
    return max(0.0, ci)

"""Decoder parameters derived from batch statistics instead of training.

The decoders here are fixed functions of the pairwise statistics between
outputs X_i and latents Z_j: the Gaussian variant applies the
conditionally-independent posterior weights row by row, the binary variant
is the naive-Bayes log-odds readout.  Statistics are accumulated as raw
moments so they can be blended across batches with a moving average and the
derived quantities (correlations, conditionals) recomputed on demand.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .gaussian import gaussian_ci_posterior

EPS = 1e-4
STD_FLOOR = 1e-6


@dataclass(frozen=True)
class GaussianStats:
    """Raw first/second moments of a batch of outputs x and latents z.

    Derived views: per-variable standard deviations (floored at 1e-6) and the
    n x m correlation matrix rho (clamped to +-(1 - 1e-4)).
    """

    x_mean: np.ndarray
    z_mean: np.ndarray
    x_sq_mean: np.ndarray
    z_sq_mean: np.ndarray
    xz_mean: np.ndarray  # (n, m) raw E[x_i z_j]

    def __post_init__(self):
        for name in ("x_mean", "z_mean", "x_sq_mean", "z_sq_mean", "xz_mean"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n, m = self.x_mean.size, self.z_mean.size
        if self.x_sq_mean.shape != (n,) or self.z_sq_mean.shape != (m,):
            raise ValueError("second-moment shapes do not match the means")
        if self.xz_mean.shape != (n, m):
            raise ValueError(f"xz_mean must have shape ({n}, {m})")

    @property
    def n(self) -> int:
        return self.x_mean.size

    @property
    def m(self) -> int:
        return self.z_mean.size

    @property
    def x_std(self) -> np.ndarray:
        return np.sqrt(np.clip(self.x_sq_mean - self.x_mean ** 2, STD_FLOOR ** 2, None))

    @property
    def z_std(self) -> np.ndarray:
        return np.sqrt(np.clip(self.z_sq_mean - self.z_mean ** 2, STD_FLOOR ** 2, None))

    @property
    def rho(self) -> np.ndarray:
        cov = self.xz_mean - np.outer(self.x_mean, self.z_mean)
        r = cov / np.outer(self.x_std, self.z_std)
        return np.clip(r, -(1.0 - EPS), 1.0 - EPS)


@dataclass(frozen=True)
class BinaryStats:
    """Raw Bernoulli moments E[x], E[z], E[x z] of a batch in [0, 1].

    Derived views give p(X_i = 1) and the conditional tables
    p(Z_j = 1 | X_i = 1/0), everything clamped into [1e-4, 1 - 1e-4].
    An output with (almost) no mass on one side, E[x_i] outside
    [1e-4, 1 - 1e-4], gives the latents nothing to condition on; both its
    conditionals then fall back to the latent marginals, so such an output
    draws zero evidence weight instead of a clamp artifact.
    """

    x_mean: np.ndarray
    z_mean: np.ndarray
    xz_mean: np.ndarray  # (n, m) raw E[x_i z_j]

    def __post_init__(self):
        for name in ("x_mean", "z_mean", "xz_mean"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.xz_mean.shape != (self.x_mean.size, self.z_mean.size):
            raise ValueError("xz_mean shape does not match the means")

    @property
    def n(self) -> int:
        return self.x_mean.size

    @property
    def m(self) -> int:
        return self.z_mean.size

    @property
    def px1(self) -> np.ndarray:
        return np.clip(self.x_mean, EPS, 1.0 - EPS)

    @property
    def _supported(self) -> np.ndarray:
        return (self.x_mean >= EPS) & (self.x_mean <= 1.0 - EPS)

    @property
    def pz1_given_x1(self) -> np.ndarray:
        cond = self.xz_mean / self.px1[:, None]
        cond = np.where(self._supported[:, None], cond, self.z_mean[None, :])
        return np.clip(cond, EPS, 1.0 - EPS)

    @property
    def pz1_given_x0(self) -> np.ndarray:
        cond = (self.z_mean[None, :] - self.xz_mean) / (1.0 - self.px1)[:, None]
        cond = np.where(self._supported[:, None], cond, self.z_mean[None, :])
        return np.clip(cond, EPS, 1.0 - EPS)


@dataclass(frozen=True)
class DecoderParams:
    """Affine readout of the latents: one row of weights and a bias per output.

    For the Gaussian decoder ``variance`` additionally carries the posterior
    variance of each output; the binary decoder leaves it None and its output
    is meant to pass through a sigmoid.
    """

    weights: np.ndarray  # (n, m)
    bias: np.ndarray  # (n,)
    variance: np.ndarray | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        b = np.asarray(self.bias, dtype=float)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)
        if w.ndim != 2 or b.shape != (w.shape[0],):
            raise ValueError("weights must be (n, m) with an n-vector bias")
        ok = np.all(np.isfinite(w)) and np.all(np.isfinite(b))
        if self.variance is not None:
            v = np.asarray(self.variance, dtype=float)
            object.__setattr__(self, "variance", v)
            ok = ok and v.shape == b.shape and np.all(np.isfinite(v))
        if not ok:
            raise ValueError("decoder parameters must be finite and consistent")

    def linear(self, z: np.ndarray) -> np.ndarray:
        """Affine part w . z + b for a batch of latents (B, m)."""
        return np.asarray(z, dtype=float) @ self.weights.T + self.bias


def gaussian_batch_stats(x_batch, z_batch) -> GaussianStats:
    """Raw Gaussian moments of a batch; needs at least two samples."""
    x = np.asarray(x_batch, dtype=float)
    z = np.asarray(z_batch, dtype=float)
    if x.ndim != 2 or z.ndim != 2 or x.shape[0] != z.shape[0]:
        raise ValueError("x_batch and z_batch must be 2-D with equal batch size")
    b = x.shape[0]
    if b < 2:
        raise ValueError(f"batch size {b} < 2: statistics are undefined")
    return GaussianStats(
        x_mean=x.mean(axis=0),
        z_mean=z.mean(axis=0),
        x_sq_mean=(x ** 2).mean(axis=0),
        z_sq_mean=(z ** 2).mean(axis=0),
        xz_mean=x.T @ z / b,
    )


def binary_batch_stats(x_batch, z_batch) -> BinaryStats:
    """Raw Bernoulli moments of a batch whose entries live in [0, 1]."""
    x = np.asarray(x_batch, dtype=float)
    z = np.asarray(z_batch, dtype=float)
    if x.ndim != 2 or z.ndim != 2 or x.shape[0] != z.shape[0]:
        raise ValueError("x_batch and z_batch must be 2-D with equal batch size")
    for name, arr in (("x_batch", x), ("z_batch", z)):
        if arr.size and (arr.min() < -1e-12 or arr.max() > 1.0 + 1e-12):
            raise ValueError(f"{name} entries must lie in [0, 1] to be read as probabilities")
    b = x.shape[0]
    return BinaryStats(
        x_mean=x.mean(axis=0),
        z_mean=z.mean(axis=0),
        xz_mean=x.T @ z / b,
    )


def gaussian_decoder_params(stats: GaussianStats) -> DecoderParams:
    """Conditionally-independent posterior weights, row per output, expressed
    in raw (de-standardized) coordinates:

        xbar_i = x_mean_i + x_std_i * sum_j u_ij (z_j - z_mean_j) / z_std_j

    with u_ij the standardized posterior weights and variance
    x_std_i^2 / (1 + R_i).
    """
    r = stats.rho
    prec = r ** 2 / (1.0 - r ** 2)
    big_r = prec.sum(axis=1)
    u = (r / (1.0 - r ** 2)) / (1.0 + big_r)[:, None]
    weights = u * np.outer(stats.x_std, 1.0 / stats.z_std)
    bias = stats.x_mean - weights @ stats.z_mean
    variance = stats.x_std ** 2 / (1.0 + big_r)
    return DecoderParams(weights=weights, bias=bias, variance=variance)


def binary_decoder_params(stats: BinaryStats) -> DecoderParams:
    """Naive-Bayes log-odds readout of binary outputs from binary latents:

        b_i   = ln(p(X_i=1)/p(X_i=0)) + sum_j ln(p(Z_j=0|X_i=1)/p(Z_j=0|X_i=0))
        w_ij  = ln( p(Z_j=1|X_i=1) p(Z_j=0|X_i=0)
                  / (p(Z_j=0|X_i=1) p(Z_j=1|X_i=0)) )

    so that sigmoid(w . z + b) equals the Bayes posterior whenever the
    latents really are conditionally independent given each output.
    """
    p1 = stats.px1
    q1 = stats.pz1_given_x1
    q0 = stats.pz1_given_x0
    weights = np.log(q1 * (1.0 - q0)) - np.log((1.0 - q1) * q0)
    bias = np.log(p1 / (1.0 - p1)) + np.log((1.0 - q1) / (1.0 - q0)).sum(axis=1)
    return DecoderParams(weights=weights, bias=bias)


@dataclass(frozen=True)
class MovingAverageState:
    """Exponential moving average over raw batch statistics.

    The first update copies the batch outright; afterwards each raw-moment
    field follows running <- momentum * running + (1 - momentum) * batch.
    """

    stats: GaussianStats | BinaryStats | None
    momentum: float = 0.99
    step_count: int = 0

    def __post_init__(self):
        if not (0.0 < self.momentum < 1.0):
            raise ValueError("momentum must lie in (0, 1)")
        if self.step_count < 0:
            raise ValueError("step_count must be >= 0")
        if self.step_count > 0 and self.stats is None:
            raise ValueError("a state with updates must carry statistics")


def update_moving_average(state: MovingAverageState, batch) -> MovingAverageState:
    """Blend one batch of statistics into the running average.

    ``batch`` must be the same statistics type (and shapes) as the running
    value; derived quantities are recomputed lazily from the blended raw
    moments, never averaged themselves.
    """
    if state.step_count == 0 or state.stats is None:
        return MovingAverageState(stats=batch, momentum=state.momentum, step_count=1)
    running = state.stats
    if type(running) is not type(batch):
        raise ValueError(
            f"statistics type mismatch: running {type(running).__name__}, "
            f"batch {type(batch).__name__}"
        )
    mu = state.momentum
    blended = {}
    for f in dataclasses.fields(running):
        old = getattr(running, f.name)
        new = getattr(batch, f.name)
        if old.shape != new.shape:
            raise ValueError(f"shape mismatch on {f.name}: {old.shape} vs {new.shape}")
        blended[f.name] = mu * old + (1.0 - mu) * new
    return MovingAverageState(
        stats=type(running)(**blended),
        momentum=state.momentum,
        step_count=state.step_count + 1,
    )

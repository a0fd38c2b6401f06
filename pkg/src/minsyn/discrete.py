"""Exact information measures on small, fully enumerated discrete joints.

Tables are stored dense with one axis per latent variable plus a final axis
for the target, so everything here is computed by explicit marginalization.
This keeps the module exact and makes it the natural brute-force oracle for
the Gaussian closed forms and the learned decoders.  All values in nats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

MAX_LATENTS = 12
_SUM_TOL = 1e-12


class AbsoluteContinuityError(ValueError):
    """p(z) > 0 at a configuration where the factorized model gives
    probability zero, so the KL divergence is infinite."""


def _xlogx(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    mask = p > 0.0
    out[mask] = p[mask] * np.log(p[mask])
    return out


def entropy(marginal) -> float:
    """Shannon entropy -sum p ln p of a single distribution, with 0 ln 0 = 0."""
    p = np.asarray(marginal, dtype=float)
    if np.any(p < -_SUM_TOL) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"not a probability distribution (sum={p.sum()!r})")
    return float(-_xlogx(np.clip(p, 0.0, None)).sum())


@dataclass(frozen=True)
class DiscreteJoint:
    """Dense joint distribution over m latents Z_1..Z_m and one target X.

    ``probs`` has shape ``arities`` with axes ordered (z_1, ..., z_m, x).
    """

    probs: np.ndarray
    arities: tuple = field(init=False)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim < 2:
            raise ValueError("a joint needs at least one latent and the target")
        if p.ndim - 1 > MAX_LATENTS:
            raise ValueError(f"at most {MAX_LATENTS} latent variables supported")
        if np.any(p < -_SUM_TOL):
            raise ValueError("negative probability entries")
        if abs(p.sum() - 1.0) > _SUM_TOL:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "probs", np.clip(p, 0.0, None))
        object.__setattr__(self, "arities", p.shape)

    @property
    def m(self) -> int:
        return self.probs.ndim - 1

    @property
    def x_axis(self) -> int:
        return self.probs.ndim - 1

    def x_marginal(self) -> np.ndarray:
        return self.probs.sum(axis=tuple(range(self.m)))

    def z_marginal(self) -> np.ndarray:
        """Joint distribution of the latents with X summed out."""
        return self.probs.sum(axis=self.x_axis)

    def marginal(self, axes) -> np.ndarray:
        """Marginal over the given axes (latents by index, target = m)."""
        keep = sorted(set(axes))
        drop = tuple(a for a in range(self.probs.ndim) if a not in keep)
        return self.probs.sum(axis=drop)

    @classmethod
    def xor(cls) -> "DiscreteJoint":
        """Two fair independent bits with X = Z1 xor Z2."""
        p = np.zeros((2, 2, 2))
        for z1, z2 in product((0, 1), repeat=2):
            p[z1, z2, z1 ^ z2] = 0.25
        return cls(p)

    @classmethod
    def from_conditionals(cls, p_x, pz_given_x) -> "DiscreteJoint":
        """Joint with latents conditionally independent given X.

        ``p_x`` is the target marginal; ``pz_given_x`` is a list of m tables,
        table j of shape (arity_j, |X|) holding p(Z_j = a | X = x).
        """
        px = np.asarray(p_x, dtype=float)
        # Start with p(x) and attach latent axes from the left so the final
        # layout is (z_1, ..., z_m, x).
        table = px
        for cond in reversed(list(pz_given_x)):
            c = np.asarray(cond, dtype=float)
            if c.shape[1] != px.size:
                raise ValueError("conditional table does not match |X|")
            table = c.reshape(c.shape[0], *([1] * (table.ndim - 1)), px.size) * table[None, ...]
        return cls(table)

    @classmethod
    def from_text(cls, text: str) -> "DiscreteJoint":
        """Parse the plain-text table format.

        One line per configuration: the integer symbol of each latent, then
        the target symbol, then the probability, all space-separated.  Lines
        starting with ``#`` and blank lines are ignored; absent
        configurations have probability zero; arities are inferred as
        (largest symbol + 1) per column.
        """
        rows = []
        for ln_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) < 3:
                raise ValueError(f"line {ln_no}: need at least z, x and a probability")
            try:
                symbols = [int(tok) for tok in parts[:-1]]
                prob = float(parts[-1])
            except ValueError as exc:
                raise ValueError(f"line {ln_no}: {exc}") from None
            if any(s < 0 for s in symbols):
                raise ValueError(f"line {ln_no}: negative symbol")
            rows.append((symbols, prob))
        if not rows:
            raise ValueError("empty table")
        width = len(rows[0][0])
        if any(len(sym) != width for sym, _ in rows):
            raise ValueError("inconsistent number of variables across lines")
        arities = [max(sym[i] for sym, _ in rows) + 1 for i in range(width)]
        table = np.zeros(arities)
        for sym, prob in rows:
            table[tuple(sym)] += prob
        return cls(table)

    def to_text(self) -> str:
        lines = []
        for idx in product(*(range(a) for a in self.arities)):
            p = self.probs[idx]
            if p > 0.0:
                lines.append(" ".join(str(i) for i in idx) + f" {float(p)!r}")
        return "\n".join(lines) + "\n"


def mutual_information(joint: DiscreteJoint, group) -> float:
    """I(Z_group; X) by exact summation; ``group`` holds latent indices."""
    idx = sorted(set(group))
    if not idx:
        raise ValueError("group of latent indices must be non-empty")
    if any(i < 0 or i >= joint.m for i in idx):
        raise ValueError(f"latent index out of range for m={joint.m}")
    p_gx = joint.marginal(idx + [joint.x_axis])
    p_g = p_gx.sum(axis=-1)
    p_x = p_gx.sum(axis=tuple(range(p_gx.ndim - 1)))
    h = entropy(p_g.ravel()) + entropy(p_x) - entropy(p_gx.ravel())
    return max(0.0, h)


def total_correlation(joint: DiscreteJoint) -> float:
    """TC(Z_{1:m}) = sum_j H(Z_j) - H(Z_{1:m}) over the latent marginal.

    Zero exactly when the latents are independent.
    """
    pz = joint.z_marginal()
    singles = sum(
        entropy(pz.sum(axis=tuple(a for a in range(pz.ndim) if a != j)))
        for j in range(pz.ndim)
    )
    return max(0.0, singles - entropy(pz.ravel()))


@dataclass(frozen=True)
class CiDecoderTable:
    """Factorized-model posterior p_ci(x | z) for every z configuration.

    ``probs`` matches the joint's shape; rows at unsupported configurations
    (p_ci(z) = 0) are NaN and flagged False in ``defined``.
    """

    probs: np.ndarray
    defined: np.ndarray
    p_ci_z: np.ndarray


def _ci_joint(joint: DiscreteJoint) -> np.ndarray:
    """p(x) * prod_j p(z_j | x) laid out like the original table."""
    p_x = joint.x_marginal()
    table = np.ones_like(joint.probs) * p_x  # broadcasts onto the last axis
    safe_px = np.where(p_x > 0.0, p_x, 1.0)
    for j in range(joint.m):
        keep = tuple(a for a in range(joint.m) if a != j)
        pjx = joint.probs.sum(axis=keep)  # (arity_j, |X|)
        cond = pjx / safe_px
        shape = [1] * joint.probs.ndim
        shape[j] = cond.shape[0]
        shape[-1] = cond.shape[1]
        table = table * cond.reshape(shape)
    return table


def ci_decoder_distribution(joint: DiscreteJoint) -> CiDecoderTable:
    """Posterior of X under the conditionally-independent reading of the
    encoder: p_ci(x|z) = p(x) prod_j p(z_j|x) / p_ci(z).

    Raises AbsoluteContinuityError if some z with p(z) > 0 has p_ci(z) = 0
    (cannot happen for tables that are exactly consistent, but guards
    rounded input).
    """
    ci = _ci_joint(joint)
    p_ci_z = ci.sum(axis=-1)
    p_z = joint.z_marginal()
    bad = (p_z > 0.0) & (p_ci_z <= 0.0)
    if np.any(bad):
        where = tuple(int(i) for i in np.argwhere(bad)[0])
        raise AbsoluteContinuityError(
            f"p(z) > 0 but the factorized model gives zero mass at z={where}"
        )
    defined = p_ci_z > 0.0
    safe = np.where(defined, p_ci_z, 1.0)
    probs = ci / safe[..., None]
    probs = np.where(defined[..., None], probs, np.nan)
    return CiDecoderTable(probs=probs, defined=defined, p_ci_z=p_ci_z)


def discrete_ci_synergy(joint: DiscreteJoint) -> float:
    """Expected KL from the true posterior p(x|z) to the factorized-model
    posterior, weighted by p(z).  Nats, >= 0."""
    if joint.m == 1:
        # One latent: the factorized posterior IS the Bayes posterior, so the
        # divergence is identically zero (skip the rounding noise).
        return 0.0
    decoder = ci_decoder_distribution(joint)
    p_z = joint.z_marginal()
    safe_pz = np.where(p_z > 0.0, p_z, 1.0)
    post = joint.probs / safe_pz[..., None]
    q = decoder.probs
    support = (joint.probs > 0.0) & (p_z > 0.0)[..., None]
    if np.any(support & ~(np.nan_to_num(q, nan=0.0) > 0.0)):
        where = tuple(int(i) for i in np.argwhere(
            (support & ~(np.nan_to_num(q, nan=0.0) > 0.0)).any(axis=-1))[0])
        raise AbsoluteContinuityError(
            f"true posterior has mass the factorized model lacks at z={where}"
        )
    ratio = np.ones_like(post)
    np.divide(post, q, out=ratio, where=support)
    terms = np.zeros_like(post)
    np.multiply(post, np.log(ratio, where=support, out=np.zeros_like(ratio)),
                out=terms, where=support)
    kl_per_z = terms.sum(axis=-1)
    return max(0.0, float((p_z * kl_per_z).sum()))


def discrete_wms_synergy(joint: DiscreteJoint) -> float:
    """Whole-minus-sum synergy I(Z_{1:m};X) - sum_j I(Z_j;X); may be negative."""
    whole = mutual_information(joint, range(joint.m))
    singles = sum(mutual_information(joint, [j]) for j in range(joint.m))
    return whole - singles

"""Bandit policies behind one select/update interface.

Four policies share the interface:

* ``mab``    - Beta-Bernoulli Thompson Sampling, context-blind.
* ``nsmab``  - sliding-window UCB over each arm's most recent pulls.
* ``cmab``   - linear contextual Thompson Sampling with ridge statistics.
* ``tscc``   - a two-level hybrid: a Beta meta-bandit picks, per round,
  between the contextual policy and the context-blind policy; both underlying
  models are updated every round, so rounds with useless context still teach
  the context-blind half.

State types are exposed alongside functional select/update operations so the
pieces can be tested and recombined independently of the policy classes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from collections import deque

import numpy as np

from .errors import DimensionMismatch, InvalidParameter, InvalidReward
from .linalg import (
    CholeskyFactor,
    chol_downdate,
    cholesky,
    sample_beta,
    sample_mvn,
    spd_inverse,
)

POLICY_NAMES = ("mab", "nsmab", "cmab", "tscc")

META_NONCONTEXTUAL = 0
META_CONTEXTUAL = 1


@dataclass(frozen=True)
class HyperParams:
    """Policy hyperparameters; defaults are conventional, all overridable."""

    r_scale: float = 0.25
    epsilon: float = 0.5
    gamma_conf: float = 0.1
    s0: float = 1.0
    f0: float = 1.0
    window: int = 100
    xi: float = 0.5

    def __post_init__(self):
        if self.r_scale <= 0:
            raise InvalidParameter(f"r_scale must be > 0, got {self.r_scale}")
        if not (0 < self.epsilon <= 1):
            raise InvalidParameter(f"epsilon must be in (0, 1], got {self.epsilon}")
        if not (0 < self.gamma_conf <= 1):
            raise InvalidParameter(f"gamma_conf must be in (0, 1], got {self.gamma_conf}")
        if self.s0 <= 0 or self.f0 <= 0:
            raise InvalidParameter("Beta priors s0, f0 must be positive")
        if self.window < 1:
            raise InvalidParameter(f"window must be >= 1, got {self.window}")
        if self.xi <= 0:
            raise InvalidParameter(f"xi must be > 0, got {self.xi}")


def exploration_scale(r_scale: float, epsilon: float, gamma_conf: float, dim: int) -> float:
    """Posterior-width multiplier R * sqrt((24/eps) * d * ln(1/gamma)).

    gamma_conf = 1 gives 0: greedy posterior-mean play with no inflation.
    """
    if r_scale <= 0:
        raise InvalidParameter(f"r_scale must be > 0, got {r_scale}")
    if not (0 < epsilon <= 1):
        raise InvalidParameter(f"epsilon must be in (0, 1], got {epsilon}")
    if not (0 < gamma_conf <= 1):
        raise InvalidParameter(f"gamma_conf must be in (0, 1], got {gamma_conf}")
    if dim < 1:
        raise InvalidParameter(f"dim must be >= 1, got {dim}")
    return r_scale * math.sqrt((24.0 / epsilon) * dim * math.log(1.0 / gamma_conf))


def argmax_lowest(scores) -> int:
    """Index of the maximum score; ties broken by the lowest index."""
    return int(np.argmax(scores))


# ---------------------------------------------------------------------------
# Beta-Bernoulli arms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BetaArmState:
    """Success/failure pseudo-counts of one Bernoulli arm's Beta posterior."""

    s: float
    f: float

    def __post_init__(self):
        if self.s <= 0 or self.f <= 0:
            raise InvalidParameter(f"Beta counts must be positive, got s={self.s}, f={self.f}")


def beta_update(state: BetaArmState, reward) -> BetaArmState:
    """Increment the success (reward=1) or failure (reward=0) count."""
    if reward not in (0, 1):
        raise InvalidReward(f"reward must be 0 or 1, got {reward!r}")
    return BetaArmState(s=state.s + reward, f=state.f + (1 - reward))


def beta_ts_select(arms, rng) -> int:
    """Thompson step: one Beta draw per arm, play the argmax."""
    s = np.array([a.s for a in arms])
    f = np.array([a.f for a in arms])
    return argmax_lowest(rng.beta(s, f))


# ---------------------------------------------------------------------------
# Linear (ridge) arms for contextual Thompson Sampling
# ---------------------------------------------------------------------------


class LinearArmState:
    """Ridge statistics of one arm: B = I + sum c c^T, g = sum c r.

    The inverse is maintained incrementally (Sherman-Morrison) and the
    Cholesky factor of the inverse by rank-one downdates, keeping every
    round O(d^2). Both are re-derived from a fresh factorization of B every
    ``refresh_every`` updates to bound floating-point drift.
    """

    def __init__(self, dim: int, refresh_every: int = 1000):
        if dim < 1:
            raise InvalidParameter(f"dim must be >= 1, got {dim}")
        self.dim = dim
        self.refresh_every = refresh_every
        self.b = np.eye(dim)
        self.b_inv = np.eye(dim)
        self.g = np.zeros(dim)
        self.mu_hat = np.zeros(dim)
        self._inv_factor = CholeskyFactor(lower=np.eye(dim))
        self._updates = 0

    @property
    def inv_factor(self) -> CholeskyFactor:
        """Lower factor of the current B^{-1} (sampling covariance shape)."""
        return self._inv_factor

    @property
    def updates(self) -> int:
        return self._updates

    def update(self, c: np.ndarray, reward) -> None:
        if reward not in (0, 1):
            raise InvalidReward(f"reward must be 0 or 1, got {reward!r}")
        c = np.asarray(c, dtype=np.float64)
        if c.shape != (self.dim,):
            raise DimensionMismatch(f"context shape {c.shape} != ({self.dim},)")
        u = self.b_inv @ c
        denom = 1.0 + float(c @ u)
        self.b += np.outer(c, c)
        # Same arithmetic as sherman_morrison_update, applied in place.
        self.b_inv -= np.outer(u, u / denom)
        try:
            self._inv_factor = chol_downdate(self._inv_factor, u / math.sqrt(denom))
        except Exception:
            self._refresh()
        if reward:
            self.g += c
        # Recursive least squares: mu' = mu + u * (r - c.mu) / (1 + c.u).
        self.mu_hat = self.mu_hat + u * ((reward - float(c @ self.mu_hat)) / denom)
        self._updates += 1
        if self._updates % self.refresh_every == 0:
            self._refresh()

    def _refresh(self) -> None:
        self.b_inv = spd_inverse(self.b)
        self.mu_hat = self.b_inv @ self.g
        self._inv_factor = cholesky(self.b_inv)


def cts_update(arm: LinearArmState, c: np.ndarray, reward) -> None:
    """Fold one (context, reward) observation into an arm's ridge state."""
    arm.update(c, reward)


def cts_select(arms, c: np.ndarray, v: float, rng) -> int:
    """Sample mu_k ~ N(mu_hat_k, v^2 B_k^{-1}) per arm; play argmax of c . mu_k."""
    c = np.asarray(c, dtype=np.float64)
    scores = np.empty(len(arms))
    for k, arm in enumerate(arms):
        if c.shape != (arm.dim,):
            raise DimensionMismatch(f"context shape {c.shape} != ({arm.dim},)")
        mu_tilde = sample_mvn(arm.mu_hat, v, arm.inv_factor, rng)
        scores[k] = float(c @ mu_tilde)
    return argmax_lowest(scores)


# ---------------------------------------------------------------------------
# Sliding-window UCB
# ---------------------------------------------------------------------------


class SlidingWindowState:
    """Last-``window`` pulls per arm plus the global round counter."""

    def __init__(self, n_arms: int, window: int, xi: float):
        if n_arms < 1:
            raise InvalidParameter("need at least one arm")
        self.window = window
        self.xi = xi
        self.t = 0
        self.buffers = [deque(maxlen=window) for _ in range(n_arms)]


def swucb_select(state: SlidingWindowState, rng=None) -> int:
    """Argmax of in-window mean + sqrt(xi * ln(min(t, W)) / n_W(k)).

    Arms with no in-window pulls score +inf, so the first rounds sweep the
    arms in index order. ``rng`` is accepted for interface uniformity and
    unused: ties break deterministically by lowest index.
    """
    scores = np.empty(len(state.buffers))
    log_horizon = math.log(min(state.t, state.window)) if state.t >= 1 else 0.0
    for k, buf in enumerate(state.buffers):
        n = len(buf)
        if n == 0:
            scores[k] = math.inf
        else:
            mean = sum(r for _, r in buf) / n
            scores[k] = mean + math.sqrt(state.xi * log_horizon / n)
    return argmax_lowest(scores)


def swucb_update(state: SlidingWindowState, arm: int, reward) -> None:
    if reward not in (0, 1):
        raise InvalidReward(f"reward must be 0 or 1, got {reward!r}")
    state.t += 1
    state.buffers[arm].append((state.t, reward))


# ---------------------------------------------------------------------------
# Two-level hybrid (contextual + context-blind under a Beta meta-bandit)
# ---------------------------------------------------------------------------


class TsccState:
    """Composite state: K linear arms, K Beta arms, and the 2-armed meta-bandit.

    ``meta[1]`` scores the contextual policy, ``meta[0]`` the context-blind
    one; both are Beta posteriors over "this policy's decision earned reward 1".
    """

    def __init__(self, n_arms: int, dim: int, hyper: HyperParams):
        if n_arms < 1:
            raise InvalidParameter("need at least one arm")
        self.hyper = hyper
        self.v = exploration_scale(hyper.r_scale, hyper.epsilon, hyper.gamma_conf, dim)
        self.linear_arms = [LinearArmState(dim) for _ in range(n_arms)]
        self.beta_arms = [BetaArmState(hyper.s0, hyper.f0) for _ in range(n_arms)]
        self.meta = [BetaArmState(hyper.s0, hyper.f0), BetaArmState(hyper.s0, hyper.f0)]


def tscc_select_policy(meta, rng) -> int:
    """Thompson draw over the two policies; exact tie trusts the context (1)."""
    theta0 = sample_beta(meta[META_NONCONTEXTUAL].s, meta[META_NONCONTEXTUAL].f, rng)
    theta1 = sample_beta(meta[META_CONTEXTUAL].s, meta[META_CONTEXTUAL].f, rng)
    return META_CONTEXTUAL if theta1 >= theta0 else META_NONCONTEXTUAL


def tscc_select_arm(state: TsccState, c: np.ndarray, alpha: int, rng) -> int:
    """Arm choice of the policy picked this round.

    alpha=1 delegates to the contextual sampler; alpha=0 to the Beta sampler,
    which never reads the context.
    """
    if alpha == META_CONTEXTUAL:
        return cts_select(state.linear_arms, c, state.v, rng)
    return beta_ts_select(state.beta_arms, rng)


def tscc_update(state: TsccState, c: np.ndarray, chosen_arm: int, alpha: int, reward) -> None:
    """Update both sub-models for the chosen arm, and the deciding policy's meta arm.

    Corruption is not detectable, so the linear and Beta models are both fed
    every round; credit for the reward goes only to the policy that made the
    decision.
    """
    if alpha not in (META_NONCONTEXTUAL, META_CONTEXTUAL):
        raise InvalidParameter(f"alpha must be 0 or 1, got {alpha!r}")
    cts_update(state.linear_arms[chosen_arm], c, reward)
    state.beta_arms[chosen_arm] = beta_update(state.beta_arms[chosen_arm], reward)
    state.meta[alpha] = beta_update(state.meta[alpha], reward)


# ---------------------------------------------------------------------------
# Uniform policy interface
# ---------------------------------------------------------------------------


class BanditPolicy:
    """select_arm(context) -> arm; update(context, arm, reward) -> None."""

    name = "base"

    def select_arm(self, context: np.ndarray) -> int:
        raise NotImplementedError

    def update(self, context: np.ndarray, arm: int, reward) -> None:
        raise NotImplementedError

    @property
    def last_alpha(self) -> int:
        """Meta-policy flag of the most recent selection; -1 when not applicable."""
        return -1


class ThompsonSamplingPolicy(BanditPolicy):
    """Context-blind Beta-Bernoulli Thompson Sampling."""

    name = "mab"

    def __init__(self, n_arms: int, hyper: HyperParams, rng):
        if n_arms < 1:
            raise InvalidParameter("need at least one arm")
        self.rng = rng
        self.arms = [BetaArmState(hyper.s0, hyper.f0) for _ in range(n_arms)]

    def select_arm(self, context) -> int:
        return beta_ts_select(self.arms, self.rng)

    def update(self, context, arm: int, reward) -> None:
        self.arms[arm] = beta_update(self.arms[arm], reward)


class SlidingWindowUcbPolicy(BanditPolicy):
    """Context-blind UCB over each arm's most recent ``window`` pulls."""

    name = "nsmab"

    def __init__(self, n_arms: int, hyper: HyperParams, rng):
        self.rng = rng
        self.state = SlidingWindowState(n_arms, hyper.window, hyper.xi)

    def select_arm(self, context) -> int:
        return swucb_select(self.state, self.rng)

    def update(self, context, arm: int, reward) -> None:
        swucb_update(self.state, arm, reward)


class ContextualTsPolicy(BanditPolicy):
    """Linear Thompson Sampling on ridge posteriors N(mu_hat, v^2 B^{-1})."""

    name = "cmab"

    def __init__(self, n_arms: int, dim: int, hyper: HyperParams, rng):
        if n_arms < 1:
            raise InvalidParameter("need at least one arm")
        self.rng = rng
        self.v = exploration_scale(hyper.r_scale, hyper.epsilon, hyper.gamma_conf, dim)
        self.arms = [LinearArmState(dim) for _ in range(n_arms)]

    def select_arm(self, context) -> int:
        return cts_select(self.arms, context, self.v, self.rng)

    def update(self, context, arm: int, reward) -> None:
        cts_update(self.arms[arm], context, reward)


class TsccPolicy(BanditPolicy):
    """Hybrid policy: Beta meta-bandit arbitrating contextual vs context-blind."""

    name = "tscc"

    def __init__(self, n_arms: int, dim: int, hyper: HyperParams, rng):
        self.rng = rng
        self.state = TsccState(n_arms, dim, hyper)
        self._last_alpha = -1

    def select_arm(self, context) -> int:
        alpha = tscc_select_policy(self.state.meta, self.rng)
        self._last_alpha = alpha
        return tscc_select_arm(self.state, context, alpha, self.rng)

    def update(self, context, arm: int, reward) -> None:
        if self._last_alpha not in (META_NONCONTEXTUAL, META_CONTEXTUAL):
            raise InvalidParameter("update called before any selection")
        tscc_update(self.state, context, arm, self._last_alpha, reward)

    @property
    def last_alpha(self) -> int:
        return self._last_alpha


def make_policy(name: str, n_arms: int, dim: int, hyper: HyperParams, rng) -> BanditPolicy:
    """Instantiate a policy by its registry name (mab, nsmab, cmab, tscc)."""
    if name == "mab":
        return ThompsonSamplingPolicy(n_arms, hyper, rng)
    if name == "nsmab":
        return SlidingWindowUcbPolicy(n_arms, hyper, rng)
    if name == "cmab":
        return ContextualTsPolicy(n_arms, dim, hyper, rng)
    if name == "tscc":
        return TsccPolicy(n_arms, dim, hyper, rng)
    raise InvalidParameter(f"unknown policy {name!r}; expected one of {POLICY_NAMES}")

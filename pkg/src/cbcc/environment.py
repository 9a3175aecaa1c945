"""Interaction protocol for classification streams with corrupted contexts.

Each round: draw the next instance (cyclically over the dataset), replace its
context with per-feature uniform noise with probability ``p_corrupt``, have
the agent pick an arm, and pay reward 1 iff the arm equals the hidden true
label. Regret accounting uses the always-correct oracle, whose per-round
optimal reward is exactly 1, so cumulative regret equals the running
misclassification count.

The agent must only ever see ``BanditRound.presented_context``; the harness
owns the full round object, so corruption stays invisible to policies by
construction.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidParameter, ProtocolViolation


class CorruptionProcess:
    """Replaces a context, with probability ``p_corrupt``, by a vector of
    per-feature uniform draws over the observed feature ranges.

    Corrupted coordinates stay inside the ranges the data itself occupies, so
    no single coordinate betrays the substitution.
    """

    def __init__(self, p_corrupt: float, feature_mins, feature_maxs, rng):
        if not (0.0 <= p_corrupt <= 1.0):
            raise InvalidParameter(f"p_corrupt must be in [0, 1], got {p_corrupt}")
        mins = np.asarray(feature_mins, dtype=np.float64)
        maxs = np.asarray(feature_maxs, dtype=np.float64)
        if mins.shape != maxs.shape or mins.ndim != 1:
            raise DimensionMismatch("feature_mins and feature_maxs must be equal-length vectors")
        if np.any(mins > maxs):
            raise InvalidParameter("feature range with min > max")
        self.p_corrupt = float(p_corrupt)
        self.mins = mins
        self.maxs = maxs
        self.rng = rng

    @property
    def dim(self) -> int:
        return self.mins.shape[0]

    def corrupt(self, c: np.ndarray):
        """Return (context, was_corrupted). The original vector passes through
        untouched on the no-corruption branch."""
        c = np.asarray(c, dtype=np.float64)
        if c.shape != (self.dim,):
            raise DimensionMismatch(f"context shape {c.shape} != ({self.dim},)")
        if self.rng.random() < self.p_corrupt:
            return self.rng.uniform(self.mins, self.maxs), True
        return c, False


def corrupt(c: np.ndarray, proc: CorruptionProcess):
    """Functional alias for :meth:`CorruptionProcess.corrupt`."""
    return proc.corrupt(c)


@dataclass
class BanditRound:
    """One emitted round. ``true_label`` and ``was_corrupted`` are for the
    environment/harness only; agents receive just ``presented_context``."""

    t: int
    presented_context: np.ndarray
    true_label: int
    was_corrupted: bool


class RegretLedger:
    """Running totals of achieved vs oracle reward, plus the reward trace."""

    def __init__(self):
        self.cumulative_reward = 0
        self.cumulative_optimal = 0
        self.rewards = array("b")

    @property
    def cumulative_regret(self) -> int:
        return self.cumulative_optimal - self.cumulative_reward

    def record(self, reward: int, optimal: int = 1) -> None:
        self.cumulative_reward += reward
        self.cumulative_optimal += optimal
        self.rewards.append(reward)
        assert self.cumulative_regret >= 0


class ClassificationEnvironment:
    """Cyclic stream over a dataset with probabilistic context corruption.

    Protocol per round: ``next_round()`` then exactly one ``step(arm)``.
    """

    def __init__(self, dataset, p_corrupt: float, rng):
        if dataset.n < 1:
            raise InvalidParameter("dataset is empty")
        self.dataset = dataset
        self.process = CorruptionProcess(
            p_corrupt, dataset.feature_mins, dataset.feature_maxs, rng
        )
        self.ledger = RegretLedger()
        self.t = 0
        self._cursor = 0
        self._pending: BanditRound | None = None

    @property
    def n_arms(self) -> int:
        return self.dataset.k

    @property
    def dim(self) -> int:
        return self.dataset.d

    def next_round(self) -> BanditRound:
        """Emit the instance at the cursor; the cursor wraps past the end."""
        i = self._cursor
        self._cursor = (self._cursor + 1) % self.dataset.n
        self.t += 1
        context, flag = self.process.corrupt(self.dataset.features[i])
        self._pending = BanditRound(
            t=self.t,
            presented_context=context,
            true_label=int(self.dataset.labels[i]),
            was_corrupted=flag,
        )
        return self._pending

    def step(self, chosen_arm: int) -> int:
        """Score the pending round: reward 1 iff the arm is the true label."""
        if self._pending is None:
            raise ProtocolViolation("step() called with no emitted round")
        reward = 1 if int(chosen_arm) == self._pending.true_label else 0
        self._pending = None
        self.ledger.record(reward)
        # Oracle plays the true label every round, so optimal reward is t.
        assert self.ledger.cumulative_optimal == self.t
        return reward

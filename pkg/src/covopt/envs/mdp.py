"""Enumerable finite MDPs with dense state indices."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np


@dataclass(eq=False)
class TabularMDP:
    """Finite MDP ``(S, A, T, R, gamma)`` stored as sparse outcome lists.

    Outcomes of ``(s, a)`` live in ``next_state[ptr[i]:ptr[i+1]]`` (with
    matching ``prob`` and ``reward``) where ``i = s * n_actions + a``.  These
    are the free-running dynamics.  Agents see terminal states as absorbing:
    :meth:`outcomes` returns a zero-reward self-loop there, while
    :meth:`dynamics` keeps the underlying motion (a random walk used for
    cover-time measurements must be able to leave the goal cell).
    """

    n_states: int
    n_actions: int
    ptr: np.ndarray
    next_state: np.ndarray
    prob: np.ndarray
    reward: np.ndarray
    terminal: np.ndarray
    initial: np.ndarray
    gamma: float = 0.95
    labels: list = field(default_factory=list)
    action_names: tuple = ()
    name: str = "mdp"
    available: np.ndarray | None = None

    def __post_init__(self):
        if not self.labels:
            self.labels = list(range(self.n_states))
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        if len(self._index) != self.n_states:
            raise ValueError("state labels must be unique")

    @classmethod
    def from_function(
        cls,
        states: Sequence[Hashable],
        actions: Sequence,
        transition: Callable[[Hashable, object], Iterable[tuple[Hashable, float, float]]],
        terminal: Callable[[Hashable], bool] = lambda s: False,
        initial: Iterable[Hashable] | None = None,
        gamma: float = 0.95,
        name: str = "mdp",
        available: Callable[[Hashable, object], bool] | None = None,
    ) -> "TabularMDP":
        """Enumerate ``transition(state, action) -> [(next, prob, reward), ...]``.

        ``available(state, action)`` restricts the actions usable per state;
        unavailable pairs still need an outcome (a self-loop is typical).
        """
        states = list(states)
        index = {s: i for i, s in enumerate(states)}
        ptr = [0]
        nxt, prob, rew = [], [], []
        for s in states:
            for a in actions:
                merged: dict[int, list[float]] = {}
                for t, p, r in transition(s, a):
                    if p <= 0:
                        continue
                    j = index[t]
                    if j in merged:
                        # identical targets are merged; rewards averaged by probability
                        q, rr = merged[j]
                        merged[j] = [q + p, (q * rr + p * r) / (q + p)]
                    else:
                        merged[j] = [p, r]
                for j in sorted(merged):
                    nxt.append(j)
                    prob.append(merged[j][0])
                    rew.append(merged[j][1])
                ptr.append(len(nxt))
        initial_states = states[:1] if initial is None else list(initial)
        return cls(
            n_states=len(states),
            n_actions=len(actions),
            ptr=np.asarray(ptr, dtype=np.int64),
            next_state=np.asarray(nxt, dtype=np.int64),
            prob=np.asarray(prob, dtype=float),
            reward=np.asarray(rew, dtype=float),
            terminal=np.array([bool(terminal(s)) for s in states]),
            initial=np.array([index[s] for s in initial_states], dtype=np.int64),
            gamma=gamma,
            labels=states,
            action_names=tuple(str(a) for a in actions),
            name=name,
            available=None if available is None else np.array(
                [[bool(available(s, a)) for a in actions] for s in states]),
        )

    # -- indexing --------------------------------------------------------

    def index(self, label) -> int:
        return self._index[label]

    def label(self, s: int):
        return self.labels[s]

    # -- transition access -----------------------------------------------

    def available_mask(self) -> np.ndarray:
        """``(S, A)`` boolean mask of the actions usable in each state."""
        if self.available is None:
            return np.ones((self.n_states, self.n_actions), dtype=bool)
        return self.available

    def actions(self, s: int) -> np.ndarray:
        if self.available is None:
            return np.arange(self.n_actions)
        return np.flatnonzero(self.available[s])

    def dynamics(self, s: int, a: int):
        """Free-running outcomes ``(next_states, probs, rewards)`` of ``(s, a)``."""
        i = s * self.n_actions + a
        lo, hi = self.ptr[i], self.ptr[i + 1]
        return self.next_state[lo:hi], self.prob[lo:hi], self.reward[lo:hi]

    def outcomes(self, s: int, a: int):
        """Outcomes as seen by an agent; terminal states absorb with reward 0."""
        if self.terminal[s]:
            return np.array([s]), np.array([1.0]), np.array([0.0])
        return self.dynamics(s, a)

    def successors(self, s: int) -> set[int]:
        out = set()
        for a in self.actions(s):
            out.update(int(t) for t in self.outcomes(s, a)[0])
        return out

    @property
    def is_deterministic(self) -> bool:
        return bool(np.all(np.diff(self.ptr) == 1))

    def next_table(self, absorbing: bool = True) -> np.ndarray:
        """``(S, A)`` next-state table; deterministic MDPs only."""
        if not self.is_deterministic:
            raise ValueError(f"{self.name} is stochastic; no next-state table")
        table = self.next_state.reshape(self.n_states, self.n_actions).copy()
        if absorbing:
            table[self.terminal] = np.flatnonzero(self.terminal)[:, None]
        return table

    def reward_table(self, absorbing: bool = True) -> np.ndarray:
        if not self.is_deterministic:
            raise ValueError(f"{self.name} is stochastic; no reward table")
        table = self.reward.reshape(self.n_states, self.n_actions).copy()
        if absorbing:
            table[self.terminal] = 0.0
        return table

    def step(self, s: int, a: int, rng: np.random.Generator) -> tuple[int, float, bool]:
        nxt, p, r = self.outcomes(s, a)
        i = 0 if len(nxt) == 1 else int(rng.choice(len(nxt), p=p))
        t = int(nxt[i])
        return t, float(r[i]), bool(self.terminal[t])

    def sample_initial(self, rng: np.random.Generator) -> int:
        if len(self.initial) == 1:
            return int(self.initial[0])
        return int(self.initial[rng.integers(len(self.initial))])

    def check(self, atol: float = 1e-12) -> None:
        """Raise ``ValueError`` unless every (s, a) distribution sums to one."""
        sums = np.add.reduceat(self.prob, self.ptr[:-1]) if len(self.prob) else np.zeros(0)
        counts = np.diff(self.ptr)
        if np.any(counts == 0):
            raise ValueError("some (state, action) pair has no outcome")
        if not np.allclose(sums, 1.0, atol=atol):
            bad = int(np.flatnonzero(~np.isclose(sums, 1.0, atol=atol))[0])
            raise ValueError(f"outcome probabilities of pair {bad} sum to {sums[bad]}")

    def __repr__(self):
        return f"TabularMDP({self.name!r}, states={self.n_states}, actions={self.n_actions})"

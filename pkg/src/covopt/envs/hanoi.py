"""Towers of Hanoi: each disc's peg determines the configuration."""

from __future__ import annotations

from itertools import permutations, product

from .mdp import TabularMDP

PEG_MOVES = tuple(permutations(range(3), 2))


def _top(state, peg):
    # discs are numbered from the smallest, so the first one found is on top
    for disc, p in enumerate(state):
        if p == peg:
            return disc
    return None


def hanoi(discs: int = 4, gamma: float = 0.95) -> TabularMDP:
    """``3**discs`` states, six ``(from, to)`` actions, all discs start on peg 0.

    Illegal moves leave the state unchanged.  Reaching the tower on peg 2
    pays 1 and terminates.
    """
    if discs < 1:
        raise ValueError("need at least one disc")
    states = list(product(range(3), repeat=discs))
    goal = (2,) * discs

    def transition(s, move):
        src, dst = move
        disc = _top(s, src)
        other = _top(s, dst)
        if disc is None or (other is not None and other < disc):
            return [(s, 1.0, 0.0)]
        t = s[:disc] + (dst,) + s[disc + 1:]
        return [(t, 1.0, 1.0 if t == goal else 0.0)]

    return TabularMDP.from_function(
        states, PEG_MOVES, transition, terminal=lambda s: s == goal,
        initial=[(0,) * discs], gamma=gamma, name=f"hanoi{discs}",
    )

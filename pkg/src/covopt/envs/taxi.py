"""Single-passenger taxi on the classic 5x5 map."""

from __future__ import annotations

from itertools import product

from .mdp import TabularMDP

LANDMARKS = ((0, 0), (0, 4), (4, 0), (4, 3))
LANDMARK_NAMES = "RGYB"
IN_TAXI = 4
ACTIONS = ("N", "S", "E", "W", "pickup", "dropoff")
_MOVES = {"N": (-1, 0), "S": (1, 0), "E": (0, 1), "W": (0, -1)}
# vertical walls, stored as (row, west column) of the blocked east-west crossing
_WALLS = frozenset({(0, 1), (1, 1), (3, 0), (4, 0), (3, 2), (4, 2)})


def _blocked(r, c, dc):
    return (r, c if dc > 0 else c - 1) in _WALLS


def taxi(gamma: float = 0.95) -> TabularMDP:
    """500 states ``(row, col, passenger, destination)``.

    ``passenger`` is a landmark index or ``IN_TAXI``.  Picking up at the
    passenger's landmark loads them; dropping off at the destination pays 1
    and terminates, and dropping off at another landmark leaves the
    passenger waiting there.  Every other pickup or dropoff is a no-op.  Episodes
    start uniformly over taxi cells and passenger/destination pairs with the
    passenger waiting at a landmark other than the destination.
    """
    states = list(product(range(5), range(5), range(5), range(4)))

    def terminal(s):
        r, c, p, d = s
        return p == d and (r, c) == LANDMARKS[d]

    def transition(s, a):
        r, c, p, d = s
        if a in _MOVES:
            dr, dc = _MOVES[a]
            nr, nc = r + dr, c + dc
            if not (0 <= nr < 5 and 0 <= nc < 5) or (dc and _blocked(r, c, dc)):
                nr, nc = r, c
            return [((nr, nc, p, d), 1.0, 0.0)]
        if a == "pickup":
            if p != IN_TAXI and (r, c) == LANDMARKS[p]:
                return [((r, c, IN_TAXI, d), 1.0, 0.0)]
            return [(s, 1.0, 0.0)]
        if p == IN_TAXI and (r, c) == LANDMARKS[d]:
            return [((r, c, d, d), 1.0, 1.0)]
        if p == IN_TAXI and (r, c) in LANDMARKS:
            return [((r, c, LANDMARKS.index((r, c)), d), 1.0, 0.0)]
        return [(s, 1.0, 0.0)]

    initial = [s for s in states if s[2] != IN_TAXI and s[2] != s[3]]
    return TabularMDP.from_function(states, ACTIONS, transition, terminal=terminal,
                                    initial=initial, gamma=gamma, name="taxi")

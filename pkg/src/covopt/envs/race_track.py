"""Race track: position plus velocity, reset to the start line on a crash."""

from __future__ import annotations

from itertools import product

from ..exceptions import MalformedTrack
from .grid import read_layout
from .mdp import TabularMDP

FINISH = "FINISH"
ACCELERATIONS = tuple(product((-1, 0, 1), repeat=2))


class Track:
    """Parsed track: ``#`` wall, ``.`` track, ``s`` start line, ``F`` finish line."""

    def __init__(self, text: str):
        trailing = text.endswith("\n")
        lines = text.split("\n")[:-1] if trailing else text.split("\n")
        if not lines or not lines[0]:
            raise MalformedTrack("empty track", line=1)
        width = len(lines[0])
        for i, line in enumerate(lines, start=1):
            if len(line) != width:
                raise MalformedTrack(f"row has width {len(line)}, expected {width}", line=i)
            for j, ch in enumerate(line, start=1):
                if ch not in "#.sF":
                    raise MalformedTrack(f"unknown cell character {ch!r}", line=i, column=j)
        self.rows = tuple(lines)
        self.trailing_newline = trailing
        self.starts = self.cells("s")
        if not self.starts:
            raise MalformedTrack("track has no start line ('s' cells)")
        if not self.cells("F"):
            raise MalformedTrack("track has no finish line ('F' cells)")

    @property
    def height(self):
        return len(self.rows)

    @property
    def width(self):
        return len(self.rows[0])

    def cells(self, chars):
        return [(r, c) for r, row in enumerate(self.rows) for c, ch in enumerate(row) if ch in chars]

    def at(self, r, c):
        if 0 <= r < self.height and 0 <= c < self.width:
            return self.rows[r][c]
        return "#"

    def trace(self, r, c, vr, vc):
        """Follow the segment ``(r, c) -> (r + vr, c + vc)``.

        Returns ``"crash"``, ``"finish"`` or ``None`` for the first wall or
        finish cell the segment enters, checked at sub-cell resolution.
        """
        steps = 4 * max(abs(vr), abs(vc), 1)
        for i in range(1, steps + 1):
            ch = self.at(int(round(r + i * vr / steps)), int(round(c + i * vc / steps)))
            if ch == "#":
                return "crash"
            if ch == "F":
                return "finish"
        return None

    def to_text(self):
        return "\n".join(self.rows) + ("\n" if self.trailing_newline else "")


def race_track(track="race_track", v_max: int = 4, gamma: float = 0.95) -> TabularMDP:
    """Race-track MDP on a track file (path, text or shipped layout name).

    States are ``(row, col, vr, vc)`` over non-finish track cells and
    velocities in ``[-v_max, v_max]``, plus one absorbing ``FINISH`` state.
    Each of the nine actions adds ``(-1|0|1, -1|0|1)`` to the velocity, which
    is clipped, and then moves by it.  Crossing a wall resets the car to a
    uniformly drawn start cell with zero velocity; crossing the finish line
    pays 1 and terminates.  Past the finish the free-running dynamics
    restart on the start line, so random walks keep covering the track.
    """
    tr = Track(read_layout(track))
    speeds = range(-v_max, v_max + 1)
    cells = tr.cells(".s")
    states = [(r, c, vr, vc) for (r, c) in cells for vr in speeds for vc in speeds] + [FINISH]
    reset = [((r, c, 0, 0), 1.0 / len(tr.starts), 0.0) for (r, c) in tr.starts]

    def transition(s, a):
        if s == FINISH:
            # agents see FINISH as absorbing; the free-running walk restarts
            return reset
        r, c, vr, vc = s
        vr = min(max(vr + a[0], -v_max), v_max)
        vc = min(max(vc + a[1], -v_max), v_max)
        event = tr.trace(r, c, vr, vc)
        if event == "crash":
            return reset
        if event == "finish":
            return [(FINISH, 1.0, 1.0)]
        return [((r + vr, c + vc, vr, vc), 1.0, 0.0)]

    mdp = TabularMDP.from_function(
        states, ACCELERATIONS, transition, terminal=lambda s: s == FINISH,
        initial=[(r, c, 0, 0) for (r, c) in tr.starts], gamma=gamma, name="race_track",
    )
    mdp.layout = tr
    return mdp

"""ASCII gridworlds: ``#`` wall, ``.`` floor, ``S`` start, ``G`` goal."""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..exceptions import MalformedMap
from .mdp import TabularMDP

ACTIONS = ("up", "down", "left", "right")
MOVES = {"up": (-1, 0), "down": (1, 0), "left": (0, -1), "right": (0, 1)}
CELL_TYPES = {"#": "wall", ".": "floor", "S": "start", "G": "goal"}

DATA_ENV = "COVOPT_DATA_DIR"


def data_path(name: str) -> Path:
    """Locate a shipped layout, honouring ``$COVOPT_DATA_DIR`` first."""
    override = os.environ.get(DATA_ENV)
    if override and (Path(override) / name).exists():
        return Path(override) / name
    return Path(str(resources.files("covopt.envs") / "data" / name))


def read_layout(source) -> str:
    """Return layout text from a string, a path, or a shipped layout name."""
    if isinstance(source, Path):
        return source.read_text(encoding="ascii")
    if "\n" in source:
        return source
    p = Path(source)
    if not p.exists():
        p = data_path(source if source.endswith(".txt") else source + ".txt")
    return p.read_text(encoding="ascii")


@dataclass(frozen=True)
class GridMap:
    rows: tuple[str, ...]
    trailing_newline: bool = True

    @classmethod
    def parse(cls, text: str, allowed: str = "#.SG") -> "GridMap":
        trailing = text.endswith("\n")
        lines = text.split("\n")
        if trailing:
            lines = lines[:-1]
        if not lines or not lines[0]:
            raise MalformedMap("empty map", line=1)
        width = len(lines[0])
        for i, line in enumerate(lines, start=1):
            if len(line) != width:
                raise MalformedMap(f"row has width {len(line)}, expected {width}", line=i)
            for j, ch in enumerate(line, start=1):
                if ch not in allowed:
                    raise MalformedMap(f"unknown cell character {ch!r}", line=i, column=j)
        gm = cls(tuple(lines), trailing)
        gm._validate()
        return gm

    @property
    def height(self) -> int:
        return len(self.rows)

    @property
    def width(self) -> int:
        return len(self.rows[0])

    def cells(self, chars: str) -> list[tuple[int, int]]:
        return [(r, c) for r, row in enumerate(self.rows) for c, ch in enumerate(row) if ch in chars]

    def is_open(self, r: int, c: int) -> bool:
        return 0 <= r < self.height and 0 <= c < self.width and self.rows[r][c] != "#"

    def _validate(self):
        starts = self.cells("S")
        if len(starts) != 1:
            where = starts[1] if len(starts) > 1 else (None, None)
            raise MalformedMap(f"expected exactly one start cell, found {len(starts)}",
                               line=None if where[0] is None else where[0] + 1,
                               column=None if where[1] is None else where[1] + 1)
        if not self.cells("G"):
            raise MalformedMap("map has no goal cell")
        floor = self.cells(".SG")
        seen = {starts[0]}
        queue = deque(seen)
        while queue:
            r, c = queue.popleft()
            for dr, dc in MOVES.values():
                q = (r + dr, c + dc)
                if q not in seen and self.is_open(*q):
                    seen.add(q)
                    queue.append(q)
        if len(seen) != len(floor):
            r, c = next(p for p in floor if p not in seen)
            raise MalformedMap("floor is disconnected: cell unreachable from start", line=r + 1, column=c + 1)

    def to_text(self) -> str:
        return "\n".join(self.rows) + ("\n" if self.trailing_newline else "")


def grid_mdp(gm: GridMap, gamma: float = 0.95, name: str = "grid") -> TabularMDP:
    """Four-action gridworld; bumping a wall leaves the state unchanged."""
    states = gm.cells(".SG")
    goals = set(gm.cells("G"))

    def transition(s, a):
        dr, dc = MOVES[a]
        t = (s[0] + dr, s[1] + dc)
        if not gm.is_open(*t):
            t = s
        return [(t, 1.0, 1.0 if (t in goals and s not in goals) else 0.0)]

    mdp = TabularMDP.from_function(states, ACTIONS, transition, terminal=lambda s: s in goals,
                                   initial=gm.cells("S"), gamma=gamma, name=name)
    mdp.layout = gm
    return mdp


def load_grid(source, gamma: float = 0.95, name: str | None = None) -> TabularMDP:
    """Parse an ASCII map (text, path or shipped layout name) into an MDP."""
    text = read_layout(source)
    gm = GridMap.parse(text)
    if name is None:
        name = Path(source).stem if "\n" not in str(source) else "grid"
    return grid_mdp(gm, gamma=gamma, name=name)


def open_grid(rows: int = 9, cols: int = 9, gamma: float = 0.95) -> TabularMDP:
    """Wall-free grid, start in the top-left corner and goal in the bottom-right."""
    lines = []
    for r in range(rows):
        line = ["."] * cols
        if r == 0:
            line[0] = "S"
        if r == rows - 1:
            line[-1] = "G"
        lines.append("".join(line))
    return grid_mdp(GridMap.parse("\n".join(lines) + "\n"), gamma, name=f"grid{rows}x{cols}")


def four_room(gamma: float = 0.95) -> TabularMDP:
    return load_grid("fourroom", gamma=gamma, name="fourroom")


def parr_maze(gamma: float = 0.95) -> TabularMDP:
    return load_grid("parr_maze", gamma=gamma, name="parr_maze")

"""Benchmark tabular MDPs."""

from .grid import GridMap, four_room, grid_mdp, load_grid, open_grid, parr_maze
from .hanoi import hanoi
from .mdp import TabularMDP
from .race_track import Track, race_track
from .random_ssp import random_ssp, ssp_from_graph
from .taxi import taxi

DOMAINS = {
    "grid9x9": lambda: load_grid("grid9x9"),
    "fourroom": four_room,
    "taxi": taxi,
    "hanoi": hanoi,
    "parr_maze": parr_maze,
    "race_track": race_track,
}


def make_domain(name: str, layout=None, **kwargs) -> TabularMDP:
    """Build a named domain; ``layout`` overrides the shipped map or track."""
    if layout is not None:
        if name == "race_track":
            return race_track(layout, **kwargs)
        if name in ("grid9x9", "fourroom", "parr_maze", "grid"):
            return load_grid(layout, **kwargs)
        raise ValueError(f"domain {name!r} takes no layout file")
    if name == "hanoi" and "discs" in kwargs:
        return hanoi(**kwargs)
    if name not in DOMAINS:
        raise ValueError(f"unknown domain {name!r}; choose from {sorted(DOMAINS)}")
    return DOMAINS[name](**kwargs)


__all__ = [
    "DOMAINS", "GridMap", "TabularMDP", "Track", "four_room", "grid_mdp", "hanoi",
    "load_grid", "make_domain", "open_grid", "parr_maze", "race_track", "random_ssp",
    "ssp_from_graph", "taxi",
]

"""Regular patrolling strategy synthesis."""

from ._patrolsynth import (
    Graph,
    __version__,
    evaluate,
    gen_grid,
    gen_office,
    gen_office_tight,
    gen_points,
    optimize,
    protection_table,
    solve,
    uniform_strategy,
    random_strategy,
)

__all__ = [
    "Graph",
    "evaluate",
    "gen_grid",
    "gen_office",
    "gen_office_tight",
    "gen_points",
    "optimize",
    "protection_table",
    "random_strategy",
    "solve",
    "uniform_strategy",
]

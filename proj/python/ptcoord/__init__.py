"""Coordinated operation of a coupled traffic network and distribution grid.

Thin wrapper over the C++ core. ``Case`` holds an instance and its route
alternatives; results come back as plain dicts.
"""

from ._ptcoord import Case, PtcoordError, alpha_grid

__all__ = ["Case", "PtcoordError", "alpha_grid", "best_ratio"]


def best_ratio(result):
    """Sharing ratio and PDN total cost of the best accepted point of a sweep."""
    if result["alpha_star"] is None:
        return None
    for point in result["points"]:
        if point["alpha"] == result["alpha_star"]:
            return point["alpha"], point["psi"]
    return None

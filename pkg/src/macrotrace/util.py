"""Small shared numeric helpers."""

from __future__ import annotations

from math import ceil

__all__ = ["nearest_rank"]


def nearest_rank(sorted_values, pct: float):
    """Nearest-rank percentile: the ceil(pct/100 * n)-th smallest value.

    ``sorted_values`` must be sorted ascending and non-empty.  pct=50 gives
    the lower median on even-sized inputs.
    """
    n = len(sorted_values)
    if n == 0:
        raise ValueError("empty value list")
    if not 0 < pct <= 100:
        raise ValueError(f"percentile out of range: {pct}")
    rank = max(1, ceil(pct / 100.0 * n))
    return sorted_values[rank - 1]

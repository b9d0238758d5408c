"""Privacy audits for the retrieval protocol.

Three complementary checks back the t-collusion guarantee:

* Statistical: entries observed by a coalition of at most t nodes, pooled
  over many retrievals, should be indistinguishable from uniform field
  elements and identically distributed whatever cell was requested.
  Chi-square tests over residue bins implement both.
* Algebraic: for every query-vector slot, subtracting the deterministic
  monomial exactly where the desired cell sits must leave evaluations of a
  polynomial of degree <= t-1, and subtracting it anywhere else must not.
* Constructive: a coalition of t+1 nodes CAN recover the requested cell by
  testing which subtraction makes the shares low-degree, demonstrating the
  threshold is tight.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np
from scipy import stats

from .field import poly_interpolate
from .pir import PirParams, PirQuery


class CoalitionTooLarge(Exception):
    """The audit only speaks for coalitions within the threshold."""


@dataclass
class CollusionObserver:
    """Passive recorder of the queries a fixed coalition of nodes receives."""

    node_ids: tuple[int, ...]
    t: int
    observations: list[tuple[int, tuple[tuple[int, ...], ...]]] = dc_field(
        default_factory=list
    )

    def __post_init__(self):
        if len(set(self.node_ids)) != len(self.node_ids):
            raise ValueError("coalition node ids must be distinct")
        if len(self.node_ids) > self.t:
            raise CoalitionTooLarge(
                f"coalition of {len(self.node_ids)} exceeds threshold t={self.t}; "
                "the privacy guarantee does not apply"
            )

    def record(self, queries: Sequence[PirQuery], desired_cell: int) -> None:
        by_node = {q.node_index: q.entries for q in queries}
        self.observations.append(
            (desired_cell, tuple(by_node[j] for j in self.node_ids))
        )

    def pooled_entries(self, desired_cell: int | None = None) -> np.ndarray:
        """All coalition-visible entries, optionally filtered by cell."""
        vals: list[int] = []
        for d, per_node in self.observations:
            if desired_cell is not None and d != desired_cell:
                continue
            for entries in per_node:
                vals.extend(entries)
        return np.array(vals, dtype=np.int64)


def _residue_bins(values: np.ndarray, p: int, bins: int) -> tuple[np.ndarray, np.ndarray]:
    # residues mod `bins`; class sizes differ by one when bins does not
    # divide p, so expected counts follow the exact class sizes
    counts = np.bincount(values % bins, minlength=bins).astype(float)
    class_sizes = np.array(
        [(p - c + bins - 1) // bins for c in range(bins)], dtype=float
    )
    expected = class_sizes / p * values.size
    return counts, expected


def uniformity_pvalue(values: np.ndarray, p: int, bins: int = 16) -> float:
    """Chi-square p-value for 'these field elements are uniform'."""
    if values.size < 5 * bins:
        raise ValueError("too few samples for a meaningful chi-square")
    counts, expected = _residue_bins(values, p, bins)
    return float(stats.chisquare(counts, expected).pvalue)


def two_sample_pvalue(a: np.ndarray, b: np.ndarray, bins: int = 16) -> float:
    """Chi-square homogeneity p-value between the two observation groups."""
    table = np.vstack(
        [
            np.bincount(a % bins, minlength=bins),
            np.bincount(b % bins, minlength=bins),
        ]
    )
    return float(stats.chi2_contingency(table).pvalue)


def query_structure_ok(
    queries: Sequence[PirQuery], params: PirParams, desired_cell: int
) -> bool:
    """Omniscient algebraic check over a full query set.

    Subtracting the deterministic term at the desired cell must leave degree
    <= t-1 residuals; subtracting it at any other cell must not (for at
    least one row of that cell).
    """
    f = params.field
    alphas = params.points.alphas
    entries = {q.node_index: q.entries for q in queries}
    for m in range(1, params.M + 1):
        clean_rows = 0
        for ell in range(1, params.L + 1):
            idx = (m - 1) * params.L + (ell - 1)
            pts = []
            for j in alphas:
                v = entries[j][idx]
                v = (v - pow(j, params.k - ell, f.p)) % f.p
                pts.append((j, v))
            low = poly_interpolate(f, pts[: params.t])
            consistent = low.degree() <= params.t - 1 and all(
                low.eval(x) == y for x, y in pts
            )
            if m == desired_cell:
                if not consistent:
                    return False
            elif consistent:
                clean_rows += 1
        if m != desired_cell and clean_rows == params.L:
            # undesired cell indistinguishable from the desired one
            return False
    return True


def distinguish_desired(
    queries: Sequence[PirQuery], params: PirParams, coalition: Sequence[int]
) -> list[int]:
    """What a coalition of > t nodes can deduce: candidate desired cells.

    With t+1 shares, exactly one subtraction hypothesis leaves the points on
    a degree <= t-1 polynomial (up to rare collisions), so the true cell is
    identified. Used in tests to show the threshold is tight.
    """
    if len(coalition) <= params.t:
        raise CoalitionTooLarge("a distinguisher needs more than t nodes")
    f = params.field
    entries = {q.node_index: q.entries for q in queries}
    candidates = []
    for d in range(1, params.M + 1):
        ok = True
        for ell in range(1, params.L + 1):
            idx = (d - 1) * params.L + (ell - 1)
            pts = [
                (j, (entries[j][idx] - pow(j, params.k - ell, f.p)) % f.p)
                for j in coalition
            ]
            low = poly_interpolate(f, pts[: params.t])
            if low.degree() > params.t - 1 or any(
                low.eval(x) != y for x, y in pts
            ):
                ok = False
                break
        if ok:
            candidates.append(d)
    return candidates

"""Seed sequences, exact influence values and the seed CSV format."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

__all__ = ["InfluenceValue", "SeedSequence", "seed_csv"]


@dataclass(frozen=True)
class InfluenceValue:
    """Influence as an exact count of covered node-instance pairs over ``ell``."""

    numerator: int
    ell: int

    @property
    def value(self) -> float:
        return self.numerator / self.ell

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.ell)

    def __float__(self) -> float:
        return self.value


@dataclass
class SeedSequence:
    """Ordered seeds with their exact marginal influences.

    ``gains[j]`` is the number of pairs newly covered by ``nodes[j]``; the
    marginal influence in expected-node units is ``gains[j] / ell``.
    """

    ell: int
    nodes: list[int] = field(default_factory=list)
    gains: list[int] = field(default_factory=list)

    def append(self, node: int, gain: int) -> None:
        self.nodes.append(int(node))
        self.gains.append(int(gain))

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self) -> Iterator[tuple[int, float]]:
        return iter(zip(self.nodes, self.marginals))

    @property
    def marginals(self) -> list[float]:
        return [g / self.ell for g in self.gains]

    def cumulative_gains(self) -> list[int]:
        out, acc = [], 0
        for g in self.gains:
            acc += g
            out.append(acc)
        return out

    @property
    def cumulative(self) -> list[float]:
        return [c / self.ell for c in self.cumulative_gains()]

    def influence(self, s: int | None = None) -> InfluenceValue:
        """Influence of the first ``s`` seeds (all of them by default)."""
        s = len(self) if s is None else s
        return InfluenceValue(sum(self.gains[:s]), self.ell)

    def prefix(self, s: int) -> "SeedSequence":
        return SeedSequence(self.ell, self.nodes[:s], self.gains[:s])


def seed_csv(seq: SeedSequence, heldout: Sequence[float] | None = None) -> str:
    """Render ``seq`` as CSV.

    Columns: ``position,node,marginal,cumulative,marginal_num`` where
    ``marginal_num`` is the exact pair count (implied denominator ``ell``),
    plus ``influence_heldout`` when held-out prefix influences are given.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["position", "node", "marginal", "cumulative", "marginal_num"]
    if heldout is not None:
        header.append("influence_heldout")
    w.writerow(header)
    cum = seq.cumulative
    for j, (node, gain) in enumerate(zip(seq.nodes, seq.gains)):
        row = [j + 1, node, repr(gain / seq.ell), repr(cum[j]), gain]
        if heldout is not None:
            row.append(repr(float(heldout[j])))
        w.writerow(row)
    return buf.getvalue()

"""The norm-trace curve N(x) = T(y) over F_{q^3}.

Affine points are enumerated in a fixed canonical order (lexicographic by
the encodings of x then y) so that generator matrices and weight counts
downstream are reproducible bit for bit.  The place at infinity never
appears explicitly; it only matters through the pole orders q^2 and
q^2+q+1 used by the code module.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .gf import Element, FieldTower, Level


@dataclass(frozen=True)
class CurvePoint:
    x: Element
    y: Element


@dataclass(frozen=True)
class CurveTable:
    """All affine rational points, canonically ordered, plus index tables."""

    tower: FieldTower
    points: tuple[tuple[int, int], ...]
    trace_fibers: tuple[tuple[int, ...], ...] = field(repr=False, default=())

    def __len__(self) -> int:
        return len(self.points)


def trace_fibers(tower: FieldTower) -> list[list[int]]:
    """For each c in F_q, the sorted list of y with T(y) = c."""
    fibers: list[list[int]] = [[] for _ in range(tower.q)]
    for y, t in enumerate(tower.trace_table):
        fibers[t].append(y)
    return fibers

def enumerate_points(tower: FieldTower) -> CurveTable:
    """All (x, y) with N(x) = T(y); exactly q^5 of them."""
    fibers = trace_fibers(tower)
    pts: list[tuple[int, int]] = []
    for x in range(tower.size3):
        target = tower.norm_table[x]
        pts.extend((x, y) for y in fibers[target])
    table = CurveTable(tower, tuple(pts), tuple(tuple(f) for f in fibers))
    assert len(table.points) == tower.q**5
    return table


def is_on_curve(tower: FieldTower, x: Element, y: Element) -> bool:
    return tower.norm(x).code == tower.trace(y).code


def semigroup_generators(tower: FieldTower) -> tuple[int, int]:
    """Pole orders of x and y at the place at infinity: (q^2, q^2+q+1)."""
    q = tower.q
    return (q * q, q * q + q + 1)


def verify_automorphisms(tower: FieldTower) -> tuple[int, bool]:
    """Check the full automorphism group on every affine point.

    For every a with T(a) = 0 and every b != 0 the composed map
    (x, y) -> (b x, b^(q^2+q+1) (y + a)) must permute the point set;
    returns (number of (a, b) pairs checked, all_preserved).
    """
    F3 = tower.Fq3
    table = enumerate_points(tower)
    on_curve = set(table.points)
    _, m = semigroup_generators(tower)
    kernel = [a for a in range(tower.size3) if tower.trace_table[a] == 0]
    count = 0
    ok = True
    for a in kernel:
        for b in range(1, tower.size3):
            bm = F3.pow(b, m)
            count += 1
            for (x, y) in table.points:
                img = (F3.mul(b, x), F3.mul(bm, F3.add(y, a)))
                if img not in on_curve:
                    ok = False
    return count, ok


def automorphism_image_is_point_set(tower: FieldTower, table: CurveTable,
                                    a: int, b: int) -> bool:
    """Image of the point set under one (a, b) map equals the point set."""
    F3 = tower.Fq3
    _, m = semigroup_generators(tower)
    bm = F3.pow(b, m)
    image = {(F3.mul(b, x), F3.mul(bm, F3.add(y, a))) for (x, y) in table.points}
    return image == set(table.points)


def sample_automorphism_pairs(tower: FieldTower, n: int, seed: int) -> list[tuple[int, int]]:
    """Random (a, b) generator parameters with T(a) = 0 and b != 0."""
    rng = random.Random(seed)
    kernel = [a for a in range(tower.size3) if tower.trace_table[a] == 0]
    return [(rng.choice(kernel), rng.randrange(1, tower.size3)) for _ in range(n)]


def points_csv_rows(table: CurveTable) -> list[str]:
    rows = ["x,y"]
    rows.extend(f"{x},{y}" for x, y in table.points)
    return rows

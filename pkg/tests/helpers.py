"""Shared fixtures: independent oracles and random-instance builders."""

from __future__ import annotations

import random
from fractions import Fraction

from degenkit.algebra import BasisClass, Parity, Sector, SectorCatalog
from degenkit.correlator import Insertion, InvariantTable
from degenkit.graphs import (
    CurveClass,
    CurveClassMonoid,
    Generator,
    graph_from_canonical,
)
from degenkit.splitting import DegenerationProblem, LegSpec

EVEN, ODD = Parity.EVEN, Parity.ODD


def monomial_reorder_sign(permutation, parities) -> int:
    """Independent sign oracle: carry out the reordering by adjacent swaps in
    a free graded-commutative monomial model."""
    current = list(range(len(permutation)))
    sign = 1
    for k, want in enumerate(permutation):
        pos = current.index(want)
        while pos > k:
            left, right = current[pos - 1], current[pos]
            if parities[left].is_odd and parities[right].is_odd:
                sign = -sign
            current[pos - 1], current[pos] = right, left
            pos -= 1
    return sign


# -- random catalogs ----------------------------------------------------------


def random_divisor_catalog(rng: random.Random) -> SectorCatalog:
    """A catalog with at most four basis classes: an untwisted sector, plus
    either a conjugate band-2 pair, a self-conjugate band-2 sector, or an odd
    pair (possibly with the self-conjugate sector).  The pairing is
    involution-invariant."""
    sectors = [Sector("u", 1, "u")]
    basis = [BasisClass("u0", "u", EVEN)]
    inv = {"u0": ("u0", 1)}
    shape = rng.choice(["plain", "pair", "self", "odd", "odd-self"])
    if shape == "pair":
        sectors += [Sector("t+", 2, "t-"), Sector("t-", 2, "t+")]
        basis += [BasisClass("t0+", "t+", EVEN), BasisClass("t0-", "t-", EVEN)]
        inv["t0+"] = ("t0-", 1)
        inv["t0-"] = ("t0+", 1)
    if shape in ("self", "odd-self"):
        sectors += [Sector("t", 2, "t")]
        basis += [BasisClass("t0", "t", EVEN)]
        inv["t0"] = ("t0", rng.choice([1, -1]))
    if shape in ("odd", "odd-self"):
        basis += [BasisClass("o1", "u", ODD), BasisClass("o2", "u", ODD)]
        inv["o1"] = ("o1", 1)
        inv["o2"] = ("o2", 1)
    index = {b.id: i for i, b in enumerate(basis)}
    n = len(basis)
    pairing = [[Fraction(0)] * n for _ in range(n)]
    pairing[index["u0"]][index["u0"]] = Fraction(rng.randint(1, 4))
    if "t0+" in index:
        q = Fraction(rng.randint(1, 3), rng.randint(1, 2))
        pairing[index["t0+"]][index["t0+"]] = q
        pairing[index["t0-"]][index["t0-"]] = q
    if "t0" in index:
        pairing[index["t0"]][index["t0"]] = Fraction(rng.randint(1, 3), rng.randint(1, 2))
    if "o1" in index and "o2" in index:
        s = Fraction(rng.randint(1, 3))
        pairing[index["o1"]][index["o2"]] = s
        pairing[index["o2"]][index["o1"]] = -s
    inv = {b.id: inv[b.id] for b in basis}
    return SectorCatalog(
        sectors=tuple(sectors),
        basis=tuple(basis),
        pairing=tuple(tuple(row) for row in pairing),
        basis_involution=inv,
    )


def random_ambient_catalog(rng: random.Random) -> SectorCatalog:
    basis = [BasisClass("g_even", "m", EVEN)]
    with_odd = rng.random() < 0.6
    if with_odd:
        basis += [BasisClass("g_odd1", "m", ODD), BasisClass("g_odd2", "m", ODD)]
    n = len(basis)
    pairing = [[Fraction(0)] * n for _ in range(n)]
    pairing[0][0] = Fraction(1)
    if with_odd:
        pairing[1][2] = Fraction(1)
        pairing[2][1] = Fraction(-1)
    return SectorCatalog(
        sectors=(Sector("m", 1, "m"),),
        basis=tuple(basis),
        pairing=tuple(tuple(row) for row in pairing),
    )


def random_problem(rng: random.Random, max_legs: int = 3) -> tuple[DegenerationProblem, list[Insertion]]:
    """Instances with |M| <= 3: side degrees in {1, 3/2} over half-degree
    generators, contact orders bounded by 2."""
    divisor = random_divisor_catalog(rng)
    ambient = random_ambient_catalog(rng)
    k = rng.choice([2, 3])
    monoid = CurveClassMonoid(
        (
            Generator("a", "X1", Fraction(1, 2)),
            Generator("b", "X2", Fraction(1, 2)),
        )
    )
    beta = CurveClass({"a": k, "b": k})
    n_legs = rng.randint(0, max_legs)
    legs = []
    insertions = []
    for i in range(n_legs):
        legs.append(LegSpec(i + 1, 1, rng.choice([None, None, "X1", "X2"])))
        cid = rng.choice([b.id for b in ambient.basis])
        insertions.append(Insertion(rng.randint(0, 1), cid))
    problem = DegenerationProblem(
        monoid=monoid,
        genus=rng.randint(0, 2),
        legs=tuple(legs),
        beta=beta,
        divisor=divisor,
        c_max=2,
        ambient=ambient,
    )
    return problem, insertions


# -- covariant random tables ---------------------------------------------------


def _sorted_with_parity_sign(entries, parities):
    """Stable sort plus the Koszul sign of the sorting permutation."""
    order = sorted(range(len(entries)), key=lambda i: entries[i])
    sign = monomial_reorder_sign(order, parities)
    return tuple(entries[i] for i in order), sign


def covariant_random_table(
    keys, divisor: SectorCatalog, ambient: SectorCatalog, rng: random.Random
) -> InvariantTable:
    """Fill every key with a random value respecting relabeling covariance:
    permuting identical slots changes the value by the Koszul sign, and a
    repeated odd insertion forces zero."""
    table = InvariantTable()
    cache: dict = {}
    for key in keys:
        graph = graph_from_canonical(key.graph)
        leg_entries = []
        leg_parities = []
        for leg, (m, cid) in zip(
            sorted(graph.legs, key=lambda l: l.label), key.legs
        ):
            leg_entries.append((leg.e, m, cid))
            leg_parities.append(ambient.parity_of(cid))
        root_entries = []
        root_parities = []
        for root, cid in zip(
            sorted(graph.roots, key=lambda r: r.label), key.roots
        ):
            root_entries.append((root.f, root.c, cid))
            root_parities.append(divisor.parity_of(cid))
        zero = False
        for entries, parities in ((leg_entries, leg_parities), (root_entries, root_parities)):
            odd_items = [e for e, p in zip(entries, parities) if p.is_odd]
            if len(odd_items) != len(set(odd_items)):
                zero = True
        if zero:
            table.set(key, Fraction(0))
            continue
        legs_sorted, sign1 = _sorted_with_parity_sign(leg_entries, leg_parities)
        roots_sorted, sign2 = _sorted_with_parity_sign(root_entries, root_parities)
        vertex = graph.vertices[0]
        token = (
            key.side,
            len(graph.vertices),
            vertex.genus,
            vertex.weight.exponents,
            legs_sorted,
            roots_sorted,
        )
        if token not in cache:
            cache[token] = Fraction(rng.randint(1, 9), rng.randint(1, 5)) * rng.choice(
                [1, -1]
            )
        table.set(key, sign1 * sign2 * cache[token])
    return table

"""Symbolic correlators, invariant tables, and the degeneration evaluator.

Correlator values live in a user-supplied table keyed by connected graphs
plus insertion data.  The evaluator expands the splitting sum in either dual
convention: contact-order coefficients with plain involuted duals, or
intersection-multiplicity coefficients with band-weighted duals.  Interchange-
able even-parity legs are aggregated with multinomial weights, so instances
whose literal splitting set is huge still evaluate exactly.

Term accumulation is exact rational addition, hence associative and order
independent; the table is read-only during evaluation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .algebra import Parity, dual_basis, koszul_sign
from .errors import DegenkitError, MissingKeysError, ParityError
from .graphs import (
    Leg,
    ModularGraph,
    Root,
    Vertex,
    canonical_form,
    d_degree,
    rank_relabeled,
    total_weight,
)
from .splitting import (
    DegenerationProblem,
    Splitting,
    SplittingStructure,
    iter_structures,
)
from .twisting import MINIMAL_TWIST, TwistingChoice, degeneration_ledger

CONVENTIONS = ("standard_dual", "chen_ruan")


@dataclass(frozen=True)
class Insertion:
    """Descendant exponent plus a basis class reference."""

    m: int
    class_id: str

    def __post_init__(self):
        if self.m < 0:
            raise DegenkitError("descendant exponent must be nonnegative")


@dataclass(frozen=True)
class CorrelatorKey:
    """Canonical lookup key: one connected graph with its insertions.

    Labels are rank-relabeled (legs to 1..n, roots after them, order
    preserved), so equal keys mean equal correlators regardless of the
    ambient label values.  ``legs`` holds (m, class id) pairs and ``roots``
    holds class ids, both in label order; indices e, f and contact orders c
    live in the graph bytes.
    """

    side: str
    graph: bytes
    legs: tuple[tuple[int, str], ...]
    roots: tuple[str, ...]

    def __post_init__(self):
        if self.side not in ("X1", "X2"):
            raise DegenkitError("key side must be 'X1' or 'X2'")

    @staticmethod
    def for_component(
        side: str,
        graph: ModularGraph,
        leg_insertions: Mapping[int, Insertion],
        root_classes: Mapping[int, str],
    ) -> "CorrelatorKey":
        if not graph.is_connected():
            raise DegenkitError("correlator keys are for connected graphs")
        if set(leg_insertions) != set(graph.leg_labels()):
            raise DegenkitError("leg insertions must match the graph legs")
        if set(root_classes) != set(graph.root_labels()):
            raise DegenkitError("root classes must match the graph roots")
        legs = tuple(
            (leg_insertions[lab].m, leg_insertions[lab].class_id)
            for lab in graph.leg_labels()
        )
        roots = tuple(root_classes[lab] for lab in graph.root_labels())
        return CorrelatorKey(side, canonical_form(rank_relabeled(graph)), legs, roots)

    def sort_token(self):
        return (self.side, self.graph, self.legs, self.roots)


class InvariantTable:
    """Exact-rational correlator values; absent keys stay detectable."""

    def __init__(self, entries: Mapping[CorrelatorKey, Fraction] | None = None):
        self._entries: dict[CorrelatorKey, Fraction] = {}
        for k, v in (entries or {}).items():
            self.set(k, v)

    def set(self, key: CorrelatorKey, value) -> None:
        self._entries[key] = Fraction(value)

    def get(self, key: CorrelatorKey) -> Optional[Fraction]:
        return self._entries.get(key)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: CorrelatorKey) -> bool:
        return key in self._entries

    def items(self):
        return sorted(self._entries.items(), key=lambda kv: kv[0].sort_token())


@dataclass(frozen=True)
class EvalTerm:
    splitting: Splitting
    multiplicity: int
    delta_choice: tuple[tuple[int, str], ...]
    dual_choice: tuple[tuple[int, str], ...]
    sign: int
    coefficient: Fraction
    expansion_coefficient: Fraction
    left: tuple[tuple[CorrelatorKey, Fraction], ...]
    right: tuple[tuple[CorrelatorKey, Fraction], ...]

    @property
    def value(self) -> Fraction:
        out = self.coefficient * self.expansion_coefficient * self.sign * self.multiplicity
        for _, v in self.left + self.right:
            out *= v
        return out


@dataclass(frozen=True)
class EvaluationResult:
    value: Fraction
    convention: str
    twisting: str
    terms: tuple[EvalTerm, ...] | None = None


# -- shared machinery ---------------------------------------------------------


class _Context:
    """Resolved catalogs, duals, expansions, and the run's memo tables."""

    def __init__(self, problem: DegenerationProblem, insertions: Sequence[Insertion], convention: str):
        if convention not in CONVENTIONS:
            raise DegenkitError("unknown convention %r" % convention)
        if problem.ambient is None:
            raise DegenkitError("problem must carry an ambient catalog to evaluate")
        if len(insertions) != len(problem.legs):
            raise DegenkitError(
                "expected %d insertions, got %d" % (len(problem.legs), len(insertions))
            )
        self.problem = problem
        self.convention = convention
        self.divisor = problem.divisor
        self.ambient = problem.ambient
        self.by_label = {
            spec.label: ins for spec, ins in zip(problem.legs, insertions)
        }
        for ins in insertions:
            self.ambient.basis_index(ins.class_id)  # raises on unknown classes
        self.leg_parity = {
            lab: self.ambient.parity_of(ins.class_id)
            for lab, ins in self.by_label.items()
        }
        duals = dual_basis(self.divisor)
        bands = self.divisor.band_weights()
        self.admissible: dict[int, list[str]] = {}
        for f in self.divisor.band_orders():
            self.admissible[f] = [
                b.id
                for b in self.divisor.basis
                if self.divisor.sector_of(b.id).band_order == f
            ]
        # expansion of the right-hand class attached to a chosen left class
        self.expansion: dict[str, list[tuple[str, Fraction]]] = {}
        self.rho_parity: dict[str, Parity] = {}
        for i, b in enumerate(self.divisor.basis):
            vec = self.divisor.involution_pullback(duals[i])
            if self.convention == "chen_ruan":
                vec = tuple(bands[a] * vec[a] for a in range(len(vec)))
            support = [
                (self.divisor.basis[a].id, vec[a])
                for a in range(len(vec))
                if vec[a] != 0
            ]
            self.expansion[b.id] = support
            parities = {self.divisor.parity_of(cid) for cid, _ in support}
            if len(parities) > 1:
                raise ParityError(
                    "dual of %r mixes parities; sign bookkeeping is inconsistent" % b.id
                )
            self.rho_parity[b.id] = parities.pop() if parities else Parity.EVEN
        self.any_odd_leg = any(p.is_odd for p in self.leg_parity.values())
        self.missing: set[CorrelatorKey] = set()
        self.component_memo: dict = {}

    def delta_parity(self, basis_id: str) -> Parity:
        return self.divisor.parity_of(basis_id)

    def coefficient(self, contacts: Sequence[int], indices: Sequence[int], rule: TwistingChoice) -> Fraction:
        ledger = degeneration_ledger(contacts, rule)
        coeff = ledger.net
        if self.convention == "chen_ruan":
            for f in indices:
                coeff /= f
        return coeff

    def component_value(
        self,
        side: str,
        graph: ModularGraph,
        root_classes: Mapping[int, str],
        table: InvariantTable | None,
        collect: Optional[set] = None,
    ) -> tuple[Fraction, bool]:
        return _component_value(
            self.problem, self.by_label, side, graph, root_classes,
            table, self.missing, collect,
        )

    def raise_if_missing(self):
        if self.missing:
            raise MissingKeysError(self.missing)


def _component_value(
    problem: DegenerationProblem,
    insertions_by_label: Mapping[int, Insertion],
    side: str,
    graph: ModularGraph,
    root_classes: Mapping[int, str],
    table: InvariantTable | None,
    missing: set,
    collect: Optional[set] = None,
) -> tuple[Fraction, bool]:
    """Value of one connected correlator plus a key-was-missing flag.

    The two vanishing rules (root class off its index sector; multiplicity
    sum vs. divisor degree) apply before any table lookup, so those keys are
    never demanded of the table.
    """
    divisor = problem.divisor
    for lab, cid in root_classes.items():
        root = graph.root_by_label(lab)
        if divisor.sector_of(cid).band_order != root.f:
            return Fraction(0), False
    mult_sum = sum((r.multiplicity for r in graph.roots), Fraction(0))
    if mult_sum != d_degree(total_weight(graph), problem.monoid):
        return Fraction(0), False
    leg_ins = {lab: insertions_by_label[lab] for lab in graph.leg_labels()}
    key = CorrelatorKey.for_component(side, graph, leg_ins, root_classes)
    if collect is not None:
        collect.add(key)
        return Fraction(1), False
    value = table.get(key)
    if value is None:
        missing.add(key)
        return Fraction(0), True
    return value, False


def _grouping_sign(
    leg_parities: Mapping[int, Parity],
    m_labels: Sequence[int],
    delta_parities: Mapping[int, Parity],
    rho_parities: Mapping[int, Parity],
    left_components: Sequence[tuple[Sequence[int], Sequence[int]]],
    right_components: Sequence[tuple[Sequence[int], Sequence[int]]],
) -> int:
    """Koszul sign of regrouping the master insertion word per component.

    Source: all legs in label order, then delta_j rho_j interleaved in label
    order.  Target: per side, components ordered by least label, each with
    its legs then its roots (delta on the left side, rho on the right).
    """
    src: list[tuple[str, int]] = [("leg", lab) for lab in sorted(leg_parities)]
    for j in m_labels:
        src.append(("delta", j))
        src.append(("rho", j))
    parities = []
    for kind, lab in src:
        if kind == "leg":
            parities.append(leg_parities[lab])
        elif kind == "delta":
            parities.append(delta_parities[lab])
        else:
            parities.append(rho_parities[lab])
    index = {tok: i for i, tok in enumerate(src)}
    tgt: list[tuple[str, int]] = []
    for comps, kind in ((left_components, "delta"), (right_components, "rho")):
        ordered = sorted(
            comps, key=lambda c: min(list(c[0]) + list(c[1]), default=float("inf"))
        )
        for legs, roots in ordered:
            tgt += [("leg", lab) for lab in sorted(legs)]
            tgt += [(kind, j) for j in sorted(roots)]
    perm = [index[tok] for tok in tgt]
    return koszul_sign(perm, parities)


# -- aggregated walk over structures ------------------------------------------


@dataclass
class _StructureVertex:
    side: str
    position: int
    block: tuple[int, ...]
    weight: object
    genus: int
    fc: tuple[tuple[int, int], ...]  # (f, c) per root label in block order


def _structure_vertices(structure: SplittingStructure) -> list[_StructureVertex]:
    out = []
    for side in ("X1", "X2"):
        blocks, weights, genera = structure.side(side)
        for i, block in enumerate(blocks):
            fc = tuple(structure.fc_of(lab) for lab in block)
            out.append(_StructureVertex(side, i, block, weights[i], genera[i], fc))
    return out


def _vertex_graph(vx: _StructureVertex, leg_labels: Sequence[int], problem: DegenerationProblem) -> ModularGraph:
    spec = {l.label: l for l in problem.legs}
    return ModularGraph(
        vertices=(Vertex(vx.genus, vx.weight),),
        edges=(),
        legs=tuple(Leg(lab, spec[lab].e, 0) for lab in sorted(leg_labels)),
        roots=tuple(
            Root(lab, f, c, 0) for lab, (f, c) in zip(vx.block, vx.fc)
        ),
    )


def _leg_groups(ctx: _Context) -> list[dict]:
    """Aggregate identical even legs; odd legs stay singletons."""
    groups: dict = {}
    for spec in ctx.problem.legs:
        ins = ctx.by_label[spec.label]
        parity = ctx.leg_parity[spec.label]
        if parity.is_odd:
            key = ("odd", spec.label)
        else:
            key = ("even", spec.e, ins.m, ins.class_id, spec.side)
        g = groups.setdefault(
            key, {"labels": [], "side": spec.side, "parity": parity}
        )
        g["labels"].append(spec.label)
    out = []
    for key, g in sorted(groups.items(), key=lambda kv: kv[1]["labels"][0]):
        g["labels"].sort()
        g["count"] = len(g["labels"])
        out.append(g)
    return out


def _walk_terms(
    ctx: _Context,
    table: InvariantTable | None,
    rule: TwistingChoice,
    collect: Optional[set] = None,
    emit=None,
):
    """Sum the degeneration formula; optionally collect keys or emit terms."""
    problem = ctx.problem
    groups = _leg_groups(ctx)
    total = Fraction(0)
    for structure in iter_structures(problem):
        m_labels = structure.m_labels
        contacts = [c for _, c in structure.root_data]
        indices = [f for f, _ in structure.root_data]
        coeff = ctx.coefficient(contacts, indices, rule)
        vertices = _structure_vertices(structure)
        if not vertices:
            continue
        side_counts = {
            "X1": len(structure.blocks1),
            "X2": len(structure.blocks2),
        }
        # a constrained leg with no vertex on its side kills the structure
        if any(
            g["side"] is not None and side_counts[g["side"]] == 0 for g in groups
        ):
            continue
        f_of = {lab: structure.fc_of(lab)[0] for lab in m_labels}
        delta_spaces = [ctx.admissible.get(f_of[lab], []) for lab in m_labels]
        for delta_choice in itertools.product(*delta_spaces):
            delta_by_label = dict(zip(m_labels, delta_choice))
            rho_spaces = []
            for lab in m_labels:
                support = [
                    (cid, w)
                    for cid, w in ctx.expansion[delta_by_label[lab]]
                    if ctx.divisor.sector_of(cid).band_order == f_of[lab]
                ]
                rho_spaces.append(support)
            for rho_choice in itertools.product(*rho_spaces):
                rho_by_label = {
                    lab: cid for lab, (cid, _) in zip(m_labels, rho_choice)
                }
                expansion_coeff = Fraction(1)
                for _, w in rho_choice:
                    expansion_coeff *= w
                total += _leg_layer(
                    ctx,
                    table,
                    structure,
                    vertices,
                    groups,
                    coeff,
                    expansion_coeff,
                    delta_by_label,
                    rho_by_label,
                    collect,
                    emit,
                )
    return total


def _leg_layer(
    ctx,
    table,
    structure,
    vertices,
    groups,
    coeff,
    expansion_coeff,
    delta_by_label,
    rho_by_label,
    collect,
    emit,
):
    """Distribute leg groups over vertices, pruning zero-valued branches."""
    nv = len(vertices)
    # last position at which each group can still place legs
    last_slot = []
    for g in groups:
        positions = [
            i
            for i, vx in enumerate(vertices)
            if g["side"] in (None, vx.side)
        ]
        if not positions and g["count"]:
            return Fraction(0)
        last_slot.append(positions[-1] if positions else -1)
    total = Fraction(0)

    leg_e = {spec.label: spec.e for spec in ctx.problem.legs}

    def vertex_value(vi: int, leg_labels: tuple[int, ...]) -> tuple[Fraction, object]:
        vx = vertices[vi]
        classes = delta_by_label if vx.side == "X1" else rho_by_label
        root_classes = {lab: classes[lab] for lab in vx.block}
        memo_key = (
            vx.side,
            vx.genus,
            vx.weight.exponents,
            vx.block,
            vx.fc,
            tuple(sorted(root_classes.items())),
            tuple(
                sorted(
                    (leg_e[lab], ctx.by_label[lab].m, ctx.by_label[lab].class_id)
                    for lab in leg_labels
                )
            ),
        )
        if collect is None and emit is None and memo_key in ctx.component_memo:
            return ctx.component_memo[memo_key]
        graph = _vertex_graph(vx, leg_labels, ctx.problem)
        value, was_missing = ctx.component_value(
            vx.side, graph, root_classes, table, collect
        )
        leg_ins = {lab: ctx.by_label[lab] for lab in leg_labels}
        key = None
        if emit is not None:
            key = CorrelatorKey.for_component(vx.side, graph, leg_ins, root_classes)
        result = (value, key, was_missing)
        if collect is None and emit is None:
            ctx.component_memo[memo_key] = result
        return result

    def rec(vi: int, remaining: list[int], acc_value: Fraction, acc_mult: int, placed: list):
        nonlocal total
        if vi == nv:
            if any(remaining):
                return
            sign = 1
            if ctx.any_odd_leg or _any_odd_root(ctx, delta_by_label, rho_by_label):
                sign = _structure_sign(ctx, vertices, placed, delta_by_label, rho_by_label)
            term_value = sign * coeff * expansion_coeff * acc_mult * acc_value
            total += term_value
            if emit is not None:
                emit(
                    structure,
                    placed,
                    delta_by_label,
                    rho_by_label,
                    sign,
                    coeff,
                    expansion_coeff,
                    acc_mult,
                )
            return
        vx = vertices[vi]
        choices_per_group = []
        for gi, g in enumerate(groups):
            if g["side"] not in (None, vx.side):
                choices_per_group.append((0,))
            elif vi == last_slot[gi]:
                choices_per_group.append((remaining[gi],))
            else:
                choices_per_group.append(tuple(range(remaining[gi] + 1)))
        for counts in itertools.product(*choices_per_group):
            labels: list[int] = []
            mult = acc_mult
            new_remaining = list(remaining)
            for gi, (g, take) in enumerate(zip(groups, counts)):
                if take:
                    start = g["count"] - remaining[gi]
                    labels += g["labels"][start : start + take]
                    mult *= math.comb(remaining[gi], take)
                    new_remaining[gi] -= take
            value, key, was_missing = vertex_value(vi, tuple(sorted(labels)))
            if value == 0 and collect is None and not was_missing:
                # a genuine zero kills the whole branch; missing keys keep the
                # walk alive so the error can list every absent key
                continue
            placed.append((vi, tuple(sorted(labels)), key, value))
            rec(vi + 1, new_remaining, acc_value * value, mult, placed)
            placed.pop()

    rec(0, [g["count"] for g in groups], Fraction(1), 1, [])
    return total


def _any_odd_root(ctx, delta_by_label, rho_by_label) -> bool:
    return any(
        ctx.delta_parity(cid).is_odd for cid in delta_by_label.values()
    ) or any(ctx.rho_parity[cid].is_odd for cid in rho_by_label.values())


def _structure_sign(ctx, vertices, placed, delta_by_label, rho_by_label) -> int:
    left, right = [], []
    for vi, labels, _, _ in placed:
        vx = vertices[vi]
        entry = (labels, vx.block)
        (left if vx.side == "X1" else right).append(entry)
    delta_par = {lab: ctx.delta_parity(cid) for lab, cid in delta_by_label.items()}
    rho_par = {lab: ctx.rho_parity[rho_by_label[lab]] for lab in rho_by_label}
    return _grouping_sign(
        ctx.leg_parity,
        sorted(delta_by_label),
        delta_par,
        rho_par,
        left,
        right,
    )


# -- public operations --------------------------------------------------------


def needed_keys(
    problem: DegenerationProblem,
    insertions: Sequence[Insertion],
) -> list[CorrelatorKey]:
    """Every key the evaluator will look up, deduplicated and sorted."""
    ctx = _Context(problem, insertions, "standard_dual")
    keys: set[CorrelatorKey] = set()
    _walk_terms(ctx, None, MINIMAL_TWIST, collect=keys)
    return sorted(keys, key=lambda k: k.sort_token())


def evaluate_degeneration(
    problem: DegenerationProblem,
    insertions: Sequence[Insertion],
    table: InvariantTable,
    rule: TwistingChoice = MINIMAL_TWIST,
    convention: str = "standard_dual",
    with_terms: bool = False,
) -> EvaluationResult:
    """Evaluate the splitting sum against the table, exactly.

    Identical even-parity legs are aggregated, so the reported terms carry a
    representative splitting and its multiplicity.  Missing table keys abort
    the run with the full list of absent keys.
    """
    ctx = _Context(problem, insertions, convention)
    terms: list[EvalTerm] = []
    emit = None
    if with_terms:

        def emit(structure, placed, delta_by_label, rho_by_label, sign, coeff, exp_coeff, mult):
            assignment = {}
            for vi, labels, _, _ in placed:
                vx = _structure_vertices(structure)[vi]
                for lab in labels:
                    assignment[lab] = (vx.side, vx.position)
            splitting = structure.build_splitting(assignment, problem.legs)
            left = tuple(
                (key, value)
                for vi, _, key, value in placed
                if key is not None and key.side == "X1"
            )
            right = tuple(
                (key, value)
                for vi, _, key, value in placed
                if key is not None and key.side == "X2"
            )
            terms.append(
                EvalTerm(
                    splitting=splitting,
                    multiplicity=mult,
                    delta_choice=tuple(sorted(delta_by_label.items())),
                    dual_choice=tuple(sorted(rho_by_label.items())),
                    sign=sign,
                    coefficient=coeff,
                    expansion_coefficient=exp_coeff,
                    left=left,
                    right=right,
                )
            )

    value = _walk_terms(ctx, table, rule, emit=emit)
    ctx.raise_if_missing()
    return EvaluationResult(
        value=value,
        convention=convention,
        twisting=rule.describe(),
        terms=tuple(terms) if with_terms else None,
    )


def splitting_inner_sum(
    problem: DegenerationProblem,
    splitting: Splitting,
    insertions: Sequence[Insertion],
    table: InvariantTable,
    convention: str = "standard_dual",
) -> Fraction:
    """The basis sum of one explicit splitting, without its coefficient.

    Multiplying by prod(c)/|M|! and summing over all splittings reproduces
    evaluate_degeneration; multiplying by prod(c)/|Eq| and summing over orbit
    representatives is the other normalization of the same sum.
    """
    ctx = _Context(problem, insertions, convention)
    m_labels = splitting.m_labels
    f_of = {lab: splitting.xi1.root_by_label(lab).f for lab in m_labels}
    delta_spaces = [ctx.admissible.get(f_of[lab], []) for lab in m_labels]
    total = Fraction(0)
    for delta_choice in itertools.product(*delta_spaces):
        delta_by_label = dict(zip(m_labels, delta_choice))
        rho_spaces = []
        for lab in m_labels:
            rho_spaces.append(
                [
                    (cid, w)
                    for cid, w in ctx.expansion[delta_by_label[lab]]
                    if ctx.divisor.sector_of(cid).band_order == f_of[lab]
                ]
            )
        for rho_choice in itertools.product(*rho_spaces):
            rho_by_label = {lab: cid for lab, (cid, _) in zip(m_labels, rho_choice)}
            weight = Fraction(1)
            for _, w in rho_choice:
                weight *= w
            product = weight
            components = []
            for side, graph in (("X1", splitting.xi1), ("X2", splitting.xi2)):
                classes = delta_by_label if side == "X1" else rho_by_label
                for comp_ids in graph.component_partition():
                    comp = graph.subgraph(comp_ids)
                    root_classes = {lab: classes[lab] for lab in comp.root_labels()}
                    value, _ = ctx.component_value(side, comp, root_classes, table)
                    product *= value
                    components.append((side, comp))
            if product != 0:
                delta_par = {
                    lab: ctx.delta_parity(cid) for lab, cid in delta_by_label.items()
                }
                rho_par = {
                    lab: ctx.rho_parity[rho_by_label[lab]] for lab in rho_by_label
                }
                left = [
                    (c.leg_labels(), c.root_labels())
                    for s, c in components
                    if s == "X1"
                ]
                right = [
                    (c.leg_labels(), c.root_labels())
                    for s, c in components
                    if s == "X2"
                ]
                sign = _grouping_sign(
                    ctx.leg_parity, list(m_labels), delta_par, rho_par, left, right
                )
                total += sign * product
    ctx.raise_if_missing()
    return total


def evaluate_disconnected(
    graph: ModularGraph,
    leg_insertions: Mapping[int, Insertion],
    root_classes: Mapping[int, str],
    table: InvariantTable,
    problem: DegenerationProblem,
    side: str = "X1",
) -> Fraction:
    """Signed product of connected correlators over the components.

    Components are ordered by least label; each must carry at least one leg
    or root.
    """
    if set(leg_insertions) != set(graph.leg_labels()):
        raise DegenkitError("leg insertions must cover the graph legs")
    if set(root_classes) != set(graph.root_labels()):
        raise DegenkitError("root classes must cover the graph roots")
    if problem.ambient is None:
        raise DegenkitError("problem must carry an ambient catalog")
    comps = []
    for comp_ids in graph.component_partition():
        comp = graph.subgraph(comp_ids)
        if not comp.legs and not comp.roots:
            raise DegenkitError(
                "unsupported input: a component carries no legs and no roots"
            )
        comps.append(comp)
    amb, div = problem.ambient, problem.divisor
    leg_par = {
        lab: amb.parity_of(ins.class_id) for lab, ins in leg_insertions.items()
    }
    root_par = {lab: div.parity_of(cid) for lab, cid in root_classes.items()}
    src = [("leg", lab) for lab in sorted(leg_par)] + [
        ("root", lab) for lab in sorted(root_par)
    ]
    parities = [
        leg_par[lab] if kind == "leg" else root_par[lab] for kind, lab in src
    ]
    index = {tok: i for i, tok in enumerate(src)}
    ordered = sorted(
        comps,
        key=lambda c: min(list(c.leg_labels()) + list(c.root_labels())),
    )
    tgt = []
    for comp in ordered:
        tgt += [("leg", lab) for lab in comp.leg_labels()]
        tgt += [("root", lab) for lab in comp.root_labels()]
    sign = koszul_sign([index[tok] for tok in tgt], parities)
    missing: set[CorrelatorKey] = set()
    product = Fraction(sign)
    for comp in ordered:
        rc = {lab: root_classes[lab] for lab in comp.root_labels()}
        value, _ = _component_value(
            problem, dict(leg_insertions), side, comp, rc, table, missing
        )
        product *= value
    if missing:
        raise MissingKeysError(missing)
    return product

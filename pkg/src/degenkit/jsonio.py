"""JSON round-trips for every externally visible type.

All rationals travel as "p/q" with positive denominator and the fraction in
lowest terms; arrays are emitted in canonical order so identical inputs give
byte-identical outputs.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .algebra import BasisClass, Parity, Sector, SectorCatalog
from .correlator import CorrelatorKey, EvaluationResult, Insertion, InvariantTable
from .errors import DegenkitError
from .graphs import (
    CurveClass,
    CurveClassMonoid,
    Generator,
    Leg,
    ModularGraph,
    Root,
    Vertex,
    canonical_json,
    graph_from_canonical,
    rank_relabeled,
)
from .splitting import DegenerationProblem, LegSpec, Splitting
from .twisting import TwistingChoice


def fraction_to_str(x: Fraction) -> str:
    x = Fraction(x)
    return "%d/%d" % (x.numerator, x.denominator)


def fraction_from_str(s: str | int) -> Fraction:
    if isinstance(s, int):
        return Fraction(s)
    if not isinstance(s, str):
        raise DegenkitError("expected a rational string, got %r" % (s,))
    return Fraction(s.strip())


# -- catalogs -----------------------------------------------------------------


def catalog_to_dict(cat: SectorCatalog) -> dict:
    out = {
        "sectors": [
            {"id": s.id, "band_order": s.band_order, "involution_image": s.involution_image}
            for s in cat.sectors
        ],
        "basis": [
            {"id": b.id, "sector": b.sector, "parity": b.parity.value}
            for b in cat.basis
        ],
        "pairing": [[fraction_to_str(x) for x in row] for row in cat.pairing],
    }
    if any(
        cat.basis_involution[b.id] != (b.id, 1) for b in cat.basis
    ):
        out["basis_involution"] = [
            {"id": bid, "image": img, "sign": sign}
            for bid, (img, sign) in sorted(cat.basis_involution.items())
        ]
    return out


def catalog_from_dict(data: dict) -> SectorCatalog:
    inv = None
    if "basis_involution" in data:
        inv = {
            row["id"]: (row["image"], int(row["sign"]))
            for row in data["basis_involution"]
        }
    return SectorCatalog(
        sectors=tuple(
            Sector(s["id"], int(s["band_order"]), s["involution_image"])
            for s in data["sectors"]
        ),
        basis=tuple(
            BasisClass(b["id"], b["sector"], Parity(b["parity"]))
            for b in data["basis"]
        ),
        pairing=tuple(
            tuple(fraction_from_str(x) for x in row) for row in data["pairing"]
        ),
        basis_involution=inv,
    )


# -- monoid, classes, graphs --------------------------------------------------


def monoid_to_dict(monoid: CurveClassMonoid) -> dict:
    return {
        "generators": [
            {"id": g.id, "component": g.component, "d_degree": fraction_to_str(g.d_degree)}
            for g in monoid.generators
        ]
    }


def monoid_from_dict(data: dict) -> CurveClassMonoid:
    return CurveClassMonoid(
        tuple(
            Generator(g["id"], g["component"], fraction_from_str(g["d_degree"]))
            for g in data["generators"]
        )
    )


def curve_class_to_dict(cls: CurveClass) -> dict:
    return {g: e for g, e in cls.items()}


def graph_to_dict(graph: ModularGraph) -> dict:
    return {
        "vertices": [
            {"genus": v.genus, "weight": curve_class_to_dict(v.weight)}
            for v in graph.vertices
        ],
        "edges": [list(e) for e in graph.edges],
        "legs": [
            {"label": l.label, "e": l.e, "vertex": l.vertex} for l in graph.legs
        ],
        "roots": [
            {"label": r.label, "f": r.f, "c": r.c, "vertex": r.vertex}
            for r in graph.roots
        ],
    }


def graph_from_dict(data: dict) -> ModularGraph:
    return ModularGraph(
        vertices=tuple(
            Vertex(int(v["genus"]), CurveClass(v.get("weight", {})))
            for v in data.get("vertices", [])
        ),
        edges=tuple((int(a), int(b)) for a, b in data.get("edges", [])),
        legs=tuple(
            Leg(int(l["label"]), int(l["e"]), int(l["vertex"]))
            for l in data.get("legs", [])
        ),
        roots=tuple(
            Root(int(r["label"]), int(r["f"]), int(r["c"]), int(r["vertex"]))
            for r in data.get("roots", [])
        ),
    )


# -- problems -----------------------------------------------------------------


def problem_to_dict(problem: DegenerationProblem) -> dict:
    legs = []
    for spec in problem.legs:
        row: dict[str, Any] = {"label": spec.label, "e": spec.e}
        if spec.side is not None:
            row["side"] = spec.side
        legs.append(row)
    out = {
        "monoid": monoid_to_dict(problem.monoid),
        "genus": problem.genus,
        "legs": legs,
        "beta": curve_class_to_dict(problem.beta),
        "divisor": catalog_to_dict(problem.divisor),
        "c_max": problem.c_max,
    }
    if problem.ambient is not None:
        out["ambient"] = catalog_to_dict(problem.ambient)
    if problem.budget is not None:
        out["budget"] = problem.budget
    return out


def problem_from_dict(data: dict) -> DegenerationProblem:
    for field_name in ("monoid", "genus", "legs", "beta", "divisor", "c_max"):
        if field_name not in data:
            raise DegenkitError("problem file is missing the field %r" % field_name)
    return DegenerationProblem(
        monoid=monoid_from_dict(data["monoid"]),
        genus=int(data["genus"]),
        legs=tuple(
            LegSpec(int(l["label"]), int(l["e"]), l.get("side"))
            for l in data["legs"]
        ),
        beta=CurveClass(data["beta"]),
        divisor=catalog_from_dict(data["divisor"]),
        c_max=int(data["c_max"]),
        ambient=catalog_from_dict(data["ambient"]) if "ambient" in data else None,
        budget=int(data["budget"]) if "budget" in data else None,
    )


def insertions_from_list(problem: DegenerationProblem, data: list) -> list[Insertion]:
    by_label = {}
    for row in data:
        by_label[int(row["label"])] = Insertion(int(row.get("m", 0)), row["class"])
    out = []
    for spec in problem.legs:
        if spec.label not in by_label:
            raise DegenkitError("no insertion given for leg %d" % spec.label)
        out.append(by_label[spec.label])
    if len(by_label) != len(problem.legs):
        raise DegenkitError("insertions reference unknown leg labels")
    return out


def insertions_to_list(problem: DegenerationProblem, insertions) -> list:
    return [
        {"label": spec.label, "m": ins.m, "class": ins.class_id}
        for spec, ins in zip(problem.legs, insertions)
    ]


# -- twisting -----------------------------------------------------------------


def twisting_from_obj(data) -> TwistingChoice:
    if isinstance(data, str):
        text = data.strip()
        if text == "lcm":
            return TwistingChoice("lcm")
        if text.endswith("*lcm"):
            return TwistingChoice("multiple", multiple=int(text[:-4]))
        raise DegenkitError("unknown twisting rule %r" % text)
    kind = data.get("rule", "lcm")
    if kind == "lcm":
        return TwistingChoice("lcm")
    if kind == "multiple":
        return TwistingChoice("multiple", multiple=int(data["k"]))
    if kind == "table":
        entries = []
        for row in data.get("entries", []):
            contacts = tuple(
                int(x) for x in str(row["multiset"]).split(",") if x.strip()
            )
            entries.append((contacts, int(row["value"])))
        return TwistingChoice("table", table=tuple(entries))
    raise DegenkitError("unknown twisting rule kind %r" % kind)


def twisting_to_obj(rule: TwistingChoice):
    if rule.kind == "lcm":
        return {"rule": "lcm"}
    if rule.kind == "multiple":
        return {"rule": "multiple", "k": rule.multiple}
    return {
        "rule": "table",
        "entries": [
            {"multiset": ",".join(str(c) for c in key), "value": value}
            for key, value in rule.table
        ],
    }


# -- splittings ---------------------------------------------------------------


def splitting_to_dict(s: Splitting) -> dict:
    return {
        "xi1": graph_to_dict(s.xi1),
        "xi2": graph_to_dict(s.xi2),
        "m_labels": list(s.m_labels),
    }


def splitting_from_dict(data: dict) -> Splitting:
    return Splitting(
        graph_from_dict(data["xi1"]),
        graph_from_dict(data["xi2"]),
        tuple(int(x) for x in data["m_labels"]),
    )


def splittings_to_obj(splittings, orbit_list=None) -> list:
    """JSON array of graph pairs; with orbits, each row gains an annotation
    block naming its orbit, the stabilizer order, and the orbit size."""
    rows = [splitting_to_dict(s) for s in splittings]
    if orbit_list is not None:
        index = {s.canonical_pair(): i for i, s in enumerate(splittings)}
        for orbit_number, o in enumerate(orbit_list):
            rep_key = o.representative.canonical_pair()
            members = [
                i
                for s, i in (
                    (s, index[s.canonical_pair()]) for s in splittings
                )
                if _same_orbit(s, o)
            ]
            for i in members:
                rows[i]["orbit"] = {
                    "index": orbit_number,
                    "representative": index[rep_key] == i,
                    "stabilizer_order": o.stabilizer_order,
                    "size": o.size,
                }
    return rows


def _same_orbit(splitting, orbit) -> bool:
    import itertools

    m_labels = splitting.m_labels
    if m_labels != orbit.representative.m_labels:
        return False
    rep_key = orbit.representative.canonical_pair()
    for perm in itertools.permutations(m_labels):
        sigma = dict(zip(m_labels, perm))
        if splitting.relabeled(sigma).canonical_pair() == rep_key:
            return True
    return False


# -- correlator keys and tables -----------------------------------------------


def key_to_dict(key: CorrelatorKey) -> dict:
    return {
        "side": key.side,
        "graph": key.graph.decode(),
        "legs": [{"m": m, "class": cid} for m, cid in key.legs],
        "roots": [{"class": cid} for cid in key.roots],
    }


def key_from_dict(data: dict) -> CorrelatorKey:
    graph = data["graph"]
    parsed = graph_from_dict(graph) if isinstance(graph, dict) else graph_from_canonical(graph)
    graph_bytes = canonical_json(rank_relabeled(parsed)).encode()
    return CorrelatorKey(
        side=data["side"],
        graph=graph_bytes,
        legs=tuple((int(l["m"]), l["class"]) for l in data.get("legs", [])),
        roots=tuple(r["class"] for r in data.get("roots", [])),
    )


def table_to_obj(table: InvariantTable) -> list:
    return [
        {"key": key_to_dict(k), "value": fraction_to_str(v)}
        for k, v in table.items()
    ]


def table_from_obj(data: list) -> InvariantTable:
    table = InvariantTable()
    for row in data:
        table.set(key_from_dict(row["key"]), fraction_from_str(row["value"]))
    return table


def keys_to_obj(keys) -> list:
    return [{"key": key_to_dict(k)} for k in keys]


# -- evaluation results -------------------------------------------------------


def result_to_obj(result: EvaluationResult) -> dict:
    out = {
        "value": fraction_to_str(result.value),
        "convention": result.convention,
        "twisting": result.twisting,
    }
    if result.terms is not None:
        out["terms"] = [
            {
                "splitting": splitting_to_dict(t.splitting),
                "multiplicity": t.multiplicity,
                "delta_choice": [
                    {"label": lab, "class": cid} for lab, cid in t.delta_choice
                ],
                "dual_choice": [
                    {"label": lab, "class": cid} for lab, cid in t.dual_choice
                ],
                "sign": t.sign,
                "coefficient": fraction_to_str(t.coefficient),
                "expansion_coefficient": fraction_to_str(t.expansion_coefficient),
                "left": [
                    {"key": key_to_dict(k), "value": fraction_to_str(v)}
                    for k, v in t.left
                ],
                "right": [
                    {"key": key_to_dict(k), "value": fraction_to_str(v)}
                    for k, v in t.right
                ],
                "term_value": fraction_to_str(t.value),
            }
            for t in result.terms
        ]
    return out


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"

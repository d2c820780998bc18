"""Definability, essential expansions, pairwise tuple comparison, and the
expansion graph: an is-a taxonomy of core-characterization classes around
a unit.

All decision operations route through the canonical characterization
rather than the core: the two are hom-equivalent, so their instance sets
agree, and the canonical one is cheaper to build.
"""

from __future__ import annotations

import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .characterize import _can_from_tuples, build_can
from .errors import MixedArity, OverlapWithUnit, TupleSpaceTooLarge
from .formulas import Formula, to_text
from .homs import (
    FormulaClass,
    canonical_class,
    core_of_formula,
    equivalent,
    instances,
    maps_to,
    tuple_membership,
)
from .kb import ConstTuple, SelectiveKB, Unit, validate_unit


def is_definable(unit: Unit, kb: SelectiveKB, budget: int | None = None) -> bool:
    """Does some explanation have exactly this unit as its instance set?

    Equivalently: no tuple outside the unit is an instance of its
    canonical characterization.
    """
    can = build_can(unit, kb)
    space = itertools.product(sorted(kb.dataset.domain), repeat=unit.arity)
    return not any(
        tau not in unit.tuples and tuple_membership(can, kb, tau, budget)
        for tau in space
    )


def ess_member(
    unit: Unit, kb: SelectiveKB, tau: ConstTuple, budget: int | None = None
) -> bool:
    """Is tau in the essential expansion: one pinned hom search of the
    canonical characterization into tau's summary."""
    return tuple_membership(build_can(unit, kb), kb, tuple(tau), budget)


def ess_set(
    unit: Unit, kb: SelectiveKB, budget: int | None = None, threads: int = 1
) -> set[ConstTuple]:
    """The smallest definable superset of the unit: the instance set of
    its canonical characterization."""
    return instances(build_can(unit, kb), kb, budget, threads)


def _extended(unit: Unit, kb: SelectiveKB, tau: ConstTuple) -> Unit:
    if len(tau) != unit.arity:
        raise MixedArity(
            f"tuple arity {len(tau)} does not match the unit arity {unit.arity}"
        )
    return validate_unit(unit.tuples | {tuple(tau)}, kb.dataset)


def _check_disjoint(unit: Unit, tau: ConstTuple, tau2: ConstTuple):
    for t in (tuple(tau), tuple(tau2)):
        if t in unit.tuples:
            raise OverlapWithUnit(f"comparison tuple {t!r} belongs to the unit")


def gad1(
    kb: SelectiveKB,
    unit: Unit,
    tau: ConstTuple,
    tau2: ConstTuple,
    budget: int | None = None,
) -> bool:
    """Does tau fall inside the essential expansion of unit + tau2?"""
    _check_disjoint(unit, tau, tau2)
    return ess_member(_extended(unit, kb, tau2), kb, tuple(tau), budget)


def gad2(
    kb: SelectiveKB,
    unit: Unit,
    tau: ConstTuple,
    tau2: ConstTuple,
    budget: int | None = None,
) -> bool:
    """Does tau2 fall inside the essential expansion of unit + tau?"""
    _check_disjoint(unit, tau, tau2)
    return ess_member(_extended(unit, kb, tau), kb, tuple(tau2), budget)


PREC = "prec"
PREC_INV = "prec_inv"
SIM = "sim"
INC = "inc"


def compare(
    kb: SelectiveKB,
    unit: Unit,
    tau: ConstTuple,
    tau2: ConstTuple,
    budget: int | None = None,
) -> str:
    """How tau's shared properties with the unit relate to tau2's.

    sim: both gadgets accept (equal essential expansions); prec: only the
    first accepts (tau is the more specific side); prec_inv: only the
    second; inc: neither (incomparable expansions).
    """
    g1 = gad1(kb, unit, tau, tau2, budget)
    g2 = gad2(kb, unit, tau, tau2, budget)
    if g1 and g2:
        return SIM
    if g1:
        return PREC
    if g2:
        return PREC_INV
    return INC


# ---------------------------------------------------------------------------
# Expansion graph


@dataclass(frozen=True)
class ExpansionNode:
    """One core-characterization class with its instance bookkeeping."""

    core: Formula
    instance_set: frozenset[ConstTuple]
    direct: frozenset[ConstTuple]

    @property
    def formula_class(self) -> FormulaClass:
        return FormulaClass(self.core)


@dataclass(frozen=True)
class ExpansionGraph:
    """Nodes, Hasse arcs of the hom-order, and direct-instance labels.

    Arcs point from the more specific class toward the immediately more
    general one; the unit's own class is the unique source.
    """

    nodes: tuple[ExpansionNode, ...]
    arcs: frozenset[tuple[int, int]]
    source: int

    def sorted_arcs(self) -> list[tuple[int, int]]:
        return sorted(self.arcs)

    def predecessors(self, j: int) -> list[int]:
        return sorted(i for (i, jj) in self.arcs if jj == j)

    def to_json_dict(self) -> dict:
        return {
            "source": self.source,
            "nodes": [
                {
                    "id": i,
                    "core": to_text(n.core),
                    "instances": [list(t) for t in sorted(n.instance_set)],
                    "direct_instances": [list(t) for t in sorted(n.direct)],
                    "is_source": i == self.source,
                }
                for i, n in enumerate(self.nodes)
            ],
            "arcs": [list(a) for a in self.sorted_arcs()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"

    def to_dot(self) -> str:
        def esc(s: str) -> str:
            return s.replace("\\", "\\\\").replace('"', '\\"')

        lines = ["digraph expansion {", "  node [shape=box];"]
        for i, n in enumerate(self.nodes):
            label = esc(to_text(n.core)) + "\\n" + esc(
                "{" + ", ".join("(" + ",".join(t) + ")" for t in sorted(n.direct)) + "}"
            )
            extra = ", peripheries=2" if i == self.source else ""
            lines.append(f'  n{i} [label="{label}"{extra}];')
        for i, j in self.sorted_arcs():
            lines.append(f"  n{i} -> n{j};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _class_of_tuple(args):
    unit, kb, tau, budget = args
    can = _can_from_tuples(sorted(unit.tuples | {tau}), kb)
    fingerprint = frozenset(instances(can, kb, budget))
    return tau, can, fingerprint


def build_expansion_graph(
    unit: Unit,
    kb: SelectiveKB,
    tuple_cap: int | None = 100_000,
    budget: int | None = None,
    threads: int = 1,
) -> ExpansionGraph:
    """Classify every tuple over the dataset domain against the unit.

    Tuples are grouped by the instance set of their extended canonical
    characterization (equal classes always share it), each group is
    confirmed hom-equivalent to its representative, arcs are the cover
    relation of the hom-order on class cores, and direct instances follow
    from subtracting each node's arc predecessors.
    """
    n = unit.arity
    consts = sorted(kb.dataset.domain)
    if tuple_cap is not None and len(consts) ** n > tuple_cap:
        raise TupleSpaceTooLarge(
            f"{len(consts)}^{n} candidate tuples exceed the cap {tuple_cap}",
            cap=tuple_cap,
        )
    space = [tuple(t) for t in itertools.product(consts, repeat=n)]

    jobs = [(unit, kb, tau, budget) for tau in space]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_class_of_tuple, jobs, chunksize=4))
    else:
        results = [_class_of_tuple(j) for j in jobs]

    # group by instance fingerprint, then confirm by hom-equivalence
    groups: dict[frozenset, list[tuple[ConstTuple, Formula]]] = {}
    for tau, can, fingerprint in results:
        groups.setdefault(fingerprint, []).append((tau, can))

    classes: list[tuple[frozenset, Formula]] = []
    for fingerprint in sorted(groups, key=lambda f: sorted(f)):
        members = groups[fingerprint]
        reps: list[Formula] = []
        for _tau, can in members:
            if not any(equivalent(can, rep, budget) for rep in reps):
                reps.append(can)
        if len(reps) != 1:
            raise AssertionError(
                "tuples with equal instance sets landed in different classes"
            )
        classes.append((fingerprint, reps[0]))

    cores = [core_of_formula(can, budget) for _fp, can in classes]

    k = len(cores)
    reaches = [[False] * k for _ in range(k)]
    for i, j in itertools.permutations(range(k), 2):
        reaches[i][j] = maps_to(cores[j], cores[i], budget)
    arcs = {
        (i, j)
        for i in range(k)
        for j in range(k)
        if i != j
        and reaches[i][j]
        and not any(
            h != i and h != j and reaches[i][h] and reaches[h][j] for h in range(k)
        )
    }

    direct: list[frozenset] = []
    for j in range(k):
        preds = {i for (i, jj) in arcs if jj == j}
        covered = set().union(*(classes[i][0] for i in preds)) if preds else set()
        direct.append(frozenset(classes[j][0] - covered))

    source_class = canonical_class(
        _can_from_tuples(unit.sorted_tuples(), kb), budget
    )
    source_candidates = [
        i for i in range(k) if FormulaClass(cores[i]) == source_class
    ]
    assert len(source_candidates) == 1, "the unit's own class must appear once"
    source = source_candidates[0]

    graph = ExpansionGraph(
        nodes=tuple(
            ExpansionNode(core=cores[i], instance_set=classes[i][0], direct=direct[i])
            for i in range(k)
        ),
        arcs=frozenset(arcs),
        source=source,
    )
    _check_invariants(graph, unit, kb, space, budget)
    return graph


def _check_invariants(
    graph: ExpansionGraph, unit: Unit, kb: SelectiveKB, space, budget
):
    k = len(graph.nodes)
    # acyclicity by depth-first search over arcs
    succ = {i: [] for i in range(k)}
    for i, j in graph.arcs:
        succ[i].append(j)
    state = [0] * k

    def visit(i):
        state[i] = 1
        for j in succ[i]:
            if state[j] == 1:
                raise AssertionError("expansion graph has a cycle")
            if state[j] == 0:
                visit(j)
        state[i] = 2

    for i in range(k):
        if state[i] == 0:
            visit(i)

    seen: set[ConstTuple] = set()
    total = 0
    for node in graph.nodes:
        total += len(node.direct)
        seen |= node.direct
    assert total == len(space) and seen == set(space), (
        "direct instances must partition the tuple space"
    )

    incoming = {j for (_i, j) in graph.arcs}
    sources = [i for i in range(k) if i not in incoming]
    assert sources == [graph.source], "exactly one source node expected"

    ess = frozenset(ess_set(unit, kb, budget))
    assert graph.nodes[graph.source].direct == ess, (
        "the source's direct instances must equal the essential expansion"
    )

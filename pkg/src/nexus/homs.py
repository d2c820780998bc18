"""Constant-preserving homomorphism search and everything built on it:
formula evaluation over datasets, instance sets over selective KBs, the
hom-order between formulas, equivalence, isomorphism, and formula cores.

The kernel is a backtracking search over the source variables in
most-constrained-first order with forward checking against per-predicate
atom indexes.  All orderings are fixed (lexicographic tie-breaks, sorted
candidate values) so results are reproducible.
"""

from __future__ import annotations

import itertools
import sys
from collections.abc import Iterable, Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import ArityMismatch, BudgetExceeded
from .formulas import Formula, canonical_rename
from .kb import Atom, ConstTuple, Dataset, SelectiveKB, Var, is_var, term_key

DEFAULT_BUDGET = 10_000_000

# search depth equals the number of source variables, which can reach the
# thousands for product formulas
sys.setrecursionlimit(max(sys.getrecursionlimit(), 100_000))


class _Budget:
    __slots__ = ("left", "cap")

    def __init__(self, cap: int):
        self.cap = cap
        self.left = cap

    def spend(self):
        self.left -= 1
        if self.left < 0:
            raise BudgetExceeded(
                f"homomorphism search exceeded {self.cap} nodes", cap=self.cap
            )


@dataclass(frozen=True)
class HomProblem:
    """A constant-preserving homomorphism search instance.

    ``pinned`` may force variables to required images; the identity on
    every source constant is implied and need not be listed.
    """

    source: frozenset[Atom]
    target: frozenset[Atom]
    pinned: Mapping = field(default_factory=dict)

    def __post_init__(self):
        for k, v in self.pinned.items():
            if not is_var(k) and k != v:
                raise ArityMismatch(f"constant {k!r} pinned away from itself")


def find_hom(problem: HomProblem, budget: int | None = None):
    """Total map extending the pins that preserves every source atom, or
    None.  Deterministic: first solution under the fixed orderings."""
    return _search(problem.source, problem.target, dict(problem.pinned), budget)


def _target_index(target_atoms: Iterable[Atom]):
    index: dict[str, list[tuple]] = {}
    domain = set()
    for a in target_atoms:
        index.setdefault(a.pred, []).append(a.args)
        domain.update(a.args)
    for p in index:
        index[p].sort(key=lambda t: tuple(term_key(x) for x in t))
    return index, domain


def _atom_supports(atom: Atom, assignment: dict, index: dict):
    """Target tuples compatible with the currently fixed arguments.

    Returns None when the atom cannot be satisfied, otherwise a dict
    mapping each still-unassigned variable of the atom to its supported
    values (empty dict when the atom is fully checked).
    """
    tuples = index.get(atom.pred)
    if not tuples:
        return None
    fixed = []
    open_positions: dict[Var, list[int]] = {}
    for pos, t in enumerate(atom.args):
        if is_var(t) and t not in assignment:
            open_positions.setdefault(t, []).append(pos)
        else:
            fixed.append((pos, assignment.get(t, t) if is_var(t) else t))
    arity = len(atom.args)
    supports = {v: set() for v in open_positions}
    found = False
    for tt in tuples:
        if len(tt) != arity:
            continue
        if any(tt[p] != val for p, val in fixed):
            continue
        ok = True
        for v, positions in open_positions.items():
            first = tt[positions[0]]
            if any(tt[p] != first for p in positions[1:]):
                ok = False
                break
        if not ok:
            continue
        found = True
        for v, positions in open_positions.items():
            supports[v].add(tt[positions[0]])
    if not found:
        return None
    return supports


def _search(
    source_atoms: Iterable[Atom],
    target_atoms: Iterable[Atom],
    pins: dict,
    budget: int | None = None,
    injective: bool = False,
):
    source = sorted(set(source_atoms), key=Atom.key)
    index, target_domain = _target_index(target_atoms)
    meter = _Budget(DEFAULT_BUDGET if budget is None else budget)

    assignment: dict = {}
    for a in source:
        for t in a.args:
            if not is_var(t):
                assignment[t] = t
    for k, v in pins.items():
        if assignment.get(k, v) != v:
            return None
        assignment[k] = v
    if any(v not in target_domain for v in assignment.values()):
        return None
    if injective:
        used = set(assignment.values())
        if len(used) != len(assignment):
            return None

    by_var: dict[Var, list[Atom]] = {}
    variables = []
    for a in source:
        for t in a.args:
            if is_var(t) and t not in assignment:
                if t not in by_var:
                    by_var[t] = []
                    variables.append(t)
                if a not in by_var[t]:
                    by_var[t].append(a)

    # root pass: every atom must have support, var domains start narrowed
    domains: dict[Var, set] = {v: None for v in variables}
    for a in source:
        supports = _atom_supports(a, assignment, index)
        if supports is None:
            return None
        for v, values in supports.items():
            domains[v] = set(values) if domains[v] is None else domains[v] & values
    for v in variables:
        if domains[v] is None:
            domains[v] = set(target_domain)
        if injective:
            domains[v] = domains[v] - set(assignment.values())
        if not domains[v]:
            return None

    def propagate(var: Var, domains_now: dict):
        """Forward check the atoms of `var`; returns updated domains or None."""
        new_domains = domains_now
        for a in by_var[var]:
            supports = _atom_supports(a, assignment, index)
            if supports is None:
                return None
            for u, values in supports.items():
                narrowed = new_domains[u] & values
                if not narrowed:
                    return None
                if len(narrowed) != len(new_domains[u]):
                    if new_domains is domains_now:
                        new_domains = dict(domains_now)
                    new_domains[u] = narrowed
        return new_domains

    unassigned = set(variables)

    def backtrack(domains_now: dict):
        if not unassigned:
            return True
        var = min(unassigned, key=lambda u: (len(domains_now[u]), u.name))
        unassigned.discard(var)
        values = sorted(domains_now[var], key=term_key)
        for val in values:
            meter.spend()
            if injective and val in assignment.values():
                continue
            assignment[var] = val
            narrowed = propagate(var, domains_now)
            if narrowed is not None:
                if injective:
                    narrowed = dict(narrowed)
                    for u in unassigned:
                        narrowed[u] = narrowed[u] - {val}
                    if any(not narrowed[u] for u in unassigned):
                        del assignment[var]
                        continue
                if backtrack(narrowed):
                    return True
            del assignment[var]
        unassigned.add(var)
        return False

    if backtrack(domains):
        return dict(assignment)
    return None


# ---------------------------------------------------------------------------
# Formula-level operations


def _free_pins(phi1: Formula, phi2: Formula):
    """Pins aligning the i-th free variable of phi1 with phi2's, or None
    when a repeated head variable would need two images."""
    pins: dict = {}
    for v1, v2 in zip(phi1.free_vars, phi2.free_vars):
        if pins.get(v1, v2) != v2:
            return None
        pins[v1] = v2
    return pins


def maps_to(phi1: Formula, phi2: Formula, budget: int | None = None) -> bool:
    """phi1 --> phi2: a constant-preserving hom aligning free variables."""
    if phi1.arity != phi2.arity:
        raise ArityMismatch(
            f"hom-order needs equal arities, got {phi1.arity} and {phi2.arity}"
        )
    pins = _free_pins(phi1, phi2)
    if pins is None:
        return False
    return _search(phi1.atoms, phi2.atoms, pins, budget) is not None


def equivalent(phi1: Formula, phi2: Formula, budget: int | None = None) -> bool:
    return maps_to(phi1, phi2, budget) and maps_to(phi2, phi1, budget)


def _domain_size(phi: Formula) -> int:
    return len({t for a in phi.atoms for t in a.args})


def is_isomorphic(phi1: Formula, phi2: Formula, budget: int | None = None) -> bool:
    """A bijective, free-variable-aligned, constant-preserving hom whose
    atom image is exactly the other atom set."""
    if phi1.arity != phi2.arity:
        return False
    if len(phi1.atoms) != len(phi2.atoms) or _domain_size(phi1) != _domain_size(phi2):
        return False
    if _signature(phi1) != _signature(phi2):
        return False
    pins = _free_pins(phi1, phi2)
    if pins is None:
        return False
    return _search(phi1.atoms, phi2.atoms, pins, budget, injective=True) is not None


def evaluate(phi: Formula, dataset: Dataset, budget: int | None = None):
    """The output of a formula over a dataset.

    Returns the set of tuples matched through the free variables, or a
    plain bool for arity-0 formulas.  A formula constant missing from
    the dataset is not an error; it simply produces an empty output.
    """
    if phi.arity == 0:
        return _search(phi.atoms, dataset.atoms, {}, budget) is not None
    distinct = phi.distinct_free_vars()
    index, _ = _target_index(dataset.atoms)
    candidates: list[list[str]] = []
    for v in distinct:
        dom = None
        for a in phi.atoms:
            if v not in a.args:
                continue
            supports = _atom_supports(a, {}, index)
            if supports is None:
                return set()
            if v in supports:
                dom = supports[v] if dom is None else dom & supports[v]
        dom = sorted(dom if dom is not None else dataset.domain)
        if not dom:
            return set()
        candidates.append(dom)
    out = set()
    for combo in itertools.product(*candidates):
        pins = dict(zip(distinct, combo))
        if _search(phi.atoms, dataset.atoms, pins, budget) is not None:
            by_var = dict(zip(distinct, combo))
            out.add(tuple(by_var[v] for v in phi.free_vars))
    return out


def tuple_membership(
    phi: Formula, kb: SelectiveKB, tau: ConstTuple, budget: int | None = None
) -> bool:
    """Is tau an instance of phi: one pinned hom search into its summary."""
    if len(tau) != phi.arity:
        raise ArityMismatch(f"tuple arity {len(tau)} != formula arity {phi.arity}")
    pins: dict = {}
    for v, c in zip(phi.free_vars, tau):
        if pins.get(v, c) != c:
            return False
        pins[v] = c
    summary = kb.summary(tau)
    return _search(phi.atoms, summary.atoms, pins, budget) is not None


def instances(
    phi: Formula,
    kb: SelectiveKB,
    budget: int | None = None,
    threads: int = 1,
) -> set[ConstTuple]:
    """All tuples over the dataset domain that the formula matches within
    their own summaries.  Always a subset of evaluate(phi, kb.dataset)."""
    if phi.arity < 1:
        raise ArityMismatch("instance sets need an open formula")
    space = list(itertools.product(sorted(kb.dataset.domain), repeat=phi.arity))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            hits = pool.map(
                lambda t: tuple_membership(phi, kb, t, budget), space, chunksize=16
            )
            return {t for t, hit in zip(space, hits) if hit}
    return {t for t in space if tuple_membership(phi, kb, t, budget)}


# ---------------------------------------------------------------------------
# Cores and equivalence classes


def core_of_formula(
    phi: Formula, budget: int | None = None, rename: bool = True
) -> Formula:
    """The minimal hom-equivalent sub-formula, canonically renamed.

    One pass over the atoms in sorted order: drop an atom whenever the
    current formula still maps into the remainder (the remainder always
    maps back, being a subset).  A single pass suffices because every
    intermediate formula stays equivalent to the input.  With
    ``rename=False`` the literal sub-formula is returned instead of its
    canonically renamed presentation.
    """
    if phi.arity < 1:
        raise ArityMismatch("cores are computed for open formulas")
    atoms = set(phi.atoms)
    free = set(phi.free_vars)
    pins = {v: v for v in free}
    for alpha in sorted(phi.atoms, key=Atom.key):
        if len(atoms) == 1:
            break
        candidate = atoms - {alpha}
        remaining_vars = {t for a in candidate for t in a.args if is_var(t)}
        if not free <= remaining_vars:
            continue
        if _search(atoms, candidate, dict(pins), budget) is not None:
            atoms = candidate
    out = Formula(phi.free_vars, atoms)
    return canonical_rename(out) if rename else out


def _signature(phi: Formula):
    """Invariant under isomorphism: head repetition pattern plus the
    multiset of atom shapes with constants spelled out."""
    first_seen: dict[Var, int] = {}
    pattern = []
    for v in phi.free_vars:
        pattern.append(first_seen.setdefault(v, len(first_seen)))
    shapes = sorted(
        (a.pred, tuple(("v",) if is_var(t) else ("c", t) for t in a.args))
        for a in phi.atoms
    )
    return (tuple(pattern), tuple(shapes), len(phi.vars))


class FormulaClass:
    """A hom-equivalence class keyed by a core representative.

    Two classes compare equal exactly when their representatives are
    hom-equivalent; the hash uses an isomorphism-invariant signature so
    equal classes never split across hash buckets.
    """

    __slots__ = ("representative", "_sig")

    def __init__(self, representative: Formula):
        self.representative = representative
        self._sig = _signature(representative)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FormulaClass):
            return NotImplemented
        if self._sig != other._sig:
            return False
        return equivalent(self.representative, other.representative)

    def __hash__(self) -> int:
        return hash(self._sig)

    def __repr__(self) -> str:
        return f"[{self.representative!r}]"


def canonical_class(phi: Formula, budget: int | None = None) -> FormulaClass:
    """Core plus deterministic renaming: a stable class representative."""
    return FormulaClass(core_of_formula(phi, budget))

"""Direct products of tuples and datasets, and the canonical
characterization pipeline built on them.

The canonical characterization of a unit is assembled from the direct
product of the summaries of its tuples: product constants over the unit's
columns become the free variables, remaining product constants become
either bound variables or (when all their parts coincide) the underlying
base constant, atoms over all-parts-equal free positions are additionally
cloned onto the base constant, and finally everything that does not
connect to the free variables is discarded.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass

from .errors import ArityConflict, MixedArity
from .formulas import Formula, canonical_rename, nearly_connected_part
from .homs import core_of_formula
from .kb import Atom, ConstTuple, Dataset, SelectiveKB, Unit, Var

PRODUCT_PREFIX = "d|"


@dataclass(frozen=True, slots=True)
class ProductConstant:
    """A constant of a direct product, one part per multiplied operand."""

    parts: tuple[str, ...]

    @property
    def name(self) -> str:
        return PRODUCT_PREFIX + "|".join(self.parts)

    @property
    def is_gene(self) -> bool:
        """All parts equal: the product constant shadows a base constant."""
        return len(set(self.parts)) == 1

    @classmethod
    def from_name(cls, name: str) -> "ProductConstant":
        assert name.startswith(PRODUCT_PREFIX)
        return cls(tuple(name[len(PRODUCT_PREFIX):].split("|")))

    def __repr__(self) -> str:
        return self.name


def product_tuples(tuples: Sequence[ConstTuple]) -> list[ProductConstant]:
    """Positionwise product: entry i collects the i-th constant of every
    tuple, in the given order."""
    if not tuples:
        raise MixedArity("product of zero tuples")
    arities = {len(t) for t in tuples}
    if len(arities) != 1:
        raise MixedArity(f"mixed arities {sorted(arities)} in tuple product")
    return [ProductConstant(tuple(t[i] for t in tuples)) for i in range(arities.pop())]


def iter_product_atoms(datasets: Sequence[Dataset]) -> Iterator[Atom]:
    """Atoms of the direct product, streamed in deterministic order.

    One atom per same-predicate combination across all operands; argument
    j of the result is the product constant of the operands' j-th
    arguments.
    """
    if not datasets:
        raise MixedArity("product of zero datasets")
    arities: dict[str, int] = {}
    for ds in datasets:
        for a in ds.atoms:
            if arities.setdefault(a.pred, a.arity) != a.arity:
                raise ArityConflict(
                    f"predicate {a.pred!r} has conflicting arities across operands",
                    predicate=a.pred,
                )
    grouped = [ds.by_pred() for ds in datasets]
    shared = sorted(set.intersection(*(set(g) for g in grouped)))
    for pred in shared:
        arity = arities[pred]
        pools = [sorted(g[pred], key=Atom.key) for g in grouped]
        for combo in itertools.product(*pools):
            args = tuple(
                ProductConstant(tuple(a.args[j] for a in combo)).name
                for j in range(arity)
            )
            yield Atom(pred, args)


def product_datasets(datasets: Sequence[Dataset]) -> Dataset:
    """Materialized direct product; a dataset again because every operand
    carries the top atoms of its whole domain."""
    return Dataset(iter_product_atoms(datasets))


# ---------------------------------------------------------------------------
# Canonical characterization


def _can_from_tuples(
    tuples: Sequence[ConstTuple], kb: SelectiveKB, stream: bool = False
) -> Formula:
    """The product construction for an explicitly ordered tuple sequence."""
    summaries = [kb.summary(t) for t in tuples]
    frees = product_tuples(tuples)
    free_names = {pc.name for pc in frees}

    if stream:
        product_atoms: Iterable[Atom] = iter_product_atoms(summaries)
    else:
        product_atoms = product_datasets(summaries).sorted_atoms()

    var_of: dict[str, Var] = {}

    def mapped(term: str):
        """The assembled formula's term for a product or base constant."""
        if not term.startswith(PRODUCT_PREFIX):
            return term
        hit = var_of.get(term)
        if hit is not None:
            return hit
        pc = ProductConstant.from_name(term)
        if term in free_names:
            out = Var("x" + term[1:])
        elif pc.is_gene:
            return pc.parts[0]
        else:
            out = Var("y" + term[1:])
        var_of[term] = out
        return out

    def expansions(term: str):
        """The clone set of an argument: a free all-parts-equal constant
        additionally spawns its base constant."""
        if term.startswith(PRODUCT_PREFIX) and term in free_names:
            pc = ProductConstant.from_name(term)
            if pc.is_gene:
                return (term, pc.parts[0])
        return (term,)

    atoms: set[Atom] = set()
    for raw in product_atoms:
        for combo in itertools.product(*(expansions(t) for t in raw.args)):
            atoms.add(Atom(raw.pred, tuple(mapped(t) for t in combo)))

    head = [mapped(pc.name) for pc in frees]
    assembled = Formula(head, atoms)
    return canonical_rename(nearly_connected_part(assembled))


def build_can(unit: Unit, kb: SelectiveKB, stream: bool = False) -> Formula:
    """The canonical characterization of a unit.

    The unit's tuples are ordered lexicographically before multiplying, so
    repeated runs produce the same formula.  With ``stream`` the product
    atoms are consumed one at a time instead of materializing the product
    dataset first; the output is identical.
    """
    return _can_from_tuples(unit.sorted_tuples(), kb, stream=stream)


def build_core_char(
    unit: Unit, kb: SelectiveKB, stream: bool = False, budget: int | None = None
) -> Formula:
    """The core characterization: the canonical one with every removable
    atom dropped."""
    return core_of_formula(build_can(unit, kb, stream=stream), budget)


def can_size_bound(unit: Unit, kb: SelectiveKB) -> int:
    """2^omega times the product of the summary sizes: an upper bound on
    the size of the canonical characterization."""
    bound = 2 ** kb.dataset.omega
    for t in unit.sorted_tuples():
        bound *= len(kb.summary(t))
    return bound

"""Atoms of the expression language and the process-wide atom table.

Atoms are immutable, hashable values.  Each distinct atom is interned once
and receives a small integer id; monomials refer to atoms by id.  The table
is append-only and guarded by a lock, so expressions can be shared across
threads.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from .expr import Expr


@dataclass(frozen=True)
class MultiIndex:
    """Per-axis offsets: derivative counts, or signed lattice shifts when ``shift``."""

    offsets: tuple[int, ...]
    shift: bool = False

    def __post_init__(self):
        object.__setattr__(self, "offsets", tuple(int(o) for o in self.offsets))
        if not self.shift and any(o < 0 for o in self.offsets):
            raise ValueError(f"derivative multi-index must be non-negative: {self.offsets}")

    @classmethod
    def zero(cls, naxes: int, shift: bool = False) -> MultiIndex:
        return cls((0,) * naxes, shift)

    @classmethod
    def unit(cls, axis: int, naxes: int, shift: bool = False, n: int = 1) -> MultiIndex:
        offs = [0] * naxes
        offs[axis] = n
        return cls(tuple(offs), shift)

    @property
    def order(self) -> int:
        return sum(abs(o) for o in self.offsets)

    @property
    def naxes(self) -> int:
        return len(self.offsets)

    def is_zero(self) -> bool:
        return not any(self.offsets)

    def __len__(self):
        return len(self.offsets)

    def __iter__(self):
        return iter(self.offsets)

    def __getitem__(self, i):
        return self.offsets[i]

    def __add__(self, other: MultiIndex) -> MultiIndex:
        if len(other.offsets) != len(self.offsets):
            raise ValueError("multi-index length mismatch")
        return MultiIndex(tuple(a + b for a, b in zip(self.offsets, other.offsets)), self.shift)

    def __neg__(self) -> MultiIndex:
        if not self.shift:
            raise ValueError("only shift multi-indices can be negated")
        return MultiIndex(tuple(-a for a in self.offsets), True)

    def __sub__(self, other: MultiIndex) -> MultiIndex:
        return MultiIndex(tuple(a - b for a, b in zip(self.offsets, other.offsets)), self.shift)


class Atom:
    __slots__ = ()
    compound = False

    def sort_key(self) -> tuple:
        raise NotImplementedError


@dataclass(frozen=True)
class ImagUnit(Atom):
    def sort_key(self):
        return (0,)

    def __repr__(self):
        return "I"


@dataclass(frozen=True)
class Param(Atom):
    name: str
    real: bool = True
    conjugated: bool = False

    def sort_key(self):
        return (1, self.name, self.conjugated)


@dataclass(frozen=True)
class Independent(Atom):
    name: str
    axis: int

    def sort_key(self):
        return (2, self.axis, self.name)


@dataclass(frozen=True)
class Jet(Atom):
    """A dependent variable ``name`` at multi-index ``index`` (derivative or shift)."""

    name: str
    index: MultiIndex

    def sort_key(self):
        return (3, self.name, self.index.offsets)

    def with_index(self, index: MultiIndex) -> Jet:
        return Jet(self.name, index)


@dataclass(frozen=True)
class ArbJet(Atom):
    """An arbitrary function ``name`` (a gauge parameter) at a multi-index."""

    name: str
    index: MultiIndex

    def sort_key(self):
        return (4, self.name, self.index.offsets)

    def with_index(self, index: MultiIndex) -> ArbJet:
        return ArbJet(self.name, index)


def _expr_key(e: Expr) -> str:
    from .expr import structural_key

    return structural_key(e)


@dataclass(frozen=True)
class ExpAtom(Atom):
    """``exp(arg)``; arg is a single term with unit coefficient, the scale lives in the exponent."""

    arg: Any
    compound = True

    def sort_key(self):
        return (5, _expr_key(self.arg))


@dataclass(frozen=True)
class FuncAtom(Atom):
    func: str
    arg: Any
    compound = True

    def sort_key(self):
        return (6, self.func, _expr_key(self.arg))


@dataclass(frozen=True)
class PowAtom(Atom):
    base: Any
    exponent: Fraction
    compound = True

    def sort_key(self):
        return (7, _expr_key(self.base), self.exponent)


@dataclass(frozen=True)
class DenFactor(Atom):
    """An irreducible, primitive, sign-normalized polynomial used as a denominator factor."""

    key: frozenset
    poly: dict = field(compare=False, hash=False, repr=False)
    compound = True

    def sort_key(self):
        from .expr import Expr

        return (8, _expr_key(Expr._from_poly(self.poly)))


BASE_TYPES = (Param, Independent, Jet, ArbJet)
I_ID = 0


class _AtomTable:
    def __init__(self):
        self._lock = threading.Lock()
        self.atoms: list[Atom] = [ImagUnit()]
        self.ids: dict[Atom, int] = {self.atoms[0]: 0}
        self._keys: list[tuple | None] = [(0,)]
        self._deep: list[frozenset | None] = [frozenset()]

    def intern(self, atom: Atom) -> int:
        i = self.ids.get(atom)
        if i is not None:
            return i
        with self._lock:
            i = self.ids.get(atom)
            if i is None:
                i = len(self.atoms)
                self.atoms.append(atom)
                self._keys.append(None)
                self._deep.append(None)
                self.ids[atom] = i
        return i

    def __getitem__(self, i: int) -> Atom:
        return self.atoms[i]

    def key(self, i: int) -> tuple:
        k = self._keys[i]
        if k is None:
            k = self.atoms[i].sort_key()
            self._keys[i] = k
        return k

    def deep(self, i: int) -> frozenset:
        """Ids of the base atoms an atom depends on, looking through compound atoms."""
        d = self._deep[i]
        if d is None:
            a = self.atoms[i]
            if isinstance(a, BASE_TYPES):
                d = frozenset((i,))
            elif isinstance(a, ExpAtom) or isinstance(a, FuncAtom):
                d = a.arg.free_ids()
            elif isinstance(a, PowAtom):
                d = a.base.free_ids()
            elif isinstance(a, DenFactor):
                from .expr import Expr

                d = Expr._from_poly(a.poly).free_ids()
            else:
                d = frozenset()
            self._deep[i] = d
        return d


TABLE = _AtomTable()

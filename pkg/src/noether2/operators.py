"""Matrices of linear differential or difference operators with Expr coefficients."""

from __future__ import annotations

from types import ModuleType
from typing import Iterable, Mapping, Sequence

from .atoms import ArbJet, MultiIndex
from .expr import ZERO, Expr, as_expr, linear_coefficients

DIFFERENTIAL = "differential"
DIFFERENCE = "difference"


def calculus(kind: str) -> ModuleType:
    """The calculus module (continuous or lattice) implementing ``kind``."""
    if kind == DIFFERENTIAL:
        from . import continuous

        return continuous
    if kind == DIFFERENCE:
        from . import lattice

        return lattice
    raise ValueError(f"unknown operator kind {kind!r}")


class LinearOperator:
    """``rows x cols`` operator; entry ``(s, r)`` maps a multi-index J to the coefficient of D_J (or S_J)."""

    def __init__(self, rows: int, cols: int, kind: str, naxes: int, entries: Mapping | None = None):
        self.rows = rows
        self.cols = cols
        self.kind = kind
        self.naxes = naxes
        self.entries: dict = {}
        for (s, r), ent in (entries or {}).items():
            if not (0 <= s < rows and 0 <= r < cols):
                raise IndexError((s, r))
            clean = {}
            for J, c in ent.items():
                J = tuple(J.offsets) if isinstance(J, MultiIndex) else tuple(J)
                if len(J) != naxes:
                    raise ValueError(f"multi-index {J} does not have {naxes} axes")
                if kind == DIFFERENTIAL and any(j < 0 for j in J):
                    raise ValueError(f"negative derivative order in {J}")
                c = as_expr(c)
                if c:
                    clean[J] = clean.get(J, ZERO) + c
            clean = {J: c for J, c in clean.items() if c}
            if clean:
                self.entries[(s, r)] = clean

    @property
    def calc(self) -> ModuleType:
        return calculus(self.kind)

    def entry(self, s: int, r: int) -> dict:
        return self.entries.get((s, r), {})

    def row(self, s: int) -> list:
        return [self.entry(s, r) for r in range(self.cols)]

    def is_zero(self) -> bool:
        return not self.entries

    def apply(self, fs: Sequence) -> list:
        if len(fs) != self.cols:
            raise ValueError(f"expected {self.cols} arguments, got {len(fs)}")
        out = [ZERO] * self.rows
        for (s, r), ent in sorted(self.entries.items()):
            out[s] = out[s] + self.calc.apply_entry(ent, as_expr(fs[r]))
        return out

    def apply_adjoint(self, gs: Sequence) -> list:
        """Apply the formal adjoint (a ``cols x rows`` operator) directly."""
        if len(gs) != self.rows:
            raise ValueError(f"expected {self.rows} arguments, got {len(gs)}")
        out = [ZERO] * self.cols
        for (s, r), ent in sorted(self.entries.items()):
            out[r] = out[r] + self.calc.apply_adjoint_entry(ent, as_expr(gs[s]))
        return out

    def adjoint(self) -> LinearOperator:
        ents = {(r, s): self.calc.adjoint_entry(ent, self.naxes) for (s, r), ent in self.entries.items()}
        return LinearOperator(self.cols, self.rows, self.kind, self.naxes, ents)

    def __eq__(self, other):
        if not isinstance(other, LinearOperator):
            return NotImplemented
        return (self.rows, self.cols, self.kind, self.naxes, self.entries) == (
            other.rows,
            other.cols,
            other.kind,
            other.naxes,
            other.entries,
        )

    __hash__ = None

    def __repr__(self):
        return f"LinearOperator({self.rows}x{self.cols}, {self.kind}, {len(self.entries)} nonzero entries)"

    @classmethod
    def from_linear_rows(cls, rows: Iterable, family: Sequence[str], kind: str, naxes: int) -> LinearOperator:
        """Read an operator off expressions linear homogeneous in the ArbJets of ``family``.

        Row s is ``sum_r Op_sr(family[r])``.  Returns None when some row is not linear.
        """
        rows = [as_expr(x) for x in rows]
        index = {name: k for k, name in enumerate(family)}
        ents: dict = {}
        for s, e in enumerate(rows):
            if e.is_zero:
                continue
            split = linear_coefficients(e, family)
            if split is None:
                return None
            for atom, c in split.items():
                ent = ents.setdefault((s, index[atom.name]), {})
                J = atom.index.offsets
                ent[J] = ent.get(J, ZERO) + c
        return cls(len(rows), len(family), kind, naxes, ents)

    def as_rows(self, family: Sequence[str]) -> list:
        """Inverse of :meth:`from_linear_rows`: row expressions in the ArbJets of ``family``."""
        shift = self.kind == DIFFERENCE
        out = [ZERO] * self.rows
        for (s, r), ent in sorted(self.entries.items()):
            for J, c in sorted(ent.items()):
                out[s] = out[s] + c * Expr(ArbJet(family[r], MultiIndex(J, shift)))
        return out

"""Deterministic text form of expressions, reparseable by the ``.n2`` parser."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .atoms import TABLE, ArbJet, DenFactor, ExpAtom, FuncAtom, ImagUnit, Independent, Jet, Param, PowAtom


def _index_text(name, index, axes):
    offs = index.offsets
    if not any(offs):
        return name
    if index.shift or axes is None:
        return f"{name}[{','.join(str(o) for o in offs)}]"
    sub = "".join(axes[i] * o for i, o in enumerate(offs))
    if len(sub) == 1:
        return f"{name}_{sub}"
    if all(len(a) == 1 for a in axes):
        return f"{name}_{{{sub}}}"
    return f"{name}_{{{' '.join(axes[i] for i, o in enumerate(offs) for _ in range(o))}}}"


def atom_text(atom, axes: Sequence[str] | None = None) -> str:
    if isinstance(atom, ImagUnit):
        return "I"
    if isinstance(atom, Param):
        return f"conj({atom.name})" if atom.conjugated else atom.name
    if isinstance(atom, Independent):
        return atom.name
    if isinstance(atom, (Jet, ArbJet)):
        return _index_text(atom.name, atom.index, axes)
    if isinstance(atom, ExpAtom):
        return f"exp({to_text(atom.arg, axes)})"
    if isinstance(atom, FuncAtom):
        return f"{atom.func}({to_text(atom.arg, axes)})"
    if isinstance(atom, PowAtom):
        return f"(({to_text(atom.base, axes)})^({_frac(atom.exponent)}))"
    if isinstance(atom, DenFactor):
        from .expr import Expr

        return f"({to_text(Expr._from_poly(atom.poly), axes)})"
    raise TypeError(atom)


def _frac(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _power_text(base: str, e) -> str:
    if e == 1:
        return base
    if isinstance(e, int) and e > 0:
        return f"{base}^{e}"
    return f"{base}^({_frac(e)})"


def _factor_text(aid, e, axes) -> str:
    atom = TABLE[aid]
    if isinstance(atom, ExpAtom) and e != 1:
        return f"exp({to_text(atom.arg * e, axes)})"
    return _power_text(atom_text(atom, axes), e)


def _poly_text(n, axes) -> str:
    from .expr import _mono_key

    if not n:
        return "0"
    parts = []
    for m in sorted(n, key=_mono_key):
        c = Fraction(int(n[m].numerator), int(n[m].denominator))
        factors = sorted(((TABLE.key(m[k]), m[k], m[k + 1]) for k in range(0, len(m), 2)))
        body = "*".join(_factor_text(a, e, axes) for _, a, e in factors)
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if not body:
            text = _frac(mag)
        elif mag == 1:
            text = body
        else:
            text = f"{_frac(mag)}*{body}"
        parts.append((sign, text))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, text in parts[1:]:
        out += f" {sign} {text}"
    return out


def to_text(e, axes: Sequence[str] | None = None) -> str:
    """Canonical text; ``axes`` names derivative axes (jets print as ``u_x``), else ``u[1,0]``."""
    from .expr import as_expr

    e = as_expr(e)
    num = _poly_text(e._n, axes)
    if not e._d:
        return num
    pairs = sorted((TABLE.key(e._d[k]), e._d[k], e._d[k + 1]) for k in range(0, len(e._d), 2))
    den = "*".join(_power_text(atom_text(TABLE[f], axes), k) for _, f, k in pairs)
    if len(e._n) > 1:
        num = f"({num})"
    return f"{num}/({den})" if len(pairs) > 1 else f"{num}/{den}"

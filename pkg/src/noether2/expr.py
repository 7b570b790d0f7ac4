"""Canonical symbolic expressions.

An :class:`Expr` is stored as ``N / (D1**k1 * ... * Dm**km)`` where

* ``N`` is a Laurent polynomial with rational coefficients in the atoms
  (the imaginary unit is an atom reduced by ``I**2 = -1``; ``exp`` atoms
  carry their scale in a rational exponent, so ``exp(a)*exp(b)`` merges);
* each ``Dj`` is an irreducible, primitive, sign-normalized polynomial over
  the rationals that is free of ``I`` and of monomial content;
* no ``Dj`` divides ``N``.

Every constructor returns this form, so structural equality is equality of
rational functions and :func:`canonicalize` is the identity on values.
Transcendental atoms (``exp``, ``ln``, ``sin``, ``cos``, rational powers of
compound bases) are opaque coordinates whose arguments are themselves
canonical.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping

import gmpy2
import mpmath
from gmpy2 import mpq

from . import kernel as K
from .atoms import (
    BASE_TYPES,
    I_ID,
    TABLE,
    ArbJet,
    Atom,
    DenFactor,
    ExpAtom,
    FuncAtom,
    ImagUnit,
    Independent,
    Jet,
    Param,
    PowAtom,
)
from .errors import DivisionByZero, DomainError

FUNCTIONS = ("exp", "ln", "sin", "cos")
FLOAT_PREC = 113


def _coeff(x) -> mpq:
    if isinstance(x, bool):
        raise TypeError("booleans are not expression constants")
    if isinstance(x, int):
        return mpq(x)
    if type(x) is type(mpq(0)):
        return x
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, type(gmpy2.mpz(0))):
        return mpq(x)
    raise TypeError(f"cannot use {x!r} as an exact constant")


def _exponent(x):
    """Normalize an exponent to int or Fraction."""
    if isinstance(x, int):
        return x
    q = Fraction(int(x.numerator), int(x.denominator))
    return q.numerator if q.denominator == 1 else q


def _pairs(m):
    return [(m[k], m[k + 1]) for k in range(0, len(m), 2)]


def _mono_key(m):
    return tuple(sorted((TABLE.key(m[k]), m[k + 1]) for k in range(0, len(m), 2)))


class Expr:
    """Immutable canonical expression; build with :func:`const`, atoms and operators."""

    __slots__ = ("_n", "_d", "_h", "_free")

    def __init__(self, value=0):
        if isinstance(value, Expr):
            n, d = value._n, value._d
        elif isinstance(value, Atom):
            n, d = {(TABLE.intern(value), 1): mpq(1)}, ()
            if isinstance(value, ImagUnit):
                n = {(I_ID, 1): mpq(1)}
        else:
            c = _coeff(value)
            n, d = ({(): c} if c else {}), ()
        self._n = n
        self._d = d
        self._h = None
        self._free = None

    @classmethod
    def _raw(cls, n, d=()):
        obj = object.__new__(cls)
        obj._n = n
        obj._d = d
        obj._h = None
        obj._free = None
        return obj

    @classmethod
    def _from_poly(cls, n):
        return cls._raw(n, ())

    @classmethod
    def _make(cls, n, d):
        if not n:
            return ZERO
        if d:
            n, d = _reduce(n, d)
        return cls._raw(n, d)

    @classmethod
    def _atom_id(cls, aid, exponent=1):
        return cls._raw({(aid, exponent): mpq(1)})

    # ------------------------------------------------------------ queries
    @property
    def is_zero(self) -> bool:
        return not self._n

    def is_number(self) -> bool:
        return not self._d and all(m == () or m == (I_ID, 1) for m in self._n)

    def is_rational_number(self) -> bool:
        return not self._d and all(m == () for m in self._n)

    def as_rational(self) -> Fraction:
        if not self.is_rational_number():
            raise ValueError(f"{self} is not a rational constant")
        c = self._n.get((), mpq(0))
        return Fraction(int(c.numerator), int(c.denominator))

    def is_polynomial(self) -> bool:
        """True when there is no denominator and all exponents are non-negative integers."""
        if self._d:
            return False
        for m in self._n:
            for k in range(1, len(m), 2):
                e = m[k]
                if not isinstance(e, int) or e < 0:
                    return False
        return True

    def num_terms(self) -> int:
        return len(self._n)

    def atom_ids(self) -> set:
        ids = set()
        for m in self._n:
            ids.update(m[0::2])
        ids.update(self._d[0::2])
        return ids

    def atoms(self) -> set:
        """Atoms appearing at the top level (compound atoms are not opened)."""
        return {TABLE[i] for i in self.atom_ids()}

    def free_ids(self) -> frozenset:
        f = self._free
        if f is None:
            acc = set()
            for i in self.atom_ids():
                acc |= TABLE.deep(i)
            f = frozenset(acc)
            self._free = f
        return f

    def free_atoms(self) -> set:
        """Base atoms (parameters, independents, jets) anywhere inside, including function arguments."""
        return {TABLE[i] for i in self.free_ids()}

    def has_transcendental(self) -> bool:
        for i in self.atom_ids():
            a = TABLE[i]
            if isinstance(a, (ExpAtom, FuncAtom, PowAtom)):
                return True
            if isinstance(a, DenFactor) and Expr._from_poly(a.poly).has_transcendental():
                return True
        for m in self._n:
            for k in range(1, len(m), 2):
                if not isinstance(m[k], int):
                    return True
        return False

    def terms(self):
        """Yield ``(coefficient, {atom: exponent})`` for numerator terms in deterministic order."""
        for m in sorted(self._n, key=_mono_key):
            yield Fraction(int(self._n[m].numerator), int(self._n[m].denominator)), {
                TABLE[a]: e for a, e in _pairs(m)
            }

    def numerator(self) -> Expr:
        return Expr._from_poly(self._n)

    def denominator(self) -> Expr:
        return Expr._from_poly(_den_expand(self._d)) if self._d else ONE

    # ------------------------------------------------------- arithmetic
    def __add__(self, other):
        other = as_expr(other)
        if not other._n:
            return self
        if not self._n:
            return other
        if not self._d and not other._d:
            return Expr._from_poly(K.poly_add(self._n, other._n))
        if self._d == other._d:
            return Expr._make(K.poly_add(self._n, other._n), self._d)
        lcm = _den_lcm(self._d, other._d)
        na = self._n
        qa = _den_quot(lcm, self._d)
        if qa:
            na = K.poly_mul(na, _den_expand(qa))
        nb = other._n
        qb = _den_quot(lcm, other._d)
        if qb:
            nb = K.poly_mul(nb, _den_expand(qb))
        return Expr._make(K.poly_add(na, nb), lcm)

    __radd__ = __add__

    def __neg__(self):
        return Expr._raw({m: -c for m, c in self._n.items()}, self._d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-as_expr(other))

    def __rsub__(self, other):
        return as_expr(other) + (-self)

    def __mul__(self, other):
        other = as_expr(other)
        if not self._n or not other._n:
            return ZERO
        n = K.poly_mul(self._n, other._n)
        if not self._d and not other._d:
            return Expr._from_poly(n)
        d, _ = K.mono_mul(self._d, other._d)
        return Expr._make(n, d)

    __rmul__ = __mul__

    def inverse(self) -> Expr:
        if not self._n:
            raise DivisionByZero("division by the zero expression")
        top = _den_expand(self._d) if self._d else {(): mpq(1)}
        n = self._n
        if len(n) == 1:
            (m, c), = n.items()
            inv_m = tuple(x if k % 2 == 0 else -x for k, x in enumerate(m))
            if inv_m[:1] == (I_ID,):
                # I**-1 == -I
                inv_m = (I_ID, 1) + inv_m[2:]
                c = -c
            return Expr._from_poly(K.poly_iadd({}, top, 1 / c, inv_m))
        content = _mono_content(n)
        p = _shift_poly(n, content, -1)
        kappa, p0 = _primitive(p)
        if any(m[:1] == (I_ID,) for m in p0):
            conj_p0 = _conj_i(p0)
            top = K.poly_mul(top, conj_p0)
            p0 = K.poly_mul(p0, conj_p0)
            k2, p0 = _primitive(p0)
            kappa = kappa * k2
        const, factors = _factor(p0)
        scale = 1 / (kappa * const)
        inv_content = tuple(x if k % 2 == 0 else -x for k, x in enumerate(content))
        top = K.poly_iadd({}, top, scale, inv_content)
        den = []
        for f, k in factors:
            den.append((_den_atom_id(f), k))
        den.sort()
        d = tuple(x for pair in den for x in pair)
        return Expr._make(top, d)

    def __truediv__(self, other):
        other = as_expr(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return as_expr(other) * self.inverse()

    def __pow__(self, k):
        if isinstance(k, Expr):
            k = k.as_rational()
        if isinstance(k, Fraction) and k.denominator == 1:
            k = k.numerator
        if type(k) is type(mpq(0)):
            k = _exponent(k)
        if isinstance(k, int):
            if k == 0:
                return ONE
            base = self
            if k < 0:
                base = self.inverse()
                k = -k
            result = ONE
            while True:
                if k & 1:
                    result = result * base
                k >>= 1
                if not k:
                    return result
                base = base * base
        if isinstance(k, Fraction):
            return power(self, k)
        raise TypeError(f"unsupported exponent {k!r}")

    # ------------------------------------------------------ comparisons
    def __eq__(self, other):
        if not isinstance(other, Expr):
            try:
                other = as_expr(other)
            except TypeError:
                return NotImplemented
        return self._d == other._d and self._n == other._n

    def __hash__(self):
        h = self._h
        if h is None:
            h = hash((frozenset(self._n.items()), self._d))
            self._h = h
        return h

    def __bool__(self):
        return bool(self._n)

    def __repr__(self):
        return f"Expr({self})"

    def __str__(self):
        from .printing import to_text

        return to_text(self)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, Atom):
        return Expr(x)
    return Expr(x)


ZERO = Expr._raw({})
ONE = Expr._raw({(): mpq(1)})
I = Expr._raw({(I_ID, 1): mpq(1)})


def const(value) -> Expr:
    return Expr(value)


def structural_key(e: Expr) -> str:
    """Deterministic text key, independent of atom-table insertion order."""
    num = sorted((_mono_key(m), str(c)) for m, c in e._n.items())
    den = sorted((TABLE.key(e._d[k]), e._d[k + 1]) for k in range(0, len(e._d), 2))
    return repr((num, den))


# ---------------------------------------------------------------- atoms
def param(name: str, real: bool = True) -> Expr:
    return Expr(Param(name, real))


def independent(name: str, axis: int) -> Expr:
    return Expr(Independent(name, axis))


def jet(name: str, offsets, shift: bool = False) -> Expr:
    from .atoms import MultiIndex

    return Expr(Jet(name, MultiIndex(tuple(offsets), shift)))


def arb(name: str, offsets, shift: bool = False) -> Expr:
    from .atoms import MultiIndex

    return Expr(ArbJet(name, MultiIndex(tuple(offsets), shift)))


# ---------------------------------------------------- denominator algebra
def _den_lcm(a, b):
    ea = dict(_pairs(a))
    for f, k in _pairs(b):
        if ea.get(f, 0) < k:
            ea[f] = k
    return tuple(x for f in sorted(ea) for x in (f, ea[f]))


def _den_quot(big, small):
    es = dict(_pairs(small))
    out = []
    for f, k in _pairs(big):
        r = k - es.get(f, 0)
        if r:
            out += (f, r)
    return tuple(out)


@lru_cache(maxsize=8192)
def _den_expand(d):
    out = {(): mpq(1)}
    for f, k in _pairs(d):
        poly = TABLE[f].poly
        for _ in range(k):
            out = K.poly_mul(out, poly)
    return out


def _mono_content(n):
    """Per-atom minimum exponent over all monomials (absent counts as 0)."""
    monos = [dict(_pairs(m)) for m in n]
    ids = set()
    for cur in monos:
        ids.update(cur)
    ids.discard(I_ID)
    out = []
    for a in sorted(ids):
        e = min(cur.get(a, 0) for cur in monos)
        if e:
            out += (a, e)
    return tuple(out)


def _shift_poly(n, mono, sign):
    """Multiply every monomial by ``mono**sign`` (sign = +1 or -1)."""
    if not mono:
        return n
    if sign < 0:
        mono = tuple(x if k % 2 == 0 else -x for k, x in enumerate(mono))
    return K.poly_iadd({}, n, 1, mono)


def _primitive(p):
    """Return ``(kappa, p0)`` with ``p = kappa * p0``, p0 integral, primitive and sign-normalized."""
    lcm = gmpy2.mpz(1)
    for c in p.values():
        lcm = gmpy2.lcm(lcm, c.denominator)
    g = gmpy2.mpz(0)
    for c in p.values():
        g = gmpy2.gcd(g, (c * lcm).numerator)
    kappa = mpq(g, lcm)
    p0 = {m: c / kappa for m, c in p.items()}
    lead = min(p0, key=_mono_key)
    if p0[lead] < 0:
        kappa = -kappa
        p0 = {m: -c for m, c in p0.items()}
    return kappa, p0


def _conj_i(p):
    return {m: (-c if m[:1] == (I_ID,) else c) for m, c in p.items()}


def _den_atom_id(p):
    return TABLE.intern(DenFactor(frozenset(p.items()), p))


@lru_cache(maxsize=4096)
def _factor_cached(key):
    import sympy

    p = dict(key)
    ids = sorted({m[k] for m in p for k in range(0, len(m), 2)})
    if not all(isinstance(m[k], int) and m[k] >= 0 for m in p for k in range(1, len(m), 2)):
        return mpq(1), ((p, 1),)
    gens = sympy.symbols(f"a0:{len(ids)}")
    pos = {a: j for j, a in enumerate(ids)}
    rep = {}
    for m, c in p.items():
        exps = [0] * len(ids)
        for a, e in _pairs(m):
            exps[pos[a]] = e
        rep[tuple(exps)] = sympy.Rational(int(c.numerator), int(c.denominator))
    poly = sympy.Poly.from_dict(rep, *gens, domain=sympy.QQ)
    coeff, flist = poly.factor_list()
    const = mpq(int(sympy.Rational(coeff).p), int(sympy.Rational(coeff).q))
    out = []
    for fp, k in flist:
        q = {}
        for exps, c in fp.as_dict().items():
            m = tuple(x for j, e in enumerate(exps) if e for x in (ids[j], int(e)))
            c = sympy.Rational(c)
            q[m] = mpq(int(c.p), int(c.q))
        kap, q0 = _primitive(q)
        const = const * kap**k
        out.append((q0, k))
    return const, tuple(out)


def _factor(p0):
    return _factor_cached(frozenset(p0.items()))


def _divexact(n, f):
    """Return ``n / f`` if f divides n exactly (Laurent monomials are units), else None."""
    content = _mono_content(n)
    neg = tuple(x for a, e in _pairs(content) if e < 0 for x in (a, e))
    r = _shift_poly(n, neg, -1) if neg else dict(n)

    def lex(m):
        return tuple((-m[k], m[k + 1]) for k in range(0, len(m), 2))

    lm_f = max(f, key=lex)
    lc_f = f[lm_f]
    lf = dict(_pairs(lm_f))
    q = {}
    while r:
        lm = max(r, key=lex)
        cur = dict(_pairs(lm))
        qm = []
        for a in sorted(set(cur) | set(lf)):
            e = cur.get(a, 0) - lf.get(a, 0)
            if e < 0:
                return None
            if e:
                qm += (a, e)
        qm = tuple(qm)
        c = r[lm] / lc_f
        q[qm] = q.get(qm, 0) + c
        K.poly_iadd(r, f, -c, qm)
        if lm in r:
            return None
    q = {m: c for m, c in q.items() if c}
    return _shift_poly(q, neg, 1) if neg else q


def _reduce(n, d):
    out = []
    for f, k in _pairs(d):
        poly = TABLE[f].poly
        while k > 0:
            q = _divexact(n, poly)
            if q is None:
                break
            n = q
            k -= 1
        if k:
            out += (f, k)
    return n, tuple(out)


# ------------------------------------------------- elementary functions
def exp(e) -> Expr:
    e = as_expr(e)
    if not e._n:
        return ONE
    pieces = []
    for m, c in e._n.items():
        arg = Expr._raw({m: mpq(1)}, ()) if not e._d else Expr._make({m: mpq(1)}, e._d)
        pieces.append((TABLE.intern(ExpAtom(arg)), _exponent(c)))
    acc = {}
    for aid, c in pieces:
        acc[aid] = acc.get(aid, 0) + c
    mono = tuple(x for a in sorted(acc) if acc[a] for x in (a, acc[a]))
    return Expr._raw({mono: mpq(1)})


def _func(name: str, e) -> Expr:
    e = as_expr(e)
    if name == "exp":
        return exp(e)
    if name == "ln":
        if e == ONE:
            return ZERO
        if e.is_zero:
            raise DomainError("ln(0)")
    elif name == "sin":
        if e.is_zero:
            return ZERO
    elif name == "cos":
        if e.is_zero:
            return ONE
    else:
        raise ValueError(f"unknown function {name!r}")
    return Expr._atom_id(TABLE.intern(FuncAtom(name, e)))


def ln(e) -> Expr:
    return _func("ln", e)


def sin(e) -> Expr:
    return _func("sin", e)


def cos(e) -> Expr:
    return _func("cos", e)


def power(e, r) -> Expr:
    """``e**r`` for rational r; non-integer powers of compound bases stay opaque."""
    e = as_expr(e)
    r = Fraction(r)
    if r.denominator == 1:
        return e ** r.numerator
    if not e._n:
        if r < 0:
            raise DivisionByZero("zero to a negative power")
        return ZERO
    if e == ONE:
        return ONE
    if not e._d and len(e._n) == 1:
        (m, c), = e._n.items()
        if c == 1 and m[:1] != (I_ID,):
            mm = []
            for a, x in _pairs(m):
                y = x * r
                y = y.numerator if isinstance(y, Fraction) and y.denominator == 1 else y
                mm += (a, y)
            return Expr._raw({tuple(mm): mpq(1)})
    # keep only the fractional part opaque so each power has a single form
    k = r.numerator // r.denominator
    return e ** k * Expr._atom_id(TABLE.intern(PowAtom(e, r - k)))


# ------------------------------------------------------------ mapping
def map_atoms(e: Expr, fn: Callable[[Atom], Expr | None], memo: dict | None = None) -> Expr:
    """Replace atoms simultaneously; ``fn`` returns an image or None to keep (and recurse into) the atom."""
    if memo is None:
        memo = {}
    ids = e.atom_ids()
    images = {}
    for aid in ids:
        img = _image(aid, fn, memo)
        if img is not None:
            images[aid] = img
    if not images:
        return e
    idmap = _as_renaming(images, ids, memo)
    if idmap is not None:
        return _rename(e, idmap, images, fn, memo)
    return _generic_map(e, images)


def _image(aid, fn, memo):
    if aid in memo:
        return memo[aid]
    atom = TABLE[aid]
    r = fn(atom)
    if r is not None:
        r = as_expr(r)
    elif isinstance(atom, ExpAtom):
        a2 = map_atoms(atom.arg, fn, memo)
        r = None if a2 is atom.arg else exp(a2)
    elif isinstance(atom, FuncAtom):
        a2 = map_atoms(atom.arg, fn, memo)
        r = None if a2 is atom.arg else _func(atom.func, a2)
    elif isinstance(atom, PowAtom):
        b2 = map_atoms(atom.base, fn, memo)
        r = None if b2 is atom.base else power(b2, atom.exponent)
    elif isinstance(atom, DenFactor):
        p = Expr._from_poly(atom.poly)
        p2 = map_atoms(p, fn, memo)
        r = None if p2 is p else p2
    if r is not None and r._n == {(aid, 1): 1} and not r._d:
        r = None
    memo[aid] = r
    return r


def _atom_like(img):
    if img._d or len(img._n) != 1:
        return None
    (m, c), = img._n.items()
    if c != 1 or len(m) != 2 or m[1] != 1 or m[0] == I_ID:
        return None
    return m[0]


def _injective(idmap, present):
    targets = list(idmap.values())
    if len(set(targets)) != len(targets):
        return False
    return not ({a for a in present if a not in idmap} & set(targets))


def _as_renaming(images, ids, memo):
    idmap = {}
    for aid, img in images.items():
        if aid == I_ID:
            return None
        if isinstance(TABLE[aid], DenFactor):
            p = TABLE[aid].poly
            inner = {m[j] for m in p for j in range(0, len(m), 2)}
            sub = {}
            for b in inner:
                bi = memo.get(b)
                if bi is None:
                    continue
                t = _atom_like(bi)
                if t is None:
                    return None
                sub[b] = t
            if not _injective(sub, inner):
                return None
            continue
        t = _atom_like(img)
        if t is None:
            return None
        idmap[aid] = t
    if not _injective(idmap, ids):
        return None
    return idmap


def _rename(e, idmap, images, fn, memo):
    n = K.poly_rename(e._n, idmap) if idmap else dict(e._n)
    sign = 1
    den = []
    for f, k in _pairs(e._d):
        if f not in images:
            den.append((f, k))
            continue
        p = TABLE[f].poly
        sub = {}
        for b in {m[j] for m in p for j in range(0, len(m), 2)}:
            img = memo.get(b)
            if img is not None:
                sub[b] = _atom_like(img)
        q = K.poly_rename(p, sub)
        lead = min(q, key=_mono_key)
        if q[lead] < 0:
            q = {m: -c for m, c in q.items()}
            if k % 2:
                sign = -sign
        den.append((_den_atom_id(q), k))
    acc = {}
    for f, k in den:
        acc[f] = acc.get(f, 0) + k
    d = tuple(x for f in sorted(acc) for x in (f, acc[f]))
    if sign < 0:
        n = {m: -c for m, c in n.items()}
    return Expr._make(n, d)


def _generic_map(e, images):
    powcache = {}

    def img_pow(aid, x):
        key = (aid, x)
        v = powcache.get(key)
        if v is None:
            img = images[aid]
            v = img**x if isinstance(x, int) else power(img, x)
            powcache[key] = v
        return v

    acc = {}
    extra = []
    for m, c in e._n.items():
        keep = []
        term = None
        for aid, x in _pairs(m):
            if aid in images:
                f = img_pow(aid, x)
                term = f if term is None else term * f
            else:
                keep += (aid, x)
        keep = tuple(keep)
        if term is None:
            K.poly_iadd(acc, {keep: c}, 1, ())
        elif not term._d:
            K.poly_iadd(acc, term._n, c, keep)
        else:
            extra.append(term * Expr._raw({keep: c}))
    num = Expr._from_poly(acc)
    for t in extra:
        num = num + t
    if not e._d:
        return num
    kept = []
    changed = ONE
    for f, k in _pairs(e._d):
        if f in images:
            changed = changed * images[f] ** k
        else:
            kept += (f, k)
    result = num * Expr._raw({(): mpq(1)}, tuple(kept)) if kept else num
    if changed != ONE:
        result = result / changed
    return result


def substitute(e: Expr, bindings: Mapping) -> Expr:
    """Simultaneous replacement of atoms; images are not substituted again."""
    table = {}
    for k, v in bindings.items():
        if isinstance(k, Expr):
            atoms = k.atoms()
            if len(atoms) != 1 or k != Expr(next(iter(atoms))):
                raise ValueError(f"binding key {k} is not an atom")
            k = next(iter(atoms))
        table[k] = as_expr(v)
    return map_atoms(as_expr(e), table.get)


def canonicalize(e) -> Expr:
    """Expressions are canonical on construction; this coerces numbers and atoms."""
    return as_expr(e)


def conj(e, partners: Mapping[str, str] | None = None) -> Expr:
    """Complex conjugate: swaps declared partner fields, fixes real parameters, negates I."""
    pairs = dict(partners or {})
    pairs.update({v: k for k, v in list(pairs.items())})

    def fn(a):
        if isinstance(a, ImagUnit):
            return -I
        if isinstance(a, Param) and not a.real:
            return Expr(Param(a.name, False, not a.conjugated))
        if isinstance(a, (Jet, ArbJet)) and a.name in pairs:
            return Expr(type(a)(pairs[a.name], a.index))
        return None

    return map_atoms(as_expr(e), fn)


# -------------------------------------------------------- derivations
def derive(e: Expr, base: Callable[[Atom], Expr | None], memo: dict | None = None) -> Expr:
    """Apply the derivation fixed by its values ``base(atom)`` on base atoms (chain rule elsewhere)."""
    if memo is None:
        memo = {}
    if not e._n:
        return ZERO

    def d_atom(aid):
        if aid in memo:
            return memo[aid]
        atom = TABLE[aid]
        r = None
        if aid == I_ID:
            r = None
        elif isinstance(atom, BASE_TYPES):
            r = base(atom)
            if r is not None:
                r = as_expr(r)
        elif isinstance(atom, ExpAtom):
            da = derive(atom.arg, base, memo)
            r = Expr._atom_id(aid) * da if da else None
        elif isinstance(atom, FuncAtom):
            da = derive(atom.arg, base, memo)
            if da:
                if atom.func == "ln":
                    r = da / atom.arg
                elif atom.func == "sin":
                    r = cos(atom.arg) * da
                else:
                    r = -sin(atom.arg) * da
        elif isinstance(atom, PowAtom):
            db = derive(atom.base, base, memo)
            if db:
                r = Expr(atom.exponent) * Expr._atom_id(aid) * db / atom.base
        elif isinstance(atom, DenFactor):
            dd = derive(Expr._from_poly(atom.poly), base, memo)
            r = dd if dd else None
        if r is not None and not r._n:
            r = None
        memo[aid] = r
        return r

    num_ids = set()
    for m in e._n:
        num_ids.update(m[0::2])
    acc = {}
    extra = []
    for aid in sorted(num_ids):
        da = d_atom(aid)
        if da is None:
            continue
        part = K.poly_partial(e._n, aid)
        if not part:
            continue
        if da._d:
            extra.append(Expr._from_poly(part) * da)
        elif len(da._n) == 1:
            (mono, c), = da._n.items()
            K.poly_iadd(acc, part, c, mono)
        else:
            acc = K.poly_add(acc, K.poly_mul(part, da._n))
    dn = Expr._from_poly(acc)
    for t in extra:
        dn = dn + t
    result = dn * Expr._raw({(): mpq(1)}, e._d) if e._d and dn else dn
    for f, k in _pairs(e._d):
        dD = d_atom(f)
        if dD is None:
            continue
        result = result - Expr(k) * e * dD * Expr._raw({(): mpq(1)}, (f, 1))
    return result


def partial_wrt(e, a) -> Expr:
    """Formal partial derivative treating every distinct atom as an independent coordinate."""
    e = as_expr(e)
    if isinstance(a, Expr):
        atoms = a.atoms()
        if len(atoms) != 1:
            raise ValueError(f"{a} is not an atom")
        a = next(iter(atoms))
    aid = TABLE.ids.get(a)
    if aid is None or aid not in e.free_ids():
        return ZERO
    return derive(e, lambda b: ONE if b == a else None)


# ------------------------------------------------------------- linearity
def linear_coefficients(e, family: Iterable[str]) -> dict:
    """Split ``e`` as ``sum c_J * gamma_J`` over ArbJet atoms of ``family``; None if not linear homogeneous."""
    e = as_expr(e)
    fam = set(family)

    def in_family(aid):
        a = TABLE[aid]
        return isinstance(a, ArbJet) and a.name in fam

    for f, _ in _pairs(e._d):
        if any(in_family(i) for i in TABLE.deep(f)):
            return None
    out: dict = {}
    for m, c in e._n.items():
        hit = None
        rest = []
        for aid, x in _pairs(m):
            if in_family(aid):
                if hit is not None or x != 1:
                    return None
                hit = aid
            else:
                if any(in_family(i) for i in TABLE.deep(aid)):
                    return None
                rest += (aid, x)
        if hit is None:
            return None
        out.setdefault(TABLE[hit], {})[tuple(rest)] = c
    return {a: Expr._make(p, e._d) for a, p in out.items()}


def is_linear_homogeneous(e, family: Iterable[str]) -> bool:
    return linear_coefficients(e, family) is not None


# ------------------------------------------------------------ evaluation
class GaussianRational:
    """Exact complex rational returned by the exact evaluation path."""

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = mpq(re)
        self.im = mpq(im)

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        return self.im == 0 and self.re == other

    def __hash__(self):
        return hash((self.re, self.im))

    def __abs__(self):
        return float(abs(mpmath.mpc(float(self.re), float(self.im))))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"


def is_rational_function(e: Expr) -> bool:
    """True when exact rational evaluation applies (no transcendental atoms, integer exponents)."""
    return not e.has_transcendental()


def _is_exact_number(v):
    return isinstance(v, (int, Fraction)) or type(v) in (type(mpq(0)), type(gmpy2.mpz(0)))


def evaluate(e, point: Mapping, exact: bool | None = None):
    """Evaluate at ``point`` (atom -> number). Exact rationals when possible, else mpmath floats."""
    value, _ = evaluate_with_scale(e, point, exact)
    return value


def evaluate_with_scale(e, point: Mapping, exact: bool | None = None):
    """Return ``(value, scale)`` where scale is the largest term magnitude encountered."""
    e = as_expr(e)
    vals = {}
    for k, v in point.items():
        if isinstance(k, Expr):
            (k,) = k.atoms()
        aid = TABLE.ids.get(k)
        if aid is not None:
            vals[aid] = v
    missing = [TABLE[i] for i in e.free_ids() if i not in vals]
    if missing:
        raise KeyError(f"unbound atoms: {missing}")
    if exact is None:
        exact = is_rational_function(e) and all(_is_exact_number(vals[i]) for i in e.free_ids())
    if exact:
        qv = {i: _coeff(v) if not isinstance(v, Fraction) else mpq(v.numerator, v.denominator) for i, v in vals.items()}
        return _eval_exact(e, qv)
    with mpmath.workprec(FLOAT_PREC):
        fv = {i: mpmath.mpmathify(_to_float_input(v)) for i, v in vals.items()}
        v, s = _eval_float(e, fv, {})
        if isinstance(v, mpmath.mpc) and v.imag == 0:
            v = v.real
        return v, s


def _to_float_input(v):
    if type(v) is type(mpq(0)) or isinstance(v, Fraction):
        return mpmath.mpf(int(v.numerator)) / int(v.denominator)
    return v


def _eval_exact(e, qv):
    re = mpq(0)
    im = mpq(0)
    scale = mpq(0)
    for m, c in e._n.items():
        v = c
        imag = False
        for aid, x in _pairs(m):
            if aid == I_ID:
                imag = True
                continue
            base = qv[aid]
            if x < 0 and base == 0:
                raise DivisionByZero(f"{TABLE[aid]} is zero")
            v = v * base**x
        if imag:
            im += v
        else:
            re += v
        if abs(v) > scale:
            scale = abs(v)
    if e._d:
        den = mpq(1)
        for f, k in _pairs(e._d):
            dv, _ = _eval_exact(Expr._from_poly(TABLE[f].poly), qv)
            if dv == 0:
                raise DivisionByZero(f"denominator factor vanished: {Expr._from_poly(TABLE[f].poly)}")
            den = den * dv**k
        re /= den
        im /= den
        scale /= abs(den)
    if im:
        return GaussianRational(re, im), scale
    return re, scale


@lru_cache(maxsize=4096)
def _mpf_coeff(c):
    with mpmath.workprec(FLOAT_PREC):
        return mpmath.mpf(int(c.numerator)) / int(c.denominator)


def _eval_atom_float(aid, fv, memo):
    if aid in memo:
        return memo[aid]
    atom = TABLE[aid]
    if aid == I_ID:
        v = mpmath.mpc(0, 1)
    elif isinstance(atom, BASE_TYPES):
        v = fv[aid]
    elif isinstance(atom, FuncAtom):
        a, _ = _eval_float(atom.arg, fv, memo)
        if atom.func == "ln":
            if a == 0:
                raise DomainError("ln(0)")
            if mpmath.im(a) == 0 and mpmath.re(a) < 0:
                raise DomainError("ln of a negative real")
            v = mpmath.log(a)
        elif atom.func == "sin":
            v = mpmath.sin(a)
        else:
            v = mpmath.cos(a)
    elif isinstance(atom, PowAtom):
        b, _ = _eval_float(atom.base, fv, memo)
        if b == 0 and atom.exponent < 0:
            raise DivisionByZero("zero base to a negative power")
        v = mpmath.power(b, mpmath.mpf(atom.exponent.numerator) / atom.exponent.denominator)
    elif isinstance(atom, ExpAtom):
        v, _ = _eval_float(atom.arg, fv, memo)
    elif isinstance(atom, DenFactor):
        v, _ = _eval_float(Expr._from_poly(atom.poly), fv, memo)
    else:
        raise TypeError(atom)
    memo[aid] = v
    return v


def _eval_float(e, fv, memo):
    total = mpmath.mpf(0)
    scale = mpmath.mpf(0)
    for m, c in e._n.items():
        v = _mpf_coeff(c)
        for aid, x in _pairs(m):
            if (aid, x) in memo:
                v = v * memo[aid, x]
                continue
            atom = TABLE[aid]
            base = _eval_atom_float(aid, fv, memo)
            if isinstance(atom, ExpAtom):
                xf = x if isinstance(x, int) else mpmath.mpf(x.numerator) / x.denominator
                w = mpmath.exp(xf * base)
            elif base == 0 and x < 0:
                raise DivisionByZero(f"{atom} is zero")
            elif x == 1:
                w = base
            elif isinstance(x, int):
                w = base**x
            else:
                w = mpmath.power(base, mpmath.mpf(x.numerator) / x.denominator)
            memo[aid, x] = w
            v = v * w
        total += v
        if abs(v) > scale:
            scale = abs(v)
    if e._d:
        den = mpmath.mpf(1)
        for f, k in _pairs(e._d):
            dv = _eval_atom_float(f, fv, memo)
            if dv == 0:
                raise DivisionByZero("denominator factor vanished")
            den = den * dv**k
        total = total / den
        scale = scale / abs(den)
    return total, scale

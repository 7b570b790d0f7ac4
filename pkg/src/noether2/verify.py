"""Zero-testing: canonical proof for rational identities, seeded sampling otherwise."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable

import mpmath

from .atoms import TABLE
from .errors import EvaluationError
from .expr import FLOAT_PREC, ZERO, as_expr, evaluate_with_scale, is_rational_function

DEFAULT_TRIALS = 200
DEFAULT_TOL = 1e-9
DEFAULT_SEED = 0
MAX_RESAMPLES = 50


class Status(str, Enum):
    PROVED_ZERO = "ProvedZero"
    PROBABLY_ZERO = "ProbablyZero"
    NONZERO = "Nonzero"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self):
        return self.value


ZERO_STATUSES = (Status.PROVED_ZERO, Status.PROBABLY_ZERO)


@dataclass
class Verdict:
    status: Status
    trials: int
    max_residual: float
    seed: int
    counterexample: dict | None = field(default=None)

    @property
    def is_zero(self) -> bool:
        return self.status in ZERO_STATUSES

    def to_json(self) -> dict:
        from .printing import atom_text

        cx = None
        if self.counterexample is not None:
            cx = {atom_text(a): _num_text(v) for a, v in sorted(self.counterexample.items(), key=_atom_order)}
        return {
            "status": self.status.value,
            "trials": self.trials,
            "max_residual": float(self.max_residual),
            "seed": self.seed,
            "counterexample": cx,
        }


def _num_text(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    return mpmath.nstr(v, 20)


def _atom_order(item):
    return TABLE.key(TABLE.ids[item[0]])


def _summands(e) -> list:
    if isinstance(e, (list, tuple)):
        return [as_expr(x) for x in e]
    return [as_expr(e)]


def zero_test(e, trials: int = DEFAULT_TRIALS, tol: float = DEFAULT_TOL, seed: int = DEFAULT_SEED,
              exact: bool | None = None, sample: bool = False) -> Verdict:
    """Decide whether ``e`` (or the sum of a list of summands) vanishes identically.

    A canonical zero is a proof.  Otherwise every atom is sampled: nonzero
    integers in [-20, 20] on the exact path, uniform floats in [-2, 2] when
    transcendental atoms are present.  Points where a denominator vanishes or
    a logarithm leaves its domain are resampled.  ``sample=True`` skips the
    canonical shortcut and always evaluates the summands numerically.
    """
    if trials < 1 or tol <= 0:
        raise ValueError("trials must be >= 1 and tol > 0")
    parts = _summands(e)
    total = ZERO
    for p in parts:
        total = total + p
    if total.is_zero and not sample:
        return Verdict(Status.PROVED_ZERO, 0, 0.0, seed)
    if exact is None:
        exact = all(is_rational_function(p) for p in parts)
    ids = frozenset().union(*(p.free_ids() for p in parts))
    atoms = sorted((TABLE[i] for i in ids), key=lambda a: TABLE.key(TABLE.ids[a]))
    rng = random.Random(seed)
    worst = 0.0
    done = 0
    for _ in range(trials):
        for _attempt in range(MAX_RESAMPLES + 1):
            point = {a: _draw(rng, exact) for a in atoms}
            try:
                value, scale = _value(parts, point, exact)
            except EvaluationError:
                continue
            break
        else:
            return Verdict(Status.INCONCLUSIVE, done, worst, seed)
        done += 1
        if exact:
            if value != (0, 0):
                mag = abs(complex(float(value[0]), float(value[1])))
                return Verdict(Status.NONZERO, done, mag, seed, point)
            continue
        mag = float(abs(value))
        worst = max(worst, mag)
        if mag > tol * (1.0 + float(scale)):
            return Verdict(Status.NONZERO, done, mag, seed, point)
    return Verdict(Status.PROBABLY_ZERO, done, worst, seed)


def _draw(rng: random.Random, exact: bool):
    if exact:
        k = rng.randint(1, 40)
        return Fraction(k - 21 if k <= 20 else k - 20)
    return mpmath.mpf(rng.uniform(-2.0, 2.0))


def _value(parts, point, exact):
    """Sum of summand values and the largest magnitude seen; exact values come back as (re, im)."""
    if exact:
        re = im = Fraction(0)
        scale = Fraction(0)
        for p in parts:
            v, s = evaluate_with_scale(p, point, True)
            vr, vi = _parts(v)
            re += vr
            im += vi
            scale = max(scale, _frac(s), abs(vr) + abs(vi))
        return (re, im), scale
    total = 0
    scale = 0
    with mpmath.workprec(FLOAT_PREC):
        for p in parts:
            v, s = evaluate_with_scale(p, point, False)
            total = total + v
            scale = max(scale, abs(s), abs(v))
    return total, scale


def _frac(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


def _parts(v):
    from .expr import GaussianRational

    if isinstance(v, GaussianRational):
        return _frac(v.re), _frac(v.im)
    return _frac(v), Fraction(0)


def verify_all(exprs: Iterable, **kw) -> list:
    return [zero_test(e, **kw) for e in exprs]


def reproduce(e, point: dict, exact: bool | None = None):
    """Re-evaluate ``e`` at a reported counterexample point; returns ``(value, scale)``."""
    parts = _summands(e)
    if exact is None:
        exact = all(isinstance(v, Fraction) for v in point.values()) and all(is_rational_function(p) for p in parts)
    return _value(parts, point, exact)

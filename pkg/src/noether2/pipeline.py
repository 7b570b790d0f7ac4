"""Run a parsed problem through the engine and collect a JSON-ready result document."""

from __future__ import annotations

import time
from dataclasses import dataclass

from .dsl import ProblemFile
from .errors import GoldenMismatch
from .expr import ZERO, Expr
from .noether import (
    conservation_law,
    constrained_residuals,
    eliminate,
    euler_expressions,
    noether2_relations,
    potential_link_check,
    specialize_claw,
)
from .verify import DEFAULT_SEED, DEFAULT_TOL, DEFAULT_TRIALS, Verdict, zero_test

STAGES = {"el": 0, "relation": 1, "claw": 2, "verify": 3}
SCHEMA_VERSION = 1


@dataclass
class Options:
    trials: int = DEFAULT_TRIALS
    tol: float = DEFAULT_TOL
    seed: int = DEFAULT_SEED
    strict: bool = False
    timing: bool = False


class _Run:
    def __init__(self, p: ProblemFile, opts: Options):
        self.p = p
        self.o = opts
        self.ok = True
        self.goldens: list = []
        self.first_mismatch: GoldenMismatch | None = None

    def test(self, e) -> Verdict:
        v = zero_test(e, trials=self.o.trials, tol=self.o.tol, seed=self.o.seed)
        if not v.is_zero:
            self.ok = False
        return v

    def verdict_doc(self, e, v: Verdict) -> dict:
        return {"expr": self.p.text(sum_parts(e)), "verdict": v.to_json()}

    def expects(self, what):
        return [x for x in self.p.expects if x.what == what]

    def golden(self, label: str, expected: Expr, actual: Expr, exact: bool | None = None):
        exact = self.o.strict if exact is None else exact
        if exact:
            match = expected == actual
        else:
            match = zero_test(actual - expected, trials=self.o.trials, tol=self.o.tol, seed=self.o.seed).is_zero
        self.record(label, match, expected, actual)

    def record(self, label, match, expected, actual):
        entry = {"what": label, "match": bool(match)}
        if not match:
            entry["expected"] = self.p.text(expected)
            entry["actual"] = self.p.text(actual)
            self.ok = False
            if self.first_mismatch is None:
                self.first_mismatch = GoldenMismatch(label, entry["expected"], entry["actual"])
        self.goldens.append(entry)

    def flux_goldens(self, label: str, expects: dict, fluxes: list):
        p = self.p
        if not expects:
            return
        if len(expects) == p.naxes and not self.o.strict:
            diff = [fluxes[i] - expects[a] for i, a in enumerate(p.axes)]
            divergence = p.calc.divergence(diff)
            match = zero_test(divergence, trials=self.o.trials, tol=self.o.tol, seed=self.o.seed).is_zero
            exp_div = p.calc.divergence([expects[a] for a in p.axes])
            self.record(f"{label} (divergence)", match, exp_div, p.calc.divergence(fluxes))
            return
        for a, e in expects.items():
            self.golden(f"{label} {a}", e, fluxes[p.axes.index(a)], exact=True)


def sum_parts(e) -> Expr:
    if isinstance(e, (list, tuple)):
        out = ZERO
        for x in e:
            out = out + x
        return out
    return e


def run_pipeline(p: ProblemFile, command: str = "verify", options: Options | None = None) -> dict:
    """Compute the stages requested by ``command`` and compare against the file's expect blocks."""
    opts = options or Options()
    stage = STAGES[command]
    run = _Run(p, opts)
    t0 = time.perf_counter()
    doc: dict = {
        "schema": SCHEMA_VERSION,
        "problem": {"name": p.name, "kind": "continuous" if not p.shift else "discrete", "axes": list(p.axes),
                    "fields": list(p.fields), "arbitrary": list(p.arbitrary)},
        "command": command,
        "seed": opts.seed,
        "trials": opts.trials,
        "tol": opts.tol,
    }
    L = p.lagrangian if p.lagrangian is not None else ZERO
    E = euler_expressions(L, p.fields, p.kind)
    doc["euler"] = {a: p.text(E[a]) for a in p.fields}
    for x in run.expects("euler"):
        run.golden(f"euler {x.key[0]}", x.expr, E.get(x.key[0], ZERO))

    if stage >= 1 and p.characteristic and p.arbitrary:
        _relations(run, doc, L, E, stage)

    doc["goldens"] = run.goldens
    doc["status"] = "ok" if run.ok else "fail"
    if run.first_mismatch is not None:
        doc["first_mismatch"] = str(run.first_mismatch)
    if opts.timing:
        doc["timing_seconds"] = round(time.perf_counter() - t0, 6)
    return doc


def _relations(run: _Run, doc: dict, L, E, stage: int):
    p = run.p
    Q = p.characteristic
    rel = noether2_relations(L, Q, p.fields, p.arbitrary, p.kind, E)
    XL = p.calc.prolonged_action(Q, L)
    inv = run.test(XL) if not p.constraints else None
    if inv is not None:
        doc["invariance"] = run.verdict_doc(XL, inv)
    if not p.constraints:
        doc["relations"] = []
        for g, r in zip(p.arbitrary, rel):
            doc["relations"].append({"gamma": g, **run.verdict_doc(r, run.test(r))})
    else:
        doc["relations"] = [{"gamma": g, "expr": p.text(r)} for g, r in zip(p.arbitrary, rel)]
    for x in run.expects("relation"):
        run.golden(f"relation {x.key[0]}", x.expr, rel[p.arbitrary.index(x.key[0])])

    C = p.constraint_operator() if p.constraints else None
    if C is not None and p.multipliers:
        nu = p.multiplier_list()
        res = constrained_residuals(L, Q, C, nu, p.fields, p.arbitrary, p.kind, E, rel)
        doc["residuals"] = [{"gamma": g, **run.verdict_doc(r, run.test(r))} for g, r in zip(p.arbitrary, res)]
        for x in run.expects("residual"):
            run.golden(f"residual {x.key[0]}", x.expr, res[p.arbitrary.index(x.key[0])])
        if stage >= 2:
            _claw(run, doc, C, nu, rel)

    op = p.eliminate_operator()
    if op is not None:
        elim = eliminate(rel, op)
        doc["elimination"] = run.verdict_doc(elim, run.test(elim))
        for x in run.expects("eliminated"):
            run.golden("eliminated", x.expr, elim)


def _claw(run: _Run, doc: dict, C, nu, rel):
    p = run.p
    cl = conservation_law(C, nu, p.arbitrary, rel, check=False)
    defect = cl.defect()
    doc["conservation_law"] = {
        "fluxes": {a: p.text(f) for a, f in zip(p.axes, cl.fluxes)},
        "defect": p.text(cl.residual),
        "identity": run.test(defect).to_json(),
    }
    run.flux_goldens("flux", {x.key[0]: x.expr for x in run.expects("flux")}, cl.fluxes)
    specials = []
    for k, bindings in p.specializations.items():
        sc = specialize_claw(cl, bindings, C, p.arbitrary, trials=run.o.trials, tol=run.o.tol, seed=run.o.seed)
        specials.append({"id": k, "bindings": {g: p.text(v) for g, v in bindings.items()},
                         "fluxes": {a: p.text(f) for a, f in zip(p.axes, sc.fluxes)}})
        want = {x.key[1]: x.expr for x in run.expects("special") if x.key[0] == k}
        run.flux_goldens(f"special {k} flux", want, sc.fluxes)
    if specials:
        doc["specializations"] = specials
    for x in run.expects("potential_link"):
        lhs, ok = potential_link_check(nu[0], p.fields[0], next(iter(p.params), "c"))
        doc["potential_link"] = {"expr": p.text(lhs), "holds": bool(ok)}
        run.golden("potential_link", x.expr, lhs)

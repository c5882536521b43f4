"""Scenario-driven verification front end.

A scenario is a JSON file describing a chart, a model (closed 2-form
plus kernel/complement frames), named deformations on both the form and
the foliation side, sample points, a seed, and a list of checks.  The
CLI builds everything, runs the requested verification, and emits a
deterministic report (text on stdout, JSON via ``--json``).

Exit codes: 0 all checks pass, 1 check failures, 2 malformed scenario
(schema or expression errors), 3 ring errors while running checks.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from fractions import Fraction
from importlib import resources

from .coeffring import (
    Chart,
    Coefficient,
    ParseError,
    RingError,
    Scalar,
    coeff_parse,
    parse_angle,
)
from .cartan import DifferentialForm, MultiVector, de_rham
from .koszul import ShiftedElement, bv_square_check, linf_relation_residual
from .presym import (
    BigradedDecomposition,
    ModelError,
    PreSymplecticModel,
    build_model,
    exp_eta_section,
    verify_main_theorem,
)
from .foliation import (
    VectorValuedForm,
    cycle_integral_fol,
    cycle_integral_presym,
    involutivity_oracle,
    kuranishi_fol,
    kuranishi_presym,
    l1,
    l2,
    l3,
    fol_bracket,
    mc_residual_fol,
    q_morphism,
)
from . import sampling

BUNDLED = [
    "example-quadratic",
    "example-cubic",
    "torus-obstruction",
    "torus-foliation-obstruction",
]

DEFAULT_SEED = 20240
DEFAULT_SAMPLES = 12
DEFAULT_FLOAT_TOL = 1e-9


class SchemaError(ValueError):
    """The scenario file does not match the expected structure."""


# ---------------------------------------------------------------------------
# scenario loading


class Scenario:
    def __init__(self, data: dict, path: str = "<memory>"):
        self.path = path
        try:
            self.name = data["name"]
            coords = data["chart"]["coordinates"]
            names = [c["name"] for c in coords]
            kinds = {c["kind"] for c in coords}
        except (KeyError, TypeError) as e:
            raise SchemaError(f"missing scenario field: {e}") from None
        if len(kinds) != 1:
            raise SchemaError("all coordinates must share one kind")
        self.chart = Chart(names, kinds.pop())
        eta = self._form(data.get("eta", []), degree=2)
        k_frame = [self._vector(v) for v in data.get("k_frame", [])]
        g_frame = [self._vector(v) for v in data.get("g_frame", [])]
        self.model = build_model(self.chart, eta, k_frame, g_frame)
        self.deformations = {
            name: self._form(terms, degree=2)
            for name, terms in data.get("deformations", {}).items()
        }
        self.fol_deformations = {
            name: self._vvf(terms)
            for name, terms in data.get("foliation_deformations", {}).items()
        }
        self.sample_points = [
            tuple(self._point_entry(x) for x in p)
            for p in data.get("sample_points", [])
        ]
        if not all(len(p) == self.chart.dim for p in self.sample_points):
            raise SchemaError("sample point dimension mismatch")
        self.seed = int(data.get("seed", DEFAULT_SEED))
        self.checks = data.get("checks", [])
        if not isinstance(self.checks, list):
            raise SchemaError("checks must be a list")
        for c in self.checks:
            if "id" not in c or "kind" not in c:
                raise SchemaError("every check needs an id and a kind")

    def _point_entry(self, text):
        if self.chart.kind == "periodic":
            return parse_angle(str(text))
        return Fraction(str(text))

    def _form(self, terms, degree=None) -> DifferentialForm:
        out: dict[tuple, Coefficient] = {}
        deg = degree
        for t in terms:
            try:
                idx = tuple(t["indices"])
                coeff = coeff_parse(t["coeff"], self.chart)
            except (KeyError, TypeError) as e:
                raise SchemaError(f"bad form term {t!r}: {e}") from None
            if deg is None:
                deg = len(idx)
            out[idx] = out[idx] + coeff if idx in out else coeff
        return DifferentialForm(self.chart, deg if deg is not None else 0, out)

    def _multivector(self, terms, degree=None) -> MultiVector:
        out: dict[tuple, Coefficient] = {}
        deg = degree
        for t in terms:
            idx = tuple(t["indices"])
            coeff = coeff_parse(t["coeff"], self.chart)
            if deg is None:
                deg = len(idx)
            out[idx] = out[idx] + coeff if idx in out else coeff
        return MultiVector(self.chart, deg if deg is not None else 0, out)

    def _vector(self, components) -> MultiVector:
        if len(components) != self.chart.dim:
            raise SchemaError("frame vector has wrong number of components")
        terms = {}
        for i, s in enumerate(components):
            c = coeff_parse(str(s), self.chart)
            if not c.is_zero():
                terms[(i,)] = c
        return MultiVector(self.chart, 1, terms)

    def _vvf(self, terms) -> VectorValuedForm:
        out = {}
        deg = None
        for t in terms:
            try:
                kt = tuple(t["k_indices"])
                g = int(t["g_index"])
                coeff = coeff_parse(t["coeff"], self.chart)
            except (KeyError, TypeError) as e:
                raise SchemaError(f"bad vector-valued term {t!r}: {e}") from None
            if deg is None:
                deg = len(kt)
            key = (kt, g)
            out[key] = out[key] + coeff if key in out else coeff
        return VectorValuedForm(self.model, deg if deg is not None else 0, out)

    # -- named and computed values ------------------------------------
    def resolve_form(self, spec) -> DifferentialForm:
        if isinstance(spec, str):
            if spec == "eta":
                return self.model.eta
            if spec in self.deformations:
                return self.deformations[spec]
            raise SchemaError(f"unknown form {spec!r}")
        if isinstance(spec, list):
            return self._form(spec)
        if not isinstance(spec, dict) or "op" not in spec:
            raise SchemaError(f"bad form spec {spec!r}")
        op = spec["op"]
        args = [self.resolve_form(a) for a in spec.get("args", [])]
        K = self.model.koszul
        table = {
            "de_rham": lambda: de_rham(args[0]),
            "koszul2": lambda: K.koszul2(args[0], args[1]),
            "koszul3": lambda: K.koszul3(args[0], args[1], args[2]),
            "f_section": lambda: K.f_section(args[0]),
            "f_inverse": lambda: K.f_inverse_section(args[0]),
            "exp_eta": lambda: exp_eta_section(self.model, args[0]),
            "kuranishi": lambda: kuranishi_presym(K, args[0]),
        }
        if op not in table:
            raise SchemaError(f"unknown form operation {op!r}")
        return table[op]()

    def resolve_vvf(self, spec) -> VectorValuedForm:
        if isinstance(spec, str):
            if spec in self.fol_deformations:
                return self.fol_deformations[spec]
            raise SchemaError(f"unknown foliation deformation {spec!r}")
        if isinstance(spec, list):
            return self._vvf(spec)
        if not isinstance(spec, dict) or "op" not in spec:
            raise SchemaError(f"bad vector-valued spec {spec!r}")
        op = spec["op"]
        if op == "q":
            return q_morphism(self.model, self.resolve_form(spec["args"][0]))
        args = [self.resolve_vvf(a) for a in spec.get("args", [])]
        table = {
            "l1": lambda: l1(args[0]),
            "l2": lambda: l2(args[0], args[1]),
            "l3": lambda: l3(args[0], args[1], args[2]),
            "kuranishi_fol": lambda: kuranishi_fol(args[0]),
        }
        if op not in table:
            raise SchemaError(f"unknown foliation operation {op!r}")
        return table[op]()

    def expected_scalar(self, spec) -> Scalar:
        return Scalar({int(p): Fraction(str(q)) for p, q in spec})


def load_scenario(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return Scenario(data, path)


def load_bundled(name: str) -> Scenario:
    ref = resources.files("presymplectic").joinpath(f"scenarios/{name}.json")
    data = json.loads(ref.read_text(encoding="utf-8"))
    return Scenario(data, f"bundled:{name}")


# ---------------------------------------------------------------------------
# check handlers


def _result(check_id, kind, ok, details="", witness=None):
    return {
        "id": check_id,
        "kind": kind,
        "status": "pass" if ok else "fail",
        "details": details,
        "witness": witness,
    }


def run_check(scn: Scenario, check: dict, rng: random.Random,
              samples: int, tol: float) -> dict:
    cid = check["id"]
    kind = check["kind"]
    model = scn.model
    K = model.koszul

    if kind == "closed":
        w = scn.resolve_form(check["form"])
        got = de_rham(w).is_zero()
        want = bool(check.get("expect", True))
        return _result(cid, kind, got == want, f"closed={got}")

    if kind == "horizontal":
        w = scn.resolve_form(check["form"])
        got = BigradedDecomposition(model, w).is_horizontal()
        want = bool(check.get("expect", True))
        return _result(cid, kind, got == want, f"horizontal={got}")

    if kind == "mc":
        w = scn.resolve_form(check["form"])
        res = K.mc_residual(w)
        got = res.is_zero()
        want = bool(check.get("expect", True))
        return _result(cid, kind, got == want, f"residual_zero={got}",
                       None if got else res.serialize())

    if kind == "form_equals":
        got = scn.resolve_form(check["value"])
        want = scn.resolve_form(check["expected"])
        ok = (got - want).is_zero()
        return _result(cid, kind, ok, "", None if ok else got.serialize())

    if kind == "bivector_self_bracket_equals":
        want = scn._multivector(check["expected"])
        got = K.zz
        ok = (got - want).is_zero() and (K.recompute_self_bracket() - got).is_zero()
        return _result(cid, kind, ok, "", None if ok else got.serialize())

    if kind == "main_theorem":
        w = scn.resolve_form(check["form"])
        rep = verify_main_theorem(model, w, scn.sample_points)
        ok = rep["agree"]
        if "expect_mc" in check:
            ok = ok and rep["mc_residual_zero"] == bool(check["expect_mc"])
        return _result(cid, kind, ok,
                       f"mc={rep['mc_residual_zero']} image={rep['image_side']}")

    if kind == "linf_relations":
        count = int(check.get("count", samples))
        n_max = int(check.get("max_arity", 5))
        bad = 0
        bracket = lambda arity, elems: K.lam(arity, elems)
        for n in range(1, n_max + 1):
            for _ in range(count):
                tup = [
                    ShiftedElement(
                        sampling.random_form(rng, scn.chart, rng.randint(1, 3), 2))
                    for _ in range(n)
                ]
                res = linf_relation_residual(
                    bracket, [x.sdeg for x in tup], tup, n)
                if res is not None and not res.is_zero():
                    bad += 1
        return _result(cid, kind, bad == 0, f"failures={bad}")

    if kind == "cartan_identities":
        count = int(check.get("count", samples))
        bad = _cartan_identity_failures(scn.chart, rng, count)
        return _result(cid, kind, bad == 0, f"failures={bad}")

    if kind == "bv_square":
        forms = sampling.monomial_forms(scn.chart)
        rep = bv_square_check(K, forms)
        bad = sum(1 for r in rep if r["status"] != "pass")
        return _result(cid, kind, bad == 0, f"failures={bad}/{len(rep)}")

    if kind == "fol_l1_zero":
        v = scn.resolve_vvf(check["value"])
        out = l1(v)
        return _result(cid, kind, out.is_zero(), "",
                       None if out.is_zero() else out.serialize())

    if kind == "vvf_equals":
        got = scn.resolve_vvf(check["value"])
        want = scn.resolve_vvf(check["expected"])
        ok = (got - want).is_zero()
        return _result(cid, kind, ok, "", None if ok else got.serialize())

    if kind == "involutivity":
        v = scn.resolve_vvf(check["value"])
        got, witness = involutivity_oracle(v)
        res = mc_residual_fol(v).is_zero()
        want = bool(check.get("expect", True))
        ok = got == want and res == got
        return _result(cid, kind, ok,
                       f"involutive={got} residual_zero={res}",
                       None if witness is None else list(witness))

    if kind == "fol_mc_oracle":
        count = int(check.get("count", samples))
        bad = 0
        for _ in range(count):
            phi = sampling.random_vvf(rng, model, 1, rng.randint(1, 2))
            if involutivity_oracle(phi)[0] != mc_residual_fol(phi).is_zero():
                bad += 1
        return _result(cid, kind, bad == 0, f"disagreements={bad}/{count}")

    if kind == "q_strictness":
        count = int(check.get("count", samples))
        bad = 0
        for _ in range(count):
            degs = [rng.randint(1, min(3, model.chart.dim)) for _ in range(3)]
            xs = [sampling.random_horizontal_form(rng, model, d) for d in degs]
            es = [ShiftedElement(x) for x in xs]
            if not (q_morphism(model, de_rham(xs[0])) - l1(q_morphism(model, xs[0]))).is_zero():
                bad += 1
            lhs2 = q_morphism(model, K.lam(2, es[:2]).form)
            if not (lhs2 + l2(q_morphism(model, xs[0]), q_morphism(model, xs[1]))).is_zero():
                bad += 1
            lhs3 = q_morphism(model, K.lam(3, es).form)
            rhs3 = l3(*[q_morphism(model, x) for x in xs])
            if not (lhs3 - rhs3).is_zero():
                bad += 1
        return _result(cid, kind, bad == 0, f"failures={bad}")

    if kind == "cycle_presym":
        w = scn.resolve_form(check["value"])
        a = parse_angle(str(check["a"]))
        b = parse_angle(str(check["b"]))
        val = cycle_integral_presym(w, a, b)
        return _check_scalar(cid, kind, val, check, tol)

    if kind == "stokes_zero":
        count = int(check.get("count", samples))
        bad = 0
        for _ in range(count):
            alpha = sampling.random_horizontal_form(rng, model, 2, 3)
            a = Fraction(rng.randint(0, 3), rng.choice([1, 2]))
            b = Fraction(rng.randint(0, 3), rng.choice([1, 2]))
            val = cycle_integral_presym(de_rham(alpha), a, b)
            if not (isinstance(val, Scalar) and val.is_zero()):
                bad += 1
        return _result(cid, kind, bad == 0, f"failures={bad}/{count}")

    if kind == "cycle_fol":
        v = scn.resolve_vvf(check["value"])
        a = parse_angle(str(check["a"]))
        c = parse_angle(str(check["c"]))
        pair = cycle_integral_fol(v, a, c)
        if "expected_abs" in check:
            want = float(check["expected_abs"])
            ok = all(abs(abs(float(x)) - want) <= tol for x in pair) and any(
                abs(float(x)) > tol for x in pair
            )
            return _result(cid, kind, ok, f"pair={[float(x) for x in pair]}")
        want = [scn.expected_scalar(s) for s in check["expected"]]
        ok = all(isinstance(x, Scalar) and x == w for x, w in zip(pair, want))
        return _result(cid, kind, ok, f"pair={[str(x) for x in pair]}")

    if kind == "fol_l1_integral_zero":
        count = int(check.get("count", samples))
        bad = 0
        for _ in range(count):
            xi = sampling.random_vvf(rng, model, 1, rng.randint(1, 3))
            a = Fraction(rng.randint(0, 3), 2)
            c = Fraction(rng.randint(0, 3), 2)
            pair = cycle_integral_fol(l1(xi), a, c)
            if not all(isinstance(x, Scalar) and x.is_zero() for x in pair):
                bad += 1
        return _result(cid, kind, bad == 0, f"failures={bad}/{count}")

    if kind == "fol_relations":
        count = int(check.get("count", samples))
        n_max = int(check.get("max_arity", 5))
        bracket = fol_bracket(model)
        bad = 0
        for n in range(1, n_max + 1):
            for _ in range(count):
                tup = [
                    sampling.random_vvf(rng, model, rng.randint(0, model.n_k), 2)
                    for _ in range(n)
                ]
                res = linf_relation_residual(
                    bracket, [x.sdeg for x in tup], tup, n)
                if res is not None and not res.is_zero():
                    bad += 1
        return _result(cid, kind, bad == 0, f"failures={bad}")

    raise SchemaError(f"unknown check kind {kind!r}")


def _check_scalar(cid, kind, val, check, tol):
    if "expected" in check:
        want = Scalar({int(p): Fraction(str(q)) for p, q in check["expected"]})
        ok = isinstance(val, Scalar) and val == want
        return _result(cid, kind, ok, f"value={val}")
    want = float(check["expected_float"])
    ok = abs(float(val) - want) <= tol
    return _result(cid, kind, ok, f"value={float(val)!r}")


def _cartan_identity_failures(chart: Chart, rng: random.Random, count: int) -> int:
    from .cartan import iota, lie, schouten, wedge

    bad = 0
    for _ in range(count):
        p = rng.randint(1, min(3, chart.dim))
        q = rng.randint(1, min(3, chart.dim))
        r = rng.randint(0, chart.dim)
        Y = sampling.random_multivector(rng, chart, p, 2)
        Yt = sampling.random_multivector(rng, chart, q, 2)
        w = sampling.random_form(rng, chart, r, 2)
        if not (de_rham(de_rham(w))).is_zero():
            bad += 1
        lhs = lie(Y, de_rham(w)) - de_rham(lie(Y, w)).scale(
            Fraction((-1) ** (1 - p)))
        if not lhs.is_zero():
            bad += 1
        sgn = (-1) ** (p * q)
        if not (iota(Y, iota(Yt, w)) - iota(Yt, iota(Y, w)).scale(Fraction(sgn))).is_zero():
            bad += 1
        sgn = (-1) ** ((1 - p) * q)
        lhs = lie(Y, iota(Yt, w)) - iota(Yt, lie(Y, w)).scale(Fraction(sgn))
        if not (lhs - iota(schouten(Y, Yt), w)).is_zero():
            bad += 1
        sgn = (-1) ** ((1 - p) * (1 - q))
        lhs = lie(Y, lie(Yt, w)) - lie(Yt, lie(Y, w)).scale(Fraction(sgn))
        if not (lhs - lie(schouten(Y, Yt), w)).is_zero():
            bad += 1
    return bad


# ---------------------------------------------------------------------------
# commands


def _run_declared(scn: Scenario, checks, seed, samples, tol):
    rng = random.Random(seed)
    results = []
    errors = 0
    for check in checks:
        try:
            results.append(run_check(scn, check, rng, samples, tol))
        except SchemaError:
            raise
        except RingError as e:
            errors += 1
            results.append({
                "id": check.get("id", "?"), "kind": check.get("kind", "?"),
                "status": "error", "details": str(e), "witness": None,
            })
    return results, errors


def _report(scenario_name, command, seed, results):
    summary = {
        "total": len(results),
        "passed": sum(1 for r in results if r["status"] == "pass"),
        "failed": sum(1 for r in results if r["status"] == "fail"),
        "errors": sum(1 for r in results if r["status"] == "error"),
    }
    return {
        "scenario": scenario_name,
        "command": command,
        "seed": seed,
        "checks": results,
        "summary": summary,
    }


def _exit_code(report):
    if report["summary"]["errors"]:
        return 3
    if report["summary"]["failed"]:
        return 1
    return 0


def cmd_validate(scn, args):
    return _report(scn.name, "validate", scn.seed, [
        _result("scenario-parses", "validate", True,
                f"chart dim {scn.chart.dim}, rank {scn.model.rank}, "
                f"{len(scn.deformations)} deformations")
    ])


def cmd_mc_check(scn, args):
    names = [args.deformation] if args.deformation else sorted(scn.deformations)
    results = []
    for name in names:
        if name not in scn.deformations:
            raise SchemaError(f"unknown deformation {name!r}")
        res = scn.model.koszul.mc_residual(scn.deformations[name])
        ok = res.is_zero()
        results.append(_result(f"mc-{name}", "mc", ok,
                               f"residual_zero={ok}",
                               None if ok else res.serialize()))
    return _report(scn.name, "mc-check", scn.seed, results)


def cmd_exp_map(scn, args):
    names = [args.deformation] if args.deformation else sorted(scn.deformations)
    results = []
    for name in names:
        w = scn.deformations[name]
        if BigradedDecomposition(scn.model, w).is_horizontal():
            rep = verify_main_theorem(scn.model, w, scn.sample_points)
            results.append(_result(
                f"exp-{name}", "main_theorem", rep["agree"],
                f"mc={rep['mc_residual_zero']} image={rep['image_side']}"))
        else:
            flat = scn.model.koszul.mc_residual(w).is_zero()
            closed = de_rham(scn.model.koszul.f_section(w)).is_zero()
            results.append(_result(
                f"exp-{name}", "f_closed_iff_mc", flat == closed,
                f"mc={flat} f_closed={closed} (non-horizontal)"))
    return _report(scn.name, "exp-map", scn.seed, results)


def cmd_linf_verify(scn, args, seed, samples, tol):
    checks = [
        {"id": "linf-lambda", "kind": "linf_relations", "count": samples},
        {"id": "cartan", "kind": "cartan_identities", "count": samples},
        {"id": "bv-square", "kind": "bv_square"},
    ]
    results, errors = _run_declared(scn, checks, seed, samples, tol)
    return _report(scn.name, "linf-verify", seed, results)


def cmd_foliation_check(scn, args, seed, samples, tol):
    checks = [
        {"id": "fol-relations", "kind": "fol_relations", "count": max(2, samples // 2)},
        {"id": "fol-mc-oracle", "kind": "fol_mc_oracle", "count": samples},
        {"id": "q-strictness", "kind": "q_strictness", "count": samples},
    ]
    results, errors = _run_declared(scn, checks, seed, samples, tol)
    for name, v in sorted(scn.fol_deformations.items()):
        out = l1(v)
        res = mc_residual_fol(v) if v.deg == 1 else None
        details = f"l1_zero={out.is_zero()}"
        if res is not None:
            details += f" residual_zero={res.is_zero()}"
        results.append(_result(f"fol-{name}", "fol_summary", True, details))
    return _report(scn.name, "foliation-check", seed, results)


OBSTRUCTION_KINDS = {
    "cycle_presym", "cycle_fol", "stokes_zero", "fol_l1_integral_zero",
    "form_equals", "vvf_equals", "fol_l1_zero",
}


def cmd_obstruction(scn, args, seed, samples, tol):
    checks = [c for c in scn.checks if c["kind"] in OBSTRUCTION_KINDS]
    results, errors = _run_declared(scn, checks, seed, samples, tol)
    return _report(scn.name, "obstruction", seed, results)


def cmd_run_all(scn, seed, samples, tol, command_name):
    results, errors = _run_declared(scn, scn.checks, seed, samples, tol)
    return _report(scn.name, command_name, seed, results)


# ---------------------------------------------------------------------------
# entry point


def _print_report(report, stream=None, elapsed=None):
    stream = stream if stream is not None else sys.stdout
    print(f"scenario {report['scenario']} [{report['command']}] "
          f"seed={report['seed']}", file=stream)
    for r in report["checks"]:
        line = f"  [{r['status'].upper():5s}] {r['id']}"
        if r["details"]:
            line += f" -- {r['details']}"
        print(line, file=stream)
    s = report["summary"]
    tail = f"  {s['passed']}/{s['total']} passed"
    if s["failed"]:
        tail += f", {s['failed']} failed"
    if s["errors"]:
        tail += f", {s['errors']} errors"
    if elapsed is not None:
        tail += f"  ({elapsed:.2f}s)"
    print(tail, file=stream)


def build_parser():
    p = argparse.ArgumentParser(
        prog="presymplectic",
        description="exact verification of pre-symplectic deformation identities",
    )
    p.add_argument("command", choices=[
        "validate", "mc-check", "exp-map", "linf-verify",
        "foliation-check", "obstruction", "selftest",
    ])
    p.add_argument("scenario", nargs="?", help="scenario JSON path "
                   "(or bundled name; not needed for selftest)")
    p.add_argument("--deformation", help="restrict to one named deformation")
    p.add_argument("--json", dest="json_path", help="write the JSON report here")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES,
                   help="sample count for property suites")
    p.add_argument("--float-tol", type=float, default=DEFAULT_FLOAT_TOL,
                   help="tolerance for float-mode comparisons")
    return p


def _load(args) -> Scenario:
    if not args.scenario:
        raise SchemaError("this command needs a scenario file")
    if args.scenario in BUNDLED:
        return load_bundled(args.scenario)
    return load_scenario(args.scenario)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.monotonic()
    try:
        if args.command == "selftest":
            reports = []
            for name in BUNDLED:
                scn = load_bundled(name)
                seed = args.seed if args.seed is not None else scn.seed
                reports.append(cmd_run_all(
                    scn, seed, args.samples, args.float_tol, "selftest"))
            combined = {
                "scenario": "selftest",
                "command": "selftest",
                "seed": args.seed if args.seed is not None else DEFAULT_SEED,
                "checks": [c for r in reports for c in r["checks"]],
                "summary": {
                    "total": sum(r["summary"]["total"] for r in reports),
                    "passed": sum(r["summary"]["passed"] for r in reports),
                    "failed": sum(r["summary"]["failed"] for r in reports),
                    "errors": sum(r["summary"]["errors"] for r in reports),
                },
            }
            for r in reports:
                _print_report(r)
            print(f"selftest: {combined['summary']['passed']}/"
                  f"{combined['summary']['total']} passed "
                  f"({time.monotonic() - t0:.2f}s)")
            if args.json_path:
                _write_json(combined, args.json_path)
            return _exit_code(combined)

        scn = _load(args)
        seed = args.seed if args.seed is not None else scn.seed
        if args.command == "validate":
            report = cmd_validate(scn, args)
        elif args.command == "mc-check":
            report = cmd_mc_check(scn, args)
        elif args.command == "exp-map":
            report = cmd_exp_map(scn, args)
        elif args.command == "linf-verify":
            report = cmd_linf_verify(scn, args, seed, args.samples, args.float_tol)
        elif args.command == "foliation-check":
            report = cmd_foliation_check(scn, args, seed, args.samples,
                                         args.float_tol)
        elif args.command == "obstruction":
            report = cmd_obstruction(scn, args, seed, args.samples,
                                     args.float_tol)
        else:  # unreachable; argparse constrains the choices
            raise SchemaError(f"unknown command {args.command}")
    except (SchemaError, ParseError, ModelError, OSError,
            json.JSONDecodeError) as e:
        print(f"scenario error: {e}", file=sys.stderr)
        return 2
    except RingError as e:
        print(f"ring error: {e}", file=sys.stderr)
        return 3

    _print_report(report, elapsed=time.monotonic() - t0)
    if args.json_path:
        _write_json(report, args.json_path)
    return _exit_code(report)


def _write_json(report, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


if __name__ == "__main__":
    sys.exit(main())

"""Seeded verification suites and their reports.

Each suite is a list of named checks.  A check returns ``(passed, residual)``
where the residual is either a measured float or, for exact checks, the
number of failing trials.  Reports serialize to a fixed-width text table or to
JSON (see ``SCHEMA_VERSION``).
"""

from __future__ import annotations

import json
import random
import time
from math import factorial
from dataclasses import asdict, dataclass, field, fields
from typing import Callable

import numpy as np
from gmpy2 import mpq

from . import connections as cn
from . import jets as jt
from . import psl
from . import transverse_ode as to
from .scalars import random_rational
from .series import SeriesMatrix, TruncatedSeries, random_series

SCHEMA_VERSION = "1.0"
SUITES = ("jets", "pfaffian", "schwarzian", "projective", "isotropy", "maurer-cartan", "prolong-structure")
MODES = ("exact", "float")


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    suite: str
    seed: int
    order: int = 8
    dim: int = 2
    q: int = 1
    d: int = 2
    rank: int = 2
    k: int = 2
    trials: int = 20
    mode: str = "exact"
    float_tol: float = 1e-8
    fd_step: float = 1e-4

    def __post_init__(self):
        if self.suite not in SUITES + ("all",):
            raise ScenarioError(f"unknown suite {self.suite!r}; valid suites: {', '.join(SUITES + ('all',))}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
            raise ScenarioError("seed must be an integer in [0, 2^64)")
        checks = [("order", 6, 16), ("dim", 1, 4), ("q", 1, 2), ("d", 1, 2), ("rank", 1, 3), ("k", 1, 3),
                  ("trials", 1, 10 ** 4)]
        for name, lo, hi in checks:
            v = getattr(self, name)
            if not isinstance(v, int) or not lo <= v <= hi:
                raise ScenarioError(f"{name} must be an integer in [{lo}, {hi}], got {v!r}")
        if self.q + self.d > 4:
            raise ScenarioError("q + d must not exceed 4")
        if self.mode not in MODES:
            raise ScenarioError(f"mode must be one of {MODES}")
        if not 0 < self.float_tol < 1 or not 0 < self.fd_step < 1:
            raise ScenarioError("tolerances must lie in (0, 1)")

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ScenarioError(f"unknown scenario keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class CheckRecord:
    name: str
    anchor: str
    status: str
    residual: float | int | None
    elapsed_ms: float | None


@dataclass
class Report:
    suite: str
    seed: int
    scenario: dict
    checks: list = field(default_factory=list)

    @property
    def totals(self) -> dict:
        out = {"pass": 0, "fail": 0, "skip": 0}
        for c in self.checks:
            out[c.status] += 1
        out["total"] = len(self.checks)
        return out

    @property
    def ok(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def to_json(self) -> str:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "suite": self.suite,
            "seed": self.seed,
            "scenario": self.scenario,
            "checks": [asdict(c) for c in sorted(self.checks, key=lambda c: c.name)],
            "totals": self.totals,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = [f"suite: {self.suite}   seed: {self.seed}", ""]
        header = f"{'check':<40} {'status':<6} {'residual':>12} {'ms':>9}  anchor"
        lines += [header, "-" * len(header)]
        for c in sorted(self.checks, key=lambda c: c.name):
            res = "-" if c.residual is None else (f"{c.residual:d}" if isinstance(c.residual, int)
                                                  else f"{c.residual:.3e}")
            ms = "-" if c.elapsed_ms is None else f"{c.elapsed_ms:.1f}"
            lines.append(f"{c.name:<40} {c.status:<6} {res:>12} {ms:>9}  {c.anchor}")
        t = self.totals
        lines += ["", f"total {t['total']}  pass {t['pass']}  fail {t['fail']}  skip {t['skip']}"]
        return "\n".join(lines) + "\n"


def parse_report(text: str) -> Report:
    doc = json.loads(text)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ScenarioError("unsupported report schema version")
    rep = Report(doc["suite"], doc["seed"], doc["scenario"])
    rep.checks = [CheckRecord(**c) for c in doc["checks"]]
    return rep


def emit_report(report: Report, fmt: str = "text", path: str | None = None) -> str:
    if fmt not in ("text", "json"):
        raise ScenarioError("format must be 'text' or 'json'")
    out = report.to_json() if fmt == "json" else report.to_text()
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(out)
    return out


# --- helpers -----------------------------------------------------------------------

def _rng(s: Scenario, salt: str) -> random.Random:
    return random.Random(f"{s.seed}:{salt}")


def _exact(fails: int) -> tuple:
    return fails == 0, fails


def _measured(value: float, tol: float) -> tuple:
    return bool(value < tol), float(value)


def _invertible_matrix(rng, r, nvars, order):
    rows = []
    for i in range(r):
        rows.append([random_series(rng, nvars, order, max_degree=3, density=0.6,
                                   constant=(1 if i == j else 0)) for j in range(r)])
    return SeriesMatrix(rows)


def _germ(rng, order, constant=0):
    """Random germ of degree <= 4 with nonzero linear part."""
    while True:
        f = random_series(rng, 1, order, max_degree=4, constant=constant)
        if f.coeffs[1] != 0:
            return f


# --- jets --------------------------------------------------------------------------

def _jets_checks(s: Scenario) -> list:
    def basis_inverse():
        fails = 0
        for n in range(1, min(s.dim, 3) + 1):
            for k in range(0, 6):
                ring = jt.JetRing(n, k)
                a = jt.change_matrix(ring, "B1", "B2", k)
                b = jt.change_matrix(ring, "B2", "B1", k)
                ident = SeriesMatrix.identity(ring.rank, n, k)
                fails += (a @ b) != ident or (b @ a) != ident
        return _exact(fails)

    def square():
        x = TruncatedSeries.variable(0, 1, 4)
        got = jt.d_k(x * x, 2)
        want = [x * x, x * 2, TruncatedSeries.constant(1, 1, 4)]
        return _exact(sum(not c.truncate(2).agrees(w.truncate(2)) for c, w in zip(got.coeffs, want)))

    def multiplicative():
        rng = _rng(s, "jets-mul")
        n = min(s.dim, 3)
        fails = 0
        for _ in range(s.trials):
            f = random_series(rng, n, s.order, max_degree=4)
            g = random_series(rng, n, s.order, max_degree=4)
            k = rng.randint(1, 3)
            lhs = jt.d_k(f * g, k)
            rhs = jt.d_k(f, k) * jt.d_k(g, k)
            fails += not lhs.agrees(rhs)
        return _exact(fails)

    def truncation():
        rng = _rng(s, "jets-trunc")
        fails = 0
        for _ in range(s.trials):
            f = random_series(rng, 2, s.order, max_degree=5)
            k = rng.randint(1, 3)
            fails += not jt.truncate_jet(jt.d_k(f, k)).agrees(jt.d_k(f, k - 1))
        return _exact(fails)

    def symbol():
        rng = _rng(s, "jets-symbol")
        fails = 0
        for _ in range(s.trials):
            fs = [random_series(rng, 2, s.order, max_degree=3) for _ in range(2)]
            ring = jt.JetRing(2, 2)
            via_jets = jt.inject_differentials(fs, ring)
            via_forms = jt.inject_symbol([jt.differential(f) for f in fs], ring)
            fails += not via_jets.agrees(via_forms)
            fails += not jt.truncate_jet(via_forms).is_zero()
        return _exact(fails)

    return [
        ("jets.basis-change-inverse", "jets:basis-change", basis_inverse),
        ("jets.d2-of-square", "jets:coordinate-jet", square),
        ("jets.multiplicativity", "jets:ring-morphism", multiplicative),
        ("jets.truncation-compatible", "jets:exact-sequence", truncation),
        ("jets.symbol-in-kernel", "jets:exact-sequence", symbol),
    ]


# --- pfaffian ----------------------------------------------------------------------

def _pfaffian_systems(s: Scenario, salt: str):
    rng = _rng(s, salt)
    chart = cn.FoliationChart(s.q, s.d)
    for _ in range(s.trials):
        r = rng.randint(1, s.rank)
        g = _invertible_matrix(rng, r, chart.num_vars, s.order)
        yield chart, g, cn.gauge_connection(chart, g)


def _pfaffian_checks(s: Scenario) -> list:
    def defect():
        return _exact(sum(not cn.is_flat(p) for _, _, p in _pfaffian_systems(s, "pf")))

    def frame():
        fails = 0
        for chart, g, p in _pfaffian_systems(s, "pf"):
            f = cn.flat_frame(p)
            fails += any(not m.is_zero() for m in cn.pfaffian_residual(p, f))
            g0 = g.set_zero(chart.leaf_vars)
            fails += not f.agrees((g @ g0.inverse()).truncate(f.order))
        return _exact(fails)

    def bott():
        rng = _rng(s, "bott")
        chart = cn.FoliationChart(s.q, s.d)
        n = chart.num_vars
        t = min(s.order, 6)
        fails = 0
        for _ in range(max(1, s.trials // 4)):
            tangent = [cn.PolyVectorField.coordinate(y, n, t) for y in chart.leaf_vars]
            normal = []
            for i in range(s.q):
                comps = [random_series(rng, n, t, max_degree=2, zero_constant=True) for _ in range(n)]
                comps[i] = comps[i] + 1
                normal.append(cn.PolyVectorField(tuple(comps)))
            fails += not cn.is_flat(cn.bott_patch(chart, tangent, normal))
        return _exact(fails)

    def jet_patch():
        fails = 0
        for chart, g, p in list(_pfaffian_systems(s, "jet"))[: max(1, s.trials // 5)]:
            k = min(s.k, 2)
            jp = cn.transverse_jet_patch(p, k)
            f = cn.flat_frame(p)
            # columns: jets of x^m times flat sections
            for col, (m, j) in enumerate(cn.transverse_jet_basis(chart, p.rank, k)):
                xm = TruncatedSeries.from_dict({tuple(m): 1}, chart.num_vars, f.order)
                sec = [xm * f[i, j] for i in range(p.rank)]
                vec = cn.transverse_jet_vector(sec, chart, k)
                res = cn.pfaffian_residual(jp, SeriesMatrix([[v] for v in vec]))
                fails += any(not r.is_zero() for r in res)
        return _exact(fails)

    return [
        ("pfaffian.gauge-flatness", "connection:flatness", defect),
        ("pfaffian.flat-frame", "connection:flat-basis", frame),
        ("pfaffian.bott-flat", "connection:bott", bott),
        ("pfaffian.transverse-jets", "connection:transverse-jets", jet_patch),
    ]


# --- schwarzian --------------------------------------------------------------------

def _schwarzian_checks(s: Scenario) -> list:
    T = s.order

    def moebius():
        rng = _rng(s, "moebius")
        fails = 0
        x = TruncatedSeries.variable(0, 1, T)
        for _ in range(s.trials):
            a, b, c, d = (mpq(rng.randint(-9, 9)) for _ in range(4))
            if a * d - b * c == 0 or d == 0:
                continue
            f = (x * a + b) * (x * c + d).reciprocal()
            fails += not to.schwarzian(f).is_zero()
        return _exact(fails)

    def exp_const():
        e = TruncatedSeries.univariate([mpq(1, factorial(i)) for i in range(T + 1)])
        th = to.schwarzian(e)
        return _exact(int(not th.agrees(TruncatedSeries.constant(mpq(-1, 12), 1, th.order))))

    def tan_ratio():
        z = TruncatedSeries.zero(1, T)
        one = TruncatedSeries.constant(1, 1, T)
        (cos,), (sin,) = to.fundamental_basis(to.TransverseEquation.second_order(z, one))
        th = to.schwarzian_ratio(sin, cos)
        return _exact(int(not th.agrees(TruncatedSeries.constant(mpq(1, 3), 1, th.order))))

    def cocycle():
        rng = _rng(s, "cocycle")
        fails = 0
        for _ in range(s.trials):
            f1 = _germ(rng, T, constant=rng.randint(-3, 3))
            f2 = _germ(rng, T)
            fails += not to.cocycle_defect(f1, f2).is_zero()
        return _exact(fails)

    return [
        ("schwarzian.moebius-vanishes", "schwarzian:automorphism", moebius),
        ("schwarzian.exp-constant", "schwarzian:definition", exp_const),
        ("schwarzian.sin-cos-ratio", "schwarzian:ratio", tan_ratio),
        ("schwarzian.cocycle", "schwarzian:cocycle", cocycle),
    ]


# --- projective --------------------------------------------------------------------

def _ode_pairs(s: Scenario, salt: str):
    rng = _rng(s, salt)
    for _ in range(s.trials):
        yield random_series(rng, 1, s.order), random_series(rng, 1, s.order)


def _projective_checks(s: Scenario) -> list:
    def round_trip():
        fails = 0
        for a, b in _ode_pairs(s, "rt"):
            pd = to.ode_to_projective(a, b)
            b2 = to.projective_to_ode(pd.a, pd.c)
            fails += not b2.agrees(b.truncate(b2.order))
            c = b  # reuse as an arbitrary c
            pd2 = to.ode_to_projective(a, to.projective_to_ode(a, c))
            fails += not pd2.c.agrees(c.truncate(pd2.c.order))
        return _exact(fails)

    def ratio():
        fails = 0
        for a, b in _ode_pairs(s, "ratio"):
            (f1,), (f2,) = to.fundamental_basis(to.TransverseEquation.second_order(a, b))
            th = to.schwarzian_ratio(f1, f2)
            c = to.ode_to_projective(a, b).c
            fails += not th.agrees(c.truncate(th.order))
        return _exact(fails)

    def basis_identity():
        rng = _rng(s, "basis")
        fails = 0
        for _ in range(max(1, s.trials // 5)):
            k, r = rng.randint(1, s.k), rng.randint(1, s.rank)
            coeffs = [[[random_series(rng, 1, s.order) for _ in range(r)] for _ in range(r)] for _ in range(k)]
            eq = to.TransverseEquation(k, r, coeffs)
            sols = to.fundamental_basis(eq)
            m = to.initial_jet_matrix(sols, k)
            fails += any(m[i][j] != (1 if i == j else 0) for i in range(r * k) for j in range(r * k))
            fails += len(sols) != r * k
        return _exact(fails)

    def extension():
        rng = _rng(s, "ext")
        fails = 0
        for _ in range(max(1, s.trials // 5)):
            k, r = rng.randint(1, s.k), rng.randint(1, s.rank)
            coeffs = [[[random_series(rng, 1, s.order) for _ in range(r)] for _ in range(r)] for _ in range(k)]
            eq = to.TransverseEquation(k, r, coeffs)
            conn = to.induced_extension(eq)
            for sol in to.fundamental_basis(eq):
                fails += any(not v.is_zero() for v in conn.residual(to.jet_vector(sol, k)))
            tr = sum((eq.coefficients[k - 1][j][j] for j in range(1, r)), eq.coefficients[k - 1][0][0])
            fails += not conn.trace.agrees(tr.truncate(conn.trace.order))
        return _exact(fails)

    return [
        ("projective.round-trip", "projective:bijection", round_trip),
        ("projective.ratio-formula", "projective:solution-ratio", ratio),
        ("projective.jet-evaluation", "ode:solution-space", basis_identity),
        ("projective.extension-kernel", "ode:induced-extension", extension),
    ]


# --- isotropy ----------------------------------------------------------------------

def _isotropy_checks(s: Scenario) -> list:
    dims = list(range(2, max(2, min(s.dim, 3)) + 1))
    if 3 not in dims:
        dims.append(3)

    def hand_case():
        q1 = psl.ProlongPoint.over_origin([mpq(3)], [[mpq(-2)]])
        q0 = psl.ProlongPoint.over_origin([mpq(0)], [[mpq(5)]])
        return _exact(int(psl.isotropy_nullspace(q1).dimension != 0) + int(psl.isotropy_nullspace(q0).dimension != 2))

    def random_generic():
        fails = 0
        for n in dims:
            rng = _rng(s, f"iso{n}")
            for _ in range(s.trials):
                q = psl.random_point(rng, n, over_origin=True, height=10 ** 6)
                fails += psl.isotropy_nullspace(q).dimension != 0
        return _exact(fails)

    def degenerate():
        fails = 0
        for n in [1] + dims:
            rng = _rng(s, f"deg{n}")
            W = [[random_rational(rng) for _ in range(n)] for _ in range(n)]
            q = psl.ProlongPoint.over_origin([mpq(0)] * n, W)
            fails += psl.isotropy_nullspace(q).dimension == 0
        return _exact(fails)

    def conjugation():
        fails = 0
        for n in [1] + dims:
            rng = _rng(s, f"conj{n}")
            for _ in range(max(1, s.trials // 4)):
                q = psl.random_point(rng, n, over_origin=True, nondegenerate=False)
                h = psl.random_group_element(rng, n, isotropy=True)
                z, w = psl.fiber_action(h, q.Z, q.W)
                moved = psl.ProlongPoint.over_origin(z, w)
                fails += psl.isotropy_nullspace(q).dimension != psl.isotropy_nullspace(moved).dimension
        return _exact(fails)

    def trace_identity():
        fails = 0
        for n in [1] + dims:
            rng = _rng(s, f"trace{n}")
            for _ in range(max(1, s.trials // 4)):
                h = psl.random_group_element(rng, n, isotropy=True)
                q = psl.random_point(rng, n, over_origin=True, nondegenerate=False)
                t = psl.trace_identity_residual(h.A, h.B, q.Z, q.W)
                fails += t.residual != t.expected or t.conjugation_defect != 0
        return _exact(fails)

    def explicit_fiber():
        rng = _rng(s, "fiber")
        fails = 0
        for n in (1, 2, 3):
            lams, seen = [], {mpq(1)}
            while len(lams) < n - 1:
                v = mpq(rng.randint(-9, 9), rng.randint(1, 9))
                if v not in seen and v != 0:
                    seen.add(v)
                    lams.append(v)
            b = [mpq(rng.randint(-9, 9)) for _ in range(n - 1)]
            fib = psl.explicit_fiber(lams, b)
            fails += fib.dimension != n
            fails += any(fib.particular[i][0] != b[i - 1] / (1 - lams[i - 1]) for i in range(1, n))
            tr = psl.trace_identity_residual(fib.A, fib.B, fib.Z, fib.particular)
            fails += sum(fib.B[i] * fib.Z[i] for i in range(n)) != 0 or tr.residual != 0
        return _exact(fails)

    def incidence():
        fails = 0
        for n, lams, b in ((2, [mpq(2)], [mpq(3)]), (3, [mpq(2), mpq(-1, 3)], [mpq(3), mpq(-5)])):
            fib = psl.explicit_fiber(lams, b)
            fails += psl.incidence_tangent_dim(fib.A, fib.B, fib.Z, fib.particular) != n * n + 2 * n - 1
        return _exact(fails)

    return [
        ("isotropy.n1-hand-case", "isotropy:trivial", hand_case),
        ("isotropy.generic-trivial", "isotropy:trivial", random_generic),
        ("isotropy.degenerate-positive", "isotropy:trivial", degenerate),
        ("isotropy.conjugation-invariant", "isotropy:trivial", conjugation),
        ("isotropy.trace-identity", "isotropy:trace", trace_identity),
        ("isotropy.explicit-fiber", "isotropy:explicit-fiber", explicit_fiber),
        ("isotropy.incidence-tangent-dim", "isotropy:incidence-dimension", incidence),
    ]


# --- maurer-cartan -----------------------------------------------------------------

def _mc_checks(s: Scenario) -> list:
    tol = s.float_tol
    exact_mode = s.mode == "exact"

    def composition():
        rng = _rng(s, "compose")
        worst = 0.0
        fails = 0
        for t in range(s.trials):
            n = 1 + t % min(3, max(1, s.dim))
            g1 = psl.random_group_element(rng, n, exact_mode, spread=0.6)
            g2 = psl.random_group_element(rng, n, exact_mode, spread=0.6)
            pt = psl.random_point(rng, n, exact_mode)
            try:
                lhs = psl.prolonged_action(g2 @ g1, pt)
                rhs = psl.prolonged_action(g2, psl.prolonged_action(g1, pt))
            except psl.ChartEscapeError:
                continue
            if exact_mode:
                fails += lhs != rhs
            else:
                worst = max(worst, lhs.distance(rhs) / (1 + np.max(np.abs(lhs.to_vector()))))
        return _exact(fails) if exact_mode else _measured(worst, 1e-9)

    def identity():
        rng = _rng(s, "ident")
        fails = 0
        for n in (1, 2, 3):
            pt = psl.random_point(rng, n, exact_mode)
            fails += psl.prolonged_action(psl.GroupElement.identity(n), pt) != pt if exact_mode else \
                psl.prolonged_action(psl.GroupElement.identity(n, 1.0), pt).distance(pt) > 1e-15
        return _exact(fails)

    def oracle():
        rng = _rng(s, "oracle")
        fails = 0
        for t in range(max(1, s.trials // 2)):
            n = 1 + t % 3
            h = psl.random_group_element(rng, n, isotropy=True)
            q = psl.random_point(rng, n, over_origin=True, nondegenerate=False)
            fast = psl.prolonged_action(h, q)
            fails += fast != psl.prolonged_action(h, q, method="jet")
            fails += fast.Z + tuple(v for r in fast.W for v in r) != \
                tuple(psl.fiber_action(h, q.Z, q.W)[0]) + tuple(v for r in psl.fiber_action(h, q.Z, q.W)[1] for v in r)
            g = psl.random_group_element(rng, n)
            pt = psl.random_point(rng, n)
            try:
                fails += psl.prolonged_action(g, pt) != psl.prolonged_action(g, pt, method="jet")
            except psl.ChartEscapeError:
                pass
        return _exact(fails)

    def invert():
        rng = _rng(s, "invert")
        worst = 0.0
        for t in range(s.trials):
            n = 1 + t % 2
            q = psl.random_point(rng, n, False, over_origin=True, max_condition=100)
            g = psl.random_group_element(rng, n, False, spread=0.6)
            try:
                x = psl.prolonged_action(g, q)
            except psl.ChartEscapeError:
                continue
            worst = max(worst, g.distance(psl.orbit_invert(q, x)))
        return _measured(worst, tol)

    def pole():
        q = psl.ProlongPoint.over_origin([0.5], [[0.25]])
        x = psl.ProlongPoint((0.1,), (0.0,), ((1.0,),))
        try:
            psl.orbit_invert(q, x)
        except psl.PoleLocusError:
            return True, 0
        return False, 1

    def diagnostics():
        rng = _rng(s, "diag")
        q = psl.random_point(rng, 1, False, over_origin=True, max_condition=50)
        pts = [psl.random_point(rng, 1, False, max_condition=50) for _ in range(min(s.trials, 20))]
        ks = [psl.random_group_element(rng, 1, False, spread=0.5) for _ in range(4)]
        return psl.form_diagnostics(q, pts, ks, h=s.fd_step)

    cache = {}

    def diag_field(name, bound):
        def run():
            if "d" not in cache:
                cache["d"] = diagnostics()
            return _measured(getattr(cache["d"], name), bound)
        return run

    def linearity():
        rng = _rng(s, "linear")
        worst = 0.0
        for _ in range(max(1, s.trials // 4)):
            q = psl.random_point(rng, 2, False, over_origin=True, max_condition=100)
            g = psl.random_group_element(rng, 2, False, spread=0.6)
            try:
                x = psl.prolonged_action(g, q)
            except psl.ChartEscapeError:
                continue
            v1, v2 = np.array([rng.uniform(-1, 1) for _ in range(8)]), np.array([rng.uniform(-1, 1) for _ in range(8)])
            alpha = rng.uniform(-2, 2)
            lhs = psl.maurer_cartan(q, x, alpha * v1 + v2, g).matrix
            rhs = alpha * psl.maurer_cartan(q, x, v1, g).matrix + psl.maurer_cartan(q, x, v2, g).matrix
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        return _measured(worst, 1e-10)

    return [
        ("action.composition", "action:composition", composition),
        ("action.identity", "action:composition", identity),
        ("action.fiber-vs-jet", "action:prolongation", oracle),
        ("mc.orbit-invert", "orbit:birational", invert),
        ("mc.pole-locus", "orbit:birational", pole),
        ("mc.flatness", "form:flatness", diag_field("flatness", s.fd_step)),
        ("mc.invariance", "form:invariance", diag_field("invariance", tol)),
        ("mc.equivariance", "form:equivariance", diag_field("equivariance", tol)),
        ("mc.verticality", "form:verticality", diag_field("verticality", tol)),
        ("mc.linearity", "form:linearity", linearity),
    ]


# --- prolong-structure -------------------------------------------------------------

def structure_fixture(s: Scenario):
    rng = _rng(s, "structure")
    q = psl.random_point(rng, 1, False, over_origin=True, max_condition=50)
    # mild coefficients keep the Mobius image's radius of convergence well
    # beyond the sampled |x1| <= 0.1, so order-16 truncation is invisible
    phi0 = TruncatedSeries.univariate([0, 1] + [mpq(rng.randint(-4, 4), 8) for _ in range(3)], order=16)
    g = psl.GroupElement([[mpq(1), mpq(rng.randint(1, 4), 7)], [mpq(rng.randint(-3, 3), 5), mpq(rng.randint(1, 5))]])
    phi1 = psl.moebius_compose(g, phi0)
    samples = []
    while len(samples) < min(s.trials, 20):
        x1 = rng.uniform(-0.1, 0.1)
        z = rng.choice([-1, 1]) * rng.uniform(0.5, 1.5)
        samples.append((x1, rng.uniform(-1, 1), z, rng.uniform(-1, 1)))
    return q, [(phi0, None), (phi1, g)], samples


def _structure_checks(s: Scenario) -> list:
    cache = {}

    def report():
        if "r" not in cache:
            q, charts, samples = structure_fixture(s)
            cache["r"] = psl.prolong_structure_pullback(charts, q, psl.zero_jet_section, samples, h=s.fd_step)
        return cache["r"]

    return [
        ("structure.overlap", "structure:chart-independence", lambda: _measured(report().overlap_residual, s.float_tol)),
        ("structure.leaf-kernel", "structure:section-pullback",
         lambda: _measured(report().leaf_kernel_residual, s.float_tol)),
        ("structure.transverse-injective", "structure:section-pullback",
         lambda: (report().transverse_min_norm > s.float_tol, float(report().transverse_min_norm))),
        ("structure.section-flatness", "form:flatness", lambda: _measured(report().section_flatness, s.fd_step)),
    ]


SUITE_BUILDERS: dict[str, Callable] = {
    "jets": _jets_checks,
    "pfaffian": _pfaffian_checks,
    "schwarzian": _schwarzian_checks,
    "projective": _projective_checks,
    "isotropy": _isotropy_checks,
    "maurer-cartan": _mc_checks,
    "prolong-structure": _structure_checks,
}


def run_suite(s: Scenario) -> Report:
    names = SUITES if s.suite == "all" else (s.suite,)
    rep = Report(s.suite, s.seed, asdict(s))
    timed = s.mode == "float"
    for suite in names:
        for name, anchor, fn in SUITE_BUILDERS[suite](s):
            t0 = time.perf_counter()
            try:
                ok, residual = fn()
                status = "pass" if ok else "fail"
            except Exception as exc:  # a crashing check is a failing check
                status, residual = "fail", None
                anchor = f"{anchor} (error: {type(exc).__name__})"
            elapsed = round((time.perf_counter() - t0) * 1000, 3) if timed else None
            rep.checks.append(CheckRecord(name, anchor, status, residual, elapsed))
    return rep

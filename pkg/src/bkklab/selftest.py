"""Acceptance checks, shared by the ``selftest`` command and the test suite.

Each check returns a CheckResult with the measured numbers and the
tolerance it was held to.  ``scale`` shrinks Monte-Carlo sample counts
for quick runs; the reported pass/fail is always at the stated tolerance.
"""
from dataclasses import dataclass, field
from math import pi

import numpy as np

from .banach import NormSpec, symmetrize
from .crofton import crofton_density_for, zonoid_check
from .fspace import ManifoldChart
from .mixedvol import product_crofton_density
from .scenario import builtin_scenarios, get_scenario
from .solver import estimate_average, mixed_volume_side, verify_bkk
from .sphere import uniform_directions


@dataclass
class CheckResult:
    key: str
    title: str
    passed: bool
    details: dict = field(default_factory=dict)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        brief = ", ".join(f"{k}={_fmt(v)}" for k, v in self.details.items())
        return f"[{status}] {self.key} {self.title}: {brief}"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _rel(a, b):
    return abs(a - b) / abs(b)


def check_circle(scale=1.0):
    sc = get_scenario("circle-euclidean")
    rep = estimate_average(sc, samples=int(1e5 * scale))
    rhs, _, _ = mixed_volume_side(sc, grid=1000)
    lhs_err, rhs_err = _rel(rep.estimate, 2 * pi), _rel(rhs, 2 * pi)
    return CheckResult("1", "circle, Euclidean", lhs_err <= 0.02 and rhs_err <= 0.005,
                       {"lhs": rep.estimate, "stderr": rep.stderr, "lhs_rel_err": lhs_err,
                        "rhs": rhs, "rhs_rel_err": rhs_err, "tol": "2% / 0.5%"})


def check_frequency(scale=1.0):
    d, ok = {}, True
    for k in (1, 2, 3):
        sc = get_scenario(f"circle-k{k}")
        lhs = estimate_average(sc, samples=int(1e5 * scale)).estimate
        rhs, _, _ = mixed_volume_side(sc)
        e1, e2 = _rel(lhs, 2 * pi * k), _rel(rhs, 2 * pi * k)
        ok &= e1 <= 0.02 and e2 <= 0.02
        d[f"k{k}_lhs"], d[f"k{k}_rhs"] = lhs, rhs
        d[f"k{k}_max_rel_err"] = max(e1, e2)
    d["tol"] = "2%"
    return CheckResult("2", "frequency scaling 2*pi*k", ok, d)


def check_torus(scale=1.0):
    sc = get_scenario("torus-decoupled")
    rep = estimate_average(sc, samples=int(1e6 * scale))
    rhs, _, _ = mixed_volume_side(sc)
    e1, e2 = _rel(rep.estimate, 4 * pi ** 2), _rel(rhs, 4 * pi ** 2)
    return CheckResult("3", "torus, decoupled", e1 <= 0.03 and e2 <= 0.03,
                       {"lhs": rep.estimate, "stderr": rep.stderr, "rhs": rhs,
                        "lhs_rel_err": e1, "rhs_rel_err": e2, "uncertain": rep.uncertain,
                        "tol": "3%"})


def check_euclidean_symmetrization(scale=1.0):
    rng = np.random.default_rng(7)
    d = {}
    ok = True
    for dim, res in ((2, 2048), (3, 5)):
        s = symmetrize(NormSpec.euclidean(dim), res)
        grid_err = float(np.abs(s.h_symm.values - 1).max())
        y = uniform_directions(rng, 2000, dim) * rng.uniform(0.1, 3, (2000, 1))
        r = np.linalg.norm(y, axis=1)
        off_err = float((np.abs(s(y) - r) / r).max())
        d[f"dim{dim}_grid_sup"], d[f"dim{dim}_offgrid_sup"] = grid_err, off_err
        ok &= max(grid_err, off_err) <= 1e-3
    d["tol"] = 1e-3
    return CheckResult("4", "Euclidean symmetrization is the identity", ok, d)


def check_linf(scale=1.0):
    s = symmetrize(NormSpec.linf(2), 2048)
    a, b = float(s(np.array([1.0, 0.0]))), float(s(np.array([1.0, 1.0])))
    ok = abs(a - 1.5) <= 1e-3 and abs(b - 2.0) <= 1e-3
    return CheckResult("5", "square symmetrization", ok,
                       {"h(e1)": a, "h(1,1)": b, "tol": 1e-3})


def check_crofton_constants(scale=1.0):
    p2 = crofton_density_for(NormSpec.euclidean(2))
    p3 = crofton_density_for(NormSpec.euclidean(3))
    e2 = float(np.abs(p2.values - 0.5).max())
    e3 = float(np.abs(p3.values - 1 / pi).max())
    return CheckResult("6", "Crofton constants 1/2, 1/pi", max(e2, e3) <= 1e-3,
                       {"dim2_sup_err": e2, "dim3_sup_err": e3, "tol": 1e-3})


def check_zonoid(scale=1.0):
    r15 = zonoid_check(NormSpec.lp(1.5, 3))
    r4 = zonoid_check(NormSpec.lp(4, 3))
    ok = r15.min_density < 0 and r4.min_density >= -1e-4 * r4.mean_density
    return CheckResult("7", "zonoid discrimination lp 1.5 vs 4 (dim 3)", ok,
                       {"p1.5_min": r15.min_density, "p4_min": r4.min_density,
                        "p4_mean": r4.mean_density})


def check_product_crofton(scale=1.0):
    e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    z = np.zeros(2)
    res = product_crofton_density([NormSpec.euclidean(2)] * 2, [[e1, z], [z, e2]],
                                  int(1e6 * scale), seed=3)
    return CheckResult("8", "product Crofton, unit square", res.rel_error <= 0.02,
                       {"estimate": res.estimate, "stderr": res.stderr,
                        "prediction": res.prediction, "rel_err": res.rel_error, "tol": "2%"})


def _split(U):
    (a, b), *rest = U
    m = 0.5 * (a + b)
    return m, ((a, m), *rest), ((m, b), *rest)


def check_properties(scale=1.0):
    """Smoothed-square scenario at 3 sigma; metric independence and domain
    additivity of the mixed-volume side on every built-in scenario, and
    additivity of the Monte-Carlo side."""
    d, ok = {}, True
    rec = verify_bkk(get_scenario("circle-linf-smoothed"), samples=int(1e5 * scale))
    d["linf_z"] = rec.z_score
    ok &= rec.passed
    worst_metric = worst_add = worst_lhs = 0.0
    for name, sc in builtin_scenarios().items():
        base, tol, _ = mixed_volume_side(sc)
        tol_abs = max(tol, 1e-6 * abs(base))
        for c in (0.5, 2.0):
            chart = sc.chart.with_metric(c * c * np.eye(sc.chart.n))
            v, t2, _ = mixed_volume_side(sc.with_chart(chart))
            worst_metric = max(worst_metric, abs(v - base) / (tol_abs + t2 + 1e-6 * abs(base)))
        m, U1, U2 = _split(sc.U)
        (a, b) = sc.U[0]
        delta = 0.1 * (b - a)
        Uo1 = ((a, m + delta),) + tuple(sc.U[1:])
        Uo2 = ((m - delta, b),) + tuple(sc.U[1:])
        Uov = ((m - delta, m + delta),) + tuple(sc.U[1:])
        parts = [mixed_volume_side(sc, U=U) for U in (Uo1, Uo2, Uov)]
        add = parts[0][0] + parts[1][0] - parts[2][0]
        worst_add = max(worst_add, abs(add - base) / (tol_abs + sum(p[1] for p in parts)
                                                        + 1e-6 * abs(base)))
        n_lhs = int(2e4 * scale)
        whole = estimate_average(sc, samples=n_lhs)
        h1 = estimate_average(sc, samples=n_lhs, U=U1, seed=sc.seed + 1)
        h2 = estimate_average(sc, samples=n_lhs, U=U2, seed=sc.seed + 2)
        se = np.sqrt(whole.stderr ** 2 + h1.stderr ** 2 + h2.stderr ** 2)
        worst_lhs = max(worst_lhs, abs(h1.estimate + h2.estimate - whole.estimate) / se)
    d["metric_dev_over_tol"] = worst_metric
    d["rhs_additivity_dev_over_tol"] = worst_add
    d["lhs_additivity_z"] = worst_lhs
    ok &= worst_metric <= 1 and worst_add <= 1 and worst_lhs <= 3
    return CheckResult("9", "property suite", ok, d)


CHECKS = [check_circle, check_frequency, check_torus, check_euclidean_symmetrization,
          check_linf, check_crofton_constants, check_zonoid, check_product_crofton,
          check_properties]


def run_all(scale=1.0, log=print):
    results = []
    for fn in CHECKS:
        r = fn(scale)
        if log:
            log(r.line())
        results.append(r)
    return results

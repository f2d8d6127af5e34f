"""Scenario declarations: TOML tables and the built-in catalogue.

A scenario file looks like::

    name = "circle-euclidean"
    mode = "theorem-2"            # or "theorem-1"
    samples = 100000
    grid = 1000
    seed = 1
    expected = 6.283185307179586  # optional closed form

    [chart]
    kind = "circle"               # circle | torus | box
    # domain = [[0.0, 1.0]]       # box only
    # periodic = [false]

    U = [[0.0, 3.141592653589793]]   # optional sub-box, top level

    [[factor]]
    family = "trig"               # trig | cos | sin | poly
    frequencies = [1]             # or degrees = [...] for poly
    norm = "euclidean:2"          # short form, or a table as below

    [tolerances]
    sigma = 3.0
    rel = 0.02
"""
import sys
from dataclasses import dataclass, field, replace
from math import pi

import numpy as np

from .banach import NormSpec
from .errors import InvalidArgument
from .fspace import Basis, FunctionSpaceOnX, ManifoldChart, poly_terms, trig_terms

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DEFAULTS = {"mode": "theorem-2", "samples": 100_000, "grid": 1000, "seed": 1}


@dataclass(frozen=True)
class Scenario:
    name: str
    factors: tuple
    mode: str = "theorem-2"
    U: tuple = None
    samples: int = 100_000
    grid: int = 1000
    seed: int = 1
    expected: float = None
    tolerances: dict = field(default_factory=lambda: {"sigma": 3.0, "rel": 0.02})
    description: str = ""

    def __post_init__(self):
        if not self.factors:
            raise InvalidArgument("scenario without factors")
        chart = self.factors[0].chart
        if len(self.factors) != chart.n:
            raise InvalidArgument("factor count must equal chart dimension")
        if any(f.chart is not chart for f in self.factors):
            raise InvalidArgument("all factors must share one chart")
        if self.mode not in ("theorem-1", "theorem-2"):
            raise InvalidArgument(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "U", chart.check_box(self.U))

    @property
    def chart(self):
        return self.factors[0].chart

    def with_(self, **kw):
        return replace(self, **kw)

    def with_chart(self, chart):
        """Same scenario on another chart (e.g. a different metric)."""
        facs = tuple(FunctionSpaceOnX(chart, f.basis, f.norm, f.label) for f in self.factors)
        return replace(self, factors=facs)

    def describe(self):
        return {
            "name": self.name,
            "mode": self.mode,
            "U": [list(b) for b in self.U],
            "samples": self.samples,
            "grid": self.grid,
            "seed": self.seed,
            "expected": self.expected,
            "tolerances": dict(self.tolerances),
            "chart": {"domain": [list(b) for b in self.chart.domain],
                      "periodic": list(self.chart.periodic)},
            "factors": [{"basis": [t.label() for t in f.basis.terms],
                         "norm": f.norm.describe() if hasattr(f.norm, "describe") else "euclidean"}
                        for f in self.factors],
        }


# -- parsing ---------------------------------------------------------------------

def _chart_from(cfg):
    kind = cfg.get("kind", "box")
    metric = cfg.get("metric")
    if kind == "circle":
        return ManifoldChart.circle(metric)
    if kind == "torus":
        return ManifoldChart.torus(metric)
    if kind == "box":
        dom = cfg.get("domain")
        if dom is None:
            raise InvalidArgument("box chart needs a domain")
        return ManifoldChart(tuple(map(tuple, dom)), tuple(cfg.get("periodic", [False] * len(dom))), metric)
    raise InvalidArgument(f"unknown chart kind {kind!r}")


def _norm_from(spec, dim):
    if spec is None:
        return None
    if isinstance(spec, str):
        norm = NormSpec.parse(spec)
    else:
        norm = NormSpec.from_config(dict(spec, dim=spec.get("dim", dim)))
    return norm


def scenario_from_dict(cfg):
    """Build a Scenario from a parsed config table."""
    try:
        chart = _chart_from(cfg.get("chart", {}))
        factors = []
        for fc in cfg.get("factor", []):
            family = fc.get("family", "trig")
            values = fc.get("degrees" if family == "poly" else "frequencies")
            if values is None:
                raise InvalidArgument("factor needs frequencies (or degrees for poly)")
            space = FunctionSpaceOnX.build(chart, family, values)
            norm = _norm_from(fc.get("norm"), space.dim)
            factors.append(space.with_norm(norm) if norm is not None else space)
        tol = {"sigma": 3.0, "rel": 0.02}
        tol.update(cfg.get("tolerances", {}))
        U = cfg.get("U")
        return Scenario(
            name=cfg.get("name", "unnamed"),
            factors=tuple(factors),
            mode=cfg.get("mode", DEFAULTS["mode"]),
            U=tuple(map(tuple, U)) if U is not None else None,
            samples=int(cfg.get("samples", DEFAULTS["samples"])),
            grid=int(cfg.get("grid", DEFAULTS["grid"])),
            seed=int(cfg.get("seed", DEFAULTS["seed"])),
            expected=cfg.get("expected"),
            tolerances=tol,
            description=cfg.get("description", ""),
        )
    except (KeyError, TypeError) as exc:
        raise InvalidArgument(f"bad scenario config: {exc!r}") from exc


def load_scenario(path):
    with open(path, "rb") as fh:
        try:
            cfg = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise InvalidArgument(f"{path}: {exc}") from exc
    return scenario_from_dict(cfg)


# -- built-ins ---------------------------------------------------------------------

def _circle(k, norm=None, mode="theorem-2", U=None, name=None, expected=..., **kw):
    chart = ManifoldChart.circle()
    sp = FunctionSpaceOnX.build(chart, "trig", [k], norm)
    exp = 2 * pi * k if expected is ... else expected
    return Scenario(name or f"circle-k{k}", (sp,), mode, U, expected=exp, **kw)


def _builtin():
    chart_t = ManifoldChart.torus()
    circ = ManifoldChart.circle()
    t1 = FunctionSpaceOnX.build(chart_t, "trig", [[1, 0]])
    t2 = FunctionSpaceOnX.build(chart_t, "trig", [[0, 1]])
    plus = FunctionSpaceOnX.build(chart_t, "trig", [[1, 1]])
    minus = FunctionSpaceOnX.build(chart_t, "trig", [[1, -1]])
    mixed = FunctionSpaceOnX(chart_t, Basis(trig_terms([[1, 1]], 2, kinds=("cos",))
                                            + trig_terms([[1, 0]], 2, kinds=("sin",))),
                             NormSpec.lp(3, 2))
    affine = FunctionSpaceOnX(circ, Basis(poly_terms([0]) + trig_terms([1])))
    out = [
        _circle(1, name="circle-euclidean", description="span{cos t, sin t}, Euclidean norm"),
        _circle(1), _circle(2), _circle(3),
        _circle(1, U=((0.0, pi),), name="circle-half", expected=pi,
                description="rotation-invariant scenario on half the circle"),
        _circle(1, norm=NormSpec.linf(2, 0.05), name="circle-linf-smoothed", expected=None,
                description="square plus a small disc as coefficient unit ball"),
        _circle(1, norm=NormSpec.lp(4, 2), mode="theorem-1", name="circle-lp4-theorem1",
                expected=None, description="l4 coefficient norm, Crofton-density sampling"),
        _circle(1, mode="theorem-1", name="circle-euclidean-theorem1",
                description="Euclidean scenario sampled from the Crofton density"),
        Scenario("circle-affine", (affine,), expected=2 * pi,
                 description="span{1, cos t, sin t}, Euclidean norm in dimension 3"),
        Scenario("torus-decoupled", (t1, t2), samples=1_000_000, grid=64,
                 expected=4 * pi ** 2, tolerances={"sigma": 3.0, "rel": 0.03},
                 description="span{cos t1, sin t1} x span{cos t2, sin t2}"),
        Scenario("torus-coupled", (plus, minus), samples=100_000, grid=64,
                 expected=8 * pi ** 2, tolerances={"sigma": 3.0, "rel": 0.03},
                 description="span{cos(t1+t2), sin(t1+t2)} x span{cos(t1-t2), sin(t1-t2)}"),
        Scenario("torus-mixed-norms", (mixed, t2), samples=100_000, grid=64,
                 description="span{cos(t1+t2), sin t1} with an l3 norm x span{cos t2, sin t2}"),
    ]
    return {s.name: s for s in out}


_CACHE = {}


def builtin_scenarios():
    if not _CACHE:
        _CACHE.update(_builtin())
    return dict(_CACHE)


def get_scenario(name):
    sc = builtin_scenarios()
    if name not in sc:
        raise InvalidArgument(f"unknown scenario {name!r}; known: {', '.join(sorted(sc))}")
    return sc[name]

"""Scenario files and the built-in catalogue."""
from pathlib import Path

import pytest

from bkklab import builtin_scenarios, get_scenario, load_scenario
from bkklab.errors import InvalidArgument
from bkklab.scenario import scenario_from_dict

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.toml")))
def test_shipped_configs_parse(path):
    if path.name.startswith("norm"):
        return
    sc = load_scenario(path)
    assert len(sc.factors) == sc.chart.n


def test_builtin_catalogue_is_consistent():
    cat = builtin_scenarios()
    assert {"circle-euclidean", "circle-k1", "circle-k2", "circle-k3", "torus-decoupled",
            "circle-linf-smoothed"} <= set(cat)
    for name, sc in cat.items():
        assert sc.name == name
        assert len(sc.factors) == sc.chart.n


def test_describe_lists_every_default():
    d = get_scenario("circle-euclidean").describe()
    for key in ("name", "mode", "U", "samples", "grid", "seed", "tolerances", "chart", "factors"):
        assert key in d


def test_syntax_error_reports_location(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text('name = "x"\nsamples = = 3\n')
    with pytest.raises(InvalidArgument, match="line 2"):
        load_scenario(p)


def test_factor_count_must_match_chart():
    cfg = {"chart": {"kind": "torus"}, "factor": [{"frequencies": [[1, 0]]}]}
    with pytest.raises(InvalidArgument):
        scenario_from_dict(cfg)


@pytest.mark.parametrize("cfg", [
    {"chart": {"kind": "sphere"}, "factor": [{"frequencies": [1]}]},
    {"chart": {"kind": "circle"}, "factor": [{"family": "trig"}]},
    {"chart": {"kind": "circle"}, "mode": "theorem-3", "factor": [{"frequencies": [1]}]},
    {"chart": {"kind": "circle"}, "factor": [{"frequencies": [1], "norm": "lp:0.5:2"}]},
    {"chart": {"kind": "circle"}, "factor": [{"frequencies": [1], "norm": "euclidean:3"}]},
    {"chart": {"kind": "box"}, "factor": [{"frequencies": [1]}]},
    {"chart": {"kind": "circle"}, "U": [[0, 9]], "factor": [{"frequencies": [1]}]},
])
def test_invalid_configs(cfg):
    with pytest.raises(InvalidArgument):
        scenario_from_dict(cfg)


def test_box_chart_with_polynomials():
    sc = scenario_from_dict({"chart": {"kind": "box", "domain": [[-1, 1]]},
                             "factor": [{"family": "poly", "degrees": [0, 1, 2]}]})
    assert sc.factors[0].dim == 3


def test_unknown_builtin():
    with pytest.raises(InvalidArgument, match="known"):
        get_scenario("nope")

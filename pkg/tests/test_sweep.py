import json

import pytest
import yaml
from hypothesis import given, settings
from hypothesis import strategies as st

from threshold_passage.errors import ConfigError
from threshold_passage.sweep import PRESETS, Axes, RunConfig, Tolerances, preset, run

finite = st.floats(-10, 10, allow_nan=False)
positive = st.floats(1e-3, 1e3, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(
    energy=st.lists(finite, min_size=1, max_size=5),
    rate=st.lists(positive, min_size=1, max_size=5),
    states=st.lists(st.integers(0, 3), min_size=1, max_size=3),
    wkb=positive,
    methods=st.sets(st.sampled_from(["reflection-single", "reflection-single+M2",
                                     "reflection-coupled", "tdse"]), min_size=1),
)
def test_yaml_round_trip(energy, rate, states, wkb, methods):
    cfg = RunConfig("x", "rectangular", sorted(methods), 4,
                    Axes(energy, rate, states), Tolerances(wkb_tol=wkb))
    back = RunConfig.from_yaml(cfg.to_yaml())
    assert back == cfg
    assert back.to_yaml() == cfg.to_yaml()


@pytest.mark.parametrize("name", PRESETS)
def test_presets_valid_and_stable(name):
    a, b = preset(name), preset(name)
    assert a == b and a.to_yaml() == b.to_yaml()
    assert RunConfig.from_yaml(a.to_yaml()) == a


def test_fig3_preset_grid():
    cfg = preset("fig3")
    assert cfg.axes.energy[0] == -4.0 and cfg.axes.energy[-1] == 4.0 and len(cfg.axes.energy) == 33
    assert cfg.methods == ["reflection-single", "tdse"]


@pytest.mark.parametrize("data, path", [
    ({"experiment": "e", "shape": "hexagon"}, "shape"),
    ({"experiment": "e", "methods": ["magic"]}, "methods[0]"),
    ({"experiment": "e", "axes": {"rate": [1.0, -2.0]}}, "axes.rate[1]"),
    ({"experiment": "e", "axes": {"speed": [1.0]}}, "axes.speed"),
    ({"experiment": "e", "tolerances": {"wkb_tol": 0}}, "tolerances.wkb_tol"),
    ({"experiment": "e", "axes": {"states": [1]}}, "axes.states[0]"),
    ({"shape": "zero_range"}, "experiment"),
    ({"experiment": "e", "shape": "parabolic"}, "methods[0]"),
    ({"experiment": "e", "axes": "no"}, "axes"),
])
def test_validation_reports_field_path(data, path):
    with pytest.raises(ConfigError) as err:
        RunConfig.from_dict(data)
    assert err.value.path == path


def test_bad_yaml():
    with pytest.raises(ConfigError):
        RunConfig.from_yaml("experiment: [unclosed")


def test_run_deterministic(tmp_path):
    cfg = RunConfig("tiny", "zero_range", ["reflection-single", "analytic"],
                    axes=Axes(energy=[0.0], rate=[0.5, 2.0]))
    m1 = run(cfg, str(tmp_path / "a"))
    m2 = run(cfg, str(tmp_path / "b"))
    assert m1["files"] == m2["files"]
    for f in m1["files"]:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    comp = (tmp_path / "a" / "tiny_comparison.csv").read_text().splitlines()
    assert comp[-1].startswith("0,0,2,")
    manifest = json.loads((tmp_path / "a" / "tiny_manifest.json").read_text())
    for key in ("wkb_tol", "rtol", "atol", "fit_tol", "tdse_self_check_tol"):
        assert key in manifest["tolerances"]
    assert manifest["versions"]["package"]


def test_output_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("THRESHOLD_PASSAGE_OUTPUT", str(tmp_path / "env"))
    cfg = RunConfig("envrun", "zero_range", ["analytic"])
    run(cfg)
    assert (tmp_path / "env" / "envrun_manifest.json").exists()


def test_energy_axis_curve(tmp_path):
    cfg = RunConfig("gam", "zero_range", ["reflection-single"],
                    axes=Axes(energy=[-1.0, 1.0], rate=[1.0]))
    run(cfg, str(tmp_path))
    lines = (tmp_path / "gam_reflection-single_m0_v1.csv").read_text().splitlines()
    assert "# rate=1.0" in lines
    rows = [l.split(",") for l in lines if not l.startswith("#")][1:]
    assert float(rows[0][1]) > float(rows[1][1])


def test_high_accuracy_flag():
    cfg = preset("fig3", high_accuracy=True)
    assert cfg.tolerances.tdse_refine == 2.0 and cfg.tolerances.tdse_self_check


def test_yaml_is_nested_mapping():
    data = yaml.safe_load(preset("fig8").to_yaml())
    assert isinstance(data["axes"], dict) and isinstance(data["tolerances"], dict)

import math

import pytest
from hypothesis import given, settings, strategies as st

from uwoc_track.config import (DEFAULTS, KINDS, ConfigError, RunConfig, default_config,
                               load_config, parse_config, preset, serialize)
from uwoc_track.optics import OpticalLink
from uwoc_track.vehicle import AuvParams


def test_empty_config_is_stock_default():
    cfg = parse_config("")
    sc = cfg.scenario
    assert cfg == preset("nominal") == default_config()
    assert sc.controller.kind == "pd"
    assert sc.duration == 150.0 and sc.dt == 0.005 and sc.steps == 30000
    assert sc.initial_eta == (5.0, 5.0, 0.0)
    assert sc.disturbance is None and sc.noise is None
    assert sc.link == OpticalLink()
    assert sc.vehicle == AuvParams()


def test_overlay_selects_nlpd():
    sc = parse_config('controller.type = "nlpd"').scenario
    assert sc.controller.kind == "nlpd"
    assert not sc.controller.schedule.is_linear


def test_presets():
    assert preset("case2").scenario.mass_scale == 1.2
    assert preset("nominal").scenario.disturbance is None
    c1 = preset("case1").scenario
    assert c1.disturbance.start == 30.0 and c1.disturbance.duration == 1.0
    assert c1.disturbance.wrench == (350.0, 350.0, 350.0)
    assert c1.noise is not None and c1.mass_scale == 1.0
    with pytest.raises(ConfigError, match="unknown preset"):
        preset("case3")


def test_preset_key_in_file():
    cfg = parse_config('preset = "case2"\n[controller]\ntype = "nlpd"\n')
    assert cfg.scenario.mass_scale == 1.2 and cfg.scenario.controller.kind == "nlpd"


def test_validation_names_invariant():
    with pytest.raises(ConfigError, match="area > 0"):
        parse_config("[optics.receiver]\narea = -1e-4\n")
    with pytest.raises(ConfigError, match="dt > 0"):
        parse_config("scenario.dt = 0.0")
    with pytest.raises(ConfigError, match="mass_scale > 0"):
        parse_config("scenario.mass_scale = -1.0")


def test_unknown_key_reports_line():
    with pytest.raises(ConfigError, match=r"optics.receiver.aera.*line 3"):
        parse_config("# comment\n[optics.receiver]\naera = 1.0\n")


def test_parse_error_has_position():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("a = 1\nb = = 2\n")


def test_type_errors():
    with pytest.raises(ConfigError, match="expected a number"):
        parse_config('scenario.duration = "long"')
    with pytest.raises(ConfigError, match="array of 3"):
        parse_config("scenario.initial_eta = [1.0, 2.0]")
    with pytest.raises(ConfigError, match="integer"):
        parse_config("noise.seed = 1.5")


def test_degrees_converted():
    cfg = parse_config("optics.receiver.fov_half_angle_deg = 20.0")
    assert cfg.link.rx.fov_half_angle == math.radians(20.0)


def test_round_trip_all_presets():
    for name in ("nominal", "case1", "case2"):
        cfg = preset(name)
        assert parse_config(serialize(cfg)) == cfg


def test_rmse_window_optional():
    cfg = parse_config("scenario.rmse_window = [10.0, 150.0]")
    assert cfg.scenario.rmse_window == (10.0, 150.0)
    assert parse_config(serialize(cfg)) == cfg
    with pytest.raises(ConfigError, match="rmse_window"):
        parse_config("scenario.rmse_window = [10.0, 200.0]")


positive = st.floats(1e-3, 1e3, allow_nan=False, allow_infinity=False)


@given(area=st.floats(1e-6, 1e-2), att=st.floats(0.01, 1.0), kp=positive, kv=positive,
       seed=st.integers(0, 2 ** 64 - 1), depth=st.floats(0.1, 50.0),
       name=st.text(max_size=12), fov=st.floats(1.0, 80.0))
@settings(max_examples=100, deadline=None)
def test_round_trip_property(area, att, kp, kv, seed, depth, name, fov):
    cfg = default_config().with_values(
        optics__receiver__area=area, optics__water__attenuation=att, controller__kp=kp,
        controller__kv=kv, noise__seed=seed, scenario__depth=depth, scenario__name=name,
        optics__receiver__fov_half_angle_deg=fov)
    assert parse_config(serialize(cfg)) == cfg


def test_schema_is_complete():
    cfg = default_config()
    assert set(cfg.values) == set(KINDS) == set(DEFAULTS)
    with pytest.raises(ConfigError):
        RunConfig({})


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(str(tmp_path / "missing.toml"))
    p = tmp_path / "c.toml"
    p.write_text("scenario.depth = -1.0\n")
    with pytest.raises(ConfigError, match="c.toml.*depth > 0"):
        load_config(str(p))

import pytest

from nlaqkd.config import SUBCOMMAND_DEFAULTS, build_config, flag_name
from nlaqkd.errors import ConfigError
from nlaqkd.types import SuccessModel


def write_toml(tmp_path, text):
    path = tmp_path / "run.toml"
    path.write_text(text, encoding="utf-8")
    return path


def test_flag_name():
    assert flag_name("loss_db") == "--loss-db"


def test_defaults_per_subcommand():
    cfg = build_config("sweep", {})
    assert cfg.protocol().va == pytest.approx(0.25)
    assert cfg.beta == 0.8
    assert cfg.eps == 0.002
    assert cfg.nla().gain == 4.0
    assert cfg.nla().success_model is SuccessModel.INVERSE_GAIN_SQUARED
    assert cfg.grid_points()[-1] == 40.0

    gmax = build_config("gmax", {})
    assert gmax.eps == 0.02
    assert gmax.grid_points()[-1] == 30.0
    assert SUBCOMMAND_DEFAULTS["verify"]["eps"] == 0.004


def test_unset_flags_do_not_override():
    cfg = build_config("keyrate", {"va": None, "beta": 1.0})
    assert cfg.va == 0.25
    assert cfg.beta == 1.0


def test_file_overrides_defaults_and_flags_override_file(tmp_path):
    path = write_toml(tmp_path, 'beta = 0.95\neps = 0.01\npsuccess = "0.25"\ngain = 3.0\n')
    cfg = build_config("keyrate", {"eps": 0.005}, path)
    assert cfg.beta == 0.95
    assert cfg.eps == 0.005
    nla = cfg.nla()
    assert nla.success_model is SuccessModel.FIXED
    assert nla.success_probability() == 0.25


def test_file_accepts_long_flag_spelling(tmp_path):
    path = write_toml(tmp_path, "distance-km = 50.0\n")
    cfg = build_config("keyrate", {}, path)
    assert cfg.loss_db is None
    assert cfg.loss() == pytest.approx(10.0)
    assert cfg.channel().transmittance == pytest.approx(0.1)


def test_higher_layer_replaces_exclusive_counterpart():
    cfg = build_config("keyrate", {"alpha2": 0.5})
    assert cfg.va is None
    assert cfg.protocol().alpha2 == 0.5


def test_exclusive_flags_rejected():
    with pytest.raises(ConfigError) as info:
        build_config("keyrate", {"va": 0.25, "alpha2": 0.125})
    assert info.value.flag == "--va"
    with pytest.raises(ConfigError):
        build_config("keyrate", {"loss_db": 3.0, "distance_km": 10.0})


def test_unknown_key_in_file(tmp_path):
    path = write_toml(tmp_path, "gian = 4\n")
    with pytest.raises(ConfigError) as info:
        build_config("keyrate", {}, path)
    assert info.value.flag == "--gian"


def test_unreadable_file(tmp_path):
    with pytest.raises(ConfigError) as info:
        build_config("keyrate", {}, tmp_path / "missing.toml")
    assert info.value.flag == "--config"


@pytest.mark.parametrize(
    "flags,flag",
    [
        ({"beta": 1.5}, "--beta"),
        ({"eps": -0.1}, "--eps"),
        ({"gain": 0.5}, "--gain"),
        ({"psuccess": "2"}, "--psuccess"),
        ({"psuccess": "often"}, "--psuccess"),
        ({"grid": "5:0:1"}, "--grid"),
        ({"workers": 0}, "--workers"),
    ],
)
def test_invalid_values_name_the_flag(flags, flag):
    with pytest.raises(ConfigError) as info:
        build_config("sweep", flags)
    assert info.value.flag == flag
    assert isinstance(info.value, ValueError)


def test_distance_axis_default_grid():
    cfg = build_config("sweep", {"axis": "distance"})
    pts = cfg.grid_points()
    assert pts[0] == 0.0 and pts[-1] == 200.0


@pytest.mark.parametrize(
    "command,flags,flag",
    [
        ("sweep", {"grid": "-5:5:5"}, "--grid"),
        ("sweep", {"grid": "0:4000:2000"}, "--grid"),
        ("sweep", {"axis": "distance", "grid": "0:20000:10000"}, "--grid"),
        ("gmax", {"grid": "-5:5:5"}, "--grid"),
        ("frontier", {"grid": "-2:0:2"}, "--grid"),
        ("keyrate", {"loss_db": 5000.0}, "--loss-db"),
        ("keyrate", {"distance_km": 1e5}, "--distance-km"),
        ("keyrate", {"loss_db": -1.0}, "--loss-db"),
    ],
)
def test_losses_without_transmittance_rejected(command, flags, flag):
    with pytest.raises(ConfigError) as info:
        build_config(command, flags)
    assert info.value.flag == flag
    assert flag in str(info.value)


def test_large_but_representable_loss_accepted():
    cfg = build_config("sweep", {"grid": "0:3000:1000"})
    assert cfg.grid_points()[-1] == 3000.0

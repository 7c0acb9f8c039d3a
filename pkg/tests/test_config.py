import pytest

from cellload.config import SEED_ENV, RunConfig, load_config, parse_config_text
from cellload.errors import ConfigError


def test_defaults_convert_units():
    cfg = RunConfig()
    m = cfg.model()
    assert m.lam == pytest.approx(1e-5)
    assert m.traffic.lambda_u == pytest.approx(1e-4)
    assert m.w == pytest.approx(1e4)


def test_parse_text_and_comments():
    cfg = parse_config_text("# header\ng0_db = 36  # gain\nsweep_values = 10, 20 50\ntol_pushforward = 1e-3\n")
    assert cfg.g0_db == 36.0
    assert cfg.sweep_values == (10.0, 20.0, 50.0)
    assert cfg.tolerances == {"pushforward": 1e-3}


def test_unknown_key_reports_location():
    with pytest.raises(ConfigError, match=r"cfg.txt:2: unknown key 'nonsense'"):
        parse_config_text("g0_db = 1\nnonsense = 3\n", "cfg.txt")


def test_bad_value_and_missing_equals():
    with pytest.raises(ConfigError):
        parse_config_text("realizations = many\n")
    with pytest.raises(ConfigError):
        parse_config_text("realizations 10\n")


@pytest.mark.parametrize(
    "text",
    ["sweep_values =\n", "sweep_values = 3 2 1\n", "sweep_variable = alpha\n", "constant_mode = both\n", "realizations = 0\n"],
)
def test_validate_rejects(text):
    with pytest.raises(ConfigError):
        parse_config_text(text).validate()


def test_seed_resolution(monkeypatch):
    monkeypatch.delenv(SEED_ENV, raising=False)
    assert RunConfig().resolved_seed() == 0
    monkeypatch.setenv(SEED_ENV, "17")
    assert RunConfig().resolved_seed() == 17
    assert RunConfig(seed=3).resolved_seed() == 3
    monkeypatch.setenv(SEED_ENV, "x")
    with pytest.raises(ConfigError):
        RunConfig().resolved_seed()


def test_load_config_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("lambda_u_km2 = 50\nk_pathloss_db = auto\n")
    cfg = load_config(p)
    assert cfg.lambda_u_km2 == 50.0 and cfg.k_pathloss_db is None
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")


def test_sweep_override():
    cfg = RunConfig()
    assert cfg.model(lambda_bs=100).lam == pytest.approx(1e-4)
    assert cfg.model(g0_db=36).net.g0_db == 36
    with pytest.raises(ConfigError):
        cfg.model(alpha=3)

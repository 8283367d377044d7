import pytest

from popaudit.config import OUTPUT_DIR_ENV, ConfigError, RunConfig, load_config, validate_config


def test_defaults():
    c = validate_config("", environ={})
    assert (c.k, c.factors, c.iterations, c.n) == (40, 15, 200, 10)
    assert (c.test_fraction, c.alpha, c.seed) == (0.2, 0.01, 42)
    assert c.algorithms == ("userknn", "nmf")
    assert c == RunConfig()


def test_flag_over_file():
    c = validate_config("k = 40\n", {"k": "25"}, environ={})
    assert c.k == 25


def test_file_values_and_comments():
    c = validate_config("# audit\nalgorithms = nmf\ntest_fraction = 0.3\nratings_columns = 0,2,1\n",
                        environ={})
    assert c.algorithms == ("nmf",) and c.test_fraction == 0.3
    assert c.ratings_columns == (0, 2, 1)


def test_env_output_dir_precedence():
    env = {OUTPUT_DIR_ENV: "/env/out"}
    assert validate_config("output_dir = /file/out", environ=env).output_dir == "/env/out"
    assert validate_config("output_dir = /file/out", {"output_dir": "/flag"},
                           environ=env).output_dir == "/flag"


def test_range_error():
    with pytest.raises(ConfigError, match="k must be >= 1"):
        validate_config("k = 0", environ={})


def test_all_problems_reported_at_once():
    with pytest.raises(ConfigError) as e:
        validate_config("k = 0\nbogus = 1\nalpha = lots\nn = 0\n", environ={})
    text = " ".join(e.value.problems)
    assert "bogus" in text and "alpha" in text and "k must be" in text and "n must be" in text
    with pytest.raises(ConfigError) as e:
        validate_config("k = 0\nn = 0\ntest_fraction = 1.5\n", environ={})
    assert len(e.value.problems) == 3


def test_bad_lines_and_algorithms():
    with pytest.raises(ConfigError, match="line 1"):
        validate_config("just words", environ={})
    with pytest.raises(ConfigError, match="algorithm"):
        validate_config("algorithms = svd", environ={})


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(str(tmp_path / "none.cfg"), environ={})


def test_manifest_dict_is_json_ready():
    import json
    json.dumps(RunConfig().as_dict())


def test_parse_and_range_problems_reported_together():
    with pytest.raises(ConfigError) as e:
        validate_config("k = 0\nn = x\n", environ={})
    assert any(p.startswith("n:") for p in e.value.problems)
    assert "k must be >= 1" in e.value.problems

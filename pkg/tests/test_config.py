"""Run-configuration parsing and serialization."""

import pytest

from patfp.config import DEFAULT_CFL_SAFETY, RunConfig, dump_config, parse_config
from patfp.errors import ConfigError


def test_defaults():
    cfg = RunConfig()
    assert cfg.c == 1.0
    assert cfg.refinement == 3
    assert cfg.cfl_safety == DEFAULT_CFL_SAFETY
    assert cfg.T == 3.0
    assert cfg.gamma is None
    assert cfg.iterations == 60
    assert cfg.seed == 0
    assert cfg.mesh_path is None
    med = cfg.medium()
    assert med.c_s == cfg.c_s
    assert med.curvature_H == 1.0


def test_parse_overrides_and_comments(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text(
        "# reconstruction run\n"
        "refinement = 2\n"
        "T = 1.5   # shorter horizon\n"
        "gamma = auto\n"
        "cfl_safety = 0.2\n"
        "\n"
        "output_dir = out/run1\n"
    )
    cfg = parse_config(p)
    assert cfg.refinement == 2
    assert cfg.T == 1.5
    assert cfg.gamma is None
    assert cfg.cfl_safety == 0.2
    assert cfg.output_dir == "out/run1"
    # Untouched keys keep their defaults.
    assert cfg.iterations == 60


def test_parse_errors_carry_location(tmp_path):
    cases = [
        ("bogus_key = 3\n", r"\.cfg:1: unknown key 'bogus_key'"),
        ("refinement two\n", "expected 'key = value'"),
        ("refinement = 99\n", r"refinement must lie in \[0, 8\]"),
        ("refinement = 2.5\n", "needs an integer"),
        ("c = -1\n", "must be positive"),
        ("cfl_safety = 1.5\n", r"cfl_safety must lie in \(0, 1\]"),
        ("h = -0.2\n", "nonnegative"),
        ("T =\n", "missing value"),
        ("iterations = 0\n", "iterations must be >= 1"),
        ("gamma = fast\n", "needs a number"),
    ]
    for i, (content, message) in enumerate(cases):
        p = tmp_path / f"bad{i}.cfg"
        p.write_text(content)
        with pytest.raises(ConfigError, match=message):
            parse_config(p)


def test_missing_file_is_config_error(tmp_path):
    with pytest.raises(ConfigError, match="cannot read config"):
        parse_config(tmp_path / "nope.cfg")


def test_dump_parse_round_trip(tmp_path):
    cfg = RunConfig(
        refinement=4,
        T=2.25,
        cfl_safety=0.125,
        gamma=0.017,
        iterations=12,
        seed=5,
        c_s=1.5,
        output_dir="results",
    )
    p = tmp_path / "dump.cfg"
    p.write_text(dump_config(cfg))
    back = parse_config(p)
    assert back == cfg


def test_dump_auto_gamma_round_trips(tmp_path):
    cfg = RunConfig()  # gamma None -> "auto"
    text = dump_config(cfg)
    assert "gamma = auto" in text
    p = tmp_path / "auto.cfg"
    p.write_text(text)
    assert parse_config(p).gamma is None

import json

import jsonschema
import numpy as np
import pytest

from levysmooth.cli import _load_schema, list_catalog, main
from levysmooth.config import load_config
from levysmooth.errors import ConfigError

CLASSIFY_TOML = """
seed = 42

[psi]
kind = "alpha_stable"
alpha = 1.5
dim = 1

[experiment]
kind = "classify"
k = 0

[output]
directory = "{out}"
"""

SMOOTHING_TOML = """
seed = 7

[psi]
kind = "alpha_stable"
alpha = 1.5

[q]
kind = "power"
p = 0.5

[grid]
d = 1
L = 20.0
n = 2048

[experiment]
kind = "smoothing"
rho = 0.0
engine = "multiplier"

[output]
directory = "{out}"
"""


def write_config(tmp_path, template, name="run.toml"):
    out = tmp_path / "out"
    cfg = tmp_path / name
    cfg.write_text(template.format(out=out))
    return cfg, out


def load_result(out):
    return json.loads((out / "result.json").read_text())


def test_classify_run(tmp_path):
    cfg, out = write_config(tmp_path, CLASSIFY_TOML)
    assert main(["classify", "--config", str(cfg)]) == 0
    doc = load_result(out)
    assert abs(doc["results"]["indices"]["s"] - 1.5) <= 0.02
    assert doc["results"]["negative_definite"] is True
    assert doc["results"]["sector"]["kappa"] == 0.0
    jsonschema.validate(doc, _load_schema())


def test_smoothing_run_and_csv(tmp_path):
    cfg, out = write_config(tmp_path, SMOOTHING_TOML)
    assert main(["smoothing-run", "--config", str(cfg)]) == 0
    doc = load_result(out)
    assert abs(doc["results"]["gamma_fit"] - 1.0 / 3.0) <= 0.02
    lines = (out / "norms.csv").read_text().splitlines()
    assert lines[0].startswith("# config_hash=")
    assert "t (time)" in lines[1]
    assert (out / "run.log").exists()


def test_rerun_is_byte_identical_modulo_timestamp(tmp_path):
    cfg, out = write_config(tmp_path, CLASSIFY_TOML)
    assert main(["classify", "--config", str(cfg)]) == 0
    first = load_result(out)
    first.pop("timestamp", None)
    assert main(["classify", "--config", str(cfg)]) == 0
    second = load_result(out)
    second.pop("timestamp", None)
    assert json.dumps(first, sort_keys=True) == json.dumps(second, sort_keys=True)


def test_empty_config_fails_without_outputs(tmp_path, capsys):
    cfg = tmp_path / "empty.toml"
    cfg.write_text("")
    out = tmp_path / "out"
    assert main(["classify", "--config", str(cfg)]) == 1
    assert not out.exists()
    assert "error" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["classify", "--config", str(tmp_path / "nope.toml")]) == 1


def test_schema_error_names_offending_key(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text(
        '[psi]\nkind = "alpha_stable"\nalpha = 3.5\n\n[experiment]\nkind = "classify"\n'
    )
    with pytest.raises(ConfigError) as exc:
        load_config(cfg)
    assert "psi" in str(exc.value)


def test_unknown_symbol_kind_named(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text('[psi]\nkind = "weird"\n\n[experiment]\nkind = "classify"\n')
    with pytest.raises(ConfigError) as exc:
        load_config(cfg)
    assert "psi.kind" in str(exc.value)


def test_subcommand_config_mismatch(tmp_path):
    cfg, _ = write_config(tmp_path, CLASSIFY_TOML)
    assert main(["smoothing-run", "--config", str(cfg)]) == 1


def test_hypothesis_violation_exits_two(tmp_path):
    template = SMOOTHING_TOML.replace('p = 0.5', 'p = 1.8')  # s2 > s1
    cfg, out = write_config(tmp_path, template)
    assert main(["smoothing-run", "--config", str(cfg)]) == 2
    doc = load_result(out)
    assert doc["warnings"]


def test_override_flag(tmp_path):
    cfg, out = write_config(tmp_path, CLASSIFY_TOML)
    assert main(["classify", "--config", str(cfg), "--override", "psi.alpha=0.8"]) == 0
    doc = load_result(out)
    assert abs(doc["results"]["indices"]["s"] - 0.8) <= 0.02


def test_seed_flag_changes_hash_not_validity(tmp_path):
    cfg, out = write_config(tmp_path, CLASSIFY_TOML)
    assert main(["classify", "--config", str(cfg), "--seed", "99"]) == 0
    doc = load_result(out)
    assert doc["seed"] == 99


def test_contour_flag_overrides(tmp_path):
    template = SMOOTHING_TOML.replace('engine = "multiplier"', 'engine = "contour"')
    template = template.replace("n = 2048", "n = 1024")
    cfg, out = write_config(tmp_path, template)
    assert main([
        "smoothing-run", "--config", str(cfg),
        "--theta-prime", "0.6", "--n-ray", "300", "--n-arc", "96",
    ]) == 0
    doc = load_result(out)
    assert abs(doc["results"]["gamma_fit"] - 1.0 / 3.0) <= 0.02


def test_maximizer_run(tmp_path):
    cfg = tmp_path / "max.toml"
    out = tmp_path / "out"
    cfg.write_text(
        f'[experiment]\nkind = "maximizer"\ns1 = 2.0\ns2 = 1.0\nlambdas = [4.0]\n\n'
        f'[output]\ndirectory = "{out}"\n'
    )
    assert main(["maximizer-check", "--config", str(cfg)]) == 0
    doc = load_result(out)
    assert doc["results"]["checks"][0]["analytic"] == pytest.approx(2.0)


def test_sde_run_writes_mc_csv(tmp_path):
    cfg = tmp_path / "sde.toml"
    out = tmp_path / "out"
    cfg.write_text(
        f'seed = 3\n\n[psi]\nkind = "brownian"\n\n'
        f'[experiment]\nkind = "sde"\nt = 0.1\nxi0 = 1.0\npaths = 2000\nstep = 0.05\n\n'
        f'[output]\ndirectory = "{out}"\n'
    )
    assert main(["sde-simulate", "--config", str(cfg)]) == 0
    lines = (out / "mc.csv").read_text().splitlines()
    assert lines[0].startswith("# config_hash=")
    assert "x (state)" in lines[1] and "n_excluded" in lines[1]


def test_generator_check_run(tmp_path):
    cfg = tmp_path / "gen.toml"
    out = tmp_path / "out"
    cfg.write_text(
        f'seed = 11\n\n[psi]\nkind = "alpha_stable"\nalpha = 1.5\n\n'
        f'[coefficients]\nsigma = "identity"\n\n'
        f'[experiment]\nkind = "generator-check"\nt_small = 0.01\npaths = 100000\n'
        f'x_set = [0.0]\nxi_set = [0.0, 1.0]\n\n'
        f'[output]\ndirectory = "{out}"\n'
    )
    assert main(["generator-check", "--config", str(cfg)]) == 0
    doc = load_result(out)
    assert doc["results"]["passed"] is True


def test_resolvent_run(tmp_path):
    cfg = tmp_path / "res.toml"
    out = tmp_path / "out"
    cfg.write_text(
        f'[psi]\nkind = "brownian"\n\n[q]\nkind = "power"\np = 1.0\n\n'
        f'[grid]\nn = 2048\n\n'
        f'[experiment]\nkind = "resolvent"\nrho = 0.0\n\n'
        f'[output]\ndirectory = "{out}"\n'
    )
    assert main(["resolvent-check", "--config", str(cfg)]) == 0
    doc = load_result(out)
    for ray in doc["results"]["rays"]:
        assert abs(ray["slope"] + 0.5) <= 0.02
    assert (out / "ray0.csv").exists() and (out / "ray1.csv").exists()


def test_smoothing_mc_engine_config(tmp_path):
    cfg = tmp_path / "mc.toml"
    out = tmp_path / "out"
    cfg.write_text(
        f'seed = 5\n\n[psi]\nkind = "alpha_stable"\nalpha = 1.5\n\n'
        f'[q]\nkind = "power"\np = 0.5\n\n'
        f'[grid]\nL = 6.0\nn = 128\n\n'
        f'[experiment]\nkind = "smoothing"\nengine = "mc"\nrho = 0.0\n'
        f't_min = 0.02\nt_max = 0.16\nn_t = 8\nstep = 0.005\npaths = 4000\n\n'
        f'[output]\ndirectory = "{out}"\n'
    )
    assert main(["smoothing-run", "--config", str(cfg)]) == 0
    doc = load_result(out)
    assert doc["results"]["ratio_kind"] == "norm"
    assert abs(doc["results"]["gamma_fit"] - 1.0 / 3.0) <= 0.15


def test_classify_2d_config(tmp_path):
    cfg = tmp_path / "c2.toml"
    out = tmp_path / "out"
    cfg.write_text(
        f'seed = 2\n\n[psi]\nkind = "alpha_stable"\nalpha = 1.2\ndim = 2\n\n'
        f'[grid]\nd = 2\nL = 6.0\nn = 32\n\n'
        f'[experiment]\nkind = "classify"\nk = 0\n\n'
        f'[output]\ndirectory = "{out}"\n'
    )
    assert main(["classify", "--config", str(cfg)]) == 0
    doc = load_result(out)
    assert abs(doc["results"]["indices"]["s"] - 1.2) <= 0.02


def test_list_catalog_contents(capsys):
    assert main(["list-catalog"]) == 0
    text = capsys.readouterr().out
    assert "alpha_stable" in text
    assert "meixner" in text
    experiments = text.split("experiments:")[1].strip().splitlines()
    assert len([e for e in experiments if e.strip()]) == 6


def test_list_catalog_deterministic():
    assert list_catalog() == list_catalog()

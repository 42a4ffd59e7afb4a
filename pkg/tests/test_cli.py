import subprocess
import sys

import pytest

from carleman_lab import cli
from carleman_lab.report import read_rows

FAST_IBP = """
[run]
seed = {seed}

[ibp-verify]
taus = 5
ks = 0, 1

[family]
size = 2
"""


def run(tmp_path, command, config_text=None, *extra):
    args = [command, "--out", str(tmp_path / "out")]
    if config_text is not None:
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(config_text)
        args += ["--config", str(cfg)]
    return cli.main(args + list(extra))


def test_exponents_defaults_exit_zero(tmp_path, capsys):
    assert run(tmp_path, "exponents") == 0
    out = capsys.readouterr().out
    assert "nu = 2/3" in out and "Theta = 4/3" in out
    rows = read_rows(tmp_path / "out" / "exponents.csv")
    assert {r["quantity"]: r["value"] for r in rows}["Theta"] == "4/3"


def test_exponents_parses_rationals(tmp_path, capsys):
    cfg = "[params]\nn = 6\nm = 2\ns = 9\neps = 1/5\n"
    assert run(tmp_path, "exponents", cfg) == 0
    assert "case II" in capsys.readouterr().out


def test_failure_exits_one_and_names_csv(tmp_path, capsys):
    cfg = "[vanishing-order]\nks = 2, 3\ntol = 1e-15\nfamilies = eigen\n"
    assert run(tmp_path, "vanishing-order", cfg) == 1
    err = capsys.readouterr().err
    assert "vanishing-order.csv" in err


@pytest.mark.parametrize("cfg,needle", [
    ("[params]\nbogus = 1\n", "bogus"),
    ("[params]\nn = three\n", "n = 'three'"),
    ("[params]\nn = 3\ns = 1\n", "s=1"),
    ("[three-ball]\nradius = 2\n", "radius"),
    ("[run]\nseed = x\n", "seed"),
    ("[carleman-check]\ntau_min = 20\ntau_max = 40\n", "tau range"),
    ("not an ini file", "cannot parse"),
])
def test_config_errors_exit_two(tmp_path, capsys, cfg, needle):
    command = "three-ball" if "three-ball" in cfg else "carleman-check" if "carleman" in cfg else "exponents"
    assert run(tmp_path, command, cfg) == 2
    assert needle in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert cli.main(["exponents", "--config", str(tmp_path / "nope.ini")]) == 2


def test_bad_jobs(tmp_path):
    assert run(tmp_path, "exponents", None, "--jobs", "0") == 2


def test_seed_env_overrides_config(tmp_path, monkeypatch):
    out = tmp_path / "out" / "ibp-verify.csv"
    assert run(tmp_path, "ibp-verify", FAST_IBP.format(seed=3)) == 0
    seeded = out.read_bytes()
    assert run(tmp_path, "ibp-verify", FAST_IBP.format(seed=1)) == 0
    other = out.read_bytes()
    assert seeded != other
    monkeypatch.setenv(cli.SEED_ENV, "3")
    assert run(tmp_path, "ibp-verify", FAST_IBP.format(seed=1)) == 0
    assert out.read_bytes() == seeded


def test_reruns_are_byte_identical_and_jobs_independent(tmp_path):
    out = tmp_path / "out" / "ibp-verify.csv"
    run(tmp_path, "ibp-verify", FAST_IBP.format(seed=2))
    first = out.read_bytes()
    run(tmp_path, "ibp-verify", FAST_IBP.format(seed=2))
    assert out.read_bytes() == first
    run(tmp_path, "ibp-verify", FAST_IBP.format(seed=2), "--jobs", "2")
    assert out.read_bytes() == first


def test_carleman_check_writes_plot(tmp_path):
    cfg = ("[carleman-check]\nkind = prop1\ntau_min = 20\ntau_max = 160\n"
           "[family]\nsize = 2\n")
    assert run(tmp_path, "carleman-check", cfg) == 0
    assert (tmp_path / "out" / "carleman-check.svg").exists()
    rows = read_rows(tmp_path / "out" / "carleman-check.csv")
    assert {r["term"] for r in rows} == {"l0", "l1", "rhs", "ratio"}


def test_carleman_check_lp_kind(tmp_path):
    cfg = "[carleman-check]\nkind = thm3\ntau_min = 20\ntau_max = 160\n[params]\ns = 6\n[family]\nsize = 2\n"
    assert run(tmp_path, "carleman-check", cfg) == 0
    assert read_rows(tmp_path / "out" / "carleman-check.csv")[0]["tag"] == "thm3.I"


def test_infinity_uses_params(tmp_path, capsys):
    cfg = "[params]\nn = 11\nm = 3\nalpha0 = 4\n[infinity]\nradii = 1, 2, 4\n"
    assert run(tmp_path, "infinity", cfg) == 0
    assert "Theta = 4" in capsys.readouterr().out


def test_report_aggregates(tmp_path, capsys):
    run(tmp_path, "exponents")
    run(tmp_path, "ibp-verify", FAST_IBP.format(seed=0))
    assert run(tmp_path, "report") == 0
    rows = read_rows(tmp_path / "out" / "summary.csv")
    tags = {r["tag"] for r in rows}
    assert {"eq1.4", "eq1.7", "eq3.11", "eq3.31"} <= tags
    assert all(r["all_passed"] == "true" for r in rows)


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "carleman_lab.cli", "exponents", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "[PASS] exponents" in proc.stdout


def test_report_without_inputs_is_config_error(tmp_path, capsys):
    assert run(tmp_path, "report") == 2
    assert "no result CSV files" in capsys.readouterr().err

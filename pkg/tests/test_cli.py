import csv
import hashlib
import json
import math
import textwrap

import pytest

from dirsinr.cli import main

SMALL = textwrap.dedent("""\
    defaults:
      rings: 2
      ue_count: 1500
      seed: 3
    quantiles: [0.1, 0.5, 0.9]
    matrix:
      isd: [2000, 5000, 10000]
      rx: [omni, dir_35, dir_17_5]
      shadowing: [false, true]
    fluid:
      isd: 5000
      rings: 2
      rx: [omni]
      radii_m: [1000.0]
      angles_deg: [0]
    """)


def _read_table(path):
    with open(path) as fh:
        first = fh.readline()
        rows = list(csv.DictReader(fh))
    return first, rows


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    cfg = root / "small.yaml"
    cfg.write_text(SMALL)
    out = root / "out"
    assert main(["run", str(cfg), "--out", str(out)]) == 0
    return cfg, out


def test_run_writes_one_cdf_per_scenario(small_run):
    _, out = small_run
    assert len(list(out.glob("cdf_*.csv"))) == 18
    assert len(list(out.glob("quantiles_*.csv"))) == 18
    # Six directional scenarios, each paired with its omni twin.
    assert len(list(out.glob("delta_*.csv"))) == 12
    assert (out / "fluid_compare.csv").exists()
    assert not list(out.glob(".*.tmp"))


def test_tables_carry_checksum_and_schema(small_run):
    cfg, out = small_run
    digest = hashlib.sha256(cfg.read_bytes()).hexdigest()
    first, rows = _read_table(out / "cdf_isd2000_omni_noshadow.csv")
    assert first.strip() == f"# config_sha256={digest}"
    assert list(rows[0]) == ["value_db", "cumulative_prob"]
    assert len(rows) == 1500
    assert float(rows[-1]["cumulative_prob"]) == 1.0
    values = [float(r["value_db"]) for r in rows]
    assert values == sorted(values)
    _, q = _read_table(out / "quantiles_isd2000_dir_35_shadow.csv")
    assert [r["p"] for r in q] == ["0.1", "0.5", "0.9"]
    for r in q:
        gamma = 10 ** (float(r["sinr_db"]) / 10)
        assert float(r["throughput_mbps"]) == pytest.approx(10 * math.log2(1 + gamma), abs=2e-6)
    _, d = _read_table(out / "delta_isd5000_dir_17_5_noshadow.csv")
    assert list(d[0]) == ["x_m", "y_m", "delta_db"]


def test_manifest_echo(small_run):
    _, out = small_run
    m = json.loads((out / "manifest.json").read_text())
    assert len(m["scenarios"]) == 18
    assert m["scenarios"][0]["rings"] == 2
    assert set(m["delta_summaries"]) == {n for n in (p["name"] for p in m["scenarios"])
                                         if "dir_" in n}
    for name, digest in m["artifacts"].items():
        assert hashlib.sha256((out / name).read_bytes()).hexdigest() == digest


def test_quantile_gap_across_isd(small_run):
    _, out = small_run

    def p10(name):
        _, rows = _read_table(out / f"quantiles_{name}.csv")
        return float(next(r for r in rows if r["p"] == "0.1")["sinr_db"])

    assert p10("isd2000_omni_noshadow") - p10("isd10000_omni_noshadow") >= 5.0


def test_rerun_and_threads_are_byte_identical(small_run, tmp_path):
    cfg, out = small_run
    out2 = tmp_path / "again"
    assert main(["run", str(cfg), "--out", str(out2), "--threads", "4"]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == sorted(p.name for p in out2.iterdir())
    for n in names:
        assert (out / n).read_bytes() == (out2 / n).read_bytes(), n


def test_seed_override_changes_results(small_run, tmp_path):
    cfg, out = small_run
    out2 = tmp_path / "seeded"
    assert main(["run", str(cfg), "--out", str(out2), "--seed-override", "99"]) == 0
    name = "cdf_isd2000_omni_noshadow.csv"
    assert (out / name).read_bytes() != (out2 / name).read_bytes()


def test_compare_fluid_single_probe(tmp_path):
    cfg = tmp_path / "f.yaml"
    cfg.write_text("fluid:\n  isd: 5000\n  rings: 6\n  rx: [omni]\n"
                   "  radii_m: [1443.0]\n  angles_deg: [0]\n")
    assert main(["compare-fluid", str(cfg), "--out", str(tmp_path)]) == 0
    first, rows = _read_table(tmp_path / "fluid_compare.csv")
    assert first.startswith("# config_sha256=")
    assert len(rows) == 1
    assert list(rows[0]) == ["rx", "r_m", "theta_deg", "fluid_sinr_db", "mc_sinr_db",
                             "diff_db", "note"]
    r = rows[0]
    assert float(r["diff_db"]) == pytest.approx(
        float(r["fluid_sinr_db"]) - float(r["mc_sinr_db"]), abs=2e-6)
    assert abs(float(r["diff_db"])) <= 2.0


def test_compare_fluid_skips_out_of_domain(tmp_path, caplog):
    cfg = tmp_path / "f.yaml"
    cfg.write_text("fluid:\n  isd: 2000\n  rings: 2\n  rx: [omni]\n"
                   "  radii_m: [500.0, 2500.0]\n  angles_deg: [0]\n")
    with caplog.at_level("WARNING"):
        assert main(["compare-fluid", str(cfg), "--out", str(tmp_path)]) == 0
    _, rows = _read_table(tmp_path / "fluid_compare.csv")
    assert len(rows) == 2
    assert rows[1]["note"] == "skipped:r>=isd"
    assert rows[1]["fluid_sinr_db"] == "nan"
    assert any("skipped" in rec.message for rec in caplog.records)


def test_compare_fluid_without_section(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("matrix:\n  isd: [2000]\n")
    assert main(["compare-fluid", str(cfg), "--out", str(tmp_path)]) == 2


def test_invalid_config_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("matrix:\n  isd: [2000]\n  rx: [omni, dir_99]\n")
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert f"{cfg}:3:" in err
    assert not (tmp_path / "o").exists()


def test_missing_config_exit_code(tmp_path):
    assert main(["run", str(tmp_path / "nope.yaml")]) == 2


def test_unwritable_output_exit_code(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("defaults: {ue_count: 50, rings: 0}\nmatrix:\n  isd: [2000]\n")
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", str(cfg), "--out", str(blocker / "sub")]) == 3


def test_bad_thread_count(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("matrix:\n  isd: [2000]\n")
    assert main(["run", str(cfg), "--threads", "0"]) == 2

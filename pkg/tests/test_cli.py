import json
import math

import pytest

from photonfield import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_polynomials_default(capsys):
    code, out, _ = run(capsys, "polynomials")
    assert code == 0
    assert "Q_2 = 2|p|(2|p|a^2 - d)" in out.splitlines()


def test_polynomials_n0_single_line(capsys):
    code, out, _ = run(capsys, "polynomials", "--n-max", "0")
    assert code == 0 and out == "Q_0 = 1\n"


def test_polynomials_n20_hermite_pass(capsys, tmp_path):
    code, out, err = run(capsys, "polynomials", "--n-max", "20", "--out", str(tmp_path))
    assert code == 0 and "PASS" in err
    doc = json.loads((tmp_path / "polynomials.json").read_text())
    assert len(doc["polynomials"]) == 21


def test_optimize_single_photon(capsys, tmp_path):
    code, out, _ = run(capsys, "optimize", "--mode", "10", "--out", str(tmp_path), "--threads", "1")
    assert code == 0
    assert out.startswith("# photonfield optimize (natural units")
    doc = json.loads((tmp_path / "optimize_report.json").read_text())
    assert "hbar = c = 1" in doc["units"]
    peak = doc["photon_peaks"][0]
    assert peak["closed_form_peak"] == pytest.approx(1 / (2 * 1.0 * 0.1), rel=1e-15)
    assert doc["agreement"]["peak_rel_err"] < 1e-6
    assert (tmp_path / "density_closed_form.json").exists()
    assert (tmp_path / "autocorrelation.json").exists()


def test_optimize_peak_ratio(capsys, tmp_path):
    code, _, _ = run(capsys, "optimize", "--count", "3", "--out", str(tmp_path), "--format", "csv")
    assert code == 0
    doc = json.loads((tmp_path / "optimize_report.json").read_text())
    assert abs(doc["photon_peaks"][0]["peak_ratio_to_single_photon"] - 3.0) < 1e-9
    assert (tmp_path / "density_ascent.csv").read_text().startswith("index,coordinate,value")


def test_optimize_counter_propagating(capsys):
    code, out, _ = run(capsys, "optimize", "--mode", "10", "--mode2", "-10")
    assert code == 0 and "D = 0, certificate PASS" in out


def test_sample_vacuum_pass_and_determinism(capsys, tmp_path):
    args = ["sample", "--count", "0", "--samples", "20000", "--seed", "5", "--threads", "2"]
    code, out, _ = run(capsys, *args, "--out", str(tmp_path / "a"))
    assert code == 0 and "summary: PASS" in out
    code, _, _ = run(capsys, *args[:-2], "--threads", "1", "--out", str(tmp_path / "b"))
    assert code == 0
    a = (tmp_path / "a" / "sample_stats.json").read_text()
    b = (tmp_path / "b" / "sample_stats.json").read_text()
    assert a == b


def test_sample_photon_with_baseline_and_dump(capsys, tmp_path):
    dump = tmp_path / "samples.csv"
    code, out, _ = run(capsys, "sample", "--grid-n", "32", "--mode", "10", "--samples", "20000",
                       "--vacuum-baseline", "--out", str(tmp_path), "--dump-samples", str(dump))
    assert code == 0
    doc = json.loads((tmp_path / "sample_stats.json").read_text())
    item = doc["photon_excess"][0]
    assert abs(item["z"]) < 3
    assert "excess_over_sampled_vacuum" in item and "vacuum_baseline" in doc
    assert len(dump.read_text().splitlines()) == 1 + 20000 * 32


def test_sample_refuses_counter_propagating(capsys):
    code, _, err = run(capsys, "sample", "--mode", "10", "--mode2", "-10")
    assert code == 2 and "counter-propagating" in err


def test_autocorr(capsys, tmp_path):
    code, out, _ = run(capsys, "autocorr", "--grid-n", "64", "--samples", "5000", "--out", str(tmp_path))
    assert code == 0 and "most likely R(0) = 1" in out
    doc = json.loads((tmp_path / "autocorr_report.json").read_text())
    assert doc["most_likely_at_zero"] == pytest.approx(1.0)
    assert doc["sampled_at_zero"] == pytest.approx(doc["mean_energy"], rel=1e-10)


@pytest.mark.parametrize("argv,key", [
    (["optimize", "--grid-n", "7"], "grid-n"),
    (["optimize", "--box-length", "-1"], "box-length"),
    (["optimize", "--mode", "0"], "mode"),
    (["optimize", "--mass", "abc"], "mass"),
    (["sample", "--samples", "1"], "samples"),
    (["verify", "--only", "nonsense"], "only"),
])
def test_config_errors_name_the_key(capsys, argv, key):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith(f"config error: {key}:")


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# run settings\ngrid-n = 64\nbox_length = 20pi\ncount = 2\nmode = 5\n")
    code, _, _ = run(capsys, "optimize", "--config", str(cfg), "--mode", "10", "--out", str(tmp_path))
    assert code == 0
    doc = json.loads((tmp_path / "optimize_report.json").read_text())
    assert doc["content"]["grid"]["n_modes"] == 64
    assert doc["content"]["grid"]["box_length"] == pytest.approx(20 * math.pi)
    assert doc["content"]["entries"] == [[10, 2]]


def test_config_file_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("grid_size = 64\n")
    code, _, err = run(capsys, "optimize", "--config", str(cfg))
    assert code == 2 and "grid-size" in err


def test_verify_list(capsys):
    code, out, _ = run(capsys, "verify", "--list")
    assert code == 0
    ids = [line.split("\t")[0] for line in out.splitlines()]
    assert "polynomial_regression" in ids and len(ids) == 10


def test_verify_subset_passes(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--only", "polynomial_regression", "n_scaling",
                       "--out", str(tmp_path))
    assert code == 0
    assert "PASS polynomial_regression" in out
    doc = json.loads((tmp_path / "verify.json").read_text())
    assert doc["passed"] is True


def test_verify_negative_control(capsys):
    # L = 61 puts p = 1 off the lattice, so the momentum checks must fail by name
    code, out, _ = run(capsys, "verify", "--box-length", "61",
                       "--only", "single_photon_maximizer", "autocorrelation_form")
    assert code == 3
    assert "FAIL single_photon_maximizer" in out
    assert "FAIL autocorrelation_form" in out

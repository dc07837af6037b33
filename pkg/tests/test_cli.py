import csv
import io
import json

import pytest

from slopegap.cli import main
from slopegap.hall import hall_cdf


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(text):
    lines = text.splitlines()
    assert lines[0].startswith("# ")
    header = json.loads(lines[0][2:])
    return header, list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_farey_sequence_csv(capsys):
    code, out, _ = run(capsys, "farey", "--Q", "3")
    assert code == 0
    header, rows = read_csv(out)
    assert header["tool"] == "slopegap"
    assert header["config"]["Q"] == 3
    assert [(r["numerator"], r["denominator"]) for r in rows] == [
        ("0", "1"), ("1", "3"), ("1", "2"), ("2", "3"), ("1", "1")
    ]


def test_farey_gaps_json(capsys):
    code, out, _ = run(capsys, "farey", "--Q", "3", "--what", "gaps", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["gaps"] == ["3", "3/2", "3/2", "3"]


def test_orbit_closed_horocycle(capsys):
    code, out, _ = run(capsys, "orbit", "--Q", "5", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["horocycle_length"] == "25"
    assert doc["points"][0] == ["1/5", "1"]


def test_orbit_from_start(capsys):
    code, out, _ = run(capsys, "orbit", "--start", "1/5,1", "--steps", "2")
    assert code == 0
    _, rows = read_csv(out)
    assert (rows[1]["a_num"], rows[1]["b_num"], rows[1]["b_den"]) == ("1", "4", "5")


def test_orbit_float_mode(capsys):
    code, out, _ = run(capsys, "orbit", "--start", "0.7,0.6", "--steps", "5", "--mode", "float")
    assert code == 0
    _, rows = read_csv(out)
    assert len(rows) == 5 and set(rows[0]) == {"step", "a", "b", "return_time"}


@pytest.mark.parametrize(
    "argv",
    [
        ["orbit", "--steps", "3"],
        ["orbit", "--Q", "3", "--start", "1/3,1"],
        ["orbit", "--start", "1/5,1"],
        ["orbit", "--start", "1/5,1/5", "--steps", "2"],
        ["farey", "--Q", "0"],
        ["hall", "--grid", "3:1:10"],
        ["hall", "--format", "svg"],
        ["count", "--Qs", "1,10"],
        ["sl2", "--report", "measure", "--format", "svg", "-o", "x.svg"],
        ["frobnicate"],
        [],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_hall_values_and_kinks(capsys):
    code, out, _ = run(capsys, "hall", "--grid", "1:10:1000", "--kinks", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["kinks"]) == 2
    assert doc["kinks"][0] == pytest.approx(1.0, abs=0.02)
    assert doc["kinks"][1] == pytest.approx(4.0, abs=0.02)
    assert doc["cdf"][-1] == pytest.approx(hall_cdf(10.0))


def test_hall_csv_round_trips_floats(capsys):
    code, out, _ = run(capsys, "hall", "--grid", "1.5:3:4")
    _, rows = read_csv(out)
    assert float(rows[1]["x"]) == 2.0
    assert float(rows[1]["cdf"]) == pytest.approx(hall_cdf(2.0), abs=1e-15)


def test_surface_torus(capsys):
    code, out, _ = run(capsys, "surface", "--grid", "1:5:5", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["valid"] and doc["min_return_time"] == pytest.approx(1.0)
    assert doc["cdf"][1] == pytest.approx(hall_cdf(2.0), abs=1e-12)


def test_surface_invalid_file(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"schema": "surface/1", "name": "x", "cm": 2, "pieces": []}))
    code, out, err = run(capsys, "surface", "--surface", str(path), "--validate-only", "--format", "json")
    assert code == 2
    assert json.loads(out)["valid"] is False
    assert "pieces" in err
    code, _, _ = run(capsys, "surface", "--surface", str(tmp_path / "missing.json"))
    assert code == 2


def test_count(capsys):
    code, out, _ = run(capsys, "count", "--Qs", "10,100,1000", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert [r["hits"] + 1 for r in doc["rows"]] == [r["farey_count"] for r in doc["rows"]]
    assert doc["rows"][1]["farey_count"] == 3045
    assert "slope" in doc["fit"]


def test_equidist_ks(capsys):
    code, out, _ = run(capsys, "equidist", "--quantity", "ks", "--Qs", "50,100,200", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["calibration"]["bounds"][0] == pytest.approx(doc["errors"][0])
    assert doc["rate_bound"] == pytest.approx(-1 / 15)


def test_sl2_reports(capsys):
    code, out, _ = run(capsys, "sl2", "--samples", "500", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["max_frobenius_error"] <= 1e-10
    assert doc["worked_example"]["error_vs_h1"] <= 1e-12
    code, out, _ = run(capsys, "sl2", "--report", "measure", "--samples", "20000")
    assert code == 0
    _, rows = read_csv(out)
    assert [r["name"] for r in rows][0] == "indicator_R_1_2"
    assert all(r["within_3sigma"] in ("true", "false") for r in rows)


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "farey", "Q": 4, "what": "gaps", "format": "json"}))
    code, out, _ = run(capsys, "--config", str(cfg))
    assert code == 0
    assert json.loads(out)["order"] == 4
    code, out, _ = run(capsys, "--config", str(cfg), "farey", "--Q", "3")
    assert json.loads(out)["order"] == 3
    cfg.write_text("[1, 2]")
    code, _, _ = run(capsys, "--config", str(cfg))
    assert code == 2


def test_output_file_and_plot(capsys, tmp_path):
    out_csv = tmp_path / "gaps.csv"
    fig = tmp_path / "gaps.svg"
    code, out, _ = run(capsys, "farey", "--Q", "20", "--what", "gaps", "-o", str(out_csv), "--plot", str(fig))
    assert code == 0 and out == ""
    assert out_csv.read_text().startswith("# ")
    assert fig.read_text().lstrip().startswith("<?xml")


def test_unwritable_output(capsys, tmp_path):
    code, _, _ = run(capsys, "farey", "--Q", "3", "-o", str(tmp_path / "no" / "such" / "file.csv"))
    assert code == 2


def test_svg_is_deterministic(capsys, tmp_path):
    paths = [tmp_path / "a.svg", tmp_path / "b.svg"]
    for p in paths:
        assert run(capsys, "hall", "--grid", "1:10:200", "--format", "svg", "-o", str(p))[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_csv_is_deterministic(capsys):
    first = run(capsys, "sl2", "--report", "measure", "--samples", "5000", "--seed", "3")[1]
    second = run(capsys, "sl2", "--report", "measure", "--samples", "5000", "--seed", "3")[1]
    assert first == second


def test_version(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0 and "slopegap" in out

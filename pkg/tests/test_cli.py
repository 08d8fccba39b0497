import csv
import io
import json
import shutil
import subprocess

import pytest

from fracpow import fixtures
from fracpow.cli import main
from fracpow.phasest import AncillaConfig
from fracpow.power import PowerRequest, measure_error
from fracpow.records import FIELDS, strip_wall_ms


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_power_exact_regime(capsys):
    code, out, _ = run(capsys, "power", "--dim", "4", "--spectrum", "dyadic", "--m", "2",
                       "--r", "1", "--t", "0.5", "--seed", "7")
    assert code == 0
    assert out.splitlines()[0] == ",".join(FIELDS)
    (row,) = rows(out)
    assert float(row["max_err"]) <= 1e-10
    assert out.endswith("\n") and "\r" not in out


def test_power_zero_is_identity(capsys):
    code, out, _ = run(capsys, "power", "--t", "0")
    (row,) = rows(out)
    assert code == 0 and float(row["max_err"]) < 1e-12
    assert all(row[k] == "0" for k in ("calls_u", "calls_cu", "calls_uinv", "calls_cuinv"))


def test_power_file_fixture_matches_library(capsys, tmp_path):
    f = fixtures.third(2, seed=4)
    path = tmp_path / "fx.json"
    fixtures.save_fixture(f, path)
    code, out, _ = run(capsys, "power", "--spectrum", f"file:{path}", "--t", "0.5", "--m", "6",
                       "--seed", "3", "--samples", "4")
    assert code == 0
    rec = measure_error(fixtures.load_fixture(path), PowerRequest(0.5, AncillaConfig(6)), 4, 3)
    assert rows(out)[0]["max_err"] == repr(rec.max_err)


def test_fixture_file_round_trip(tmp_path):
    f = fixtures.dyadic(4, 2, seed=1)
    fixtures.save_fixture(f, tmp_path / "a.json")
    g = fixtures.load_fixture(tmp_path / "a.json")
    assert (g.eigvecs == f.eigvecs).all() and (g.eigphases == f.eigphases).all()


def test_gap_violation_needs_force(capsys):
    code, _, err = run(capsys, "power", "--spectrum", "third", "--dim", "2", "--m", "1")
    assert code == 2 and "gap" in err
    code, _, _ = run(capsys, "power", "--spectrum", "third", "--dim", "2", "--m", "1",
                     "--force", "--samples", "2")
    assert code == 0


def test_validation_and_resource_exit_codes(capsys):
    assert run(capsys, "power", "--bogus")[0] == 2
    assert run(capsys, "power", "--r", "2")[0] == 2
    assert run(capsys, "power", "--spectrum", "nope")[0] == 2
    assert run(capsys, "power", "--mode", "exact-rational")[0] == 2
    assert run(capsys, "power", "--mode", "inverse-free", "--t", "1.5")[0] == 2
    assert run(capsys, "power", "--backend", "dense", "--max-width", "4")[0] == 3


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"t": 0.25, "m": 2, "r": 1, "seed": 5}))
    code, out, _ = run(capsys, "power", "--config", str(cfg))
    (row,) = rows(out)
    assert code == 0 and row["t"] == "0.25" and row["seed"] == "5" and row["r"] == "1"
    # command-line flags win
    code, out, _ = run(capsys, "power", "--config", str(cfg), "--seed", "9")
    assert rows(out)[0]["seed"] == "9"
    cfg.write_text(json.dumps({"t": 0.25, "colour": "red"}))
    code, _, err = run(capsys, "power", "--config", str(cfg))
    assert code == 2 and "colour" in err


def test_json_output(capsys):
    code, out, _ = run(capsys, "power", "--json", "--samples", "2")
    doc = json.loads(out)
    assert code == 0 and isinstance(doc, list) and list(doc[0]) == list(FIELDS)


def test_sweep_m(capsys, tmp_path):
    svg = tmp_path / "s.svg"
    code, out, _ = run(capsys, "sweep-m", "--spectrum", "third", "--dim", "2", "--m-min", "3",
                       "--m-max", "5", "--samples", "4", "--workers", "1", "--svg", str(svg))
    assert code == 0
    table = rows(out)
    assert [r["run_id"] for r in table] == ["sweep-m3", "sweep-m4", "sweep-m5", "fit"]
    assert float(table[-1]["max_err"]) < 0
    assert svg.read_text().startswith("<svg")
    assert run(capsys, "sweep-m", "--m-min", "5", "--m-max", "3")[0] == 2


def test_sweep_m_parallel_matches_serial(capsys):
    args = ("sweep-m", "--spectrum", "third", "--dim", "2", "--m-min", "2", "--m-max", "4",
            "--samples", "2")
    _, serial, _ = run(capsys, *args, "--workers", "1")
    _, par, _ = run(capsys, *args, "--workers", "2")
    assert strip_wall_ms(serial) == strip_wall_ms(par)


def test_sweep_dyadic_floor(capsys):
    code, out, _ = run(capsys, "sweep-m", "--m-min", "1", "--m-max", "3", "--dim", "2",
                       "--r", "1", "--samples", "2", "--workers", "1")
    assert code == 0
    assert all(float(r["max_err"]) < 1e-10 for r in rows(out)[:-1])


@pytest.mark.parametrize("n,t", [(2, "0.5"), (3, "0.25")])
def test_fqft(capsys, n, t):
    code, out, err = run(capsys, "fqft", "--n", str(n), "--t", t, "--samples", "4")
    (row,) = rows(out)
    assert code == 0
    assert int(row["calls_cu"]) + int(row["calls_cuinv"]) == 6
    assert float(row["max_err"]) <= 1e-10
    assert "controlled queries = 6" in err


def test_fqft_integer_t_is_one_direct_call(capsys):
    code, out, _ = run(capsys, "fqft", "--t", "1", "--samples", "2")
    (row,) = rows(out)
    assert code == 0 and row["calls_u"] == "1" and float(row["max_err"]) < 1e-12


def test_primorial(capsys):
    code, out, _ = run(capsys, "primorial", "--b", "3", "--t", "15", "--dim", "4",
                       "--samples", "2")
    a, b = rows(out)
    assert code == 0
    for k in ("calls_u", "calls_cu", "calls_uinv", "calls_cuinv"):
        assert a[k] == b[k]
    code, _, err = run(capsys, "primorial", "--b", "3", "--m", "4")
    assert code == 2 and "m >= 5" in err
    code, out, _ = run(capsys, "primorial", "--b", "1", "--t", "3", "--samples", "2")
    assert code == 0 and all(float(r["max_err"]) < 1e-10 for r in rows(out))


def test_search(capsys):
    code, out, _ = run(capsys, "search", "--dim", "4", "--d", "1", "--k", "1")
    (row,) = rows(out)
    assert code == 0 and float(row["success_prob"]) == pytest.approx(1.0)
    code, out, _ = run(capsys, "search", "--dim", "4", "--d", "4", "--k", "0")
    assert float(rows(out)[0]["success_prob"]) == pytest.approx(1.0)
    code, out, err = run(capsys, "search", "--dim", "8", "--d", "2", "--bits", "5")
    assert code == 0 and "estimated d = 2" in err
    assert run(capsys, "search", "--d", "9")[0] == 2


def test_magnify(capsys):
    code, out, _ = run(capsys, "magnify", "--k", "0,1,2")
    table = rows(out)
    assert code == 0 and [r["k"] for r in table] == ["0", "1", "2"]
    errs = [float(r["error_prob"]) for r in table]
    assert errs == sorted(errs)
    code, out, _ = run(capsys, "magnify", "--exact", "--k", "0,3")
    assert max(float(r["error_prob"]) for r in rows(out)) <= 1e-10


def test_out_file(capsys, tmp_path):
    path = tmp_path / "o.csv"
    code, out, _ = run(capsys, "power", "--samples", "2", "--out", str(path))
    assert code == 0 and out == ""
    assert path.read_text().startswith("run_id,")


@pytest.mark.skipif(shutil.which("fracpow") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["fracpow", "power", "--samples", "2"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("run_id,")

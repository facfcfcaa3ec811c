import csv
import io
import json
import math

import numpy as np
import pytest

from qgrowth.cli import main, table_rows
from qgrowth.fitkit import ObservationSeries, fit


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_simulate_verhulst(capsys):
    code, out, _ = run(capsys, "simulate", "-m", "Verhulst", "-p", "r=1", "-p", "p0=0.001",
                       "--t-stop", "10", "--t-count", "201")
    assert code == 0
    assert out.splitlines()[0].startswith("# qgrowth")
    rows = csv_rows(out)
    assert len(rows) == 201 and list(rows[0]) == ["t", "p", "method", "flag"]
    # logistic closed form at t = 10 from p0 = 1e-3
    assert float(rows[-1]["p"]) == pytest.approx(1 / (1 + 999 * math.exp(-10)), rel=1e-15)
    # near 1 once the curve has saturated
    _, out, _ = run(capsys, "simulate", "-m", "Verhulst", "-p", "r=1", "-p", "p0=0.001",
                    "--t-stop", "20", "--t-count", "201")
    assert abs(float(csv_rows(out)[-1]["p"]) - 1) <= 1e-4
    assert {r["method"] for r in rows} == {"analytic"}


def test_simulate_richards_schaefer_asymptote(capsys):
    code, out, _ = run(capsys, "simulate", "-m", "RichardsSchaefer", "-p", "q=2",
                       "-p", "epsilon=-0.1", "-p", "kappa=1", "-p", "p0=0.001",
                       "--t-stop", "50", "--t-count", "11")
    assert code == 0
    assert float(csv_rows(out)[-1]["p"]) == pytest.approx(math.sqrt(0.8), abs=1e-6)


def test_simulate_zero_rate_is_constant(capsys):
    code, out, _ = run(capsys, "simulate", "-m", "Malthus", "-p", "r=0", "-p", "p0=0.25",
                       "--no-header-comment")
    assert code == 0 and not out.startswith("#")
    assert {r["p"] for r in csv_rows(out)} == {"0.25"}


def test_simulate_is_deterministic(capsys):
    argv = ("simulate", "-m", "TsoularisWallace", "-p", "qprime=0.5", "-p", "q=2",
            "-p", "gamma=0.5", "-p", "kappa=1", "--t-count", "31")
    first = run(capsys, *argv)[1]
    assert first == run(capsys, *argv)[1]


def test_simulate_output_is_lossless(capsys):
    from qgrowth.models import richards_solution
    t = np.linspace(0, 10, 23)
    _, out, _ = run(capsys, "simulate", "-m", "Richards", "-p", "q=0.5", "-p", "kappa=0.8",
                    "-p", "p0=0.01", "--t-count", "23", "--no-header-comment")
    rows = csv_rows(out)
    np.testing.assert_array_equal([float(r["t"]) for r in rows], t)
    np.testing.assert_array_equal([float(r["p"]) for r in rows],
                                  richards_solution(0.5, 0.8, 0.01, t))
    assert max(len(r["p"].replace(".", "").lstrip("0")) for r in rows) == 17


def test_simulate_json_schema(capsys):
    code, out, _ = run(capsys, "simulate", "-m", "Blumberg", "-p", "qprime=0.9",
                       "-p", "gamma=0.5", "-p", "kappa=1", "--format", "json", "--t-count", "5")
    doc = json.loads(out)
    assert code == 0
    assert {"schema_version", "model", "params", "data"} <= set(doc)
    assert doc["model"] == "Blumberg" and doc["method"] == "beta"
    assert len(doc["data"]) == 5 and set(doc["data"][0]) == {"t", "p", "method", "flag"}


def test_simulate_diverged_is_json_null(capsys):
    _, out, _ = run(capsys, "simulate", "-m", "Verhulst", "-p", "kappa=-1", "-p", "p0=2",
                    "--t-stop", "1", "--t-count", "3", "--format", "json")
    data = json.loads(out)["data"]
    assert data[-1]["p"] is None and data[-1]["flag"] == "diverged"


@pytest.mark.parametrize("argv, needle", [
    (("-m", "Richards", "-p", "q=-2", "-p", "kappa=1"), "q"),
    (("-m", "Verhulst", "-p", "gamma=2", "-p", "kappa=1"), "gamma"),
    (("-m", "NoSuchModel", "-p", "kappa=1"), "NoSuchModel"),
    (("-m", "Verhulst", "-p", "kappa"), "kappa"),
    (("-m", "Verhulst", "-p", "kappa=1", "--t-count", "0"), "count"),
])
def test_simulate_usage_errors(capsys, argv, needle):
    code, out, err = run(capsys, "simulate", *argv)
    assert code == 2 and out == ""
    assert err.startswith("qgrowth simulate: error:") and needle in err
    assert len(err.strip().splitlines()) == 1


def test_simulate_writes_file(tmp_path, capsys):
    target = tmp_path / "out.csv"
    code, out, _ = run(capsys, "simulate", "-m", "Gompertz", "-p", "kappa=1", "-o", str(target))
    assert code == 0 and out == ""
    assert target.read_text().count("\n") == 2 + 201


# -- fit -------------------------------------------------------------------


def simulate_to(tmp_path, capsys, *params, name="data.csv", count="50"):
    path = tmp_path / name
    argv = ["simulate", "-m", params[0], "--t-stop", "10", "--t-count", count, "-o", str(path)]
    for p in params[1:]:
        argv += ["-p", p]
    assert run(capsys, *argv)[0] == 0
    return path


def test_fit_round_trip_verhulst(tmp_path, capsys):
    data = simulate_to(tmp_path, capsys, "Verhulst", "kappa=1", "p0=0.01")
    report = tmp_path / "fit.json"
    code, _, _ = run(capsys, "fit", "-m", "Verhulst", "-i", str(data), "-p", "kappa=1.5",
                     "-p", "p0=0.015", "-o", str(report))
    assert code == 0
    doc = json.loads(report.read_text())
    assert {"schema_version", "model", "params", "fit", "data"} <= set(doc)
    assert abs(doc["fit"]["free"]["kappa"] - 1) <= 1e-4
    assert abs(doc["fit"]["free"]["p0"] - 0.01) <= 1e-5
    assert doc["fit"]["converged"] is True
    traj = tmp_path / "fit_trajectory.csv"
    rows = csv_rows(traj.read_text())
    assert len(rows) == 50 and list(rows[0]) == ["t", "p", "method", "flag"]


def test_fit_matches_python_api_bit_for_bit(tmp_path, capsys):
    data = simulate_to(tmp_path, capsys, "Richards", "q=0.5", "kappa=0.8", "p0=0.01")
    code, out, _ = run(capsys, "fit", "-m", "Richards", "-i", str(data), "-p", "q=0.75",
                       "-p", "kappa=1.2", "-p", "p0=0.015", "--free", "q", "--free", "kappa",
                       "--free", "p0")
    assert code == 0
    cli_free = json.loads(out)["fit"]["free"]
    rows = csv_rows(data.read_text())
    series = ObservationSeries([float(r["t"]) for r in rows], [float(r["p"]) for r in rows])
    direct = fit(series, "Richards", ["q", "kappa", "p0"], {"q": 0.75, "kappa": 1.2, "p0": 0.015})
    assert cli_free == direct.free_values


def test_fit_raw_counts(tmp_path, capsys):
    path = tmp_path / "n.csv"
    t = np.linspace(0, 10, 30)
    n = 400 / (1 + (1 / 0.01 - 1) * np.exp(-t))
    path.write_text("t,n\n" + "".join(f"{a:.17g},{b:.17g}\n" for a, b in zip(t, n)))
    code, out, _ = run(capsys, "fit", "-m", "Verhulst", "-i", str(path), "--n-inf", "400",
                       "-p", "kappa=1.3", "-p", "p0=0.012")
    assert code == 0
    assert json.loads(out)["fit"]["free"]["kappa"] == pytest.approx(1.0, rel=1e-5)


def test_fit_missing_column(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("t,x\n0,1\n1,2\n2,3\n")
    code, _, err = run(capsys, "fit", "-m", "Verhulst", "-i", str(path), "-p", "kappa=1")
    assert code == 2 and "'p'" in err and "fit" in err


def test_fit_free_parameter_not_in_row(tmp_path, capsys):
    data = simulate_to(tmp_path, capsys, "Verhulst", "kappa=1", "p0=0.01")
    code, _, err = run(capsys, "fit", "-m", "Verhulst", "-i", str(data), "-p", "kappa=1",
                       "--free", "gamma", "-p", "gamma=1")
    assert code == 2 and "gamma" in err


def test_fit_unidentifiable(tmp_path, capsys):
    data = simulate_to(tmp_path, capsys, "Richards", "q=0.5", "kappa=1", count="3")
    code, _, err = run(capsys, "fit", "-m", "Richards", "-i", str(data), "-p", "q=0.5",
                       "-p", "kappa=1", "-p", "p0=0.001", "--free", "q", "--free", "kappa",
                       "--free", "p0")
    assert code == 2 and "observations" in err


def test_fit_not_converged_exit_3(tmp_path, capsys, monkeypatch):
    import qgrowth.cli as cli
    real = cli.fit
    monkeypatch.setattr(cli, "fit", lambda *a, **k: real(*a, **dict(k, max_evals=10)))
    data = simulate_to(tmp_path, capsys, "Verhulst", "kappa=1", "p0=0.01")
    code, out, _ = run(capsys, "fit", "-m", "Verhulst", "-i", str(data), "-p", "kappa=1.5",
                       "-p", "p0=0.015")
    assert code == 3
    assert json.loads(out)["fit"]["converged"] is False


# -- table -----------------------------------------------------------------


def test_table_text(capsys):
    code, out, _ = run(capsys, "table")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 2 + 13
    turner = next(ln for ln in lines if ln.startswith("Turner"))
    assert "1+q̃(1−γ)" in turner


def test_table_json(capsys):
    code, out, _ = run(capsys, "table", "--format", "json")
    rows = json.loads(out)
    assert code == 0 and isinstance(rows, list) and len(rows) == 13
    by = {r["model"]: r for r in rows}
    assert by["Turner"]["alpha"] == "1+q̃(1−γ)"
    svb = by["SpecializedVonBertalanffy"]
    assert svb["name"] == "Specialized von Bertalanffy"
    assert (svb["qprime"], svb["q"]) == ("1/3", "1/3")


def test_table_csv_and_all(capsys):
    _, out, _ = run(capsys, "table", "--format", "csv")
    assert len(list(csv.DictReader(io.StringIO(out)))) == 13
    _, out, _ = run(capsys, "table", "--format", "csv", "--all")
    models = [r["model"] for r in csv.DictReader(io.StringIO(out))]
    assert len(models) == 15 and "RichardsSchaefer" in models


def test_table_is_byte_stable(capsys):
    for fmt in ("text", "csv", "json"):
        assert run(capsys, "table", "--format", fmt)[1] == run(capsys, "table", "--format", fmt)[1]
    assert len(table_rows()) == 13


# -- check -----------------------------------------------------------------


def test_check_defaults_pass(capsys):
    code, out, _ = run(capsys, "check", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["passed"] is True
    assert all(r["max_delta"] <= 1e-6 and r["ok"] for r in doc["data"])
    assert {r["comparison"] for r in doc["data"]} == {"analytic-ode", "beta-ode"}
    kinds = {r["model"] for r in doc["data"]}
    assert {"Verhulst", "Turner", "Blumberg", "TsoularisWallace"} <= kinds


def test_check_loose_tolerance_fails_with_structure(capsys):
    code, out, _ = run(capsys, "check", "--rel-tol", "1e-2", "--format", "json")
    doc = json.loads(out)
    assert code == 1 and doc["passed"] is False
    assert max(r["max_delta"] for r in doc["data"]) > 1e-6


def test_check_single_model(capsys):
    code, out, _ = run(capsys, "check", "-m", "Richards", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and {r["model"] for r in doc["data"]} == {"Richards"}
    code, out, _ = run(capsys, "check", "-m", "Richards")
    assert code == 0 and "Richards" in out and "Verhulst" not in out


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert "0.1.0" in capsys.readouterr().out

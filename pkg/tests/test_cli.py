"""End-to-end command tests driven through main(argv) in process."""

import csv

import numpy as np
import pytest

from cfcopula.cli import main
from cfcopula.copula import ObservationSample, empirical_copula
from cfcopula.data import ingest, read_grid_csv, write_table, Table


@pytest.fixture()
def dataset(tmp_path):
    """Small one-covariate table with a matching counterfactual column."""
    rng = np.random.default_rng(42)
    n = 400
    x = rng.normal(size=n)
    table = Table(
        names=("wage", "spend", "x", "xs"),
        columns={
            "wage": 2.0 * x + rng.normal(size=n),
            "spend": 0.7 * x + rng.normal(size=n),
            "x": x,
            "xs": 0.8 * x,
        },
    )
    path = tmp_path / "panel.csv"
    write_table(table, path)
    return path, table


def _roles_args(path):
    return ["--input", str(path), "--y1", "wage", "--y2", "spend", "--x", "x"]


def _read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_estimate_writes_all_outputs(dataset, tmp_path):
    path, _ = dataset
    out = tmp_path / "out"
    rc = main(["estimate", *_roles_args(path), "--xstar", "xs",
               "--grid-m", "20", "--out-dir", str(out)])
    assert rc == 0
    for name in ("grid_actual.csv", "grid_counterfactual.csv",
                 "measures.csv", "diagnostics.csv", "summary.txt"):
        assert (out / name).exists()
    rows = _read_rows(out / "measures.csv")
    assert rows[0] == ["target", "measure", "value"]
    targets = {r[0] for r in rows[1:]}
    assert targets == {"actual", "counterfactual", "effect"}
    assert len(rows) == 1 + 12
    for r in rows[1:]:
        assert abs(float(r[2])) <= 1.0


def test_actual_grid_matches_in_process_estimate(dataset, tmp_path):
    path, table = dataset
    out = tmp_path / "out"
    assert main(["estimate", *_roles_args(path), "--scenario", "identity",
                 "--grid-m", "20", "--out-dir", str(out)]) == 0
    m, values = read_grid_csv(out / "grid_actual.csv")
    sample = ObservationSample(
        y1=table.columns["wage"], y2=table.columns["spend"],
        x=table.columns["x"], xstar=table.columns["x"],
    )
    grid = empirical_copula(sample, m=20)
    assert m == 20
    assert np.array_equal(values, grid.values)  # CSV round trip cannot drift


def test_identity_scenario_with_huge_bandwidth_reproduces_actual(dataset, tmp_path):
    path, table = dataset
    out = tmp_path / "out"
    assert main(["estimate", *_roles_args(path), "--scenario", "identity",
                 "--bandwidth-c", "1e6", "--grid-m", "50",
                 "--out-dir", str(out)]) == 0
    _, actual = read_grid_csv(out / "grid_actual.csv")
    _, cf = read_grid_csv(out / "grid_counterfactual.csv")
    n = table.n
    assert np.max(np.abs(cf - actual)) <= 2.0 / np.sqrt(n)


def test_estimate_is_deterministic(dataset, tmp_path):
    path, _ = dataset
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        assert main(["estimate", *_roles_args(path), "--xstar", "xs",
                     "--grid-m", "20", "--out-dir", str(out)]) == 0
        outs.append((out / "measures.csv").read_bytes())
    assert outs[0] == outs[1]


def test_bootstrap_outputs_and_seed_determinism(dataset, tmp_path):
    path, _ = dataset
    blobs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        rc = main(["bootstrap", *_roles_args(path), "--xstar", "xs",
                   "--grid-m", "20", "--boot-b", "12", "--seed", "7",
                   "--out-dir", str(out)])
        assert rc == 0
        rows = _read_rows(out / "measures.csv")
        assert rows[0] == ["target", "measure", "value", "lo", "hi"]
        for r in rows[1:]:
            lo, val, hi = float(r[3]), float(r[2]), float(r[4])
            assert lo <= val <= hi
        blobs.append((out / "measures.csv").read_bytes())
    assert blobs[0] == blobs[1]

    out = tmp_path / "c"
    assert main(["bootstrap", *_roles_args(path), "--xstar", "xs",
                 "--grid-m", "20", "--boot-b", "12", "--seed", "8",
                 "--out-dir", str(out)]) == 0
    assert (out / "measures.csv").read_bytes() != blobs[0]


def test_config_file_with_flag_override(dataset, tmp_path):
    path, _ = dataset
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# comment line\n"
        f"input = {path}\n"
        "y1 = wage\ny2 = spend\nx = x\nxstar = xs\n"
        "grid_m = 10\n"
        "bandwidth-c = 2.5\n",
        encoding="utf-8",
    )
    out = tmp_path / "out"
    rc = main(["estimate", "--config", str(cfg), "--bandwidth-c", "3.5",
               "--out-dir", str(out)])
    assert rc == 0
    diag = {r[0]: r[1] for r in _read_rows(out / "diagnostics.csv")}
    assert float(diag["bandwidth_c"]) == 3.5  # flag beats config
    assert int(diag["grid_m"]) == 10          # config beats default


def test_sweep_table_shape_and_affected_fraction(dataset, tmp_path):
    rng = np.random.default_rng(3)
    n = 200
    edu = rng.integers(8, 18, size=n).astype(float)
    table = Table(
        names=("wage", "spend", "edu"),
        columns={
            "wage": 0.3 * edu + rng.normal(size=n),
            "spend": 0.2 * edu + rng.normal(size=n),
            "edu": edu,
        },
    )
    path = tmp_path / "edu.csv"
    write_table(table, path)
    out = tmp_path / "out"
    rc = main(["sweep", "--input", str(path), "--y1", "wage", "--y2", "spend",
               "--x", "edu", "--param", "s", "--from", "10", "--to", "12",
               "--column", "edu", "--grid-m", "20", "--boot-b", "8",
               "--seed", "5", "--out-dir", str(out)])
    assert rc == 0
    rows = _read_rows(out / "sweep.csv")
    assert rows[0] == ["value", "measure", "target", "point", "lo", "hi",
                       "affected_fraction"]
    assert len(rows) == 1 + 3 * 12
    for s in (10, 11, 12):
        got = {float(r[6]) for r in rows[1:] if r[0] == str(s)}
        assert got == {np.mean(edu < s)}
    for r in rows[1:]:
        assert float(r[4]) <= float(r[3]) <= float(r[5])


def test_synth_data_command(tmp_path):
    out = tmp_path / "d"
    assert main(["synth-data", "--n", "250", "--seed", "11",
                 "--out-dir", str(out)]) == 0
    table = ingest(out / "synth.csv")
    assert table.n == 250
    assert "pincome" in table.names and "cedu" in table.names

    other = tmp_path / "e"
    assert main(["synth-data", "--n", "250", "--seed", "11",
                 "--out-dir", str(other)]) == 0
    assert (out / "synth.csv").read_bytes() == (other / "synth.csv").read_bytes()


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.strip()


def test_no_command_prints_usage(capsys):
    assert main([]) == 1
    assert "usage" in capsys.readouterr().err.lower()


def test_usage_errors_exit_one(dataset, tmp_path, capsys):
    path, _ = dataset
    assert main(["estimate", "--bogus"]) == 1

    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nonsense = 1\n", encoding="utf-8")
    assert main(["estimate", "--config", str(cfg)]) == 1
    assert "nonsense" in capsys.readouterr().err

    # both scenario and explicit counterfactual columns
    assert main(["estimate", *_roles_args(path), "--xstar", "xs",
                 "--scenario", "identity", "--out-dir", str(tmp_path)]) == 1

    # unknown transform name
    assert main(["estimate", *_roles_args(path),
                 "--scenario", "min_with(x, 1)", "--out-dir", str(tmp_path)]) == 1

    # odd grid resolution cannot place the (1/2, 1/2) node
    assert main(["estimate", *_roles_args(path), "--xstar", "xs",
                 "--grid-m", "21", "--out-dir", str(tmp_path)]) == 1

    # empty sweep range
    assert main(["sweep", *_roles_args(path), "--param", "s", "--from", "5",
                 "--to", "3", "--column", "x", "--out-dir", str(tmp_path)]) == 1


def test_data_errors_exit_two(tmp_path, capsys):
    assert main(["estimate", "--input", str(tmp_path / "missing.csv"),
                 "--y1", "a", "--y2", "b", "--x", "c", "--xstar", "c",
                 "--out-dir", str(tmp_path)]) == 2

    bad = tmp_path / "bad.csv"
    bad.write_text("wage,spend,x,xs\n1,2,3,4\nzap,6,7,8\n", encoding="utf-8")
    assert main(["estimate", "--input", str(bad), "--y1", "wage",
                 "--y2", "spend", "--x", "x", "--xstar", "xs",
                 "--out-dir", str(tmp_path)]) == 2
    assert "(row 2, wage)" in capsys.readouterr().err


def test_numeric_failures_exit_three(dataset, tmp_path):
    path, _ = dataset
    rc = main(["estimate", *_roles_args(path),
               "--scenario", "set_constant(x, 0.123456789)",
               "--bandwidth-c", "1e-8", "--out-dir", str(tmp_path)])
    assert rc == 3

import csv
import io
import json
import math

import numpy as np
import pytest

from bmhull import bounds, harness
from bmhull.bounds import BoundRow
from bmhull.cli import main
from bmhull.harness import (
    ABOVE,
    BELOW,
    IN_BOUNDS,
    INCONCLUSIVE,
    ConfigError,
    ExperimentConfig,
    ReplicateError,
    fixed_time_samples,
    judge,
    run,
    schedule,
)
from bmhull.transform import Estimate

SMALL = ["--steps", "200", "--replicates", "64"]


def cli(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_schedule_basics():
    assert schedule(0, 4, lambda i: 1 / 0) == []
    assert schedule(6, 1, lambda i: i * i) == schedule(6, 3, lambda i: i * i) == [0, 1, 4, 9, 16, 25]
    with pytest.raises(ValueError):
        schedule(3, 0, lambda i: i)


@pytest.mark.parametrize("workers", [1, 4])
def test_failing_replicate_is_named(workers):
    def job(i):
        if i == 5:
            raise RuntimeError("boom")
        return i

    with pytest.raises(ReplicateError) as err:
        schedule(10, workers, job)
    assert err.value.replicate == 5
    assert "replicate 5" in str(err.value) and "boom" in str(err.value)


def test_worker_count_does_not_change_samples():
    a = fixed_time_samples(3, 300, 12, 1, workers=1)
    b = fixed_time_samples(3, 300, 12, 1, workers=4)
    assert all(np.array_equal(a[k], b[k]) for k in a)


def test_judge():
    def est(lo, hi):
        return Estimate((lo + hi) / 2, 0.0, 10, (lo, hi))

    assert judge(est(1.0, 2.0), 1.0, 2.0) == IN_BOUNDS
    assert judge(est(0.96, 2.09), 1.0, 2.0) == IN_BOUNDS
    assert judge(est(0.5, 0.9), 1.0, 2.0) == BELOW
    assert judge(est(2.2, 2.5), 1.0, 2.0) == ABOVE
    assert judge(est(0.9, 1.5), 1.0, 2.0) == INCONCLUSIVE
    assert judge(Estimate(1.0, math.inf, 2, (-math.inf, math.inf)), 1.0, 2.0) == INCONCLUSIVE


@pytest.mark.parametrize("kw", [
    dict(command="nope"),
    dict(command="estimate"),
    dict(command="estimate", dim=2, steps=50),
    dict(command="estimate", dim=2, replicates=1),
    dict(command="bounds", format="xml"),
    dict(command="inverse", dim=2, method="guess"),
    dict(command="stage", dim=3, radii=(1.0, 2.0)),
    dict(command="stage", dim=2, radii=(1.0, -2.0)),
    dict(command="bounds", workers=0),
    dict(command="bounds", seed=2 ** 64),
])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        ExperimentConfig(**kw).validate()


def test_bounds_table(capsys):
    code, out = cli(capsys, "bounds", "--nmax", "5")
    assert code == 0
    table = rows(out)
    assert len(table) == 38
    assert list(table[0]) == list(harness.COLUMNS)
    v1 = [r for r in table if r["quantity"] == "V1" and r["dim"] == "2"][0]
    assert float(v1["exact"]) == pytest.approx(math.pi / 2, rel=1e-15)
    theta = [r for r in table if r["quantity"] == "ThetaV" and r["dim"] == "2"][0]
    assert theta["exact"] == "" and float(theta["lower"]) == pytest.approx(2 / math.pi)


def test_json_mirrors_csv_with_exact_floats(capsys):
    _, out_csv = cli(capsys, "bounds", "--nmax", "3")
    _, out_json = cli(capsys, "bounds", "--nmax", "3", "--format", "json")
    objs = json.loads(out_json)
    table = rows(out_csv)
    assert len(objs) == len(table)
    for obj, row in zip(objs, table):
        assert list(obj) == list(row)
        ref = bounds.theorem_bounds(obj["quantity"], obj["dim"])
        assert obj["lower"] == ref.lower and obj["upper"] == ref.upper
        assert float(row["lower"]) == ref.lower


def test_estimate_is_byte_identical(tmp_path, capsys):
    args = ["estimate", "--dim", "2", "--seed", "7"] + SMALL
    assert main(args + ["--output", str(tmp_path / "a.csv")]) == 0
    assert main(args + ["--output", str(tmp_path / "b.csv"), "--workers", "3"]) == 0
    a, b = (tmp_path / "a.csv").read_bytes(), (tmp_path / "b.csv").read_bytes()
    assert a == b
    table = rows(a.decode())
    assert [r["quantity"] for r in table] == ["V1", "S1", "D1", "R1"]


def test_report_dim3_volume_row(capsys):
    code, out = cli(capsys, "report", "--dim", "3", "--method", "transform", *SMALL)
    assert code in (0, 1)
    v1 = [r for r in rows(out) if r["quantity"] == "V1"][0]
    assert float(v1["exact"]) == pytest.approx(1.11405, abs=1e-5)
    assert {r["method"] for r in rows(out)} == {"fixed_time", "transform"}


def test_output_dir_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(harness.OUTPUT_DIR_ENV, str(tmp_path))
    assert main(["bounds", "--nmax", "1", "--output", "sub/table.csv"]) == 0
    assert len(rows((tmp_path / "sub" / "table.csv").read_text())) == 6
    assert capsys.readouterr().out == ""


def test_config_error_exit_code(capsys):
    assert main(["estimate", "--dim", "2", "--steps", "50"]) == 2
    assert "steps" in capsys.readouterr().err
    with pytest.raises(SystemExit) as err:
        main(["estimate"])
    assert err.value.code == 2


def test_bounds_come_from_bounds_module(monkeypatch, capsys):
    args = ["inverse", "--dim", "2", "--method", "transform"] + SMALL
    code, out = cli(capsys, *args)
    before = rows(out)
    assert code == 0 and all(r["verdict"] != BELOW for r in before)

    real = bounds.theorem_bounds

    def shifted(quantity, n):
        r = real(quantity, n)
        return BoundRow(r.quantity, r.dim, 100 * r.lower, 100 * r.upper, r.exact)

    monkeypatch.setattr(bounds, "theorem_bounds", shifted)
    code, out = cli(capsys, *args)
    after = rows(out)
    assert code == 1
    for a, b in zip(before, after):
        assert float(b["lower"]) == pytest.approx(100 * float(a["lower"]))
        assert b["verdict"] == BELOW
        assert b["mean"] == a["mean"]


def test_inverse_both_methods(capsys):
    code, out = cli(capsys, "inverse", "--dim", "1", "--passage-replicates", "40", *SMALL)
    table = rows(out)
    assert {(r["quantity"], r["method"]) for r in table} == {
        (q, m) for q in ("ThetaV", "ThetaD", "ThetaR") for m in ("transform", "direct")}
    assert all(r["censored_fraction"] == "0" for r in table)


def test_optimize_table(capsys):
    code, out = cli(capsys, "optimize", "--nmax", "6")
    table = rows(out)
    assert code == 0 and len(table) == 6
    assert list(table[0]) == ["n", "value", "numeric_value", "kkt_residual", "coord_max_error"]
    for r in table:
        assert float(r["kkt_residual"]) < 1e-10
        assert abs(float(r["numeric_value"]) / float(r["value"]) - 1) < 1e-8


def test_stage_table(capsys):
    code, out = cli(capsys, "stage", "--dim", "2", "--replicates", "3", "--radii", "1,1.5")
    table = rows(out)
    assert code == 0 and len(table) == 3
    assert list(table[0]) == ["replicate", "T_1", "T_2", "simplex_volume", "hull_volume", "total_time"]
    for r in table:
        assert float(r["simplex_volume"]) * 2 >= 1.5 - 1e-9
        assert float(r["T_2"]) == float(r["total_time"])
    assert main(["stage", "--dim", "2", "--radii", "1,2,3"]) == 2


def test_dump_paths(tmp_path, capsys):
    out_dir = tmp_path / "paths"
    main(["estimate", "--dim", "2", "--steps", "100", "--replicates", "3",
          "--dump-paths", str(out_dir)])
    files = sorted(out_dir.iterdir())
    assert len(files) == 3
    assert np.loadtxt(files[0]).shape == (101, 2)


def test_run_is_pure_function_of_config():
    cfg = ExperimentConfig("report", dim=2, steps=150, replicates=40, seed=3, passage_replicates=8)
    a, b = run(cfg), run(cfg)
    assert harness.render(a, "csv") == harness.render(b, "csv")
    assert a.status == b.status

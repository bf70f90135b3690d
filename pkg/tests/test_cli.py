import csv
import json

import pytest

from mohaf import AllocationSet, Instance, Pair
from mohaf.cli import main
from mohaf.experiments import ABLATIONS, ExperimentConfig


def _cfg(tmp_path, **kw):
    data = {"n_requests": 120, "n_resources": 30, "rounds": 300, "window": 100,
            "ladder": [[100, 25], [200, 50], [400, 100]], "timing_repeats": 1}
    data.update(kw)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data))
    return str(path)


def _run(tmp_path, command, name, *extra, seeds="0,1,2"):
    rc = main([command, "--config", _cfg(tmp_path), "--seed", seeds, "--out", str(tmp_path / "runs"),
               "--run-name", name, *extra])
    return rc, tmp_path / "runs" / command / name


def _rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_compare_layout_and_counts(tmp_path):
    rc, out = _run(tmp_path, "compare", "a")
    assert rc == 0
    assert {p.name for p in out.iterdir()} >= {"config.json", "results.csv", "summary.json"}
    assert len(_rows(out / "results.csv")) == 4 * 3
    summary = json.loads((out / "summary.json").read_text())
    assert len(summary["summary"]) == 4
    assert summary["metadata"]["rng"].startswith("numpy.random.PCG64")
    assert summary["failures"] == []
    assert json.loads((out / "config.json").read_text())["seeds"] == [0, 1, 2]


@pytest.mark.parametrize("command", ["compare", "ablate", "scale", "price-sim"])
def test_rerun_is_byte_identical(tmp_path, command):
    rc1, a = _run(tmp_path, command, "first", seeds="0,1")
    rc2, b = _run(tmp_path, command, "second", seeds="0,1")
    assert rc1 == rc2 == 0
    assert (a / "results.csv").read_bytes() == (b / "results.csv").read_bytes()
    assert b"\r\n" in (a / "results.csv").read_bytes()


def test_ablate_rows_and_weight_metadata(tmp_path):
    rc, out = _run(tmp_path, "ablate", "x")
    assert rc == 0
    rows = _rows(out / "results.csv")
    assert len(rows) == 6 * 3 and {r["label"] for r in rows} == set(ABLATIONS)
    weights = json.loads((out / "summary.json").read_text())["weights"]
    assert weights["NoEnergy"] == pytest.approx([4 / 9, 3 / 9, 0, 2 / 9])
    assert weights["NoFairness"] == pytest.approx([0.5, 0.375, 0.125, 0])


def test_scale_rows_and_separate_timing(tmp_path):
    rc, out = _run(tmp_path, "scale", "s", seeds="0")
    assert rc == 0
    rows = _rows(out / "results.csv")
    assert [int(r["n_requests"]) for r in rows] == [100, 200, 400]
    assert "wall_time_s" not in rows[0]
    assert len(_rows(out / "timing.csv")) == 3


def test_price_sim_report(tmp_path):
    rc, out = _run(tmp_path, "price-sim", "p", seeds="0")
    assert rc == 0
    report = json.loads((out / "convergence.json").read_text())["0"]
    assert {"price_stable", "utilization_stable", "revenue_stable"} <= set(report)
    assert len(_rows(out / "results.csv")) == 300 * 3


def test_invalid_config_is_a_usage_error(tmp_path, capsys):
    assert main(["compare", "--mechanisms", "nope", "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"seeds": []}))
    assert main(["compare", "--config", str(bad), "--out", str(tmp_path)]) == 2
    bad.write_text(json.dumps({"rounds": 10, "window": 100}))
    assert main(["price-sim", "--config", str(bad), "--out", str(tmp_path)]) == 2


def test_partial_failure_lists_failed_runs(tmp_path, monkeypatch, capsys):
    import mohaf.mechanisms as mech

    def broken(inst, prices=None, hist=None, seed=0, params=None, stats=None):
        if seed == 1:
            raise RuntimeError("boom")
        return AllocationSet()

    monkeypatch.setitem(mech.MECHANISMS, "random", broken)
    rc, out = _run(tmp_path, "compare", "f", "--mechanisms", "random")
    assert rc == 1
    failures = json.loads((out / "summary.json").read_text())["failures"]
    assert [(f["mechanism"], f["seed"]) for f in failures] == [("random", 1)]
    assert "random seed 1" in capsys.readouterr().err


def test_gen_allocate_validate_round_trip(tmp_path, capsys):
    inst_path, alloc_path = tmp_path / "i.json", tmp_path / "a.csv"
    assert main(["gen", "--requests", "40", "--resources", "10", "--seed", "3", "-o", str(inst_path)]) == 0
    inst = Instance.load(inst_path)
    assert len(inst.requests) == 40
    assert main(["allocate", str(inst_path), "--mechanism", "greedy_priority", "-o", str(alloc_path)]) == 0
    assert main(["validate", str(inst_path), str(alloc_path)]) == 0
    bad = AllocationSet([Pair(inst.requests[0].id, inst.resources[0].id, 1e9, 0.5)])
    bad_path = tmp_path / "bad.csv"
    bad_path.write_text(bad.to_csv())
    assert main(["validate", str(inst_path), str(bad_path)]) == 1
    assert "budget" in capsys.readouterr().out


def test_config_round_trip():
    cfg = ExperimentConfig(seeds=[4, 5], n_requests=50)
    assert ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"nonsense": 1})
    with pytest.raises(ValueError):
        ExperimentConfig(mechanisms=[])

import csv
import io
import json
import subprocess
import sys

import pytest

from fslcg.bench import CSV_HEADER, BenchRecord, SweepConfig, run_sweep, write_csv
from fslcg.cli import main
from fslcg.ffcg import dumps_instance


@pytest.fixture
def worked_file(tmp_path, worked):
    p = tmp_path / "worked.json"
    p.write_text(dumps_instance(worked))
    return p


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_generate_and_summary(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    code, _, err = run(capsys, "generate", "--kind", "small_world", "--n", 10, "--deg", 4, "--seed", 1, "--out", a)
    assert code == 0 and "n=10 edges=20" in err
    run(capsys, "generate", "--kind", "small_world", "--n", 10, "--deg", 4, "--seed", 1, "--out", b)
    assert a.read_bytes() == b.read_bytes()
    code, out, _ = run(capsys, "generate", "--n", 10, "--seed", 1)
    assert code == 0 and json.loads(out)["meta"]["scenario"]["kind"] == "uniform"


def test_generate_from_config(tmp_path, capsys):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"kind": "power_law", "n_forwarders": 12, "seed": 5}))
    code, out, _ = run(capsys, "generate", "--config", conf, "--seed", 6)
    data = json.loads(out)
    assert code == 0 and data["meta"]["scenario"]["seed"] == 6 and len(data["forwarders"]) == 12


def test_solve(worked_file, capsys):
    for coalition, cost in [("A,B", 2900), ("A", 3000), ("B", 2100), ("", 0)]:
        code, out, err = run(capsys, "solve", worked_file, "--coalition", coalition)
        assert code == 0 and json.loads(out)["total_cost"] == cost and f"cost={cost}" in err
    code, out, _ = run(capsys, "solve", worked_file)
    assert json.loads(out)["coalition"] == ["A", "B"]


def test_shapley_methods_agree(worked_file, capsys):
    results = {}
    for method in ("fs_lcg", "baseline", "bruteforce", "pairwise"):
        code, out, _ = run(capsys, "shapley", worked_file, "--method", method)
        assert code == 0
        data = json.loads(out)
        results[method] = {k: (v["value_numerator"], v["value_denominator"]) for k, v in data["values"].items()}
    assert all(r == {"A": (1900, 1), "B": (1000, 1)} for r in results.values())
    assert data["savings"]["per_forwarder"]["A"]["savings"] == pytest.approx(11 / 30)


def test_shapley_efficiency_generated(tmp_path, capsys):
    p = tmp_path / "g.json"
    run(capsys, "generate", "--kind", "small_world", "--n", 9, "--deg", 4, "--seed", 2, "--out", p)
    code, out, _ = run(capsys, "shapley", p)
    data = json.loads(out)
    total = sum(v["value_numerator"] / v["value_denominator"] for v in data["values"].values())
    assert total == pytest.approx(data["v_grand"])


def test_guard_exit_code(tmp_path, capsys):
    p = tmp_path / "big.json"
    run(capsys, "generate", "--n", 14, "--seed", 0, "--out", p)
    code, _, err = run(capsys, "shapley", p, "--method", "bruteforce")
    assert code == 4 and "guard" in err
    code, _, _ = run(capsys, "shapley", p, "--method", "baseline", "--max-baseline-n", 10)
    assert code == 4


def test_infeasible_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({
        "forwarders": ["A"],
        "services": [{"owner": "A", "origin": "USLAX", "destination": "CNSHA", "cost_per_box": 900, "box_count": 1}],
        "requests": [{"owner": "A", "origin": "USLAX", "destination": "CNSHA", "volume": 20},
                     {"owner": "A", "origin": "USLAX", "destination": "CNSHA", "volume": 20}],
    }))
    assert run(capsys, "solve", p)[0] == 3
    assert run(capsys, "verify", p)[0] == 3


def test_verify_instance(worked_file, tmp_path, capsys):
    code, out, _ = run(capsys, "verify", worked_file)
    assert code == 0 and out.count("PASS") == 4
    p = tmp_path / "one.json"
    p.write_text(json.dumps({
        "forwarders": ["A"],
        "services": [{"owner": "A", "origin": "USLAX", "destination": "CNSHA", "cost_per_box": 900, "box_count": 1}],
        "requests": [{"owner": "A", "origin": "USLAX", "destination": "CNSHA", "volume": 3}],
    }))
    assert run(capsys, "verify", p)[0] == 0


def test_verify_generated(tmp_path, capsys):
    for kind in ("uniform", "small_world", "power_law"):
        p = tmp_path / f"{kind}.json"
        run(capsys, "generate", "--kind", kind, "--n", 7, "--seed", 3, "--deg", 2, "--out", p)
        code, out, _ = run(capsys, "verify", p)
        assert code == 0, out


def test_verify_non_lcg_table(tmp_path, capsys):
    p = tmp_path / "t.json"
    # |S|^2 on a path 0-1-2: agent 0's marginal depends on agent 2
    values = {",".join(map(str, s)): len(s) ** 2 for s in [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2)]}
    p.write_text(json.dumps({"n": 3, "edges": [[0, 1], [1, 2]], "values": values}))
    code, out, _ = run(capsys, "verify", p)
    assert code == 2 and "FAIL locality" in out and "coalition" in out
    p.write_text(json.dumps({"n": 3, "edges": [[0, 1], [1, 2], [0, 2]], "values": values}))
    assert run(capsys, "verify", p)[0] == 0


def test_bench_csv(tmp_path, capsys):
    out = tmp_path / "b.csv"
    args = ["bench", "--kind", "small_world", "--n", 8, 10, "--deg", 2, 4, "--seeds", 0, 1,
            "--methods", "fs_lcg", "baseline", "bruteforce", "--jobs", 1, "--out", out]
    assert run(capsys, *args)[0] == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == CSV_HEADER
    assert len(rows) == 1 + 2 * 2 * 2 * 3
    by_instance = {}
    for r in rows[1:]:
        by_instance.setdefault(tuple(r[:4]), set()).add(r[7])
        assert float(r[5]) >= 0
    assert all(len(costs) == 1 for costs in by_instance.values())
    # reproducible apart from timings, also with a worker pool
    out2 = tmp_path / "b2.csv"
    run(capsys, *args[:-4], "--jobs", 2, "--out", out2)
    strip = lambda rs: [r[:5] + r[6:] for r in rs]  # noqa: E731
    assert strip(list(csv.reader(out2.open()))) == strip(rows)


def test_bench_records_guard_failures():
    cfg = SweepConfig(kind="uniform", ns=[13], seeds=[0], methods=["fs_lcg", "bruteforce"], max_degree=None)
    rows = run_sweep(cfg, jobs=1)
    assert rows[0].elapsed_s is not None and rows[1].elapsed_s is None and "GuardError" in rows[1].error
    assert rows[0].total_cost == rows[1].total_cost
    buf = io.StringIO()
    write_csv(rows, buf)
    assert buf.getvalue().splitlines()[2].endswith(",,,%d," % rows[0].total_cost)


def test_sweep_config_json():
    cfg = SweepConfig.from_json({"kind": "power_law", "n": [5, 10], "seeds": [0, 1]})
    assert cfg.tasks() == [(5, None, 0), (5, None, 1), (10, None, 0), (10, None, 1)]
    with pytest.raises(ValueError):
        SweepConfig.from_json({"kind": "power_law", "bogus": 1})
    with pytest.raises(ValueError):
        SweepConfig(methods=["magic"])


def test_record_row_format():
    rec = BenchRecord("uniform", 5, None, 0, "fs_lcg", 0.5, 10, 1000, 0.25)
    assert rec.row() == ["uniform", "5", "", "0", "fs_lcg", "0.500000", "10", "1000", "0.25"]


def test_console_entry_point(worked_file):
    proc = subprocess.run([sys.executable, "-m", "fslcg.cli", "solve", str(worked_file)], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["total_cost"] == 2900

import csv
import json
import random

from maxwshop.cli import (
    EXIT_CHECK,
    EXIT_OK,
    EXIT_PARSE,
    main,
)
from maxwshop.model import format_instance_text, load_instance
from testutil import make_instance, random_base


def write_instance(tmp_path, inst, name="inst.txt"):
    path = tmp_path / name
    path.write_text(format_instance_text(inst))
    return path


def tiny_instance():
    return make_instance([[(0, 2), (0, 1)], [(0, 2)]], 1, [(0, 2, 0, 4)])


class TestSolve:
    def test_allmaxw_writes_artifacts(self, tmp_path, capsys):
        path = write_instance(tmp_path, tiny_instance())
        code = main(
            ["solve", str(path), "--strategy", "allmaxw", "--outdir", str(tmp_path)]
        )
        assert code == EXIT_OK
        record = json.loads((tmp_path / "inst.allmaxw.record.json").read_text())
        assert record["status"] == "optimal"
        assert record["c_max"] is not None
        assert record["pool"] == 1
        assert record["activated"] == 1
        assert (tmp_path / "inst.allmaxw.schedule.json").exists()
        assert (tmp_path / "inst.allmaxw.gantt.txt").exists()
        assert "optimal" in capsys.readouterr().out

    def test_both_strategies_agree(self, tmp_path):
        path = write_instance(tmp_path, tiny_instance())
        assert main(["solve", str(path), "--strategy", "allmaxw", "--outdir", str(tmp_path)]) == EXIT_OK
        assert main(["solve", str(path), "--strategy", "iterative", "--outdir", str(tmp_path)]) == EXIT_OK
        a = json.loads((tmp_path / "inst.allmaxw.record.json").read_text())
        b = json.loads((tmp_path / "inst.iterative.record.json").read_text())
        assert a["status"] == b["status"] == "optimal"
        assert a["c_max"] == b["c_max"]
        # the iteration log is one JSON object per round
        lines = (tmp_path / "inst.iterative.iters.jsonl").read_text().splitlines()
        first = json.loads(lines[0])
        assert {"iter", "activated", "active_total", "cmax", "violated", "elapsed_ms"} <= set(first)

    def test_corrupt_file(self, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("this is not an instance\n")
        assert main(["solve", str(bad), "--outdir", str(tmp_path)]) == EXIT_PARSE


class TestCheck:
    def test_valid_pair(self, tmp_path):
        path = write_instance(tmp_path, tiny_instance())
        assert main(["solve", str(path), "--strategy", "allmaxw", "--outdir", str(tmp_path)]) == EXIT_OK
        sched = tmp_path / "inst.allmaxw.schedule.json"
        assert main(["check", str(path), str(sched)]) == EXIT_OK

    def test_missing_unit_detected(self, tmp_path, capsys):
        path = write_instance(tmp_path, tiny_instance())
        main(["solve", str(path), "--strategy", "allmaxw", "--outdir", str(tmp_path)])
        sched_path = tmp_path / "inst.allmaxw.schedule.json"
        data = json.loads(sched_path.read_text())
        for row in data["operators"]:
            for i, tag in enumerate(row):
                if tag and tag.startswith("w"):
                    row[i] = None
                    break
            else:
                continue
            break
        sched_path.write_text(json.dumps(data))
        assert main(["check", str(path), str(sched_path)]) == EXIT_CHECK
        out = capsys.readouterr().out
        assert "duration" in out

    def test_workload_overrun_detected(self, tmp_path, capsys):
        path = write_instance(tmp_path, tiny_instance())
        main(["solve", str(path), "--strategy", "allmaxw", "--outdir", str(tmp_path)])
        sched_path = tmp_path / "inst.allmaxw.schedule.json"
        data = json.loads(sched_path.read_text())
        row = data["operators"][0]
        # overwrite the whole cap window with work of one task
        for s in range(4):
            row[s] = "w:1:0"
        sched_path.write_text(json.dumps(data))
        assert main(["check", str(path), str(sched_path)]) == EXIT_CHECK
        assert "maxw" in capsys.readouterr().out


class TestOracle:
    def test_prints_optimum(self, tmp_path, capsys):
        path = write_instance(tmp_path, make_instance([[(0, 3)]], 1, [(0, 1, 0, 3)]))
        assert main(["oracle", str(path)]) == EXIT_OK
        assert "c_max=5" in capsys.readouterr().out


class TestGen:
    def test_single_instance_deterministic(self, tmp_path):
        rng = random.Random(2)
        base = write_instance(tmp_path, random_base(rng, "gbase"), "gbase.txt")
        out1, out2 = tmp_path / "a.txt", tmp_path / "b.txt"
        argv = ["gen", "--base", str(base), "--gd", "0.25", "--ld", "0.1",
                "--seed", "9", "--horizon", "40"]
        assert main(argv + ["-o", str(out1)]) == EXIT_OK
        assert main(argv + ["-o", str(out2)]) == EXIT_OK
        assert out1.read_text() == out2.read_text()
        assert load_instance(out1).maxw

    def test_suite_mode(self, tmp_path):
        rng = random.Random(3)
        bases = [
            write_instance(tmp_path, random_base(rng, f"s{i}"), f"s{i}.txt")
            for i in range(2)
        ]
        outdir = tmp_path / "suite"
        code = main(
            ["gen", "--bases", *map(str, bases), "--grid", "0.1,0.4",
             "--master-seed", "4", "--outdir", str(outdir), "--horizon", "30"]
        )
        assert code == EXIT_OK
        assert len(list(outdir.glob("*.txt"))) == 8
        assert (outdir / "manifest.csv").exists()


class TestBench:
    def test_micro_suite_rows(self, tmp_path, capsys):
        rng = random.Random(4)
        bases = [random_base(rng, f"m{i}", num_jobs=2, tasks_per_job=1) for i in range(2)]
        from maxwshop.gen import density_grid, generate_suite

        outdir = tmp_path / "suite"
        manifest = generate_suite(bases, density_grid([0.1, 0.4]), 11, outdir, horizon=20)
        code = main(
            ["bench", str(manifest), "--time-limit", "20", "--outdir", str(tmp_path / "res")]
        )
        assert code == EXIT_OK
        with (tmp_path / "res" / "results.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 16  # 8 instances x 2 strategies
        assert all(r["status"] == "optimal" for r in rows)
        by_key = {(r["instance"], r["strategy"]): r for r in rows}
        for (name, strategy), r in by_key.items():
            if strategy == "iterative":
                twin = by_key[(name, "allmaxw")]
                assert twin["c_max"] == r["c_max"]
        with (tmp_path / "res" / "summary.csv").open() as fh:
            summary = list(csv.DictReader(fh))
        assert len(summary) == 4  # 2x2 density grid
        assert {"gd", "ld", "n", "solved_allmaxw", "solved_iterative"} <= set(summary[0])

    def test_empty_manifest(self, tmp_path):
        manifest = tmp_path / "manifest.csv"
        manifest.write_text("instance,gd,ld,seed,num_constraints,total_required_rest\n")
        code = main(["bench", str(manifest), "--outdir", str(tmp_path / "res")])
        assert code == EXIT_OK
        text = (tmp_path / "res" / "results.csv").read_text().strip()
        assert text == ",".join(
            ["instance", "strategy", "status", "c_max", "elapsed_ms",
             "makespan_iterations", "maxw_iterations", "activated", "pool", "seed"]
        )

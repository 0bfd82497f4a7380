import json
from pathlib import Path

import pytest

from optlab.cli import main

MINIMAL = """\
problem.kind = quadratic
problem.dim = 20
problem.condition = 10.0
optimizer.name = adamw
optimizer.lr = 0.03
schedule.family = constant
run.steps = 100
run.seed = 1
"""


@pytest.fixture()
def cfg_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(MINIMAL)
    return path


def _single_run_dir(out: Path) -> Path:
    dirs = [p for p in out.iterdir() if p.is_dir()]
    assert len(dirs) == 1
    return dirs[0]


class TestRun:
    def test_minimal_config_writes_artifacts(self, cfg_file, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg_file), "--out", str(out)]) == 0
        run_dir = _single_run_dir(out)
        lines = (run_dir / "record.csv").read_text().splitlines()
        assert lines[0].startswith("step,loss,grad_norm")
        assert len(lines) == 101  # header + 100 rows
        summary = json.loads((run_dir / "summary.json").read_text())
        assert summary["diverged"] is False
        assert "final_loss" in capsys.readouterr().out

    def test_unknown_optimizer_exit_2_lists_names(self, cfg_file, tmp_path, capsys):
        code = main(
            ["run", "--config", str(cfg_file), "--out", str(tmp_path / "o"), "--set", "optimizer.name=sgd"]
        )
        assert code == 2
        err = capsys.readouterr().err
        assert "adamw" in err and "prodigy" in err

    def test_set_override_wins_and_is_recorded(self, cfg_file, tmp_path):
        out = tmp_path / "out"
        main(["run", "--config", str(cfg_file), "--out", str(out), "--set", "optimizer.lr=2e-3"])
        summary = json.loads((_single_run_dir(out) / "summary.json").read_text())
        assert summary["config"]["optimizer.lr"] == 2e-3

    def test_parse_error_exit_2_with_line(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("run.steps = 10\nnot a setting\n")
        assert main(["run", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
        assert ":2:" in capsys.readouterr().err

    def test_rerun_from_summary_reproduces_csv(self, cfg_file, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["run", "--config", str(cfg_file), "--out", str(out1)])
        dir1 = _single_run_dir(out1)
        main(["run", "--config", str(dir1 / "summary.json"), "--out", str(out2)])
        dir2 = _single_run_dir(out2)

        def strip_time(path: Path) -> list[str]:
            rows = path.read_text().splitlines()
            return [",".join(r.split(",")[:-1]) for r in rows]

        assert strip_time(dir1 / "record.csv") == strip_time(dir2 / "record.csv")

    def test_preset_flag(self, tmp_path):
        out = tmp_path / "out"
        code = main(
            [
                "run",
                "--out", str(out),
                "--set", "optimizer.name=adamw",
                "--set", "optimizer.preset=124m-large",
                "--set", "run.steps=20",
                "--set", "schedule.warmup_steps=5",
                "--set", "problem.kind=quadratic",
            ]
        )
        assert code == 0
        summary = json.loads((_single_run_dir(out) / "summary.json").read_text())
        assert summary["config"]["optimizer.lr"] == 0.001  # from the preset
        assert summary["config"]["schedule.warmup_steps"] == 5  # override wins


class TestPlotdata:
    @pytest.fixture()
    def run_dir(self, cfg_file, tmp_path):
        out = tmp_path / "out"
        main(["run", "--config", str(cfg_file), "--out", str(out)])
        return _single_run_dir(out)

    def test_lr_kind_hits_schedule_endpoints(self, cfg_file, tmp_path):
        out = tmp_path / "out"
        main(["run", "--config", str(cfg_file), "--out", str(out),
              "--set", "schedule.family=cosine", "--set", "schedule.warmup_steps=10"])
        run_dir = _single_run_dir(out)
        assert main(["plotdata", str(run_dir), "--kind", "lr"]) == 0
        rows = (run_dir / "plot_lr.csv").read_text().splitlines()[1:]
        values = {int(s): float(v) for s, v in (r.split(",") for r in rows)}
        assert values[10] == 0.03
        assert values[100] == pytest.approx(0.03 * 0.01, abs=1e-12)

    def test_gradnorm_passthrough(self, run_dir):
        main(["plotdata", str(run_dir), "--kind", "gradnorm"])
        plot = (run_dir / "plot_gradnorm.csv").read_text().splitlines()[1:]
        record = (run_dir / "record.csv").read_text().splitlines()[1:]
        grad_col = [r.split(",")[2] for r in record]
        assert [p.split(",")[1] for p in plot] == grad_col

    def test_window_one_is_identity(self, run_dir):
        main(["plotdata", str(run_dir), "--kind", "loss", "--set", "plot.window=1"])
        main(["plotdata", str(run_dir), "--kind", "loss", "--out", str(run_dir / "w5.csv"),
              "--set", "plot.window=5"])
        raw = (run_dir / "plot_loss.csv").read_text().splitlines()[1:]
        smooth = (run_dir / "w5.csv").read_text().splitlines()[1:]
        assert len(raw) == len(smooth)
        assert raw != smooth

    def test_missing_column_warns_and_exits_zero(self, run_dir, capsys):
        assert main(["plotdata", str(run_dir), "--kind", "d"]) == 0
        out = capsys.readouterr().out
        assert "warning" in out
        assert (run_dir / "plot_d.csv").read_text() == "step,value\n"


class TestBench:
    def test_small_suite_ranks_and_artifacts(self, tmp_path, capsys):
        suite = tmp_path / "suite.cfg"
        suite.write_text(
            "suite.name = mini\n"
            "suite.optimizers = adamw, signum\n"
            "suite.budgets = 30, 60\n"
            "suite.seeds = 2\n"
            "problem.kind = quadratic\n"
            "problem.dim = 10\n"
            "schedule.family = constant\n"
            "adamw.optimizer.lr = 0.03\n"
            "signum.optimizer.lr = 0.01\n"
        )
        out = tmp_path / "out"
        assert main(["bench", "--config", str(suite), "--out", str(out)]) == 0
        bench_dir = next(out.glob("bench-mini-*"))
        report = (bench_dir / "report.csv").read_text().splitlines()
        assert report[0] == "optimizer,budget,rank,mean_final_loss,diverged,seeds"
        assert len(report) == 5  # 2 optimizers x 2 budgets
        doc = json.loads((bench_dir / "report.json").read_text())
        for budget in (30, 60):
            ranks = sorted(r["rank"] for r in doc["rows"] if r["budget"] == budget)
            assert ranks == [1, 2]
        assert len(list((bench_dir / "runs").iterdir())) == 8

    def test_diverged_cell_ranked_last_and_flagged(self, tmp_path):
        suite = tmp_path / "suite.cfg"
        suite.write_text(
            "suite.optimizers = adamw, signum\n"
            "suite.budgets = 40\n"
            "suite.seeds = 1\n"
            "problem.kind = quadratic\n"
            "schedule.family = constant\n"
            "adamw.optimizer.lr = 0.03\n"
            "signum.optimizer.lr = 1e5\n"  # blows up immediately
        )
        out = tmp_path / "out"
        main(["bench", "--config", str(suite), "--out", str(out)])
        doc = json.loads(next(out.glob("bench-*")) .joinpath("report.json").read_text())
        rows = {r["optimizer"]: r for r in doc["rows"]}
        assert rows["signum"]["diverged"] is True
        assert rows["signum"]["rank"] == 2
        assert rows["adamw"]["rank"] == 1

    def test_single_cell_rank_one(self, tmp_path):
        suite = tmp_path / "suite.cfg"
        suite.write_text(
            "suite.optimizers = adamw\nsuite.budgets = 20\nsuite.seeds = 1\n"
            "problem.kind = quadratic\nschedule.family = constant\nadamw.optimizer.lr = 0.03\n"
        )
        out = tmp_path / "out"
        main(["bench", "--config", str(suite), "--out", str(out)])
        doc = json.loads(next(out.glob("bench-*")).joinpath("report.json").read_text())
        assert doc["rows"][0]["rank"] == 1


class TestVerifyAndPresets:
    def test_presets_listing(self, capsys):
        assert main(["presets", "adamw"]) == 0
        out = capsys.readouterr().out
        assert "[adamw / 124m-small]" in out
        assert "optimizer.lr = 0.0005" in out

    def test_presets_unknown_optimizer(self, capsys):
        assert main(["presets", "sgd"]) == 2

    def test_verify_names_failing_invariant(self, monkeypatch, capsys):
        # fault injection: a mutated adamw epsilon must be caught and named
        import optlab.optimizers as opts
        from optlab.optimizers import base

        real = base.adamw_step

        def tampered(block, grad, state, hyper, beta1=0.9, beta2=0.999):
            bad = type(hyper)(hyper.gamma, hyper.lam, hyper.eps * 10.0)
            return real(block, grad, state, bad, beta1, beta2)

        monkeypatch.setattr(opts, "adamw_step", tampered)
        assert main(["verify"]) == 1
        out = capsys.readouterr().out
        assert "FAIL  scalar-oracle/adamw" in out

    def test_verify_passes_pristine(self, capsys):
        assert main(["verify"]) == 0
        out = capsys.readouterr().out
        assert "all" in out and "checks passed" in out


class TestOutputRootAndJobs:
    def test_optlab_out_env_is_default_root(self, cfg_file, tmp_path, monkeypatch):
        root = tmp_path / "envroot"
        monkeypatch.setenv("OPTLAB_OUT", str(root))
        monkeypatch.chdir(tmp_path)
        assert main(["run", "--config", str(cfg_file)]) == 0
        assert root.is_dir() and list(root.iterdir())

    def test_bench_parallel_matches_serial(self, tmp_path):
        suite = tmp_path / "suite.cfg"
        suite.write_text(
            "suite.name = par\n"
            "suite.optimizers = adamw, signum\n"
            "suite.budgets = 25\n"
            "suite.seeds = 2\n"
            "problem.kind = quadratic\n"
            "schedule.family = constant\n"
            "adamw.optimizer.lr = 0.03\n"
            "signum.optimizer.lr = 0.01\n"
        )
        reports = []
        for jobs, label in ((1, "serial"), (2, "parallel")):
            out = tmp_path / label
            assert main(["bench", "--config", str(suite), "--out", str(out), "--jobs", str(jobs)]) == 0
            reports.append(next(out.glob("bench-*")).joinpath("report.csv").read_text())
        assert reports[0] == reports[1]

    def test_bench_rerun_reproduces_report(self, tmp_path):
        suite = tmp_path / "suite.cfg"
        suite.write_text(
            "suite.optimizers = adamw\nsuite.budgets = 20\nsuite.seeds = 2\n"
            "problem.kind = quadratic\nschedule.family = constant\nadamw.optimizer.lr = 0.03\n"
        )
        texts = []
        for label in ("x", "y"):
            out = tmp_path / label
            main(["bench", "--config", str(suite), "--out", str(out)])
            texts.append(next(out.glob("bench-*")).joinpath("report.csv").read_text())
        assert texts[0] == texts[1]


def test_bench_suite_validation(tmp_path, capsys):
    suite = tmp_path / "suite.cfg"
    suite.write_text(
        "suite.optimizers = adamw, adamw\nsuite.budgets = 10\n"
        "problem.kind = quadratic\nschedule.family = constant\n"
    )
    assert main(["bench", "--config", str(suite), "--out", str(tmp_path / "o")]) == 2
    assert "duplicates" in capsys.readouterr().err

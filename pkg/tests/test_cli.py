import json

import pytest

import vaxcast as vx
from vaxcast.cli import main

from conftest import simple_config


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """Pre-generated small train/test CSVs from the shipped config."""
    d = tmp_path_factory.mktemp("cli")
    code = main(["generate", "--config", "default", "--n", "4000",
                 "--seed", "5", "--year", "2013",
                 "--out", str(d / "train.csv")])
    assert code == 0
    code = main(["generate", "--config", "default", "--n", "2500",
                 "--seed", "6", "--year", "2014",
                 "--out", str(d / "test.csv")])
    assert code == 0
    return d


class TestGenerate:
    def test_deterministic_byte_identical(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            code, _, _ = run(capsys, "generate", "--config", "default",
                             "--n", "800", "--seed", "11", "--out", str(out))
            assert code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_custom_config_file(self, tmp_path, capsys):
        cfg = simple_config(n=100, seed=3, coefs={"x0": 0.4})
        path = tmp_path / "cfg.json"
        vx.save_config(cfg, path)
        code, out, _ = run(capsys, "generate", "--config", str(path),
                           "--out", str(tmp_path / "pop.csv"))
        assert code == 0
        assert "100 records" in out

    def test_missing_config_file_errors(self, tmp_path, capsys):
        code, _, err = run(capsys, "generate", "--config",
                           str(tmp_path / "nope.json"),
                           "--out", str(tmp_path / "x.csv"))
        assert code == 2
        assert err.startswith("vaxcast: error:")
        assert err.count("\n") == 1


class TestFit:
    def test_report_structure(self, workdir, capsys):
        out = workdir / "fit.json"
        code, _, _ = run(capsys, "fit", "--data", str(workdir / "train.csv"),
                         "--out", str(out))
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["provenance"]["command"] == "fit"
        assert "intercept" in doc["fit"]["coefficients"]
        assert doc["fit"]["converged"]
        assert doc["restrictions"]["retained"] == doc["n_used"]
        assert len(doc["term_stats"]) == 47
        assert {t["ame_significant_at"] for t in doc["term_stats"]} <= \
            {"1%", "5%", "10%", "none"}
        groups = {g["group"] for g in doc["group_tests"]}
        assert "health" in groups and "province" in groups

    def test_eliminate_flag_logs_rounds(self, workdir, capsys):
        out = workdir / "fit_elim.json"
        code, _, _ = run(capsys, "fit", "--data", str(workdir / "train.csv"),
                         "--eliminate", "--out", str(out))
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["elimination"]["rounds"]
        assert 0.0 <= doc["elimination"]["final_pseudo_r2"] <= 1.0

    def test_pooled_input_files(self, workdir, capsys):
        out = workdir / "fit_pool.json"
        paths = f"{workdir / 'train.csv'},{workdir / 'test.csv'}"
        code, _, _ = run(capsys, "fit", "--data", paths, "--out", str(out))
        assert code == 0
        doc = json.loads(out.read_text())
        single = json.loads((workdir / "fit.json").read_text())
        assert doc["n_used"] > single["n_used"]


class TestRankAndCurve:
    def test_rank_all_methods(self, workdir, capsys):
        out = workdir / "ranks.json"
        code, _, _ = run(capsys, "rank", "--data", str(workdir / "train.csv"),
                         "--method", "all", "--out", str(out))
        assert code == 0
        doc = json.loads(out.read_text())
        assert set(doc["rankings"]) == {"info_gain", "gain_ratio",
                                        "chi_squared",
                                        "symmetric_uncertainty"}
        for r in doc["rankings"].values():
            assert len(r["order"]) == 47

    def test_curve(self, workdir, capsys):
        ranks = workdir / "ranks.json"
        if not ranks.exists():
            run(capsys, "rank", "--data", str(workdir / "train.csv"),
                "--method", "all", "--out", str(ranks))
        out = workdir / "curve.json"
        code, _, _ = run(capsys, "curve", "--train", str(workdir / "train.csv"),
                         "--test", str(workdir / "test.csv"),
                         "--ranks", str(ranks), "--steps", "6,12",
                         "--trees", "3", "--depth", "5", "--seed", "9",
                         "--out", str(out))
        assert code == 0
        doc = json.loads(out.read_text())
        assert [p["n_features"] for p in doc["curve"]] == [6, 12]


class TestTrainEvaluatePredict:
    def test_forest_train_and_evaluate(self, workdir, capsys):
        model = workdir / "model.json"
        code, _, _ = run(capsys, "train", "--data", str(workdir / "train.csv"),
                         "--trees", "5", "--depth", "6", "--seed", "3",
                         "--out", str(model))
        assert code == 0
        report = workdir / "report.json"
        roc = workdir / "roc.csv"
        code, out, _ = run(capsys, "evaluate", "--model", str(model),
                           "--data", str(workdir / "test.csv"),
                           "--report", str(report),
                           "--roc-points", str(roc))
        assert code == 0
        doc = json.loads(report.read_text())
        assert doc["n"] == sum(doc["matrix"].values())
        assert 0.0 <= doc["metrics"]["acc"] <= 1.0
        assert roc.read_text().startswith("threshold,tpr,fpr")

    def test_evaluate_fingerprint_mismatch(self, workdir, tmp_path, capsys):
        cfg = simple_config(n=300, seed=3, coefs={"x0": 0.4})
        other_csv = tmp_path / "other.csv"
        vx.write_csv(vx.generate(cfg), other_csv)
        schema_path = tmp_path / "schema.json"
        vx.save_schema(cfg.schema(), schema_path)
        code, _, err = run(capsys, "evaluate",
                           "--model", str(workdir / "model.json"),
                           "--data", str(other_csv),
                           "--schema", str(schema_path),
                           "--report", str(tmp_path / "r.json"))
        assert code == 2
        assert "fingerprint" in err
        assert err.count("\n") == 1

    def test_composite_and_policies(self, workdir, capsys):
        comp = workdir / "composite.json"
        code, _, _ = run(capsys, "train-composite",
                         "--train", str(workdir / "train.csv"),
                         "--boundary", "60", "--trees", "5", "--depth", "6",
                         "--seed", "3", "--out", str(comp))
        assert code == 0
        assignments = workdir / "assign.csv"
        code, _, _ = run(capsys, "predict", "--model", str(comp),
                         "--data", str(workdir / "test.csv"), "--policies",
                         "--drop-incomplete", "--out", str(assignments))
        assert code == 0
        lines = assignments.read_text().strip().splitlines()
        assert lines[0] == "row,age,year,predicted,score,expert,policy"
        policies = {line.split(",")[-1] for line in lines[1:]}
        assert policies <= {"policy1_target", "policy2_no_promotion",
                            "policy2_community_pool"}
        for line in lines[1:4]:
            parts = line.split(",")
            age, expert = int(parts[1]), parts[5]
            assert expert == ("old" if age > 60 else "young")

    def test_policies_need_composite(self, workdir, capsys):
        code, _, err = run(capsys, "predict",
                           "--model", str(workdir / "model.json"),
                           "--data", str(workdir / "test.csv"),
                           "--policies", "--drop-incomplete",
                           "--out", str(workdir / "x.csv"))
        assert code == 2
        assert "composite" in err

    def test_split_search_csv(self, workdir, capsys):
        out = workdir / "fig2.csv"
        code, stdout, _ = run(capsys, "split-search",
                              "--train", str(workdir / "train.csv"),
                              "--test", str(workdir / "test.csv"),
                              "--grid", "40,60", "--trees", "3", "--depth",
                              "4", "--seed", "3", "--out", str(out))
        assert code == 0
        assert "chosen boundary:" in stdout
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "boundary,young_ppv,old_npv,young_n,old_n"
        assert len(lines) == 3


class TestErrors:
    def test_unknown_flag_single_line(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["generate", "--config", "default", "--wat"])
        assert exc.value.code == 2
        err = capsys.readouterr().err
        assert err.startswith("vaxcast: error:")
        assert err.count("\n") == 1

    def test_train_requires_seed(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["train", "--data", "x.csv", "--out", "m.json"])
        assert exc.value.code == 2

    def test_missing_data_file(self, tmp_path, capsys):
        code, _, err = run(capsys, "fit", "--data",
                           str(tmp_path / "missing.csv"),
                           "--out", str(tmp_path / "f.json"))
        assert code == 2
        assert "error" in err

    def test_malformed_model_json_single_line(self, workdir, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{broken")
        code, _, err = run(capsys, "evaluate", "--model", str(bad),
                           "--data", str(workdir / "test.csv"),
                           "--report", str(tmp_path / "r.json"))
        assert code == 2
        assert err.startswith("vaxcast: error:")
        assert err.count("\n") == 1

    def test_bad_mtry_single_line(self, workdir, tmp_path, capsys):
        code, _, err = run(capsys, "train", "--data",
                           str(workdir / "train.csv"), "--mtry", "banana",
                           "--seed", "1", "--out", str(tmp_path / "m.json"))
        assert code == 2
        assert "--mtry" in err
        assert err.count("\n") == 1

    def test_numeric_mtry_accepted(self, workdir, tmp_path, capsys):
        code, _, _ = run(capsys, "train", "--data",
                         str(workdir / "train.csv"), "--mtry", "5",
                         "--trees", "2", "--depth", "3", "--seed", "1",
                         "--out", str(tmp_path / "m.json"))
        assert code == 0
        model = vx.load_forest(tmp_path / "m.json")
        assert model.config.features_per_split == 5


class TestDeterminism:
    def test_train_byte_identical(self, workdir, tmp_path, capsys):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            code, _, _ = run(capsys, "train",
                             "--data", str(workdir / "train.csv"),
                             "--trees", "3", "--depth", "4", "--seed", "21",
                             "--out", str(out))
            assert code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_commands_never_mutate_inputs(self, workdir, tmp_path, capsys):
        train = workdir / "train.csv"
        before = train.read_bytes()
        run(capsys, "fit", "--data", str(train),
            "--out", str(tmp_path / "f.json"))
        run(capsys, "rank", "--data", str(train),
            "--out", str(tmp_path / "r.json"))
        assert train.read_bytes() == before


class TestReproduceScript:
    def test_reproduce_emits_final_report(self, tmp_path):
        import pathlib
        import subprocess
        script = pathlib.Path(__file__).resolve().parents[1] / "scripts" / \
            "reproduce.sh"
        env = {"N_TRAIN": "1500", "N_TEST": "1500", "PATH": "/usr/bin:/bin",
               "HOME": "/root"}
        import os
        env["PATH"] = os.environ.get("PATH", env["PATH"])
        proc = subprocess.run(["bash", str(script), str(tmp_path / "out")],
                              capture_output=True, text=True, env=env,
                              timeout=900)
        assert proc.returncode == 0, proc.stderr[-2000:]
        assert "held-out metrics:" in proc.stdout
        assert "policy assignments:" in proc.stdout
        for artifact in ("fit.json", "ranks.json", "curve.json", "fig2.csv",
                         "composite.json", "report.json", "assignments.csv"):
            assert (tmp_path / "out" / artifact).exists(), artifact

import math

import numpy as np
import pytest

import tuzalab.experiments as ex
from tuzalab.cli import main
from tuzalab.errors import ConfigurationError
from tuzalab.experiments import (
    SCHEMA_LINE,
    ExperimentConfig,
    block_pair_counts,
    construction_record,
    cover_bound_record,
    derive_parameters,
    planted_fixed_point,
    read_config,
    run_canonicalization_suite,
    run_construction,
    run_cover_bound,
    run_fairness_probe,
    run_mantel,
    run_spectra,
    run_tuza_survey,
    write_table,
)
from tuzalab.generators import cayley_graph, petersen_graph
from tuzalab.graph import blowup, complete_graph, cycle_graph, double, random_subgraph

ODD20 = list(range(1, 20, 2))


@pytest.fixture(scope="module")
def k1010():
    return cayley_graph(20, ODD20)


class TestConfig:
    def test_read(self, tmp_path):
        path = tmp_path / "experiment.cfg"
        path.write_text("# comment\nalpha = 0.2  # inline\nfamily = projective_incidence\nq = 3\n"
                        "a = 7\nn_seeds = 4\nc_grid = 0, 0.5, 1\n")
        cfg = read_config(path)
        assert (cfg.alpha, cfg.family, cfg.family_params, cfg.a) == (0.2, "projective_incidence", {"q": 3}, 7)
        assert cfg.seeds == [0, 1, 2, 3] and cfg.c_grid == [0.0, 0.5, 1.0]

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "experiment.cfg"
        path.write_text("p = 0.5\n")
        with pytest.raises(ConfigurationError):
            read_config(path)


class TestDerived:
    def test_petersen_rejected(self):
        with pytest.raises(ConfigurationError, match=r"d >= \(2c\)\^-1.*p = \(1-c\)/\(2cd\)"):
            derive_parameters(0.3, petersen_graph(), 100)

    def test_k1010_accepted(self, k1010):
        par = derive_parameters(0.3, k1010, 100)
        assert par.c == pytest.approx(0.05)
        assert par.p == pytest.approx(0.95) and par.q == pytest.approx(0.475)
        assert par.n == 4000

    @pytest.mark.parametrize("alpha", [0, 1 / 3, 0.5, -0.1])
    def test_alpha_range(self, k1010, alpha):
        with pytest.raises(ConfigurationError):
            derive_parameters(alpha, k1010, 10)

    def test_needs_triangle_free(self):
        with pytest.raises(ConfigurationError):
            derive_parameters(0.3, complete_graph(12), 10)


class TestConstruction:
    def test_degenerate(self):
        rec = construction_record(complete_graph(2), 1, 1.0, 1.0, 0)
        assert (rec["internal"], rec["external"], rec["vertex"]) == (2, 4, 0)
        assert rec["dev_internal"] == rec["dev_external"] == 0 and rec["within_band"]
        assert rec["materialized"]

    @pytest.mark.parametrize("seed", range(4))
    def test_streamed_matches_materialized(self, seed):
        h = cycle_graph(4)
        counts, types = block_pair_counts(h, 5, 0.6, 0.3, seed)
        ga = random_subgraph(blowup(double(h), 5), 0.6, 0.3, seed)
        block = ga.block_of
        e = ga.graph.edge_array()
        k = double(h).graph
        keep = block[e[:, 0]] != block[e[:, 1]]
        ids = k.edge_ids(block[e[keep, 0]], block[e[keep, 1]])
        assert np.array_equal(np.bincount(ids, minlength=k.m), counts)

    def test_targets(self, k1010):
        par = derive_parameters(0.3, k1010, 30)
        rec = construction_record(k1010, 30, par.p, par.q, 0, c=par.c)
        t, a, c = 20, 30, par.c
        assert rec["target_internal"] == pytest.approx(a * a * t * (1 - c) / (2 * c))
        assert rec["target_external"] == pytest.approx(a * a * t * (1 - c) / (2 * c))
        assert rec["target_vertex"] == 2 * t * math.comb(a, 2)
        assert rec["m_target"] == pytest.approx(a * a * t / c)
        assert abs(rec["m_ratio"] - 1) < 0.03

    def test_run_records(self, k1010):
        rows = run_construction(ExperimentConfig(a=20, n_seeds=3), h=k1010)
        assert [r["seed"] for r in rows] == [0, 1, 2]
        assert all(r["status"] == "ok" and r["within_band"] for r in rows)


class TestCoverBound:
    def test_tiny_lp(self):
        rec = cover_bound_record(complete_graph(2), 2, 0.7, 0.6, 0, 0.3)
        assert rec["lp_le_weight"] is True and rec["tau3_star"] <= rec["weight"]

    def test_ratio(self, k1010):
        rows = run_cover_bound(ExperimentConfig(a=30, n_seeds=2), h=k1010)
        for r in rows:
            assert abs(r["ratio_minus_target"]) < 0.05 and r["below_1_plus_alpha"]
            assert r["status"] == "ok" and r["asserted"]

    def test_target_monotone(self):
        targets = [1 + alpha / 2 for alpha in (0.3, 0.2, 0.1, 0.01)]
        assert targets == sorted(targets, reverse=True)

    def test_triangle_in_h(self):
        with pytest.raises(Exception):
            cover_bound_record(complete_graph(3), 2, 0.5, 0.5, 0, 0.3)


class TestSurvey:
    def test_rows(self):
        rows = run_tuza_survey(ExperimentConfig(survey_sizes=[8], survey_p=[0.5], n_seeds=3))
        by = {r["instance"]: r for r in rows}
        assert by["K4"]["ratio"] == 2 and by["K5"]["ratio"] == 2
        assert by["petersen"]["ratio"] == "no-triangles"
        assert not any(r["flag"] for r in rows)
        assert all(r["status"] == "ok" for r in rows)

    def test_cap_skips(self):
        rows = run_tuza_survey(ExperimentConfig(cap_triangles=5),
                               instances=[("K5", complete_graph(5), 0), ("K4", complete_graph(4), 0)])
        assert rows[0]["status"].startswith("skipped(") and rows[1]["status"] == "ok"


class TestProbeRun:
    def test_k2_and_petersen(self):
        cfg = ExperimentConfig(c_grid=[0.0, 1.0], budget=2000, probe_families=["k2", "petersen"])
        rows = run_fairness_probe(cfg)
        assert len(rows) == 4
        for r in rows:
            assert r["valid"] and r["gamma_orthogonal"] and r["status"] == "ok"
            if r["c"] == 1.0:
                assert r["best"] == 0.5 and not r["fairness_disproved"]
            else:
                assert r["best"] > 0.5 and r["fairness_disproved"]
            if r["family"] == "k2":
                assert abs(r["best"] - r["oracle"]) <= 1e-3


class TestCanonSuite:
    def test_clean(self, tmp_path):
        rows = run_canonicalization_suite(ExperimentConfig(trials=60, seed=5), tmp_path)
        assert all(r["status"] == "ok" and r["delta"] >= 0 for r in rows)

    def test_planted(self):
        assert planted_fixed_point(double(complete_graph(2)), 4, 0.5)
        assert planted_fixed_point(double(cycle_graph(4)), 2, 0.1)

    def test_failure_dumps_witness(self, tmp_path, monkeypatch):
        monkeypatch.setattr(ex, "check_twins", lambda cf: False)
        rows = run_canonicalization_suite(ExperimentConfig(trials=2), tmp_path)
        for r in rows:
            assert r["status"].startswith("failed(")
            assert (tmp_path / f"canon_witness_{r['trial']}.txt").exists()


class TestSpectraMantel:
    def test_spectra(self):
        for r in run_spectra(ExperimentConfig(trials=200)):
            assert r["closed_vs_dense"] <= 1e-8
            assert r["identity_sum_err"] <= 1e-12 and r["identity_diff_err"] <= 1e-12
            assert r["mixing_violations"] == 0

    def test_mantel(self, tmp_path):
        rows = run_mantel(ExperimentConfig(mantel_max=7), tmp_path)
        assert [r["size"] for r in rows] == [n * n for n in range(1, 8)]
        assert [r["exact"] for r in rows] == [True] * 5 + [False] * 2
        assert (tmp_path / "mantel_witness_7.txt").exists()


class TestOutput:
    def test_schema_and_private_columns(self, tmp_path):
        text = write_table([{"a": 1, "_x": 2}, {"a": 0.5, "b": True}], tmp_path / "t.csv", tmp_path / "t.json")
        lines = text.splitlines()
        assert lines[0] == SCHEMA_LINE and lines[1] == "a,b"
        assert lines[2:] == ["1,", "0.5,true"]
        assert '"_x": 2' in (tmp_path / "t.json").read_text()


def _cfg(tmp_path, body):
    path = tmp_path / "experiment.cfg"
    path.write_text(body)
    return str(path)


class TestCli:
    BODY = "family = cayley_custom\nn = 20\ngenerators = " + " ".join(map(str, ODD20)) + "\na = 6\nn_seeds = 3\n"

    def test_reproducible_across_jobs(self, tmp_path):
        cfg = _cfg(tmp_path, self.BODY)
        assert main(["construct", "--config", cfg, "--out", str(tmp_path / "o1"), "--jobs", "1"]) == 0
        assert main(["construct", "--config", cfg, "--out", str(tmp_path / "o2"), "--jobs", "2"]) == 0
        a = (tmp_path / "o1" / "construct.csv").read_bytes()
        assert a == (tmp_path / "o2" / "construct.csv").read_bytes()
        assert a.startswith(b"# schema=1\n")

    def test_seed_flag(self, tmp_path):
        cfg = _cfg(tmp_path, self.BODY)
        main(["cover-bound", "--config", cfg, "--out", str(tmp_path), "--seed", "7"])
        rows = (tmp_path / "cover_bound.csv").read_text().splitlines()[2:]
        assert [r.split(",")[0] for r in rows] == ["7", "8", "9"]

    def test_rejection(self, tmp_path, capsys):
        assert main(["construct", "--out", str(tmp_path)]) == 2
        assert "d >= (2c)^-1" in capsys.readouterr().err

    def test_mantel_verb(self, tmp_path):
        cfg = _cfg(tmp_path, "mantel_max = 4\n")
        assert main(["mantel", "--config", cfg, "--out", str(tmp_path)]) == 0
        assert (tmp_path / "mantel.json").exists()

    def test_cap_flag(self, tmp_path):
        cfg = _cfg(tmp_path, "survey_sizes = 6\nsurvey_p = 0.5\n")
        assert main(["tuza-survey", "--config", cfg, "--out", str(tmp_path), "--cap-triangles", "3"]) == 0
        text = (tmp_path / "tuza_survey.csv").read_text()
        assert "skipped(" in text

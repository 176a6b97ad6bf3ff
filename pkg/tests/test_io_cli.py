import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from citesim.cli import main, parse_range
from citesim.engine import run_simulation
from citesim.io import (
    ConfigParseError,
    config_to_dict,
    counts_path,
    emit_run_csv,
    parse_config,
    read_counts_csv,
    read_manifest,
    read_series_csv,
    serialize_config,
)
from citesim.model import AgentMode, ConfigError, ModelConfig, Variant
from citesim.rng import BetaOneW, Normal, Uniform


class TestParseConfig:
    def test_empty_object_is_defaults(self):
        c = parse_config("{}")
        assert c == ModelConfig()
        assert (c.literature_size, c.reading_budget, c.citing_budget, c.timesteps) == (600, 120, 40, 1000)
        assert (c.alpha, c.beta_reinforce) == (0.001, 0.3)

    def test_single_override(self):
        assert parse_config('{"citing_budget": 100}') == ModelConfig(citing_budget=100)

    def test_reading_budget_over_literature(self):
        with pytest.raises(ConfigError) as exc:
            parse_config('{"reading_budget": 700}')
        assert "reading_budget" in str(exc.value) and "literature_size" in str(exc.value)

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="citing_budjet"):
            parse_config('{"citing_budjet": 10}')

    def test_malformed_reports_position(self):
        with pytest.raises(ConfigParseError, match="line 2, column"):
            parse_config('{\n  "alpha": ,\n}')

    def test_distributions(self):
        c = parse_config(
            json.dumps(
                {
                    "quality_dist": {"kind": "normal", "mu": 0.5, "sd": 0.1, "truncate": [0, 1]},
                    "threshold_dist": {"kind": "normal", "mu": 0.5, "sd": 0.2, "truncate": [0, 1]},
                    "rhetorical_dist": {"kind": "beta_one_w", "w": 8},
                    "variant": "null_fixed_reference",
                    "agent_mode": "homogeneous",
                }
            )
        )
        assert c.quality_dist == Normal(0.5, 0.1, (0.0, 1.0))
        assert c.rhetorical_dist == BetaOneW(8)
        assert c.variant is Variant.NULL_FIXED_REFERENCE
        assert c.agent_mode is AgentMode.HOMOGENEOUS

    @pytest.mark.parametrize(
        "doc, key",
        [
            ('{"quality_dist": {"kind": "gamma"}}', "quality_dist"),
            ('{"variant": "half"}', "variant"),
            ('{"timesteps": 10.5}', "timesteps"),
            ('[]', "object"),
        ],
    )
    def test_bad_values_name_the_field(self, doc, key):
        with pytest.raises(ConfigError, match=key):
            parse_config(doc)


dists = st.one_of(
    st.builds(BetaOneW, st.floats(0.5, 20)),
    st.builds(lambda lo, w: Uniform(lo, lo + w), st.floats(0, 0.5), st.floats(0, 0.5)),
    st.builds(lambda mu, sd: Normal(mu, sd, (0.0, 1.0)), st.floats(0.2, 0.8), st.floats(0.01, 0.5)),
    st.builds(Normal, st.floats(-1, 1), st.floats(0, 1)),
)


@st.composite
def configs(draw):
    n = draw(st.integers(1, 2000))
    return ModelConfig(
        literature_size=n,
        reading_budget=draw(st.integers(1, n)),
        citing_budget=draw(st.integers(1, 200)),
        timesteps=draw(st.integers(0, 5000)),
        alpha=draw(st.floats(0, 1)),
        beta_reinforce=draw(st.floats(0, 5)),
        quality_dist=draw(dists),
        rhetorical_dist=draw(dists),
        threshold_dist=draw(dists),
        error_sd=draw(st.floats(0, 1)),
        fit_halfwidth=draw(st.floats(0, 1)),
        variant=draw(st.sampled_from(list(Variant))),
        agent_mode=draw(st.sampled_from(list(AgentMode))),
        seed=draw(st.integers(0, 2**64 - 1)),
    )


@settings(max_examples=150)
@given(configs())
def test_config_round_trip(cfg):
    assert parse_config(serialize_config(cfg)) == cfg


class TestRunCsv:
    def test_empty_run(self, tmp_path):
        traj = run_simulation(ModelConfig(literature_size=20, reading_budget=5, citing_budget=3, timesteps=0))
        path = tmp_path / "run.csv"
        emit_run_csv(traj, path)
        assert path.read_text() == "t,correlation,churn,gini\n"
        with open(counts_path(path)) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["paper_id", "quality", "citations"] and len(rows) == 21

    def test_first_row_undefined_fields(self, tmp_path):
        cfg = ModelConfig(
            literature_size=5,
            reading_budget=5,
            citing_budget=5,
            timesteps=3,
            alpha=0.0,
            fit_halfwidth=0.0,
            threshold_dist=Uniform(0, 0),
        )
        path = tmp_path / "run.csv"
        emit_run_csv(run_simulation(cfg), path)
        lines = path.read_text().splitlines()
        # every paper is cited each step, so counts have no variance and correlation is undefined
        assert lines[1] == "0,,,0.0"
        assert read_series_csv(path)[0] == {"t": 0, "correlation": None, "churn": None, "gini": 0.0}

    def test_default_first_row_has_empty_churn(self, tmp_path):
        path = tmp_path / "run.csv"
        emit_run_csv(run_simulation(ModelConfig(timesteps=5)), path)
        series = read_series_csv(path)
        assert series[0]["churn"] is None
        assert all(r["churn"] is not None for r in series[1:])

    def test_counts_round_trip_and_full_precision(self, tmp_path):
        traj = run_simulation(ModelConfig(timesteps=40, seed=2))
        path = tmp_path / "run.csv"
        emit_run_csv(traj, path)
        qualities, counts = read_counts_csv(counts_path(path))
        assert counts == traj.citations.tolist()
        assert qualities == traj.qualities.tolist()
        series = read_series_csv(path)
        assert [r["gini"] for r in series] == traj.series("gini")
        assert [r["correlation"] for r in series] == traj.series("correlation")

    def test_unwritable_path(self, tmp_path):
        traj = run_simulation(ModelConfig(timesteps=1))
        with pytest.raises(OSError):
            emit_run_csv(traj, tmp_path / "missing" / "run.csv")


def test_parse_range():
    assert parse_range("0..9", int) == list(range(10))
    assert parse_range("20..100:10", int) == list(range(20, 101, 10))
    assert parse_range("0..1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_range("0.1,0.2") == [0.1, 0.2]


class TestCli:
    def write_config(self, tmp_path, data, name="c.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return str(path)

    def test_validate_ok(self, tmp_path, capsys):
        assert main(["validate", "--config", self.write_config(tmp_path, {"citing_budget": 100})]) == 0
        printed = json.loads(capsys.readouterr().out)
        assert parse_config(json.dumps(printed["config"])) == ModelConfig(citing_budget=100)

    def test_validate_bad_budget(self, tmp_path, capsys):
        assert main(["validate", "--config", self.write_config(tmp_path, {"citing_budget": 0})]) == 2
        err = capsys.readouterr().err
        assert "citing_budget" in err and len(err.strip().splitlines()) == 1

    def test_usage_errors(self, capsys):
        assert main(["frobnicate"]) == 1
        assert main(["run", "--bogus"]) == 1
        assert main(["reproduce", "fig9", "--out", "x"]) == 1
        assert "s12_s13_homogeneous" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert main(["validate", "--config", str(tmp_path / "nope.json")]) == 3

    def test_unwritable_out(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        cfg = self.write_config(tmp_path, {"timesteps": 2})
        assert main(["run", "--config", cfg, "--out", str(blocker / "sub")]) == 3

    def test_run_is_byte_identical(self, tmp_path):
        cfg = self.write_config(tmp_path, {"timesteps": 50})
        for d in ("a", "b"):
            assert main(["run", "--config", cfg, "--seed", "7", "--out", str(tmp_path / d)]) == 0
        for name in ("run.csv", "run.csv.counts.csv", "manifest.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        manifest = read_manifest(tmp_path / "a" / "manifest.json")
        assert manifest["config"] == ModelConfig(timesteps=50, seed=7)
        # the manifest alone is enough to rerun bit-identically
        rerun = run_simulation(manifest["config"])
        _, counts = read_counts_csv(tmp_path / "a" / "run.csv.counts.csv")
        assert counts == rerun.citations.tolist()

    def test_sweep(self, tmp_path):
        cfg = self.write_config(tmp_path, {"timesteps": 10})
        out = tmp_path / "sw"
        code = main(
            ["sweep", "--config", cfg, "--axis", "citing_budget", "--values", "20..40:10", "--seeds", "0..1",
             "--variants", "full,null_fixed_threshold", "--out", str(out), "--resamples", "20"]
        )  # fmt: skip
        assert code == 0
        with open(out / "sweep.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert list(rows[0]) == ["variant", "axis", "value", "seed", "end_correlation", "mean_churn", "end_gini"]
        assert len(rows) == 2 * 3 * 2
        assert {r["value"] for r in rows} == {"20", "30", "40"}
        with open(out / "intervals.csv") as fh:
            ivs = list(csv.DictReader(fh))
        assert list(ivs[0]) == ["variant", "axis", "value", "metric", "mean", "ci_lo", "ci_hi"]
        assert len(ivs) == 2 * 3 * 3
        assert read_manifest(out / "manifest.json")["config"] == ModelConfig(timesteps=10)

    def test_sweep_bad_cell_is_config_error(self, tmp_path, capsys):
        code = main(["sweep", "--axis", "literature_size", "--values", "100", "--seeds", "0", "--out", str(tmp_path)])
        assert code == 2
        assert "literature_size=100" in capsys.readouterr().err

    def test_reproduce_fig2(self, tmp_path):
        assert main(["reproduce", "fig2", "--out", str(tmp_path), "--seeds", "0", "--resamples", "20"]) == 0
        names = {p.name for p in tmp_path.iterdir()}
        assert {"manifest.json", "default_decomposition.csv", "default_full_seed0.csv"} <= names
        assert sum(n.endswith(".counts.csv") for n in names) == 3


def test_csv_numbers_are_locale_free(tmp_path):
    traj = run_simulation(ModelConfig(timesteps=30))
    path = tmp_path / "run.csv"
    emit_run_csv(traj, path)
    for line in path.read_text().splitlines()[1:]:
        for field in line.split(","):
            if field:
                float(field)
                assert " " not in field and "_" not in field

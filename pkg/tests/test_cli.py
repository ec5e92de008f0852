import json
import os

import pytest

from newsgeo.cli import STAGES, main
from newsgeo.config import RunConfig, config_from_dict, config_load
from newsgeo.errors import ConfigurationError


PIPELINE_CONFIG = {
    "seed": 7,
    "synth": {"n_states": 30, "base_users": 8.0,
              "tie_user_fraction": 0.05,
              "deleted_comment_fraction": 0.02,
              "n_malformed_lines": 3,
              "interaction_users_per_state": 3,
              "connectivity_base": 0.3,
              "n_cascade_urls": 40,
              "cascade_states_range": [2, 8]},
}


def write_config(tmp_path, data):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(data))
    return str(path)


class TestConfig:
    def test_defaults(self):
        cfg = config_from_dict({})
        assert cfg.bin_km == 100.0
        assert cfg.damping == 0.85
        assert cfg.min_states == 5
        assert cfg.rule == "chain"
        assert cfg.residual_intercept is True
        assert cfg.cascade_ks == [2, 3, 5]

    def test_empty_file_is_all_defaults(self, tmp_path):
        path = tmp_path / "empty.json"
        path.write_text("")
        assert config_load(str(path)) == RunConfig()

    def test_unknown_key_named_in_error(self):
        with pytest.raises(ConfigurationError, match="dampnig"):
            config_from_dict({"dampnig": 0.9})

    @pytest.mark.parametrize("key,value", [
        ("damping", 1.5),
        ("bin_km", -10),
        ("scope", "everything"),
        ("rule", "ring"),
        ("aic_direction", "sideways"),
        ("min_states", 1),
        ("cascade_ks", [1, 2]),
        ("alpha", 2.0),
        ("threads", 0),
    ])
    def test_bad_value_names_key(self, key, value):
        with pytest.raises(ConfigurationError, match=key):
            config_from_dict({key: value})


class TestExitCodes:
    def test_bad_config_exits_2(self, tmp_path):
        cfg = write_config(tmp_path, {"rule": "ring"})
        assert main(["ingest", "--config", cfg,
                     "--out-dir", str(tmp_path / "out")]) == 2

    def test_missing_dependency_exits_3(self, tmp_path):
        assert main(["ingest", "--out-dir", str(tmp_path / "out")]) == 3

    def test_report_before_anything_exits_3(self, tmp_path):
        assert main(["report", "--out-dir", str(tmp_path / "out")]) == 3

    def test_missing_config_file_exits_6(self, tmp_path):
        assert main(["ingest", "--config", str(tmp_path / "nope.json"),
                     "--out-dir", str(tmp_path / "out")]) == 6


def run_pipeline(cfg_path, outdir):
    for stage in STAGES:
        code = main([stage, "--config", cfg_path, "--out-dir", outdir])
        assert code == 0, f"stage {stage} exited {code}"


def artifact_bytes(outdir):
    """Every produced file except the timestamped manifests."""
    found = {}
    for root, _, names in os.walk(outdir):
        if os.path.basename(root) == "manifests":
            continue
        for name in names:
            path = os.path.join(root, name)
            rel = os.path.relpath(path, outdir)
            with open(path, "rb") as fh:
                found[rel] = fh.read()
    return found


@pytest.fixture(scope="module")
def outdir(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("pipeline")
    cfg = write_config(tmp, PIPELINE_CONFIG)
    out = str(tmp / "out")
    run_pipeline(cfg, out)
    return out


class TestPipeline:
    def test_all_manifests_written(self, outdir):
        for stage in STAGES:
            path = os.path.join(outdir, "manifests", f"{stage}.json")
            assert os.path.exists(path)
            manifest = json.loads(open(path).read())
            assert manifest["stage"] == stage
            assert manifest["wall_time_s"] >= 0

    def test_report_bundle_complete(self, outdir):
        report = os.path.join(outdir, "report")
        for name in ("table1.csv", "table3.csv", "fig3a.csv", "fig3b.csv",
                     "fig5.csv", "contagion.json", "summary.json"):
            assert os.path.exists(os.path.join(report, name))
        summary = json.loads(open(os.path.join(report, "summary.json")).read())
        assert "scaling_fits" in summary
        assert "geolocate_summary" in summary

    def test_scaling_fits_match_persisted_counts(self, outdir):
        import csv

        from newsgeo.scaling_laws import fit_scaling

        fits = json.loads(open(os.path.join(outdir,
                                            "scaling_fits.json")).read())
        counts = {}
        users = {}
        with open(os.path.join(outdir, "state_type_counts.csv"),
                  newline="") as fh:
            for row in csv.DictReader(fh):
                counts.setdefault(row["news_type"], {})[row["state"]] = \
                    float(row["count"])
                users[row["state"]] = float(row["users"])
        for label, per_state in counts.items():
            fit, _ = fit_scaling(users, per_state)
            assert fits[label]["beta"] == pytest.approx(fit.beta, abs=1e-9)
            assert fits[label]["r2"] == pytest.approx(fit.r2, abs=1e-9)

    def test_geolocation_counts_match_ledger(self, outdir):
        summary = json.loads(open(os.path.join(
            outdir, "geolocate_summary.json")).read())
        ledger = json.loads(open(os.path.join(outdir, "synth",
                                              "ledger.json")).read())
        assert summary["assigned"] == \
            sum(ledger["state_user_counts"].values())
        assert summary["unassigned"] == len(ledger["tie_authors"])

    def test_rerun_is_byte_identical(self, outdir, tmp_path):
        cfg = write_config(tmp_path, PIPELINE_CONFIG)
        out2 = str(tmp_path / "out2")
        run_pipeline(cfg, out2)
        first = artifact_bytes(outdir)
        second = artifact_bytes(out2)
        assert first.keys() == second.keys()
        for rel in first:
            assert first[rel] == second[rel], f"{rel} differs between runs"


class TestParameterPropagation:
    def test_min_states_reaches_contagion(self, tmp_path):
        cfg_data = dict(PIPELINE_CONFIG)
        cfg_data["synth"] = dict(cfg_data["synth"], n_states=10)
        out = str(tmp_path / "out")
        cfg = write_config(tmp_path, cfg_data)
        for stage in ("synth", "ingest", "classify", "geolocate"):
            assert main([stage, "--config", cfg, "--out-dir", out]) == 0
        strict = dict(cfg_data, min_states=8)
        strict_path = tmp_path / "strict.json"
        strict_path.write_text(json.dumps(strict))
        assert main(["contagion", "--config", str(strict_path),
                     "--out-dir", out]) == 0
        loose = json.loads(open(os.path.join(
            out, "contagion_summary.json")).read())
        strict_urls = {lb: loose[lb]["urls"] for lb in loose}
        assert main(["contagion", "--config", cfg, "--out-dir", out]) == 0
        base = json.loads(open(os.path.join(
            out, "contagion_summary.json")).read())
        for lb in base:
            assert strict_urls[lb] <= base[lb]["urls"]

    def test_seed_flag_overrides_config(self, tmp_path):
        out_a = str(tmp_path / "a")
        out_b = str(tmp_path / "b")
        cfg = write_config(tmp_path, {"synth": {"n_states": 5}})
        assert main(["synth", "--config", cfg, "--out-dir", out_a,
                     "--seed", "1"]) == 0
        assert main(["synth", "--config", cfg, "--out-dir", out_b,
                     "--seed", "2"]) == 0
        a = open(os.path.join(out_a, "synth", "archive.ndjson"), "rb").read()
        b = open(os.path.join(out_b, "synth", "archive.ndjson"), "rb").read()
        assert a != b

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from csgi.errors import (
    ConfigInvalidError,
    CsvParseError,
    DomainError,
    MissingChannelError,
    NonUniformSamplingError,
)
from csgi.pipeline import (
    ChannelGroups,
    group_average,
    ingest_csv,
    load_config,
    rh_from_t_tdew,
    run_sweep,
    validate_config,
    write_line_plot,
)

BASE_CONFIG = {
    "schema_version": 1,
    "name": "ar-sweep",
    "system": "coupled_ar",
    "coupling_values": [0.0, 0.3, 0.6],
    "n_samples": 4000,
    "burn_in": 500,
    "seed": 3,
    "method": "slgc",
    "method_params": {"order": 1},
    "windowing": {"window_len": 500, "n_bootstrap": 10},
    "desk_scale": True,
    "output_dir": "out",
}


def make_config(tmp_path, **over):
    raw = dict(BASE_CONFIG)
    raw.update(over)
    raw["output_dir"] = str(tmp_path / "out")
    return raw


class TestConfigValidation:
    def test_valid_config_accepted(self, tmp_path):
        cfg = validate_config(make_config(tmp_path))
        assert cfg.method == "slgc"
        assert cfg.coupling_values == (0.0, 0.3, 0.6)

    def test_unknown_top_key_rejected(self, tmp_path):
        with pytest.raises(ConfigInvalidError, match="unknown config keys"):
            validate_config(make_config(tmp_path, bogus=1))

    def test_unknown_method_rejected(self, tmp_path):
        with pytest.raises(ConfigInvalidError, match="method"):
            validate_config(make_config(tmp_path, method="psychic"))

    def test_unknown_method_param_rejected(self, tmp_path):
        with pytest.raises(ConfigInvalidError, match="method_params"):
            validate_config(make_config(tmp_path, method_params={"order": 1, "zap": 2}))

    def test_missing_required_key(self, tmp_path):
        raw = make_config(tmp_path)
        del raw["seed"]
        with pytest.raises(ConfigInvalidError, match="seed"):
            validate_config(raw)

    def test_schedules_only_for_nonstationary(self, tmp_path):
        with pytest.raises(ConfigInvalidError):
            validate_config(
                make_config(tmp_path, coupling_schedules={"cxy": [[0, 0.1]], "cyx": [[0, 0.0]]})
            )

    def test_nonstationary_requires_schedules(self, tmp_path):
        raw = make_config(tmp_path, system="henon_nonstationary")
        with pytest.raises(ConfigInvalidError):
            validate_config(raw)
        del raw["coupling_values"]
        raw["coupling_schedules"] = {"cxy": [[0, 0.0], [2000, 0.6]], "cyx": [[0, 0.0]]}
        cfg = validate_config(raw)
        assert cfg.coupling_schedules is not None

    def test_yaml_loading(self, tmp_path):
        import yaml

        path = tmp_path / "cfg.yaml"
        path.write_text(yaml.safe_dump(make_config(tmp_path)))
        cfg = load_config(path)
        assert cfg.name == "ar-sweep"


class TestRunSweep:
    def test_outputs_and_manifest(self, tmp_path):
        cfg = validate_config(make_config(tmp_path))
        written = run_sweep(cfg)
        out = tmp_path / "out"
        summary = (out / "summary.csv").read_text().strip().splitlines()
        assert summary[0] == "coupling,score_xy,err_xy,score_yx,err_yx"
        assert len(summary) == 4
        assert (out / "sweep_xy.svg").exists()
        assert (out / "sweep_yx.svg").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["seed"] == 3
        assert "config_sha256" in manifest
        assert any(p.name == "summary.csv" for p in written)

    def test_rerun_bit_identical(self, tmp_path):
        cfg = validate_config(make_config(tmp_path))
        run_sweep(cfg)
        first = (tmp_path / "out" / "summary.csv").read_bytes()
        run_sweep(cfg)
        second = (tmp_path / "out" / "summary.csv").read_bytes()
        assert first == second

    def test_worker_pool_matches_serial(self, tmp_path):
        cfg = validate_config(make_config(tmp_path))
        run_sweep(cfg)
        serial = (tmp_path / "out" / "summary.csv").read_bytes()
        os.environ["CSGI_WORKERS"] = "2"
        try:
            run_sweep(cfg)
        finally:
            del os.environ["CSGI_WORKERS"]
        assert (tmp_path / "out" / "summary.csv").read_bytes() == serial

    def test_te_method_runs(self, tmp_path):
        cfg = validate_config(
            make_config(
                tmp_path,
                method="te",
                method_params={"bins": 4, "n_shuffles": 3},
                coupling_values=[0.0, 0.5],
                n_samples=3000,
            )
        )
        run_sweep(cfg)
        rows = (tmp_path / "out" / "summary.csv").read_text().strip().splitlines()[1:]
        assert len(rows) == 2

    def test_ccm_method_runs(self, tmp_path):
        cfg = validate_config(
            make_config(
                tmp_path,
                system="two_species",
                method="ccm",
                method_params={"E": 2, "tau": 1, "lib_sizes": [100, 300], "n_replicates": 1},
                coupling_values=[0.1],
                n_samples=3000,
            )
        )
        run_sweep(cfg)
        out = tmp_path / "out"
        conv = (out / "convergence_C0p1.csv").read_text().splitlines()
        assert conv[0] == "lib_size,skill_xy,skill_yx"


class TestIngestCsv:
    def write_csv(self, tmp_path, rows, header="Date Time,T,wv"):
        path = tmp_path / "data.csv"
        path.write_text("\n".join([header] + rows) + "\n")
        return path

    def test_ten_minute_stamps(self, tmp_path):
        rows = [
            "01.01.2020 00:00:00,1.0,3.0",
            "01.01.2020 00:10:00,2.0,4.0",
            "01.01.2020 00:20:00,3.0,5.0",
        ]
        series = ingest_csv(self.write_csv(tmp_path, rows), "Date Time")
        assert set(series) == {"T", "wv"}
        assert series["T"].dt == 600.0
        assert len(series["T"]) == 3

    def test_sentinel_row_dropped(self, tmp_path):
        rows = [
            "01.01.2020 00:00:00,1.0,3.0",
            "01.01.2020 00:10:00,2.0,-9999.0",
            "01.01.2020 00:20:00,3.0,5.0",
        ]
        series = ingest_csv(self.write_csv(tmp_path, rows), "Date Time")
        assert len(series["T"]) == 2
        np.testing.assert_array_equal(series["T"].values, [1.0, 3.0])

    def test_sentinel_clip_keeps_length(self, tmp_path):
        rows = [
            "01.01.2020 00:00:00,1.0,3.0",
            "01.01.2020 00:10:00,2.0,-9999.0",
            "01.01.2020 00:20:00,3.0,5.0",
        ]
        series = ingest_csv(self.write_csv(tmp_path, rows), "Date Time", policy="clip")
        assert len(series["wv"]) == 3
        assert series["wv"].values[1] in (3.0, 5.0)

    def test_shuffled_timestamps_rejected(self, tmp_path):
        rows = [
            "01.01.2020 00:20:00,1.0,3.0",
            "01.01.2020 00:00:00,2.0,4.0",
            "01.01.2020 00:10:00,3.0,5.0",
        ]
        with pytest.raises(NonUniformSamplingError):
            ingest_csv(self.write_csv(tmp_path, rows), "Date Time")

    def test_bad_number_reports_row(self, tmp_path):
        rows = [
            "01.01.2020 00:00:00,1.0,3.0",
            "01.01.2020 00:10:00,oops,4.0",
        ]
        with pytest.raises(CsvParseError, match=":3:"):
            ingest_csv(self.write_csv(tmp_path, rows), "Date Time")

    def test_gap_tolerance_enforced(self, tmp_path):
        rows = [
            "01.01.2020 00:00:00,1.0,1.0",
            "01.01.2020 00:10:00,2.0,1.5",
            "01.01.2020 04:00:00,3.0,2.0",
        ]
        with pytest.raises(NonUniformSamplingError):
            ingest_csv(self.write_csv(tmp_path, rows), "Date Time", gap_tolerance=5)


class TestRelativeHumidity:
    def test_saturated_air(self):
        assert rh_from_t_tdew(15.0, 15.0) == pytest.approx(100.0, abs=1e-9)

    def test_reference_value(self):
        # evaluate the closed form: Tdew=10, T=20
        expected = 100.0 * np.exp(17.625 * 10 / 253.04) / np.exp(17.625 * 20 / 263.04)
        got = rh_from_t_tdew(20.0, 10.0)
        assert got == pytest.approx(expected, abs=1e-12)
        assert abs(got - 52.6) < 0.5

    def test_monotone_decreasing_in_temperature(self):
        temps = np.linspace(-20.0, 40.0, 400)
        rh = rh_from_t_tdew(temps, 10.0)
        assert np.all(np.diff(rh) < 0.0)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            rh_from_t_tdew(-250.0, 0.0)


class TestGroupAverage:
    def test_singleton_groups_pass_through(self):
        groups = ChannelGroups({"A": ["c1"], "B": ["c2"]})
        pairwise = {
            ("c1", "c2"): np.array([0.5, 0.7]),
            ("c2", "c1"): np.array([0.1, 0.2]),
        }
        labels, out = group_average(pairwise, groups)
        assert labels == ("A", "B")
        np.testing.assert_array_equal(out[:, 0, 1], [0.5, 0.7])
        np.testing.assert_array_equal(out[:, 1, 0], [0.1, 0.2])
        # singleton groups have no within-group pairs
        assert np.all(np.isnan(out[:, 0, 0]))

    def test_hand_computed_two_by_two(self):
        groups = ChannelGroups({"A": ["a1", "a2"], "B": ["b1"]})
        pairwise = {
            ("a1", "b1"): np.array([1.0]),
            ("a2", "b1"): np.array([3.0]),
            ("b1", "a1"): np.array([0.0]),
            ("b1", "a2"): np.array([1.0]),
            ("a1", "a2"): np.array([5.0]),
            ("a2", "a1"): np.array([7.0]),
        }
        labels, out = group_average(pairwise, groups)
        assert out[0, 0, 1] == pytest.approx(2.0)  # mean(1, 3)
        assert out[0, 1, 0] == pytest.approx(0.5)  # mean(0, 1)
        assert out[0, 0, 0] == pytest.approx(6.0)  # within-group, no self-pairs

    def test_permutation_invariance(self):
        pairwise = {
            ("a1", "b1"): np.array([1.0]),
            ("a2", "b1"): np.array([3.0]),
            ("b1", "a1"): np.array([0.0]),
            ("b1", "a2"): np.array([1.0]),
            ("a1", "a2"): np.array([5.0]),
            ("a2", "a1"): np.array([7.0]),
        }
        _, a = group_average(pairwise, ChannelGroups({"A": ["a1", "a2"], "B": ["b1"]}))
        _, b = group_average(pairwise, ChannelGroups({"A": ["a2", "a1"], "B": ["b1"]}))
        np.testing.assert_array_equal(a, b)

    def test_missing_pair_detected(self):
        groups = ChannelGroups({"A": ["a1"], "B": ["b1"]})
        with pytest.raises(MissingChannelError):
            group_average({("a1", "b1"): np.array([1.0])}, groups)

    def test_empty_group_rejected(self):
        with pytest.raises(ConfigInvalidError):
            ChannelGroups({"A": []})


class TestSvg:
    def test_deterministic_output(self, tmp_path):
        x = [0.0, 1.0, 2.0]
        y = [0.1, 0.5, 0.2]
        err = [0.05, 0.1, 0.02]
        write_line_plot(tmp_path / "a.svg", x, y, err, title="t")
        write_line_plot(tmp_path / "b.svg", x, y, err, title="t")
        assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()
        text = (tmp_path / "a.svg").read_text()
        assert text.startswith("<svg") and text.rstrip().endswith("</svg>")


class TestCliContracts:
    def run_cli(self, *args):
        return subprocess.run(
            [sys.executable, "-m", "csgi.cli", *args],
            capture_output=True,
            text=True,
        )

    def test_invalid_method_exits_2_without_outputs(self, tmp_path):
        import yaml

        raw = make_config(tmp_path, method="nonsense")
        path = tmp_path / "cfg.yaml"
        path.write_text(yaml.safe_dump(raw))
        proc = self.run_cli("sweep", "--config", str(path))
        assert proc.returncode == 2
        assert not (tmp_path / "out").exists()

    def test_simulate_writes_csv(self, tmp_path):
        import yaml

        raw = make_config(tmp_path, n_samples=200, burn_in=50)
        path = tmp_path / "cfg.yaml"
        path.write_text(yaml.safe_dump(raw))
        out = tmp_path / "sim.csv"
        proc = self.run_cli("simulate", "--config", str(path), "--coupling", "0.3", "--out", str(out))
        assert proc.returncode == 0, proc.stderr
        assert out.read_text().splitlines()[0] == "x,y"

    def test_missing_data_file_exits_3(self, tmp_path):
        proc = self.run_cli(
            "ingest", "--input", str(tmp_path / "nope.csv"), "--datetime-column", "t"
        )
        assert proc.returncode == 3

    def test_divergent_simulation_exits_4(self, tmp_path):
        import yaml

        raw = make_config(
            tmp_path, system="two_species", coupling_values=[8.0],
            n_samples=500, burn_in=100,
        )
        path = tmp_path / "cfg.yaml"
        path.write_text(yaml.safe_dump(raw))
        out = tmp_path / "sim.csv"
        proc = self.run_cli("simulate", "--config", str(path), "--out", str(out))
        assert proc.returncode == 4, proc.stderr

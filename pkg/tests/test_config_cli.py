import json
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from flab import cli, io
from flab.config import EXPERIMENTS, ConfigError, ExperimentConfig, parse_config, serialize_config
from flab.experiments import CSV_COLUMNS, EXIT_CONFIG, EXIT_PASS, EXIT_VIOLATION, run_experiment

GOLDEN = Path(__file__).parent / "golden" / "lemma_suite_n6_seed42_report.json"
CONFIGS = Path(__file__).parents[1] / "scripts" / "configs"


class TestParse:
    def test_minimal(self):
        cfg = parse_config('{"experiment": "dtc-demo", "N": 4, "seed": 1}')
        assert (cfg.K, cfg.cluster_tol, cfg.ratio_tol) == (32, 1e-8, 1e-8)
        assert cfg.seed == 1 and cfg.model == {"type": "random"}

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError, match="'foo'"):
            parse_config('{"experiment": "dtc-demo", "N": 4, "foo": 1}')

    @pytest.mark.parametrize("patch, field", [
        ({"N": 0}, "N"),
        ({"M": 0}, "M"),
        ({"K": 1.5}, "K"),
        ({"subsystem": [0]}, "subsystem"),
        ({"experiment": "nope"}, "experiment"),
        ({"cluster_tol": -1}, "cluster_tol"),
        ({"N": 15}, "N"),
        ({"eps_list": []}, "eps_list"),
        ({"model": {"type": "model_b", "h": [1, 2]}}, "model"),
    ])
    def test_constraint_errors_name_the_field(self, patch, field):
        data = {"experiment": "periodicity-rdm", "N": 4, **patch}
        with pytest.raises(ConfigError, match=f"'{field}'"):
            parse_config(json.dumps(data))

    def test_missing_required(self):
        with pytest.raises(ConfigError, match="'N'"):
            parse_config('{"experiment": "dtc-demo"}')

    def test_invalid_json(self):
        with pytest.raises(ConfigError):
            parse_config("{")

    def test_shipped_configs_parse(self):
        for path in CONFIGS.glob("*.json"):
            parse_config(path.read_text())


@st.composite
def configs(draw):
    N = draw(st.integers(1, 14))
    sites = draw(st.lists(st.integers(1, N), min_size=1, max_size=N, unique=True))
    obs_sites = draw(st.lists(st.integers(1, N), min_size=1, max_size=N, unique=True))
    pauli = "".join(draw(st.sampled_from("xyz")) for _ in obs_sites)
    pos = st.floats(1e-12, 1.0, allow_nan=False)
    return ExperimentConfig(
        experiment=draw(st.sampled_from([e for e in EXPERIMENTS if e not in ("lemma-suite",)])),
        N=N,
        seed=draw(st.integers(0, 2**64 - 1)),
        M=draw(st.integers(2, 10**6)),
        K=draw(st.integers(1, 1024)),
        subsystem=sites,
        observable={"pauli": pauli, "sites": obs_sites},
        cluster_tol=draw(pos),
        ratio_tol=draw(pos),
        delta=draw(pos),
        bounds=sorted(draw(st.lists(st.floats(-100, 100), min_size=2, max_size=2))),
        out=draw(st.text(min_size=1, max_size=10)),
    )


@given(configs())
def test_serialize_parse_round_trip(cfg):
    back = parse_config(serialize_config(cfg))
    assert back == cfg
    assert back.config_hash() == cfg.config_hash()


def run(cfg_dict, tmp_path, name="out"):
    cfg = parse_config(json.dumps(cfg_dict))
    out = tmp_path / name
    return run_experiment(cfg, out), out


class TestRunExperiment:
    def test_zero_schedule_is_exactly_periodic(self, tmp_path):
        status, out = run({"experiment": "periodicity-scalar", "N": 3, "model": {"type": "zero"},
                           "M": 20, "K": 4, "samples": 2}, tmp_path)
        report = json.loads((out / "report.json").read_text())
        assert status == EXIT_PASS
        assert all(r["epsilon_hat"] == 0 for r in report["results"][0]["runs"])

    def test_rdm_warning_flag(self, tmp_path):
        status, out = run({"experiment": "periodicity-rdm", "N": 4, "subsystem": [1, 2],
                           "M": 10, "K": 2, "samples": 1}, tmp_path)
        report = json.loads((out / "report.json").read_text())
        assert report["theorem_condition_warning"] is True
        assert (out / "rdm_trajectory.json").exists()
        status, out = run({"experiment": "periodicity-rdm", "N": 4, "subsystem": [1],
                           "M": 10, "K": 2, "samples": 1}, tmp_path, "small")
        assert json.loads((out / "report.json").read_text())["theorem_condition_warning"] is False

    def test_rerun_is_byte_identical_and_tagged(self, tmp_path):
        cfg = {"experiment": "periodicity-scalar", "N": 4, "seed": 7, "M": 30, "K": 4,
               "draws": 2, "samples": 2}
        _, a = run(cfg, tmp_path, "a")
        _, b = run(cfg, tmp_path, "b")
        assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
        assert (a / "signals.csv").read_bytes() == (b / "signals.csv").read_bytes()
        manifest_a = json.loads((a / "manifest.json").read_text())
        manifest_b = json.loads((b / "manifest.json").read_text())
        manifest_a.pop("timestamp"), manifest_b.pop("timestamp")
        assert manifest_a == manifest_b
        h = manifest_a["config_hash"]
        for name in ("manifest.json", "report.json", "spectrum.json"):
            data = json.loads((a / name).read_text())
            assert data["seed"] == 7 and data["config_hash"] == h
        first = (a / "signals.csv").read_text().splitlines()
        assert first[0] == f"# seed=7 config_hash={h}"
        assert first[1] == ",".join(CSV_COLUMNS)
        assert len(first) == 2 + 4 * 30 * 4

    def test_seed_changes_results(self, tmp_path):
        base = {"experiment": "periodicity-scalar", "N": 3, "M": 10, "K": 2, "samples": 1}
        _, a = run({**base, "seed": 1}, tmp_path, "a")
        _, b = run({**base, "seed": 2}, tmp_path, "b")
        assert (a / "signals.csv").read_text() != (b / "signals.csv").read_text()

    def test_floats_have_17_digits(self, tmp_path):
        _, out = run({"experiment": "periodicity-scalar", "N": 3, "M": 10, "K": 2, "samples": 1}, tmp_path)
        value = (out / "signals.csv").read_text().splitlines()[3].split(",")[3]
        assert float(value) == float(format(float(value), ".17g"))
        assert io.dumps({"x": 0.1}) == '{\n  "x": 0.10000000000000001\n}\n'
        assert io.dumps([float("nan"), float("inf")]) == "[null, null]\n"

    def test_lemma_suite_golden(self, tmp_path):
        status, out = run(json.loads((CONFIGS / "lemma_suite_n6.json").read_text()), tmp_path)
        assert (out / "report.json").read_text() == GOLDEN.read_text()

    def test_lemma_suite_passes(self, tmp_path):
        status, out = run(json.loads((CONFIGS / "lemma_suite_n6.json").read_text()), tmp_path)
        report = json.loads((out / "report.json").read_text())
        failing = [r["check"] for r in report["results"] if not r["passed"]]
        assert status == EXIT_PASS, f"failing checks: {failing}"

    def test_dtc_demo(self, tmp_path):
        status, out = run({"experiment": "dtc-demo", "N": 4, "seed": 1, "M": 200}, tmp_path)
        report = json.loads((out / "report.json").read_text())
        checks = {r["check"]: r for r in report["results"]}
        assert checks["dtc_exact_pi"]["details"]["epsilon_hat_period2"] <= 1e-10
        assert set(checks) == {"dtc_exact_pi", "dtc_detuned", "dtc_noninteracting"}
        assert status in (EXIT_PASS, EXIT_VIOLATION)


class TestCli:
    def write(self, tmp_path, data):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(data) if not isinstance(data, str) else data)
        return str(path)

    def test_validate(self, tmp_path, capsys):
        assert cli.main(["validate", "--config", self.write(tmp_path, {"experiment": "dtc-demo", "N": 4})]) == 0
        assert json.loads(capsys.readouterr().out)["K"] == 32

    def test_bad_config_exit_code(self, tmp_path):
        path = self.write(tmp_path, {"experiment": "dtc-demo", "N": 4, "foo": 1})
        assert cli.main(["validate", "--config", path]) == EXIT_CONFIG
        assert cli.main(["run", "--config", path]) == EXIT_CONFIG
        assert cli.main(["run", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG

    def test_usage_error(self):
        assert cli.main(["frobnicate"]) == EXIT_CONFIG

    def test_run_with_overrides(self, tmp_path):
        path = self.write(tmp_path, {"experiment": "periodicity-scalar", "N": 3, "model": {"type": "zero"},
                                     "M": 5, "K": 2, "samples": 1})
        out = tmp_path / "o"
        assert cli.main(["run", "--config", path, "--seed", "99", "--out", str(out)]) == 0
        assert json.loads((out / "manifest.json").read_text())["seed"] == 99

    def test_dimension_cap_is_numerical_failure(self, tmp_path):
        path = self.write(tmp_path, {"experiment": "periodicity-scalar", "N": 3, "max_qubits": 3,
                                     "M": 5, "K": 2, "samples": 1})
        cfg = parse_config(Path(path).read_text())
        assert cfg.N == 3  # allowed; N above the cap is a config error
        path = self.write(tmp_path, {"experiment": "periodicity-scalar", "N": 4, "max_qubits": 3})
        assert cli.main(["run", "--config", path]) == EXIT_CONFIG

    def test_marginal_spectrum_exit_code(self, tmp_path):
        # h^z = 2e-8 on one qubit gives eigenphases 4e-8 apart: within 10x of cluster_tol
        path = self.write(tmp_path, {"experiment": "lemma-suite", "N": 1,
                                     "model": {"type": "model_b", "h": [0.0, 2e-8], "J": []}})
        assert cli.main(["run", "--config", path, "--out", str(tmp_path / "m")]) == 3

    def test_help_documents_csv_columns(self, capsys):
        with pytest.raises(SystemExit):
            cli._parser().parse_args(["run", "--help"])
        text = capsys.readouterr().out
        for col in CSV_COLUMNS:
            assert f"  {col} " in text

    def test_demo_dtc(self, tmp_path):
        out = tmp_path / "dtc"
        status = cli.main(["demo", "dtc", "--n", "4", "--m", "100", "--out", str(out)])
        assert status in (0, 1)
        assert (out / "signals.csv").exists() and (out / "report.json").exists()

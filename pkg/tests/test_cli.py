import json
import os

import numpy as np
import pytest

from protoneuro import cli, signals
from protoneuro.signals import SyntheticSpikeSpec, TimeSeries


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_series(path, times, values, label=""):
    signals.write_timeseries_csv(TimeSeries(np.asarray(times, float),
                                            np.asarray(values, float), label=label), path)


def test_waveform_reference_protocol(tmp_path, capsys):
    out = tmp_path / "wf.csv"
    code, stdout, _ = run(capsys, "waveform", "--out", str(out))
    assert code == 0
    assert "steps=16000 scan_duration_s=16000" in stdout
    assert out.read_text().splitlines()[0] == "time_s,potential_V,phase"


def test_waveform_invalid_step_size_names_field(tmp_path, capsys):
    code, _, stderr = run(capsys, "waveform", "--out", str(tmp_path / "x.csv"),
                          "--step-size", "0")
    assert code == 2
    assert "step_size" in stderr


def test_waveform_two_step_matches_schedule(tmp_path, capsys):
    out = tmp_path / "wf.csv"
    code, _, _ = run(capsys, "waveform", "--out", str(out), "--start", "0",
                     "--end", "0.002", "--equilibrium-time", "0")
    assert code == 0
    lines = out.read_text().splitlines()
    # 4 segments + terminal row; pulse boundaries at 0.92/1.0/1.92/2.0
    assert len(lines) == 6
    assert lines[2].startswith("0.92,")
    assert lines[4].startswith("1.92,")


def test_detect_flat_signal(tmp_path, capsys):
    src = tmp_path / "flat.csv"
    write_series(src, np.arange(100.0), np.zeros(100))
    code, stdout, _ = run(capsys, "detect", str(src))
    assert code == 0
    assert "count=0" in stdout


def test_detect_missing_file_is_io_error(tmp_path, capsys):
    code, _, stderr = run(capsys, "detect", str(tmp_path / "nope.csv"))
    assert code == 1
    assert "error" in stderr


def test_detect_malformed_file_is_validation_error(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("time_s,value\n0,zap\n")
    code, _, _ = run(capsys, "detect", str(bad))
    assert code == 2


def test_synth_detect_reference_row(tmp_path, capsys):
    src = tmp_path / "row.csv"
    code, _, _ = run(capsys, "synth", "--out", str(src), "--count", "726",
                     "--mean-isi", "22.24", "--jitter", "0.2", "--seed", "5")
    assert code == 0
    code, stdout, _ = run(capsys, "detect", str(src),
                          "--train-out", str(tmp_path / "train.csv"),
                          "--stats-out", str(tmp_path / "stats.json"))
    assert code == 0
    stats = json.loads((tmp_path / "stats.json").read_text())
    assert stats["count"] == 726
    assert stats["frequency_mhz"] == pytest.approx(44.97, rel=0.01)


def test_detect_three_bump_fixture(tmp_path, capsys):
    src = tmp_path / "bumps.csv"
    run(capsys, "synth", "--out", str(src), "--spike-times", "10", "20", "30",
        "--duration", "50")
    code, _, _ = run(capsys, "detect", str(src), "--train-out", str(tmp_path / "t.csv"))
    assert code == 0
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert len(lines) == 4  # header + three spikes


def test_synth_is_seed_deterministic(tmp_path, capsys):
    a, b, c = (tmp_path / n for n in ("a.csv", "b.csv", "c.csv"))
    run(capsys, "synth", "--out", str(a), "--count", "20", "--mean-isi", "10",
        "--jitter", "0.3", "--noise-sd", "1e-4", "--seed", "9")
    run(capsys, "synth", "--out", str(b), "--count", "20", "--mean-isi", "10",
        "--jitter", "0.3", "--noise-sd", "1e-4", "--seed", "9")
    run(capsys, "synth", "--out", str(c), "--count", "20", "--mean-isi", "10",
        "--jitter", "0.3", "--noise-sd", "1e-4", "--seed", "10")
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


def test_seed_env_override_and_flag_priority(tmp_path, capsys, monkeypatch):
    a, b, c = (tmp_path / n for n in ("a.csv", "b.csv", "c.csv"))
    args = ["synth", "--count", "15", "--mean-isi", "8", "--jitter", "0.4"]
    monkeypatch.setenv("PROTONEURO_SEED", "77")
    run(capsys, *args, "--out", str(a))
    monkeypatch.delenv("PROTONEURO_SEED")
    run(capsys, *args, "--out", str(b), "--seed", "77")
    assert a.read_bytes() == b.read_bytes()
    monkeypatch.setenv("PROTONEURO_SEED", "1")
    run(capsys, *args, "--out", str(c), "--seed", "77")  # flag beats env
    assert c.read_bytes() == b.read_bytes()


def test_encode_command(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_series(a, [0, 1, 2], [0.9, 0.1, 0.6], label="a")
    write_series(b, [0, 1, 2], [0.2, 0.8, 0.0], label="b")
    out = tmp_path / "code.csv"
    code, stdout, _ = run(capsys, "encode", str(a), str(b), "--threshold", "0.5",
                          "--out", str(out))
    assert code == 0
    assert out.read_text().splitlines() == ["a,b", "1,0", "0,1", "1,0"]


def test_encode_rejects_mismatched_time_base(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_series(a, [0, 1, 2], [1, 2, 3], label="a")
    write_series(b, [0, 2, 4], [1, 2, 3], label="b")
    code, _, stderr = run(capsys, "encode", str(a), str(b), "--out",
                          str(tmp_path / "c.csv"))
    assert code == 2
    assert "time base" in stderr


def test_weights_seeded_and_fixed(tmp_path, capsys):
    seeded = tmp_path / "w1.csv"
    code, _, _ = run(capsys, "weights", "--seed", "3", "--n", "4", "--out", str(seeded))
    assert code == 0
    rows = [r.split(",") for r in seeded.read_text().splitlines()]
    assert len(rows) == 4 and len(rows[0]) == 4
    again = tmp_path / "w2.csv"
    run(capsys, "weights", "--seed", "3", "--n", "4", "--out", str(again))
    assert seeded.read_bytes() == again.read_bytes()

    fixed = tmp_path / "wt.csv"
    code, stdout, _ = run(capsys, "weights", "--table1", "--out", str(fixed))
    assert code == 0
    first = fixed.read_text().splitlines()[0]
    assert first == "-1,1,1,1,-1,1,-1,1,-1,1"


def make_manifest(tmp_path, rows, seed=7, weights="seeded", coding=None):
    labels = []
    files = []
    for label, spike_times in rows:
        path = tmp_path / f"{label}.csv"
        spec = SyntheticSpikeSpec(duration=100.0, spike_times=tuple(spike_times),
                                  label=label)
        signals.write_timeseries_csv(signals.synthesize_spiky_series(spec), path)
        labels.append(label)
        files.append(path.name)
    doc = {"sample_labels": labels, "source_files": files, "seed": seed,
           "weights": weights}
    if coding:
        doc["coding"] = coding
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps(doc))
    return manifest


def test_pipeline_flat_sample(tmp_path, capsys):
    flat = tmp_path / "flat.csv"
    write_series(flat, np.arange(50.0), np.zeros(50), label="flat")
    manifest = tmp_path / "m.json"
    manifest.write_text(json.dumps({"sample_labels": ["flat"],
                                    "source_files": ["flat.csv"], "seed": 1}))
    code, _, _ = run(capsys, "pipeline", str(manifest), "--output-dir",
                     str(tmp_path / "out"))
    assert code == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["samples"][0]["count"] == 0
    assert all(v == 0.0 for v in report["psi"])
    assert all(v == 0.0 for row in report["grid"] for v in row)
    assert (tmp_path / "out" / "psi_ppi.svg").exists()


def test_pipeline_is_byte_deterministic(tmp_path, capsys):
    manifest = make_manifest(tmp_path, [("a", [10, 40, 70]), ("b", [20, 60])])
    run(capsys, "pipeline", str(manifest), "--output-dir", str(tmp_path / "o1"))
    run(capsys, "pipeline", str(manifest), "--output-dir", str(tmp_path / "o2"))
    assert (tmp_path / "o1" / "report.json").read_bytes() == \
        (tmp_path / "o2" / "report.json").read_bytes()
    assert (tmp_path / "o1" / "psi_ppi.svg").read_bytes() == \
        (tmp_path / "o2" / "psi_ppi.svg").read_bytes()


def test_pipeline_reference_weights(tmp_path, capsys):
    manifest = make_manifest(tmp_path, [("a", [10, 40])], weights="reference")
    code, _, _ = run(capsys, "pipeline", str(manifest), "--output-dir",
                     str(tmp_path / "out"))
    assert code == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["weight_matrix"][0][0] == -1.0
    assert report["weights_source"] == "reference"


def test_pipeline_too_many_samples(tmp_path, capsys):
    rows = [(f"s{i}", [10 + i]) for i in range(3)]
    manifest = make_manifest(tmp_path, rows, coding={"neuron_count": 2})
    code, _, stderr = run(capsys, "pipeline", str(manifest))
    assert code == 2
    assert "neurons" in stderr


def test_pipeline_missing_source_file(tmp_path, capsys):
    manifest = tmp_path / "m.json"
    manifest.write_text(json.dumps({"sample_labels": ["x"],
                                    "source_files": ["ghost.csv"], "seed": 0}))
    code, _, stderr = run(capsys, "pipeline", str(manifest))
    assert code == 2
    assert "ghost.csv" in stderr


def test_pipeline_partial_failure_reported(tmp_path, capsys):
    good = tmp_path / "good.csv"
    write_series(good, np.arange(30.0), np.zeros(30), label="good")
    bad = tmp_path / "bad.csv"
    bad.write_text("time_s,value\n0,zap\n")
    manifest = tmp_path / "m.json"
    manifest.write_text(json.dumps({"sample_labels": ["good", "bad"],
                                    "source_files": ["good.csv", "bad.csv"], "seed": 0}))
    code, stdout, _ = run(capsys, "pipeline", str(manifest), "--output-dir",
                          str(tmp_path / "out"))
    assert code != 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert "bad" in report["errors"]
    assert len(report["samples"]) == 1


def test_pipeline_reference_surrogates_aggregate(tmp_path, capsys):
    from protoneuro.spikes import REFERENCE_SPIKE_TABLE
    labels, files = [], []
    for row, (label, count, mean_isi, _) in enumerate(REFERENCE_SPIKE_TABLE):
        spec = SyntheticSpikeSpec(duration=(count + 1) * mean_isi, count=count,
                                  mean_isi=mean_isi, jitter_fraction=0.2,
                                  spike_amplitude=0.001, seed=row, label=label)
        path = tmp_path / f"s{row}.csv"
        signals.write_timeseries_csv(signals.synthesize_spiky_series(spec), path)
        labels.append(label)
        files.append(path.name)
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps({"sample_labels": labels, "source_files": files,
                                    "seed": 4, "coding": {"neuron_count": 12}}))
    code, _, _ = run(capsys, "pipeline", str(manifest), "--output-dir",
                     str(tmp_path / "out"))
    assert code == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert len(report["samples"]) == 12
    assert report["aggregate"]["mean_count"] == pytest.approx(348.58, rel=0.02)


def test_report_summary(tmp_path, capsys):
    manifest = make_manifest(tmp_path, [("a", [10, 40, 70]), ("b", [20, 60])])
    run(capsys, "pipeline", str(manifest), "--output-dir", str(tmp_path / "out"))
    code, stdout, _ = run(capsys, "report", str(tmp_path / "out" / "report.json"))
    assert code == 0
    assert "a" in stdout and "mean" in stdout and "top PSI" in stdout


def test_sim_spiking_command(tmp_path, capsys):
    net = tmp_path / "net.json"
    net.write_text(json.dumps({
        "n": 1, "recurrent_weights": [[0.0]], "input_weights": [[1.0]],
        "output_weights": [[1.0]], "lif": {"refractory": 0.0},
    }))
    prefix = str(tmp_path / "run")
    code, stdout, _ = run(capsys, "sim-spiking", "--net", str(net),
                          "--steps", "20000", "--drive", "1.5",
                          "--out-prefix", prefix)
    assert code == 0
    raster = (tmp_path / "run_raster.csv").read_text().splitlines()
    assert len(raster) > 100
    assert os.path.exists(prefix + "_trace.csv")
    assert os.path.exists(prefix + "_output.csv")


def test_sim_rate_command(tmp_path, capsys):
    net = tmp_path / "rnet.json"
    net.write_text(json.dumps({
        "n": 1, "recurrent_weights": [[0.0]], "input_weights": [[1.0]],
        "time_constant": 0.01, "dt": 1e-4,
    }))
    prefix = str(tmp_path / "rate")
    code, _, _ = run(capsys, "sim-rate", "--net", str(net), "--steps", "5000",
                     "--drive", "0.5", "--out-prefix", prefix)
    assert code == 0
    lines = (tmp_path / "rate_trace.csv").read_text().splitlines()
    final = float(lines[-1].split(",")[2])
    assert final == pytest.approx(np.tanh(0.5), rel=0.01)


def test_sim_spiking_input_csv(tmp_path, capsys):
    net = tmp_path / "net.json"
    net.write_text(json.dumps({"n": 1, "recurrent_weights": [[0.0]],
                               "input_weights": [[1.0]], "output_weights": [[1.0]]}))
    stream = tmp_path / "fin.csv"
    stream.write_text("time_s,ch0\n" + "\n".join(f"{k},2.0" for k in range(500)) + "\n")
    code, stdout, _ = run(capsys, "sim-spiking", "--net", str(net), "--input",
                          str(stream), "--out-prefix", str(tmp_path / "r"))
    assert code == 0
    assert "steps=500" in stdout


def test_qsar_fit_and_predict_round_trip(tmp_path, capsys):
    from protoneuro import qsar
    rng = np.random.default_rng(11)
    x = rng.uniform(100, 600, 14)
    y = rng.integers(1, 6, 14).astype(float)
    rates = qsar.predict(qsar.REFERENCE_COEFFICIENTS, x, y)
    obs = tmp_path / "obs.csv"
    with open(obs, "w") as fh:
        fh.write("label,molecular_weight_gmol,peptide_length,mean_firing_rate_hz\n")
        for i in range(14):
            fh.write(f"s{i},{x[i]:.6f},{y[i]:.0f},{rates[i]:.9g}\n")
    model = tmp_path / "model.json"
    code, stdout, _ = run(capsys, "qsar-fit", str(obs), "--out", str(model))
    assert code == 0
    doc = json.loads(model.read_text())
    assert doc["coefficients"]["p00"] == pytest.approx(2349.0, rel=1e-4)
    assert "bounds" in doc

    code, stdout, _ = run(capsys, "qsar-predict", "--model", str(model),
                          "--x", "0", "--y", "0")
    assert code == 0
    assert "predicted_rate_hz=2349" in stdout


def test_qsar_fit_rank_deficient_is_numeric_failure(tmp_path, capsys):
    obs = tmp_path / "obs.csv"
    with open(obs, "w") as fh:
        fh.write("label,molecular_weight_gmol,peptide_length,mean_firing_rate_hz\n")
        for i in range(9):
            fh.write(f"s{i},{100 + i * 50},3,{500 + i}\n")
    code, _, stderr = run(capsys, "qsar-fit", str(obs), "--out", str(tmp_path / "m.json"))
    assert code == 3
    assert "rank" in stderr


def test_qsar_predict_with_builtin_model_and_deviation(capsys):
    code, stdout, _ = run(capsys, "qsar-predict", "--x", "100", "--y", "3",
                          "--mean", "3000")
    assert code == 0
    assert "predicted_rate_hz=3285.1" in stdout
    assert "percent_deviation=+9.5033%" in stdout


def test_config_file_sections(tmp_path, capsys):
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({"detection": {"threshold": 0.5},
                               "dpv": {"start_potential": 0.0, "end_potential": 1.0,
                                       "step_size": 0.5}}))
    src = tmp_path / "s.csv"
    write_series(src, np.arange(30.0), np.concatenate([np.zeros(10), [0.4], np.zeros(19)]))
    code, stdout, _ = run(capsys, "detect", str(src), "--config", str(cfg))
    assert code == 0
    assert "count=0" in stdout  # 0.4 below the configured 0.5 threshold
    # flag overrides config
    code, stdout, _ = run(capsys, "detect", str(src), "--config", str(cfg),
                          "--threshold", "0.3")
    assert "count=1" in stdout
    out = tmp_path / "w.csv"
    code, stdout, _ = run(capsys, "waveform", "--config", str(cfg), "--out", str(out))
    assert "steps=2 " in stdout


def test_bad_config_rejected(tmp_path, capsys):
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({"mystery": 1}))
    code, _, stderr = run(capsys, "waveform", "--config", str(cfg),
                          "--out", str(tmp_path / "x.csv"))
    assert code == 2
    assert "mystery" in stderr


def test_every_subcommand_has_help(capsys):
    parser = cli.build_parser()
    subparsers = parser._subparsers._group_actions[0].choices
    expected = {"waveform", "synth", "detect", "encode", "weights", "pipeline",
                "sim-spiking", "sim-rate", "qsar-fit", "qsar-predict", "report"}
    assert expected == set(subparsers)
    for name, sub in subparsers.items():
        with pytest.raises(SystemExit) as exc:
            sub.parse_args(["--help"])
        assert exc.value.code == 0
        help_text = capsys.readouterr().out
        for action in sub._actions:
            for opt in action.option_strings:
                assert opt in help_text

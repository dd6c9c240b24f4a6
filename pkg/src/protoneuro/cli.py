"""Command-line entry point.

    protoneuro <subcommand> [--config FILE] [flags]

Subcommands: waveform, synth, detect, encode, weights, pipeline,
sim-spiking, sim-rate, qsar-fit, qsar-predict, report.

Exit codes: 0 success, 1 I/O failure, 2 validation failure, 3 numeric
failure (rank deficiency, non-finite state). Config file values can be
overridden per flag; explicit flags always win. The environment variable
PROTONEURO_SEED overrides the config seed and is itself overridden by
--seed.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import coding, dpv, networks, qsar, signals, spikes
from .config import RunConfig, derive_seed, load_config, load_manifest
from .errors import NumericError, ValidationError

EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3


def _resolve_seed(args, config: RunConfig) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("PROTONEURO_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValidationError(f"PROTONEURO_SEED must be an integer, got {env!r}") from None
    return config.seed


def _override(base, **updates):
    """Rebuild a frozen config dataclass with the non-None flag values."""
    fields = {k: v for k, v in updates.items() if v is not None}
    if not fields:
        return base
    current = {name: getattr(base, name) for name in base.__dataclass_fields__}
    current.update(fields)
    return type(base)(**current)


def cmd_waveform(args) -> int:
    config = load_config(args.config)
    params = _override(config.dpv, start_potential=args.start, end_potential=args.end,
                       step_size=args.step_size, pulse_amplitude=args.pulse_amplitude,
                       pulse_width=args.pulse_width, scan_rate=args.scan_rate,
                       equilibrium_time=args.equilibrium_time)
    waveform = dpv.generate_waveform(params)
    dpv.write_waveform_csv(waveform, args.out)
    print(f"steps={dpv.step_count(params)} scan_duration_s={dpv.scan_duration(params):g}")
    return EXIT_OK


def cmd_synth(args) -> int:
    config = load_config(args.config)
    seed = _resolve_seed(args, config)
    spike_times = tuple(args.spike_times) if args.spike_times else None
    duration = args.duration
    if duration is None:
        if spike_times:
            duration = spike_times[-1] + 5 * args.half_width
        elif args.count:
            duration = (args.count + 1) * args.mean_isi
        else:
            raise ValidationError("--duration is required when no spikes are placed")
    spec = signals.SyntheticSpikeSpec(
        duration=duration, spike_times=spike_times,
        count=args.count if spike_times is None else None,
        mean_isi=args.mean_isi if spike_times is None else None,
        jitter_fraction=args.jitter, spike_amplitude=args.amplitude,
        spike_half_width=args.half_width, baseline=args.baseline,
        noise_sd=args.noise_sd, seed=seed, label=args.label,
    )
    series = signals.synthesize_spiky_series(spec)
    signals.write_timeseries_csv(series, args.out)
    print(f"samples={len(series)} duration_s={series.duration:g}")
    return EXIT_OK


def _detection_config(args, config: RunConfig) -> spikes.SpikeDetectionConfig:
    return _override(config.detection, threshold=args.threshold,
                     min_peak_distance=args.min_distance)


def cmd_detect(args) -> int:
    config = load_config(args.config)
    detcfg = _detection_config(args, config)
    series = signals.read_timeseries_csv(args.input)
    train = spikes.detect_spikes(series, detcfg)
    stats = spikes.compute_stats(train)
    if args.train_out:
        spikes.write_spiketrain_csv(train, args.train_out)
    if args.stats_out:
        spikes.write_stats_json(stats, args.stats_out, label=series.label)
    isi = "n/a" if stats.mean_isi is None else f"{stats.mean_isi:g}"
    freq = "n/a" if stats.frequency is None else f"{stats.frequency:g}"
    print(f"count={stats.count} mean_isi_s={isi} frequency_mhz={freq}")
    return EXIT_OK


def cmd_encode(args) -> int:
    config = load_config(args.config)
    threshold = args.threshold if args.threshold is not None else config.coding.threshold
    series_list = [signals.read_timeseries_csv(p) for p in args.inputs]
    n = min(len(s) for s in series_list)
    base = series_list[0].times[:n]
    for s in series_list[1:]:
        if not np.array_equal(s.times[:n], base):
            raise ValidationError(f"{s.label or 'series'}: time base differs from the first input")
    matrix = np.vstack([s.values[:n] for s in series_list])
    labels = [s.label or f"n{i + 1}" for i, s in enumerate(series_list)]
    time_base = float(base[1] - base[0]) if n > 1 else 1.0
    code = coding.encode(matrix, threshold, labels=labels, time_base=time_base)
    coding.write_code_csv(code, args.out)
    print(f"neurons={code.neuron_count} samples={code.sample_count} "
          f"active_fraction={code.entries.mean():.6g}")
    return EXIT_OK


def cmd_weights(args) -> int:
    config = load_config(args.config)
    if args.table1:
        matrix = coding.reference_weight_matrix()
        source = "table1"
    else:
        seed = _resolve_seed(args, config)
        matrix = coding.init_weights(args.n, derive_seed(seed, "weights"))
        source = f"seeded({seed})"
    with open(args.out, "w", newline="") as fh:
        for row in matrix.entries:
            fh.write(",".join(f"{x:.9g}" for x in row) + "\n")
    print(f"n={matrix.size} source={source}")
    return EXIT_OK


def cmd_pipeline(args) -> int:
    manifest = load_manifest(args.manifest)
    out_dir = args.output_dir or "."
    os.makedirs(out_dir, exist_ok=True)
    n_neurons = manifest.coding.neuron_count
    if len(manifest.sample_labels) > n_neurons:
        raise ValidationError(
            f"manifest lists {len(manifest.sample_labels)} samples "
            f"but the coding network has {n_neurons} neurons"
        )

    per_sample = []
    errors = {}
    series_by_label = {}
    for label, path in zip(manifest.sample_labels, manifest.source_files):
        try:
            series = signals.read_timeseries_csv(path)
            train = spikes.detect_spikes(series, manifest.detection)
            stats = spikes.compute_stats(train)
            series_by_label[label] = series
            per_sample.append(spikes.stats_to_dict(stats, label))
        except (ValidationError, OSError) as exc:
            errors[label] = str(exc)

    stats_objs = [spikes.SpikeStats(d["count"], d["mean_isi_s"], d["frequency_mhz"],
                                    d["duration_s"]) for d in per_sample]
    aggregate = None
    if stats_objs:
        mean_count, mean_isi = spikes.aggregate_stats(stats_objs)
        aggregate = {"mean_count": mean_count, "mean_isi_of_means_s": mean_isi}

    report = {
        "aggregate": aggregate,
        "detection": {"threshold": manifest.detection.threshold,
                      "min_peak_distance_s": manifest.detection.min_peak_distance},
        "coding": {"neuron_count": n_neurons, "threshold": manifest.coding.threshold,
                   "time_window_s": manifest.coding.time_window},
        "errors": errors,
        "seed": manifest.seed,
        "weights_source": manifest.weights,
    }

    ok_labels = [lab for lab in manifest.sample_labels if lab in series_by_label]
    if ok_labels:
        n_samples = min(len(series_by_label[lab]) for lab in ok_labels)
        potentials = np.zeros((n_neurons, n_samples))
        labels = list(ok_labels) + [f"unassigned{j + 1}"
                                    for j in range(n_neurons - len(ok_labels))]
        for j, lab in enumerate(ok_labels):
            potentials[j] = series_by_label[lab].values[:n_samples]
        code = coding.encode(potentials, manifest.coding.threshold, labels=labels)
        if manifest.weights == "reference":
            if n_neurons != 10:
                raise ValidationError("the reference weight matrix is 10x10")
            weights = coding.reference_weight_matrix()
        else:
            weights = coding.init_weights(n_neurons, derive_seed(manifest.seed, "weights"))
        grid = coding.psi_ppi(weights, code)
        coding.write_heatmap_svg(grid, os.path.join(out_dir, "psi_ppi.svg"), labels=labels)
        report.update({
            "code_matrix": code.entries.tolist(),
            "neuron_labels": labels,
            "weight_matrix": weights.entries.tolist(),
            "psi": grid.psi.tolist(),
            "ppi": grid.ppi.tolist(),
            "grid": grid.grid.tolist(),
        })

    report["samples"] = per_sample
    report_path = os.path.join(out_dir, "report.json")
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"report={report_path} samples_ok={len(per_sample)} samples_failed={len(errors)}")
    return EXIT_OK if not errors else EXIT_IO


def _read_stream_csv(path, expected_rows=None):
    """Wide input stream: header time_s,ch0[,ch1...]; returns (d, steps) array."""
    with open(path, "r", newline="") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("time_s"):
        raise ValidationError(f"{path}: expected a header starting with time_s")
    width = len(lines[0].split(",")) - 1
    if width < 1:
        raise ValidationError(f"{path}: header lists no channels")
    rows = []
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")[1:]
        if len(parts) != width:
            raise ValidationError(f"{path}: line {lineno}: expected {width} channels")
        try:
            rows.append([float(x) for x in parts])
        except ValueError as exc:
            raise ValidationError(f"{path}: line {lineno}: {exc}") from None
    arr = np.asarray(rows, dtype=np.float64).T if rows else np.empty((width, 0))
    if expected_rows is not None and arr.shape[0] != expected_rows:
        raise ValidationError(f"{path}: {arr.shape[0]} channels, expected {expected_rows}")
    return arr


def _constant_stream(args, rows):
    if args.steps is None:
        raise ValidationError("give --input or both --steps and --drive")
    return np.full((rows, args.steps), args.drive)


def cmd_sim_spiking(args) -> int:
    net = networks.load_network_json(args.net, "spiking")
    fin = _read_stream_csv(args.input, net.input_dim) if args.input \
        else _constant_stream(args, net.input_dim)
    trace = networks.run_spiking(net, fin)
    networks.write_trace_csv(trace, args.out_prefix + "_trace.csv")
    networks.write_raster_csv(trace, args.out_prefix + "_raster.csv")
    networks.write_outputs_csv(trace, args.out_prefix + "_output.csv")
    print(f"steps={trace.times.size} spikes={len(trace.spike_raster)}")
    return EXIT_OK


def cmd_sim_rate(args) -> int:
    net = networks.load_network_json(args.net, "rate")
    fin = _read_stream_csv(args.input, net.input_dim) if args.input \
        else _constant_stream(args, net.input_dim)
    feedback = None
    if args.feedback:
        if net.feedback_weights is None:
            raise ValidationError("network spec has no feedback weights")
        feedback = _read_stream_csv(args.feedback, net.feedback_weights.shape[1])
        if feedback.shape[1] != fin.shape[1]:
            raise ValidationError("feedback and input lengths differ")
    trace = networks.run_rate(net, fin, output_feedback=feedback)
    networks.write_trace_csv(trace, args.out_prefix + "_trace.csv")
    print(f"steps={trace.times.size} units={net.n}")
    return EXIT_OK


def cmd_qsar_fit(args) -> int:
    observations = qsar.read_observations_csv(args.observations)
    result = qsar.fit(observations)
    coeffs = result.coefficients
    if len(observations) > 9:
        bounds = qsar.confidence_bounds(result, observations, level=args.level)
        coeffs = qsar.QsarCoefficients.from_array(coeffs.as_array(), bounds=bounds)
    qsar.write_model_json(coeffs, args.out, residual_sum_squares=result.residual_sum_squares)
    print(f"observations={len(observations)} residual_ss={result.residual_sum_squares:.6g}")
    return EXIT_OK


def cmd_qsar_predict(args) -> int:
    coeffs = qsar.read_model_json(args.model) if args.model else qsar.REFERENCE_COEFFICIENTS
    rate = qsar.predict(coeffs, args.x, args.y)
    print(f"predicted_rate_hz={rate:.6g}")
    if args.mean is not None:
        print(f"percent_deviation={qsar.percent_deviation(args.mean, rate):+.4f}%")
    return EXIT_OK


def cmd_report(args) -> int:
    with open(args.report) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{args.report}: invalid JSON ({exc})") from None
    samples = doc.get("samples", [])
    print(f"{'sample':<24} {'count':>7} {'mean ISI (s)':>13} {'freq (mHz)':>11}")
    for s in samples:
        isi = "n/a" if s.get("mean_isi_s") is None else f"{s['mean_isi_s']:.2f}"
        freq = "n/a" if s.get("frequency_mhz") is None else f"{s['frequency_mhz']:.2f}"
        print(f"{s.get('label', '?'):<24} {s.get('count', 0):>7} {isi:>13} {freq:>11}")
    agg = doc.get("aggregate")
    if agg:
        isi = agg.get("mean_isi_of_means_s")
        isi = "n/a" if isi is None else f"{isi:.2f}"
        print(f"{'mean':<24} {agg.get('mean_count', 0):>7.2f} {isi:>13}")
    errors = doc.get("errors") or {}
    for label, msg in sorted(errors.items()):
        print(f"failed: {label}: {msg}")
    psi = doc.get("psi")
    if psi is not None:
        ranked = sorted(enumerate(psi), key=lambda kv: -kv[1])
        labels = doc.get("neuron_labels", [str(j) for j in range(len(psi))])
        top = ", ".join(f"{labels[j]}={v:.3f}" for j, v in ranked[:3])
        print(f"top PSI: {top}")
    return EXIT_OK


def _add_config(p):
    p.add_argument("--config", help="JSON run configuration file")


def _add_seed(p):
    p.add_argument("--seed", type=int, help="override the config / PROTONEURO_SEED seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="protoneuro",
        description="Voltammetry waveforms, spike statistics, temporal coding "
                    "and proto-neural network simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("waveform", help="generate the excitation waveform CSV")
    _add_config(p)
    p.add_argument("--out", required=True, help="output CSV (time_s,potential_V,phase)")
    p.add_argument("--start", type=float, help="start potential (V)")
    p.add_argument("--end", type=float, help="end potential (V)")
    p.add_argument("--step-size", type=float, help="staircase step (V)")
    p.add_argument("--pulse-amplitude", type=float, help="pulse height (V)")
    p.add_argument("--pulse-width", type=float, help="pulse duration (s)")
    p.add_argument("--scan-rate", type=float, help="scan rate (V/s)")
    p.add_argument("--equilibrium-time", type=float, help="initial hold (s)")
    p.set_defaults(func=cmd_waveform)

    p = sub.add_parser("synth", help="synthesise a spiky time series CSV")
    _add_config(p)
    _add_seed(p)
    p.add_argument("--out", required=True, help="output series CSV")
    p.add_argument("--count", type=int, help="number of spikes to place")
    p.add_argument("--mean-isi", type=float, help="mean inter-spike interval (s)")
    p.add_argument("--jitter", type=float, default=0.0, help="ISI jitter fraction in [0,1)")
    p.add_argument("--spike-times", type=float, nargs="+", help="explicit spike times (s)")
    p.add_argument("--duration", type=float, help="series duration (s)")
    p.add_argument("--amplitude", type=float, default=0.001, help="bump height (uA)")
    p.add_argument("--half-width", type=float, default=1.5, help="bump half width (s)")
    p.add_argument("--baseline", type=float, default=0.0, help="baseline level (uA)")
    p.add_argument("--noise-sd", type=float, default=0.0, help="white noise SD (uA)")
    p.add_argument("--label", default="", help="sample label stored in the CSV")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("detect", help="detect spikes and write train/stats")
    _add_config(p)
    p.add_argument("input", help="input series CSV")
    p.add_argument("--threshold", type=float, help="detection threshold")
    p.add_argument("--min-distance", type=float, help="minimum peak distance (s)")
    p.add_argument("--train-out", help="spike train CSV (spike_time_s,amplitude)")
    p.add_argument("--stats-out", help="statistics JSON")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("encode", help="threshold series into a binary code matrix")
    _add_config(p)
    p.add_argument("inputs", nargs="+", help="one series CSV per neuron row")
    p.add_argument("--threshold", type=float, help="coding threshold")
    p.add_argument("--out", required=True, help="output code CSV")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("weights", help="emit a synaptic weight matrix CSV")
    _add_config(p)
    _add_seed(p)
    p.add_argument("--n", type=int, default=10, help="network size for seeded weights")
    p.add_argument("--table1", action="store_true",
                   help="use the bundled fixed 10x10 matrix instead of seeded weights")
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("pipeline", help="detect/stats/encode/psi-ppi over a manifest")
    p.add_argument("manifest", help="experiment manifest JSON")
    p.add_argument("--output-dir", help="directory for report.json and psi_ppi.svg")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("sim-spiking", help="run the spiking network")
    p.add_argument("--net", required=True, help="network spec JSON")
    p.add_argument("--input", help="input stream CSV (time_s,ch0,...)")
    p.add_argument("--steps", type=int, help="steps of constant drive (with --drive)")
    p.add_argument("--drive", type=float, default=0.0, help="constant drive value")
    p.add_argument("--out-prefix", required=True,
                   help="prefix for _trace.csv, _raster.csv and _output.csv")
    p.set_defaults(func=cmd_sim_spiking)

    p = sub.add_parser("sim-rate", help="run the rate network")
    p.add_argument("--net", required=True, help="network spec JSON")
    p.add_argument("--input", help="input stream CSV (time_s,ch0,...)")
    p.add_argument("--feedback", help="output-feedback stream CSV")
    p.add_argument("--steps", type=int, help="steps of constant drive (with --drive)")
    p.add_argument("--drive", type=float, default=0.0, help="constant drive value")
    p.add_argument("--out-prefix", required=True, help="prefix for _trace.csv")
    p.set_defaults(func=cmd_sim_rate)

    p = sub.add_parser("qsar-fit", help="fit the firing-rate surface to observations")
    p.add_argument("observations",
                   help="CSV: label,molecular_weight_gmol,peptide_length,mean_firing_rate_hz")
    p.add_argument("--out", required=True, help="fitted model JSON")
    p.add_argument("--level", type=float, default=0.95, help="confidence level")
    p.set_defaults(func=cmd_qsar_fit)

    p = sub.add_parser("qsar-predict", help="evaluate the firing-rate surface")
    p.add_argument("--model", help="model JSON; defaults to the bundled coefficients")
    p.add_argument("--x", type=float, required=True, help="molecular weight (g/mol)")
    p.add_argument("--y", type=float, required=True, help="peptide length (residues)")
    p.add_argument("--mean", type=float, help="observed rate, to also print %% deviation")
    p.set_defaults(func=cmd_qsar_predict)

    p = sub.add_parser("report", help="summarise a pipeline report JSON")
    p.add_argument("report", help="report.json produced by the pipeline")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

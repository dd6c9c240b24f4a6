"""Time-series ingestion, persistence and synthesis.

The on-disk format is deliberately tiny and bit-stable:

    time_s,value
    # unit=microampere
    # label=L-Glu:L-Asp
    0,0.000123456789
    1,0.000234567891

The first line is always the ``time_s,value`` header. Comment lines starting
with ``#`` carry ``unit`` (always written) and ``label`` (written only when
non-empty) and may appear anywhere after the header. Numbers are printed
with 9 significant digits, which makes write -> read -> write byte-identical
and read/write a relative-1e-9 round trip.

Recorded traces the toolkit cannot obtain from hardware are synthesised as
Gaussian bumps on a noisy baseline, sampled once per second to match the
data-logger convention used throughout.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, ValidationError

UNIT_MICROAMPERE = "microampere"
UNIT_VOLT = "volt"
_UNITS = (UNIT_MICROAMPERE, UNIT_VOLT)

HEADER = "time_s,value"


@dataclass(eq=False)
class TimeSeries:
    """A sampled trace: strictly increasing times plus finite values.

    Instances are treated as immutable; the backing arrays are marked
    read-only so they can be shared freely across threads.
    """

    times: np.ndarray
    values: np.ndarray
    unit: str = UNIT_MICROAMPERE
    label: str = ""

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if t.ndim != 1 or v.ndim != 1:
            raise ValidationError("times and values must be one-dimensional")
        if t.size != v.size:
            raise ValidationError(f"times ({t.size}) and values ({v.size}) differ in length")
        if t.size < 1:
            raise ValidationError("a series needs at least one sample")
        if not np.all(np.isfinite(t)):
            raise ValidationError("times contain non-finite entries")
        if not np.all(np.isfinite(v)):
            raise ValidationError("values contain non-finite entries")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValidationError("times must be strictly increasing")
        if self.unit not in _UNITS:
            raise ValidationError(f"unit must be one of {_UNITS}, got {self.unit!r}")
        t = t.copy()
        v = v.copy()
        t.flags.writeable = False
        v.flags.writeable = False
        self.times = t
        self.values = v

    def __len__(self):
        return self.times.size

    @property
    def duration(self) -> float:
        """Elapsed time between the first and last sample."""
        return float(self.times[-1] - self.times[0])


def read_timeseries_csv(path) -> TimeSeries:
    """Parse a series file, validating monotone times and finite values."""
    times = []
    values = []
    unit = UNIT_MICROAMPERE
    label = ""
    with open(path, "r", newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise ParseError(f"expected header {HEADER!r}", line=1)
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            meta = line[1:].strip()
            if meta.startswith("unit="):
                unit = meta[len("unit="):]
            elif meta.startswith("label="):
                label = meta[len("label="):]
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(f"expected 2 fields, got {len(parts)}", line=lineno)
        try:
            times.append(float(parts[0]))
            values.append(float(parts[1]))
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
    try:
        return TimeSeries(np.array(times), np.array(values), unit=unit, label=label)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def write_timeseries_csv(series: TimeSeries, path) -> None:
    """Write a series so that reading it back reproduces the series.

    Values carry 9 significant digits (relative quantisation below 5e-9);
    times carry 12 so long recordings keep sub-ulp-of-a-second stamps.
    """
    with open(path, "w", newline="") as fh:
        fh.write(HEADER + "\n")
        fh.write(f"# unit={series.unit}\n")
        if series.label:
            fh.write(f"# label={series.label}\n")
        for t, v in zip(series.times, series.values):
            fh.write(f"{t:.12g},{v:.9g}\n")


@dataclass(frozen=True)
class SyntheticSpikeSpec:
    """Recipe for a surrogate spiky trace.

    Spike placement comes either from explicit ``spike_times`` or from a
    (count, mean_isi, jitter_fraction) triple. In the latter case the gaps
    are jittered uniformly by +-jitter_fraction and then rescaled so the
    realised mean inter-spike interval equals ``mean_isi`` exactly; the
    first spike sits one mean interval after t=0. Each spike is a Gaussian
    bump of the given amplitude whose half width at half maximum is
    ``spike_half_width``. Sampling is one sample per second.
    """

    duration: float
    spike_times: tuple = None
    count: int = None
    mean_isi: float = None
    jitter_fraction: float = 0.0
    spike_amplitude: float = 0.001
    spike_half_width: float = 1.5
    baseline: float = 0.0
    noise_sd: float = 0.0
    seed: int = 0
    label: str = ""

    def __post_init__(self):
        if self.duration <= 0:
            raise ValidationError("duration must be > 0")
        if self.spike_amplitude <= 0:
            raise ValidationError("spike_amplitude must be > 0")
        if self.spike_half_width <= 0:
            raise ValidationError("spike_half_width must be > 0")
        if self.noise_sd < 0:
            raise ValidationError("noise_sd must be >= 0")
        if self.spike_times is not None:
            if self.count is not None or self.mean_isi is not None:
                raise ValidationError("give either spike_times or (count, mean_isi), not both")
            st = tuple(float(t) for t in self.spike_times)
            if any(b <= a for a, b in zip(st, st[1:])):
                raise ValidationError("spike_times must be strictly increasing")
            if st and (st[0] < 0 or st[-1] > self.duration):
                raise ValidationError("spike_times must lie within [0, duration]")
            object.__setattr__(self, "spike_times", st)
        else:
            if self.count is None:
                raise ValidationError("need spike_times or (count, mean_isi)")
            if self.count < 0:
                raise ValidationError("count must be >= 0")
            if self.count > 0 and (self.mean_isi is None or self.mean_isi <= 0):
                raise ValidationError("mean_isi must be > 0")
            if not 0 <= self.jitter_fraction < 1:
                raise ValidationError("jitter_fraction must be in [0, 1)")


def _placed_spike_times(spec: SyntheticSpikeSpec, rng: np.random.Generator) -> np.ndarray:
    if spec.spike_times is not None:
        return np.asarray(spec.spike_times, dtype=np.float64)
    if spec.count == 0:
        return np.empty(0)
    if spec.count == 1:
        return np.array([spec.mean_isi])
    gaps = spec.mean_isi * (1.0 + spec.jitter_fraction * rng.uniform(-1, 1, spec.count - 1))
    # Rescale so the realised mean ISI is exact, not just exact in expectation.
    gaps *= (spec.count - 1) * spec.mean_isi / gaps.sum()
    return spec.mean_isi + np.concatenate(([0.0], np.cumsum(gaps)))


def synthesize_spiky_series(spec: SyntheticSpikeSpec) -> TimeSeries:
    """Deterministic surrogate trace for a spec (the seed is part of the spec)."""
    rng = np.random.default_rng(spec.seed)
    spike_times = _placed_spike_times(spec, rng)
    if spike_times.size and spike_times[-1] > spec.duration:
        raise ValidationError(
            f"generated spikes extend to {spike_times[-1]:.1f} s, beyond duration {spec.duration}"
        )
    times = np.arange(math.floor(spec.duration) + 1, dtype=np.float64)
    values = np.full(times.size, spec.baseline)
    sigma = spec.spike_half_width / math.sqrt(2.0 * math.log(2.0))
    for ts in spike_times:
        lo = np.searchsorted(times, ts - 6 * sigma)
        hi = np.searchsorted(times, ts + 6 * sigma)
        window = times[lo:hi]
        values[lo:hi] += spec.spike_amplitude * np.exp(-((window - ts) ** 2) / (2 * sigma**2))
    if spec.noise_sd > 0:
        values = values + spec.noise_sd * rng.standard_normal(times.size)
    return TimeSeries(times, values, unit=UNIT_MICROAMPERE, label=spec.label)

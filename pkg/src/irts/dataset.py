"""Irregular multivariate time-series samples: parsing, validation, masks,
time-lag matrices, normalization, splits and synthetic missingness.

A sample holds a d x T value matrix over strictly increasing timestamps.
Missing entries are IEEE NaN in memory and JSON ``null`` on the wire.
All operations are pure: they return new objects and never mutate inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .rng import SplitMix64, derive

MISSING = float("nan")


class DataError(ValueError):
    """Raised for malformed input files or invariant violations."""


@dataclass(frozen=True)
class IrtsSample:
    """One irregular series: values[d, T] with NaN for missing entries."""

    id: str
    times: np.ndarray          # shape (T,), strictly increasing
    values: np.ndarray         # shape (d, T), float64, NaN = missing
    channels: tuple[str, ...] = ()
    label: int | None = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if times.ndim != 1:
            raise DataError(f"sample {self.id!r}: times must be 1-D")
        if values.ndim != 2:
            raise DataError(f"sample {self.id!r}: values must be 2-D")
        if values.shape[1] != times.shape[0]:
            raise DataError(
                f"sample {self.id!r}: values has {values.shape[1]} columns "
                f"but times has length {times.shape[0]}"
            )
        if times.shape[0] >= 2 and not np.all(np.diff(times) > 0):
            raise DataError(f"sample {self.id!r}: times not strictly increasing")
        if np.any(np.isinf(values)):
            raise DataError(f"sample {self.id!r}: values contain infinities")
        if self.label is not None and (not isinstance(self.label, int) or self.label < 0):
            raise DataError(f"sample {self.id!r}: label must be a non-negative integer")

    @property
    def n_channels(self) -> int:
        return self.values.shape[0]

    @property
    def n_steps(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class NormStats:
    """Per-channel z-score statistics from observed training entries only."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.std) <= 0):
            raise DataError("NormStats std entries must be positive")


@dataclass(frozen=True)
class SplitSpec:
    """Disjoint train/valid/test index partition in an 8:1:1 ratio."""

    train: tuple[int, ...]
    valid: tuple[int, ...]
    test: tuple[int, ...]
    seed: int

    def to_json(self) -> str:
        doc = {
            "train": list(self.train),
            "valid": list(self.valid),
            "test": list(self.test),
            "seed": self.seed,
        }
        return json.dumps(doc, sort_keys=True)


def parse_jsonl(stream: bytes | Iterable[bytes]) -> list[IrtsSample]:
    """Parse JSON-lines samples.

    One object per line: {"id", "times", "channels", "values", "label"},
    where values is d rows x T columns and nulls mark missing entries.
    Raises DataError with the offending 1-based line number.
    """
    if isinstance(stream, bytes):
        lines = stream.split(b"\n")
    else:
        lines = list(stream)
    samples: list[IrtsSample] = []
    n_channels: int | None = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            doc = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise DataError(f"line {lineno}: malformed JSON ({exc})") from exc
        try:
            rows = doc["values"]
            if not rows or any(len(r) != len(rows[0]) for r in rows):
                raise DataError(f"line {lineno}: ragged or empty values rows")
            values = np.array(
                [[MISSING if v is None else float(v) for v in row] for row in rows],
                dtype=np.float64,
            )
            label = doc.get("label")
            sample = IrtsSample(
                id=str(doc["id"]),
                times=np.asarray(doc["times"], dtype=np.float64),
                values=values,
                channels=tuple(doc.get("channels") or ()),
                label=None if label is None else int(label),
            )
        except KeyError as exc:
            raise DataError(f"line {lineno}: missing field {exc.args[0]!r}") from exc
        except DataError as exc:
            raise DataError(f"line {lineno}: {exc}") from exc
        if n_channels is None:
            n_channels = sample.n_channels
        elif sample.n_channels != n_channels:
            raise DataError(
                f"line {lineno}: channel count {sample.n_channels} "
                f"differs from earlier lines ({n_channels})"
            )
        samples.append(sample)
    return samples


def sample_to_json_line(sample: IrtsSample) -> str:
    """Inverse of parse_jsonl for one sample (NaN -> null)."""
    rows = [
        [None if np.isnan(v) else float(v) for v in row]
        for row in sample.values
    ]
    doc = {
        "id": sample.id,
        "times": [float(t) for t in sample.times],
        "channels": list(sample.channels),
        "values": rows,
        "label": sample.label,
    }
    return json.dumps(doc, sort_keys=True)


def compute_mask(sample: IrtsSample) -> np.ndarray:
    """Binary observation mask: 1 observed, 0 missing. Shape (d, T)."""
    return (~np.isnan(sample.values)).astype(np.float64)


def compute_lag(times: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Elapsed time since the most recent observed value, per channel.

    Per channel j (1-based i over time):
        lag_1 = 0
        lag_i = t_i - t_{i-1}             if the previous entry was observed
        lag_i = lag_{i-1} + t_i - t_{i-1} otherwise
    """
    times = np.asarray(times, dtype=np.float64)
    mask = np.asarray(mask, dtype=np.float64)
    if mask.ndim != 2 or mask.shape[1] != times.shape[0]:
        raise DataError(
            f"mask shape {mask.shape} inconsistent with {times.shape[0]} timestamps"
        )
    d, T = mask.shape
    lag = np.zeros((d, T), dtype=np.float64)
    for i in range(1, T):
        gap = times[i] - times[i - 1]
        prev_observed = mask[:, i - 1] > 0
        lag[:, i] = np.where(prev_observed, gap, lag[:, i - 1] + gap)
    return lag


def fit_norm_stats(samples: Sequence[IrtsSample]) -> NormStats:
    """Per-channel mean/std over observed entries. Degenerate channels get std=1."""
    if not samples:
        raise DataError("cannot fit statistics on an empty sample list")
    stacked = np.concatenate([s.values for s in samples], axis=1)
    with np.errstate(invalid="ignore"):
        mean = np.nanmean(stacked, axis=1)
        std = np.nanstd(stacked, axis=1)
    mean = np.where(np.isnan(mean), 0.0, mean)
    std = np.where(np.isnan(std) | (std <= 0), 1.0, std)
    return NormStats(mean=mean, std=std)


def normalize(samples: Sequence[IrtsSample], stats: NormStats) -> list[IrtsSample]:
    """Z-score observed entries channel-wise; missing entries stay NaN."""
    out = []
    for s in samples:
        if s.n_channels != stats.mean.shape[0]:
            raise DataError(
                f"sample {s.id!r}: {s.n_channels} channels but stats cover "
                f"{stats.mean.shape[0]}"
            )
        scaled = (s.values - stats.mean[:, None]) / stats.std[:, None]
        out.append(replace(s, values=scaled))
    return out


def split_811(n_samples: int, seed: int) -> SplitSpec:
    """Shuffle indices with a seeded RNG and cut 8:1:1 (floor, floor, rest)."""
    if n_samples < 10:
        raise DataError(f"need at least 10 samples for an 8:1:1 split, got {n_samples}")
    idx = list(range(n_samples))
    SplitMix64(derive(seed, 0x5B17)).shuffle(idx)
    n_train = int(0.8 * n_samples)
    n_valid = int(0.1 * n_samples)
    return SplitSpec(
        train=tuple(idx[:n_train]),
        valid=tuple(idx[n_train:n_train + n_valid]),
        test=tuple(idx[n_train + n_valid:]),
        seed=seed,
    )


def _round_half_away(x: float) -> int:
    """0.5 rounds up for non-negative x (so 0.5 * 17 sensors -> 9)."""
    return int(np.floor(x + 0.5))


def leave_sensors_out(sample: IrtsSample, ratio: float, seed: int) -> IrtsSample:
    """Blank whole channels: round_half_away(ratio * d) of them, chosen uniformly."""
    if not 0.0 <= ratio <= 1.0:
        raise DataError(f"ratio must be in [0, 1], got {ratio}")
    d = sample.n_channels
    k = _round_half_away(ratio * d)
    values = sample.values.copy()
    if k > 0:
        rng = SplitMix64(derive(seed, 0x5E45))
        chosen = rng.choice(d, min(k, d))
        values[chosen, :] = MISSING
    return replace(sample, values=values)


def leave_samples_out(sample: IrtsSample, ratio: float, seed: int) -> IrtsSample:
    """Blank whole time columns: round_half_away(ratio * T) of them."""
    if not 0.0 <= ratio <= 1.0:
        raise DataError(f"ratio must be in [0, 1], got {ratio}")
    T = sample.n_steps
    k = _round_half_away(ratio * T)
    values = sample.values.copy()
    if k > 0:
        rng = SplitMix64(derive(seed, 0x5A3))
        chosen = rng.choice(T, min(k, T))
        values[:, chosen] = MISSING
    return replace(sample, values=values)


def upsample_to_parity(labels: Sequence[int], indices: Sequence[int], seed: int) -> list[int]:
    """Duplicate minority-class indices until every class matches the majority count.

    Optional imbalance mitigation; duplicates are drawn cyclically from a
    seeded shuffle of each minority class.
    """
    by_class: dict[int, list[int]] = {}
    for ix in indices:
        by_class.setdefault(labels[ix], []).append(ix)
    if not by_class:
        return list(indices)
    target = max(len(v) for v in by_class.values())
    out = list(indices)
    for cls in sorted(by_class):
        members = list(by_class[cls])
        need = target - len(members)
        if need <= 0:
            continue
        pool = members[:]
        SplitMix64(derive(seed, 0x0B5, cls)).shuffle(pool)
        out.extend(pool[i % len(pool)] for i in range(need))
    return out

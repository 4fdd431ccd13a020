"""Bonn-format EEG records, experiment cases, fold plans, and synthetic data."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

SET_LETTERS = ("A", "B", "C", "D", "E")

# The public archive names its sets Z/O/N/F/S; A..E is the usual
# normal / normal / interictal / interictal / ictal reading.
BONN_ALIASES: dict[str, str] = {"A": "Z", "B": "O", "C": "N", "D": "F", "E": "S"}

BONN_RECORD_LENGTH = 4097


@dataclass(frozen=True)
class EegRecord:
    """One single-channel EEG signal plus its set label and record index.

    Immutable after construction; the sample array is copied and marked
    read-only so records can be shared across parallel workers.
    """

    set_label: str
    index: int
    samples: np.ndarray

    def __post_init__(self) -> None:
        if self.set_label not in SET_LETTERS:
            raise ValueError(
                f"unknown set label {self.set_label!r}; expected one of {SET_LETTERS}"
            )
        if self.index < 1:
            raise ValueError(f"record index must be >= 1, got {self.index}")
        samples = np.array(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("samples must be a nonempty 1-D sequence")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def record_id(self) -> str:
        return f"{self.set_label}{self.index:03d}"

    def __len__(self) -> int:
        return int(self.samples.size)


def load_record(
    path: str | Path,
    set_label: str,
    index: int,
    expected_length: int = BONN_RECORD_LENGTH,
) -> EegRecord:
    """Parse one Bonn-format record file: plain text, one sample per line.

    Records whose sample count differs from ``expected_length`` are rejected,
    never truncated or padded: the window arithmetic downstream assumes the
    exact length.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"record file not found: {path}")
    values: list[float] = []
    with path.open("r") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                values.append(float(text))
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: non-numeric sample {text!r}"
                ) from None
    if len(values) != expected_length:
        raise ValueError(
            f"{path}: wrong length, expected {expected_length} samples, "
            f"found {len(values)}"
        )
    return EegRecord(set_label=set_label, index=index, samples=np.array(values))


def save_record(record: EegRecord, path: str | Path) -> None:
    """Write a record in Bonn file format, 17 significant digits per sample."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        for value in record.samples:
            fh.write(format(value, ".17g"))
            fh.write("\n")


@dataclass(frozen=True)
class ExperimentCase:
    """Mapping from set letters to class indices for one classification problem."""

    name: str
    class_of_set: dict[str, int]
    num_classes: int

    @property
    def sets(self) -> tuple[str, ...]:
        return tuple(sorted(self.class_of_set))

    def group_letters(self, class_index: int) -> str:
        """Set letters belonging to one class, e.g. 'AB' for class 0 of AB-CD-E."""
        return "".join(
            s for s in SET_LETTERS if self.class_of_set.get(s) == class_index
        )

    @property
    def positive_class(self) -> int:
        """Designated positive class for binary metrics: the last group."""
        return self.num_classes - 1


def define_case(spec: str) -> ExperimentCase:
    """Build an ExperimentCase from a group spec like 'AB-CD-E' or 'A-E'.

    Each dash-separated group of set letters becomes one class; class index
    equals the group's position in the spec.
    """
    groups = spec.strip().upper().split("-")
    if len(groups) < 2:
        raise ValueError(f"case spec {spec!r} needs at least two groups")
    class_of_set: dict[str, int] = {}
    for class_index, group in enumerate(groups):
        if not group:
            raise ValueError(f"case spec {spec!r} contains an empty group")
        for letter in group:
            if letter not in SET_LETTERS:
                raise ValueError(
                    f"unknown set letter {letter!r} in case spec {spec!r}"
                )
            if letter in class_of_set:
                raise ValueError(
                    f"set letter {letter!r} appears twice in case spec {spec!r}"
                )
            class_of_set[letter] = class_index
    return ExperimentCase(
        name="-".join(groups), class_of_set=class_of_set, num_classes=len(groups)
    )


@dataclass(frozen=True)
class FoldPlan:
    """Per-set partition of record indices into k disjoint test groups."""

    k: int
    seed: int
    assignments: dict[str, tuple[tuple[int, ...], ...]]

    def test_ids(self, group: str, fold: int) -> tuple[int, ...]:
        return self.assignments[group][fold]

    def train_ids(self, group: str, fold: int) -> tuple[int, ...]:
        chunks = self.assignments[group]
        out: list[int] = []
        for i, chunk in enumerate(chunks):
            if i != fold:
                out.extend(chunk)
        return tuple(out)


def plan_folds(
    ids_by_group: Mapping[str, Sequence[int]], k: int, seed: int
) -> FoldPlan:
    """Stratified k-fold partition, deterministic for a given seed.

    Each group's ids are shuffled with a seeded generator and sliced into k
    near-equal chunks (groups are processed in sorted order so the plan does
    not depend on mapping order).
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    rng = np.random.default_rng(seed)
    assignments: dict[str, tuple[tuple[int, ...], ...]] = {}
    for group in sorted(ids_by_group):
        ids = sorted(ids_by_group[group])
        if len(ids) < k:
            raise ValueError(
                f"group {group!r} has {len(ids)} records, fewer than k={k}"
            )
        shuffled = [ids[i] for i in rng.permutation(len(ids))]
        base, extra = divmod(len(ids), k)
        chunks: list[tuple[int, ...]] = []
        start = 0
        for fold in range(k):
            size = base + (1 if fold < extra else 0)
            chunks.append(tuple(shuffled[start : start + size]))
            start += size
        assignments[group] = tuple(chunks)
    return FoldPlan(k=k, seed=seed, assignments=assignments)


@dataclass(frozen=True)
class BandSpec:
    """Frequency band (Hz) one synthetic class draws its sinusoids from."""

    low_hz: float
    high_hz: float
    components: int = 3

    def __post_init__(self) -> None:
        if not 0.0 < self.low_hz < self.high_hz:
            raise ValueError(
                f"need 0 < low_hz < high_hz, got ({self.low_hz}, {self.high_hz})"
            )
        if self.components < 1:
            raise ValueError("components must be >= 1")


def synthesize_dataset(
    num_records_per_class: int,
    class_profiles: Sequence[BandSpec],
    length: int = BONN_RECORD_LENGTH,
    noise_level: float = 0.05,
    seed: int = 0,
    sample_rate: float = 173.61,
) -> list[EegRecord]:
    """Generate a labeled desk-scale dataset of band-limited sinusoid mixtures.

    Class i is assigned set letter SET_LETTERS[i]. Each record sums
    ``components`` sinusoids with frequencies drawn uniformly from the class
    band (amplitudes in [0.5, 1.5), random phases) plus white Gaussian noise
    scaled by ``noise_level``. Bitwise-deterministic for fixed arguments.
    """
    profiles = list(class_profiles)
    if len(profiles) < 2:
        raise ValueError("need at least two class profiles")
    if len(profiles) > len(SET_LETTERS):
        raise ValueError(f"at most {len(SET_LETTERS)} class profiles supported")
    if length < 512:
        raise ValueError(f"record length must be >= 512, got {length}")
    if num_records_per_class < 1:
        raise ValueError("num_records_per_class must be >= 1")
    rng = np.random.default_rng(seed)
    t = np.arange(length, dtype=np.float64) / float(sample_rate)
    records: list[EegRecord] = []
    for class_index, band in enumerate(profiles):
        letter = SET_LETTERS[class_index]
        for index in range(1, num_records_per_class + 1):
            freqs = rng.uniform(band.low_hz, band.high_hz, size=band.components)
            amps = rng.uniform(0.5, 1.5, size=band.components)
            phases = rng.uniform(0.0, 2.0 * np.pi, size=band.components)
            signal = np.zeros(length, dtype=np.float64)
            for f, a, p in zip(freqs, amps, phases):
                signal += a * np.sin(2.0 * np.pi * f * t + p)
            signal += noise_level * rng.standard_normal(length)
            records.append(EegRecord(set_label=letter, index=index, samples=signal))
    return records


def _set_directory(root: Path, letter: str, aliases: Mapping[str, str]) -> Path | None:
    alias = aliases.get(letter, letter)
    for name in (letter, letter.lower(), alias, alias.lower()):
        candidate = root / name
        if candidate.is_dir():
            return candidate
    return None


def _record_index(stem: str, fallback: int) -> int:
    digits = re.findall(r"\d+", stem)
    return int(digits[-1]) if digits else fallback


def load_bonn_set(
    root: str | Path,
    letter: str,
    aliases: Mapping[str, str] | None = None,
    expected_length: int = BONN_RECORD_LENGTH,
) -> list[EegRecord]:
    """Load every record of one set from a Bonn-layout directory tree.

    Set directories may be named by letter (A..E) or by the archive's native
    prefix (Z/O/N/F/S); record indices are parsed from filename digits.
    """
    aliases = BONN_ALIASES if aliases is None else dict(aliases)
    root = Path(root)
    set_dir = _set_directory(root, letter, aliases)
    if set_dir is None:
        raise FileNotFoundError(
            f"no directory for set {letter} (or alias {aliases.get(letter)}) under {root}"
        )
    files = sorted(p for p in set_dir.iterdir() if p.is_file())
    if not files:
        raise FileNotFoundError(f"set directory {set_dir} contains no record files")
    records = []
    seen: set[int] = set()
    for position, path in enumerate(files, start=1):
        index = _record_index(path.stem, position)
        if index in seen:
            raise ValueError(f"duplicate record index {index} in {set_dir}")
        seen.add(index)
        records.append(load_record(path, letter, index, expected_length))
    records.sort(key=lambda r: r.index)
    return records


def load_bonn_root(
    root: str | Path,
    letters: Iterable[str] = SET_LETTERS,
    aliases: Mapping[str, str] | None = None,
    expected_length: int = BONN_RECORD_LENGTH,
) -> list[EegRecord]:
    """Load the requested sets from a Bonn-layout directory tree."""
    records: list[EegRecord] = []
    for letter in letters:
        records.extend(load_bonn_set(root, letter, aliases, expected_length))
    return records


def load_manifest(
    path: str | Path, expected_length: int = BONN_RECORD_LENGTH
) -> list[EegRecord]:
    """Load records listed in a manifest of ``set_letter,path`` lines.

    Relative paths resolve against the manifest's directory; lines that are
    empty or start with '#' are skipped.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"manifest not found: {path}")
    base = path.parent
    counters = {letter: 0 for letter in SET_LETTERS}
    records: list[EegRecord] = []
    with path.open("r") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            letter, sep, rel = text.partition(",")
            letter = letter.strip().upper()
            rel = rel.strip()
            if not sep or letter not in SET_LETTERS or not rel:
                raise ValueError(
                    f"{path}:{lineno}: expected 'set_letter,path', got {text!r}"
                )
            counters[letter] += 1
            record_path = Path(rel)
            if not record_path.is_absolute():
                record_path = base / record_path
            records.append(
                load_record(
                    record_path,
                    letter,
                    _record_index(record_path.stem, counters[letter]),
                    expected_length,
                )
            )
    return records


def write_bonn_dataset(records: Iterable[EegRecord], root: str | Path) -> list[Path]:
    """Write records as ``<root>/<letter>/<letter><index>.txt`` Bonn files."""
    root = Path(root)
    paths = []
    for record in records:
        path = root / record.set_label / f"{record.record_id}.txt"
        save_record(record, path)
        paths.append(path)
    return paths


def ids_by_set(records: Iterable[EegRecord]) -> dict[str, list[int]]:
    """Record indices grouped by set letter, each list sorted."""
    out: dict[str, list[int]] = {}
    for record in records:
        out.setdefault(record.set_label, []).append(record.index)
    for ids in out.values():
        ids.sort()
    return out

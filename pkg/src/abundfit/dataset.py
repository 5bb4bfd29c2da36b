"""Abundance corpora: parsing, validation, the bundled ten-species corpus.

Input format is a two-column CSV (``species,abundance``, one observation per
row, ``#`` comments, UTF-8).  An optional companion metadata CSV
(``species,species_name,source_ref``) attaches display names and source
references to the labels.  Observations are percent values in (0, 100];
each sample's values are kept sorted descending.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

CSV_HEADER = "species,abundance"
META_HEADER = "species,species_name,source_ref"


@dataclass(frozen=True)
class AbundanceSample:
    """One species' abundance observations, percent units, sorted descending."""

    species_label: str
    species_name: str
    values: tuple[float, ...]
    source_ref: str = ""

    def __post_init__(self):
        if not self.values:
            raise ValueError(f"sample {self.species_label!r} has no values")
        for v in self.values:
            if not 0.0 < v <= 100.0:
                raise ValueError(
                    f"species {self.species_label!r}: abundance {v!r} outside (0, 100]"
                )
        ordered = tuple(sorted(self.values, key=lambda v: -v))
        object.__setattr__(self, "values", ordered)

    @property
    def n(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Corpus:
    samples: tuple[AbundanceSample, ...]
    _by_label: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        labels = [s.species_label for s in self.samples]
        if len(set(labels)) != len(labels):
            dupes = sorted({l for l in labels if labels.count(l) > 1})
            raise ValueError(f"duplicate species labels in corpus: {dupes}")
        object.__setattr__(self, "_by_label", {s.species_label: s for s in self.samples})

    def __iter__(self):
        return iter(self.samples)

    def __len__(self) -> int:
        return len(self.samples)

    def __getitem__(self, label: str) -> AbundanceSample:
        return self._by_label[label]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.species_label for s in self.samples)

    @property
    def total_observations(self) -> int:
        return sum(s.n for s in self.samples)


def _data_rows(text: str, header: str, what: str):
    """Yield (line_number, fields) for non-comment rows, checking the header."""
    seen_header = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not seen_header:
            if line != header:
                raise ValueError(
                    f"{what} line {lineno}: expected header {header!r}, got {line!r}"
                )
            seen_header = True
            continue
        yield lineno, line.split(",")
    if not seen_header:
        raise ValueError(f"{what}: missing header {header!r}")


def parse_meta(text: str) -> dict[str, tuple[str, str]]:
    meta = {}
    for lineno, fields in _data_rows(text, META_HEADER, "metadata"):
        if len(fields) != 3:
            raise ValueError(f"metadata line {lineno}: expected 3 fields, got {len(fields)}")
        label, name, ref = (f.strip() for f in fields)
        meta[label] = (name, ref)
    return meta


def parse_corpus(text: str, meta_text: str | None = None) -> Corpus:
    """Parse the two-column observation CSV into a corpus.

    Rows belonging to one species must be contiguous; a label that reappears
    after another species' block is reported as a duplicate.  Values are
    re-sorted descending regardless of input order.
    """
    meta = parse_meta(meta_text) if meta_text is not None else {}
    order: list[str] = []
    grouped: dict[str, list[float]] = {}
    current = None
    for lineno, fields in _data_rows(text, CSV_HEADER, "corpus"):
        if len(fields) != 2:
            raise ValueError(
                f"corpus line {lineno}: expected 'species,abundance', got {len(fields)} fields"
            )
        label = fields[0].strip()
        if not label:
            raise ValueError(f"corpus line {lineno}: empty species label")
        try:
            value = float(fields[1])
        except ValueError:
            raise ValueError(
                f"corpus line {lineno}: abundance {fields[1]!r} is not a number"
            ) from None
        if not 0.0 < value <= 100.0:
            raise ValueError(
                f"corpus line {lineno}: species {label!r} abundance {value} outside (0, 100]"
            )
        if label != current:
            if label in grouped:
                raise ValueError(f"corpus line {lineno}: duplicate species label {label!r}")
            current = label
            order.append(label)
            grouped[label] = []
        grouped[label].append(value)
    samples = []
    for label in order:
        name, ref = meta.get(label, (label, ""))
        samples.append(AbundanceSample(label, name, tuple(grouped[label]), ref))
    return Corpus(tuple(samples))


def serialize_corpus(corpus: Corpus) -> tuple[str, str]:
    """Render a corpus to (observations CSV, metadata CSV), full precision."""
    lines = [CSV_HEADER]
    meta_lines = [META_HEADER]
    for s in corpus:
        for v in s.values:
            lines.append(f"{s.species_label},{v!r}")
        meta_lines.append(f"{s.species_label},{s.species_name},{s.source_ref}")
    return "\n".join(lines) + "\n", "\n".join(meta_lines) + "\n"


def load_corpus(path, meta_path=None) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    meta_text = None
    if meta_path is not None:
        with open(meta_path, encoding="utf-8") as fh:
            meta_text = fh.read()
    return parse_corpus(text, meta_text)


def _read_data(name: str) -> str:
    return resources.files("abundfit").joinpath(f"data/{name}").read_text(encoding="utf-8")


@lru_cache(maxsize=1)
def builtin_corpus() -> Corpus:
    """The bundled ten-species corpus (227 observations)."""
    return parse_corpus(_read_data("table1.csv"), _read_data("table1.meta.csv"))


def pool(corpus: Corpus, label: str) -> AbundanceSample:
    """Merge every sample of ``corpus`` into one re-sorted sample."""
    if len(corpus) == 0:
        raise ValueError("cannot pool an empty corpus")
    values = tuple(v for s in corpus for v in s.values)
    return AbundanceSample(label, label, values, source_ref="pooled")

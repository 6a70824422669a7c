"""Recording and dataset persistence.

A recording is a channel-synchronized CSV: a ``#``-prefixed header block
(subject, state, sample rate, duration, channel ids), a ``time_s`` column
and one ``ch<N>`` column per channel.  Samples are written with 17
significant digits so the round trip is bit-exact.  A cohort is tied
together by a flat manifest listing one recording file per
(subject, state) pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "STATES",
    "RecordingFile",
    "Manifest",
    "ManifestEntry",
    "Cohort",
    "write_recording",
    "read_recording",
    "write_manifest",
    "read_manifest",
    "write_cohort",
    "load_cohort",
]

#: Physiological states of a cohort, in severity order.
STATES = ("basal", "mild", "severe")

_SAMPLE_FORMAT = "%.17g"


@dataclass
class RecordingFile:
    """One multichannel recording: header metadata plus a time-by-channel matrix."""

    subject: str
    state: str
    sample_rate_hz: float
    channel_ids: tuple
    samples: np.ndarray  # shape (n_samples, n_channels)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 2 or samples.size == 0:
            raise ValueError("samples must form a non-empty 2-D matrix")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must all be finite")
        if not self.sample_rate_hz > 0:
            raise ValueError("sample rate must be positive")
        ids = tuple(int(c) for c in self.channel_ids)
        if len(set(ids)) != len(ids):
            raise ValueError("channel ids must be unique")
        if samples.shape[1] != len(ids):
            raise ValueError(
                f"{samples.shape[1]} sample columns for {len(ids)} channel ids"
            )
        if not self.subject or not self.state:
            raise ValueError("subject and state must be non-empty")
        self.samples = samples
        self.channel_ids = ids

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate_hz

    def channel(self, channel_id: int) -> np.ndarray:
        """Samples of one channel, selected by its id."""
        try:
            column = self.channel_ids.index(int(channel_id))
        except ValueError:
            raise ValueError(
                f"recording has no channel {channel_id}; ids: {self.channel_ids}"
            ) from None
        return self.samples[:, column]


def write_recording(recording: RecordingFile, path) -> Path:
    """Write a recording as a headered CSV; returns the path written."""
    path = Path(path)
    lines = [
        f"# subject: {recording.subject}",
        f"# state: {recording.state}",
        "# sample_rate_hz: " + (_SAMPLE_FORMAT % recording.sample_rate_hz),
        "# duration_s: " + (_SAMPLE_FORMAT % recording.duration_s),
        "# channels: " + ",".join(str(c) for c in recording.channel_ids),
        "time_s," + ",".join(f"ch{c}" for c in recording.channel_ids),
    ]
    period = 1.0 / recording.sample_rate_hz
    for i in range(recording.n_samples):
        cells = [_SAMPLE_FORMAT % (i * period)]
        cells.extend(_SAMPLE_FORMAT % v for v in recording.samples[i])
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")
    return path


def _parse_header(lines, path):
    fields = {}
    body_start = 0
    for i, line in enumerate(lines):
        if not line.startswith("#"):
            body_start = i
            break
        key, sep, value = line[1:].partition(":")
        if not sep:
            raise ValueError(f"{path}: line {i + 1}: malformed header line {line!r}")
        fields[key.strip()] = value.strip()
    else:
        raise ValueError(f"{path}: no data rows after the header")
    for required in ("subject", "state", "sample_rate_hz", "channels"):
        if required not in fields:
            raise ValueError(f"{path}: missing header field '{required}'")
    return fields, body_start


def _parse_cell(token, path, line_no, column_no):
    try:
        value = float(token)
    except ValueError:
        raise ValueError(
            f"{path}: line {line_no}, column {column_no}: invalid number {token!r}"
        ) from None
    if not math.isfinite(value):
        raise ValueError(
            f"{path}: line {line_no}, column {column_no}: non-finite value {token!r}"
        )
    return value


def _parse_header_number(fields, key, path):
    try:
        value = float(fields[key])
    except ValueError:
        raise ValueError(f"{path}: malformed {key} header {fields[key]!r}") from None
    if not math.isfinite(value):
        raise ValueError(f"{path}: non-finite {key} header {fields[key]!r}")
    return value


def read_recording(path) -> RecordingFile:
    """Read a recording CSV, rejecting malformed headers, ragged rows and
    non-numeric or non-finite cells with line/column diagnostics."""
    path = Path(path)
    lines = path.read_text(encoding="ascii").splitlines()
    fields, body_start = _parse_header(lines, path)

    try:
        channel_ids = tuple(int(t) for t in fields["channels"].split(","))
    except ValueError:
        raise ValueError(f"{path}: malformed channels header {fields['channels']!r}") from None
    sample_rate = _parse_header_number(fields, "sample_rate_hz", path)

    expected_columns = "time_s," + ",".join(f"ch{c}" for c in channel_ids)
    if lines[body_start] != expected_columns:
        raise ValueError(
            f"{path}: line {body_start + 1}: column header "
            f"{lines[body_start]!r} does not match channels; expected {expected_columns!r}"
        )

    n_columns = len(channel_ids) + 1
    rows = []
    for offset, line in enumerate(lines[body_start + 1 :]):
        line_no = body_start + 2 + offset
        if not line:
            continue
        tokens = line.split(",")
        if len(tokens) != n_columns:
            raise ValueError(
                f"{path}: line {line_no}: expected {n_columns} columns, found {len(tokens)}"
            )
        rows.append(
            [_parse_cell(t, path, line_no, c + 1) for c, t in enumerate(tokens)]
        )
    if not rows:
        raise ValueError(f"{path}: no data rows after the header")

    matrix = np.asarray(rows, dtype=np.float64)
    recording = RecordingFile(
        subject=fields["subject"],
        state=fields["state"],
        sample_rate_hz=sample_rate,
        channel_ids=channel_ids,
        samples=matrix[:, 1:],
    )
    if "duration_s" in fields:
        declared = _parse_header_number(fields, "duration_s", path)
        if abs(declared - recording.duration_s) > 0.5 / sample_rate:
            raise ValueError(
                f"{path}: declared duration {declared} s does not match "
                f"{recording.n_samples} samples at {sample_rate} Hz"
            )
    return recording


@dataclass(frozen=True)
class ManifestEntry:
    subject: str
    state: str
    path: Path


@dataclass(frozen=True)
class Manifest:
    """Resolved cohort index: one recording path per (subject, state)."""

    entries: tuple
    root: Path
    seed: object = None

    @property
    def subjects(self) -> list:
        return sorted({e.subject for e in self.entries})

    @property
    def states(self) -> list:
        present = {e.state for e in self.entries}
        ordered = [s for s in STATES if s in present]
        return ordered + sorted(present - set(STATES))


def write_manifest(entries, path, seed=None) -> Path:
    """Write a flat manifest; entry paths are stored relative to it."""
    path = Path(path)
    lines = []
    if seed is not None:
        lines.append(f"# seed: {int(seed)}")
    lines.append("subject,state,path")
    for subject, state, rec_path in entries:
        rel = Path(rec_path).relative_to(path.parent)
        lines.append(f"{subject},{state},{rel.as_posix()}")
    path.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")
    return path


def read_manifest(path) -> Manifest:
    """Read a manifest and resolve its recording paths.

    Duplicate (subject, state) entries are rejected; missing recording
    files are all reported in a single error.
    """
    path = Path(path)
    lines = path.read_text(encoding="ascii").splitlines()
    seed = None
    entries = []
    seen = set()
    header_seen = False
    for i, line in enumerate(lines):
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            if key.strip() == "seed":
                seed = int(value.strip())
            continue
        if not header_seen:
            if line != "subject,state,path":
                raise ValueError(
                    f"{path}: line {i + 1}: expected 'subject,state,path' header, got {line!r}"
                )
            header_seen = True
            continue
        tokens = line.split(",")
        if len(tokens) != 3:
            raise ValueError(f"{path}: line {i + 1}: expected 3 fields, found {len(tokens)}")
        subject, state, rel = (t.strip() for t in tokens)
        if (subject, state) in seen:
            raise ValueError(f"{path}: duplicate entry for ({subject}, {state})")
        seen.add((subject, state))
        entries.append(ManifestEntry(subject, state, (path.parent / rel).resolve()))
    if not entries:
        raise ValueError(f"{path}: manifest lists no recordings")

    missing = [str(e.path) for e in entries if not e.path.is_file()]
    if missing:
        raise ValueError(
            f"{path}: missing recording files: " + "; ".join(missing)
        )
    return Manifest(entries=tuple(entries), root=path.parent, seed=seed)


@dataclass
class Cohort:
    """In-memory dataset: recordings keyed by (subject, state)."""

    recordings: dict
    seed: object = None

    def __post_init__(self):
        if not self.recordings:
            raise ValueError("cohort holds no recordings")

    @property
    def subjects(self) -> list:
        return sorted({subject for subject, _ in self.recordings})

    @property
    def states(self) -> list:
        present = {state for _, state in self.recordings}
        return [s for s in STATES if s in present] + sorted(present - set(STATES))

    @property
    def channel_ids(self) -> tuple:
        return next(iter(self.recordings.values())).channel_ids

    def get(self, subject: str, state: str) -> RecordingFile:
        try:
            return self.recordings[(subject, state)]
        except KeyError:
            raise ValueError(f"cohort has no recording for ({subject}, {state})") from None


def write_cohort(cohort: Cohort, out_dir) -> Path:
    """Write every recording plus a manifest under ``out_dir``.

    Returns the manifest path.  Layout: ``recordings/<subject>_<state>.csv``
    with ``manifest.txt`` beside them.
    """
    out_dir = Path(out_dir)
    rec_dir = out_dir / "recordings"
    rec_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for subject in cohort.subjects:
        for state in cohort.states:
            if (subject, state) not in cohort.recordings:
                continue
            rec = cohort.recordings[(subject, state)]
            rec_path = write_recording(rec, rec_dir / f"{subject}_{state}.csv")
            entries.append((subject, state, rec_path))
    return write_manifest(entries, out_dir / "manifest.txt", seed=cohort.seed)


def load_cohort(manifest) -> Cohort:
    """Load every recording listed by a manifest (path or Manifest)."""
    if not isinstance(manifest, Manifest):
        manifest = read_manifest(manifest)
    recordings = {}
    for entry in manifest.entries:
        rec = read_recording(entry.path)
        if rec.subject != entry.subject or rec.state != entry.state:
            raise ValueError(
                f"{entry.path}: header says ({rec.subject}, {rec.state}) but the "
                f"manifest lists it as ({entry.subject}, {entry.state})"
            )
        recordings[(entry.subject, entry.state)] = rec
    cohort = Cohort(recordings=recordings, seed=manifest.seed)
    ids = cohort.channel_ids
    for rec in recordings.values():
        if rec.channel_ids != ids:
            raise ValueError("recordings disagree on channel ids")
    return cohort

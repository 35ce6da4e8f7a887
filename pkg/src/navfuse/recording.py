"""Flight-recording persistence: one merged CSV at IMU row rate with sparse
GPS columns.

Schema (exact header, UTF-8, LF line endings):

    t_ms,ax,ay,az,gx,gy,gz,mx,my,mz,gps_valid,lat,lon,speed_mps,course_deg,alt_m

Floats carry 9 decimal places; sensor values produced by the frame decoder
are exact at that precision, so a write/read round trip reproduces them
bit-for-bit. GPS cells (and mag cells for samples without a magnetometer
reading) are empty strings when absent. Optional ``# key=value`` comment
lines before the header carry run metadata.

Rows are flushed as they are written, so an interrupted recording is still a
valid (shorter) file.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, TextIO

from .attitude import ImuSample
from .errors import RecordingFormatError, TimestampOrderError
from .geo import GeoPoint
from .navigation import GpsFix

HEADER = "t_ms,ax,ay,az,gx,gy,gz,mx,my,mz,gps_valid,lat,lon,speed_mps,course_deg,alt_m"
_NCOLS = len(HEADER.split(","))


class RecordingRow(NamedTuple):
    sample: ImuSample
    fix: GpsFix | None


@dataclass
class FlightRecording:
    rows: list[RecordingRow] = field(default_factory=list)
    metadata: dict[str, str] = field(default_factory=dict)

    def samples(self) -> list[ImuSample]:
        return [r.sample for r in self.rows]

    def fixes(self) -> list[GpsFix]:
        return [r.fix for r in self.rows if r.fix is not None]


def merge_streams(samples: list[ImuSample], fixes: list[GpsFix]) -> list[RecordingRow]:
    """Attach each fix to the first sample row at or after its timestamp."""
    rows = [RecordingRow(s, None) for s in samples]
    j = 0
    for fix in sorted(fixes, key=lambda f: f.t):
        while j < len(rows) and rows[j].sample.t < fix.t:
            j += 1
        if j < len(rows):
            rows[j] = RecordingRow(rows[j].sample, fix)
    return rows


def _fmt(x: float | None) -> str:
    return "" if x is None else "%.9f" % x


def format_row(row: RecordingRow) -> str:
    s, fix = row
    t_ms = round(s.t * 1000.0)
    cells = [str(t_ms)]
    cells += [_fmt(v) for v in s.accel]
    cells += [_fmt(v) for v in s.gyro]
    cells += [_fmt(v) for v in s.mag] if s.mag is not None else ["", "", ""]
    if fix is not None and fix.valid:
        course = math.degrees(fix.course) if fix.course is not None else None
        cells += ["1", _fmt(fix.pos.lat), _fmt(fix.pos.lon), _fmt(fix.speed), _fmt(course), _fmt(fix.alt_m)]
    else:
        cells += ["0", "", "", "", "", ""]
    return ",".join(cells)


class RecordingWriter:
    """Incremental writer flushing each row (interruption-safe)."""

    def __init__(self, dest: TextIO, metadata: dict[str, str] | None = None):
        self._f = dest
        self._last_t_ms: int | None = None
        for key, value in (metadata or {}).items():
            self._f.write(f"# {key}={value}\n")
        self._f.write(HEADER + "\n")
        self._f.flush()
        self.count = 0

    def write_row(self, row: RecordingRow) -> None:
        t_ms = round(row.sample.t * 1000.0)
        if self._last_t_ms is not None and t_ms <= self._last_t_ms:
            raise TimestampOrderError(f"row time {t_ms} ms not after {self._last_t_ms} ms")
        self._f.write(format_row(row) + "\n")
        self._f.flush()
        self._last_t_ms = t_ms
        self.count += 1


def write_recording(rows: Iterable[RecordingRow], dest, metadata: dict[str, str] | None = None) -> int:
    """Write rows to a path or text file; returns the row count."""
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8", newline="") as f:
            return write_recording(rows, f, metadata)
    writer = RecordingWriter(dest, metadata)
    for row in rows:
        writer.write_row(row)
    return writer.count


def _parse_float(cell: str, name: str, line_no: int) -> float:
    try:
        v = float(cell)
    except ValueError:
        raise RecordingFormatError(f"line {line_no}: bad {name} value {cell!r}", line=line_no) from None
    if not math.isfinite(v):
        raise RecordingFormatError(f"line {line_no}: non-finite {name}", line=line_no)
    return v


def read_recording(source) -> FlightRecording:
    """Parse a recording; raises RecordingFormatError with the line number."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as f:
            return read_recording(f)
    rec = FlightRecording()
    line_no = 0
    header_seen = False
    last_t_ms: int | None = None
    for raw in source:
        line_no += 1
        line = raw.rstrip("\r\n")
        if not line:
            continue
        if line.startswith("#"):
            if header_seen:
                raise RecordingFormatError(f"line {line_no}: comment after header", line=line_no)
            body = line.lstrip("#").strip()
            if "=" in body:
                key, _, value = body.partition("=")
                rec.metadata[key.strip()] = value.strip()
            continue
        if not header_seen:
            if line != HEADER:
                raise RecordingFormatError(f"line {line_no}: unexpected header {line!r}", line=line_no)
            header_seen = True
            continue
        cells = line.split(",")
        if len(cells) != _NCOLS:
            raise RecordingFormatError(
                f"line {line_no}: expected {_NCOLS} columns, got {len(cells)}", line=line_no
            )
        try:
            t_ms = int(cells[0])
        except ValueError:
            raise RecordingFormatError(f"line {line_no}: bad t_ms {cells[0]!r}", line=line_no) from None
        if last_t_ms is not None and t_ms <= last_t_ms:
            raise TimestampOrderError(f"line {line_no}: time {t_ms} ms not after {last_t_ms} ms")
        last_t_ms = t_ms
        t = t_ms / 1000.0
        accel = tuple(_parse_float(cells[k], "accel", line_no) for k in (1, 2, 3))
        gyro = tuple(_parse_float(cells[k], "gyro", line_no) for k in (4, 5, 6))
        mag_cells = cells[7:10]
        if all(c == "" for c in mag_cells):
            mag = None
        else:
            mag = tuple(_parse_float(c, "mag", line_no) for c in mag_cells)
        sample = ImuSample(t=t, accel=accel, gyro=gyro, mag=mag)
        fix = None
        if cells[10] not in ("0", "1"):
            raise RecordingFormatError(f"line {line_no}: gps_valid must be 0 or 1", line=line_no)
        if cells[10] == "1":
            course_deg = _parse_float(cells[14], "course_deg", line_no) if cells[14] else None
            alt = _parse_float(cells[15], "alt_m", line_no) if cells[15] else None
            fix = GpsFix(
                t=t,
                pos=GeoPoint(
                    _parse_float(cells[11], "lat", line_no),
                    _parse_float(cells[12], "lon", line_no),
                ),
                speed=_parse_float(cells[13], "speed_mps", line_no),
                course=math.radians(course_deg) if course_deg is not None else None,
                valid=True,
                alt_m=alt,
            )
        rec.rows.append(RecordingRow(sample, fix))
    if not header_seen:
        raise RecordingFormatError("missing header line", line=line_no or 1)
    return rec

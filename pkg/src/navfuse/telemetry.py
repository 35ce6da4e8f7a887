"""Binary telemetry frame codec standing in for the radio payload link.

Frame layout, little-endian throughout:

    magic 0xA5 (1B) | kind (1B) | seq (2B) | t_ms (4B) | payload | crc (2B)

The CRC is CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF, check 0x29B1) over
every byte before it, magic included.

IMU payload (18B): 9 x int16 raw counts at the sensors' full-scale ranges —
accel 2048 LSB/g (+-16 g), gyro 16.4 LSB/(deg/s) (+-2000 deg/s), mag
1090 LSB/gauss. Frame total 28 bytes.

GPS payload (17B): lat, lon int32 x 1e-7 deg; speed uint16 cm/s; course
uint16 x 0.01 deg; altitude int32 x 0.01 m; flags 1B (bit0 = fix valid,
bit1 = altitude valid). Frame total 27 bytes.

Frames carry raw integer counts so encode/decode is an exact bijection; the
count-to-physical conversions round to 9 decimal places, which keeps the
values bit-stable through the flight-recording CSV round trip.
"""

from __future__ import annotations

import enum
import math
import struct
from dataclasses import dataclass

from .attitude import GRAVITY_MPS2, ImuSample
from .errors import CorruptionError, EncodeRangeError, FramingError, TruncationError
from .geo import GeoPoint
from .navigation import GpsFix

MAGIC = 0xA5

ACCEL_LSB_PER_G = 2048.0
GYRO_LSB_PER_DPS = 16.4
MAG_LSB_PER_GAUSS = 1090.0

_HEADER = struct.Struct("<BBHI")
_IMU_PAYLOAD = struct.Struct("<9h")
_GPS_PAYLOAD = struct.Struct("<iiHHiB")
_CRC = struct.Struct("<H")

IMU_FRAME_LEN = _HEADER.size + _IMU_PAYLOAD.size + _CRC.size   # 28
GPS_FRAME_LEN = _HEADER.size + _GPS_PAYLOAD.size + _CRC.size   # 27
MAX_FRAME_LEN = 32


class FrameKind(enum.IntEnum):
    IMU = 0x01
    GPS = 0x02


_FRAME_LEN = {FrameKind.IMU: IMU_FRAME_LEN, FrameKind.GPS: GPS_FRAME_LEN}


def crc16_ccitt_false(data: bytes) -> int:
    crc = 0xFFFF
    for byte in data:
        crc ^= byte << 8
        for _ in range(8):
            crc = ((crc << 1) ^ 0x1021) if crc & 0x8000 else (crc << 1)
            crc &= 0xFFFF
    return crc


@dataclass(frozen=True)
class ImuPayload:
    """Raw signed 16-bit sensor counts."""

    ax: int
    ay: int
    az: int
    gx: int
    gy: int
    gz: int
    mx: int
    my: int
    mz: int


@dataclass(frozen=True)
class GpsPayload:
    """Raw fixed-point GPS fields."""

    lat_e7: int
    lon_e7: int
    speed_cmps: int
    course_cdeg: int
    valid: bool
    alt_cm: int = 0
    alt_valid: bool = False


@dataclass(frozen=True)
class TelemetryFrame:
    kind: FrameKind
    seq: int
    t_ms: int
    payload: ImuPayload | GpsPayload


def _check_range(name: str, value: int, lo: int, hi: int) -> None:
    if not isinstance(value, int) or isinstance(value, bool):
        raise EncodeRangeError(f"{name} must be an integer, got {value!r}")
    if not lo <= value <= hi:
        raise EncodeRangeError(f"{name}={value} outside [{lo}, {hi}]")


def encode_frame(frame: TelemetryFrame) -> bytes:
    _check_range("seq", frame.seq, 0, 0xFFFF)
    _check_range("t_ms", frame.t_ms, 0, 0xFFFFFFFF)
    if frame.kind == FrameKind.IMU:
        p = frame.payload
        for name in ("ax", "ay", "az", "gx", "gy", "gz", "mx", "my", "mz"):
            _check_range(name, getattr(p, name), -32768, 32767)
        body = _HEADER.pack(MAGIC, frame.kind, frame.seq, frame.t_ms) + _IMU_PAYLOAD.pack(
            p.ax, p.ay, p.az, p.gx, p.gy, p.gz, p.mx, p.my, p.mz
        )
    elif frame.kind == FrameKind.GPS:
        p = frame.payload
        _check_range("lat_e7", p.lat_e7, -(2**31), 2**31 - 1)
        _check_range("lon_e7", p.lon_e7, -(2**31), 2**31 - 1)
        _check_range("speed_cmps", p.speed_cmps, 0, 0xFFFF)
        _check_range("course_cdeg", p.course_cdeg, 0, 0xFFFF)
        _check_range("alt_cm", p.alt_cm, -(2**31), 2**31 - 1)
        flags = (0x01 if p.valid else 0x00) | (0x02 if p.alt_valid else 0x00)
        body = _HEADER.pack(MAGIC, frame.kind, frame.seq, frame.t_ms) + _GPS_PAYLOAD.pack(
            p.lat_e7, p.lon_e7, p.speed_cmps, p.course_cdeg, p.alt_cm, flags
        )
    else:
        raise EncodeRangeError(f"unknown frame kind {frame.kind!r}")
    return body + _CRC.pack(crc16_ccitt_false(body))


def decode_frame(data: bytes) -> TelemetryFrame:
    """Inverse of encode_frame; raises a distinct error per failure mode."""
    if len(data) < 2:
        raise TruncationError(f"need at least 2 bytes, got {len(data)}", offset=len(data))
    if data[0] != MAGIC:
        raise FramingError(f"bad magic byte 0x{data[0]:02X}", offset=0)
    try:
        kind = FrameKind(data[1])
    except ValueError:
        raise FramingError(f"unknown frame kind 0x{data[1]:02X}", offset=1) from None
    need = _FRAME_LEN[kind]
    if len(data) < need:
        raise TruncationError(f"{kind.name} frame needs {need} bytes, got {len(data)}", offset=len(data))
    if len(data) != need:
        raise FramingError(f"{kind.name} frame must be exactly {need} bytes, got {len(data)}", offset=need)
    body, crc_bytes = data[: need - 2], data[need - 2 :]
    (crc_rx,) = _CRC.unpack(crc_bytes)
    crc_calc = crc16_ccitt_false(body)
    if crc_rx != crc_calc:
        raise CorruptionError(
            f"CRC mismatch: received 0x{crc_rx:04X}, computed 0x{crc_calc:04X}", offset=need - 2
        )
    _, _, seq, t_ms = _HEADER.unpack_from(body)
    if kind == FrameKind.IMU:
        payload = ImuPayload(*_IMU_PAYLOAD.unpack_from(body, _HEADER.size))
    else:
        lat_e7, lon_e7, speed, course, alt_cm, flags = _GPS_PAYLOAD.unpack_from(body, _HEADER.size)
        payload = GpsPayload(
            lat_e7, lon_e7, speed, course, bool(flags & 0x01), alt_cm, bool(flags & 0x02)
        )
    return TelemetryFrame(kind=kind, seq=seq, t_ms=t_ms, payload=payload)


@dataclass(frozen=True)
class StreamDiagnostic:
    offset: int
    reason: str    # "skip" | "framing" | "truncation" | "corruption"
    detail: str


def scan_stream(data: bytes) -> tuple[list[TelemetryFrame], list[StreamDiagnostic]]:
    """Recover every valid frame from a possibly dirty byte stream.

    Scans for the magic byte, attempts an exact-length decode, and resyncs
    by advancing a single byte on failure, so a valid frame is never lost to
    preceding garbage. All failures become diagnostics.
    """
    frames: list[TelemetryFrame] = []
    diags: list[StreamDiagnostic] = []
    i = 0
    n = len(data)
    while i < n:
        if data[i] != MAGIC:
            j = data.find(MAGIC, i)
            if j < 0:
                j = n
            diags.append(StreamDiagnostic(i, "skip", f"skipped {j - i} non-frame byte(s)"))
            i = j
            continue
        if n - i < 2:
            diags.append(StreamDiagnostic(i, "truncation", "stream ends after magic byte"))
            break
        kind_byte = data[i + 1]
        if kind_byte not in (FrameKind.IMU, FrameKind.GPS):
            diags.append(StreamDiagnostic(i, "framing", f"unknown frame kind 0x{kind_byte:02X}"))
            i += 1
            continue
        need = _FRAME_LEN[FrameKind(kind_byte)]
        if n - i < need:
            # No complete frame fits in the remaining bytes (min frame 27B).
            diags.append(
                StreamDiagnostic(i, "truncation", f"stream ends {need - (n - i)} byte(s) into a frame")
            )
            break
        try:
            frames.append(decode_frame(data[i : i + need]))
            i += need
        except CorruptionError as exc:
            diags.append(StreamDiagnostic(i, "corruption", str(exc)))
            i += 1
    return frames, diags


def _round9(x: float) -> float:
    return round(x, 9)


def imu_counts_to_sample(t_ms: int, p: ImuPayload) -> ImuSample:
    """Physical-unit sample from raw counts (values exact at 9 decimals)."""
    ka = GRAVITY_MPS2 / ACCEL_LSB_PER_G
    kg = (math.pi / 180.0) / GYRO_LSB_PER_DPS
    km = 1.0 / MAG_LSB_PER_GAUSS
    return ImuSample(
        t=t_ms / 1000.0,
        accel=(_round9(p.ax * ka), _round9(p.ay * ka), _round9(p.az * ka)),
        gyro=(_round9(p.gx * kg), _round9(p.gy * kg), _round9(p.gz * kg)),
        mag=(_round9(p.mx * km), _round9(p.my * km), _round9(p.mz * km)),
    )


def sample_to_imu_counts(s: ImuSample) -> ImuPayload:
    ka = ACCEL_LSB_PER_G / GRAVITY_MPS2
    kg = GYRO_LSB_PER_DPS * (180.0 / math.pi)
    if s.mag is None:
        raise EncodeRangeError("IMU frame payload requires a magnetometer reading")
    return ImuPayload(
        ax=round(s.accel[0] * ka), ay=round(s.accel[1] * ka), az=round(s.accel[2] * ka),
        gx=round(s.gyro[0] * kg), gy=round(s.gyro[1] * kg), gz=round(s.gyro[2] * kg),
        mx=round(s.mag[0] * MAG_LSB_PER_GAUSS),
        my=round(s.mag[1] * MAG_LSB_PER_GAUSS),
        mz=round(s.mag[2] * MAG_LSB_PER_GAUSS),
    )


def gps_counts_to_fix(t_ms: int, p: GpsPayload) -> GpsFix:
    return GpsFix(
        t=t_ms / 1000.0,
        pos=GeoPoint(_round9(p.lat_e7 / 1e7), _round9(p.lon_e7 / 1e7)),
        speed=_round9(p.speed_cmps / 100.0),
        course=_round9(math.radians(p.course_cdeg / 100.0)),
        valid=p.valid,
        alt_m=_round9(p.alt_cm / 100.0) if p.alt_valid else None,
    )


def fix_to_gps_counts(f: GpsFix) -> GpsPayload:
    course_deg = math.degrees(f.course) % 360.0 if f.course is not None else 0.0
    return GpsPayload(
        lat_e7=round(f.pos.lat * 1e7),
        lon_e7=round(f.pos.lon * 1e7),
        speed_cmps=round(f.speed * 100.0),
        course_cdeg=round(course_deg * 100.0) % 36000,
        valid=f.valid,
        alt_cm=round(f.alt_m * 100.0) if f.alt_m is not None else 0,
        alt_valid=f.alt_m is not None,
    )

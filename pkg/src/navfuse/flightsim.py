"""Synthetic-flight ground truth, sensor corruption, and error metrics.

A profile is a list of straight/turn/climb segments flown at constant (or
ramped) speed with roll held at zero; truth kinematics are integrated at 10x
the IMU rate and subsampled onto the IMU's integer-millisecond time grid.
The forward sensor model rotates gravity and linear acceleration into the
body frame, adds bias and seeded Gaussian noise, then quantizes every reading
to the wire-format resolution (the same integer counts the telemetry frames
carry), so simulated, encoded, recorded, and replayed streams all see exactly
the same sample values.

Generated GPS fixes land on IMU sample times at the requested rate, with
seeded dropouts (the first and last fix are exempt so the interpolated
reference always covers the flight).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .attitude import GRAVITY_MPS2, AttitudeEstimator, FusionGains, ImuSample
from .geo import EarthModel
from .navigation import BlendWeights, GpsFix, NavEstimator, prepare_gps_reference
from .telemetry import (
    ACCEL_LSB_PER_G,
    GYRO_LSB_PER_DPS,
    MAG_LSB_PER_GAUSS,
    GpsPayload,
    ImuPayload,
    gps_counts_to_fix,
    imu_counts_to_sample,
)

# World magnetic field in gauss, (north, east, up) components.
MAG_FIELD_GAUSS = (0.28, 0.0, -0.12)

PITCH_RAMP_RATE = 0.1      # rad/s
SPEED_RAMP_ACCEL = 1.5     # m/s^2
TRUTH_OVERSAMPLE = 10


@dataclass(frozen=True)
class FlightSegment:
    """One leg of a profile. ``yaw_rate_dps`` applies to turns,
    ``climb_rate_mps`` to climbs; ``speed_mps`` optionally retargets speed."""

    kind: str                       # "straight" | "turn" | "climb"
    duration_s: float
    yaw_rate_dps: float = 0.0
    climb_rate_mps: float = 0.0
    speed_mps: float | None = None

    def __post_init__(self):
        if self.kind not in ("straight", "turn", "climb"):
            raise ValueError(f"unknown segment kind {self.kind!r}")
        if self.duration_s <= 0:
            raise ValueError("segment duration must be positive")


@dataclass(frozen=True)
class FlightProfile:
    segments: tuple[FlightSegment, ...]
    imu_rate_hz: float = 60.0
    gps_rate_hz: float = 1.0
    seed: int = 42
    start_lat: float = -7.765
    start_lon: float = 110.37
    start_alt_m: float = 120.0
    start_heading_deg: float = 0.0
    speed_mps: float = 15.0
    earth: EarthModel = field(default_factory=EarthModel)

    def __post_init__(self):
        if not self.segments:
            raise ValueError("flight profile needs at least one segment")
        if self.imu_rate_hz <= 0 or self.gps_rate_hz <= 0:
            raise ValueError("sample rates must be positive")
        if self.imu_rate_hz < self.gps_rate_hz:
            raise ValueError("IMU rate must be at least the GPS rate")

    @property
    def duration_s(self) -> float:
        return sum(s.duration_s for s in self.segments)


@dataclass(frozen=True)
class SensorNoiseModel:
    accel_noise_sigma: float = 0.05    # m/s^2
    accel_bias: float = 0.0            # m/s^2, all axes
    gyro_noise_sigma: float = 0.005    # rad/s
    gyro_bias: float = 0.01            # rad/s, all axes
    mag_noise_sigma: float = 0.003     # gauss
    gps_pos_sigma_m: float = 2.5
    gps_dropout_prob: float = 0.1

    def __post_init__(self):
        for name in ("accel_noise_sigma", "gyro_noise_sigma", "mag_noise_sigma", "gps_pos_sigma_m"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0.0 <= self.gps_dropout_prob <= 1.0:
            raise ValueError("dropout probability must be in [0, 1]")


ZERO_NOISE = SensorNoiseModel(
    accel_noise_sigma=0.0, accel_bias=0.0, gyro_noise_sigma=0.0, gyro_bias=0.0,
    mag_noise_sigma=0.0, gps_pos_sigma_m=0.0, gps_dropout_prob=0.0,
)


def standard_profile(seed: int = 42) -> FlightProfile:
    """218 s racetrack circuit: two 180-degree turns across all bearing quadrants."""
    return FlightProfile(
        segments=(
            FlightSegment("straight", 60.0),
            FlightSegment("turn", 45.0, yaw_rate_dps=4.0),
            FlightSegment("straight", 60.0),
            FlightSegment("turn", 45.0, yaw_rate_dps=4.0),
            FlightSegment("straight", 8.0),
        ),
        seed=seed,
    )


@dataclass(frozen=True)
class TruthSeries:
    """Reference trajectory sampled on the IMU time grid."""

    t: np.ndarray          # (n,) seconds
    lat: np.ndarray
    lon: np.ndarray
    alt_m: np.ndarray
    vn: np.ndarray         # m/s north
    ve: np.ndarray         # m/s east
    euler: np.ndarray      # (n, 3) roll, pitch, yaw
    q: np.ndarray          # (n, 4)


def _segment_schedule(profile: FlightProfile):
    out = []
    t0 = 0.0
    speed = profile.speed_mps
    for seg in profile.segments:
        if seg.speed_mps is not None:
            speed = seg.speed_mps
        pitch_target = 0.0
        if seg.kind == "climb":
            s = max(speed, 1e-6)
            pitch_target = -math.asin(max(-1.0, min(1.0, seg.climb_rate_mps / s)))
        out.append(
            (t0, t0 + seg.duration_s, math.radians(seg.yaw_rate_dps) if seg.kind == "turn" else 0.0,
             pitch_target, speed)
        )
        t0 += seg.duration_s
    return out


def _generate_truth(profile: FlightProfile):
    """Integrate the profile kinematics; returns truth plus the analytic
    world acceleration and body rates at every IMU sample instant."""
    rate = profile.imu_rate_hz
    n = int(round(profile.duration_s * rate)) + 1
    t_ms = np.array([round(i * 1000.0 / rate) for i in range(n)], dtype=np.int64)
    t = t_ms / 1000.0

    schedule = _segment_schedule(profile)
    deg_per_m = 180.0 / (math.pi * profile.earth.radius_m)

    def segment_at(time_s):
        for t0, t1, yaw_rate, pitch_target, speed in schedule:
            if time_s < t1:
                return yaw_rate, pitch_target, speed
        return schedule[-1][2], schedule[-1][3], schedule[-1][4]

    psi = math.radians(profile.start_heading_deg)
    theta = 0.0
    speed = profile.speed_mps
    lat = profile.start_lat
    lon = profile.start_lon
    alt = profile.start_alt_m

    lat_s = np.empty(n)
    lon_s = np.empty(n)
    alt_s = np.empty(n)
    vn_s = np.empty(n)
    ve_s = np.empty(n)
    euler = np.zeros((n, 3))
    a_world = np.empty((n, 3))
    rates = np.empty((n, 2))   # dpsi, dtheta at the sample instant

    def derivatives(time_s, psi_, theta_, speed_):
        dpsi, pitch_target, speed_target = segment_at(time_s)
        dtheta = max(-PITCH_RAMP_RATE, min(PITCH_RAMP_RATE, pitch_target - theta_))
        dspeed = max(-SPEED_RAMP_ACCEL, min(SPEED_RAMP_ACCEL, speed_target - speed_))
        ct, st = math.cos(theta_), math.sin(theta_)
        cp, sp = math.cos(psi_), math.sin(psi_)
        dir_ = (ct * cp, ct * sp, -st)
        ddir = (
            -st * dtheta * cp - ct * sp * dpsi,
            -st * dtheta * sp + ct * cp * dpsi,
            -ct * dtheta,
        )
        vel = (speed_ * dir_[0], speed_ * dir_[1], speed_ * dir_[2])
        acc = tuple(dspeed * dir_[k] + speed_ * ddir[k] for k in range(3))
        return dpsi, dtheta, dspeed, vel, acc

    for i in range(n):
        time_s = float(t[i])
        dpsi, dtheta, dspeed, vel, acc = derivatives(time_s, psi, theta, speed)
        lat_s[i] = lat
        lon_s[i] = lon
        alt_s[i] = alt
        vn_s[i] = vel[0]
        ve_s[i] = vel[1]
        euler[i, 1] = theta
        euler[i, 2] = psi
        a_world[i] = acc
        rates[i] = (dpsi, dtheta)
        if i == n - 1:
            break
        # advance to the next sample in TRUTH_OVERSAMPLE micro steps
        dt_micro = float(t[i + 1] - t[i]) / TRUTH_OVERSAMPLE
        for _ in range(TRUTH_OVERSAMPLE):
            dpsi_m, dtheta_m, dspeed_m, vel0, _ = derivatives(time_s, psi, theta, speed)
            psi += dpsi_m * dt_micro
            theta += dtheta_m * dt_micro
            speed += dspeed_m * dt_micro
            time_s += dt_micro
            _, _, _, vel1, _ = derivatives(time_s, psi, theta, speed)
            lat += 0.5 * (vel0[0] + vel1[0]) * dt_micro * deg_per_m
            lon += 0.5 * (vel0[1] + vel1[1]) * dt_micro * deg_per_m
            alt += 0.5 * (vel0[2] + vel1[2]) * dt_micro

    # quaternions from (0, theta, psi), vectorized ZYX composition
    half_psi = 0.5 * euler[:, 2]
    half_th = 0.5 * euler[:, 1]
    cz, sz = np.cos(half_psi), np.sin(half_psi)
    cy, sy = np.cos(half_th), np.sin(half_th)
    q = np.column_stack([cz * cy, -sz * sy, cz * sy, sz * cy])
    flip = q[:, 0] < 0.0
    q[flip] *= -1.0

    truth = TruthSeries(t=t, lat=lat_s, lon=lon_s, alt_m=alt_s, vn=vn_s, ve=ve_s, euler=euler, q=q)
    return truth, t_ms, a_world, rates


def _rotate_world_to_body(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Apply R(q)^T row-wise: world vectors expressed in the body frame."""
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    vx, vy, vz = v[:, 0], v[:, 1], v[:, 2]
    bx = (1 - 2 * (y * y + z * z)) * vx + 2 * (x * y + w * z) * vy + 2 * (x * z - w * y) * vz
    by = 2 * (x * y - w * z) * vx + (1 - 2 * (x * x + z * z)) * vy + 2 * (y * z + w * x) * vz
    bz = 2 * (x * z + w * y) * vx + 2 * (y * z - w * x) * vy + (1 - 2 * (x * x + y * y)) * vz
    return np.column_stack([bx, by, bz])


def generate_flight(
    profile: FlightProfile,
    noise: SensorNoiseModel = SensorNoiseModel(),
    quantize: bool = True,
) -> tuple[TruthSeries, list[ImuSample], list[GpsFix]]:
    """Synthesize (truth, IMU stream, GPS stream); deterministic per seed.

    ``quantize=False`` skips the wire-resolution rounding and yields
    oracle-grade continuous readings (analysis only; the CLI paths always
    quantize so encoded, recorded, and replayed streams stay bit-identical).
    """
    truth, t_ms, a_world, rates = _generate_truth(profile)
    n = len(truth.t)
    rng = np.random.default_rng(profile.seed)

    g_world = np.zeros((n, 3))
    g_world[:, 2] = GRAVITY_MPS2
    f_body = _rotate_world_to_body(truth.q, a_world + g_world)

    dpsi, dtheta = rates[:, 0], rates[:, 1]
    theta = truth.euler[:, 1]
    omega_body = np.column_stack([-dpsi * np.sin(theta), dtheta, dpsi * np.cos(theta)])

    mag_world = np.tile(np.array(MAG_FIELD_GAUSS), (n, 1))
    mag_body = _rotate_world_to_body(truth.q, mag_world)

    acc_meas = f_body + noise.accel_bias + noise.accel_noise_sigma * rng.standard_normal((n, 3))
    gyr_meas = omega_body + noise.gyro_bias + noise.gyro_noise_sigma * rng.standard_normal((n, 3))
    mag_meas = mag_body + noise.mag_noise_sigma * rng.standard_normal((n, 3))

    if quantize:
        acc_counts = np.round(acc_meas * (ACCEL_LSB_PER_G / GRAVITY_MPS2)).astype(np.int64)
        gyr_counts = np.round(gyr_meas * (GYRO_LSB_PER_DPS * (180.0 / math.pi))).astype(np.int64)
        mag_counts = np.round(mag_meas * MAG_LSB_PER_GAUSS).astype(np.int64)
        for counts, what in ((acc_counts, "accel"), (gyr_counts, "gyro"), (mag_counts, "mag")):
            if counts.max() > 32767 or counts.min() < -32768:
                raise ValueError(f"{what} exceeds the sensor full-scale range")
        samples = [
            imu_counts_to_sample(
                int(t_ms[i]),
                ImuPayload(*(int(v) for v in acc_counts[i]), *(int(v) for v in gyr_counts[i]),
                           *(int(v) for v in mag_counts[i])),
            )
            for i in range(n)
        ]
    else:
        samples = [
            ImuSample(
                t=float(t_ms[i]) / 1000.0,
                accel=tuple(acc_meas[i]),
                gyro=tuple(gyr_meas[i]),
                mag=tuple(mag_meas[i]),
            )
            for i in range(n)
        ]

    stride = int(round(profile.imu_rate_hz / profile.gps_rate_hz))
    candidates = list(range(0, n, stride))
    deg_per_m = 180.0 / (math.pi * profile.earth.radius_m)
    m = len(candidates)
    lat_noise = rng.standard_normal(m) * noise.gps_pos_sigma_m * deg_per_m
    lon_noise = rng.standard_normal(m) * noise.gps_pos_sigma_m * deg_per_m
    alt_noise = rng.standard_normal(m) * noise.gps_pos_sigma_m
    dropout = rng.random(m) < noise.gps_dropout_prob

    fixes: list[GpsFix] = []
    for j, i in enumerate(candidates):
        if dropout[j] and 0 < j < m - 1:
            continue
        ground_speed = math.hypot(truth.vn[i], truth.ve[i])
        course_deg = math.degrees(math.atan2(truth.ve[i], truth.vn[i])) % 360.0
        payload = GpsPayload(
            lat_e7=round((truth.lat[i] + lat_noise[j]) * 1e7),
            lon_e7=round((truth.lon[i] + lon_noise[j]) * 1e7),
            speed_cmps=max(0, round(ground_speed * 100.0)),
            course_cdeg=round(course_deg * 100.0) % 36000,
            valid=True,
            alt_cm=round((truth.alt_m[i] + alt_noise[j]) * 100.0),
            alt_valid=True,
        )
        fixes.append(gps_counts_to_fix(int(t_ms[i]), payload))
    return truth, samples, fixes


@dataclass(frozen=True)
class RmsError:
    lat_m: float
    lon_m: float
    total_m: float


def rms_error(
    est_t: np.ndarray,
    est_lat: np.ndarray,
    est_lon: np.ndarray,
    truth: TruthSeries,
    earth: EarthModel = EarthModel(),
    max_align_dt: float | None = None,
) -> RmsError:
    """RMS deviation in meters, estimate matched to truth timestamps by
    nearest neighbor within one IMU period."""
    est_t = np.asarray(est_t, dtype=np.float64)
    if len(est_t) == 0:
        raise ValueError("empty estimate track")
    if max_align_dt is None:
        dts = np.diff(truth.t)
        max_align_dt = float(np.median(dts)) if len(dts) else math.inf
    idx = np.clip(np.searchsorted(est_t, truth.t), 0, len(est_t) - 1)
    left = np.clip(idx - 1, 0, len(est_t) - 1)
    use_left = np.abs(est_t[left] - truth.t) <= np.abs(est_t[idx] - truth.t)
    nearest = np.where(use_left, left, idx)
    aligned = np.abs(est_t[nearest] - truth.t) <= max_align_dt + 1e-12
    if not aligned.any():
        raise ValueError("estimate and truth tracks do not overlap in time")
    m_per_deg = math.pi * earth.radius_m / 180.0
    dlat = (np.asarray(est_lat)[nearest] - truth.lat)[aligned] * m_per_deg
    dlon = (np.asarray(est_lon)[nearest] - truth.lon)[aligned] * m_per_deg
    lat_m = float(np.sqrt(np.mean(dlat**2)))
    lon_m = float(np.sqrt(np.mean(dlon**2)))
    return RmsError(lat_m, lon_m, float(math.hypot(lat_m, lon_m)))


def streams_to_arrays(samples: list[ImuSample]):
    """Column arrays (t, accel, gyro, mag, has_mag) from a sample list."""
    t = np.array([s.t for s in samples])
    acc = np.array([s.accel for s in samples])
    gyr = np.array([s.gyro for s in samples])
    mag = np.array([s.mag if s.mag is not None else (0.0, 0.0, 0.0) for s in samples])
    has_mag = np.array([s.mag is not None for s in samples], dtype=np.uint8)
    return t, acc, gyr, mag, has_mag


@dataclass(frozen=True)
class SweepCell:
    alpha: float
    beta: float
    lat_err_m: float
    lon_err_m: float


def sweep_weights(
    profile: FlightProfile,
    noise: SensorNoiseModel,
    grid: list[tuple[float, float]],
    gains: FusionGains = FusionGains(),
    backend: str = "auto",
) -> list[SweepCell]:
    """Run the full pipeline once per (alpha, beta) cell on identical streams.

    Position references use the interpolated fix track (replay mode), and
    errors are RMS against truth, so the table mirrors the alpha/beta impact
    study's shape.
    """
    if not grid:
        raise ValueError("sweep grid must not be empty")
    for a, b in grid:
        if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
            raise ValueError(f"grid cell ({a}, {b}) outside [0, 1]^2")
    truth, samples, fixes = generate_flight(profile, noise)
    t, acc, gyr, mag, has_mag = streams_to_arrays(samples)
    att = AttitudeEstimator(
        gains=gains, sample_rate_hz=profile.imu_rate_hz, backend=backend
    ).run(t, acc, gyr, mag, has_mag)

    cells = []
    for a, b in grid:
        nav = NavEstimator(
            weights=BlendWeights(a, b),
            sample_rate_hz=profile.imu_rate_hz,
            earth=profile.earth,
            mode="replay",
            backend=backend,
        ).run(t, acc, att.q, fixes)
        err = rms_error(t, nav.lat, nav.lon, truth, profile.earth)
        cells.append(SweepCell(a, b, err.lat_m, err.lon_m))
    return cells


def square_grid(values: list[float]) -> list[tuple[float, float]]:
    return [(a, b) for a in values for b in values]


def sample_and_hold_track(t: np.ndarray, fixes: list[GpsFix]):
    """Latest-fix position per sample (the non-interpolated GPS baseline).

    Returns (lat, lon, mask); mask marks samples with a fix available.
    """
    ref = prepare_gps_reference(t, fixes, mode="live", stale_after_s=math.inf)
    mask = ref.has_pos.astype(bool)
    return ref.ref_lat, ref.ref_lon, mask


def profile_from_dict(d: dict) -> FlightProfile:
    """Build a profile from the config-file schema (see README)."""
    segments = tuple(
        FlightSegment(
            kind=s["kind"],
            duration_s=float(s["duration_s"]),
            yaw_rate_dps=float(s.get("yaw_rate_dps", 0.0)),
            climb_rate_mps=float(s.get("climb_rate_mps", 0.0)),
            speed_mps=float(s["speed_mps"]) if "speed_mps" in s else None,
        )
        for s in d.get("segments", [])
    )
    base = standard_profile()
    return FlightProfile(
        segments=segments or base.segments,
        imu_rate_hz=float(d.get("imu_rate_hz", base.imu_rate_hz)),
        gps_rate_hz=float(d.get("gps_rate_hz", base.gps_rate_hz)),
        seed=int(d.get("seed", base.seed)),
        start_lat=float(d.get("start_lat", base.start_lat)),
        start_lon=float(d.get("start_lon", base.start_lon)),
        start_alt_m=float(d.get("start_alt_m", base.start_alt_m)),
        start_heading_deg=float(d.get("start_heading_deg", base.start_heading_deg)),
        speed_mps=float(d.get("speed_mps", base.speed_mps)),
        earth=EarthModel(float(d["earth_radius_m"])) if "earth_radius_m" in d else EarthModel(),
    )


def noise_from_dict(d: dict) -> SensorNoiseModel:
    base = SensorNoiseModel()
    return SensorNoiseModel(
        **{
            name: float(d.get(name, getattr(base, name)))
            for name in (
                "accel_noise_sigma", "accel_bias", "gyro_noise_sigma", "gyro_bias",
                "mag_noise_sigma", "gps_pos_sigma_m", "gps_dropout_prob",
            )
        }
    )

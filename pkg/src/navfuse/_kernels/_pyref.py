"""Pure-Python fusion kernels.

Fallback used when the compiled extension is unavailable (or forced via
NAVFUSE_PURE_PYTHON=1). ``_core.pyx`` mirrors these loops operation for
operation so both backends produce bit-identical trajectories; any change
here must be replicated there.
"""

from __future__ import annotations

import math

import numpy as np

NAME = "python"


def biquad_run(b0, b1, b2, a1, a2, s1, s2, x):
    """Run a direct-form-II-transposed biquad over an array."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.empty_like(x)
    xs = x.tolist()
    out = y
    for i, xi in enumerate(xs):
        yi = b0 * xi + s1
        s1 = b1 * xi - a1 * yi + s2
        s2 = b2 * xi - a2 * yi
        out[i] = yi
    return y, s1, s2


def _prime(b0, b1, b2, a1, a2, x0):
    h = (b0 + b1 + b2) / (1.0 + a1 + a2)
    return h * x0 - b0 * x0, b2 * x0 - a2 * h * x0


def attitude_run(t, acc, gyr, mag, has_mag, lp, hp, gamma_rp, gamma_yaw, declination, state):
    from ..attitude import (
        FLAG_GAP,
        FLAG_NO_HEADING_REF,
        FLAG_NO_TILT_REF,
        MAX_GYRO_GAP_S,
        _heading_from_mag,
        _tilt_from_accel,
        complementary_angle,
    )
    from ..quat import wrap_pi

    n = len(t)
    euler = np.empty((n, 3), dtype=np.float64)
    q = np.empty((n, 4), dtype=np.float64)
    flags = np.zeros(n, dtype=np.uint8)

    lb0, lb1, lb2, la1, la2 = lp
    hb0, hb1, hb2, ha1, ha2 = hp

    ts = t.tolist()
    axs, ays, azs = acc[:, 0].tolist(), acc[:, 1].tolist(), acc[:, 2].tolist()
    gxs, gys, gzs = gyr[:, 0].tolist(), gyr[:, 1].tolist(), gyr[:, 2].tolist()
    mxs, mys, mzs = mag[:, 0].tolist(), mag[:, 1].tolist(), mag[:, 2].tolist()
    hms = has_mag.tolist()

    init = state[0] != 0.0
    t_last = state[1]
    roll, pitch, yaw = state[2], state[3], state[4]
    lx1, lx2, ly1, ly2, lz1, lz2 = state[5], state[6], state[7], state[8], state[9], state[10]
    hx1, hx2, hy1, hy2 = state[11], state[12], state[13], state[14]

    for i in range(n):
        ti = ts[i]
        ax, ay, az = axs[i], ays[i], azs[i]
        gx, gy, gz = gxs[i], gys[i], gzs[i]
        fl = 0

        if not init:
            lx1, lx2 = _prime(lb0, lb1, lb2, la1, la2, ax)
            ly1, ly2 = _prime(lb0, lb1, lb2, la1, la2, ay)
            lz1, lz2 = _prime(lb0, lb1, lb2, la1, la2, az)
            hx1, hx2 = _prime(hb0, hb1, hb2, ha1, ha2, gx)
            hy1, hy2 = _prime(hb0, hb1, hb2, ha1, ha2, gy)

        fax = lb0 * ax + lx1
        lx1 = lb1 * ax - la1 * fax + lx2
        lx2 = lb2 * ax - la2 * fax
        fay = lb0 * ay + ly1
        ly1 = lb1 * ay - la1 * fay + ly2
        ly2 = lb2 * ay - la2 * fay
        faz = lb0 * az + lz1
        lz1 = lb1 * az - la1 * faz + lz2
        lz2 = lb2 * az - la2 * faz
        fgx = hb0 * gx + hx1
        hx1 = hb1 * gx - ha1 * fgx + hx2
        hx2 = hb2 * gx - ha2 * fgx
        fgy = hb0 * gy + hy1
        hy1 = hb1 * gy - ha1 * fgy + hy2
        hy2 = hb2 * gy - ha2 * fgy

        rref, pref = _tilt_from_accel(fax, fay, faz)
        tilt_ok = not math.isnan(rref)

        if not init:
            roll = rref if tilt_ok else 0.0
            pitch = pref if tilt_ok else 0.0
            if not tilt_ok:
                fl |= FLAG_NO_TILT_REF
            yaw = 0.0
            if hms[i]:
                h = _heading_from_mag(mxs[i], mys[i], mzs[i], roll, pitch)
                if math.isnan(h):
                    fl |= FLAG_NO_HEADING_REF
                else:
                    yaw = wrap_pi(h + declination)
            init = True
        else:
            dt = ti - t_last
            gap = dt > MAX_GYRO_GAP_S
            if gap:
                fl |= FLAG_GAP
            if not tilt_ok:
                fl |= FLAG_NO_TILT_REF
            if gap:
                if tilt_ok:
                    roll = rref
                    pitch = pref
            elif tilt_ok:
                roll = complementary_angle(roll, fgx, dt, rref, gamma_rp)
                pitch = complementary_angle(pitch, fgy, dt, pref, gamma_rp)
            else:
                roll = wrap_pi(roll + fgx * dt)
                pitch = wrap_pi(pitch + fgy * dt)
            heading_ok = False
            h = 0.0
            if hms[i]:
                h = _heading_from_mag(mxs[i], mys[i], mzs[i], roll, pitch)
                heading_ok = not math.isnan(h)
                if not heading_ok:
                    fl |= FLAG_NO_HEADING_REF
            if heading_ok:
                href = wrap_pi(h + declination)
                yaw = href if gap else complementary_angle(yaw, gz, dt, href, gamma_yaw)
            elif not gap:
                yaw = wrap_pi(yaw + gz * dt)

        t_last = ti

        # from_euler (two Hamilton products) then normalize with w >= 0.
        czw = math.cos(0.5 * yaw)
        szw = math.sin(0.5 * yaw)
        cpw = math.cos(0.5 * pitch)
        spw = math.sin(0.5 * pitch)
        crw = math.cos(0.5 * roll)
        srw = math.sin(0.5 * roll)
        # h1 = qz * qy with qz = (czw, 0, 0, szw), qy = (cpw, 0, spw, 0)
        h1w = czw * cpw - 0.0 * 0.0 - 0.0 * spw - szw * 0.0
        h1x = czw * 0.0 + 0.0 * cpw + 0.0 * 0.0 - szw * spw
        h1y = czw * spw - 0.0 * 0.0 + 0.0 * cpw + szw * 0.0
        h1z = czw * 0.0 + 0.0 * spw - 0.0 * 0.0 + szw * cpw
        # q = h1 * qx with qx = (crw, srw, 0, 0)
        qw = h1w * crw - h1x * srw - h1y * 0.0 - h1z * 0.0
        qx = h1w * srw + h1x * crw + h1y * 0.0 - h1z * 0.0
        qy = h1w * 0.0 - h1x * 0.0 + h1y * crw + h1z * srw
        qz = h1w * 0.0 + h1x * 0.0 - h1y * srw + h1z * crw
        norm = math.sqrt(qw * qw + qx * qx + qy * qy + qz * qz)
        qw, qx, qy, qz = qw / norm, qx / norm, qy / norm, qz / norm
        if qw < 0.0:
            qw, qx, qy, qz = -qw, -qx, -qy, -qz

        euler[i, 0] = roll
        euler[i, 1] = pitch
        euler[i, 2] = yaw
        q[i, 0] = qw
        q[i, 1] = qx
        q[i, 2] = qy
        q[i, 3] = qz
        flags[i] = fl

    state[0] = 1.0 if init else 0.0
    state[1] = t_last
    state[2], state[3], state[4] = roll, pitch, yaw
    state[5], state[6], state[7], state[8] = lx1, lx2, ly1, ly2
    state[9], state[10], state[11], state[12] = lz1, lz2, hx1, hx2
    state[13], state[14] = hy1, hy2
    return euler, q, flags


def nav_run(
    t, acc, quat,
    ref_lat, ref_lon, has_pos,
    ref_speed, ref_theta, has_vel,
    bw, alpha, beta, g, deg_per_m, lon_scale_correction, state,
):
    n = len(t)
    vel = np.empty((n, 2), dtype=np.float64)
    lat_out = np.empty(n, dtype=np.float64)
    lon_out = np.empty(n, dtype=np.float64)

    b0, b1, b2, a1, a2 = bw
    ts = t.tolist()
    axs, ays, azs = acc[:, 0].tolist(), acc[:, 1].tolist(), acc[:, 2].tolist()
    qws, qxs, qys, qzs = (quat[:, j].tolist() for j in range(4))
    rlats, rlons, hps = ref_lat.tolist(), ref_lon.tolist(), has_pos.tolist()
    rspd, rth, hvs = ref_speed.tolist(), ref_theta.tolist(), has_vel.tolist()

    init = state[0] != 0.0
    t_last = state[1]
    vn, ve = state[2], state[3]
    lat, lon = state[4], state[5]
    fx1, fx2, fy1, fy2, fz1, fz2 = state[6], state[7], state[8], state[9], state[10], state[11]

    for i in range(n):
        ti = ts[i]
        ax, ay, az = axs[i], ays[i], azs[i]

        if not init:
            fx1, fx2 = _prime(b0, b1, b2, a1, a2, ax)
            fy1, fy2 = _prime(b0, b1, b2, a1, a2, ay)
            fz1, fz2 = _prime(b0, b1, b2, a1, a2, az)

        fax = b0 * ax + fx1
        fx1 = b1 * ax - a1 * fax + fx2
        fx2 = b2 * ax - a2 * fax
        fay = b0 * ay + fy1
        fy1 = b1 * ay - a1 * fay + fy2
        fy2 = b2 * ay - a2 * fay
        faz = b0 * az + fz1
        fz1 = b1 * az - a1 * faz + fz2
        fz2 = b2 * az - a2 * faz

        if not init:
            if hps[i]:
                lat = rlats[i]
                lon = rlons[i]
            init = True
        else:
            dt = ti - t_last
            qw, qx, qy, qz = qws[i], qxs[i], qys[i], qzs[i]
            xx = qx * qx
            yy = qy * qy
            zz = qz * qz
            wx = qw * qx
            wy = qw * qy
            wz = qw * qz
            xy = qx * qy
            xz = qx * qz
            yz = qy * qz
            a_n = (1.0 - 2.0 * (yy + zz)) * fax + 2.0 * (xy - wz) * fay + 2.0 * (xz + wy) * faz
            a_e = 2.0 * (xy + wz) * fax + (1.0 - 2.0 * (xx + zz)) * fay + 2.0 * (yz - wx) * faz

            vn_i = vn + a_n * dt
            ve_i = ve + a_e * dt
            if hvs[i]:
                vn = alpha * vn_i + (1.0 - alpha) * rspd[i] * math.cos(rth[i])
                ve = alpha * ve_i + (1.0 - alpha) * rspd[i] * math.sin(rth[i])
            else:
                vn = vn_i
                ve = ve_i

            lat_dr = lat + vn * dt * deg_per_m
            if lon_scale_correction:
                lon_dr = lon + ve * dt * (deg_per_m / math.cos(lat * math.pi / 180.0))
            else:
                lon_dr = lon + ve * dt * deg_per_m
            if hps[i]:
                lat = beta * lat_dr + (1.0 - beta) * rlats[i]
                lon = beta * lon_dr + (1.0 - beta) * rlons[i]
            else:
                lat = lat_dr
                lon = lon_dr

        t_last = ti
        vel[i, 0] = vn
        vel[i, 1] = ve
        lat_out[i] = lat
        lon_out[i] = lon

    state[0] = 1.0 if init else 0.0
    state[1] = t_last
    state[2], state[3] = vn, ve
    state[4], state[5] = lat, lon
    state[6], state[7], state[8] = fx1, fx2, fy1
    state[9], state[10], state[11] = fy2, fz1, fz2
    return vel, lat_out, lon_out

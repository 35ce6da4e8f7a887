# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled fusion kernels.

Operation-for-operation mirror of ``_pyref.py`` (and of the scalar helpers in
``attitude.py``): keep the arithmetic order in the two files identical so the
backends stay bit-compatible.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport atan2, cos, fmod, isnan, sin, sqrt, NAN

cnp.import_array()

cdef double PI = 3.141592653589793
cdef double TWO_PI = 6.283185307179586

cdef double MIN_TILT_ACCEL = 0.1 * 9.80665     # matches attitude.MIN_TILT_ACCEL_MPS2
cdef double MIN_HORIZONTAL_FIELD = 1e-9
cdef double MAX_GYRO_GAP_S = 1.0

cdef int FLAG_GAP = 0x01
cdef int FLAG_NO_TILT_REF = 0x02
cdef int FLAG_NO_HEADING_REF = 0x04


cdef inline double wrap_pi(double angle) nogil:
    cdef double r = fmod(angle + PI, TWO_PI)
    if r <= 0.0:
        r += TWO_PI
    return r - PI


cdef inline double comp_angle(double prev, double rate, double dt, double reference, double gain) nogil:
    cdef double prop, delta
    if gain == 1.0:
        return wrap_pi(prev + rate * dt)
    if gain == 0.0:
        return wrap_pi(reference)
    prop = prev + rate * dt
    delta = wrap_pi(reference - prop)
    return wrap_pi(prop + (1.0 - gain) * delta)


cdef inline void prime(double b0, double b1, double b2, double a1, double a2,
                       double x0, double* s1, double* s2) nogil:
    cdef double h = (b0 + b1 + b2) / (1.0 + a1 + a2)
    s1[0] = h * x0 - b0 * x0
    s2[0] = b2 * x0 - a2 * h * x0


def biquad_run(double b0, double b1, double b2, double a1, double a2,
               double s1, double s2, x):
    """Run a direct-form-II-transposed biquad over an array."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.empty_like(xv)
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef double xi, yi
    for i in range(n):
        xi = xv[i]
        yi = b0 * xi + s1
        s1 = b1 * xi - a1 * yi + s2
        s2 = b2 * xi - a2 * yi
        y[i] = yi
    return y, s1, s2


def attitude_run(cnp.ndarray[cnp.float64_t, ndim=1] t,
                 cnp.ndarray[cnp.float64_t, ndim=2] acc,
                 cnp.ndarray[cnp.float64_t, ndim=2] gyr,
                 cnp.ndarray[cnp.float64_t, ndim=2] mag,
                 cnp.ndarray[cnp.uint8_t, ndim=1] has_mag,
                 lp, hp,
                 double gamma_rp, double gamma_yaw, double declination,
                 cnp.ndarray[cnp.float64_t, ndim=1] state):
    cdef Py_ssize_t i, n = t.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] euler = np.empty((n, 3), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] q = np.empty((n, 4), dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] flags = np.zeros(n, dtype=np.uint8)

    cdef double lb0 = lp[0], lb1 = lp[1], lb2 = lp[2], la1 = lp[3], la2 = lp[4]
    cdef double hb0 = hp[0], hb1 = hp[1], hb2 = hp[2], ha1 = hp[3], ha2 = hp[4]

    cdef bint init = state[0] != 0.0
    cdef double t_last = state[1]
    cdef double roll = state[2], pitch = state[3], yaw = state[4]
    cdef double lx1 = state[5], lx2 = state[6], ly1 = state[7], ly2 = state[8]
    cdef double lz1 = state[9], lz2 = state[10]
    cdef double hx1 = state[11], hx2 = state[12], hy1 = state[13], hy2 = state[14]

    cdef double ti, ax, ay, az, gx, gy, gz, mx, my, mz
    cdef double fax, fay, faz, fgx, fgy
    cdef double rref, pref, h, href, dt
    cdef double cr, sr, cp, sp, ty, tz, mxp, myp
    cdef double czw, szw, cpw, spw, crw, srw
    cdef double h1w, h1x, h1y, h1z, qw, qx, qy, qz, norm
    cdef bint tilt_ok, gap, heading_ok
    cdef int fl

    for i in range(n):
        ti = t[i]
        ax = acc[i, 0]; ay = acc[i, 1]; az = acc[i, 2]
        gx = gyr[i, 0]; gy = gyr[i, 1]; gz = gyr[i, 2]
        fl = 0

        if not init:
            prime(lb0, lb1, lb2, la1, la2, ax, &lx1, &lx2)
            prime(lb0, lb1, lb2, la1, la2, ay, &ly1, &ly2)
            prime(lb0, lb1, lb2, la1, la2, az, &lz1, &lz2)
            prime(hb0, hb1, hb2, ha1, ha2, gx, &hx1, &hx2)
            prime(hb0, hb1, hb2, ha1, ha2, gy, &hy1, &hy2)

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

        # mirror of attitude._tilt_from_accel
        if fax * fax + fay * fay + faz * faz <= MIN_TILT_ACCEL * MIN_TILT_ACCEL:
            rref = NAN
            pref = NAN
            tilt_ok = False
        else:
            rref = atan2(fay, faz)
            pref = atan2(-fax, sqrt(fay * fay + faz * faz))
            tilt_ok = True

        if not init:
            roll = rref if tilt_ok else 0.0
            pitch = pref if tilt_ok else 0.0
            if not tilt_ok:
                fl |= FLAG_NO_TILT_REF
            yaw = 0.0
            if has_mag[i]:
                mx = mag[i, 0]; my = mag[i, 1]; mz = mag[i, 2]
                h = _heading(mx, my, mz, roll, pitch)
                if isnan(h):
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
                roll = comp_angle(roll, fgx, dt, rref, gamma_rp)
                pitch = comp_angle(pitch, fgy, dt, pref, gamma_rp)
            else:
                roll = wrap_pi(roll + fgx * dt)
                pitch = wrap_pi(pitch + fgy * dt)
            heading_ok = False
            h = 0.0
            if has_mag[i]:
                mx = mag[i, 0]; my = mag[i, 1]; mz = mag[i, 2]
                h = _heading(mx, my, mz, roll, pitch)
                heading_ok = not isnan(h)
                if not heading_ok:
                    fl |= FLAG_NO_HEADING_REF
            if heading_ok:
                href = wrap_pi(h + declination)
                yaw = href if gap else comp_angle(yaw, gz, dt, href, gamma_yaw)
            elif not gap:
                yaw = wrap_pi(yaw + gz * dt)

        t_last = ti

        # from_euler (two Hamilton products) then normalize with w >= 0.
        czw = cos(0.5 * yaw)
        szw = sin(0.5 * yaw)
        cpw = cos(0.5 * pitch)
        spw = sin(0.5 * pitch)
        crw = cos(0.5 * roll)
        srw = sin(0.5 * roll)
        h1w = czw * cpw - 0.0 * 0.0 - 0.0 * spw - szw * 0.0
        h1x = czw * 0.0 + 0.0 * cpw + 0.0 * 0.0 - szw * spw
        h1y = czw * spw - 0.0 * 0.0 + 0.0 * cpw + szw * 0.0
        h1z = czw * 0.0 + 0.0 * spw - 0.0 * 0.0 + szw * cpw
        qw = h1w * crw - h1x * srw - h1y * 0.0 - h1z * 0.0
        qx = h1w * srw + h1x * crw + h1y * 0.0 - h1z * 0.0
        qy = h1w * 0.0 - h1x * 0.0 + h1y * crw + h1z * srw
        qz = h1w * 0.0 + h1x * 0.0 - h1y * srw + h1z * crw
        norm = sqrt(qw * qw + qx * qx + qy * qy + qz * qz)
        qw = qw / norm
        qx = qx / norm
        qy = qy / norm
        qz = qz / norm
        if qw < 0.0:
            qw = -qw
            qx = -qx
            qy = -qy
            qz = -qz

        euler[i, 0] = roll
        euler[i, 1] = pitch
        euler[i, 2] = yaw
        q[i, 0] = qw
        q[i, 1] = qx
        q[i, 2] = qy
        q[i, 3] = qz
        flags[i] = <cnp.uint8_t> fl

    state[0] = 1.0 if init else 0.0
    state[1] = t_last
    state[2] = roll; state[3] = pitch; state[4] = yaw
    state[5] = lx1; state[6] = lx2; state[7] = ly1; state[8] = ly2
    state[9] = lz1; state[10] = lz2; state[11] = hx1; state[12] = hx2
    state[13] = hy1; state[14] = hy2
    return euler, q, flags


cdef inline double _heading(double mx, double my, double mz, double roll, double pitch) nogil:
    # mirror of attitude._heading_from_mag
    cdef double cr = cos(roll)
    cdef double sr = sin(roll)
    cdef double cp = cos(pitch)
    cdef double sp = sin(pitch)
    cdef double ty = my * cr - mz * sr
    cdef double tz = my * sr + mz * cr
    cdef double mxp = mx * cp + tz * sp
    cdef double myp = ty
    if mxp * mxp + myp * myp < MIN_HORIZONTAL_FIELD * MIN_HORIZONTAL_FIELD:
        return NAN
    return atan2(-myp, mxp)


def nav_run(cnp.ndarray[cnp.float64_t, ndim=1] t,
            cnp.ndarray[cnp.float64_t, ndim=2] acc,
            cnp.ndarray[cnp.float64_t, ndim=2] quat,
            cnp.ndarray[cnp.float64_t, ndim=1] ref_lat,
            cnp.ndarray[cnp.float64_t, ndim=1] ref_lon,
            cnp.ndarray[cnp.uint8_t, ndim=1] has_pos,
            cnp.ndarray[cnp.float64_t, ndim=1] ref_speed,
            cnp.ndarray[cnp.float64_t, ndim=1] ref_theta,
            cnp.ndarray[cnp.uint8_t, ndim=1] has_vel,
            bw, double alpha, double beta, double g, double deg_per_m,
            bint lon_scale_correction,
            cnp.ndarray[cnp.float64_t, ndim=1] state):
    cdef Py_ssize_t i, n = t.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] vel = np.empty((n, 2), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lat_out = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lon_out = np.empty(n, dtype=np.float64)

    cdef double b0 = bw[0], b1 = bw[1], b2 = bw[2], a1 = bw[3], a2 = bw[4]

    cdef bint init = state[0] != 0.0
    cdef double t_last = state[1]
    cdef double vn = state[2], ve = state[3]
    cdef double lat = state[4], lon = state[5]
    cdef double fx1 = state[6], fx2 = state[7], fy1 = state[8]
    cdef double fy2 = state[9], fz1 = state[10], fz2 = state[11]

    cdef double ti, ax, ay, az, fax, fay, faz, dt
    cdef double qw, qx, qy, qz, xx, yy, zz, wx, wy, wz, xy, xz, yz
    cdef double a_n, a_e, vn_i, ve_i, lat_dr, lon_dr

    for i in range(n):
        ti = t[i]
        ax = acc[i, 0]; ay = acc[i, 1]; az = acc[i, 2]

        if not init:
            prime(b0, b1, b2, a1, a2, ax, &fx1, &fx2)
            prime(b0, b1, b2, a1, a2, ay, &fy1, &fy2)
            prime(b0, b1, b2, a1, a2, az, &fz1, &fz2)

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
            if has_pos[i]:
                lat = ref_lat[i]
                lon = ref_lon[i]
            init = True
        else:
            dt = ti - t_last
            qw = quat[i, 0]; qx = quat[i, 1]; qy = quat[i, 2]; qz = quat[i, 3]
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
            if has_vel[i]:
                vn = alpha * vn_i + (1.0 - alpha) * ref_speed[i] * cos(ref_theta[i])
                ve = alpha * ve_i + (1.0 - alpha) * ref_speed[i] * sin(ref_theta[i])
            else:
                vn = vn_i
                ve = ve_i

            lat_dr = lat + vn * dt * deg_per_m
            if lon_scale_correction:
                lon_dr = lon + ve * dt * (deg_per_m / cos(lat * PI / 180.0))
            else:
                lon_dr = lon + ve * dt * deg_per_m
            if has_pos[i]:
                lat = beta * lat_dr + (1.0 - beta) * ref_lat[i]
                lon = beta * lon_dr + (1.0 - beta) * ref_lon[i]
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
    state[2] = vn; state[3] = ve
    state[4] = lat; state[5] = lon
    state[6] = fx1; state[7] = fx2; state[8] = fy1
    state[9] = fy2; state[10] = fz1; state[11] = fz2
    return vel, lat_out, lon_out

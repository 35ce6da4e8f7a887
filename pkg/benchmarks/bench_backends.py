#!/usr/bin/env python3
"""Benchmark the compiled fusion kernels against the pure-Python fallback.

Runs the attitude and position pipelines over the standard synthetic flight
and a biquad filter over white noise, printing wall time per backend and the
speedup. Results are also sanity-checked for bit identity.

Usage: python benchmarks/bench_backends.py [--repeat N]
"""

import argparse
import time

import numpy as np

from navfuse import _kernels
from navfuse.attitude import AttitudeEstimator
from navfuse.filters import design_butterworth2_lp
from navfuse.flightsim import SensorNoiseModel, generate_flight, standard_profile, streams_to_arrays
from navfuse.navigation import BlendWeights, NavEstimator


def time_call(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    backends = _kernels.available_backends()
    print(f"available backends: {', '.join(backends)}")
    if "compiled" not in backends:
        print("compiled extension not built; benchmarking python only")

    print("generating standard flight (218 s at 60 Hz)...")
    truth, samples, fixes = generate_flight(standard_profile(), SensorNoiseModel())
    t, acc, gyr, mag, has_mag = streams_to_arrays(samples)
    n = len(t)

    results = {}
    for backend in backends:
        def run_attitude(backend=backend):
            est = AttitudeEstimator(sample_rate_hz=60, backend=backend)
            return est.run(t, acc, gyr, mag, has_mag)

        att_time, att = time_call(run_attitude, args.repeat)

        def run_nav(backend=backend, q=att.q):
            est = NavEstimator(
                weights=BlendWeights(0.1, 0.1), sample_rate_hz=60, mode="replay", backend=backend
            )
            return est.run(t, acc, q, fixes)

        nav_time, nav = time_call(run_nav, args.repeat)

        coeffs = design_butterworth2_lp(10.0, 60.0)
        noise = np.random.default_rng(0).normal(size=1_000_000)

        def run_biquad(backend=backend):
            kern = _kernels.select(backend)
            return kern.biquad_run(coeffs.b0, coeffs.b1, coeffs.b2, coeffs.a1, coeffs.a2, 0.0, 0.0, noise)

        bq_time, bq = time_call(run_biquad, args.repeat)
        results[backend] = dict(att=(att_time, att), nav=(nav_time, nav), biquad=(bq_time, bq))

    print(f"\n{'kernel':<28}" + "".join(f"{b:>14}" for b in backends) + ("{:>10}".format("speedup") if len(backends) == 2 else ""))
    rows = [
        (f"attitude_run ({n} samples)", "att"),
        (f"nav_run ({n} samples)", "nav"),
        ("biquad_run (1e6 samples)", "biquad"),
    ]
    for label, key in rows:
        cells = "".join(f"{results[b][key][0] * 1e3:>12.2f}ms" for b in backends)
        line = f"{label:<28}{cells}"
        if len(backends) == 2:
            speedup = results["python"][key][0] / results["compiled"][key][0]
            line += f"{speedup:>9.1f}x"
        print(line)

    if len(backends) == 2:
        same = (
            np.array_equal(results["python"]["att"][1].q, results["compiled"]["att"][1].q)
            and np.array_equal(results["python"]["nav"][1].lat, results["compiled"]["nav"][1].lat)
            and np.array_equal(results["python"]["biquad"][1][0], results["compiled"]["biquad"][1][0])
        )
        print(f"\nbackends bit-identical: {same}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Compare the compiled coordinate-ascent kernel against the NumPy fallback.

The backends are bit-identical in output (see tests/test_kernels.py); this
script measures the speed gap on hard-margin training problems of growing
size. Run after installing the package:

    python benchmarks/bench_dca.py
"""

import importlib
import os
import subprocess
import sys
import time

import numpy as np


def train_time(n, d, seed, repeats=3):
    from retaincal import kernels
    from retaincal.harness.synth import margin_separable
    from retaincal.svm import train_hard_margin

    data = margin_separable(n, d, 0.2, seed)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        report = train_hard_margin(data)
        best = min(best, time.perf_counter() - start)
    return kernels.BACKEND, best, report.sweeps


def main():
    if os.environ.get("_BENCH_CHILD") == "1":
        n, d, seed = (int(v) for v in sys.argv[1:4])
        backend, seconds, sweeps = train_time(n, d, seed)
        print(f"{backend},{seconds:.6f},{sweeps}")
        return

    print(f"{'n':>6} {'sweeps':>7} {'compiled (s)':>13} {'python (s)':>11} {'speedup':>8}")
    for n in (100, 200, 400, 800):
        rows = {}
        for force_python in (False, True):
            env = dict(os.environ, _BENCH_CHILD="1")
            if force_python:
                env["RETAINCAL_PURE_PYTHON"] = "1"
            else:
                env.pop("RETAINCAL_PURE_PYTHON", None)
            out = subprocess.run(
                [sys.executable, __file__, str(n), "6", "1"],
                env=env,
                capture_output=True,
                text=True,
                check=True,
            ).stdout.strip()
            backend, seconds, sweeps = out.split(",")
            rows[backend] = (float(seconds), int(sweeps))
        compiled_s, sweeps = rows["compiled"]
        python_s, _ = rows["python"]
        print(
            f"{n:>6} {sweeps:>7} {compiled_s:>13.4f} {python_s:>11.4f} "
            f"{python_s / compiled_s:>7.1f}x"
        )


if __name__ == "__main__":
    main()

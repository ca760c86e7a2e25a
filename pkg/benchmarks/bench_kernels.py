"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each backend runs in its own interpreter, since the choice is made at import
time from EVERETT_DISABLE_NUMBA. JIT compilation is excluded by a warm-up call.
"""

import argparse
import json
import os
import subprocess
import sys
import time

WORKLOADS = {
    "log_pmf n=1e6": "kernels.binomial_log_pmf(10**6, 0.3)",
    "bin matrix 2000 x m=10": "kernels.bin_log_weight_matrix(np.arange(1, 2001), 0.37, 10)",
    "find_nb linear to 1e4": "find_nb(QubitPreparation.from_p(0.37), FrequencyBinning(10), 1e-3, 10**4, 32, method='linear')",
    "find_nb auto to 1e5": "find_nb(QubitPreparation.from_p(0.5), FrequencyBinning(9), 1e-9, 10**5, 32)",
}


def _child(repeat):
    import numpy as np  # noqa: F401

    from everett_preclusion import FrequencyBinning, QubitPreparation, find_nb, kernels  # noqa: F401

    env = dict(globals(), **locals())
    out = {"backend": kernels.BACKEND}
    for name, stmt in WORKLOADS.items():
        eval(stmt, env)  # warm-up / JIT
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            eval(stmt, env)
            best = min(best, time.perf_counter() - t0)
        out[name] = best
    print(json.dumps(out))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)
    if args.child:
        _child(args.repeat)
        return 0

    results = {}
    for flag in ("0", "1"):
        env = dict(os.environ, EVERETT_DISABLE_NUMBA=flag)
        proc = subprocess.run(
            [sys.executable, __file__, "--child", "--repeat", str(args.repeat)],
            env=env, capture_output=True, text=True, check=True,
        )
        res = json.loads(proc.stdout)
        results[res.pop("backend")] = res

    width = max(map(len, WORKLOADS))
    print(f"{'workload':<{width}}  {'numba [s]':>10}  {'numpy [s]':>10}  {'speedup':>8}")
    for name in WORKLOADS:
        a, b = results["numba"][name], results["numpy"][name]
        print(f"{name:<{width}}  {a:10.4f}  {b:10.4f}  {b / a:8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())

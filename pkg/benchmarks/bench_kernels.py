"""
Throughput of the compiled conversion kernel against the pure-Python one.

    python benchmarks/bench_kernels.py [--samples N] [--repeat R]

Both backends convert the same waveform; outputs are checked for equality
before timings are reported.
"""

import argparse
import time

import numpy as np

from tracksar import AdcConfig, Mode, gen_sine, run
from tracksar._kernels import available_backends


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.strip().splitlines()[0])
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    backends = available_backends()
    w = gen_sine(0.5, None, 1e6, 0.3, 0.5, args.samples, coherent_cycles=101)
    configs = {
        "regular": AdcConfig(),
        "tracking osr=64": AdcConfig(mode=Mode.TRACKING, osr=64),
        "tracking noisy": AdcConfig(mode=Mode.TRACKING, osr=64, comparator_noise_sigma=1e-3,
                                    cap_mismatch_sigma=0.01, rng_seed=1),
    }
    print(f"{args.samples} samples, best of {args.repeat}")
    print(f"{'config':<18}{'backend':<10}{'seconds':>10}{'Msamples/s':>12}{'speedup':>9}")
    for label, cfg in configs.items():
        ref = None
        base = None
        for name in ("python", "cython"):
            if name not in backends:
                print(f"{label:<18}{name:<10}{'n/a':>10}")
                continue
            kernel = backends[name]
            res = run(w, cfg, kernel=kernel)
            if ref is None:
                ref = res
            elif not np.array_equal(ref.codes, res.codes):
                raise SystemExit(f"{label}: backends disagree")
            t = _best(lambda: run(w, cfg, kernel=kernel), args.repeat)
            base = base or t
            print(f"{label:<18}{name:<10}{t:>10.4f}{args.samples / t / 1e6:>12.3f}{base / t:>8.1f}x")


if __name__ == "__main__":
    main()

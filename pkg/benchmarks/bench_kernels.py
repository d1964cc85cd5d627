"""Compare the compiled DSP kernels against the NumPy/pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--samples N]

The biquad recurrence is the interesting row: it cannot be vectorized, so
the fallback pays the full interpreter cost per sample.
"""
import argparse
import time

import numpy as np

from sva.dsp.kernels import _reference


def _best_of(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=1_000_000,
                        help="signal length for the biquad/RMS rows")
    args = parser.parse_args()

    try:
        from sva.dsp import _kernels as compiled
    except ImportError:
        compiled = None
        print("compiled kernels not built; showing the fallback alone\n")

    rng = np.random.default_rng(0)
    x = rng.uniform(-1, 1, args.samples)
    coeffs = (0.2183, 0.4366, 0.2183, -0.3695, 0.1958)
    n_frames = max(1, (args.samples - 2048) // 512 + 1)
    frames = np.ascontiguousarray(rng.standard_normal((n_frames, 2048)))
    out_len = (n_frames - 1) * 512 + 2048

    cases = [
        ("biquad_df2t", lambda impl: impl.biquad_df2t(x, *coeffs)),
        ("overlap_add", lambda impl: impl.overlap_add(frames, 512, out_len)),
        ("frame_rms", lambda impl: impl.frame_rms(x, 2048, 512)),
    ]

    print(f"{args.samples:,} samples / {n_frames:,} frames, best of 5 runs\n")
    header = f"{'kernel':<14}{'python (ms)':>14}{'compiled (ms)':>16}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, call in cases:
        py_ms = _best_of(lambda: call(_reference)) * 1000
        if compiled is not None:
            c_ms = _best_of(lambda: call(compiled)) * 1000
            print(f"{name:<14}{py_ms:>14.2f}{c_ms:>16.2f}{py_ms / c_ms:>9.1f}x")
        else:
            print(f"{name:<14}{py_ms:>14.2f}{'-':>16}{'-':>10}")


if __name__ == "__main__":
    main()

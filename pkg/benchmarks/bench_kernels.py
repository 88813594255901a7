"""Time the compiled and NumPy kernels side by side.

    python benchmarks/bench_kernels.py [--n 65536] [--repeat 5]

Prints one row per kernel and backend with the best wall time, and a final
pair of end-to-end timings (MFDFA and WTMM on a 2**16 cascade) per backend,
each run in a subprocess so the import-time backend choice is honoured.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from mfspeech import kernels
from mfspeech.mfdfa import detrend_basis, profile
from mfspeech.wtmm import gaussian_derivative_wavelet

END_TO_END = """
import time
from mfspeech import BACKEND
from mfspeech.config import AnalysisConfig
from mfspeech.mfdfa import mfdfa_analyze
from mfspeech.synth import CascadeSpec, binomial_cascade
from mfspeech.wtmm import wtmm_analyze
x = binomial_cascade(CascadeSpec(0.75, 16))
cfg = AnalysisConfig(wtmm_engine="direct", wtmm_scale_max=256, wtmm_n_scales=12)
for name, fn, c in (("mfdfa", mfdfa_analyze, None), ("wtmm-direct", wtmm_analyze, cfg)):
    best = 1e9
    for _ in range({repeat}):
        t = time.perf_counter(); fn(x, c); best = min(best, time.perf_counter() - t)
    print(f"{{name:<14}} {{BACKEND:<8}} {{best * 1e3:10.2f}} ms")
"""


def _cases(n, rng):
    x = rng.standard_normal(n)
    y = profile(x)
    basis16 = detrend_basis(16, 2)
    basis256 = detrend_basis(256, 2)
    k8 = gaussian_derivative_wavelet(2, 8)
    k64 = gaussian_derivative_wavelet(2, 64)
    a = np.abs(rng.standard_normal(n))
    return [
        ("segment_f2 s=16", lambda b: b.segment_f2(y, 16, basis16, False)),
        ("segment_f2 s=256", lambda b: b.segment_f2(y, 256, basis256, False)),
        ("correlate s=8", lambda b: b.correlate(x, k8, True)),
        ("correlate s=64", lambda b: b.correlate(x, k64, True)),
        ("local_maxima", lambda b: b.local_maxima(a, 1e-12)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1 << 16)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-end-to-end", action="store_true")
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    print(f"n = {args.n}, backends: {', '.join(backends)}")
    print(f"{'kernel':<18} " + " ".join(f"{b:>12}" for b in backends) + "   speedup")
    rng = np.random.default_rng(0)
    for name, call in _cases(args.n, rng):
        times = {}
        for b in backends:
            mod = kernels.get_backend(b)
            times[b] = min(timeit.repeat(lambda: call(mod), number=1, repeat=args.repeat))
        cells = " ".join(f"{times[b] * 1e3:10.3f}ms" for b in backends)
        ratio = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{name:<18} {cells}   {ratio:6.1f}x")

    if not args.skip_end_to_end:
        print()
        code = END_TO_END.format(repeat=max(1, args.repeat // 2))
        for b in backends:
            env = dict(os.environ, MFSPEECH_BACKEND=b)
            subprocess.run([sys.executable, "-c", code], env=env, check=True)


if __name__ == "__main__":
    main()

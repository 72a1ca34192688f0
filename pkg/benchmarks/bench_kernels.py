"""Compare the compiled convolution kernels against the pure-NumPy fallback.

Run:  python benchmarks/bench_kernels.py
Both backends compute identical quantities; this reports wall time and
effective GFLOP/s per pass on shapes matching the training workload.
"""

from __future__ import annotations

import time

import numpy as np

from birdcolor.nn import kernels

SHAPES = [
    # batch, in_ch, H, W, out_ch, k
    (16, 3, 48, 78, 8, 3),
    (16, 8, 24, 39, 16, 3),
    (16, 16, 12, 19, 32, 3),
    (64, 3, 48, 78, 8, 3),
]

REPEATS = 5


def flops(batch, in_ch, h, w, out_ch, k):
    return 2.0 * batch * out_ch * in_ch * k * k * h * w


def bench(module, batch, in_ch, h, w, out_ch, k):
    rng = np.random.default_rng(0)
    x = rng.normal(size=(batch, in_ch, h, w))
    wgt = rng.normal(size=(out_ch, in_ch, k, k))
    bias = rng.normal(size=out_ch)
    gy = rng.normal(size=(batch, out_ch, h, w))
    times = {"forward": [], "backward_input": [], "backward_weights": []}
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        module.conv2d_forward(x, wgt, bias, k // 2)
        times["forward"].append(time.perf_counter() - t0)
        t0 = time.perf_counter()
        module.conv2d_backward_input(gy, wgt, k // 2)
        times["backward_input"].append(time.perf_counter() - t0)
        t0 = time.perf_counter()
        module.conv2d_backward_weights(x, gy, k // 2, k, k)
        times["backward_weights"].append(time.perf_counter() - t0)
    return {name: min(vals) for name, vals in times.items()}


def main():
    backends = {}
    from birdcolor.nn.kernels import _kernels_py

    backends["python"] = _kernels_py
    try:
        from birdcolor.nn.kernels import _conv_ext

        backends["ext"] = _conv_ext
    except ImportError:
        print("compiled extension not available; benchmarking python only")

    header = f"{'shape':>22} {'pass':>18}"
    for name in backends:
        header += f" {name + ' ms':>12} {name + ' GF/s':>12}"
    print(header)
    for shape in SHAPES:
        results = {name: bench(mod, *shape) for name, mod in backends.items()}
        gf = flops(*shape) / 1e9
        for pass_name in ("forward", "backward_input", "backward_weights"):
            row = f"{str(shape):>22} {pass_name:>18}"
            for name in backends:
                dt = results[name][pass_name]
                row += f" {dt * 1e3:>12.2f} {gf / dt:>12.2f}"
            print(row)
    if len(backends) == 2:
        x = np.random.default_rng(1).normal(size=(4, 3, 20, 30))
        wgt = np.random.default_rng(2).normal(size=(6, 3, 3, 3))
        bias = np.zeros(6)
        ya = backends["python"].conv2d_forward(x, wgt, bias, 1)
        yb = backends["ext"].conv2d_forward(x, wgt, bias, 1)
        print(f"max |python - ext| on forward check: {np.abs(ya - yb).max():.3e}")


if __name__ == "__main__":
    main()

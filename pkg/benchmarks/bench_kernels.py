"""Compare the compiled and numpy kernel backends on synthetic data.

    python benchmarks/bench_kernels.py [--users 1000] [--items 2000] [--repeat 3]

Reports the best wall time per stage and the largest relative difference
between backends (KNN is bit-identical; NMF differs only in BLAS rounding).
"""
import argparse
import time

import numpy as np

from popaudit import _backend
from popaudit.core import build_matrix
from popaudit.recommenders import knn_fit, nmf_fit
from popaudit.synth import SynthConfig, generate


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def stages(matrix, backend, args):
    def knn_scores():
        model = knn_fit(matrix, args.k, backend=backend)
        return np.vstack([model.predict_user(u) for u in range(matrix.shape[0])])

    return {
        "corated_cosine": lambda: knn_fit(matrix, args.k, backend=backend).sim,
        "knn fit + score all": knn_scores,
        "nmf fit": lambda: nmf_fit(matrix, args.factors, args.iterations, seed=0,
                                   backend=backend).W,
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--users", type=int, default=1000)
    p.add_argument("--items", type=int, default=2000)
    p.add_argument("--profile-size", type=int, default=60)
    p.add_argument("--k", type=int, default=40)
    p.add_argument("--factors", type=int, default=15)
    p.add_argument("--iterations", type=int, default=50)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    ds = generate(SynthConfig(users=args.users, items=args.items,
                              mean_profile_size=args.profile_size, seed=0))
    matrix = build_matrix(ds)
    print(f"{matrix.shape[0]} users x {matrix.shape[1]} items, {matrix.nnz} ratings")
    backends = ["python"] + (["cython"] if _backend.compiled is not None else [])
    if len(backends) == 1:
        print("compiled kernels not built; timing the numpy fallback only")

    results = {b: {name: best_of(fn, args.repeat)
                   for name, fn in stages(matrix, b, args).items()} for b in backends}
    print(f"{'stage':24}" + "".join(f"{b:>12}" for b in backends)
          + ("     speedup   max rel diff" if len(backends) == 2 else ""))
    for name in results["python"]:
        row = f"{name:24}" + "".join(f"{results[b][name][0]:11.3f}s" for b in backends)
        if len(backends) == 2:
            py, cy = results["python"][name], results["cython"][name]
            diff = np.max(np.abs(py[1] - cy[1])) / max(np.max(np.abs(cy[1])), 1e-300)
            row += f"{py[0] / cy[0]:11.1f}x  {diff:13.1e}"
        print(row)


if __name__ == "__main__":
    main()

"""Benchmark the numba kernels against their pure-numpy fallbacks.

Both backends compute identical results; this script only measures speed.
Run as `python benchmarks/bench_kernels.py` from the repository root.
"""

import argparse
import random
import string
import time

import numpy as np

from sieveqa import kernels

ALPHABET = string.ascii_lowercase + " '"


def random_pairs(count: int, max_len: int, seed: int) -> list[tuple[str, str]]:
    rng = random.Random(seed)

    def one() -> str:
        n = rng.randint(0, max_len)
        return "".join(rng.choice(ALPHABET) for _ in range(n))

    return [(one(), one()) for _ in range(count)]


def bench(label: str, fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    print(f"{label:<28} {best * 1000:9.2f} ms")
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", type=int, default=2000, help="string pairs per run")
    parser.add_argument("--max-len", type=int, default=60, help="max string length")
    parser.add_argument("--q", type=int, default=2, help="gram size")
    parser.add_argument("--repeats", type=int, default=5, help="runs per backend (best counts)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if not kernels.NUMBA_AVAILABLE:
        print("numba is not installed; only the numpy fallback can run")

    pairs = random_pairs(args.pairs, args.max_len, args.seed)
    codes = [(kernels.str_to_codes(a), kernels.str_to_codes(b)) for a, b in pairs]
    packed = [kernels._pack_grams(a, b, args.q) for a, b in pairs]
    kernels.warmup()

    print(f"{args.pairs} pairs, max length {args.max_len}, q={args.q}, "
          f"best of {args.repeats}\n")

    def lev_numpy():
        for a, b in codes:
            kernels.levenshtein_distance_numpy(a, b)

    def qgram_numpy():
        for keys in packed:
            kernels.profile_distance_numpy(*keys)

    t_lev = bench("levenshtein numpy", lev_numpy, args.repeats)
    t_qgram = bench("qgram profile numpy", qgram_numpy, args.repeats)

    if kernels.NUMBA_AVAILABLE:
        def lev_numba():
            for a, b in codes:
                kernels.levenshtein_distance_numba(a, b)

        # profile_distance_numba sorts internally, so raw keys keep the
        # comparison fair (numpy's np.unique also sorts)
        def qgram_numba():
            for k1, k2 in packed:
                kernels.profile_distance_numba(k1, k2)

        t_lev_nb = bench("levenshtein numba", lev_numba, args.repeats)
        t_qgram_nb = bench("qgram profile numba", qgram_numba, args.repeats)
        print(f"\nspeedup: levenshtein {t_lev / t_lev_nb:.1f}x, "
              f"qgram {t_qgram / t_qgram_nb:.1f}x")

    # sanity: backends agree on this workload
    for (a, b), keys in zip(codes, packed):
        if kernels.NUMBA_AVAILABLE:
            assert kernels.levenshtein_distance_numba(a, b) == \
                kernels.levenshtein_distance_numpy(a, b)
            assert kernels.profile_distance_numba(np.sort(keys[0]), np.sort(keys[1])) == \
                kernels.profile_distance_numpy(*keys)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

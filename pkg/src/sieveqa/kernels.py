"""Hot inner loops: edit distance and q-gram profile counting.

Each kernel exists twice: a numba @njit version and a pure-numpy fallback.
The active path is chosen at import time; set SIEVEQA_NO_NUMBA=1 to force
the numpy fallback (or let the import failure pick it automatically).
Both paths are exact integer algorithms and must agree on every input;
benchmarks/bench_kernels.py compares their speed.
"""

from __future__ import annotations

import os
from collections import Counter

import numpy as np

_ENV_FLAG = "SIEVEQA_NO_NUMBA"


def _flag_disabled() -> bool:
    return os.environ.get(_ENV_FLAG, "").strip().lower() in {"1", "true", "yes"}


try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    NUMBA_AVAILABLE = False

_USE_NUMBA = NUMBA_AVAILABLE and not _flag_disabled()


def active_backend() -> str:
    return "numba" if _USE_NUMBA else "numpy"


def str_to_codes(s: str) -> np.ndarray:
    """Unicode code points as an int32 array."""
    return np.frombuffer(s.encode("utf-32-le"), dtype=np.uint32).astype(np.int32)


# ---------------------------------------------------------------------------
# Levenshtein distance


def _lev_loop(a, b):
    n1, n2 = a.shape[0], b.shape[0]
    if n2 == 0:
        return n1
    prev = np.arange(n2 + 1)
    cur = np.empty(n2 + 1, dtype=np.int64)
    for i in range(n1):
        cur[0] = i + 1
        for j in range(n2):
            sub = prev[j] + (0 if a[i] == b[j] else 1)
            ins = prev[j + 1] + 1
            dele = cur[j] + 1
            best = sub if sub < ins else ins
            cur[j + 1] = best if best < dele else dele
        prev, cur = cur, prev
    return prev[n2]


if NUMBA_AVAILABLE:
    _lev_loop_jit = njit(cache=True)(_lev_loop)


def levenshtein_distance_numpy(a: np.ndarray, b: np.ndarray) -> int:
    """Row-vectorized DP; deletion chains resolved with a running minimum."""
    n1, n2 = a.shape[0], b.shape[0]
    if n1 == 0 or n2 == 0:
        return n1 or n2
    idx = np.arange(n2 + 1)
    prev = idx.copy()
    row = np.empty(n2 + 1, dtype=np.int64)  # scratch; prev never aliases it
    for i in range(n1):
        row[0] = i + 1
        row[1:] = np.minimum(prev[1:] + 1, prev[:-1] + (b != a[i]))
        # resolve deletion chains: row[j] = min over k <= j of row[k] + (j - k)
        prev = np.minimum.accumulate(row - idx) + idx
    return int(prev[n2])


def levenshtein_distance_numba(a: np.ndarray, b: np.ndarray) -> int:
    if not NUMBA_AVAILABLE:
        raise RuntimeError("numba is not available")
    return int(_lev_loop_jit(a, b))


def levenshtein_distance(s1: str, s2: str) -> int:
    a, b = str_to_codes(s1), str_to_codes(s2)
    if _USE_NUMBA:
        return int(_lev_loop_jit(a, b))
    return levenshtein_distance_numpy(a, b)


# ---------------------------------------------------------------------------
# q-gram profiles
#
# Grams are packed into int64 keys after remapping both strings onto their
# joint alphabet; the profile distance is then a counting problem over keys.


def _pack_grams(s1: str, s2: str, q: int) -> tuple[np.ndarray, np.ndarray] | None:
    """Pack every q-gram of each string into an int64 key, or None when the
    joint alphabet is too large to pack without overflow (rare; handled by a
    Counter fallback)."""
    c1, c2 = str_to_codes(s1), str_to_codes(s2)
    alphabet, inverse = np.unique(np.concatenate([c1, c2]), return_inverse=True)
    m = int(alphabet.shape[0])
    if m == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    if m**q >= 2**62:
        return None
    powers = (m ** np.arange(q - 1, -1, -1)).astype(np.int64)

    def keys_of(codes: np.ndarray) -> np.ndarray:
        n = codes.shape[0]
        if n < q:
            return np.empty(0, dtype=np.int64)
        windows = np.lib.stride_tricks.sliding_window_view(codes.astype(np.int64), q)
        return windows @ powers

    r1 = inverse[: c1.shape[0]]
    r2 = inverse[c1.shape[0] :]
    return keys_of(r1), keys_of(r2)


def _profile_merge(k1, k2):
    # k1, k2 sorted; sum of |count1(g) - count2(g)| over all keys g
    i = 0
    j = 0
    n1 = k1.shape[0]
    n2 = k2.shape[0]
    dist = 0
    while i < n1 and j < n2:
        if k1[i] < k2[j]:
            g = k1[i]
            c = 0
            while i < n1 and k1[i] == g:
                i += 1
                c += 1
            dist += c
        elif k2[j] < k1[i]:
            g = k2[j]
            c = 0
            while j < n2 and k2[j] == g:
                j += 1
                c += 1
            dist += c
        else:
            g = k1[i]
            c1 = 0
            while i < n1 and k1[i] == g:
                i += 1
                c1 += 1
            c2 = 0
            while j < n2 and k2[j] == g:
                j += 1
                c2 += 1
            dist += c1 - c2 if c1 > c2 else c2 - c1
    dist += n1 - i
    dist += n2 - j
    return dist


if NUMBA_AVAILABLE:
    _profile_merge_jit = njit(cache=True)(_profile_merge)


def profile_distance_numpy(keys1: np.ndarray, keys2: np.ndarray) -> int:
    both = np.concatenate([keys1, keys2])
    if both.shape[0] == 0:
        return 0
    uniq, inverse = np.unique(both, return_inverse=True)
    c1 = np.bincount(inverse[: keys1.shape[0]], minlength=uniq.shape[0])
    c2 = np.bincount(inverse[keys1.shape[0] :], minlength=uniq.shape[0])
    return int(np.abs(c1 - c2).sum())


def profile_distance_numba(keys1: np.ndarray, keys2: np.ndarray) -> int:
    if not NUMBA_AVAILABLE:
        raise RuntimeError("numba is not available")
    return int(_profile_merge_jit(np.sort(keys1), np.sort(keys2)))


def _qgram_counter_fallback(s1: str, s2: str, q: int) -> int:
    p1 = Counter(s1[i : i + q] for i in range(len(s1) - q + 1))
    p2 = Counter(s2[i : i + q] for i in range(len(s2) - q + 1))
    return sum(abs(p1[g] - p2[g]) for g in p1.keys() | p2.keys())


def qgram_profile_distance(s1: str, s2: str, q: int) -> tuple[int, int, int]:
    """Profile distance plus the two gram counts (|grams1|, |grams2|)."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    n1 = max(len(s1) - q + 1, 0)
    n2 = max(len(s2) - q + 1, 0)
    packed = _pack_grams(s1, s2, q)
    if packed is None:
        return _qgram_counter_fallback(s1, s2, q), n1, n2
    keys1, keys2 = packed
    if _USE_NUMBA:
        dist = int(_profile_merge_jit(np.sort(keys1), np.sort(keys2)))
    else:
        dist = profile_distance_numpy(keys1, keys2)
    return dist, n1, n2


def warmup() -> None:
    """Trigger JIT compilation so timed paths never pay it."""
    levenshtein_distance("warm", "up")
    qgram_profile_distance("warm", "up", 2)

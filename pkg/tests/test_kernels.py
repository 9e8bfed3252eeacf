import os
import random
import string
import subprocess
import sys
from collections import Counter

import pytest

from sieveqa import kernels


def oracle_levenshtein(s1: str, s2: str) -> int:
    """Textbook full-matrix dynamic program."""
    m, n = len(s1), len(s2)
    dp = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        dp[i][0] = i
    for j in range(n + 1):
        dp[0][j] = j
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            cost = 0 if s1[i - 1] == s2[j - 1] else 1
            dp[i][j] = min(dp[i - 1][j] + 1, dp[i][j - 1] + 1, dp[i - 1][j - 1] + cost)
    return dp[m][n]


def oracle_qgram(s1: str, s2: str, q: int):
    g1 = Counter(s1[i:i + q] for i in range(max(0, len(s1) - q + 1)))
    g2 = Counter(s2[i:i + q] for i in range(max(0, len(s2) - q + 1)))
    dist = sum(abs(g1[g] - g2[g]) for g in set(g1) | set(g2))
    return dist, sum(g1.values()), sum(g2.values())


def random_strings(n, seed, alphabet=string.ascii_lowercase + " '", max_len=40):
    rng = random.Random(seed)
    return [
        "".join(rng.choice(alphabet) for _ in range(rng.randint(0, max_len)))
        for _ in range(n)
    ]


def test_levenshtein_known_values():
    assert kernels.levenshtein_distance("kitten", "sitting") == 3
    assert kernels.levenshtein_distance("", "") == 0
    assert kernels.levenshtein_distance("", "abc") == 3
    assert kernels.levenshtein_distance("abc", "abc") == 0
    assert kernels.levenshtein_distance("flaw", "lawn") == 2


def test_levenshtein_matches_oracle_on_random_pairs():
    xs = random_strings(300, seed=11)
    ys = random_strings(300, seed=13)
    for s1, s2 in zip(xs, ys):
        assert kernels.levenshtein_distance(s1, s2) == oracle_levenshtein(s1, s2)


def test_levenshtein_numpy_path_matches_oracle():
    xs = random_strings(200, seed=17)
    ys = random_strings(200, seed=19)
    for s1, s2 in zip(xs, ys):
        got = kernels.levenshtein_distance_numpy(
            kernels.str_to_codes(s1), kernels.str_to_codes(s2)
        )
        assert got == oracle_levenshtein(s1, s2)


def test_qgram_known_values():
    assert kernels.qgram_profile_distance("abcd", "abcd", 2) == (0, 3, 3)
    assert kernels.qgram_profile_distance("abc", "abd", 2) == (2, 2, 2)
    # strings shorter than q have empty profiles
    assert kernels.qgram_profile_distance("a", "b", 2) == (0, 0, 0)


def test_qgram_matches_oracle_on_random_pairs():
    xs = random_strings(300, seed=23)
    ys = random_strings(300, seed=29)
    for q in (1, 2, 3):
        for s1, s2 in zip(xs, ys):
            assert kernels.qgram_profile_distance(s1, s2, q) == oracle_qgram(s1, s2, q)


def test_qgram_numpy_path_matches_oracle():
    xs = random_strings(150, seed=31)
    ys = random_strings(150, seed=37)
    for s1, s2 in zip(xs, ys):
        keys1, keys2 = kernels._pack_grams(s1, s2, 2)
        assert kernels.profile_distance_numpy(keys1, keys2) == oracle_qgram(s1, s2, 2)[0]


def test_qgram_overflow_guard_falls_back_exactly():
    # a large q over a wide alphabet overflows the int64 gram packing and
    # must route through the counting fallback with identical results
    s1 = "".join(chr(cp) for cp in range(1000, 1100))
    s2 = "".join(chr(cp) for cp in range(1050, 1150))
    q = 40
    assert kernels.qgram_profile_distance(s1, s2, q) == oracle_qgram(s1, s2, q)


def test_unicode_round_trip():
    s1 = "café nächte"
    s2 = "cafe nachte"
    assert kernels.levenshtein_distance(s1, s2) == oracle_levenshtein(s1, s2)
    assert kernels.qgram_profile_distance(s1, s2, 2) == oracle_qgram(s1, s2, 2)


def test_active_backend_reports_a_known_value():
    assert kernels.active_backend() in ("numba", "numpy")


def test_env_flag_selects_numpy_backend():
    code = (
        "from sieveqa import kernels; "
        "print(kernels.active_backend()); "
        "print(kernels.levenshtein_distance('kitten', 'sitting')); "
        "print(kernels.qgram_profile_distance('abc', 'abd', 2))"
    )
    env = dict(os.environ, SIEVEQA_NO_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, env=env
    )
    assert out.returncode == 0, out.stderr
    lines = out.stdout.strip().splitlines()
    assert lines[0] == "numpy"
    assert lines[1] == "3"
    assert lines[2] == "(2, 2, 2)"


@pytest.mark.skipif(not kernels.NUMBA_AVAILABLE, reason="numba not installed")
def test_backends_agree():
    xs = random_strings(100, seed=41)
    ys = random_strings(100, seed=43)
    for s1, s2 in zip(xs, ys):
        a, b = kernels.str_to_codes(s1), kernels.str_to_codes(s2)
        assert kernels.levenshtein_distance_numba(a, b) == kernels.levenshtein_distance_numpy(a, b)
        keys1, keys2 = kernels._pack_grams(s1, s2, 2)
        assert kernels.profile_distance_numba(keys1, keys2) == kernels.profile_distance_numpy(keys1, keys2)

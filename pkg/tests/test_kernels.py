import numpy as np
import pytest

from fountainkit import _kernels
from fountainkit.gf2 import Gf2Matrix, rank


def random_stream(rng, k, n):
    supports = []
    for _ in range(n):
        d = int(rng.integers(0, k + 1))
        supports.append(
            np.sort(rng.choice(k, size=d, replace=False)).astype(np.int64)
        )
    return supports


def to_csr(supports):
    indices = (
        np.concatenate(supports).astype(np.int64)
        if supports
        else np.zeros(0, np.int64)
    )
    indptr = np.zeros(len(supports) + 1, np.int64)
    for i, s in enumerate(supports):
        indptr[i + 1] = indptr[i] + len(s)
    return indices, indptr


def test_rank_batch_against_dense_oracle(rng):
    for _ in range(50):
        k = int(rng.integers(1, 9))
        n = int(rng.integers(0, 7))
        cols = rng.integers(0, 1 << k, size=(40, n)).astype(np.int64)
        ranks = _kernels.rank_batch(cols, k)
        for s in range(40):
            expected = rank(Gf2Matrix(k, tuple(int(c) for c in cols[s])))
            assert ranks[s] == expected


def test_rank_batch_variants_agree(rng):
    table = _kernels.variants()["rank_batch"]
    cols = rng.integers(0, 1 << 6, size=(500, 5)).astype(np.int64)
    results = {name: fn(cols, 6) for name, fn in table.items()}
    base = results.pop("numpy")
    for name, res in results.items():
        assert np.array_equal(res, base), name


def test_bp_and_ge_variants_agree(rng):
    table = _kernels.variants()
    if "numba" not in table["bp_peel_first_done"]:
        pytest.skip("numba unavailable; single implementation")
    for _ in range(20):
        k = int(rng.integers(2, 20))
        supports = random_stream(rng, k, int(rng.integers(0, 4 * k)))
        indices, indptr = to_csr(supports)
        a = table["bp_peel_first_done"]["numba"](indices, indptr, k)
        b = table["bp_peel_first_done"]["loops"](indices, indptr, k)
        assert a == b
        words = _kernels.pack_supports_to_words(supports, k)
        ga = table["ge_first_done"]["numba"](words, k)
        gb = table["ge_first_done"]["loops"](words, k)
        assert ga == gb


def test_ge_first_done_matches_rank_prefix(rng):
    for _ in range(25):
        k = int(rng.integers(2, 12))
        supports = random_stream(rng, k, 3 * k)
        words = _kernels.pack_supports_to_words(supports, k)
        t_done, final_rank = _kernels.ge_first_done(words, k)
        masks = [int(sum(1 << int(b) for b in s)) for s in supports]
        ranks = [rank(Gf2Matrix(k, tuple(masks[: i + 1]))) for i in range(len(masks))]
        expected = next((i + 1 for i, r in enumerate(ranks) if r == k), -1)
        assert t_done == expected


def test_bp_peel_known_cases():
    # (10),(11) resolves at 2
    indices, indptr = to_csr([np.array([0]), np.array([0, 1])])
    assert _kernels.bp_peel_first_done(indices, indptr, 2)[0] == 2
    # the classic stuck triple: all degree >= 2 forever
    indices, indptr = to_csr([np.array([0, 1, 2]), np.array([0, 1]), np.array([0, 2])])
    assert _kernels.bp_peel_first_done(indices, indptr, 3)[0] == -1
    # empty and zero-selector symbols are ignored
    indices, indptr = to_csr([np.array([], dtype=np.int64), np.array([0])])
    assert _kernels.bp_peel_first_done(indices, indptr, 1)[0] == 2


def test_pack_supports_word_boundaries():
    sup = [np.array([0, 63, 64, 129], dtype=np.int64)]
    words = _kernels.pack_supports_to_words(sup, 130)
    u = words.view(np.uint64)[0]
    assert u[0] == (1 | (np.uint64(1) << np.uint64(63)))
    assert u[1] == 1
    assert u[2] == 2


def test_ge_handles_high_bits():
    # selectors spanning >64 coordinates, including bit 63
    k = 70
    supports = [np.array([i], dtype=np.int64) for i in range(k)]
    words = _kernels.pack_supports_to_words(supports, k)
    assert _kernels.ge_first_done(words, k) == (k, k)

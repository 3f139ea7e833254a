"""Hot numeric kernels with a numba fast path and a pure numpy fallback.

The heavy inner loops of the toolkit live here: batched GF(2) rank of
sampled generator matrices, the belief-propagation peeling decoder, and
incremental bitset Gaussian elimination.  When numba is importable the
loop kernels are jitted (cached to disk); setting FOUNTAINKIT_NO_NUMBA=1
forces the fallback path.  Both paths are integer-exact, so results are
identical either way.  ``benchmarks/bench_kernels.py`` compares them.
"""

from __future__ import annotations

import os

import numpy as np


def _numba_wanted() -> bool:
    if os.environ.get("FOUNTAINKIT_NO_NUMBA", "") not in ("", "0"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


USING_NUMBA = _numba_wanted()


# ---------------------------------------------------------------------------
# batched GF(2) rank of column masks (k <= 62, masks in int64)
# ---------------------------------------------------------------------------


def _rank_batch_loops(cols, k):
    m, n = cols.shape
    out = np.zeros(m, np.int64)
    basis = np.zeros(k, np.int64)
    for s in range(m):
        for b in range(k):
            basis[b] = 0
        rank = 0
        for j in range(n):
            v = cols[s, j]
            while v != 0:
                b = 0
                while (v >> b) & 1 == 0:
                    b += 1
                if basis[b] == 0:
                    basis[b] = v
                    rank += 1
                    v = 0
                else:
                    v ^= basis[b]
        out[s] = rank
    return out


def _rank_batch_numpy(cols, k):
    # vectorized over samples: sweep bit positions, keeping one stored
    # vector per possible lowest set bit
    m, n = cols.shape
    basis = np.zeros((m, k), np.int64)
    rank = np.zeros(m, np.int64)
    for j in range(n):
        v = cols[:, j].copy()
        for b in range(k):
            active = ((v >> b) & 1).astype(bool)
            if not active.any():
                continue
            stored = basis[:, b] != 0
            red = active & stored
            v[red] ^= basis[red, b]
            new = active & ~stored
            basis[new, b] = v[new]
            rank[new] += 1
            v[new] = 0
    return rank


# ---------------------------------------------------------------------------
# belief-propagation peeling: first arrival index that completes decoding
# ---------------------------------------------------------------------------


def _bp_peel_loops(indices, indptr, k):
    """Feed symbols (CSR lists of selector bit indices) in arrival order.

    Returns (t_done, n_recovered): t_done is the 1-based count of symbols
    consumed when all k inputs become recoverable by peeling, or -1 if the
    stream ends first.
    """
    n = indptr.shape[0] - 1
    recovered = np.zeros(k, np.uint8)
    nrec = 0
    head = np.full(k, -1, np.int64)
    link_eq = np.zeros(indices.shape[0] + 1, np.int64)
    link_next = np.zeros(indices.shape[0] + 1, np.int64)
    nlinks = 0
    deg = np.zeros(n, np.int64)
    stack = np.zeros(k, np.int64)
    for t in range(n):
        lo = indptr[t]
        hi = indptr[t + 1]
        d = 0
        last = -1
        for p in range(lo, hi):
            idx = indices[p]
            if recovered[idx] == 0:
                d += 1
                last = idx
        if d == 0:
            continue
        if d > 1:
            deg[t] = d
            for p in range(lo, hi):
                idx = indices[p]
                if recovered[idx] == 0:
                    link_eq[nlinks] = t
                    link_next[nlinks] = head[idx]
                    head[idx] = nlinks
                    nlinks += 1
            continue
        # degree-1 arrival: recover and cascade through pending equations
        recovered[last] = 1
        nrec += 1
        top = 0
        stack[top] = last
        top += 1
        while top > 0:
            top -= 1
            idx = stack[top]
            ptr = head[idx]
            while ptr >= 0:
                e = link_eq[ptr]
                deg[e] -= 1
                if deg[e] == 1:
                    for q in range(indptr[e], indptr[e + 1]):
                        jdx = indices[q]
                        if recovered[jdx] == 0:
                            recovered[jdx] = 1
                            nrec += 1
                            stack[top] = jdx
                            top += 1
                            deg[e] = 0
                            break
                ptr = link_next[ptr]
        if nrec == k:
            return t + 1, nrec
    return -1, nrec


# ---------------------------------------------------------------------------
# incremental Gaussian elimination on word-packed selectors
# ---------------------------------------------------------------------------


def _ge_first_done_loops(words, k):
    """Selectors packed as int64 words (bit i of word w = coordinate 64w+i+1).

    Returns (t_done, rank): t_done is the 1-based count of symbols consumed
    when the received selectors first reach rank k, or -1.
    """
    n, nw = words.shape
    basis = np.zeros((k, nw), np.int64)
    used = np.zeros(k, np.uint8)
    rank = 0
    v = np.zeros(nw, np.int64)
    for t in range(n):
        for w in range(nw):
            v[w] = words[t, w]
        while True:
            b = -1
            for w in range(nw):
                x = v[w]
                if x != 0:
                    c = 0
                    while (x >> c) & 1 == 0:
                        c += 1
                    b = (w << 6) + c
                    break
            if b < 0:
                break
            if used[b] == 0:
                for w in range(nw):
                    basis[b, w] = v[w]
                used[b] = 1
                rank += 1
                break
            for w in range(nw):
                v[w] ^= basis[b, w]
        if rank == k:
            return t + 1, rank
    return -1, rank


if USING_NUMBA:
    from numba import njit

    rank_batch = njit(cache=True)(_rank_batch_loops)
    bp_peel_first_done = njit(cache=True)(_bp_peel_loops)
    ge_first_done = njit(cache=True)(_ge_first_done_loops)
else:
    rank_batch = _rank_batch_numpy
    bp_peel_first_done = _bp_peel_loops
    ge_first_done = _ge_first_done_loops


def pack_supports_to_words(supports, k) -> np.ndarray:
    """Pack selector bit-index arrays into an (n, ceil(k/64)) int64 matrix."""
    nw = (k + 63) >> 6
    # build in uint64 (bit 63 overflows int64 arithmetic), then reinterpret
    out = np.zeros((len(supports), nw), dtype=np.uint64)
    for i, sup in enumerate(supports):
        for b in sup:
            out[i, b >> 6] |= np.uint64(1) << np.uint64(b & 63)
    return out.view(np.int64)


def variants() -> dict:
    """Implementation table for benchmarks and cross-checks."""
    table = {
        "rank_batch": {"numpy": _rank_batch_numpy, "loops": _rank_batch_loops},
        "bp_peel_first_done": {"loops": _bp_peel_loops},
        "ge_first_done": {"loops": _ge_first_done_loops},
    }
    if USING_NUMBA:
        table["rank_batch"]["numba"] = rank_batch
        table["bp_peel_first_done"]["numba"] = bp_peel_first_done
        table["ge_first_done"]["numba"] = ge_first_done
    return table

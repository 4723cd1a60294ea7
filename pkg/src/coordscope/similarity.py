"""Ratcliff/Obershelp (gestalt pattern matching) similarity.

score = 2 * M / (len(a) + len(b)), where M is the total length of the
matches found by taking the longest common substring and recursing on the
unmatched text to its left and to its right. Ties between equally long
substrings go to the one starting earliest in ``a``, then earliest in ``b``.

The procedure is not symmetric in general; callers that need a canonical
score fix the argument order (the copypasta scan always passes the earlier
tweet first).

Strings are compared as sequences of Unicode code points. The kernels are
compiled with numba and release the GIL, so batches can be split across
threads without changing any result.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _lower_bound(arr, lo, hi, x):
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(cache=True, nogil=True)
def _matched_length(a, b, order, chars, stamp, lens, stack):
    """Total matched length. ``order``/``chars``: b's positions sorted by code point."""
    n = a.shape[0]
    m = b.shape[0]
    if n == 0 or m == 0:
        return 0
    for j in range(m + 1):
        stamp[j] = -10
    row = 0
    stack[0, 0] = 0
    stack[0, 1] = n
    stack[0, 2] = 0
    stack[0, 3] = m
    sp = 1
    total = 0
    while sp > 0:
        sp -= 1
        alo = stack[sp, 0]
        ahi = stack[sp, 1]
        blo = stack[sp, 2]
        bhi = stack[sp, 3]
        besti = alo
        bestj = blo
        bestk = 0
        # a fresh row id per region keeps stale run lengths from leaking in
        row += 2
        for i in range(alo, ahi):
            row += 1
            c = a[i]
            g0 = _lower_bound(chars, 0, m, c)
            g1 = _lower_bound(chars, g0, m, c + 1)
            if g0 == g1:
                continue
            p0 = _lower_bound(order, g0, g1, blo)
            p1 = _lower_bound(order, p0, g1, bhi)
            # descending j so the previous row's value at j-1 is read before overwrite
            for q in range(p1 - 1, p0 - 1, -1):
                j = order[q]
                k = 1
                if j > blo and stamp[j] == row - 1:
                    k = lens[j] + 1
                stamp[j + 1] = row
                lens[j + 1] = k
                si = i - k + 1
                sj = j - k + 1
                if k > bestk or (k == bestk and (si < besti or (si == besti and sj < bestj))):
                    bestk = k
                    besti = si
                    bestj = sj
        if bestk > 0:
            total += bestk
            if besti + bestk < ahi and bestj + bestk < bhi:
                stack[sp, 0] = besti + bestk
                stack[sp, 1] = ahi
                stack[sp, 2] = bestj + bestk
                stack[sp, 3] = bhi
                sp += 1
            if alo < besti and blo < bestj:
                stack[sp, 0] = alo
                stack[sp, 1] = besti
                stack[sp, 2] = blo
                stack[sp, 3] = bestj
                sp += 1
    return total


@njit(cache=True, nogil=True)
def _score_batch(codes, offsets, order, chars, left, right, out):
    maxlen = 1
    for t in range(offsets.shape[0] - 1):
        ln = offsets[t + 1] - offsets[t]
        if ln > maxlen:
            maxlen = ln
    stamp = np.empty(maxlen + 2, np.int64)
    lens = np.empty(maxlen + 2, np.int64)
    stack = np.empty((2 * maxlen + 4, 4), np.int64)
    for p in range(left.shape[0]):
        a0 = offsets[left[p]]
        a1 = offsets[left[p] + 1]
        b0 = offsets[right[p]]
        b1 = offsets[right[p] + 1]
        total = (a1 - a0) + (b1 - b0)
        if total == 0:
            out[p] = 1.0
        else:
            k = _matched_length(codes[a0:a1], codes[b0:b1], order[b0:b1], chars[b0:b1], stamp, lens, stack)
            out[p] = 2.0 * k / total


def _encode(text: str) -> np.ndarray:
    return np.frombuffer(text.encode("utf-32-le", "surrogatepass"), dtype=np.uint32).astype(np.int64)


class EncodedTexts:
    """Code-point arrays for a list of texts, packed for the batch kernel."""

    def __init__(self, texts):
        arrays = [_encode(t) for t in texts]
        self.offsets = np.zeros(len(arrays) + 1, dtype=np.int64)
        if arrays:
            self.offsets[1:] = np.cumsum([a.shape[0] for a in arrays])
            self.codes = np.concatenate(arrays) if self.offsets[-1] else np.zeros(0, np.int64)
            orders = [np.argsort(a, kind="stable") for a in arrays]
            self.order = np.concatenate(orders).astype(np.int64) if self.offsets[-1] else np.zeros(0, np.int64)
            self.chars = np.concatenate([a[o] for a, o in zip(arrays, orders)]) if self.offsets[-1] else np.zeros(0, np.int64)
        else:
            self.codes = self.order = self.chars = np.zeros(0, np.int64)

    def __len__(self) -> int:
        return self.offsets.shape[0] - 1


def score_pairs(texts, left, right, threads: int = 1) -> np.ndarray:
    """Similarity of ``texts[left[p]]`` vs ``texts[right[p]]`` for every p."""
    enc = texts if isinstance(texts, EncodedTexts) else EncodedTexts(texts)
    left = np.ascontiguousarray(left, dtype=np.int64)
    right = np.ascontiguousarray(right, dtype=np.int64)
    out = np.empty(left.shape[0], dtype=np.float64)
    if left.shape[0] == 0:
        return out
    threads = max(1, int(threads))
    if threads == 1 or left.shape[0] < 2 * threads:
        _score_batch(enc.codes, enc.offsets, enc.order, enc.chars, left, right, out)
        return out
    bounds = np.linspace(0, left.shape[0], threads + 1).astype(np.int64)

    def work(k):
        lo, hi = bounds[k], bounds[k + 1]
        _score_batch(enc.codes, enc.offsets, enc.order, enc.chars, left[lo:hi], right[lo:hi], out[lo:hi])

    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(work, range(threads)))
    return out


def ratcliff_obershelp(a: str, b: str) -> float:
    """Similarity in [0, 1]; 1.0 for two empty strings."""
    return float(score_pairs([a, b], [0], [1])[0])

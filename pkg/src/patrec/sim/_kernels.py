"""Compiled inner loop for the codeword-centric memory encoder."""

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _pop(x):
    x = x - ((x >> 1) & 0x5555555555555555)
    x = (x & 0x3333333333333333) + ((x >> 2) & 0x3333333333333333)
    x = (x + (x >> 4)) & 0x0F0F0F0F0F0F0F0F
    return (x * 0x0101010101010101) >> 56


@njit(cache=True)
def claim_table(book, masks, lut, table):
    """Fill ``table[x]`` with the first codeword index typical with ``x``.

    Codewords are visited from last to first so the smallest index wins.
    Entries no codeword claims keep their initial value.
    """
    for j in range(book.shape[0] - 1, -1, -1):
        c = book[j]
        kc = _pop(c)
        for t in range(masks.shape[0]):
            x = c ^ masks[t]
            if lut[_pop(x), kc, _pop(x & c)]:
                table[x] = j
    return table


def new_table(n: int) -> np.ndarray:
    return np.full(1 << n, -1, dtype=np.int32)

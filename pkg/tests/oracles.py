"""Slow, definition-level reference implementations shared by the tests."""
from __future__ import annotations

import numpy as np


def dyadic_pattern(n: int, s: int) -> list[int]:
    """Independent top-down statement of the dyadic pattern of shift s over n cells."""
    if n == 1:
        return [0]
    h = s // 2
    left = dyadic_pattern(n // 2, h)
    return left + [o + (s - h) for o in left]


def oracle_accumulator(data: np.ndarray, family: str) -> np.ndarray:
    """Pattern sums computed pixel by pixel from the definition."""
    fr = np.asarray(data).T if family == "horizontal" else np.asarray(data)
    length, depth = fr.shape
    n = 1
    while n < length:
        n *= 2
    hp = depth + n
    out = np.zeros((2, n, hp), dtype=np.int64)
    for sign in (0, 1):
        for s in range(n):
            off = dyadic_pattern(n, s)
            for y0 in range(hp):
                tot = 0
                for x in range(length):
                    y = (y0 + off[x]) % hp
                    if y < depth:
                        tot += int(fr[x, y if sign == 0 else depth - 1 - y])
                out[sign, s, y0] = tot
    return out


def oracle_accumulator_vec(data: np.ndarray, family: str) -> np.ndarray:
    """Same definition as :func:`oracle_accumulator`, one gather per pattern."""
    fr = np.asarray(data).T if family == "horizontal" else np.asarray(data)
    length, depth = fr.shape
    n = 1
    while n < length:
        n *= 2
    hp = depth + n
    out = np.zeros((2, n, hp), dtype=np.int64)
    xs = np.arange(length)
    y0 = np.arange(hp)
    for sign in (0, 1):
        src = fr.astype(np.int64) if sign == 0 else fr[:, ::-1].astype(np.int64)
        pad = np.zeros((length, hp), dtype=np.int64)
        pad[:, :depth] = src
        for s in range(n):
            off = np.array(dyadic_pattern(n, s)[:length])
            ys = (y0[:, None] + off[None, :]) % hp
            out[sign, s] = pad[xs[None, :], ys].sum(axis=1)
    return out

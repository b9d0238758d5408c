"""Reed-Solomon encoding and simultaneous error/erasure decoding over GF(p).

The decoder is Berlekamp-Welch with erasure pre-puncturing: erased positions
are dropped, leaving an [n', k] word from which up to e = min(max_errors,
(n'-k)//2) errors are corrected by solving the linear key equation
N(x_i) = y_i * E(x_i) with E monic of degree e. Any solution yields the
message as N/E whenever the true error count is within budget; an
inconsistent system or a failed divisibility/agreement check signals a word
outside the decoding radius.

The kernel is numba-compiled and batched over rows so that a whole stripe of
symbol positions (which share evaluation points and erasure pattern) decodes
in one call.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from numba import njit

from .field import ERASED, EvalPoints, Poly, PrimeField


class DecodeFailure(Exception):
    """No polynomial within the error/erasure budget explains the word."""


def rs_encode(message: Poly, points: EvalPoints) -> list[int]:
    """Evaluate the message polynomial at every point (one symbol per node)."""
    return [message.eval(a) for a in points.alphas]


@njit(cache=True)
def _modpow(base: np.int64, exp: np.int64, p: np.int64) -> np.int64:
    result = 1
    base %= p
    while exp > 0:
        if exp & 1:
            result = (result * base) % p
        base = (base * base) % p
        exp >>= 1
    return result


@njit(cache=True)
def _decode_rows_kernel(words, alphas, k, max_errors, p):  # pragma: no cover - numba
    nrows, n = words.shape
    out = np.zeros((nrows, k), dtype=np.int64)
    ok = np.zeros(nrows, dtype=np.bool_)
    xs = np.empty(n, dtype=np.int64)
    ys = np.empty(n, dtype=np.int64)
    for bi in range(nrows):
        kept = 0
        for j in range(n):
            if words[bi, j] >= 0:
                xs[kept] = alphas[j]
                ys[kept] = words[bi, j] % p
                kept += 1
        if kept < k:
            continue
        e = (kept - k) // 2
        if e > max_errors:
            e = max_errors
        ncols = k + 2 * e
        a = np.zeros((kept, ncols + 1), dtype=np.int64)
        for i in range(kept):
            xp = 1
            for c in range(k + e):
                a[i, c] = xp
                xp = (xp * xs[i]) % p
            xp = 1
            for c in range(e):
                a[i, k + e + c] = (p - (ys[i] * xp) % p) % p
                xp = (xp * xs[i]) % p
            a[i, ncols] = (ys[i] * xp) % p  # xp == xs[i]**e
        # row reduction; free variables are pinned to zero afterwards
        piv_col = np.full(kept, -1, dtype=np.int64)
        row = 0
        for col in range(ncols):
            sel = -1
            for rr in range(row, kept):
                if a[rr, col] != 0:
                    sel = rr
                    break
            if sel < 0:
                continue
            if sel != row:
                for cc in range(ncols + 1):
                    tmp = a[sel, cc]
                    a[sel, cc] = a[row, cc]
                    a[row, cc] = tmp
            inv = _modpow(a[row, col], p - 2, p)
            for cc in range(col, ncols + 1):
                a[row, cc] = (a[row, cc] * inv) % p
            for rr in range(kept):
                if rr != row and a[rr, col] != 0:
                    f = a[rr, col]
                    for cc in range(col, ncols + 1):
                        a[rr, cc] = (a[rr, cc] - f * a[row, cc]) % p
            piv_col[row] = col
            row += 1
            if row == kept:
                break
        inconsistent = False
        for rr in range(row, kept):
            if a[rr, ncols] != 0:
                inconsistent = True
                break
        if inconsistent:
            continue
        sol = np.zeros(ncols, dtype=np.int64)
        for rr in range(row):
            sol[piv_col[rr]] = a[rr, ncols]
        # locator E = x^e + sol[k+e:], numerator N = sol[:k+e]
        rem = sol[: k + e].copy()
        quot = np.zeros(k, dtype=np.int64)
        divisible = True
        for d in range(k + e - 1, e - 1, -1):
            coef = rem[d]
            quot[d - e] = coef
            if coef != 0:
                rem[d] = 0
                for c in range(e):
                    rem[d - e + c] = (rem[d - e + c] - coef * sol[k + e + c]) % p
        for c in range(e):
            if rem[c] % p != 0:
                divisible = False
                break
        if not divisible:
            continue
        mismatches = 0
        for i in range(kept):
            acc = 0
            xp = 1
            for c in range(k):
                acc = (acc + quot[c] * xp) % p
                xp = (xp * xs[i]) % p
            if acc != ys[i]:
                mismatches += 1
        if mismatches > e:
            continue
        for c in range(k):
            out[bi, c] = quot[c] % p
        ok[bi] = True
    return out, ok


def decode_rows(
    words: np.ndarray,
    alphas: Sequence[int],
    k: int,
    max_errors: int,
    p: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Batched decode of several received words sharing evaluation points.

    ``words`` is (rows, n) int64 with -1 marking an erased position. Returns
    (coeffs, ok): coeffs is (rows, k) message coefficients (lowest degree
    first) and ok flags which rows decoded. Rows that fail are left zeroed.
    """
    words = np.ascontiguousarray(words, dtype=np.int64)
    if words.ndim != 2 or words.shape[1] != len(alphas):
        raise ValueError("words must be (rows, n) matching the evaluation points")
    if k < 1 or max_errors < 0:
        raise ValueError("need k >= 1 and max_errors >= 0")
    alpha_arr = np.asarray(alphas, dtype=np.int64)
    return _decode_rows_kernel(words, alpha_arr, k, max_errors, p)


def rs_decode(
    received: Sequence,
    points: EvalPoints,
    k: int,
    max_errors: int,
) -> Poly:
    """Decode one received word (values or ERASED) to its message polynomial.

    Raises DecodeFailure when no degree < k polynomial matches the non-erased
    symbols within ``max_errors`` corruptions.
    """
    if len(received) != len(points):
        raise ValueError("received word length must equal number of points")
    field = points.field
    row = np.array(
        [-1 if v is ERASED else v % field.p for v in received], dtype=np.int64
    ).reshape(1, -1)
    coeffs, ok = decode_rows(row, points.alphas, k, max_errors, field.p)
    if not ok[0]:
        raise DecodeFailure(
            f"no degree<{k} polynomial within {max_errors} errors explains the word"
        )
    return Poly.make(field, coeffs[0].tolist())

"""
Compiled stepping loops for long runs.

Each loop carries the xoshiro256** state in locals and reproduces the draw order of
the per-step Python path exactly: buyer index, seller index, then (money models only)
epsilon. Results are bit-identical to stepping one encounter at a time.
"""

from typing import Tuple

import numba
import numpy as np

from .rng import RngStream

_M32 = np.uint64(0xFFFFFFFF)
_U1 = np.uint64(1)
_U5 = np.uint64(5)
_U7 = np.uint64(7)
_U9 = np.uint64(9)
_U11 = np.uint64(11)
_U17 = np.uint64(17)
_U32 = np.uint64(32)
_U45 = np.uint64(45)
_U64 = np.uint64(64)
_TWO_POW_53_INV = 1.0 / 9007199254740992.0


@numba.jit(nopython=True)
def _rotl(x, k):
    return (x << k) | (x >> (_U64 - k))


@numba.jit(nopython=True)
def _next(s0, s1, s2, s3):
    result = _rotl(s1 * _U5, _U7) * _U9
    t = s1 << _U17
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, _U45)
    return s0, s1, s2, s3, result


@numba.jit(nopython=True)
def _mulhi(a, b):
    """High 64 bits of the 128-bit product a * b."""
    a_lo = a & _M32
    a_hi = a >> _U32
    b_lo = b & _M32
    b_hi = b >> _U32
    lo_lo = a_lo * b_lo
    lo_hi = a_lo * b_hi
    hi_lo = a_hi * b_lo
    mid = (lo_lo >> _U32) + (lo_hi & _M32) + (hi_lo & _M32)
    return a_hi * b_hi + (lo_hi >> _U32) + (hi_lo >> _U32) + (mid >> _U32)


@numba.jit(nopython=True)
def buyer_steps(goods, money, price, state, n_steps):
    """Run n_steps buyer encounters in place. Returns (trades, forced trades)."""
    s0 = state[0]
    s1 = state[1]
    s2 = state[2]
    s3 = state[3]
    n = np.uint64(goods.shape[0])
    n_less = n - _U1
    trades = 0
    forced = 0
    for _ in range(n_steps):
        s0, s1, s2, s3, x = _next(s0, s1, s2, s3)
        first = _mulhi(x, n)
        s0, s1, s2, s3, x = _next(s0, s1, s2, s3)
        second = _mulhi(x, n_less)
        if second >= first:
            second += _U1
        i = np.int64(first)
        j = np.int64(second)
        p = price[j]
        if goods[j] >= 1 and money[i] >= p and (p <= price[i] or goods[i] == 0):
            if p > price[i]:
                forced += 1
            money[i] -= p
            money[j] += p
            goods[i] += 1
            goods[j] -= 1
            price[i] = p
            trades += 1
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3
    return trades, forced


@numba.jit(nopython=True)
def exchange_steps(money, saving, state, n_steps):
    """
    Run n_steps pooled-split encounters in place; saving = 0 is the plain random
    split. Returns the number of encounters.
    """
    s0 = state[0]
    s1 = state[1]
    s2 = state[2]
    s3 = state[3]
    n = np.uint64(money.shape[0])
    n_less = n - _U1
    keep = 1.0 - saving
    for _ in range(n_steps):
        s0, s1, s2, s3, x = _next(s0, s1, s2, s3)
        first = _mulhi(x, n)
        s0, s1, s2, s3, x = _next(s0, s1, s2, s3)
        second = _mulhi(x, n_less)
        if second >= first:
            second += _U1
        s0, s1, s2, s3, x = _next(s0, s1, s2, s3)
        epsilon = np.float64(x >> _U11) * _TWO_POW_53_INV
        i = np.int64(first)
        j = np.int64(second)
        pool = money[i] + money[j]
        if saving == 0.0:
            new_i = min(epsilon * pool, pool)
        else:
            new_i = min(saving * money[i] + epsilon * (keep * pool), pool)
        money[i] = new_i
        money[j] = pool - new_i
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3
    return n_steps


def rng_state(rng: RngStream) -> np.ndarray:
    return np.array(rng.state, dtype=np.uint64)


def store_state(rng: RngStream, state: np.ndarray) -> None:
    rng.restore(tuple(int(w) for w in state))


def advance_buyer(
    goods: np.ndarray, money: np.ndarray, price: np.ndarray, rng: RngStream, n_steps: int
) -> Tuple[int, int]:
    state = rng_state(rng)
    trades, forced = buyer_steps(goods, money, price, state, n_steps)
    store_state(rng, state)
    return int(trades), int(forced)


def advance_exchange(money: np.ndarray, saving: float, rng: RngStream, n_steps: int) -> None:
    state = rng_state(rng)
    exchange_steps(money, float(saving), state, n_steps)
    store_state(rng, state)

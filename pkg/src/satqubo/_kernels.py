"""Compiled hot loops (numba).

The annealing kernel consumes SplitMix64 draws in a fixed order (N bit draws
per sweep, then one pick draw when at least one bit was accepted); the
pure-Python reference in annealer.py replicates it operation-for-operation,
and tests assert bit-identical results.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
_GAMMA = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)
_DOUBLE_SCALE = 1.0 / 9007199254740992.0

#: Above this value of (dE - E_off) / T the acceptance probability exp(-z)
#: is below the smallest positive 53-bit uniform, so `u < exp(-z)` reduces
#: to `u == 0`; the branch keeps the exact Metropolis semantics while
#: skipping exp() in the frozen phase.
_EXP_CUTOFF = 45.0

_POP16 = np.array([bin(i).count("1") for i in range(1 << 16)], dtype=np.uint8)


@njit(cache=True, nogil=True)
def _next_u64(state):
    state = state + _GAMMA
    z = state
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    z = z ^ (z >> U64(31))
    return z, state


@njit(cache=True, nogil=True)
def _next_double(state):
    z, state = _next_u64(state)
    return (z >> U64(11)) * _DOUBLE_SCALE, state


@njit(cache=True, nogil=True)
def anneal_run(qsym, diag, offset, t_start, decay, e_off_step, iterations, seed):
    """One annealing run; returns (best_x, best_e, best_iter, x, dE, e).

    Per iteration every bit is tested for acceptance with an independent
    uniform draw against min(1, exp(-(dE_i - E_off)/T)); one accepted bit is
    flipped uniformly at random; if none is accepted the offset grows by
    e_off_step, and any accepted flip resets it to zero.
    """
    state = seed
    n = diag.shape[0]
    x = np.zeros(n, dtype=np.uint8)
    for i in range(n):
        u, state = _next_double(state)
        x[i] = 1 if u < 0.5 else 0

    e = offset
    d_e = np.empty(n, dtype=np.float64)
    for i in range(n):
        if x[i]:
            e += diag[i]
        acc = diag[i]
        for j in range(n):
            if x[j]:
                acc += qsym[i, j]
                if j > i and x[i]:
                    e += qsym[i, j]
        d_e[i] = (1.0 - 2.0 * x[i]) * acc

    best_e = e
    best_iter = 0
    best_x = x.copy()
    t_cur = t_start
    e_off = 0.0
    accepted = np.empty(n, dtype=np.int64)

    for t in range(iterations):
        inv_t = 1.0 / t_cur
        cnt = 0
        for i in range(n):
            u, state = _next_double(state)
            arg = (d_e[i] - e_off) * inv_t
            if arg <= 0.0:
                ok = True
            elif arg < _EXP_CUTOFF:
                ok = u < np.exp(-arg)
            else:
                ok = u == 0.0
            if ok:
                accepted[cnt] = i
                cnt += 1
        if cnt > 0:
            u, state = _next_double(state)
            k = accepted[np.int64(u * cnt)]
            dk = d_e[k]
            e += dk
            sgn = 1.0 - 2.0 * x[k]
            x[k] = 1 - x[k]
            row = qsym[k]
            for j in range(n):
                d_e[j] += (1.0 - 2.0 * x[j]) * sgn * row[j]
            d_e[k] = -dk
            e_off = 0.0
            if e < best_e:
                best_e = e
                best_iter = t + 1
                for j in range(n):
                    best_x[j] = x[j]
        else:
            e_off += e_off_step
        t_cur *= decay
    return best_x, best_e, best_iter, x, d_e, e


@njit(cache=True, nogil=True)
def enumerate_energies(qsym, diag, offset):
    """Energies of all 2**N bitstrings, indexed by code (bit i = variable i).

    Walks the Gray-code sequence so each step is one incremental bit flip.
    """
    n = diag.shape[0]
    total = np.int64(1) << np.int64(n)
    out = np.empty(total, dtype=np.float64)
    x = np.zeros(n, dtype=np.uint8)
    d_e = diag.copy()
    e = offset
    out[0] = e
    for idx in range(1, total):
        k = 0
        while (idx >> k) & 1 == 0:
            k += 1
        dk = d_e[k]
        e += dk
        sgn = 1.0 - 2.0 * x[k]
        x[k] = 1 - x[k]
        row = qsym[k]
        for j in range(n):
            d_e[j] += (1.0 - 2.0 * x[j]) * sgn * row[j]
        d_e[k] = -dk
        out[idx ^ (idx >> 1)] = e
    return out


@njit(cache=True, nogil=True)
def counting_group(bins, n_bins):
    """Counting sort of config codes by energy bin.

    bins[i] is the bin index of code i; returns (counts per bin, codes
    grouped by bin (ascending inside each bin), bin start offsets).
    """
    total = bins.shape[0]
    counts = np.zeros(n_bins, dtype=np.int64)
    for i in range(total):
        counts[bins[i]] += 1
    offsets = np.zeros(n_bins + 1, dtype=np.int64)
    for b in range(n_bins):
        offsets[b + 1] = offsets[b] + counts[b]
    out = np.empty(total, dtype=np.uint32)
    pos = offsets[:-1].copy()
    for i in range(total):
        b = bins[i]
        out[pos[b]] = i
        pos[b] += 1
    return counts, out, offsets


@njit(cache=True, nogil=True)
def hamming_within(codes, n_bits):
    """Unordered-pair Hamming distance counts inside one configuration set."""
    counts = np.zeros(n_bits + 1, dtype=np.int64)
    n = codes.shape[0]
    for a in range(n):
        ca = codes[a]
        for b in range(a + 1, n):
            v = ca ^ codes[b]
            d = _POP16[v & np.uint32(0xFFFF)] + _POP16[(v >> np.uint32(16)) & np.uint32(0xFFFF)]
            counts[d] += 1
    return counts


@njit(cache=True, nogil=True)
def hamming_cross(codes_a, codes_b, n_bits):
    """All-pairs Hamming distance counts between two configuration sets."""
    counts = np.zeros(n_bits + 1, dtype=np.int64)
    for a in range(codes_a.shape[0]):
        ca = codes_a[a]
        for b in range(codes_b.shape[0]):
            v = ca ^ codes_b[b]
            d = _POP16[v & np.uint32(0xFFFF)] + _POP16[(v >> np.uint32(16)) & np.uint32(0xFFFF)]
            counts[d] += 1
    return counts

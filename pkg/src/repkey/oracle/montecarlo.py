"""Monte Carlo waiting times of a nested repeater chain, in units of T0.

Two strategies are simulated:

``waitall``
    Nested doubling. A level-i link needs two level-(i-1) links; once both
    exist the swap is tried and, on failure, both children are lost and must
    be rebuilt from scratch. The time of one swap attempt is the maximum of
    the two children's times, so per trial
    ``T_i = sum_{r=1}^{G_i} max(T_{i-1}, T'_{i-1})`` with ``G_i`` geometric.
``immediate``
    Time-stepped event simulation on 2^n segments. Every free segment tries
    once per step; a swap fires at any station the moment both neighbouring
    links exist, irrespective of nesting. A station at nesting level i uses
    ``p_es[i-1]``. A failed swap frees every segment its two links covered.

Each kernel has a numba implementation and a vectorised numpy one. They use
different random streams, so only their statistics agree. Trials are split
into fixed-size chunks, each seeded from ``numpy.random.SeedSequence(seed)``.
"""
from dataclasses import dataclass
import math

import numpy as np

from .. import _jit
from .._jit import njit
from ..errors import DomainError

__all__ = ["McEstimate", "mc_repeater", "STRATEGIES", "CHUNK_SIZE"]

STRATEGIES = ("waitall", "immediate")
CHUNK_SIZE = 1 << 16


@dataclass(frozen=True)
class McEstimate:
    mean_attempts: float
    std_error: float
    trials: int
    strategy: str
    seed: int
    backend: str = "numpy"

    @property
    def std(self):
        return self.std_error * math.sqrt(self.trials)


def _station_levels(n):
    """Nesting level of each station 0..2^n (interior stations only are meaningful)."""
    n_seg = 1 << n
    levels = np.zeros(n_seg + 1, dtype=np.int64)
    for s in range(1, n_seg):
        levels[s] = (s & -s).bit_length()
    return levels


def _station_order(n):
    levels = _station_levels(n)
    interior = np.arange(1, 1 << n, dtype=np.int64)
    return interior[np.argsort(levels[1:-1], kind="stable")], levels


# ---------------------------------------------------------------- waitall


def _waitall_numpy(p0, p_es, n, trials, rng):
    g_levels = []
    m = trials
    for i in range(n, 0, -1):
        g = rng.geometric(p_es[i - 1], size=m)
        g_levels.append(g)
        m = 2 * int(g.sum())
    t = rng.geometric(p0, size=m).astype(np.float64)
    for g in reversed(g_levels):
        pair_max = np.maximum(t[0::2], t[1::2])
        starts = np.concatenate(([0], np.cumsum(g)[:-1]))
        t = np.add.reduceat(pair_max, starts)
    return t


@njit
def _waitall_numba(p0, p_es, n, trials, seed):
    np.random.seed(seed)
    out = np.empty(trials, dtype=np.float64)
    counts = np.empty(n + 1, dtype=np.int64)
    for trial in range(trials):
        # top-down: how many retries each node needs
        g_store = []
        m = 1
        for i in range(n, 0, -1):
            g = np.empty(m, dtype=np.int64)
            total = 0
            for j in range(m):
                g[j] = np.random.geometric(p_es[i - 1])
                total += g[j]
            g_store.append(g)
            counts[i] = m
            m = 2 * total
        t = np.empty(m, dtype=np.float64)
        for j in range(m):
            t[j] = np.random.geometric(p0)
        # bottom-up: max over sibling pairs, summed over retries
        for lvl in range(n):
            g = g_store[n - 1 - lvl]
            nxt = np.empty(g.shape[0], dtype=np.float64)
            pos = 0
            for j in range(g.shape[0]):
                acc = 0.0
                for r in range(g[j]):
                    a = t[2 * pos]
                    b = t[2 * pos + 1]
                    acc += a if a > b else b
                    pos += 1
                nxt[j] = acc
            t = nxt
        out[trial] = t[0]
    return out


# -------------------------------------------------------------- immediate


def _immediate_numpy(p0, p_es, n, trials, rng):
    n_seg = 1 << n
    order, levels = _station_order(n)
    seg = np.arange(n_seg)
    right = np.full((trials, n_seg + 1), -1, dtype=np.int64)
    left = np.full((trials, n_seg + 1), -1, dtype=np.int64)
    busy = np.zeros((trials, n_seg), dtype=bool)
    ids = np.arange(trials)
    out = np.empty(trials, dtype=np.float64)
    t = 0
    while ids.size:
        t += 1
        new = ~busy & (rng.random(busy.shape) < p0)
        rows, cols = np.nonzero(new)
        right[rows, cols] = cols + 1
        left[rows, cols + 1] = cols
        busy |= new
        swapped = True
        while swapped:
            swapped = False
            for s in order:
                rows = np.nonzero((left[:, s] >= 0) & (right[:, s] >= 0))[0]
                if rows.size == 0:
                    continue
                swapped = True
                a, b = left[rows, s], right[rows, s]
                left[rows, s] = -1
                right[rows, s] = -1
                ok = rng.random(rows.size) < p_es[levels[s] - 1]
                right[rows, a] = np.where(ok, b, -1)
                left[rows, b] = np.where(ok, a, -1)
                bad = ~ok
                if bad.any():
                    r, lo, hi = rows[bad], a[bad], b[bad]
                    freed = (seg[None, :] >= lo[:, None]) & (seg[None, :] < hi[:, None])
                    busy[r] &= ~freed
        done = right[:, 0] == n_seg
        if done.any():
            out[ids[done]] = t
            keep = ~done
            ids, right, left, busy = ids[keep], right[keep], left[keep], busy[keep]
    return out


@njit
def _immediate_numba(p0, p_es, n, trials, seed, order, levels):
    np.random.seed(seed)
    n_seg = 1 << n
    out = np.empty(trials, dtype=np.float64)
    right = np.empty(n_seg + 1, dtype=np.int64)
    left = np.empty(n_seg + 1, dtype=np.int64)
    busy = np.empty(n_seg, dtype=np.bool_)
    for trial in range(trials):
        right[:] = -1
        left[:] = -1
        busy[:] = False
        t = 0
        while right[0] != n_seg:
            t += 1
            for j in range(n_seg):
                if not busy[j] and np.random.random() < p0:
                    right[j] = j + 1
                    left[j + 1] = j
                    busy[j] = True
            swapped = True
            while swapped:
                swapped = False
                for s in order:
                    if left[s] >= 0 and right[s] >= 0:
                        swapped = True
                        a = left[s]
                        b = right[s]
                        left[s] = -1
                        right[s] = -1
                        if np.random.random() < p_es[levels[s] - 1]:
                            right[a] = b
                            left[b] = a
                        else:
                            right[a] = -1
                            left[b] = -1
                            for j in range(a, b):
                                busy[j] = False
        out[trial] = t
    return out


# ------------------------------------------------------------------ driver


def _run_chunk(strategy, p0, p_es, n, size, child, use_numba):
    if use_numba:
        seed = int(child.generate_state(1, dtype=np.uint32)[0])
        if strategy == "waitall":
            return _waitall_numba(p0, p_es, n, size, seed)
        order, levels = _station_order(n)
        return _immediate_numba(p0, p_es, n, size, seed, order, levels)
    rng = np.random.default_rng(child)
    if strategy == "waitall":
        return _waitall_numpy(p0, p_es, n, size, rng)
    return _immediate_numpy(p0, p_es, n, size, rng)


def mc_repeater(p0, p_es, n, trials, seed, strategy="waitall", use_numba=None):
    """Estimate the mean number of T0 rounds until an end-to-end link exists.

    Parameters
    ----------
    p0 : float
        Per-attempt success probability of an elementary link.
    p_es : sequence of float
        Swap success probability per nesting level (length ``n``).
    n : int
        Nesting levels; the chain has ``2**n`` segments.
    trials : int
        Number of simulated end-to-end links.
    seed : int
        Root seed; identical ``(seed, trials)`` give identical output.
    strategy : {"waitall", "immediate"}
    use_numba : bool, optional
        Override the backend chosen by ``REPKEY_DISABLE_NUMBA``.
    """
    p0 = float(p0)
    n = int(n)
    trials = int(trials)
    if not 0.0 < p0 <= 1.0:
        raise DomainError(f"p0={p0!r} outside (0, 1]")
    if n < 0:
        raise DomainError(f"nesting level n={n!r} is negative")
    p_es = np.asarray(list(p_es) if p_es is not None else [], dtype=np.float64)
    if p_es.size == 0:
        p_es = np.ones(n)
    if p_es.size != n:
        raise DomainError(f"expected {n} swapping probabilities, got {p_es.size}")
    if np.any((p_es <= 0.0) | (p_es > 1.0)):
        raise DomainError(f"swapping probabilities {p_es.tolist()} outside (0, 1]")
    if trials < 1:
        raise DomainError(f"trials={trials!r} must be at least 1")
    if strategy not in STRATEGIES:
        raise DomainError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    if use_numba is None:
        use_numba = _jit.USE_NUMBA
    use_numba = bool(use_numba) and _jit.numba is not None

    n_chunks = -(-trials // CHUNK_SIZE)
    children = np.random.SeedSequence(int(seed)).spawn(n_chunks)
    total = 0.0
    total_sq = 0.0
    for c, child in enumerate(children):
        size = min(CHUNK_SIZE, trials - c * CHUNK_SIZE)
        x = _run_chunk(strategy, p0, p_es, n, size, child, use_numba)
        total += float(np.sum(x))
        total_sq += float(np.sum(x * x))
    mean = total / trials
    if trials > 1:
        var = max(total_sq - trials * mean * mean, 0.0) / (trials - 1)
        se = math.sqrt(var / trials)
    else:
        se = 0.0
    return McEstimate(
        mean_attempts=mean,
        std_error=se,
        trials=trials,
        strategy=strategy,
        seed=int(seed),
        backend="numba" if use_numba else "numpy",
    )

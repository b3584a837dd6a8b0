"""Cycle-count empirical processes X1-X5 and their Brownian references.

Every process is piecewise algebraic between jump points of the cumulative
cycle-count path, so sups come from endpoint evaluation (each branch is
monotone in u) and L2 norms from closed-form antiderivatives. A quadrature
fallback cross-checks the closed forms in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .laws import EsfParams, Partition
from .sampling import RngState, sample_feller

_PROCESSES = ("X1", "X2", "X3", "X4", "X5")
DEFAULT_EPS = 0.01


@dataclass(frozen=True)
class StepPath:
    """Right-continuous step path u -> S(u) = sum of cycle counts j <= n^u.

    jump_u holds log j / log n for each cycle size j present; cum_counts the
    cumulative count at each jump; k_total the final block count.
    """

    n: int
    jump_u: np.ndarray
    cum_counts: np.ndarray
    k_total: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("paths need n >= 2 (log n vanishes at n = 1)")
        if np.any(np.diff(self.jump_u) <= 0.0):
            raise ValueError("jump locations must be strictly increasing")
        if np.any(np.diff(self.cum_counts) <= 0):
            raise ValueError("cumulative counts must be strictly increasing")
        if self.cum_counts.size and int(self.cum_counts[-1]) != self.k_total:
            raise ValueError("final cumulative count must equal k_total")

    def value_at(self, u: float) -> int:
        """S(u): cumulative count at the largest jump <= u."""
        i = int(np.searchsorted(self.jump_u, u, side="right")) - 1
        return int(self.cum_counts[i]) if i >= 0 else 0


def build_path(a: Partition) -> StepPath:
    """Step representation of u -> sum_{j <= n^u} c_j for a partition."""
    n = a.n
    if n < 2:
        raise ValueError("paths need n >= 2 (log n vanishes at n = 1)")
    js = np.flatnonzero(a.counts) + 1
    cum = np.cumsum(a.counts[js - 1])
    return StepPath(n, np.log(js) / math.log(n), cum, int(cum[-1]))


@lru_cache(maxsize=4)
def _harmonic_cumsum(n: int) -> np.ndarray:
    """H_1..H_n as a read-only prefix-sum table."""
    h = np.cumsum(1.0 / np.arange(1, n + 1))
    h.setflags(write=False)
    return h


def _intervals(path: StepPath) -> list[tuple[float, float, int]]:
    """Constancy intervals (a, b, S) with S = S(u) on [a, b); covers [0, 1]."""
    cuts = np.unique(np.concatenate(([0.0], path.jump_u, [1.0])))
    out = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        out.append((float(a), float(b), path.value_at(float(a))))
    if not out:
        out.append((0.0, 1.0, path.value_at(0.0)))
    return out


def process_value(
    path: StepPath, theta: float, which: str, u: float, eps: float = DEFAULT_EPS
) -> float:
    """Pointwise value of the chosen process at u (0 where an indicator cuts)."""
    if which not in _PROCESSES:
        raise ValueError(f"unknown process {which!r}")
    big_l = math.log(path.n)
    s = float(path.value_at(u))
    k = path.k_total
    if which == "X1":
        return (s - u * theta * big_l) / math.sqrt(theta * big_l)
    if which == "X2":
        j = int(math.floor(path.n**u + 1e-9))
        j = min(max(j, 1), path.n)
        h = float(_harmonic_cumsum(path.n)[j - 1])
        return (s - theta * h) / math.sqrt(theta * h)
    if which == "X3":
        if not u > eps / big_l:
            return 0.0
        return (s - u * theta * big_l) / math.sqrt(theta * big_l * u)
    if which == "X4":
        return math.sqrt(theta * big_l) * (s / k - u)
    if not eps / big_l < u < 1.0 - eps / big_l:
        return 0.0
    return math.sqrt(theta * big_l) * (s / k - u) / math.sqrt(u * (1.0 - u))


def functional_stat(
    path: StepPath, theta: float, which: str, eps: float = DEFAULT_EPS
) -> tuple[float, float]:
    """Exact (sup |X|, integral X^2) of a process along one path.

    Sups evaluate both endpoints of every constancy interval (each branch
    is monotone in u); L2 integrals use closed-form antiderivatives. X3 and
    X5 are cut to u > eps/log n (and u < 1 - eps/log n for X5).
    """
    if which not in _PROCESSES:
        raise ValueError(f"unknown process {which!r}")
    if not eps > 0.0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    big_l = math.log(path.n)
    tl = theta * big_l
    rt = math.sqrt(tl)
    if which == "X2":
        n = path.n
        js = np.arange(1, n + 1)
        u_all = np.log(js) / big_l
        idx = np.searchsorted(path.jump_u, u_all, side="right") - 1
        s_all = np.where(idx >= 0, path.cum_counts[np.maximum(idx, 0)], 0)
        h_all = _harmonic_cumsum(n)
        v = (s_all - theta * h_all) / np.sqrt(theta * h_all)
        sup = float(np.abs(v).max())
        widths = (np.log(js[1:]) - np.log(js[:-1])) / big_l
        l2 = float(v[:-1] ** 2 @ widths)
        return sup, l2
    sup = 0.0
    l2 = 0.0
    w0 = eps / big_l
    w1 = 1.0 - eps / big_l
    for a, b, s_int in _intervals(path):
        s = float(s_int)
        if which == "X1":
            sup = max(sup, abs(s - a * tl) / rt, abs(s - b * tl) / rt)
            big_a = s / tl
            l2 += tl * ((big_a - a) ** 3 - (big_a - b) ** 3) / 3.0
        elif which == "X3":
            lo = max(a, w0)
            if b <= lo:
                continue
            sup = max(
                sup,
                abs(s - lo * tl) / math.sqrt(tl * lo),
                abs(s - b * tl) / math.sqrt(tl * b),
            )
            l2 += (
                s * s * (math.log(b) - math.log(lo))
                - 2.0 * s * tl * (b - lo)
                + tl * tl * (b * b - lo * lo) / 2.0
            ) / tl
        elif which == "X4":
            big_a = s / path.k_total
            sup = max(sup, rt * abs(big_a - a), rt * abs(big_a - b))
            l2 += tl * ((big_a - a) ** 3 - (big_a - b) ** 3) / 3.0
        else:
            lo, hi = max(a, w0), min(b, w1)
            if lo >= hi:
                continue
            big_a = s / path.k_total
            sup = max(
                sup,
                rt * abs(big_a - lo) / math.sqrt(lo * (1.0 - lo)),
                rt * abs(big_a - hi) / math.sqrt(hi * (1.0 - hi)),
            )
            g_hi = _x5_antiderivative(big_a, hi)
            g_lo = _x5_antiderivative(big_a, lo)
            l2 += tl * (g_hi - g_lo)
    return sup, l2


def _x5_antiderivative(big_a: float, u: float) -> float:
    """Antiderivative of (A-u)^2/(u(1-u)): A^2 log u - (A-1)^2 log(1-u) - u."""
    first = big_a * big_a * math.log(u) if big_a != 0.0 else 0.0
    second = (big_a - 1.0) ** 2 * math.log1p(-u) if big_a != 1.0 else 0.0
    return first - second - u


@dataclass(frozen=True)
class FunctionalSample:
    """Monte Carlo draws of one functional of one process."""

    which: str
    stat_kind: str
    values: np.ndarray
    meta: dict

    def __post_init__(self) -> None:
        if self.which not in _PROCESSES:
            raise ValueError(f"unknown process {self.which!r}")
        if self.stat_kind not in ("sup", "l2"):
            raise ValueError(f"stat_kind must be sup or l2, got {self.stat_kind!r}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("functional values must be finite")


def mc_functionals(
    params: EsfParams,
    which: str,
    stat_kind: str,
    eps: float,
    replicates: int,
    rng: RngState,
) -> FunctionalSample:
    """Sampled functional values over independent partition draws.

    One derived substream per replicate; the Feller coupling draws the
    partition (extension disabled, only C^n is needed).
    """
    if replicates < 10**3:
        raise ValueError(f"need at least 1000 replicates, got {replicates}")
    idx = 0 if stat_kind == "sup" else 1
    if stat_kind not in ("sup", "l2"):
        raise ValueError(f"stat_kind must be sup or l2, got {stat_kind!r}")
    values = np.empty(replicates, dtype=np.float64)
    for i in range(replicates):
        s = sample_feller(params, rng.substream(i), b_max=0)
        path = build_path(s.c_n)
        values[i] = functional_stat(path, params.theta, which, eps)[idx]
    meta = {
        "n": params.n,
        "theta": params.theta,
        "eps": eps,
        "seed": rng.seed,
        "stream": rng.stream,
    }
    return FunctionalSample(which, stat_kind, values, meta)


def reference_functionals(
    which: str,
    stat_kind: str,
    eps: float,
    grid_m: int,
    replicates: int,
    rng: RngState,
) -> FunctionalSample:
    """The same functional evaluated on simulated Brownian limits.

    X1/X2/X3 use Brownian motion, X4/X5 the bridge; X3 weights by sqrt(u)
    and X5 by sqrt(u(1-u)). eps is the absolute u-cutoff of the weighted
    windows (mirror an mc run by passing its eps / log n). Paths live on a
    uniform grid: sups by grid maxima, L2 by the trapezoid rule.
    """
    if which not in _PROCESSES:
        raise ValueError(f"unknown process {which!r}")
    if stat_kind not in ("sup", "l2"):
        raise ValueError(f"stat_kind must be sup or l2, got {stat_kind!r}")
    if grid_m < 2**10:
        raise ValueError(f"grid_m must be at least 1024, got {grid_m}")
    if replicates < 100:
        raise ValueError(f"need at least 100 replicates, got {replicates}")
    if which in ("X3", "X5") and not 0.0 < eps < 0.5:
        raise ValueError(f"weighted references need eps in (0, 0.5), got {eps!r}")
    t = np.arange(grid_m + 1) / grid_m
    if which == "X3":
        window = t >= eps
    elif which == "X5":
        window = (t >= eps) & (t <= 1.0 - eps)
    else:
        window = np.ones(t.size, dtype=bool)
    weight2 = {
        "X1": np.ones(t.size),
        "X2": np.ones(t.size),
        "X3": np.where(t > 0.0, t, np.inf),
        "X4": np.ones(t.size),
        "X5": np.where((t > 0.0) & (t < 1.0), t * (1.0 - t), np.inf),
    }[which]
    t_sub = t[window]
    w2_sub = weight2[window]
    gen = rng.generator()
    values = np.empty(replicates, dtype=np.float64)
    scale = 1.0 / math.sqrt(grid_m)
    chunk = max(1, min(replicates, (1 << 25) // (grid_m + 1)))
    done = 0
    while done < replicates:
        m = min(chunk, replicates - done)
        incr = gen.standard_normal((m, grid_m)) * scale
        b = np.concatenate([np.zeros((m, 1)), np.cumsum(incr, axis=1)], axis=1)
        if which in ("X4", "X5"):
            b = b - t[None, :] * b[:, -1:]
        v = b[:, window]
        if stat_kind == "sup":
            values[done : done + m] = np.abs(v / np.sqrt(w2_sub)).max(axis=1)
        else:
            values[done : done + m] = np.trapezoid(v * v / w2_sub, t_sub, axis=1)
        done += m
    meta = {
        "grid_m": grid_m,
        "eps": eps,
        "seed": rng.seed,
        "stream": rng.stream,
    }
    return FunctionalSample(which, stat_kind, values, meta)


def ks_distance(sample, reference) -> float:
    """Kolmogorov-Smirnov distance, one-sample (callable cdf) or two-sample."""
    xs = np.sort(np.asarray(getattr(sample, "values", sample), dtype=np.float64))
    m = xs.size
    if m < 100:
        raise ValueError(f"need at least 100 sample points, got {m}")
    if callable(reference):
        cdf = np.array([reference(x) for x in xs])
        grid = np.arange(m, dtype=np.float64)
        return float(
            np.maximum(cdf - grid / m, (grid + 1.0) / m - cdf).max()
        )
    ys = np.sort(np.asarray(getattr(reference, "values", reference), dtype=np.float64))
    if ys.size < 100:
        raise ValueError(f"need at least 100 reference points, got {ys.size}")
    both = np.concatenate([xs, ys])
    f1 = np.searchsorted(xs, both, side="right") / m
    f2 = np.searchsorted(ys, both, side="right") / ys.size
    return float(np.abs(f1 - f2).max())

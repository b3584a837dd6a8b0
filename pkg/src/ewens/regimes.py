"""Growth-regime classification, K_n standardization, and limit laws.

A growth rule theta(n) = a * n^beta is classified into Case A (n/theta ->
infinity), B (n/theta -> c), C1/C2/C3 (n/theta -> 0, split by n^2/theta).
Power laws span all five cases; anything else (say theta = n^2/log n) does
not fit the type and is rejected by construction rather than misclassified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .laws import EsfParams, Pmf, poisson_logpmf
from .sampling import RngState, sample_kn
from .special import harmonic_number, log_rising_factorial, normal_cdf


@dataclass(frozen=True)
class GrowthRule:
    """theta(n) = coeff * n**exponent, nondecreasing in n."""

    coeff: float
    exponent: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.coeff) and self.coeff > 0.0):
            raise ValueError(f"coeff must be positive and finite, got {self.coeff!r}")
        if not (math.isfinite(self.exponent) and self.exponent >= 0.0):
            raise ValueError(
                f"exponent must be nonnegative and finite, got {self.exponent!r}"
            )

    def theta_at(self, n: int) -> float:
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        return self.coeff * float(n) ** self.exponent


@dataclass(frozen=True)
class RegimeCase:
    """Case label with the limit constant where one exists (B and C2)."""

    label: str
    c: float | None = None

    def __post_init__(self) -> None:
        if self.label not in ("A", "B", "C1", "C2", "C3"):
            raise ValueError(f"unknown case label {self.label!r}")
        if (self.c is not None) != (self.label in ("B", "C2")):
            raise ValueError(f"constant c must be present iff case is B or C2")
        if self.c is not None and not self.c > 0.0:
            raise ValueError(f"limit constant must be positive, got {self.c!r}")


def classify(rule: GrowthRule) -> RegimeCase:
    """Map the exponent to the case: <1 A, =1 B, (1,2) C1, =2 C2, >2 C3.

    For B the constant is c = lim n/theta = 1/coeff; for C2 it is
    c = lim n^2/theta = 1/coeff.
    """
    beta = rule.exponent
    if beta < 1.0:
        return RegimeCase("A")
    if beta == 1.0:
        return RegimeCase("B", 1.0 / rule.coeff)
    if beta < 2.0:
        return RegimeCase("C1")
    if beta == 2.0:
        return RegimeCase("C2", 1.0 / rule.coeff)
    return RegimeCase("C3")


def lln_constant(case: RegimeCase) -> float:
    """Limit of K_n over its natural normalizer for the given case.

    Case A: K_n/(theta log(n/theta)) -> 1. Case B: K_n/n -> log(1+c)/c
    with c = lim n/theta, written so the two degenerate limits match the
    neighbours (-> 1 as c -> 0 like Case C, -> 0 as c -> infinity like
    Case A). Cases C1-C3: K_n/n -> 1.
    """
    if case.label == "B":
        return math.log1p(case.c) / case.c
    return 1.0


@dataclass(frozen=True)
class Standardization:
    """mu = theta*log(1+n/theta), sigma2 = theta*(log(1+n/theta) - n/(n+theta))."""

    mu: float
    sigma2: float

    def z(self, k: float) -> float:
        return (k - self.mu) / math.sqrt(self.sigma2)


def standardize(params: EsfParams) -> Standardization:
    """Standardization constants for Z_n = (K_n - mu)/sigma; needs n >= 2."""
    n, theta = params.n, params.theta
    if n < 2:
        raise ValueError("standardization needs n >= 2 (sigma vanishes at n = 1)")
    log_term = math.log1p(n / theta)
    return Standardization(theta * log_term, theta * (log_term - n / (n + theta)))


@dataclass(frozen=True)
class LawDescriptor:
    """Limit law of Z_n: a cdf plus explicit atoms when the law is discrete.

    kind "normal" has no atoms; "c2_lattice" carries atoms at
    (c/2 - k)/sqrt(c/2) with Poisson(c/2) weights; "point_mass" sits at 0.
    """

    kind: str
    atoms: np.ndarray | None = None
    weights: np.ndarray | None = None

    def cdf(self, x: float) -> float:
        if self.kind == "normal":
            return normal_cdf(x)
        total = 0.0
        for a, w in zip(self.atoms, self.weights):
            if a <= x:
                total += w
        return min(1.0, total)


def limit_law(case: RegimeCase) -> LawDescriptor:
    """Limit of Z_n: N(0,1) in A/B/C1, a reflected Poisson lattice in C2
    (atoms (c/2-k)/sqrt(c/2), k >= 0), the point mass at 0 in C3."""
    if case.label in ("A", "B", "C1"):
        return LawDescriptor("normal")
    if case.label == "C3":
        return LawDescriptor(
            "point_mass", np.array([0.0]), np.array([1.0])
        )
    lam = case.c / 2.0
    law = Pmf.poisson(lam, tail_eps=1e-16)
    ks = np.array(law.support(), dtype=np.float64)
    atoms = (lam - ks) / math.sqrt(lam)
    return LawDescriptor("c2_lattice", atoms, law.probs.copy())


def singleton_full_prob(params: EsfParams) -> float:
    """P(C_1^n = n) = theta^n / (theta)_n, evaluated in log space."""
    n, theta = params.n, params.theta
    return math.exp(n * math.log(theta) - log_rising_factorial(theta, n))


def sca_display_sum(params: EsfParams, k: int, r: int) -> float:
    """Poisson tail sum sum_{x<k} e^(-delta_r) delta_r^x / x! with
    delta_r = theta * H_r; approximates P(S_n^k > r) for the k-th shortest
    cycle size S_n^k."""
    if k < 1 or r < 1 or r > params.n:
        raise ValueError(f"need k >= 1 and 1 <= r <= n, got k={k} r={r}")
    delta = params.theta * harmonic_number(r)
    return float(math.fsum(math.exp(poisson_logpmf(x, delta)) for x in range(k)))


def shortest_cycle_cdf(params: EsfParams, k: int, r: int) -> float:
    """Approximation to P(S_n^k <= r) = P(C_1 + ... + C_r >= k)."""
    return 1.0 - sca_display_sum(params, k, r)


@dataclass(frozen=True)
class C2Report:
    """Finite-n quantities the C2/C3 limits predict."""

    p_singleton_exact: float
    p_singleton_approx: float
    cycle2_law: Pmf


def c2_predictions(params: EsfParams) -> C2Report:
    """Exact P(C_1^n = n), its e^(-n^2/(2 theta)) approximation, and the
    predicted Poisson(n^2/(2 theta)) law of the 2-cycle count."""
    n, theta = params.n, params.theta
    lam = n * n / (2.0 * theta)
    return C2Report(
        singleton_full_prob(params),
        math.exp(-lam),
        Pmf.poisson(lam),
    )


def zn_mc_distribution(
    rule: GrowthRule, n: int, replicates: int, rng: RngState
) -> np.ndarray:
    """Standardized Monte Carlo draws (K_n - mu)/sigma under the rule.

    One independent substream per replicate; K_n is drawn exactly from its
    Bernoulli representation.
    """
    if replicates < 10**3:
        raise ValueError(f"need at least 1000 replicates, got {replicates}")
    params = EsfParams(n, rule.theta_at(n))
    std = standardize(params)
    sigma = math.sqrt(std.sigma2)
    out = np.empty(replicates, dtype=np.float64)
    for i in range(replicates):
        out[i] = (sample_kn(params, rng.substream(i)) - std.mu) / sigma
    return out


def standardized_lattice_tv(z_values: np.ndarray, c: float) -> float:
    """TV between standardized draws mapped back to the C2 lattice and
    Poisson(c/2).

    Each draw is inverted to k = rint(c/2 - z*sqrt(c/2)); draws landing off
    the lattice or below 0 count fully against the distance.
    """
    lam = c / 2.0
    k_real = lam - np.asarray(z_values, dtype=np.float64) * math.sqrt(lam)
    k_hat = np.rint(k_real)
    on_lattice = (np.abs(k_real - k_hat) < 0.25) & (k_hat >= 0.0)
    m = z_values.size
    invalid = float(np.count_nonzero(~on_lattice)) / m
    ks = k_hat[on_lattice].astype(np.int64)
    kmax = int(ks.max(initial=0))
    emp = np.bincount(ks, minlength=kmax + 1) / m
    pois = np.exp([poisson_logpmf(k, lam) for k in range(kmax + 1)])
    tail = max(0.0, 1.0 - float(pois.sum()))
    return 0.5 * (float(np.abs(emp - pois).sum()) + tail + invalid)

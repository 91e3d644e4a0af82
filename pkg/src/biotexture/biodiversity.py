"""Species richness, abundance and evenness indices of a gray-level histogram.

All logarithms are natural.  Degenerate inputs return finite conventional
values; :func:`biodiversity_indices` records which conventions were used in
``flags``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ecosystem import InvalidInputError, SpeciesHistogram

FISHER_SENTINEL = 1e6
FISHER_MAX_ITER = 200
_FISHER_BRACKET = (1e-6, 1e6)


class NumericFailure(ArithmeticError):
    pass


def margalef(hist: SpeciesHistogram) -> float:
    n = hist.total
    if n < 2:
        raise InvalidInputError("Margalef index needs at least two individuals")
    return (hist.richness - 1) / math.log(n)


def menhinick(hist: SpeciesHistogram) -> float:
    # S / N, not the textbook S / sqrt(N)
    return hist.richness / hist.total


def berger_parker(hist: SpeciesHistogram) -> float:
    return hist.max_count / hist.total


def _fisher_residual(alpha: float, s: int, n: int) -> float:
    return alpha * math.log1p(n / alpha) - s


def _solve_fisher(s: int, n: int) -> tuple[float, bool]:
    if s >= n:
        return FISHER_SENTINEL, True
    lo, hi = _FISHER_BRACKET
    # alpha * ln(1 + n/alpha) increases from 0 to n, so expand upward only.
    while _fisher_residual(hi, s, n) < 0:
        hi *= 10.0
        if hi > 1e300:
            raise NumericFailure(f"no sign change bracketing Fisher alpha (S={s}, N={n})")
    while _fisher_residual(lo, s, n) > 0:
        lo /= 10.0
        if lo < 1e-300:
            raise NumericFailure(f"no sign change bracketing Fisher alpha (S={s}, N={n})")
    for _ in range(FISHER_MAX_ITER):
        mid = math.sqrt(lo * hi)  # geometric bisection: the bracket spans decades
        if not lo < mid < hi:
            break
        if _fisher_residual(mid, s, n) < 0:
            lo = mid
        else:
            hi = mid
    r_lo, r_hi = _fisher_residual(lo, s, n), _fisher_residual(hi, s, n)
    return (lo if abs(r_lo) <= abs(r_hi) else hi), False


def fisher_alpha_from_totals(s: int, n: int) -> float:
    """Fisher's alpha for ``s`` species among ``n`` individuals."""
    if not 1 <= s <= n:
        raise ValueError(f"need 1 <= S <= N, got S={s}, N={n}")
    return _solve_fisher(int(s), int(n))[0]


def fisher_alpha(hist: SpeciesHistogram) -> float:
    """Fisher's alpha: the root of ``S = alpha * ln(1 + N / alpha)``.

    When every pixel has its own gray level (S = N) the root is at infinity
    and :data:`FISHER_SENTINEL` is returned instead.
    """
    return _solve_fisher(hist.richness, hist.total)[0]


def _kempton_taylor(hist: SpeciesHistogram) -> tuple[float, bool]:
    abundances = np.sort(hist.counts)
    s = abundances.size
    r1 = int(abundances[math.ceil(s / 4) - 1])
    r2 = int(abundances[math.ceil(3 * s / 4) - 1])
    if r1 == r2:
        return 0.0, True
    n_r1 = int(np.count_nonzero(abundances == r1))
    n_r2 = int(np.count_nonzero(abundances == r2))
    middle = int(np.count_nonzero((abundances > r1) & (abundances < r2)))
    return (0.5 * n_r1 + middle + 0.5 * n_r2) / math.log(r2 / r1), False


def kempton_taylor(hist: SpeciesHistogram) -> float:
    """Interquartile slope of the cumulative abundance curve.

    Quartiles are the abundances at ranks ceil(S/4) and ceil(3S/4) of the
    ascending abundance list; returns 0 when they coincide.
    """
    return _kempton_taylor(hist)[0]


def mcintosh_evenness(hist: SpeciesHistogram) -> float:
    n, s = hist.total, hist.richness
    sum_sq = int(np.dot(hist.counts, hist.counts))
    return math.sqrt(sum_sq / ((n - s + 1) ** 2 + s - 1))


def shannon_wiener(hist: SpeciesHistogram) -> float:
    p = hist.counts / hist.total
    return float(-np.sum(p * np.log(p)))


@dataclass(frozen=True)
class BiodiversityIndices:
    d_mg: float
    d_mn: float
    d_bp: float
    d_f: float
    d_kt: float
    e_m: float
    d_sw: float
    flags: tuple[str, ...] = ()

    def values(self) -> tuple[float, ...]:
        return (self.d_mg, self.d_mn, self.d_bp, self.d_f, self.d_kt, self.e_m, self.d_sw)


BIODIVERSITY_NAMES = ("d_mg", "d_mn", "d_bp", "d_f", "d_kt", "e_m", "d_sw")


def biodiversity_indices(hist: SpeciesHistogram) -> BiodiversityIndices:
    flags = []
    alpha, saturated = _solve_fisher(hist.richness, hist.total)
    if saturated:
        flags.append("fisher_alpha_saturated")
    kt, degenerate = _kempton_taylor(hist)
    if degenerate:
        flags.append("kempton_taylor_degenerate")
    return BiodiversityIndices(
        d_mg=margalef(hist),
        d_mn=menhinick(hist),
        d_bp=berger_parker(hist),
        d_f=alpha,
        d_kt=kt,
        e_m=mcintosh_evenness(hist),
        d_sw=shannon_wiener(hist),
        flags=tuple(flags),
    )

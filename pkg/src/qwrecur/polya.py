"""Polya numbers, decay-exponent fits and recurrence classification.

The Polya number of a walk under the sequential-measurement scheme is

    P = 1 - prod_{t >= 1} (1 - p0(t)),

where the product runs over positive even times (p0 vanishes at odd t).
Partial products are accumulated as sums of ``log1p(-p0)`` so that
1 - P_n stays accurate when it becomes tiny.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy import stats
from scipy.special import gammaln

from .coins import fourier_coin, named_state
from .evolution import ReturnSeries, evolve_collect

__all__ = [
    "MARGIN",
    "LOCALIZATION_FACTOR",
    "PolyaEstimate",
    "ClassicalPolya",
    "Classification",
    "CriterionTable",
    "FourierSurfaceModel",
    "FourierSurface",
    "polya_partial",
    "polya_at_cutoffs",
    "tensor_polya_estimate",
    "fit_decay_exponent",
    "classify_recurrence",
    "classical_return_series",
    "classical_polya",
    "criterion_demo",
    "survival_cutoff",
    "fourier_g",
    "fit_fourier_surface",
    "fourier_polya_surface",
]

MARGIN = 0.15
LOCALIZATION_FACTOR = 10.0


@dataclass
class PolyaEstimate:
    n_terms: int
    partial_product: float
    partial_sum: float
    fitted_exponent: float | None = None
    exponent_stderr: float | None = None
    classification: str | None = None

    @property
    def series_sum(self) -> float:
        """Partial sum including the t = 0 term p0(0) = 1."""
        return 1.0 + self.partial_sum


def _log_survival(terms: NDArray) -> NDArray:
    return np.cumsum(np.log1p(-np.asarray(terms, dtype=float)))


def polya_partial(series: ReturnSeries, n: int | None = None) -> PolyaEstimate:
    """P_n over the first n positive even times of ``series``.

    ``n`` defaults to every available term.  n = 0 gives the empty product,
    P_0 = 0.
    """
    terms = series.terms
    if n is None:
        n = terms.size
    if n < 0 or n > terms.size:
        raise ValueError(f"n={n} outside 0..{terms.size}")
    if n == 0:
        return PolyaEstimate(0, 0.0, 0.0)
    used = terms[:n]
    log_surv = float(np.sum(np.log1p(-used)))
    return PolyaEstimate(n, float(-np.expm1(log_surv)), float(np.sum(used)))


def polya_at_cutoffs(series: ReturnSeries, cutoffs) -> dict[int, float]:
    """P over all positive even t <= cutoff, for each cutoff."""
    tpos = series.t[series.t > 0]
    return {int(c): polya_partial(series, int(np.sum(tpos <= c))).partial_product for c in cutoffs}


def tensor_polya_estimate(d: int) -> float:
    """Three-term estimate for tensor-product coins in d >= 2 dimensions.

    Uses p0(2) = 2^-d and p0(4) = p0(6) = 8^-d.
    """
    if d < 2:
        raise ValueError("three-term estimate applies to transient dimensions d ≥ 2")
    return 1.0 - (1.0 - 2.0**-d) * (1.0 - 8.0**-d) ** 2


def _dyadic_blocks(t: NDArray, t_lo: int, t_hi: int) -> list[NDArray]:
    blocks = []
    a = t_lo
    while a <= t_hi:
        b = 2 * a
        m = (t >= a) & (t < b) & (t <= t_hi)
        if np.any(m):
            blocks.append(m)
        a = b
    return blocks


def fit_decay_exponent(series: ReturnSeries, window: tuple[int, int]) -> tuple[float, float]:
    """Fit p0(t) ~ t^-alpha over ``window``; return (alpha, stderr).

    p0 oscillates, so the fit is done on geometric means over consecutive
    dyadic blocks [t_lo, 2 t_lo), [2 t_lo, 4 t_lo), ... of the nonzero
    entries, each paired with the geometric mean of its times.
    """
    t_lo, t_hi = window
    if t_lo <= 0 or t_hi <= t_lo:
        raise ValueError(f"bad window {window}")
    t = series.t.astype(float)
    p = series.p0
    inwin = (series.t >= t_lo) & (series.t <= t_hi)
    nz = inwin & (p > 0)
    if not np.any(nz):
        raise ValueError("window contains only zero return probabilities")
    if np.sum(nz) < 8:
        raise ValueError("window needs at least 8 nonzero entries")
    xs, ys = [], []
    for m in _dyadic_blocks(series.t, t_lo, t_hi):
        m = m & nz
        if np.any(m):
            xs.append(np.mean(np.log(t[m])))
            ys.append(np.mean(np.log(p[m])))
    if len(xs) < 3:
        # window shorter than three octaves: fall back to the raw points
        xs, ys = np.log(t[nz]), np.log(p[nz])
    fit = stats.linregress(xs, ys)
    return float(-fit.slope), float(fit.stderr)


@dataclass
class Classification:
    label: str
    evidence: dict = field(default_factory=dict)

    def __str__(self) -> str:
        return self.label


def classify_recurrence(series: ReturnSeries) -> Classification:
    """Sort a return series into localized / recurrent / transient.

    Localization test: the mean of p0 over the last quarter of the series
    is compared with a t^-2 reference curve anchored at the mean of p0
    over [T/8, T/4).  A ratio above ``LOCALIZATION_FACTOR`` means the tail
    is not decaying.  Otherwise the exponent fitted on [T/10, T] decides:
    alpha <= 1 + MARGIN is recurrent, larger is transient, and an exponent
    with stderr above MARGIN is inconclusive.
    """
    tpos = series.t[series.t > 0]
    if tpos.size < 64:
        raise ValueError("classification needs at least 64 positive even-time terms")
    T = int(tpos[-1])
    t = series.t.astype(float)
    p = series.p0

    anchor = (t >= T / 8) & (t < T / 4)
    t_a = float(np.mean(t[anchor]))
    a_val = float(np.mean(p[anchor]))
    tail = t > 0.75 * T
    tail_mean = float(np.mean(p[tail]))
    ref_mean = float(np.mean(a_val * (t_a / t[tail]) ** 2))
    ratio = tail_mean / ref_mean if ref_mean > 0 else np.inf

    lo = max(2, 2 * ((T // 10) // 2))
    evidence = {
        "window": (lo, T),
        "tail_mean": tail_mean,
        "reference_tail_mean": ref_mean,
        "floor_ratio": ratio,
    }
    try:
        alpha, err = fit_decay_exponent(series, (lo, T))
    except ValueError:
        alpha, err = float("nan"), float("nan")
    evidence.update(alpha=alpha, stderr=err)

    if ratio > LOCALIZATION_FACTOR:
        return Classification("localized", evidence)
    if not np.isfinite(alpha) or err > MARGIN:
        return Classification("inconclusive", evidence)
    if alpha <= 1.0 + MARGIN:
        return Classification("recurrent", evidence)
    return Classification("transient", evidence)


def _classical_log_p0(d: int, n: NDArray) -> NDArray:
    n = np.asarray(n, dtype=float)
    return d * (gammaln(2 * n + 1) - 2 * gammaln(n + 1) - n * np.log(4.0))


def classical_return_series(d: int, t_max: int) -> ReturnSeries:
    """Classical walk with independent +-1 steps along each of d axes.

    p0(2n) = (binom(2n, n) / 4^n)^d, evaluated through log-gamma.
    """
    if d < 1:
        raise ValueError("d must be positive")
    t = np.arange(0, t_max + 1, 2)
    p0 = np.exp(_classical_log_p0(d, t // 2))
    return ReturnSeries(t, p0, {"coin": f"classical-{d}d", "engine": "closed-form", "t_max": t_max})


@dataclass
class ClassicalPolya:
    value: float
    bound_width: float
    partial_sum: float
    tail_estimate: float
    divergent: bool


def _tail_integral(d: int, start: float, shift: float) -> float:
    # int_start^inf (pi (n + shift))^{-d/2} dn
    e = d / 2.0
    return float(np.pi**-e * (start + shift) ** (1.0 - e) / (e - 1.0))


def classical_polya(d: int, t_max: int) -> ClassicalPolya:
    """Classical Polya number P = 1 - 1/S with an integral tail estimate.

    For d <= 2 the series diverges and the result is 1; the partial sum up
    to ``t_max`` is reported as evidence.  For d >= 3 the tail beyond
    n = t_max/2 is bracketed with
    1/sqrt(pi (n + 1/2)) < binom(2n, n)/4^n < 1/sqrt(pi (n + 1/4)).
    """
    series = classical_return_series(d, t_max)
    s = float(np.sum(series.p0))
    if d <= 2:
        return ClassicalPolya(1.0, 0.0, s, float("inf"), True)
    n_last = t_max // 2
    lo = _tail_integral(d, n_last + 1, 0.5)
    hi = _tail_integral(d, n_last, 0.25)
    tail = 0.5 * (lo + hi)
    p_lo, p_hi = 1.0 - 1.0 / (s + lo), 1.0 - 1.0 / (s + hi)
    return ClassicalPolya(1.0 - 1.0 / (s + tail), p_hi - p_lo, s, tail, False)


@dataclass
class CriterionTable:
    n: NDArray[np.int64]
    polya: NDArray[np.float64]
    partial_sum: NDArray[np.float64]
    log_survival: NDArray[np.float64]

    def rows(self):
        return zip(self.n.tolist(), self.polya.tolist(), self.partial_sum.tolist())


def criterion_demo(series: ReturnSeries) -> CriterionTable:
    """Partial products next to partial sums, for n = 1 .. len(terms).

    ``log_survival`` is ln(1 - P_n); once every term is at most 1/2 it is
    squeezed between -2 * partial_sum and -partial_sum.
    """
    terms = series.terms
    ls = _log_survival(terms)
    return CriterionTable(
        np.arange(1, terms.size + 1), -np.expm1(ls), np.cumsum(terms), ls
    )


def survival_cutoff(partial_sum, target: float, n_max: int = 2**62) -> int:
    """Smallest n with exp(-S_n) <= target.

    ``partial_sum(n)`` must return S_n for a series of terms in [0, 1/2];
    then 1 - P_n <= exp(-S_n), so at the returned n the survival
    probability is below ``target``.  S_n is only evaluated O(log n)
    times, which makes cutoffs far beyond array sizes reachable when S_n
    has a closed form.  Raises ValueError if S stays below -ln(target) up
    to ``n_max`` (a convergent series).
    """
    goal = -np.log(target)
    hi = 1
    while partial_sum(hi) < goal:
        if hi >= n_max:
            raise ValueError("partial sums stay bounded below the target up to n_max")
        hi = min(2 * hi, n_max)
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if partial_sum(mid) >= goal:
            hi = mid
        else:
            lo = mid
    return hi


def fourier_g(a, phi):
    """a sqrt(1/2 - a^2) (cos phi - sin phi): the state dependence of p0."""
    a = np.asarray(a, dtype=float)
    return a * np.sqrt(np.clip(0.5 - a * a, 0.0, None)) * (np.cos(phi) - np.sin(phi))


@dataclass
class FourierSurfaceModel:
    """p0(a, phi, t) = (K1(t) - K2(t) g(a, phi)) / t^2 for the Fourier walk."""

    times: NDArray[np.int64]
    K1: NDArray[np.float64]
    K2: NDArray[np.float64]

    def __len__(self) -> int:
        return self.times.size

    def p0(self, a, phi) -> NDArray[np.float64]:
        """Return probabilities; trailing axis runs over ``times``."""
        g = np.asarray(fourier_g(a, phi))[..., None]
        return (self.K1 - self.K2 * g) / self.times.astype(float) ** 2

    def range_ok(self) -> bool:
        # p0 is linear in g, so the extremes of g bound it
        gmax = np.sqrt(2.0) / 4.0
        lo = (self.K1 - self.K2 * gmax) / self.times**2
        hi = (self.K1 + self.K2 * gmax) / self.times**2
        both = np.concatenate([lo, hi])
        return bool(np.all(both >= -1e-15) and np.all(both <= 1.0 + 1e-15))


CALIBRATION = ((0.5, 0.0), (0.5, np.pi / 2))


def fit_fourier_surface(t_max: int) -> FourierSurfaceModel:
    """Calibrate K1, K2 from two direct Fourier-walk runs.

    The calibration states psi_F(1/2, 0) and psi_F(1/2, pi/2) have
    g = +1/4 and g = -1/4, which makes the 2 x 2 system well conditioned.
    """
    if t_max < 2:
        raise ValueError("t_max must be at least 2")
    coin = fourier_coin()
    runs = [evolve_collect(coin, named_state("psi_F", a, phi), t_max)[0] for a, phi in CALIBRATION]
    t = runs[0].t[1:]
    g = np.array([fourier_g(a, phi) for a, phi in CALIBRATION])
    system = np.column_stack([np.ones(2), -g])
    if abs(np.linalg.det(system)) < 1e-12:
        raise ValueError("singular calibration system")
    rhs = np.vstack([r.p0[1:] for r in runs]) * t.astype(float) ** 2
    K1, K2 = np.linalg.solve(system, rhs)
    return FourierSurfaceModel(t, K1, K2)


@dataclass
class FourierSurface:
    a: NDArray[np.float64]
    phi: NDArray[np.float64]
    polya: NDArray[np.float64]
    n_terms: int

    def _at(self, idx) -> dict:
        i, j = idx
        return {"a": float(self.a[i]), "phi": float(self.phi[j]), "value": float(self.polya[i, j])}

    @property
    def minimum(self) -> dict:
        return self._at(np.unravel_index(np.argmin(self.polya), self.polya.shape))

    @property
    def maximum(self) -> dict:
        return self._at(np.unravel_index(np.argmax(self.polya), self.polya.shape))

    def summary(self) -> dict:
        return {"min": self.minimum, "max": self.maximum, "n_terms": self.n_terms}


def fourier_polya_surface(model: FourierSurfaceModel, a_grid, phi_grid, n_terms: int) -> FourierSurface:
    """P_n(a, phi) on a grid from the first ``n_terms`` reconstructed terms."""
    if n_terms > len(model):
        raise ValueError(f"model holds {len(model)} terms, {n_terms} requested")
    a = np.asarray(a_grid, dtype=float)
    phi = np.asarray(phi_grid, dtype=float)
    A, PHI = np.meshgrid(a, phi, indexing="ij")
    sub = FourierSurfaceModel(model.times[:n_terms], model.K1[:n_terms], model.K2[:n_terms])
    p = sub.p0(A, PHI)
    polya = -np.expm1(np.sum(np.log1p(-p), axis=-1))
    return FourierSurface(a, phi, polya, n_terms)

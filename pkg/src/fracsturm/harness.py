"""Convergence and asymptotics studies built on :func:`fracsturm.solver.solve`.

Every study returns a :class:`StudyReport`: a table of ``(alpha, k, N, error)``
rows plus power-law fits on log10-log10 axes.  Reports carry no wall-clock
data, so identical configurations give identical reports.
"""

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .potential import potential_model
from .solver import SolveRequest, coefficient_asymptote, solve, well_asymptote

FLOOR_ULPS = 20
UNRELIABLE_RESIDUAL = 0.5
TRIM_RESIDUAL = 0.1
MIN_FIT_POINTS = 3


class DegenerateFit(ValueError):
    """A power-law fit whose abscissae are all equal."""


def fit_power_law(xs, ys):
    """Least-squares line through (log10 x, log10 y).

    Returns ``(slope, intercept, residual)`` where ``residual`` is the RMS of
    the log10 deviations from the line.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("xs and ys must be 1-d arrays of equal length")
    if len(xs) < MIN_FIT_POINTS:
        raise ValueError(f"a fit needs at least {MIN_FIT_POINTS} points, got {len(xs)}")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("power-law fits need positive data")
    X = np.log10(xs)
    Y = np.log10(ys)
    if np.all(X == X[0]):
        raise DegenerateFit("all abscissae are equal")
    V = np.column_stack([X, np.ones_like(X)])
    (slope, intercept), *_ = np.linalg.lstsq(V, Y, rcond=None)
    residual = math.sqrt(float(np.mean((Y - V @ np.array([slope, intercept])) ** 2)))
    return float(slope), float(intercept), residual


def floor_level(value):
    """Errors at or below this are treated as rounding noise."""
    return FLOOR_ULPS * float(np.spacing(abs(value)))


@dataclass(frozen=True)
class Fit:
    alpha: float
    k: int | None  # None for fits across k
    exponent: float  # nan when no fit was possible
    residual: float
    n_points: int
    note: str = ""

    @property
    def reliable(self):
        return math.isfinite(self.exponent) and self.residual <= UNRELIABLE_RESIDUAL


@dataclass(frozen=True)
class Row:
    alpha: float
    k: int
    N: int
    error: float
    value: float
    reference: float
    flag: str = ""  # "" when the row entered the fit


@dataclass(frozen=True)
class StudyConfig:
    alphas: tuple
    potential: str | None = None  # None is the zero potential
    ks: tuple = ()
    Ns: tuple = ()
    N_true: int | None = None
    degree: int | None = None
    output_format: str = "csv"
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in np.atleast_1d(self.alphas)))
        object.__setattr__(self, "ks", tuple(int(k) for k in self.ks))
        object.__setattr__(self, "Ns", tuple(int(n) for n in self.Ns))
        if not self.alphas:
            raise ValueError("at least one alpha is required")
        for a in self.alphas:
            if not 0.0 < a <= 2.0:
                raise ValueError("alpha must lie in (0,2]")
        if any(n < 1 for n in self.Ns) or list(self.Ns) != sorted(set(self.Ns)):
            raise ValueError("sizes must be positive and strictly ascending")
        if any(k < 0 for k in self.ks):
            raise ValueError("indices must be non-negative")
        if self.N_true is None and self.Ns:
            object.__setattr__(self, "N_true", 2 * self.Ns[-1])
        if self.N_true is not None and self.Ns and self.N_true < 2 * self.Ns[-1]:
            raise ValueError(f"reference size must be at least 2*max(sizes) = {2 * self.Ns[-1]}")
        if self.N_true is not None and any(3 * k >= self.N_true for k in self.ks):
            raise ValueError("every index must lie in the trust window of the reference size")
        if self.output_format not in ("csv", "json"):
            raise ValueError("format must be csv or json")
        if self.jobs < 1:
            raise ValueError("jobs must be positive")

    def model(self):
        if self.potential is None:
            return None
        return potential_model(self.potential, L=self.degree)


@dataclass(frozen=True, eq=False)
class StudyReport:
    kind: str
    meta: dict
    rows: list
    fits: list
    extra: dict = field(default_factory=dict)

    def fit(self, alpha, k=None):
        for f in self.fits:
            if f.alpha == alpha and f.k == k:
                return f
        raise KeyError((alpha, k))

    def to_dict(self):
        fits = [
            {
                "alpha": f.alpha,
                "k": f.k,
                "exponent": f.exponent,
                "residual": f.residual,
                "points": f.n_points,
                "reliable": f.reliable,
                "note": f.note,
            }
            for f in self.fits
        ]
        if self.kind == "coeff-decay":
            coeffs = [{"alpha": r.alpha, "k": r.k, "n": r.n, "c": r.coeff, "c_hat": r.predicted} for r in self.rows]
            ratios = [{"alpha": a, "k": k, "min": lo, "max": hi} for (a, k), (lo, hi) in self.extra["ratio_range"].items()]
            return {"meta": dict(self.meta), "coefficients": coeffs, "ratios": ratios, "fits": fits}
        return {
            "meta": dict(self.meta),
            "eigenvalues": [
                {"alpha": r.alpha, "k": r.k, "N": r.N, "lambda": r.value, "reference": r.reference}
                for r in self.rows
            ],
            "errors": [
                {"alpha": r.alpha, "k": r.k, "N": r.N, "error": r.error, "flag": r.flag} for r in self.rows
            ],
            "fits": fits,
        }


# -- shared machinery ----------------------------------------------------------

_ref_cache = {}
_ref_lock = threading.Lock()


def _fingerprint(model, alpha):
    if model is None:
        return "zero"
    from .assembly import fingerprint

    return fingerprint(model.jacobi_coeffs(alpha))


def reference_eigenvalues(alpha, model, N_true, k_max):
    """Lowest k_max+1 eigenvalues at N_true, cached per (alpha, potential)."""
    key = (float(alpha), _fingerprint(model, alpha), int(N_true))
    with _ref_lock:
        hit = _ref_cache.get(key)
    if hit is not None and len(hit) > k_max:
        return hit[: k_max + 1]
    lambdas = solve(SolveRequest(alpha, N_true, k_max, model)).lambdas
    lambdas.setflags(write=False)
    with _ref_lock:
        _ref_cache[key] = lambdas
    return lambdas


def clear_reference_cache():
    with _ref_lock:
        _ref_cache.clear()


def _map(fn, tasks, jobs):
    # results always come back in task order, whatever the job count
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda t: fn(*t), tasks))


def _lowest(alpha, model, N, k_max):
    return solve(SolveRequest(alpha, N, min(k_max, N - 1), model)).lambdas


def _fit_rows(alpha, k, rows, xs, sign, trim):
    """Fit error against xs over rows without a flag; returns (Fit, rows)."""
    use = [i for i, r in enumerate(rows) if not r.flag]
    if not use:
        note = "all errors at rounding floor" if any(r.flag == "floor" for r in rows) else "no points in fit window"
        return Fit(alpha, k, math.nan, math.nan, 0, note), rows
    if len(use) < MIN_FIT_POINTS:
        return Fit(alpha, k, math.nan, math.nan, len(use), "too few points above rounding floor"), rows
    x = np.array([xs[i] for i in use], dtype=float)
    y = np.array([rows[i].error for i in use])
    slope, _, res = fit_power_law(x, y)
    dropped = 0
    # leading points still outside the asymptotic regime spoil the line
    while trim and res > TRIM_RESIDUAL and len(x) - dropped > MIN_FIT_POINTS:
        dropped += 1
        slope, _, res = fit_power_law(x[dropped:], y[dropped:])
    rows = list(rows)
    for i in use[:dropped]:
        rows[i] = _flag(rows[i], "pre-asymptotic")
    return Fit(alpha, k, sign * slope, res, len(x) - dropped), rows


def _flag(row, flag):
    return Row(row.alpha, row.k, row.N, row.error, row.value, row.reference, flag)


def _meta(cfg, model, **extra):
    meta = {
        "alpha": list(cfg.alphas),
        "N": list(cfg.Ns),
        "L": None if model is None else model.L,
        "N_true": cfg.N_true,
        "mean": 0.0 if model is None else model.mean,
        "potential": "zero" if cfg.potential is None else cfg.potential,
        "version": __version__,
    }
    meta.update(extra)
    return meta


# -- studies -------------------------------------------------------------------


def convergence_study(cfg: StudyConfig) -> StudyReport:
    """Errors |lam_k^(N) - lam_k^(N_true)| over the size sweep, and order p per (alpha, k).

    Sizes with N < 4k are reported but left out of the fit, as are errors at
    the rounding floor.  While the fit residual exceeds ``TRIM_RESIDUAL`` the
    smallest remaining size is dropped (pre-asymptotic), keeping at least
    three points.
    """
    if not cfg.Ns or not cfg.ks:
        raise ValueError("a convergence study needs sizes and indices")
    model = cfg.model()
    k_max = max(cfg.ks)
    tasks = [(a, model, cfg.N_true, k_max) for a in cfg.alphas]
    refs = _map(reference_eigenvalues, tasks, cfg.jobs)
    sweeps = _map(_lowest, [(a, model, N, k_max) for a in cfg.alphas for N in cfg.Ns], cfg.jobs)
    rows, fits = [], []
    it = iter(sweeps)
    by_alpha = {a: {N: next(it) for N in cfg.Ns} for a in cfg.alphas}
    for a, ref in zip(cfg.alphas, refs):
        for k in cfg.ks:
            krows, xs = [], []
            for N in cfg.Ns:
                lam = by_alpha[a][N]
                if k >= len(lam):
                    continue
                err = abs(float(lam[k]) - float(ref[k]))
                flag = ""
                if N < 4 * k:
                    flag = "pre-window"
                elif err <= floor_level(ref[k]):
                    flag = "floor"
                krows.append(Row(a, k, N, err, float(lam[k]), float(ref[k]), flag))
                xs.append(N)
            f, krows = _fit_rows(a, k, krows, xs, -1.0, trim=True)
            rows.extend(krows)
            fits.append(f)
    return StudyReport("convergence", _meta(cfg, model), rows, fits)


def index_growth_study(cfg: StudyConfig) -> StudyReport:
    """Errors at one size N against the index k, and growth exponent r per alpha.

    Default indices are 5..N/4.
    """
    if len(cfg.Ns) != 1:
        raise ValueError("an index-growth study uses exactly one size")
    N = cfg.Ns[0]
    ks = cfg.ks or tuple(range(5, N // 4 + 1))
    if max(ks) > N // 4:
        raise ValueError(f"indices must not exceed N/4 = {N // 4}")
    model = cfg.model()
    k_max = max(ks)
    refs = _map(reference_eigenvalues, [(a, model, cfg.N_true, k_max) for a in cfg.alphas], cfg.jobs)
    sols = _map(_lowest, [(a, model, N, k_max) for a in cfg.alphas], cfg.jobs)
    rows, fits = [], []
    for a, ref, lam in zip(cfg.alphas, refs, sols):
        arows = []
        for k in ks:
            err = abs(float(lam[k]) - float(ref[k]))
            flag = "floor" if err <= floor_level(ref[k]) else ""
            if k < 5:
                flag = flag or "pre-window"
            arows.append(Row(a, k, N, err, float(lam[k]), float(ref[k]), flag))
        f, arows = _fit_rows(a, None, arows, list(ks), 1.0, trim=False)
        rows.extend(arows)
        fits.append(f)
    return StudyReport("index-growth", _meta(cfg, model, ks=list(ks)), rows, fits)


def mean_asymptote_study(cfg: StudyConfig) -> StudyReport:
    """|lam_k(q) - lam_k(0) - mean(q)| at one size, and its decay exponent eta.

    Default indices are 5 up to the end of the trust window.
    """
    if len(cfg.Ns) != 1:
        raise ValueError("a mean-asymptote study uses exactly one size")
    N = cfg.Ns[0]
    ks = cfg.ks or tuple(range(5, math.ceil(N / 3)))
    if 3 * max(ks) >= N:
        raise ValueError("indices must lie in the trust window k < N/3")
    model = cfg.model()
    mean = 0.0 if model is None else model.mean
    # Rayleigh quotients keep both spectra within a few ulps, so the
    # difference resolves eta down to rounding level.
    tasks = [(a, m, N, max(ks)) for a in cfg.alphas for m in (model, None)]
    spectra = _map(_lowest, tasks, cfg.jobs)
    rows, fits = [], []
    for i, a in enumerate(cfg.alphas):
        lq, l0 = spectra[2 * i], spectra[2 * i + 1]
        arows = []
        for k in ks:
            err = abs(float(lq[k]) - float(l0[k]) - mean)
            # a difference of two computed values carries both their roundings
            flag = "floor" if err <= 2.0 * floor_level(max(abs(lq[k]), abs(l0[k]))) else ""
            arows.append(Row(a, k, N, err, float(lq[k]), float(l0[k]) + mean, flag))
        f, arows = _fit_rows(a, None, arows, list(ks), -1.0, trim=False)
        rows.extend(arows)
        fits.append(f)
    return StudyReport("mean-asymptote", _meta(cfg, model, N_true=None, ks=list(ks)), rows, fits)


def well_asymptote_study(alphas, N, ks=None, jobs=1) -> StudyReport:
    """|lam_k - asymptote| for the zero potential, fitted against k+1.

    A slope at or below -1 is consistent with an O(1/(k+1)) remainder.
    """
    cfg = StudyConfig(np.atleast_1d(alphas), None, tuple(ks if ks is not None else range(10, 101)), (N,), jobs=jobs)
    ks = cfg.ks
    if 3 * max(ks) >= N:
        raise ValueError("indices must lie in the trust window k < N/3")
    sols = _map(_lowest, [(a, None, N, max(ks)) for a in cfg.alphas], cfg.jobs)
    rows, fits = [], []
    for a, lam in zip(cfg.alphas, sols):
        arows = []
        for k in ks:
            law = float(well_asymptote(a, k))
            err = abs(float(lam[k]) - law)
            flag = "floor" if err <= floor_level(lam[k]) else ""
            arows.append(Row(a, k, N, err, float(lam[k]), law, flag))
        f, arows = _fit_rows(a, None, arows, [k + 1 for k in ks], 1.0, trim=False)
        rows.extend(arows)
        fits.append(f)
    return StudyReport("well-asymptote", _meta(cfg, None, N_true=None, ks=list(ks)), rows, fits)


@dataclass(frozen=True)
class CoefficientRow:
    alpha: float
    k: int
    n: int
    coeff: float
    predicted: float


def coefficient_decay_study(cfg: StudyConfig) -> StudyReport:
    """Eigenvector coefficients c_n against their large-n model c^_n.

    Fits |c_n| over n in [4k, N/2]; ``extra["ratio_range"][(alpha, k)]``
    holds min and max of |c^_n / c_n| over n in [3k, N/2].
    """
    if len(cfg.Ns) != 1:
        raise ValueError("a coefficient-decay study uses exactly one size")
    N = cfg.Ns[0]
    ks = cfg.ks or (5, 10, 25)
    model = cfg.model()
    sols = _map(lambda a: solve(SolveRequest(a, N, max(ks), model)), [(a,) for a in cfg.alphas], cfg.jobs)
    rows, fits, ratios = [], [], {}
    n = np.arange(N)
    for a, sol in zip(cfg.alphas, sols):
        for k in ks:
            ca = coefficient_asymptote(sol, k, model)
            rows.extend(CoefficientRow(a, k, int(i), float(ca.coeffs[i]), float(ca.predicted[i])) for i in n)
            window = (n >= 4 * k) & (n <= N // 2) & (ca.coeffs != 0)
            slope, _, res = fit_power_law(n[window], np.abs(ca.coeffs[window]))
            fits.append(Fit(a, k, slope, res, int(window.sum())))
            w = (n >= 3 * k) & (n <= N // 2)
            r = np.abs(ca.predicted[w] / ca.coeffs[w])
            ratios[(a, k)] = (float(r.min()), float(r.max()))
    meta = _meta(cfg, model, N_true=None, ks=list(ks))
    return StudyReport("coeff-decay", meta, rows, fits, {"ratio_range": ratios})


def run_study(kind, cfg):
    """Dispatch by study name (the CLI subcommand names)."""
    if kind == "convergence":
        return convergence_study(cfg)
    if kind == "index-growth":
        return index_growth_study(cfg)
    if kind == "mean-asymptote":
        return mean_asymptote_study(cfg)
    if kind == "coeff-decay":
        return coefficient_decay_study(cfg)
    if kind == "well-asymptote":
        return well_asymptote_study(cfg.alphas, cfg.Ns[0], cfg.ks or None, cfg.jobs)
    raise ValueError(f"unknown study {kind!r}")

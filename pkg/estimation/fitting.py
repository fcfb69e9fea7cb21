"""Damped (Levenberg-Marquardt) least squares for the repump, Lambda-decay,
mode-profile and standing-wave fit models.

Strictly positive parameters (tau, w, period) are fitted in log space.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

log = logging.getLogger(__name__)

DEFAULT_MAX_ITERATIONS = 200
DEFAULT_FTOL = 1e-10
DEFAULT_XTOL = 1e-12
DEFAULT_GTOL = 1e-15
# Singular values below this fraction of the largest mark a degenerate direction.
SINGULAR_RTOL = 1e-10


class FitError(ValueError):
    pass


class DegenerateFitError(FitError):
    def __init__(self, parameters):
        super().__init__(f"normal matrix is singular along parameter(s): {', '.join(parameters)}")
        self.parameters = list(parameters)


def _saturating(x, p):
    return p["A"] * (1.0 - np.exp(-x / p["tau"]))


def _decaying(x, p):
    return p["A"] * np.exp(-x / p["tau"]) + p["c"]


def _gaussian(x, p):
    return p["A"] * np.exp(-2.0 * (x - p["u0"]) ** 2 / p["w"] ** 2) + p["c"]


def _standing_wave(x, p):
    return p["A"] * (1.0 + p["contrast"] * np.cos(2.0 * np.pi * x / p["period"] + p["phase"]))


# kind -> (function, ordered parameter names, log-parameterised names)
MODELS = {
    "saturating_exponential": (_saturating, ("A", "tau"), ("tau",)),
    "decaying_exponential": (_decaying, ("A", "tau", "c"), ("tau",)),
    "gaussian_1d": (_gaussian, ("A", "u0", "w", "c"), ("w",)),
    "standing_wave": (_standing_wave, ("A", "period", "phase", "contrast"), ("period",)),
}


@dataclass
class FitModel:
    kind: str
    initial: dict
    fixed: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in MODELS:
            raise FitError(f"unknown fit model '{self.kind}'")
        names = MODELS[self.kind][1]
        missing = [n for n in names if n not in self.initial and n not in self.fixed]
        if missing:
            raise FitError(f"no initial value for {', '.join(missing)}")

    @property
    def names(self):
        return MODELS[self.kind][1]

    @property
    def free(self):
        return [n for n in self.names if n not in self.fixed]

    def evaluate(self, x, params):
        return MODELS[self.kind][0](np.asarray(x, dtype=float), params)


@dataclass
class FitResult:
    kind: str
    parameters: dict
    uncertainties: dict
    rss: float
    chi2: float
    converged: bool
    iterations: int
    message: str = ""

    @property
    def usable(self):
        return self.converged

    def __getitem__(self, name):
        return self.parameters[name]


def _to_internal(model, params):
    logs = MODELS[model.kind][2]
    theta = []
    for name in model.free:
        value = float(params[name])
        if name in logs:
            if not value > 0:
                raise FitError(f"initial {name} must be > 0, got {value}")
            value = math.log(value)
        theta.append(value)
    return np.array(theta)


def _to_params(model, theta):
    logs = MODELS[model.kind][2]
    params = dict(model.fixed)
    for name, value in zip(model.free, theta):
        params[name] = math.exp(value) if name in logs else float(value)
    return params


def damped_least_squares(model: FitModel, x, y, sigma=None, max_iterations=DEFAULT_MAX_ITERATIONS,
                         ftol=DEFAULT_FTOL, xtol=DEFAULT_XTOL) -> FitResult:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    weighted = sigma is not None
    sigma = np.ones_like(y) if sigma is None else np.asarray(sigma, dtype=float)
    if not (x.shape == y.shape == sigma.shape):
        raise FitError("x, y and sigma must have the same shape")
    n_free = len(model.free)
    if y.size < n_free + 1:
        raise FitError(f"{y.size} points cannot constrain {n_free} free parameters")
    if np.any(sigma <= 0):
        raise FitError("measurement uncertainties must be > 0")

    def residuals(theta):
        return (model.evaluate(x, _to_params(model, theta)) - y) / sigma

    theta0 = _to_internal(model, model.initial)
    res = least_squares(residuals, theta0, method="lm", ftol=ftol, xtol=xtol, gtol=DEFAULT_GTOL,
                        x_scale="jac", max_nfev=max_iterations * (n_free + 1))
    converged = res.status > 0
    params = _to_params(model, res.x)
    chi2 = float(np.sum(res.fun ** 2))
    rss = float(np.sum((model.evaluate(x, params) - y) ** 2))

    _, s, vt = np.linalg.svd(res.jac, full_matrices=False)
    degenerate = s <= SINGULAR_RTOL * max(s[0], 1e-300)
    if np.any(degenerate):
        names = []
        for row in vt[degenerate]:
            for name, weight in zip(model.free, row):
                if abs(weight) > 0.3 and name not in names:
                    names.append(name)
        raise DegenerateFitError(names or model.free)

    cov = (vt.T / s ** 2) @ vt
    dof = y.size - n_free
    if not weighted:
        cov = cov * chi2 / dof
    logs = MODELS[model.kind][2]
    uncertainties = {name: 0.0 for name in model.fixed}
    for i, name in enumerate(model.free):
        err = math.sqrt(max(cov[i, i], 0.0))
        uncertainties[name] = params[name] * err if name in logs else err

    if not converged:
        log.warning(f"{model.kind} fit did not converge after {res.nfev} evaluations: "
                    f"{res.message}")
    log.debug(f"{model.kind} fit: chi2={chi2:.4g}, nfev={res.nfev}, status={res.status}")
    return FitResult(kind=model.kind, parameters=params, uncertainties=uncertainties, rss=rss,
                     chi2=chi2, converged=converged, iterations=int(res.nfev), message=res.message)


def _first_crossing(x, y, level, rising):
    hits = np.flatnonzero(y >= level) if rising else np.flatnonzero(y <= level)
    return x[hits[0]] if hits.size else None


def _loglinear_tau(x, y):
    mask = y > 0
    if mask.sum() < 2:
        return None
    slope = np.polyfit(x[mask], np.log(y[mask]), 1)[0]
    return -1.0 / slope if slope < 0 else None


def fit_tau_saturating(x, y, sigma=None, **options):
    """A[1 - exp(-T/tau)]; tau starts at the first crossing of (1 - 1/e) of the range."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    order = np.argsort(x)
    xs, ys = x[order], y[order]
    top = float(np.max(ys))
    span = top - ys[0]
    tau = _first_crossing(xs, ys, ys[0] + (1.0 - 1.0 / math.e) * span, rising=True)
    if not tau or tau <= 0:
        tau = 0.5 * (xs[-1] - xs[0]) or 1.0
    model = FitModel("saturating_exponential", {"A": top if top != 0 else 1.0, "tau": tau})
    return damped_least_squares(model, x, y, sigma, **options)


def fit_tau_decaying(x, y, sigma=None, offset=0.0, fit_offset=False, **options):
    """A exp(-T/tau) + c with c fixed at ``offset`` unless fit_offset is set."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    order = np.argsort(x)
    xs, ys = x[order], y[order]
    c0 = float(np.min(ys)) if fit_offset else offset
    start = ys[0] - c0
    tau = _first_crossing(xs, ys - c0, start / math.e, rising=False)
    if tau is not None and tau > xs[0]:
        tau = tau - xs[0]
    else:
        tau = _loglinear_tau(xs, ys - c0) or (xs[-1] - xs[0])
    amplitude = start * math.exp(xs[0] / tau) if start != 0 else 1.0
    initial = {"A": amplitude, "tau": tau}
    fixed = {}
    if fit_offset:
        initial["c"] = c0
    else:
        fixed["c"] = offset
    return damped_least_squares(FitModel("decaying_exponential", initial, fixed), x, y, sigma,
                                **options)


def fit_gaussian(x, y, sigma=None, **options):
    """A exp(-2(u - u0)^2 / w^2) + c; w starts at twice the RMS width of the peak."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    c0 = float(np.min(y))
    weights = y - c0
    total = float(np.sum(weights))
    if total > 0:
        u0 = float(np.sum(weights * x) / total)
        w = 2.0 * math.sqrt(max(float(np.sum(weights * (x - u0) ** 2) / total), 0.0))
    else:
        u0 = float(np.mean(x))
        w = 0.0
    if not w > 0:
        w = 0.25 * float(np.ptp(x)) or 1.0
    model = FitModel("gaussian_1d", {"A": float(np.max(y)) - c0, "u0": u0, "w": w, "c": c0})
    return damped_least_squares(model, x, y, sigma, **options)


def fit_standing_wave(x, y, sigma=None, **options):
    """A[1 + V cos(2 pi u / p + phase)] with the period seeded from the dominant FFT bin.

    Expects (nearly) uniformly spaced positions.
    """
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    order = np.argsort(x)
    xs, ys = x[order], y[order]
    mean = float(np.mean(ys))
    step = float(np.mean(np.diff(xs)))
    spectrum = np.fft.rfft(ys - mean)
    power = np.abs(spectrum)
    k = int(np.argmax(power[1:])) + 1
    shift = 0.0
    if 1 <= k < power.size - 1:
        a, b, c = power[k - 1], power[k], power[k + 1]
        denom = a - 2.0 * b + c
        shift = 0.5 * (a - c) / denom if denom != 0 else 0.0
    freq = (k + shift) / (xs.size * step)
    period = 1.0 / freq
    phase = float(np.angle(spectrum[k])) - 2.0 * np.pi * xs[0] / period
    phase = math.atan2(math.sin(phase), math.cos(phase))
    contrast = (float(np.max(ys)) - float(np.min(ys))) / (float(np.max(ys)) + float(np.min(ys)))
    model = FitModel("standing_wave", {"A": mean, "period": period, "phase": phase,
                                       "contrast": contrast})
    return damped_least_squares(model, x, y, sigma, **options)


def shot_noise_sigma(p, repetitions):
    """Binomial standard error of a population estimated from N repetitions."""
    if repetitions <= 0:
        raise FitError(f"repetitions must be > 0, got {repetitions}")
    p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
    return np.maximum(np.sqrt(p * (1.0 - p) / repetitions), 1.0 / repetitions)

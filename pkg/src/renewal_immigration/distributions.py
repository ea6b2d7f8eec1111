"""Parametric laws for interarrival times and kernel marks.

The same family classes serve two roles:

* interarrival laws (the renewal increments): must put all mass on
  (0, inf) and have a finite positive mean -- enforce with
  :func:`check_interarrival`;
* mark laws for scaled kernels (``eta``): may be signed, may have an atom
  at 0, and may be heavy-tailed (:class:`Pareto`).

Beyond plain sampling, interarrival laws expose the two derived objects a
stationary renewal construction needs: the size-biased law of the interval
straddling a uniform time point, and the integrated-tail law of the
stationary delay / limiting overshoot.

Laws serialize to flat dicts, e.g. ``{"family": "exponential", "rate": 1.0}``;
see :func:`law_from_config`.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce

import numpy as np
from scipy import stats as _sps

from .errors import LawError

__all__ = [
    "Exponential",
    "Gamma",
    "Uniform",
    "LogNormal",
    "PointMass",
    "FiniteDiscrete",
    "Pareto",
    "Law",
    "check_interarrival",
    "mean",
    "sample",
    "sample_size_biased",
    "sample_stationary_delay",
    "integrated_tail_cdf",
    "is_lattice",
    "lattice_span",
    "abs_quantile",
    "law_to_config",
    "law_from_config",
]

# Atoms are treated as rational (hence lattice-detectable) only up to this
# denominator; beyond it commensurability of floats is not decidable.  The
# acceptance tolerance sits at float-rounding scale: continued-fraction
# approximants of irrationals with denominator <= 10^6 stay ~q^-2 >> 1e-12
# away, while decimal literals round to within a few ulp.
LATTICE_MAX_DENOMINATOR = 10**6
_LATTICE_ATOL = 4e-15


@dataclass(frozen=True)
class Exponential:
    """Exponential law with the given rate (mean ``1/rate``)."""

    rate: float

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise LawError(f"exponential rate must be positive and finite, got {self.rate}")

    def mean(self):
        return 1.0 / self.rate

    def second_moment(self):
        return 2.0 / self.rate**2

    def support(self):
        return 0.0, math.inf

    def sample(self, rng, size=None):
        return rng.exponential(1.0 / self.rate, size=size)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.0, -np.expm1(-self.rate * np.maximum(x, 0.0)))

    def sf(self, x):
        return 1.0 - self.cdf(x)

    def quantile(self, p):
        return -math.log1p(-p) / self.rate

    def mean_min(self, x):
        """E[min(X, x)] for x >= 0."""
        x = np.asarray(x, dtype=float)
        return -np.expm1(-self.rate * x) / self.rate

    def size_biased_sample(self, rng, size=None):
        # x * rate * e^{-rate x} / mean is a Gamma(2, 1/rate) density.
        return rng.gamma(2.0, 1.0 / self.rate, size=size)


@dataclass(frozen=True)
class Gamma:
    """Gamma law with shape ``k`` and scale ``theta`` (mean ``k*theta``)."""

    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise LawError("gamma shape and scale must be positive")

    def mean(self):
        return self.shape * self.scale

    def second_moment(self):
        return self.shape * (self.shape + 1.0) * self.scale**2

    def support(self):
        return 0.0, math.inf

    def sample(self, rng, size=None):
        return rng.gamma(self.shape, self.scale, size=size)

    def cdf(self, x):
        return _sps.gamma.cdf(x, self.shape, scale=self.scale)

    def sf(self, x):
        return _sps.gamma.sf(x, self.shape, scale=self.scale)

    def quantile(self, p):
        return float(_sps.gamma.ppf(p, self.shape, scale=self.scale))

    def mean_min(self, x):
        x = np.asarray(x, dtype=float)
        head = self.mean() * _sps.gamma.cdf(x, self.shape + 1.0, scale=self.scale)
        return head + x * _sps.gamma.sf(x, self.shape, scale=self.scale)

    def size_biased_sample(self, rng, size=None):
        # Size-biasing a Gamma(k, theta) bumps the shape by one.
        return rng.gamma(self.shape + 1.0, self.scale, size=size)


@dataclass(frozen=True)
class Uniform:
    """Uniform law on [lo, hi]; lo may be negative only in the mark role."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo < self.hi and math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise LawError(f"uniform requires lo < hi, got [{self.lo}, {self.hi}]")

    def mean(self):
        return 0.5 * (self.lo + self.hi)

    def second_moment(self):
        return (self.lo**2 + self.lo * self.hi + self.hi**2) / 3.0

    def support(self):
        return self.lo, self.hi

    def sample(self, rng, size=None):
        return rng.uniform(self.lo, self.hi, size=size)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip((x - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def sf(self, x):
        return 1.0 - self.cdf(x)

    def quantile(self, p):
        return self.lo + p * (self.hi - self.lo)

    def mean_min(self, x):
        # Valid in the interarrival role (lo >= 0).
        x = np.asarray(x, dtype=float)
        lo, hi = self.lo, self.hi
        mid = lo + (hi * (x - lo) - 0.5 * (x**2 - lo**2)) / (hi - lo)
        return np.where(x <= lo, x, np.where(x >= hi, self.mean(), mid))

    def size_biased_sample(self, rng, size=None):
        # Inverse transform of the density x / (mean * (hi - lo)) on [lo, hi].
        u = rng.uniform(size=size)
        return np.sqrt(self.lo**2 + u * (self.hi**2 - self.lo**2))


@dataclass(frozen=True)
class LogNormal:
    """Log-normal law: log X ~ Normal(mu, sigma^2)."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise LawError("lognormal requires finite mu and positive sigma")

    def mean(self):
        return math.exp(self.mu + 0.5 * self.sigma**2)

    def second_moment(self):
        return math.exp(2.0 * self.mu + 2.0 * self.sigma**2)

    def support(self):
        return 0.0, math.inf

    def sample(self, rng, size=None):
        return rng.lognormal(self.mu, self.sigma, size=size)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        lx = np.log(np.maximum(x, np.finfo(float).tiny))
        return np.where(x > 0, _sps.norm.cdf((lx - self.mu) / self.sigma), 0.0)

    def sf(self, x):
        return 1.0 - np.asarray(self.cdf(x))

    def quantile(self, p):
        return math.exp(self.mu + self.sigma * float(_sps.norm.ppf(p)))

    def mean_min(self, x):
        # Limited expected value: m*Phi((ln x - mu - sigma^2)/sigma) + x*sf(x).
        x = np.asarray(x, dtype=float)
        lx = np.log(np.maximum(x, np.finfo(float).tiny))
        head = self.mean() * _sps.norm.cdf((lx - self.mu - self.sigma**2) / self.sigma)
        tail = x * _sps.norm.sf((lx - self.mu) / self.sigma)
        return np.where(x > 0, head + tail, 0.0)

    def size_biased_sample(self, rng, size=None):
        # x * lognormal(mu, sigma) density / mean is lognormal(mu + sigma^2, sigma).
        return rng.lognormal(self.mu + self.sigma**2, self.sigma, size=size)


@dataclass(frozen=True)
class PointMass:
    """Degenerate law at a single value.  Lattice by definition."""

    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise LawError("point mass value must be finite")

    def mean(self):
        return self.value

    def second_moment(self):
        return self.value**2

    def support(self):
        return self.value, self.value

    def sample(self, rng, size=None):
        if size is None:
            return self.value
        return np.full(size, self.value)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= self.value, 1.0, 0.0)

    def sf(self, x):
        return 1.0 - self.cdf(x)

    def quantile(self, p):
        return self.value

    def mean_min(self, x):
        return np.minimum(np.asarray(x, dtype=float), self.value)

    def size_biased_sample(self, rng, size=None):
        if size is None:
            return self.value
        return np.full(size, self.value)


@dataclass(frozen=True)
class FiniteDiscrete:
    """Law on finitely many atoms, given as ``((value, prob), ...)``."""

    atoms: tuple

    def __post_init__(self):
        atoms = tuple((float(v), float(p)) for v, p in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise LawError("finite discrete law needs at least one atom")
        probs = [p for _, p in atoms]
        if any(p <= 0 for p in probs):
            raise LawError("finite discrete atom probabilities must be positive")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise LawError(f"finite discrete probabilities must sum to 1, got {sum(probs)!r}")
        if len({v for v, _ in atoms}) != len(atoms):
            raise LawError("finite discrete atoms must have distinct values")

    @cached_property
    def _sorted(self):
        vals = np.array(sorted(v for v, _ in self.atoms))
        pmap = dict(self.atoms)
        probs = np.array([pmap[v] for v in vals])
        return vals, probs

    def mean(self):
        vals, probs = self._sorted
        return float(vals @ probs)

    def second_moment(self):
        vals, probs = self._sorted
        return float((vals**2) @ probs)

    def support(self):
        vals, _ = self._sorted
        return float(vals[0]), float(vals[-1])

    def sample(self, rng, size=None):
        vals, probs = self._sorted
        return rng.choice(vals, size=size, p=probs)

    def cdf(self, x):
        vals, probs = self._sorted
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(vals, x, side="right")
        cum = np.concatenate([[0.0], np.cumsum(probs)])
        return cum[idx]

    def sf(self, x):
        return 1.0 - self.cdf(x)

    def quantile(self, p):
        vals, probs = self._sorted
        cum = np.cumsum(probs)
        idx = int(np.searchsorted(cum, p, side="left"))
        return float(vals[min(idx, len(vals) - 1)])

    def mean_min(self, x):
        vals, probs = self._sorted
        x = np.asarray(x, dtype=float)
        return np.minimum(vals, x[..., None]) @ probs

    def size_biased_sample(self, rng, size=None):
        vals, probs = self._sorted
        w = vals * probs
        return rng.choice(vals, size=size, p=w / w.sum())


@dataclass(frozen=True)
class Pareto:
    """Pareto law with tail index ``alpha`` and minimum ``xm``.

    Mark role only: with ``alpha <= 1`` the mean is infinite, which is
    exactly the heavy-tail regime the divergence diagnostics exercise.
    """

    alpha: float
    xm: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.xm > 0):
            raise LawError("pareto requires alpha > 0 and xm > 0")

    def mean(self):
        if self.alpha <= 1.0:
            return math.inf
        return self.alpha * self.xm / (self.alpha - 1.0)

    def second_moment(self):
        if self.alpha <= 2.0:
            return math.inf
        return self.alpha * self.xm**2 / (self.alpha - 2.0)

    def support(self):
        return self.xm, math.inf

    def sample(self, rng, size=None):
        u = rng.uniform(size=size)
        return self.xm * (1.0 - u) ** (-1.0 / self.alpha)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            out = 1.0 - (self.xm / np.maximum(x, self.xm)) ** self.alpha
        return np.where(x < self.xm, 0.0, out)

    def sf(self, x):
        return 1.0 - self.cdf(x)

    def quantile(self, p):
        return self.xm * (1.0 - p) ** (-1.0 / self.alpha)

    def mean_min(self, x):
        x = np.asarray(x, dtype=float)
        xm, a = self.xm, self.alpha
        xc = np.maximum(x, xm)
        if a == 1.0:
            tail = xm * (1.0 + np.log(xc / xm))
        else:
            tail = xm + xm**a * (xc ** (1.0 - a) - xm ** (1.0 - a)) / (1.0 - a)
        return np.where(x <= xm, x, tail)

    def size_biased_sample(self, rng, size=None):
        raise LawError("pareto is a mark law; size-biased sampling is an interarrival operation")


Law = Exponential | Gamma | Uniform | LogNormal | PointMass | FiniteDiscrete | Pareto

_INTERARRIVAL_FAMILIES = (Exponential, Gamma, Uniform, LogNormal, PointMass, FiniteDiscrete)


def check_interarrival(law):
    """Validate that ``law`` is legal as a renewal-increment law.

    All mass must lie on (0, inf) and the mean must be finite and positive.
    Returns the law unchanged so it can be used inline.
    """
    if not isinstance(law, _INTERARRIVAL_FAMILIES):
        raise LawError(f"{type(law).__name__} is not an interarrival family")
    lo, _ = law.support()
    if lo < 0:
        raise LawError(f"interarrival law must have nonnegative support, got lower end {lo}")
    if isinstance(law, (PointMass, FiniteDiscrete)) and lo <= 0:
        raise LawError("interarrival law must put no mass at 0")
    mu = law.mean()
    if not (mu > 0 and math.isfinite(mu)):
        raise LawError(f"interarrival law needs a finite positive mean, got {mu}")
    return law


def mean(law):
    """Exact mean of the law; may be ``inf`` for heavy-tailed mark laws."""
    return law.mean()


def sample(law, rng, size=None):
    """Draw from the law.  Deterministic given the generator state."""
    return law.sample(rng, size=size)


def sample_size_biased(law, rng, size=None):
    """Draw the interval containing a uniform random time point.

    The size-biased law has density ``x / mean`` times the original one;
    each family uses an exact method (conjugate shift, inverse transform, or
    atom reweighting).
    """
    check_interarrival(law)
    out = law.size_biased_sample(rng, size=size)
    return float(out) if size is None else np.asarray(out, dtype=float)


def sample_stationary_delay(law, rng, size=None):
    """Draw ``(s0, xi0, u)``: the stationary delay and the pair that built it.

    ``xi0`` is a size-biased draw, ``u`` uniform on [0, 1), and
    ``s0 = u * xi0`` follows the integrated-tail law (the limiting overshoot).
    The pair is returned so the matching undershoot ``(1 - u) * xi0`` can be
    reconstructed.
    """
    check_interarrival(law)
    if size is None:
        xi0 = float(law.size_biased_sample(rng))
        u = float(rng.uniform())
        return u * xi0, xi0, u
    xi0 = np.asarray(law.size_biased_sample(rng, size=size), dtype=float)
    u = rng.uniform(size=size)
    return u * xi0, xi0, u


def integrated_tail_cdf(law, x):
    """CDF of the integrated-tail law: ``F*(x) = E[min(X, x)] / E[X]``.

    Closed form for every family (the limited-expected-value identity turns
    the tail integral into family CDFs).  ``x`` may be a scalar or array;
    negative ``x`` is a domain error.
    """
    check_interarrival(law)
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise LawError("integrated tail CDF is defined on x >= 0")
    out = np.asarray(law.mean_min(arr) / law.mean())
    out = np.clip(out, 0.0, 1.0)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def abs_quantile(law, p):
    """Upper bound for the ``p``-quantile of ``|X|`` (valid for signed laws)."""
    half = 0.5 * (1.0 - p)
    return max(abs(law.quantile(half)), abs(law.quantile(1.0 - half)))


def _rational(value):
    frac = Fraction(value).limit_denominator(LATTICE_MAX_DENOMINATOR)
    if abs(float(frac) - value) <= _LATTICE_ATOL * max(1.0, abs(value)):
        return frac
    return None


def lattice_span(law):
    """Largest span ``d`` with all mass on ``d * Z``, or None if nonlattice.

    Commensurability of finite-discrete atoms is decided via rational
    approximation with denominators up to ``LATTICE_MAX_DENOMINATOR``.
    """
    if isinstance(law, PointMass):
        return abs(law.value) if law.value != 0 else None
    if isinstance(law, FiniteDiscrete):
        fracs = []
        for v, _ in law.atoms:
            f = _rational(v)
            if f is None or f == 0:
                return None
            fracs.append(abs(f))
        g = reduce(
            lambda a, b: Fraction(math.gcd(a.numerator, b.numerator), math.lcm(a.denominator, b.denominator)),
            fracs,
        )
        return float(g)
    return None


def is_lattice(law):
    return lattice_span(law) is not None


_FAMILY_TAGS = {
    Exponential: "exponential",
    Gamma: "gamma",
    Uniform: "uniform",
    LogNormal: "lognormal",
    PointMass: "point_mass",
    FiniteDiscrete: "finite_discrete",
    Pareto: "pareto",
}


def law_to_config(law):
    """Serialize a law to its flat config dict."""
    tag = _FAMILY_TAGS[type(law)]
    if isinstance(law, FiniteDiscrete):
        return {"family": tag, "atoms": [[v, p] for v, p in law.atoms]}
    fields = {
        "exponential": ("rate",),
        "gamma": ("shape", "scale"),
        "uniform": ("lo", "hi"),
        "lognormal": ("mu", "sigma"),
        "point_mass": ("value",),
        "pareto": ("alpha", "xm"),
    }[tag]
    return {"family": tag, **{f: getattr(law, f) for f in fields}}


def law_from_config(config, interarrival=False):
    """Build a law from a config dict; optionally enforce the interarrival role."""
    if not isinstance(config, dict) or "family" not in config:
        raise LawError("law config must be a dict with a 'family' key")
    body = {k: v for k, v in config.items() if k != "family"}
    family = config["family"]
    try:
        if family == "exponential":
            law = Exponential(rate=float(body.pop("rate")))
        elif family == "gamma":
            law = Gamma(shape=float(body.pop("shape")), scale=float(body.pop("scale")))
        elif family == "uniform":
            law = Uniform(lo=float(body.pop("lo")), hi=float(body.pop("hi")))
        elif family == "lognormal":
            law = LogNormal(mu=float(body.pop("mu")), sigma=float(body.pop("sigma")))
        elif family == "point_mass":
            law = PointMass(value=float(body.pop("value")))
        elif family == "finite_discrete":
            law = FiniteDiscrete(atoms=tuple((float(v), float(p)) for v, p in body.pop("atoms")))
        elif family == "pareto":
            law = Pareto(alpha=float(body.pop("alpha")), xm=float(body.pop("xm")))
        else:
            raise LawError(f"unknown law family {family!r}")
    except (KeyError, TypeError) as exc:
        raise LawError(f"law config for family {family!r} is malformed: {exc}") from exc
    if body:
        raise LawError(f"law config for family {family!r} has unknown keys {sorted(body)}")
    if interarrival:
        check_interarrival(law)
    return law

"""Smoothing-noise families: parameters, densities, moments, and sampling.

Three families are supported: generalized Gaussian noise (i.i.d. per
coordinate, density proportional to exp(-(|z|/b)^q)), uniform noise on the
box [-b, b]^d, and uniform noise on the l1 ball of radius b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.integrate import quad

from ._backend import kernels
from .statkernel import log_gamma

MAX_SHAPE = 1.0e6
MGF_GEOMETRIC_CONSTANT = 1.85

_SUBSTREAM_BITS = 32


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream identified by (seed, stream_id).

    Streams with distinct ids are statistically independent.  ``substream``
    derives child ids in disjoint blocks, so a parent that fans work out to
    numbered children never collides with another top-level stream.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.stream_id < 0:
            raise ValueError(f"stream_id must be non-negative, got {self.stream_id}")

    def generator(self) -> np.random.Generator:
        """Fresh generator at the start of this stream."""
        seq = np.random.SeedSequence((self.seed, self.stream_id))
        return np.random.Generator(np.random.PCG64(seq))

    def substream(self, index: int) -> "RngStream":
        """Child stream ``index``; ids of children never overlap parents."""
        if not 0 <= index < 2**_SUBSTREAM_BITS:
            raise ValueError(f"substream index out of range: {index}")
        return RngStream(self.seed, ((self.stream_id + 1) << _SUBSTREAM_BITS) | index)


@dataclass(frozen=True)
class GeneralizedGaussian:
    """Noise with per-coordinate density exp(-(|z|/b)^q) / C."""

    q: float
    b: float

    def __post_init__(self) -> None:
        if not 0.0 < self.q <= MAX_SHAPE:
            raise ValueError(f"shape q must lie in (0, {MAX_SHAPE:.0e}], got {self.q}")
        if not self.b > 0.0:
            raise ValueError(f"scale b must be positive, got {self.b}")

    @property
    def sigma(self) -> float:
        return sigma_from_scale(self.q, self.b)

    @classmethod
    def from_sigma(cls, q: float, sigma: float) -> "GeneralizedGaussian":
        return cls(q, scale_from_sigma(q, sigma))


@dataclass(frozen=True)
class UniformLinf:
    """Uniform noise on the box [-b, b]^d (i.i.d. per coordinate)."""

    b: float

    def __post_init__(self) -> None:
        if not self.b > 0.0:
            raise ValueError(f"half-width b must be positive, got {self.b}")

    @property
    def sigma(self) -> float:
        return self.b / math.sqrt(3.0)

    @classmethod
    def from_sigma(cls, sigma: float) -> "UniformLinf":
        if not sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {sigma}")
        return cls(sigma * math.sqrt(3.0))


@dataclass(frozen=True)
class UniformL1:
    """Uniform noise on the l1 ball of radius b (coordinates dependent)."""

    b: float

    def __post_init__(self) -> None:
        if not self.b > 0.0:
            raise ValueError(f"l1 radius b must be positive, got {self.b}")


SmoothingDistribution = Union[GeneralizedGaussian, UniformLinf, UniformL1]


def _check_qb(q: float, b: float) -> None:
    if not q > 0.0:
        raise ValueError(f"shape q must be positive, got {q}")
    if not b > 0.0:
        raise ValueError(f"scale b must be positive, got {b}")


def log_gengauss_normalizer(q: float, b: float) -> float:
    """log of the 1-d normalizer 2 b Gamma(1/q) / q."""
    _check_qb(q, b)
    return math.log(2.0 * b) + log_gamma(1.0 / q) - math.log(q)


def gengauss_normalizer(q: float, b: float) -> float:
    """Normalizer 2 b Gamma(1/q) / q of the unnormalized density."""
    log_c = log_gengauss_normalizer(q, b)
    return math.exp(log_c) if log_c < 709.0 else math.inf


def sigma_from_scale(q: float, b: float) -> float:
    """Per-coordinate standard deviation: sigma^2 = b^2 Gamma(3/q)/Gamma(1/q)."""
    _check_qb(q, b)
    return b * math.exp(0.5 * (log_gamma(3.0 / q) - log_gamma(1.0 / q)))


def scale_from_sigma(q: float, sigma: float) -> float:
    """Inverse of :func:`sigma_from_scale` in the scale argument."""
    _check_qb(q, sigma)
    return sigma * math.exp(0.5 * (log_gamma(1.0 / q) - log_gamma(3.0 / q)))


def even_moment(q: float, b: float, n: int) -> float:
    """E[Z^n] = b^n Gamma((n+1)/q) / Gamma(1/q) for even n (odd moments are 0)."""
    _check_qb(q, b)
    if n < 0 or n != int(n):
        raise ValueError(f"moment order must be a non-negative integer, got {n}")
    if n % 2 != 0:
        raise ValueError(f"only even moments are supported (odd moments vanish), got n={n}")
    if n == 0:
        return 1.0
    return math.exp(n * math.log(b) + log_gamma((n + 1.0) / q) - log_gamma(1.0 / q))


def log_density(dist: SmoothingDistribution, z) -> float:
    """Joint log-density of the noise vector ``z`` under ``dist``.

    Returns -inf outside the support of the uniform variants.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if not np.all(np.isfinite(z)):
        raise ValueError("noise vector must be finite")
    d = z.size
    if isinstance(dist, GeneralizedGaussian):
        log_c = log_gengauss_normalizer(dist.q, dist.b)
        return float(-np.sum((np.abs(z) / dist.b) ** dist.q) - d * log_c)
    if isinstance(dist, UniformLinf):
        if np.all(np.abs(z) <= dist.b):
            return -d * math.log(2.0 * dist.b)
        return -math.inf
    if isinstance(dist, UniformL1):
        if np.sum(np.abs(z)) <= dist.b:
            return log_gamma(d + 1.0) - d * math.log(2.0 * dist.b)
        return -math.inf
    raise TypeError(f"unknown smoothing distribution: {dist!r}")


def fill_noise(dist: SmoothingDistribution, out: np.ndarray, generator: np.random.Generator) -> None:
    """Fill an (n, d) array with noise rows, consuming ``generator`` statefully."""
    if out.ndim != 2:
        raise ValueError("output buffer must be 2-d")
    if isinstance(dist, GeneralizedGaussian):
        kernels.gengauss_fill(generator, out.reshape(-1), dist.q, dist.b)
    elif isinstance(dist, UniformLinf):
        kernels.uniform_linf_fill(generator, out.reshape(-1), dist.b)
    elif isinstance(dist, UniformL1):
        kernels.uniform_l1_fill(generator, out, dist.b)
    else:
        raise TypeError(f"unknown smoothing distribution: {dist!r}")


def sample(dist: SmoothingDistribution, d: int, rng, n: int | None = None) -> np.ndarray:
    """Draw noise of dimension ``d``: a (d,) vector, or (n, d) when n is given.

    ``rng`` may be an :class:`RngStream` (a fresh generator is derived, so the
    call is a pure function of the stream) or a ``numpy.random.Generator``
    (consumed statefully).
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    generator = rng.generator() if isinstance(rng, RngStream) else rng
    rows = 1 if n is None else int(n)
    if rows < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    out = np.empty((rows, d), dtype=np.float64)
    fill_noise(dist, out, generator)
    return out[0] if n is None else out


@dataclass(frozen=True)
class MgfBoundCheck:
    """Quadrature value of E[exp(tZ)] against its geometric-series bound."""

    lhs: float
    rhs: float
    holds: bool


def lemma1_constant(q: float) -> float:
    """sqrt(Gamma(1/q)/Gamma(3/q)); stays below 1.85 for every q >= 1."""
    if not q >= 1.0:
        raise ValueError(f"constant is only defined for q >= 1, got {q}")
    return math.exp(0.5 * (log_gamma(1.0 / q) - log_gamma(3.0 / q)))


def mgf_bound_check(q: float, b: float, t: float,
                    c: float = MGF_GEOMETRIC_CONSTANT) -> MgfBoundCheck:
    """Check E[exp(tZ)] <= 1/(1 - c^2 t^2 sigma^2) by adaptive quadrature.

    Valid in the convergence region c^2 t^2 sigma^2 < 1; the left side is
    integrated to absolute tolerance 1e-10.
    """
    _check_qb(q, b)
    if not q >= 1.0:
        raise ValueError(f"bound requires shape q >= 1, got {q}")
    if not t > 0.0:
        raise ValueError(f"t must be positive, got {t}")
    sigma = sigma_from_scale(q, b)
    rho = (c * t * sigma) ** 2
    if rho >= 1.0:
        raise ValueError(f"geometric series diverges: c^2 t^2 sigma^2 = {rho} >= 1")

    log_c_norm = log_gengauss_normalizer(q, b)

    def integrand(z: float) -> float:
        # log(2 cosh(tz)) = |tz| + log1p(exp(-2|tz|)), overflow-free
        u = abs(t * z)
        log_val = u + math.log1p(math.exp(-2.0 * u)) - (z / b) ** q - log_c_norm
        return math.exp(log_val) if log_val > -745.0 else 0.0

    lhs, _ = quad(integrand, 0.0, math.inf, epsabs=1e-12, epsrel=1e-12, limit=400)
    rhs = 1.0 / (1.0 - rho)
    return MgfBoundCheck(lhs=float(lhs), rhs=rhs, holds=lhs <= rhs + 1e-9)


def sigma_of(dist: SmoothingDistribution) -> float:
    """Per-coordinate standard deviation, where the family defines one."""
    if isinstance(dist, (GeneralizedGaussian, UniformLinf)):
        return dist.sigma
    raise ValueError("per-coordinate sigma of uniform-l1 noise depends on the dimension")


def is_gaussian(dist: SmoothingDistribution) -> bool:
    return isinstance(dist, GeneralizedGaussian) and dist.q == 2.0


# --- distribution spec mini-language ("gengauss:q=2,sigma=0.25", ...) ---

def parse_distribution(text: str) -> SmoothingDistribution:
    """Parse a distribution spec string used by the CLI and config files."""
    head, _, params_text = text.strip().partition(":")
    family = head.strip().lower()
    params: dict[str, float] = {}
    if params_text:
        for item in params_text.split(","):
            key, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"malformed distribution parameter {item!r} in {text!r}")
            key = key.strip().lower()
            if key in params:
                raise ValueError(f"duplicate parameter {key!r} in {text!r}")
            try:
                params[key] = float(value)
            except ValueError:
                raise ValueError(f"non-numeric value for {key!r} in {text!r}") from None

    def _take_scale(allow_sigma: bool, to_b) -> float:
        has_b, has_sigma = "b" in params, "sigma" in params
        if has_b and has_sigma:
            raise ValueError(f"give exactly one of b= or sigma= in {text!r}")
        if has_b:
            return params.pop("b")
        if has_sigma and allow_sigma:
            return to_b(params.pop("sigma"))
        raise ValueError(f"missing scale parameter in {text!r}")

    if family == "gengauss":
        if "q" not in params:
            raise ValueError(f"gengauss spec needs q=, got {text!r}")
        q = params.pop("q")
        b = _take_scale(True, lambda s: scale_from_sigma(q, s))
        dist: SmoothingDistribution = GeneralizedGaussian(q, b)
    elif family == "uniform-linf":
        b = _take_scale(True, lambda s: s * math.sqrt(3.0))
        dist = UniformLinf(b)
    elif family == "uniform-l1":
        b = _take_scale(False, None)
        dist = UniformL1(b)
    else:
        raise ValueError(f"unknown distribution family {family!r} in {text!r}")
    if params:
        raise ValueError(f"unexpected parameters {sorted(params)} in {text!r}")
    return dist


def format_distribution(dist: SmoothingDistribution) -> str:
    """Canonical spec string for ``dist`` (inverse of :func:`parse_distribution`)."""
    if isinstance(dist, GeneralizedGaussian):
        return f"gengauss:q={dist.q!r},b={dist.b!r}"
    if isinstance(dist, UniformLinf):
        return f"uniform-linf:b={dist.b!r}"
    if isinstance(dist, UniformL1):
        return f"uniform-l1:b={dist.b!r}"
    raise TypeError(f"unknown smoothing distribution: {dist!r}")

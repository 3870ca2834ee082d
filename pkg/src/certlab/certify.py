"""Smoothed-classifier prediction and certification.

Monte-Carlo estimation of the top-class probability with an exact binomial
lower bound, and the Gaussian l2/lp certified radius.  All sampling is
chunked over numbered substreams, so results do not depend on how many
workers execute the chunks.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .distributions import (
    RngStream,
    SmoothingDistribution,
    fill_noise,
    is_gaussian,
    sigma_of,
)
from .statkernel import clopper_pearson_lower, std_normal_inv_cdf

ABSTAIN = -1
CHUNK_SAMPLES = 10_000

NO_CERTIFICATE_NOTE = "no certificate available for this smoothing family"

RESULT_CSV_COLUMNS = ("point_id", "class", "abstain", "p1_lower", "p2_upper", "p", "radius")


class BaseClassifier(ABC):
    """Deterministic labeler mapping points in R^d to classes {0..C-1}."""

    num_classes: int

    @abstractmethod
    def predict(self, points: np.ndarray) -> np.ndarray:
        """Labels for a batch of points, shape (n, d) -> (n,)."""


@dataclass(frozen=True)
class CertifyConfig:
    """Sample counts, confidence level, and seed for one certification."""

    n0: int = 100
    n: int = 100_000
    alpha: float = 0.001
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n0 < 1 or self.n < 1:
            raise ValueError(f"sample counts must be >= 1, got n0={self.n0}, n={self.n}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class ProbabilityPair:
    """Top-two class probabilities (p1 most likely, p2 runner-up)."""

    p1: float
    p2: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p2 <= self.p1 <= 1.0:
            raise ValueError(f"need 0 <= p2 <= p1 <= 1, got p1={self.p1}, p2={self.p2}")
        if self.p1 + self.p2 > 1.0 + 1e-15:
            raise ValueError(f"need p1 + p2 <= 1, got p1={self.p1}, p2={self.p2}")


@dataclass(frozen=True)
class CertificateResult:
    """Outcome of one certification run.

    ``radii`` holds (norm order, radius) pairs, nonincreasing in the order;
    it is empty on abstention and for families without a certificate (the
    latter carry ``no_certificate_reason``).
    """

    predicted_class: int
    abstain: bool
    p1_lower: float
    p2_upper: float
    radii: tuple[tuple[float, float], ...]
    n0: int
    n: int
    alpha: float
    seed: int
    dimension: int
    no_certificate_reason: str | None = None


def _chunk_sizes(total: int) -> list[int]:
    full, rem = divmod(total, CHUNK_SAMPLES)
    return [CHUNK_SAMPLES] * full + ([rem] if rem else [])


def _class_counts(h: BaseClassifier, x: np.ndarray, dist: SmoothingDistribution,
                  total: int, base: RngStream, workers: int = 1) -> np.ndarray:
    """Class histogram of h(x + noise) over ``total`` draws.

    Chunk j always draws from ``base.substream(j)`` and the per-chunk counts
    are summed, so the histogram is identical for any worker count.
    """
    x = np.asarray(x, dtype=float)
    d = x.size
    sizes = _chunk_sizes(total)

    def run_chunk(job: tuple[int, int]) -> np.ndarray:
        index, size = job
        noise = np.empty((size, d), dtype=np.float64)
        fill_noise(dist, noise, base.substream(index).generator())
        noise += x
        labels = np.asarray(h.predict(noise))
        return np.bincount(labels, minlength=h.num_classes)

    jobs = list(enumerate(sizes))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(run_chunk, jobs))
    else:
        partials = [run_chunk(job) for job in jobs]

    counts = np.zeros(h.num_classes, dtype=np.int64)
    for part in partials:
        counts[: part.size] += part
    return counts


def smoothed_predict(h: BaseClassifier, x: np.ndarray, dist: SmoothingDistribution,
                     n0: int, rng: RngStream, workers: int = 1) -> int:
    """Plurality class of h over n0 noisy copies of x (ties -> lowest label)."""
    if n0 < 1:
        raise ValueError(f"n0 must be >= 1, got {n0}")
    counts = _class_counts(h, x, dist, n0, rng, workers)
    return int(np.argmax(counts))


def estimate_p1_lower(h: BaseClassifier, x: np.ndarray, dist: SmoothingDistribution,
                      candidate: int, n: int, alpha: float, rng: RngStream,
                      workers: int = 1) -> float:
    """Exact lower confidence bound on P(h(x + noise) = candidate)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    counts = _class_counts(h, x, dist, n, rng, workers)
    k = int(counts[candidate]) if candidate < counts.size else 0
    return clopper_pearson_lower(k, n, alpha)


def p2_upper_from_p1(p1_lower: float) -> float:
    """Runner-up upper bound taken as the complement of the top lower bound."""
    if not 0.0 <= p1_lower <= 1.0:
        raise ValueError(f"p1_lower must lie in [0, 1], got {p1_lower}")
    return 1.0 - p1_lower


def gaussian_l2_radius(sigma: float, pair: ProbabilityPair) -> float:
    """Certified l2 radius sigma/2 (Phi^-1(p1) - Phi^-1(p2)) for Gaussian noise."""
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if not (0.0 < pair.p2 and pair.p1 < 1.0):
        raise ValueError(f"probabilities must lie strictly inside (0, 1), got {pair}")
    if pair.p1 == pair.p2:
        return 0.0
    return 0.5 * sigma * (std_normal_inv_cdf(pair.p1) - std_normal_inv_cdf(pair.p2))


def gaussian_lp_radius(sigma: float, d: int, p: float, pair: ProbabilityPair) -> float:
    """Certified lp radius for p >= 2 via norm equivalence: l2 / d^(1/2 - 1/p)."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if not p >= 2.0:
        raise ValueError(f"norm order must be >= 2 (use the l2 radius for p < 2), got {p}")
    exponent = 0.5 - (0.0 if math.isinf(p) else 1.0 / p)
    return gaussian_l2_radius(sigma, pair) / d**exponent


def certify(h: BaseClassifier, x: np.ndarray, dist: SmoothingDistribution,
            config: CertifyConfig, p_list, workers: int = 1,
            point_index: int = 0) -> CertificateResult:
    """Select a candidate class with n0 draws, bound its probability with n
    draws, and emit certified lp radii (Gaussian smoothing only).

    Abstains when the lower bound does not exceed 1/2.  Pure function of its
    arguments; chunk-to-substream assignment makes the result independent of
    ``workers``.
    """
    x = np.asarray(x, dtype=float)
    p_list = sorted(float(p) for p in p_list)
    if any(p < 2.0 for p in p_list):
        raise ValueError("norm orders must satisfy p >= 2")

    select_stream = RngStream(config.seed, 2 * point_index)
    estimate_stream = RngStream(config.seed, 2 * point_index + 1)

    candidate = smoothed_predict(h, x, dist, config.n0, select_stream, workers)
    p1_lower = estimate_p1_lower(h, x, dist, candidate, config.n, config.alpha,
                                 estimate_stream, workers)
    p2_upper = p2_upper_from_p1(p1_lower)

    abstain = p1_lower <= 0.5
    radii: tuple[tuple[float, float], ...] = ()
    reason = None
    if not abstain and p_list:
        if is_gaussian(dist):
            pair = ProbabilityPair(p1_lower, p2_upper)
            sigma = sigma_of(dist)
            radii = tuple((p, gaussian_lp_radius(sigma, x.size, p, pair)) for p in p_list)
        else:
            reason = NO_CERTIFICATE_NOTE

    return CertificateResult(
        predicted_class=ABSTAIN if abstain else candidate,
        abstain=abstain,
        p1_lower=p1_lower,
        p2_upper=p2_upper,
        radii=radii,
        n0=config.n0,
        n=config.n,
        alpha=config.alpha,
        seed=config.seed,
        dimension=int(x.size),
        no_certificate_reason=reason,
    )


def _norm_order_json(p: float):
    return "inf" if math.isinf(p) else p


def result_record(result: CertificateResult, point_id) -> dict:
    """JSON record for one certified point."""
    record = {
        "point_id": point_id,
        "class": result.predicted_class,
        "abstain": result.abstain,
        "p1_lower": result.p1_lower,
        "p2_upper": result.p2_upper,
        "radii": [{"p": _norm_order_json(p), "radius": r} for p, r in result.radii],
        "n0": result.n0,
        "n": result.n,
        "alpha": result.alpha,
        "seed": result.seed,
    }
    if result.no_certificate_reason is not None:
        record["no_certificate_reason"] = result.no_certificate_reason
    return record


def result_csv_rows(result: CertificateResult, point_id) -> list[dict]:
    """CSV mirror of :func:`result_record`: one row per norm order."""
    base = {
        "point_id": point_id,
        "class": result.predicted_class,
        "abstain": result.abstain,
        "p1_lower": result.p1_lower,
        "p2_upper": result.p2_upper,
    }
    if not result.radii:
        return [{**base, "p": "", "radius": ""}]
    return [{**base, "p": _norm_order_json(p), "radius": r} for p, r in result.radii]

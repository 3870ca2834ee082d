"""Executable worst-case classifiers and the oracles that verify them.

Each construction realizes an adversarial classifier that flips the smoothed
prediction at a predicted shift: a half-space pair of thresholds on the
coordinate sum for i.i.d. noise, and shifted box / l1-ball colorings for the
uniform families.  Monte-Carlo and geometric checks confirm the predicted
flip points and region masses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .certify import CHUNK_SAMPLES, ProbabilityPair, _chunk_sizes
from .distributions import (
    GeneralizedGaussian,
    RngStream,
    SmoothingDistribution,
    UniformL1,
    UniformLinf,
    fill_noise,
    is_gaussian,
    sigma_of,
)
from .statkernel import std_normal_inv_cdf

LEMMA_SLACK = 1e-12


@dataclass(frozen=True)
class HalfSpaceConstruction:
    """Two-threshold adversarial classifier on the coordinate sum.

    Thresholds satisfy P(S <= s1) = p1 and P(S >= s2) = p2 for S the sum of
    the d noise coordinates; eps_star = (s1 + s2) / (2d) is the
    per-coordinate shift at which the smoothed top class changes.
    """

    dist: SmoothingDistribution
    d: int
    pair: ProbabilityPair
    s1: float
    s2: float
    eps_star: float
    s1_stderr: float = 0.0
    s2_stderr: float = 0.0


@dataclass(frozen=True)
class ShiftedBoxConstruction:
    """Box coloring: [-b,b]^d versus the same box shifted by eps per axis."""

    b: float
    d: int
    eps: float

    def __post_init__(self) -> None:
        _check_shift(self.b, self.eps)


@dataclass(frozen=True)
class ShiftedL1Construction:
    """l1-ball coloring: radius-b ball versus the ball shifted by eps along e1."""

    b: float
    d: int
    eps: float

    def __post_init__(self) -> None:
        _check_shift(self.b, self.eps)


@dataclass(frozen=True)
class FlipRow:
    """One multiplier of a flip verification run."""

    multiplier: float
    p1_hat: float
    p2_hat: float
    sign: int
    stderr: float
    conclusive: bool

    @property
    def status(self) -> str:
        return "OK" if self.conclusive else "INCONCLUSIVE"


@dataclass(frozen=True)
class BoxFlipReport:
    """Region-mass estimates for the shifted-box coloring."""

    rho_at_origin: float
    rho_at_shifted: float
    stderr: float
    expected: float
    consistent: bool


@dataclass(frozen=True)
class L1IntersectionCheck:
    in_intersection: bool
    lemma_holds: bool


def _check_shift(b: float, eps: float) -> None:
    if not b > 0.0:
        raise ValueError(f"radius b must be positive, got {b}")
    # eps = 2b (fully disjoint regions) is the degenerate endpoint and allowed
    if not 0.0 < eps <= 2.0 * b:
        raise ValueError(f"shift eps must lie in (0, 2b], got eps={eps}, b={b}")


def _mc_sums(dist: SmoothingDistribution, d: int, n: int, rng: RngStream) -> np.ndarray:
    """Coordinate sums of n noise draws, chunked over numbered substreams."""
    sums = np.empty(n, dtype=np.float64)
    buf = np.empty((CHUNK_SAMPLES, d), dtype=np.float64)
    pos = 0
    for j, size in enumerate(_chunk_sizes(n)):
        block = buf[:size]
        fill_noise(dist, block, rng.substream(j).generator())
        sums[pos:pos + size] = block.sum(axis=1)
        pos += size
    return sums


def _quantile_with_stderr(sorted_values: np.ndarray, prob: float) -> tuple[float, float]:
    """Empirical quantile plus an order-statistic standard error."""
    n = sorted_values.size
    value = float(np.quantile(sorted_values, prob))
    halfwidth = math.sqrt(n * prob * (1.0 - prob))
    lo = int(np.clip(math.ceil(n * prob - halfwidth) - 1, 0, n - 1))
    hi = int(np.clip(math.ceil(n * prob + halfwidth) - 1, 0, n - 1))
    return value, 0.5 * float(sorted_values[hi] - sorted_values[lo])


def build_halfspace(dist: SmoothingDistribution, d: int, pair: ProbabilityPair,
                    rng: RngStream | None = None,
                    quantile_samples: int = 1_000_000) -> HalfSpaceConstruction:
    """Thresholds for the half-space construction at the requested (p1, p2).

    Gaussian noise uses the exact normal-sum quantiles; the other i.i.d.
    families estimate them from ``quantile_samples`` draws and report the
    order-statistic standard errors.
    """
    if isinstance(dist, UniformL1):
        raise ValueError("uniform-l1 noise is not coordinate-i.i.d.; no half-space construction")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if not pair.p1 >= 0.5:
        raise ValueError(f"construction needs p1 >= 1/2, got {pair.p1}")
    if pair.p2 <= 0.0 or pair.p1 >= 1.0:
        raise ValueError("quantile thresholds need interior probabilities (0 < p2, p1 < 1)")

    if is_gaussian(dist):
        sum_sd = sigma_of(dist) * math.sqrt(d)
        s1 = sum_sd * std_normal_inv_cdf(pair.p1)
        s2 = -sum_sd * std_normal_inv_cdf(pair.p2)
        se1 = se2 = 0.0
    else:
        if rng is None:
            raise ValueError("non-Gaussian thresholds need an RngStream for quantile estimation")
        sums = np.sort(_mc_sums(dist, d, quantile_samples, rng))
        s1, se1 = _quantile_with_stderr(sums, pair.p1)
        s2, se2 = _quantile_with_stderr(sums, 1.0 - pair.p2)

    return HalfSpaceConstruction(dist=dist, d=d, pair=pair, s1=s1, s2=s2,
                                 eps_star=(s1 + s2) / (2.0 * d),
                                 s1_stderr=se1, s2_stderr=se2)


def halfspace_classify(c: HalfSpaceConstruction, w) -> int:
    """Label of one point: 1 below s1, 2 above s2, 3 in the gap."""
    w = np.asarray(w, dtype=float)
    if w.size != c.d:
        raise ValueError(f"point has dimension {w.size}, construction expects {c.d}")
    total = float(w.sum())
    if total <= c.s1:
        return 1
    if total >= c.s2:
        return 2
    return 3


def verify_flip(c: HalfSpaceConstruction, shifts, n: int, rng: RngStream,
                confidence: float = 0.99) -> list[FlipRow]:
    """Smoothed class-1/class-2 probabilities at shifted points.

    Each multiplier m evaluates the construction at the point with every
    coordinate equal to m * eps_star.  The sign of p1 - p2 is marked
    conclusive when it exceeds the joint standard error at ``confidence``
    (two-sided); otherwise the row is INCONCLUSIVE rather than wrong.
    """
    if n < 10_000:
        raise ValueError(f"flip verification needs n >= 10^4, got {n}")
    z = std_normal_inv_cdf(0.5 * (1.0 + confidence))
    rows = []
    for i, m in enumerate(shifts):
        shift_total = m * c.eps_star * c.d
        sums = _mc_sums(c.dist, c.d, n, rng.substream(i))
        count1 = int(np.count_nonzero(sums <= c.s1 - shift_total))
        count2 = int(np.count_nonzero(sums >= c.s2 - shift_total))
        p1_hat, p2_hat = count1 / n, count2 / n
        # class-1/class-2 indicators come from the same draws (multinomial):
        # var(p1 - p2) = (p1(1-p1) + p2(1-p2) + 2 p1 p2) / n
        var = (p1_hat * (1 - p1_hat) + p2_hat * (1 - p2_hat) + 2 * p1_hat * p2_hat) / n
        stderr = math.sqrt(var)
        diff = p1_hat - p2_hat
        sign = 0 if diff == 0 else (1 if diff > 0 else -1)
        rows.append(FlipRow(multiplier=float(m), p1_hat=p1_hat, p2_hat=p2_hat,
                            sign=sign, stderr=stderr,
                            conclusive=abs(diff) > z * stderr))
    return rows


def flip_lp_norm(c: HalfSpaceConstruction, p: float) -> float:
    """lp norm of the flip point: eps_star * d^(1/p) (eps_star at p = inf)."""
    if not p > 0.0:
        raise ValueError(f"norm order must be positive, got {p}")
    if math.isinf(p):
        return c.eps_star
    return c.eps_star * c.d ** (1.0 / p)


# --- shifted-box construction ---

def box_overlap_prob(b: float, d: int, eps: float) -> float:
    """Mass of the box minus its shifted copy: 1 - (1 - eps/2b)^d."""
    _check_shift(b, eps)
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return 1.0 - (1.0 - eps / (2.0 * b)) ** d


def box_flip_threshold(b: float, d: int) -> float:
    """Shift at which the box coloring flips: 2b (1 - 2^(-1/d)); always < 2b/d."""
    if not b > 0.0:
        raise ValueError(f"half-width b must be positive, got {b}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return 2.0 * b * (1.0 - 2.0 ** (-1.0 / d))


def box_flip_verify(construction: ShiftedBoxConstruction, n: int,
                    rng: RngStream) -> BoxFlipReport:
    """Estimate the one-sided region masses of the box coloring.

    At the origin the class-1 mass is P(min_i noise_i < -b + eps); at the
    shifted point the class-2 mass is P(max_i noise_i > b - eps).  Both equal
    :func:`box_overlap_prob` exactly; the report checks the two estimates
    against each other and against the closed form at 3 standard errors.
    """
    if n < 10_000:
        raise ValueError(f"verification needs n >= 10^4, got {n}")
    b, d, eps = construction.b, construction.d, construction.eps
    dist = UniformLinf(b)

    counts = [0, 0]
    buf = np.empty((CHUNK_SAMPLES, d), dtype=np.float64)
    for phase in (0, 1):
        base = rng.substream(phase)
        for j, size in enumerate(_chunk_sizes(n)):
            block = buf[:size]
            fill_noise(dist, block, base.substream(j).generator())
            if phase == 0:
                counts[0] += int(np.count_nonzero(block.min(axis=1) < -b + eps))
            else:
                counts[1] += int(np.count_nonzero(block.max(axis=1) > b - eps))

    rho0, rho1 = counts[0] / n, counts[1] / n
    expected = box_overlap_prob(b, d, eps)
    se = math.sqrt((rho0 * (1 - rho0) + rho1 * (1 - rho1)) / n)
    se_each = math.sqrt(max(expected * (1 - expected), 1.0 / n) / n)
    consistent = (abs(rho0 - rho1) <= 3.0 * max(se, 1e-9)
                  and abs(rho0 - expected) <= 3.0 * se_each + 1e-9
                  and abs(rho1 - expected) <= 3.0 * se_each + 1e-9)
    return BoxFlipReport(rho_at_origin=rho0, rho_at_shifted=rho1,
                         stderr=se, expected=expected, consistent=consistent)


# --- shifted l1-ball construction ---

def l1_ball_volume(b: float, d: int) -> float:
    """Volume 2^d b^d / d! of the l1 ball (evaluated in log space)."""
    if not b > 0.0:
        raise ValueError(f"radius b must be positive, got {b}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return math.exp(d * math.log(2.0 * b) - math.lgamma(d + 1.0))


def l1_overlap_prob_lower(b: float, d: int, eps: float) -> float:
    """Lower bound 1 - (1 - eps/2b)^d on the mass of the ball minus its shift."""
    _check_shift(b, eps)
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return 1.0 - (1.0 - eps / (2.0 * b)) ** d


def l1_intersection_check(b: float, d: int, eps: float, w) -> L1IntersectionCheck:
    """Check one point against the containing-ball property of the overlap.

    Every point of the intersection of the two balls must lie in the l1 ball
    of radius b - eps/2 centered at (eps/2) e1 (up to 1e-12 slack).
    """
    _check_shift(b, eps)
    w = np.asarray(w, dtype=float)
    if w.size != d:
        raise ValueError(f"point has dimension {w.size}, expected {d}")
    norm = float(np.sum(np.abs(w)))
    shifted = norm - abs(w[0]) + abs(w[0] - eps)
    inside = bool(norm <= b and shifted <= b)
    centered = norm - abs(w[0]) + abs(w[0] - 0.5 * eps)
    holds = bool((not inside) or centered <= b - 0.5 * eps + LEMMA_SLACK)
    return L1IntersectionCheck(in_intersection=inside, lemma_holds=holds)


def l1_overlap_mc(b: float, d: int, eps: float, n: int,
                  rng: RngStream) -> tuple[float, float]:
    """MC estimate (value, stderr) of the true overlap mass rho for the l1 shift."""
    _check_shift(b, eps)
    if n < 10_000:
        raise ValueError(f"verification needs n >= 10^4, got {n}")
    dist = UniformL1(b)
    count = 0
    buf = np.empty((CHUNK_SAMPLES, d), dtype=np.float64)
    for j, size in enumerate(_chunk_sizes(n)):
        block = buf[:size]
        fill_noise(dist, block, rng.substream(j).generator())
        norms = np.abs(block).sum(axis=1) - np.abs(block[:, 0]) + np.abs(block[:, 0] - eps)
        count += int(np.count_nonzero(norms > b))
    rho = count / n
    return rho, math.sqrt(rho * (1.0 - rho) / n)


# --- verification suites (CLI `verify`) ---

@dataclass(frozen=True)
class SuiteReport:
    suite: str
    cells: list
    passed: bool

    def to_json(self) -> dict:
        return {"suite": self.suite, "cells": list(self.cells)}

    def summary_line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"suite {self.suite}: {verdict} ({len(self.cells)} cells)"


def default_flip_families() -> list[tuple[str, SmoothingDistribution]]:
    return [
        ("gengauss-q1", GeneralizedGaussian.from_sigma(1.0, 1.0)),
        ("gengauss-q2", GeneralizedGaussian.from_sigma(2.0, 1.0)),
        ("gengauss-q4", GeneralizedGaussian.from_sigma(4.0, 1.0)),
        ("uniform-linf", UniformLinf.from_sigma(1.0)),
    ]


def run_flip_suite(n: int = 100_000, seed: int = 0, dims=(4, 16, 64),
                   p1s=(0.7, 0.9), multipliers=(0.9, 1.1),
                   families=None, quantile_samples: int = 1_000_000) -> SuiteReport:
    """Sign of p1 - p2 on either side of the predicted flip shift."""
    families = default_flip_families() if families is None else families
    base = RngStream(seed, 0)
    cells = []
    index = 0
    for name, dist in families:
        for d in dims:
            for p1 in p1s:
                cell_rng = base.substream(index)
                index += 1
                pair = ProbabilityPair(p1, 1.0 - p1)
                c = build_halfspace(dist, d, pair, rng=cell_rng.substream(0),
                                    quantile_samples=quantile_samples)
                rows = verify_flip(c, multipliers, n, cell_rng.substream(1))
                for row in rows:
                    expected = 1 if row.multiplier < 1.0 else (-1 if row.multiplier > 1.0 else 0)
                    ok = (row.sign == expected and row.conclusive) if expected != 0 \
                        else abs(row.p1_hat - row.p2_hat) <= 3.0 * row.stderr
                    cells.append({
                        "family": name, "d": d, "p1": p1,
                        "multiplier": row.multiplier,
                        "statistic": row.p1_hat - row.p2_hat,
                        "stderr": row.stderr,
                        "expected": expected,
                        "status": row.status,
                        "pass": bool(ok),
                    })
    return SuiteReport("flip", cells, all(c["pass"] for c in cells))


def _lemma2_grid_violations(b: float, d: int, eps: float, step: float) -> tuple[int, int, int]:
    """(grid points, intersection points, violations) on the exhaustive grid."""
    half = b + eps
    points_per_axis = int(round(2.0 * half / step)) + 1
    axis = np.linspace(-half, half, points_per_axis)
    rest = np.stack(np.meshgrid(*([axis] * (d - 1)), indexing="ij"), axis=-1).reshape(-1, d - 1)
    rest_norm = np.abs(rest).sum(axis=1)
    total = points_per_axis * rest.shape[0]
    inter_count = 0
    violations = 0
    for x1 in axis:
        in_v1 = abs(x1) + rest_norm <= b
        in_v2 = abs(x1 - eps) + rest_norm <= b
        inter = in_v1 & in_v2
        holds = abs(x1 - 0.5 * eps) + rest_norm <= b - 0.5 * eps + LEMMA_SLACK
        inter_count += int(np.count_nonzero(inter))
        violations += int(np.count_nonzero(inter & ~holds))
    return total, inter_count, violations


def run_lemma2_suite(dims=(2, 3), b: float = 1.0, eps_values=(0.3, 1.0),
                     step: float = 0.02) -> SuiteReport:
    """Exhaustive containment check of the l1 intersection inside its ball."""
    cells = []
    for d in dims:
        for eps in eps_values:
            total, inter, violations = _lemma2_grid_violations(b, d, eps, step)
            cells.append({
                "d": d, "b": b, "eps": eps, "step": step,
                "grid_points": total, "intersection_points": inter,
                "statistic": violations, "stderr": 0.0, "expected": 0,
                "pass": violations == 0,
            })
    return SuiteReport("lemma2", cells, all(c["pass"] for c in cells))


def run_box_suite(cells_spec=((2, 0.2), (5, 0.1), (16, 0.05)), b: float = 1.0,
                  n: int = 1_000_000, seed: int = 0,
                  threshold_dims: int = 1024) -> SuiteReport:
    """Region-mass agreement for the box coloring plus the threshold inequality."""
    base = RngStream(seed, 1)
    cells = []
    for i, (d, eps) in enumerate(cells_spec):
        report = box_flip_verify(ShiftedBoxConstruction(b, d, eps), n, base.substream(i))
        cells.append({
            "d": d, "b": b, "eps": eps,
            "statistic": report.rho_at_origin,
            "statistic_shifted": report.rho_at_shifted,
            "stderr": report.stderr, "expected": report.expected,
            "pass": report.consistent,
        })
    worst_margin = min(2.0 * b / d - box_flip_threshold(b, d)
                       for d in range(1, threshold_dims + 1))
    cells.append({
        "d": threshold_dims, "b": b, "eps": None,
        "statistic": worst_margin, "stderr": 0.0, "expected": "threshold < 2b/d",
        "pass": worst_margin > 0.0,
    })
    return SuiteReport("box", cells, all(c["pass"] for c in cells))


def run_l1_suite(cells_spec=((2, 0.2), (3, 0.3), (5, 0.5)), b: float = 1.0,
                 n: int = 1_000_000, seed: int = 0) -> SuiteReport:
    """MC overlap mass of the shifted l1 ball against its closed-form lower bound."""
    base = RngStream(seed, 2)
    cells = []
    for i, (d, eps) in enumerate(cells_spec):
        rho, se = l1_overlap_mc(b, d, eps, n, base.substream(i))
        lower = l1_overlap_prob_lower(b, d, eps)
        cells.append({
            "d": d, "b": b, "eps": eps,
            "statistic": rho, "stderr": se, "expected": lower,
            "pass": rho >= lower - 3.0 * se,
        })
    return SuiteReport("l1", cells, all(c["pass"] for c in cells))


SUITES = {
    "flip": run_flip_suite,
    "lemma2": run_lemma2_suite,
    "box": run_box_suite,
    "l1": run_l1_suite,
}

"""Synthetic tasks and experiment drivers.

Stand-in classifiers (constant, linear, nearest-prototype) replace trained
networks so the certification pipelines can run at desk scale; the drivers
reproduce the bound-versus-certificate and resolution-scaling studies on
those tasks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bounds as bounds_mod
from .certify import (
    BaseClassifier,
    CertifyConfig,
    ProbabilityPair,
    RngStream,
    certify,
    estimate_p1_lower,
    gaussian_lp_radius,
    smoothed_predict,
)
from .distributions import GeneralizedGaussian, SmoothingDistribution, UniformLinf

BOUND_VS_CERT_COLUMNS = ("point_id", "q", "p", "p1_lower", "iid_bound", "gengauss_bound",
                         "gaussian_radius", "tighter_bound_id", "ratio", "abstain")
DIMENSION_SWEEP_COLUMNS = ("resolution", "d", "p", "p1_lower", "radius",
                           "projected_radius", "anchor_d", "abstain")


class ConstantClassifier(BaseClassifier):
    """Ignores its input and returns a fixed label."""

    def __init__(self, label: int, num_classes: int | None = None):
        if label < 0:
            raise ValueError(f"label must be non-negative, got {label}")
        self.label = int(label)
        self.num_classes = int(num_classes) if num_classes is not None else max(2, label + 1)
        if self.num_classes <= label:
            raise ValueError("num_classes must exceed the constant label")

    def predict(self, points: np.ndarray) -> np.ndarray:
        return np.full(points.shape[0], self.label, dtype=np.int64)


class LinearClassifier(BaseClassifier):
    """Half-space labeler: class 1 where w . z >= t, class 0 elsewhere."""

    num_classes = 2

    def __init__(self, w, t: float = 0.0):
        self.w = np.asarray(w, dtype=float)
        if self.w.ndim != 1 or not np.linalg.norm(self.w) > 0.0:
            raise ValueError("weight vector must be 1-d with positive norm")
        self.t = float(t)

    def predict(self, points: np.ndarray) -> np.ndarray:
        return (points @ self.w >= self.t).astype(np.int64)


class PrototypeClassifier(BaseClassifier):
    """Nearest-center labeler (ties break toward the earlier center)."""

    def __init__(self, centers, labels=None):
        self.centers = np.asarray(centers, dtype=float)
        if self.centers.ndim != 2:
            raise ValueError("centers must be a (k, d) array")
        if len(np.unique(self.centers, axis=0)) != len(self.centers):
            raise ValueError("prototype centers must be distinct")
        if labels is None:
            labels = np.arange(len(self.centers))
        self.labels = np.asarray(labels, dtype=np.int64)
        if self.labels.shape != (len(self.centers),):
            raise ValueError("labels must align with centers")
        self.num_classes = int(self.labels.max()) + 1

    def predict(self, points: np.ndarray) -> np.ndarray:
        # squared distances via the expansion; argmin picks the first minimum
        cross = points @ self.centers.T
        sq = np.sum(self.centers**2, axis=1)[None, :] - 2.0 * cross
        return self.labels[np.argmin(sq, axis=1)]


@dataclass(frozen=True)
class ResolutionSpec:
    """Image geometry: d = channels * side^2."""

    side: int
    channels: int = 3

    def __post_init__(self) -> None:
        if self.side < 1 or self.channels < 1:
            raise ValueError(f"side and channels must be >= 1, got {self}")

    @property
    def d(self) -> int:
        return self.channels * self.side * self.side


DEFAULT_SWEEP_RESOLUTIONS = (ResolutionSpec(8), ResolutionSpec(16), ResolutionSpec(32))


def pool_resolution(x, spec: ResolutionSpec, factor: int) -> tuple[np.ndarray, ResolutionSpec]:
    """Average-pool an image vector by non-overlapping factor x factor blocks.

    Pooling i.i.d. noise of per-pixel variance sigma^2 leaves variance
    sigma^2 / factor^2 per pooled pixel.
    """
    x = np.asarray(x, dtype=float)
    if x.size != spec.d:
        raise ValueError(f"vector has {x.size} entries, spec expects {spec.d}")
    if factor < 1 or spec.side % factor != 0:
        raise ValueError(f"side {spec.side} is not divisible by factor {factor}")
    side = spec.side
    small = side // factor
    img = x.reshape(spec.channels, small, factor, small, factor)
    pooled = img.mean(axis=(2, 4))
    return pooled.reshape(-1), ResolutionSpec(small, spec.channels)


def make_blob_task(d: int, n_classes: int = 2, separation: float = 4.0,
                   task_seed: int = 20_240_001) -> tuple[PrototypeClassifier, np.ndarray]:
    """Fixed-seed prototype task: Gaussian blob centers rescaled so the
    closest pair sits exactly ``separation`` apart.

    The unsmoothed classifier is perfect on the returned points (the centers
    themselves); under noise, p1 is controlled by the separation.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if n_classes < 2:
        raise ValueError(f"need at least 2 classes, got {n_classes}")
    if not separation > 0.0:
        raise ValueError(f"separation must be positive, got {separation}")
    gen = RngStream(task_seed, 0).generator()
    centers = gen.standard_normal((n_classes, d))
    dists = [np.linalg.norm(centers[i] - centers[j])
             for i in range(n_classes) for j in range(i + 1, n_classes)]
    centers *= separation / min(dists)
    return PrototypeClassifier(centers), centers.copy()


def smoothing_for_norm(p: float, sigma: float) -> SmoothingDistribution:
    """Noise family whose density level sets match the lp ball: q = p,
    with the box family standing in for p = inf."""
    if math.isinf(p):
        return UniformLinf.from_sigma(sigma)
    return GeneralizedGaussian.from_sigma(p, sigma)


def row_key(row: dict, columns) -> tuple:
    return tuple(str(row[c]) for c in columns)


def run_bound_vs_certificate(points, classifier: BaseClassifier, sigma: float,
                             p_list, config: CertifyConfig, q_list=None,
                             workers: int = 1, done_keys=frozenset()) -> list[dict]:
    """Estimate p1 under q = p smoothing and compare every possible
    certificate's upper bounds against the Gaussian certificate.

    One row per (point, p).  ``q_list`` may override the q = p pairing but
    must then align one-to-one with ``p_list``.  Rows whose
    (point_id, q, p) key is in ``done_keys`` are skipped (sweep resume).
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    p_list = [float(p) for p in p_list]
    if any(p < 2.0 for p in p_list):
        raise ValueError("norm orders must satisfy p >= 2")
    if q_list is None:
        q_list = ["inf" if math.isinf(p) else p for p in p_list]
    elif len(q_list) != len(p_list):
        raise ValueError("q_list must align one-to-one with p_list")

    rows = []
    for i, x in enumerate(points):
        d = x.size
        for j, (q, p) in enumerate(zip(q_list, p_list)):
            row = {"point_id": i, "q": q, "p": p, "p1_lower": None,
                   "iid_bound": None, "gengauss_bound": None,
                   "gaussian_radius": None, "tighter_bound_id": None,
                   "ratio": None, "abstain": False}
            if row_key(row, ("point_id", "q", "p")) in done_keys:
                continue
            dist = UniformLinf.from_sigma(sigma) if q == "inf" \
                else GeneralizedGaussian.from_sigma(float(q), sigma)
            cell = i * len(p_list) + j
            candidate = smoothed_predict(classifier, x, dist, config.n0,
                                         RngStream(config.seed, 2 * cell), workers)
            p1_lower = estimate_p1_lower(classifier, x, dist, candidate, config.n,
                                         config.alpha, RngStream(config.seed, 2 * cell + 1),
                                         workers)
            if p1_lower <= 0.5:
                row["abstain"] = True
                rows.append(row)
                continue
            pair = ProbabilityPair(p1_lower, 1.0 - p1_lower)
            iid = bounds_mod.iid_upper_bound(sigma, d, p, pair).value
            gg = bounds_mod.gengauss_upper_bound(sigma, d, p, pair).value
            radius = gaussian_lp_radius(sigma, d, p, pair)
            tighter = "iid" if iid <= gg else "gengauss"
            row.update(p1_lower=p1_lower, iid_bound=iid, gengauss_bound=gg,
                       gaussian_radius=radius, tighter_bound_id=tighter,
                       ratio=min(iid, gg) / radius)
            rows.append(row)
    return rows


def run_dimension_sweep(resolutions, sigma: float, p_list, config: CertifyConfig,
                        separation: float = 4.0, task_seed: int = 20_240_001,
                        classifier_factory=None, workers: int = 1,
                        done_keys=frozenset()) -> list[dict]:
    """Certified radius versus input dimension under Gaussian smoothing.

    Each resolution gets its own synthetic task (or ``classifier_factory(d)
    -> (classifier, point)``); the projected radius rescales the smallest
    dimension's radius by (d0/d)^(1/2 - 1/p), mirroring how certificates
    would scale if p1 stayed constant.
    """
    resolutions = sorted(resolutions, key=lambda s: s.d)
    p_list = [float(p) for p in p_list]
    if any(p < 2.0 for p in p_list):
        raise ValueError("norm orders must satisfy p >= 2")

    results = []
    for spec in resolutions:
        if classifier_factory is None:
            classifier, points = make_blob_task(spec.d, separation=separation,
                                                task_seed=task_seed)
            point = points[0]
        else:
            classifier, point = classifier_factory(spec.d)
        dist = GeneralizedGaussian.from_sigma(2.0, sigma)
        result = certify(classifier, point, dist, config, p_list, workers=workers,
                         point_index=spec.d)
        results.append((spec, result))

    anchor_spec, anchor_result = results[0]
    anchor_radii = dict(anchor_result.radii)
    rows = []
    for spec, result in results:
        for p in p_list:
            row = {"resolution": spec.side, "d": spec.d, "p": p,
                   "p1_lower": result.p1_lower, "radius": None,
                   "projected_radius": None, "anchor_d": anchor_spec.d,
                   "abstain": result.abstain}
            if row_key(row, ("resolution", "d", "p")) in done_keys:
                continue
            if not result.abstain:
                row["radius"] = dict(result.radii).get(p)
            if anchor_radii.get(p) is not None:
                exponent = 0.5 - (0.0 if math.isinf(p) else 1.0 / p)
                row["projected_radius"] = anchor_radii[p] * (anchor_spec.d / spec.d) ** exponent
            rows.append(row)
    return rows


def p1_lower_by_q(classifier: BaseClassifier, x, sigma: float, q_list,
                  config: CertifyConfig, workers: int = 1) -> list[dict]:
    """p1 lower bound at fixed sigma across noise shapes q (same seed layout
    per q, so differences reflect the distribution alone)."""
    x = np.asarray(x, dtype=float)
    rows = []
    for j, q in enumerate(q_list):
        dist = GeneralizedGaussian.from_sigma(float(q), sigma)
        candidate = smoothed_predict(classifier, x, dist, config.n0,
                                     RngStream(config.seed, 2 * j), workers)
        p1_lower = estimate_p1_lower(classifier, x, dist, candidate, config.n,
                                     config.alpha, RngStream(config.seed, 2 * j + 1),
                                     workers)
        stderr = math.sqrt(max(p1_lower * (1.0 - p1_lower), 1.0 / config.n) / config.n)
        rows.append({"q": float(q), "candidate": candidate,
                     "p1_lower": p1_lower, "stderr": stderr})
    return rows


def crossing_scan(step: float = 1e-4) -> float:
    """Smallest grid p1 at which the generalized-Gaussian ratio drops below
    the i.i.d. ratio (binary case)."""
    if not 0.0 < step <= 1e-3:
        raise ValueError(f"grid step must lie in (0, 1e-3], got {step}")
    p1 = 0.5 + step
    while p1 < 1.0 - 1e-6:
        if bounds_mod.ratio_gengauss_to_gaussian(p1) < bounds_mod.ratio_iid_to_gaussian(p1):
            return p1
        p1 += step
    raise RuntimeError("no crossing found on the grid")

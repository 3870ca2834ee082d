"""Closed-form upper bounds on the largest certifiable lp radius.

Four smoothing families are covered: generic i.i.d. noise with variance
sigma^2 (Chebyshev argument), generalized Gaussian noise (Chernoff argument),
uniform noise on a box, and uniform noise on an l1 ball.  Each bound reports
whether its hypotheses held; out-of-hypothesis inputs still evaluate where
the arithmetic is finite so sweeps can chart the validity region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .certify import ProbabilityPair, gaussian_lp_radius
from .statkernel import std_normal_inv_cdf

THEOREM_IID = "iid-chebyshev"
THEOREM_GENGAUSS = "gengauss-chernoff"
THEOREM_LINF = "uniform-linf-box"
THEOREM_L1 = "uniform-l1-ball"

FAMILIES = ("iid", "gengauss", "uniform-linf", "uniform-l1")

SWEEP_CSV_COLUMNS = ("family", "sigma", "b", "d", "p", "p1", "p2", "theorem",
                     "bound", "preconditions_met", "gaussian_radius", "note")


@dataclass(frozen=True)
class BoundResult:
    """Upper-bound value with provenance and hypothesis status."""

    value: float
    theorem: str
    preconditions_met: bool
    precondition_notes: str = ""


@dataclass(frozen=True)
class BoundQuery:
    """One cell of a bound evaluation: family, scale, dimension, norm order.

    Exactly one of sigma/b may be given; the other is derived where the
    family defines a conversion (box noise: sigma^2 = b^2/3).
    """

    family: str
    d: int
    p: float
    sigma: float | None = None
    b: float | None = None
    pair: ProbabilityPair | None = None

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}, expected one of {FAMILIES}")
        if (self.sigma is None) == (self.b is None):
            raise ValueError("give exactly one of sigma or b")
        for name, value in (("sigma", self.sigma), ("b", self.b)):
            if value is not None and not value > 0.0:
                raise ValueError(f"{name} must be positive, got {value}")
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if not self.p > 0.0:
            raise ValueError(f"norm order must be positive, got {self.p}")

    def resolved_sigma(self) -> float:
        if self.sigma is not None:
            return self.sigma
        if self.family == "uniform-linf":
            return self.b / math.sqrt(3.0)
        raise ValueError(f"family {self.family!r} takes sigma, not b")

    def resolved_b(self) -> float:
        if self.b is not None:
            return self.b
        if self.family == "uniform-linf":
            return self.sigma * math.sqrt(3.0)
        raise ValueError(f"family {self.family!r} takes b, not sigma")


def _inv_p(p: float) -> float:
    if not p > 0.0:
        raise ValueError(f"norm order must be positive, got {p}")
    return 0.0 if math.isinf(p) else 1.0 / p


def _dim_power(d: int, exponent: float) -> float:
    # evaluated in log space so huge-d sweeps cannot overflow
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return math.exp(exponent * math.log(d))


def iid_upper_bound(sigma: float, d: int, p: float, pair: ProbabilityPair) -> BoundResult:
    """Chebyshev bound sigma/(2 sqrt2 d^(1/2-1/p)) (1/sqrt(1-p1) + 1/sqrt(p2))."""
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    notes = []
    if pair.p1 < 0.5:
        notes.append("requires p1 >= 1/2")
    if pair.p2 <= 0.0 or pair.p1 >= 1.0:
        notes.append("boundary probabilities make the bound infinite")
    term1 = math.inf if pair.p1 >= 1.0 else 1.0 / math.sqrt(1.0 - pair.p1)
    term2 = math.inf if pair.p2 <= 0.0 else 1.0 / math.sqrt(pair.p2)
    value = sigma / (2.0 * math.sqrt(2.0) * _dim_power(d, 0.5 - _inv_p(p))) * (term1 + term2)
    return BoundResult(value, THEOREM_IID, not notes, "; ".join(notes))


GENGAUSS_SHAPE_NOTE = "shape exponent q >= 1 assumed"


def gengauss_upper_bound(sigma: float, d: int, p: float, pair: ProbabilityPair) -> BoundResult:
    """Chernoff bound 2 sigma/d^(1/2-1/p) (sqrt(log 1/(1-p1)) + sqrt(log 1/p2))."""
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    window = math.exp(-d / 4.0)
    notes = [GENGAUSS_SHAPE_NOTE]
    met = True
    if not pair.p2 > window:
        notes.append("requires p2 > exp(-d/4)")
        met = False
    if not pair.p1 < 1.0 - window:
        notes.append("requires p1 < 1 - exp(-d/4)")
        met = False
    if pair.p2 <= 0.0 or pair.p1 >= 1.0:
        notes.append("boundary probabilities make the bound infinite")
        met = False
    term1 = math.inf if pair.p1 >= 1.0 else math.sqrt(math.log(1.0 / (1.0 - pair.p1)))
    term2 = math.inf if pair.p2 <= 0.0 else math.sqrt(math.log(1.0 / pair.p2))
    value = 2.0 * sigma / _dim_power(d, 0.5 - _inv_p(p)) * (term1 + term2)
    return BoundResult(value, THEOREM_GENGAUSS, met, "; ".join(notes))


def linf_uniform_upper_bound(b: float, d: int, p: float) -> BoundResult:
    """Box-shift bound 2b/d^(1-1/p); independent of the class probabilities."""
    if not b > 0.0:
        raise ValueError(f"half-width b must be positive, got {b}")
    value = 2.0 * b / _dim_power(d, 1.0 - _inv_p(p))
    return BoundResult(value, THEOREM_LINF, True, "")


def l1_uniform_upper_bound(b: float, d: int) -> BoundResult:
    """Ball-shift bound 2b/d; independent of both probabilities and p."""
    if not b > 0.0:
        raise ValueError(f"l1 radius b must be positive, got {b}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return BoundResult(2.0 * b / d, THEOREM_L1, True, "")


def evaluate_bound(query: BoundQuery) -> BoundResult:
    """Dispatch a :class:`BoundQuery` to the matching bound."""
    if query.family == "iid":
        return iid_upper_bound(query.resolved_sigma(), query.d, query.p, query.pair)
    if query.family == "gengauss":
        return gengauss_upper_bound(query.resolved_sigma(), query.d, query.p, query.pair)
    if query.family == "uniform-linf":
        return linf_uniform_upper_bound(query.resolved_b(), query.d, query.p)
    return l1_uniform_upper_bound(query.resolved_b(), query.d)


def ratio_iid_to_gaussian(p1: float) -> float:
    """Binary-case ratio of the i.i.d. bound to the Gaussian certificate.

    Equals 1 / (Phi^-1(p1) sqrt(2 (1 - p1))); depends on p1 alone.
    """
    if not 0.5 < p1 < 1.0:
        raise ValueError(f"p1 must lie in (1/2, 1), got {p1}")
    return 1.0 / (std_normal_inv_cdf(p1) * math.sqrt(2.0 * (1.0 - p1)))


def ratio_gengauss_to_gaussian(p1: float) -> float:
    """Binary-case ratio of the generalized-Gaussian bound to the certificate.

    Equals 4 sqrt(log(1/(1-p1))) / Phi^-1(p1).
    """
    if not 0.5 < p1 < 1.0:
        raise ValueError(f"p1 must lie in (1/2, 1), got {p1}")
    return 4.0 * math.sqrt(math.log(1.0 / (1.0 - p1))) / std_normal_inv_cdf(p1)


_PROB_FAMILIES = ("iid", "gengauss")


def bound_sweep(families, dims, ps, p1s, *, sigma: float | None = None,
                b: float | None = None, p2s=None) -> list[dict]:
    """Cartesian-product bound evaluation; one row dict per cell.

    Probability-dependent families iterate over (p1, p2) pairs (p2 defaults
    to 1 - p1); the uniform families accept an empty p1 list.  Per-cell
    errors are recorded in the row's ``note`` field, never raised.
    """
    families = list(families)
    dims = list(dims)
    ps = [float(p) for p in ps]
    p1s = list(p1s)
    if not families or not dims or not ps:
        raise ValueError("families, dims, and ps must be non-empty")
    if p2s is None:
        pairs = [(p1, 1.0 - p1) for p1 in p1s]
    else:
        if len(p2s) != len(p1s):
            raise ValueError("p2s must align one-to-one with p1s")
        pairs = list(zip(p1s, p2s))
    if any(f in _PROB_FAMILIES for f in families) and not pairs:
        raise ValueError("probability-dependent families need a non-empty p1 list")

    rows = []
    for family in families:
        cell_pairs = pairs if (family in _PROB_FAMILIES or pairs) else [(None, None)]
        for d in dims:
            for p in ps:
                for p1, p2 in cell_pairs:
                    rows.append(_sweep_cell(family, d, p, p1, p2, sigma, b))
    return rows


def _family_query(family, d, p, pair, sigma, b) -> BoundQuery:
    # mixed sweeps may carry both scales; each family picks the one it defines
    if family in _PROB_FAMILIES:
        if sigma is None:
            raise ValueError(f"family {family!r} needs sigma")
        return BoundQuery(family=family, d=d, p=p, sigma=sigma, pair=pair)
    if family == "uniform-linf":
        if b is not None:
            return BoundQuery(family=family, d=d, p=p, b=b, pair=pair)
        return BoundQuery(family=family, d=d, p=p, sigma=sigma, pair=pair)
    if b is None:
        raise ValueError(f"family {family!r} needs b")
    return BoundQuery(family=family, d=d, p=p, b=b, pair=pair)


def _sweep_cell(family, d, p, p1, p2, sigma, b) -> dict:
    row = {
        "family": family,
        "sigma": None,
        "b": None,
        "d": d,
        "p": p,
        "p1": p1,
        "p2": p2,
        "theorem": "",
        "bound": None,
        "preconditions_met": None,
        "gaussian_radius": None,
        "note": "",
    }
    try:
        pair = ProbabilityPair(p1, p2) if p1 is not None else None
        query = _family_query(family, d, p, pair, sigma, b)
        result = evaluate_bound(query)
        row["theorem"] = result.theorem
        row["bound"] = result.value
        row["preconditions_met"] = result.preconditions_met
        row["note"] = result.precondition_notes
        for label, resolver in (("sigma", query.resolved_sigma), ("b", query.resolved_b)):
            try:
                row[label] = resolver()
            except ValueError:
                pass
        if pair is not None and p >= 2.0 and 0.0 < pair.p2 <= pair.p1 < 1.0:
            try:
                row["gaussian_radius"] = gaussian_lp_radius(query.resolved_sigma(), d, p, pair)
            except ValueError:
                pass
    except ValueError as exc:
        row["note"] = str(exc)
    return row

"""Pure-numpy sampling kernels (fallback backend).

Both backends fill arrays by consuming the *identical* BitGenerator stream,
so a given (seed, stream_id) yields the same noise no matter which backend is
active.  The draw-order contract per call is:

* gengauss_fill:    m gamma(1 + 1/q) variates, m magnitude uniforms,
                    m sign uniforms
* uniform_linf_fill: m uniforms mapped as low + range * u
* uniform_l1_fill:  n*d standard exponentials (ziggurat), n*d sign uniforms,
                    n radius uniforms

The generalized-Gaussian magnitude uses |Z| = b * U * G^(1/q) with
G ~ Gamma(1 + 1/q), which has the same law as b * Gamma(1/q)^(1/q) but never
underflows, even for very large q.
"""

from __future__ import annotations

import numpy as np


def _gg_magnitude(g: np.ndarray, u: np.ndarray, q: float, b: float) -> np.ndarray:
    # sqrt/identity fast paths mirror the compiled kernel bit-for-bit
    if q == 2.0:
        root = np.sqrt(g)
    elif q == 1.0:
        root = g
    else:
        root = g ** (1.0 / q)
    return b * u * root


def gengauss_fill(generator: np.random.Generator, out: np.ndarray, q: float, b: float) -> None:
    """Fill ``out`` (1-d) with centered generalized-Gaussian variates."""
    m = out.shape[0]
    g = generator.standard_gamma(1.0 + 1.0 / q, m)
    u = generator.random(m)
    mag = _gg_magnitude(g, u, q, b)
    s = generator.random(m)
    np.copyto(out, np.where(s < 0.5, mag, -mag))


def uniform_linf_fill(generator: np.random.Generator, out: np.ndarray, b: float) -> None:
    """Fill ``out`` (1-d) with uniform variates on [-b, b]."""
    np.copyto(out, generator.uniform(-b, b, out.shape[0]))


def uniform_l1_fill(generator: np.random.Generator, out: np.ndarray, b: float) -> None:
    """Fill ``out`` (n, d) with rows uniform over the l1 ball of radius b."""
    n, d = out.shape
    e = generator.standard_exponential((n, d))
    s = generator.random((n, d))
    signed = np.where(s < 0.5, e, -e)
    u = generator.random(n)
    scale = b * u ** (1.0 / d) / e.sum(axis=1)
    np.copyto(out, signed * scale[:, None])

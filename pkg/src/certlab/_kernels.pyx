#cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampling kernels.

Same draw-order contract as ``_kernels_py`` (see its module docstring); the
loops below consume the BitGenerator stream through numpy's C distribution
API, so outputs match the fallback for an identical (seed, stream_id).
"""

import numpy as np

cimport numpy as np
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport pow as cpow, sqrt as csqrt
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (
    random_standard_exponential,
    random_standard_gamma,
    random_standard_uniform,
    random_uniform,
)


cdef bitgen_t *_state(object bit_generator) except NULL:
    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("invalid BitGenerator capsule")
    return <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")


def gengauss_fill(object generator, double[::1] out, double q, double b):
    """Fill ``out`` (1-d) with centered generalized-Gaussian variates."""
    cdef Py_ssize_t m = out.shape[0]
    cdef Py_ssize_t i
    cdef double inv_q = 1.0 / q
    cdef double shape = 1.0 + inv_q
    bit_generator = generator.bit_generator
    cdef bitgen_t *state = _state(bit_generator)
    with bit_generator.lock, nogil:
        for i in range(m):
            out[i] = random_standard_gamma(state, shape)
        if q == 2.0:
            for i in range(m):
                out[i] = b * random_standard_uniform(state) * csqrt(out[i])
        elif q == 1.0:
            for i in range(m):
                out[i] = b * random_standard_uniform(state) * out[i]
        else:
            for i in range(m):
                out[i] = b * random_standard_uniform(state) * cpow(out[i], inv_q)
        for i in range(m):
            if random_standard_uniform(state) >= 0.5:
                out[i] = -out[i]


def uniform_linf_fill(object generator, double[::1] out, double b):
    """Fill ``out`` (1-d) with uniform variates on [-b, b]."""
    cdef Py_ssize_t m = out.shape[0]
    cdef Py_ssize_t i
    cdef double low = -b
    cdef double rng = 2.0 * b
    bit_generator = generator.bit_generator
    cdef bitgen_t *state = _state(bit_generator)
    with bit_generator.lock, nogil:
        for i in range(m):
            out[i] = random_uniform(state, low, rng)


def uniform_l1_fill(object generator, double[:, ::1] out, double b):
    """Fill ``out`` (n, d) with rows uniform over the l1 ball of radius b."""
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t d = out.shape[1]
    cdef Py_ssize_t i, j
    cdef double inv_d = 1.0 / <double> d
    cdef double total, scale
    bit_generator = generator.bit_generator
    cdef bitgen_t *state = _state(bit_generator)
    with bit_generator.lock, nogil:
        for i in range(n):
            for j in range(d):
                out[i, j] = random_standard_exponential(state)
        for i in range(n):
            for j in range(d):
                if random_standard_uniform(state) >= 0.5:
                    out[i, j] = -out[i, j]
        for i in range(n):
            total = 0.0
            for j in range(d):
                total += out[i, j] if out[i, j] > 0.0 else -out[i, j]
            scale = b * cpow(random_standard_uniform(state), inv_d) / total
            for j in range(d):
                out[i, j] *= scale

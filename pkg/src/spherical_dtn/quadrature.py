"""Gauss-Legendre panels used by the norm and oracle computations."""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def _leggauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre_nodes(a, b, n):
    """Nodes and weights of the ``n``-point Gauss-Legendre rule on ``[a, b]``."""
    x, w = _leggauss(int(n))
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * x, half * w


def gauss_legendre(f, a, b, n=64):
    """Integrate the vectorised callable ``f`` over ``[a, b]`` with ``n`` nodes."""
    x, w = gauss_legendre_nodes(a, b, n)
    return np.sum(w * f(x), axis=-1)


def panel_with_error(f, a, b, n=20):
    """Integrate over one panel and estimate the error.

    The estimate is the difference between the ``n``-point and the
    ``2n``-point rules; the returned value is the ``2n``-point result.
    """
    coarse = gauss_legendre(f, a, b, n)
    fine = gauss_legendre(f, a, b, 2 * n)
    return fine, abs(fine - coarse)


def composite_gauss_legendre(f, breaks, n=32):
    """Sum of Gauss-Legendre integrals over consecutive intervals of ``breaks``."""
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b > a:
            total = total + gauss_legendre(f, a, b, n)
    return total

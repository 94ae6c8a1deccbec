"""Exact phase arithmetic helpers.

Phases of the form 2*pi*(p/q)*integer appear everywhere in chirp-multicarrier
math. Accumulating them in floating point drifts for large quadratic indices,
so every rational phase here is reduced modulo one revolution in exact integer
arithmetic first and only then converted to a complex exponential.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np


def unit_phasor(numer, denom: int) -> np.ndarray:
    """exp(2j*pi*numer/denom) with the fraction reduced mod 1 exactly.

    ``numer`` may be a (possibly signed) integer scalar or integer ndarray;
    ``denom`` must be a positive integer. Inputs must stay within int64.
    """
    if denom <= 0:
        raise ValueError("denominator must be positive")
    numer = np.asarray(numer, dtype=np.int64)
    frac = np.mod(numer, denom) / float(denom)
    return np.exp(2j * np.pi * frac)


def rational_phasor(coeff: Fraction, index_sq) -> np.ndarray:
    """exp(2j*pi*coeff*index_sq) for exact rational ``coeff``."""
    p, q = coeff.numerator, coeff.denominator
    return unit_phasor(p * np.asarray(index_sq, dtype=np.int64), q)


def real_phasor(coeff: float, index_sq) -> np.ndarray:
    """exp(2j*pi*coeff*index_sq) for an irrational coefficient.

    The argument is reduced mod 1 in extended precision before the complex
    exponential; good to ~1e-12 of a revolution for indices up to a few
    thousand, which is ample for the tolerances used in this package.
    """
    arg = np.mod(np.longdouble(coeff) * np.asarray(index_sq, dtype=np.int64), 1.0)
    return np.exp(2j * np.pi * arg.astype(np.float64))


def chirp_phasor(coeff, index_sq) -> np.ndarray:
    """Dispatch on exact (Fraction) vs floating chirp-rate coefficients."""
    if isinstance(coeff, Fraction):
        return rational_phasor(coeff, index_sq)
    return real_phasor(float(coeff), index_sq)

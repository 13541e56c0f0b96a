"""Discrete-time LTI building blocks.

Polynomials and transfer functions are expressed in the unit-delay
operator: ``coeffs[k]`` multiplies ``z^-k``, so a coefficient vector reads
left to right from the undelayed tap to the most delayed one.  All values
are immutable; every operation here is a pure function, safe to call
concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.signal


class InvalidModelError(ValueError):
    """A transfer function violates the monic-denominator contract."""


class NearPoleError(ArithmeticError):
    """A frequency-response evaluation landed (numerically) on a pole."""

    def __init__(self, omega: float, magnitude: float):
        self.omega = float(omega)
        self.magnitude = float(magnitude)
        super().__init__(
            f"denominator magnitude {magnitude:.3e} below 1e-300 at omega={omega!r}"
        )


@dataclass(frozen=True)
class DiscretePolynomial:
    """Polynomial in the delay operator; ``coeffs[k]`` is the z^-k tap."""

    coeffs: tuple

    def __init__(self, coeffs):
        coeffs = tuple(float(c) for c in coeffs)
        if not coeffs:
            raise ValueError("polynomial needs at least one coefficient")
        if not all(np.isfinite(coeffs)):
            raise ValueError("polynomial coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)

    def eval_delay(self, x):
        """Evaluate sum_k coeffs[k] * x**k (x plays the role of z^-1)."""
        return np.polyval(self.as_array()[::-1], x)


def _as_poly(p) -> DiscretePolynomial:
    return p if isinstance(p, DiscretePolynomial) else DiscretePolynomial(p)


@dataclass(frozen=True)
class DiscreteTransferFunction:
    """Rational transfer function N(z^-1)/D(z^-1) at a fixed sample time."""

    numerator: DiscretePolynomial
    denominator: DiscretePolynomial
    sample_time: float

    def __init__(self, numerator, denominator, sample_time: float):
        sample_time = float(sample_time)
        if not (sample_time > 0.0):
            raise ValueError(f"sample_time must be > 0, got {sample_time}")
        object.__setattr__(self, "numerator", _as_poly(numerator))
        object.__setattr__(self, "denominator", _as_poly(denominator))
        object.__setattr__(self, "sample_time", sample_time)


@dataclass(frozen=True)
class SimoModel:
    """One reference input driving two channels: temperature y and control u."""

    tf_y: DiscreteTransferFunction
    tf_u: DiscreteTransferFunction
    label: str = ""

    def __post_init__(self):
        if self.tf_y.sample_time != self.tf_u.sample_time:
            raise ValueError(
                "both channels must share the sample time "
                f"({self.tf_y.sample_time} != {self.tf_u.sample_time})"
            )

    @property
    def sample_time(self) -> float:
        return self.tf_y.sample_time


def simulate(tf: DiscreteTransferFunction, input) -> np.ndarray:
    """Run the difference-equation recursion with zero initial conditions.

    Raises InvalidModelError unless the denominator's z^0 coefficient is
    exactly 1 (the recursion solves for the newest output sample).
    """
    u = np.asarray(input, dtype=float)
    if u.size == 0:
        raise ValueError("input sequence must be non-empty")
    if tf.denominator.coeffs[0] != 1.0:
        raise InvalidModelError(
            f"denominator z^0 coefficient must be 1, got {tf.denominator.coeffs[0]}"
        )
    return scipy.signal.lfilter(tf.numerator.as_array(), tf.denominator.as_array(), u)


def frequency_response(tf: DiscreteTransferFunction, omegas) -> np.ndarray:
    """Evaluate N(e^-jw)/D(e^-jw) on a radian-per-sample grid in [0, pi]."""
    w = np.atleast_1d(np.asarray(omegas, dtype=float))
    if np.any(w < 0.0) or np.any(w > np.pi):
        raise ValueError("frequencies must lie in [0, pi] rad/sample")
    x = np.exp(-1j * w)
    num = tf.numerator.eval_delay(x)
    den = tf.denominator.eval_delay(x)
    bad = np.abs(den) < 1e-300
    if np.any(bad):
        k = int(np.argmax(bad))
        raise NearPoleError(w[k], float(np.abs(den[k])))
    return num / den


def pole_magnitudes(p: DiscretePolynomial) -> np.ndarray:
    """Magnitudes of the roots of a delay-operator polynomial, descending.

    Roots are taken in the z plane (the polynomial is cleared of negative
    powers first) and computed as companion-matrix eigenvalues, which stays
    well behaved for roots hugging the unit circle.
    """
    p = _as_poly(p)
    if p.degree < 1:
        raise ValueError("polynomial must have degree >= 1")
    c = p.as_array()
    if not np.any(c):
        raise ValueError("zero polynomial has no roots")
    # coeffs are already ordered by descending power of z once z^-k terms
    # are cleared by z^degree
    roots = np.roots(c)
    mags = np.abs(roots)
    return np.sort(mags)[::-1]

"""
Theta functions with characteristics and the bracket products built on them.

    θ_ab(z, τ) = Σ_n exp(πi(a/2 + n)²τ + 2πi(a/2 + n)(b/2 + z))

Throughout the package ``[z]`` stands for θ11(z, τ). Every evaluator accepts
scalars or numpy arrays of any shape and returns the same shape.
"""

import logging
import math

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np


logger = logging.getLogger("baxterq.theta")


DEFAULT_TRUNCATION = 20

# Dropped terms are below this magnitude relative to the leading one
TAIL_CUTOFF = 1e-18


class ParameterError(ValueError):
    def __init__(self, *args, field_name=None):
        self.field_name = field_name
        super().__init__(*args)


class ThetaChar(NamedTuple):
    a: int
    b: int


TH00 = ThetaChar(0, 0)
TH01 = ThetaChar(0, 1)
TH10 = ThetaChar(1, 0)
TH11 = ThetaChar(1, 1)


def default_truncation(tau_im):
    """
    Smallest M with exp(-π Im(τ) (M-1)²) < 1e-18, never below the default of 20.
    """
    adaptive = math.ceil(math.sqrt(-math.log(TAIL_CUTOFF) / (math.pi * tau_im))) + 1
    return max(DEFAULT_TRUNCATION, adaptive)


def as_spin(value):
    if isinstance(value, str):
        value = value.strip()
    try:
        spin = Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise ParameterError(
            f"l must be a positive half-integer, got {value!r}", field_name="l"
        ) from e
    if spin <= 0 or (2 * spin).denominator != 1:
        raise ParameterError(
            f"l must be a positive half-integer, got {value!r}", field_name="l"
        )
    return spin


@dataclass(frozen=True)
class ModelParams:
    tau: complex
    eta: float
    l: Fraction
    N: int
    series_truncation: int = 0
    tol: float = 1e-12

    def __post_init__(self):
        tau = complex(self.tau)
        if abs(tau.real) > 0 or tau.imag <= 0:
            raise ParameterError(
                f"tau must be purely imaginary with positive imaginary part, got {tau!r}",
                field_name="tau",
            )
        object.__setattr__(self, "tau", tau)

        spin = as_spin(self.l)
        object.__setattr__(self, "l", spin)

        eta = float(self.eta)
        bound = 1 / (2 * (2 * spin + 1))
        if abs(eta) > bound:
            raise ParameterError(
                f"|eta| must not exceed 1/(2(2l+1)) = {float(bound):.6g}, got {eta!r}",
                field_name="eta",
            )
        object.__setattr__(self, "eta", eta)

        if int(self.N) != self.N or self.N <= 0 or self.N % 2:
            raise ParameterError(
                f"N must be a positive even integer (the construction requires an even number of sites), got {self.N!r}",
                field_name="N",
            )
        object.__setattr__(self, "N", int(self.N))

        if not self.series_truncation:
            object.__setattr__(
                self, "series_truncation", default_truncation(tau.imag)
            )
        elif self.series_truncation < 1:
            raise ParameterError(
                "series_truncation must be positive", field_name="series_truncation"
            )

        if self.tol <= 0:
            raise ParameterError("tol must be positive", field_name="tol")

    @property
    def t(self):
        return self.tau.imag

    @property
    def two_l(self):
        return int(2 * self.l)

    @property
    def dim(self):
        return self.two_l + 1

    @property
    def chain_dim(self):
        return self.dim**self.N

    @property
    def nl(self):
        return int(self.N * self.l)

    def label(self):
        return {
            "l": str(self.l),
            "N": self.N,
            "tau_im": self.t,
            "eta": self.eta,
        }

    def __repr__(self):
        return f"<ModelParams l={self.l} N={self.N} tau={self.tau} eta={self.eta}>"


def theta_ab(ch, z, tau, trunc=None):
    tau = complex(tau)
    if tau.imag <= 0:
        raise ParameterError(
            f"theta series diverges for Im(tau) <= 0, got {tau!r}", field_name="tau"
        )
    if trunc is None:
        trunc = default_truncation(tau.imag)

    a, b = ch
    z = np.asarray(z, dtype=complex)

    # The dominant term sits at n ≈ -Im(z)/Im(τ); widen the window to keep it
    extra = int(np.ceil(np.max(np.abs(z.imag)) / tau.imag)) if z.size else 0

    total = np.zeros(z.shape, dtype=complex)
    for n in range(-(trunc + extra), trunc + extra + 1):
        k = a / 2 + n
        total += np.exp(1j * np.pi * k * k * tau + 2j * np.pi * k * (b / 2 + z))

    if total.ndim == 0:
        return complex(total)
    return total


def theta(ch, z, params):
    return theta_ab(ch, z, params.tau, params.series_truncation)


def theta00(z, params):
    return theta(TH00, z, params)


def theta01(z, params):
    return theta(TH01, z, params)


def theta10(z, params):
    return theta(TH10, z, params)


def theta11(z, params):
    return theta(TH11, z, params)


def bracket_k(z, k, params):
    """
    [z]_k = [z][z+2η]⋯[z+2(k-1)η], with [z]_0 = 1.
    """
    if k < 0:
        raise ValueError(f"bracket_k needs k >= 0, got {k}")
    z = np.asarray(z, dtype=complex)
    result = np.ones(z.shape, dtype=complex)
    for j in range(k):
        result = result * theta11(z + 2 * j * params.eta, params)
    if result.ndim == 0:
        return complex(result)
    return result


def za_bracket_k(z, a, k, params):
    """
    [z;a]_k = [z+a]_k [-z+a]_k, even in z.
    """
    z = np.asarray(z, dtype=complex)
    return bracket_k(z + a, k, params) * bracket_k(-z + a, k, params)


def quasi_periodicity_residual(zs, params):
    """
    Largest violation of [z+1] = -[z] and [z+τ] = -e^{-πiτ-2πiz}[z] over ``zs``,
    each relative to the largest magnitude taking part in the identity.
    """
    zs = np.asarray(zs, dtype=complex)
    base = theta11(zs, params)
    shifted_one = theta11(zs + 1, params)
    shifted_tau = theta11(zs + params.tau, params)
    factor = np.exp(-1j * np.pi * params.tau - 2j * np.pi * zs)

    scale = np.maximum(1.0, np.maximum(np.abs(base), np.abs(shifted_one)))
    one = np.max(np.abs(shifted_one + base) / scale)

    scale = np.maximum(
        1.0, np.maximum(np.abs(shifted_tau), np.abs(factor * base))
    )
    tau_shift = np.max(np.abs(shifted_tau + factor * base) / scale)
    return float(max(one, tau_shift))


def oddness_residual(zs, params):
    zs = np.asarray(zs, dtype=complex)
    plus = theta11(zs, params)
    minus = theta11(-zs, params)
    scale = np.maximum(1.0, np.abs(plus))
    return float(np.max(np.abs(plus + minus) / scale))


def zero_set_residual(params, extent=2):
    """
    Largest |[m + nτ]| over the lattice points with |m|, |n| <= extent, relative to
    the growth factor of θ11 at that height.
    """
    worst = 0.0
    for m in range(-extent, extent + 1):
        for n in range(-extent, extent + 1):
            z = m + n * params.tau
            # |[w + nτ]| grows like exp(π t n²) near the real axis
            scale = math.exp(math.pi * params.t * n * n)
            worst = max(worst, abs(theta11(z, params)) / scale)
    return worst


def jacobi_shift_residual(zs, params):
    """
    Half-period relations linking the four characteristics:

        θ11(z + 1/2) = -θ10(z)
        θ01(z + 1/2) = θ00(z)
        θ00(z + τ/2) = e^{-πiτ/4 - πiz} θ10(z)
    """
    zs = np.asarray(zs, dtype=complex)
    tau = params.tau
    pairs = [
        (theta11(zs + 0.5, params), -theta10(zs, params)),
        (theta01(zs + 0.5, params), theta00(zs, params)),
        (
            theta00(zs + tau / 2, params),
            np.exp(-1j * np.pi * tau / 4 - 1j * np.pi * zs) * theta10(zs, params),
        ),
    ]
    worst = 0.0
    for lhs, rhs in pairs:
        scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / scale)))
    return worst


def random_cell_points(params, count, rng):
    """
    Uniform points in the fundamental cell [0, 1) × [0, Im τ).
    """
    return rng.uniform(0, 1, count) + 1j * params.t * rng.uniform(0, 1, count)


def lattice_distance(x, params):
    """
    Distance from ``x`` to the nearest point of Z + τZ (τ purely imaginary).
    """
    x = complex(x)
    q = x.imag / params.t
    return abs(complex(x.real - round(x.real), (q - round(q)) * params.t))

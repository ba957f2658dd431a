"""Reservoir spectral densities and the two dephasing integrals.

The integrals evaluated here are

    q1(t) = integral_0^inf  D(w)/w^2 * sin(w t)                    dw
    q2(t) = integral_0^inf 2 D(w)/w^2 * sin^2(w t/2) coth(beta w/2) dw

with coth -> 1 on the dedicated T = 0 path.  A coherence between system
levels E1 and E2 (hbar = 1) then picks up the factor

    r_factor = exp(-i (E1^2 - E2^2) q1) * exp(-(E1 - E2)^2 q2),

so energies, frequencies, 1/t, and 1/beta must share one frequency unit and
the coupling strength is dimensionless in that system.

Closed forms (arctan / log for the strictly ohmic case) are deliberately NOT
used here: the quadrature is the product, and tests compare it against those
forms independently.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import IntegrabilityError, InvalidArgumentError

__all__ = [
    "OhmicSpectralDensity",
    "TabulatedSpectralDensity",
    "BathState",
    "QuadratureResult",
    "q1",
    "q2",
    "q1_full",
    "q2_full",
    "q1_grid",
    "q2_grid",
    "phase_shift",
    "damping",
    "r_factor",
]

DEFAULT_RTOL = 1e-8


@dataclass(frozen=True)
class OhmicSpectralDensity:
    """D(w) = coupling * w^exponent * omega_c^(1-exponent) * exp(-w/omega_c)."""

    coupling: float
    exponent: float = 1.0
    omega_c: float = 1.0

    def __post_init__(self):
        if self.coupling < 0:
            raise InvalidArgumentError(f"coupling must be >= 0, got {self.coupling}")
        if self.exponent <= 0:
            raise InvalidArgumentError(f"exponent must be > 0, got {self.exponent}")
        if self.omega_c <= 0:
            raise InvalidArgumentError(f"omega_c must be > 0, got {self.omega_c}")

    def density(self, omega):
        omega = np.asarray(omega, dtype=float)
        out = self.coupling * omega**self.exponent * self.omega_c**(1.0 - self.exponent) \
            * np.exp(-omega / self.omega_c)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TabulatedSpectralDensity:
    """Sampled density, linearly interpolated, zero outside the sample range.

    Samples must be strictly increasing in omega with non-negative values.
    Integrability against 1/w^2 near zero requires either omega[0] > 0 or an
    identically-zero first segment (with linear interpolation any other
    behavior at the origin diverges); the constructor enforces this.
    """

    omega: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if w.ndim != 1 or w.shape != v.shape or w.size < 2:
            raise InvalidArgumentError("need matching 1-d omega/value arrays with >= 2 samples")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
            raise InvalidArgumentError("tabulated density contains non-finite entries")
        if np.any(np.diff(w) <= 0) or w[0] < 0:
            raise InvalidArgumentError("omega samples must be strictly increasing and >= 0")
        if np.any(v < 0):
            raise InvalidArgumentError("density values must be >= 0")
        if w[0] == 0.0 and not (v[0] == 0.0 and v[1] == 0.0):
            raise IntegrabilityError(
                "tabulated density is not integrable against 1/w^2 at w = 0; "
                "start the table at omega > 0 or zero out the first segment"
            )
        wr = np.array(w)
        vr = np.array(v)
        wr.flags.writeable = False
        vr.flags.writeable = False
        object.__setattr__(self, "omega", wr)
        object.__setattr__(self, "values", vr)

    def density(self, omega):
        omega = np.asarray(omega, dtype=float)
        out = np.interp(omega, self.omega, self.values, left=0.0, right=0.0)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class BathState:
    """Inverse temperature beta = 1/(k_B T); beta = inf is the T = 0 state."""

    beta: float = math.inf

    def __post_init__(self):
        if not self.beta > 0:
            raise InvalidArgumentError(f"beta must be positive (inf for T = 0), got {self.beta}")

    @property
    def zero_temperature(self) -> bool:
        return math.isinf(self.beta)

    @classmethod
    def from_temperature(cls, temperature: float, k_b: float = 1.0) -> "BathState":
        if temperature < 0:
            raise InvalidArgumentError(f"temperature must be >= 0, got {temperature}")
        if temperature == 0:
            return cls(beta=math.inf)
        return cls(beta=1.0 / (k_b * temperature))


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error: float


def _dispatch(model, kind: int, beta: float, zero_t: bool, t: float,
              rtol: float) -> QuadratureResult:
    # symmetry: q1 is odd in t, q2 even; both vanish at t = 0
    if t == 0.0:
        return QuadratureResult(0.0, 0.0)
    sign = 1.0
    if t < 0.0:
        t = -t
        if kind == 1:
            sign = -1.0
    if isinstance(model, OhmicSpectralDensity):
        if model.coupling == 0.0:
            return QuadratureResult(0.0, 0.0)
        val, err = kernels.quad_ohmic(kind, model.exponent, model.coupling,
                                      model.omega_c, beta, zero_t, t, rtol)
    elif isinstance(model, TabulatedSpectralDensity):
        val, err = kernels.quad_tabulated(kind, model.omega, model.values,
                                          beta, zero_t, t, rtol)
    else:
        raise InvalidArgumentError(f"unsupported spectral density {type(model).__name__}")
    return QuadratureResult(sign * val, err)


def q1_full(model, t: float, rtol: float = DEFAULT_RTOL) -> QuadratureResult:
    """q1(t) together with the quadrature error estimate."""
    return _dispatch(model, 1, 0.0, True, float(t), rtol)


def q2_full(model, state: BathState, t: float,
            rtol: float = DEFAULT_RTOL) -> QuadratureResult:
    """q2(t) together with the quadrature error estimate."""
    zero_t = state.zero_temperature
    beta = 0.0 if zero_t else state.beta
    return _dispatch(model, 2, beta, zero_t, float(t), rtol)


def q1(model, t: float, rtol: float = DEFAULT_RTOL) -> float:
    return q1_full(model, t, rtol).value


def q2(model, state: BathState, t: float, rtol: float = DEFAULT_RTOL) -> float:
    return q2_full(model, state, t, rtol).value


def q1_grid(model, t_grid, rtol: float = DEFAULT_RTOL) -> np.ndarray:
    return np.array([q1(model, t, rtol) for t in np.asarray(t_grid, dtype=float)])


def q2_grid(model, state: BathState, t_grid, rtol: float = DEFAULT_RTOL) -> np.ndarray:
    return np.array([q2(model, state, t, rtol) for t in np.asarray(t_grid, dtype=float)])


def phase_shift(e1: float, e2: float, model, t: float,
                rtol: float = DEFAULT_RTOL) -> float:
    """Lamb-type phase delta_phi = (e1^2 - e2^2) q1(t), hbar = 1 units."""
    return (e1 * e1 - e2 * e2) * q1(model, t, rtol)


def damping(e1: float, e2: float, model, state: BathState, t: float,
            rtol: float = DEFAULT_RTOL) -> float:
    """Decoherence exponent Gamma = (e1 - e2)^2 q2(t) >= 0."""
    return (e1 - e2) ** 2 * q2(model, state, t, rtol)


def r_factor(e1: float, e2: float, model, state: BathState, t: float,
             rtol: float = DEFAULT_RTOL) -> complex:
    """Coherence multiplier exp(-i delta_phi) * exp(-Gamma); |r| <= 1."""
    return cmath.exp(complex(-damping(e1, e2, model, state, t, rtol),
                             -phase_shift(e1, e2, model, t, rtol)))

"""Numeric hot paths: oscillatory panel quadrature and dephasing multipliers.

Two implementations live here.  The default is a set of numba @njit kernels;
a pure-numpy path provides identical math for environments without numba.
Selection is made once at import time from the environment variable

    CQDEPH_NUMBA = 1/true  force numba (falls back with a warning if missing)
                   0/false force the numpy path
                   unset   auto: numba if importable

The reservoir integrals are evaluated on panels that resolve the oscillation
scale 2*pi/t: the head [0, w_c] is integrated directly, the tail is mapped to
u in [0, 1) through w = w_c / (1 - u), and every panel is no wider than half
an oscillation period.  Each panel uses the 15-point Gauss-Kronrod rule with
the embedded 7-point Gauss value as the error estimate; the worst panels are
bisected until the summed estimate meets the relative tolerance.
"""

from __future__ import annotations

import math
import os
import warnings

import numpy as np

from .errors import NumericsError

__all__ = ["HAS_NUMBA", "USE_NUMBA", "active_backend", "quad_ohmic",
           "quad_tabulated", "dephasing_multipliers", "initial_panels",
           "PANEL_CAP"]

try:
    import numba
    from numba import njit, prange

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def deco(f):
            return f
        return deco

    def prange(*args):
        return range(*args)

_env = os.environ.get("CQDEPH_NUMBA", "").strip().lower()
if _env in ("0", "false", "no", "off"):
    USE_NUMBA = False
elif _env in ("1", "true", "yes", "on"):
    if not HAS_NUMBA:
        warnings.warn("CQDEPH_NUMBA requested numba but it is not importable; using numpy")
    USE_NUMBA = HAS_NUMBA
else:
    USE_NUMBA = HAS_NUMBA


def active_backend() -> str:
    """Name of the kernel backend chosen at import time."""
    return "numba" if USE_NUMBA else "numpy"


# 15-point Kronrod nodes/weights with the embedded 7-point Gauss weights,
# ascending order on [-1, 1] (standard QUADPACK dqk15 table).
_X15 = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813,
])
_W15 = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
])
_W7 = np.array([
    0.0, 0.129484966168870, 0.0, 0.279705391489277, 0.0,
    0.381830050505119, 0.0, 0.417959183673469, 0.0,
    0.381830050505119, 0.0, 0.279705391489277, 0.0,
    0.129484966168870, 0.0,
])
for _arr in (_X15, _W15, _W7):
    _arr.flags.writeable = False

PANEL_CAP = 16384
_TAIL_STOP = 60.0  # integrate the mapped tail out to w = _TAIL_STOP * w_c, then one panel to u = 1


def initial_panels(t: float, omega_c: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Panel edges (a, b, in_u) resolving oscillations of period 2*pi/t.

    Head panels live in w on [0, omega_c]; tail panels live in u with
    w = omega_c / (1 - u).  Raises NumericsError when the oscillation scale
    would need more panels than the refinement cap allows.
    """
    if t <= 0.0:
        raise NumericsError("initial_panels needs t > 0")
    half_period = math.pi / t
    head_w = min(half_period, omega_c / 4.0)
    n_head = max(4, int(math.ceil(omega_c / head_w)))
    tail_w = min(half_period, omega_c / 2.0)
    n_tail = int(math.ceil((_TAIL_STOP - 1.0) * omega_c / tail_w))
    if n_head + n_tail + 1 > PANEL_CAP // 2:
        raise NumericsError(
            f"t = {t:g} needs {n_head + n_tail + 1} oscillation-resolved panels, "
            f"beyond the capacity {PANEL_CAP // 2}; reduce t or omega_c * t"
        )
    head_edges = np.linspace(0.0, omega_c, n_head + 1)
    omega_edges = omega_c + tail_w * np.arange(n_tail + 1)
    u_edges = 1.0 - omega_c / omega_edges
    a = np.concatenate([head_edges[:-1], u_edges[:-1], [u_edges[-1]]])
    b = np.concatenate([head_edges[1:], u_edges[1:], [1.0]])
    in_u = np.zeros(a.size, dtype=np.bool_)
    in_u[n_head:] = True
    return a, b, in_u


# ---------------------------------------------------------------------------
# numba path (scalar loops; compiled lazily on first use, cached on disk)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _ohmic_point_nb(w, kind, s, alpha, omega_c, beta, zero_t, t):
    # merged exponent avoids inf * 0 at the extremes of the mapped tail
    expo = (s - 2.0) * math.log(w) - w / omega_c
    env = alpha * omega_c ** (1.0 - s) * math.exp(expo)
    if kind == 1:
        return env * math.sin(w * t)
    half = math.sin(0.5 * w * t)
    osc = 2.0 * half * half
    if zero_t:
        return env * osc
    x = 0.5 * beta * w
    if x < 1e-4:
        cth = 1.0 / x + x / 3.0
    else:
        cth = 1.0 / math.tanh(x)
    return env * osc * cth


@njit(cache=True)
def _gk15_ohmic_nb(a, b, in_u, kind, s, alpha, omega_c, beta, zero_t, t):
    mid = 0.5 * (a + b)
    hw = 0.5 * (b - a)
    acc15 = 0.0
    acc7 = 0.0
    for j in range(15):
        x = mid + hw * _X15[j]
        if in_u:
            rem = 1.0 - x
            w = omega_c / rem
            jac = omega_c / (rem * rem)
        else:
            w = x
            jac = 1.0
        f = _ohmic_point_nb(w, kind, s, alpha, omega_c, beta, zero_t, t) * jac
        acc15 += _W15[j] * f
        acc7 += _W7[j] * f
    return acc15 * hw, abs((acc15 - acc7) * hw)


@njit(cache=True)
def _adaptive_ohmic_nb(a0, b0, u0, kind, s, alpha, omega_c, beta, zero_t, t, rtol, cap):
    n = a0.size
    a = np.empty(cap)
    b = np.empty(cap)
    in_u = np.empty(cap, dtype=np.bool_)
    vals = np.empty(cap)
    errs = np.empty(cap)
    a[:n] = a0
    b[:n] = b0
    in_u[:n] = u0
    total = 0.0
    err_total = 0.0
    abs_sum = 0.0
    for p in range(n):
        v, e = _gk15_ohmic_nb(a[p], b[p], in_u[p], kind, s, alpha, omega_c, beta, zero_t, t)
        vals[p] = v
        errs[p] = e
        total += v
        err_total += e
        abs_sum += abs(v)
    # refine the worst panel until the summed estimate meets tolerance or we
    # reach the roundoff floor of the accumulated panel values
    while n < cap:
        target = rtol * abs(total)
        floor = 30.0 * 2.220446049250313e-16 * abs_sum
        if err_total <= max(target, floor):
            break
        worst = 0
        emax = errs[0]
        for p in range(1, n):
            if errs[p] > emax:
                emax = errs[p]
                worst = p
        am, bm, um = a[worst], b[worst], in_u[worst]
        mid = 0.5 * (am + bm)
        v1, e1 = _gk15_ohmic_nb(am, mid, um, kind, s, alpha, omega_c, beta, zero_t, t)
        v2, e2 = _gk15_ohmic_nb(mid, bm, um, kind, s, alpha, omega_c, beta, zero_t, t)
        total += v1 + v2 - vals[worst]
        err_total += e1 + e2 - errs[worst]
        abs_sum += abs(v1) + abs(v2) - abs(vals[worst])
        a[worst], b[worst], vals[worst], errs[worst] = am, mid, v1, e1
        a[n], b[n], in_u[n], vals[n], errs[n] = mid, bm, um, v2, e2
        n += 1
    return total, err_total, n


@njit(cache=True, parallel=True)
def _multipliers_nb(energies, t, q1t, q2t):
    d = energies.shape[0]
    out = np.empty((d, d), dtype=np.complex128)
    for j in prange(d):
        ej = energies[j]
        for k in range(d):
            ek = energies[k]
            de = ej - ek
            phase = de * t + (ej * ej - ek * ek) * q1t
            amp = math.exp(-de * de * q2t)
            out[j, k] = complex(amp * math.cos(phase), -amp * math.sin(phase))
    return out


# ---------------------------------------------------------------------------
# numpy path (same panels and rule, batched across panels)
# ---------------------------------------------------------------------------

def _ohmic_values_np(w, kind, s, alpha, omega_c, beta, zero_t, t):
    expo = (s - 2.0) * np.log(w) - w / omega_c
    env = alpha * omega_c ** (1.0 - s) * np.exp(expo)
    if kind == 1:
        return env * np.sin(w * t)
    osc = 2.0 * np.sin(0.5 * w * t) ** 2
    if zero_t:
        return env * osc
    x = 0.5 * beta * w
    cth = np.where(x < 1e-4, 1.0 / np.where(x > 0, x, 1.0) + x / 3.0, 1.0 / np.tanh(np.where(x > 0, x, 1.0)))
    return env * osc * cth


def _gk15_batch_np(f, a, b, in_u, omega_c):
    mid = 0.5 * (a + b)
    hw = 0.5 * (b - a)
    x = mid[:, None] + hw[:, None] * _X15[None, :]
    jac = np.ones_like(x)
    w = x.copy()
    if in_u.any():
        rem = 1.0 - x[in_u]
        w[in_u] = omega_c / rem
        jac[in_u] = omega_c / rem**2
    fv = f(w) * jac
    vals = (fv * _W15).sum(axis=1) * hw
    errs = np.abs((fv * (_W15 - _W7)).sum(axis=1) * hw)
    return vals, errs


def _adaptive_np(f, a, b, in_u, omega_c, rtol, cap=PANEL_CAP, max_rounds=60):
    a = a.copy()
    b = b.copy()
    in_u = in_u.copy()
    vals, errs = _gk15_batch_np(f, a, b, in_u, omega_c)
    for _ in range(max_rounds):
        total = float(vals.sum())
        err_total = float(errs.sum())
        floor = 30.0 * np.finfo(float).eps * float(np.abs(vals).sum())
        if err_total <= max(rtol * abs(total), floor) or a.size >= cap:
            break
        split = errs > max(rtol * abs(total), floor) / (2.0 * a.size)
        if not split.any():
            split = errs >= 0.5 * errs.max()
        if a.size + split.sum() > cap:
            keep_n = cap - a.size
            order = np.argsort(errs[split])[::-1][:keep_n]
            idx = np.flatnonzero(split)[order]
            split = np.zeros_like(split)
            split[idx] = True
            if not split.any():
                break
        am, bm, um = a[split], b[split], in_u[split]
        mids = 0.5 * (am + bm)
        na = np.concatenate([a[~split], am, mids])
        nb = np.concatenate([b[~split], mids, bm])
        nu = np.concatenate([in_u[~split], um, um])
        new_vals, new_errs = _gk15_batch_np(f, np.concatenate([am, mids]),
                                            np.concatenate([mids, bm]),
                                            np.concatenate([um, um]), omega_c)
        vals = np.concatenate([vals[~split], new_vals])
        errs = np.concatenate([errs[~split], new_errs])
        a, b, in_u = na, nb, nu
    return float(vals.sum()), float(errs.sum()), a.size


# ---------------------------------------------------------------------------
# public dispatchers
# ---------------------------------------------------------------------------

def quad_ohmic(kind: int, s: float, alpha: float, omega_c: float, beta: float,
               zero_t: bool, t: float, rtol: float) -> tuple[float, float]:
    """Reservoir integral for the ohmic family at one time point.

    kind 1: integral of D(w)/w^2 * sin(w t)
    kind 2: integral of 2 D(w)/w^2 * sin^2(w t / 2) * coth(beta w / 2)
    with D(w) = alpha * w^s * omega_c^(1-s) * exp(-w / omega_c).

    Returns (value, error_estimate).  t must be positive here; callers handle
    t = 0 and the odd/even symmetry in sign of t.
    """
    a, b, in_u = initial_panels(t, omega_c)
    if USE_NUMBA:
        val, err, _ = _adaptive_ohmic_nb(a, b, in_u, kind, s, alpha, omega_c,
                                         beta, zero_t, t, rtol, PANEL_CAP)
        return val, err

    def f(w):
        return _ohmic_values_np(w, kind, s, alpha, omega_c, beta, zero_t, t)

    val, err, _ = _adaptive_np(f, a, b, in_u, omega_c, rtol)
    return val, err


def quad_tabulated(kind: int, omega_s: np.ndarray, density_s: np.ndarray,
                   beta: float, zero_t: bool, t: float,
                   rtol: float) -> tuple[float, float]:
    """Reservoir integral for a tabulated density (numpy path only).

    The density is linearly interpolated between samples and taken as zero
    outside the tabulated range, so the integral runs over
    [omega_s[0], omega_s[-1]] with oscillation-resolved panels.
    """
    lo, hi = float(omega_s[0]), float(omega_s[-1])
    if t <= 0.0:
        raise NumericsError("quad_tabulated needs t > 0")
    width = min(math.pi / t, (hi - lo) / 8.0)
    n = int(math.ceil((hi - lo) / width))
    if n + 1 > PANEL_CAP // 2:
        raise NumericsError(f"t = {t:g} needs {n} panels over the tabulated range, beyond capacity")
    edges = np.linspace(lo, hi, n + 1)
    a, b = edges[:-1], edges[1:]
    in_u = np.zeros(a.size, dtype=np.bool_)

    def f(w):
        dens = np.interp(w, omega_s, density_s)
        out = dens / w**2
        if kind == 1:
            return out * np.sin(w * t)
        out = out * 2.0 * np.sin(0.5 * w * t) ** 2
        if zero_t:
            return out
        x = 0.5 * beta * w
        cth = np.where(x < 1e-4, 1.0 / np.where(x > 0, x, 1.0) + x / 3.0,
                       1.0 / np.tanh(np.where(x > 0, x, 1.0)))
        return out * cth

    val, err, _ = _adaptive_np(f, a, b, in_u, 1.0, rtol)
    return val, err


def dephasing_multipliers(energies: np.ndarray, t: float, q1t: float,
                          q2t: float) -> np.ndarray:
    """Matrix M[j, k] = exp(-i (E_j - E_k) t - i (E_j^2 - E_k^2) q1 - (E_j - E_k)^2 q2)."""
    energies = np.ascontiguousarray(energies, dtype=np.float64)
    if USE_NUMBA:
        return _multipliers_nb(energies, float(t), float(q1t), float(q2t))
    de = energies[:, None] - energies[None, :]
    sq = energies[:, None] ** 2 - energies[None, :] ** 2
    return np.exp(-1j * (de * t + sq * q1t) - de**2 * q2t)

"""Where exponential moments live and where the mgf is minimized.

Three questions, three entry points:

* :func:`exp_moment_interval` -- the interval ``[a, b]`` on which
  ``E[e^{κL_T}]`` is finite, with endpoint membership for both the moment
  set ``I`` and the derivative set ``E`` decided from tail metadata, not
  from sampling integrals near a blow-up;
* :func:`minimize_mgf` -- the unique minimizer of ``φ_T`` over ``I``,
  located as the root of the increasing derivative function or, failing a
  sign change, at an endpoint;
* :func:`classify_esscher_parameter` -- whether the minimizer is an actual
  zero of ``ψ_T`` (so the Esscher martingale measure exists) and which
  shape of ``E`` makes it so.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from scipy.optimize import brentq

from .errors import ArbitrageMarketError, NoFiniteMinimizer
from .levy_core.extreal import ExtReal, NEG_INF, POS_INF
from .levy_core.quadrature import DEFAULT_SETTINGS, QuadratureSettings
from .levy_core.triplets import (Monotonicity, TripletLike, as_validated,
                                 cumulant, cumulant_derivative, is_monotone)

__all__ = [
    "ExpMomentInterval",
    "exp_moment_interval",
    "MinimumCase",
    "MinimumPoint",
    "minimize_mgf",
    "EsscherCase",
    "EsscherParameterStatus",
    "classify_esscher_parameter",
]

_KAPPA_TOL = 1e-12
_M_ATOL = 1e-12
_MAX_DOUBLINGS = 60


@dataclass(frozen=True)
class ExpMomentInterval:
    """``I = {κ : E[e^{κ L_T}] < inf} = [a, b]`` with ``a <= 0 <= b``, plus
    endpoint membership in ``I`` and in the derivative-moment set ``E``.

    Infinite endpoints carry ``False`` membership flags (membership of an
    ideal point is vacuous).  ``a_in_E`` implies ``a_in_I`` and likewise on
    the right.
    """

    a: ExtReal
    b: ExtReal
    a_in_I: bool
    b_in_I: bool
    a_in_E: bool
    b_in_E: bool

    @property
    def is_degenerate(self) -> bool:
        """True when I = {0}."""
        return (self.a.is_finite and self.b.is_finite
                and self.a.value == 0.0 and self.b.value == 0.0)

    def contains_interior(self, kappa: float) -> bool:
        lo = self.a.as_float()
        hi = self.b.as_float()
        return lo < kappa < hi

    def contains(self, kappa: float) -> bool:
        if self.contains_interior(kappa):
            return True
        if self.a.is_finite and kappa == self.a.value:
            return self.a_in_I
        if self.b.is_finite and kappa == self.b.value:
            return self.b_in_I
        return False

    def describe(self) -> dict:
        def end(v: ExtReal):
            return v.value if v.is_finite else ("-inf" if v.is_neg_inf else "inf")
        return {"a": end(self.a), "b": end(self.b),
                "a_in_I": self.a_in_I, "b_in_I": self.b_in_I,
                "a_in_E": self.a_in_E, "b_in_E": self.b_in_E}


def exp_moment_interval(t: TripletLike,
                        q: QuadratureSettings = DEFAULT_SETTINGS) -> ExpMomentInterval:
    """Decide ``I`` and the endpoint memberships from tail decay alone.

    The right endpoint is set by the right tail (a tilt ``κ > 0`` always
    integrates the left tail) and symmetrically for the left.
    """
    vt = as_validated(t, q)
    right = vt.nu.right_tail()
    left = vt.nu.left_tail()

    b_sup = right.tilt_sup()
    a_inf = -left.tilt_sup() + 0.0  # never -0.0

    if math.isinf(b_sup):
        b, b_in_I, b_in_E = POS_INF, False, False
    else:
        b = ExtReal.finite(b_sup)
        b_in_I = right.moment_finite(0, b_sup)
        b_in_E = (b_in_I and right.moment_finite(1, b_sup)
                  and left.moment_finite(1, -b_sup))
    if math.isinf(a_inf):
        a, a_in_I, a_in_E = NEG_INF, False, False
    else:
        a = ExtReal.finite(a_inf)
        a_in_I = left.moment_finite(0, -a_inf)
        a_in_E = (a_in_I and left.moment_finite(1, -a_inf)
                  and right.moment_finite(1, a_inf))
    return ExpMomentInterval(a, b, a_in_I, b_in_I, a_in_E, b_in_E)


# ---------------------------------------------------------------------------
# minimization
# ---------------------------------------------------------------------------


class MinimumCase(enum.Enum):
    INTERIOR_ROOT = "interior_root"
    LEFT_ENDPOINT = "left_endpoint"
    RIGHT_ENDPOINT = "right_endpoint"
    DEGENERATE_ZERO = "degenerate_zero"


@dataclass(frozen=True)
class MinimumPoint:
    """Minimizer of the terminal mgf over the finite-moment interval."""

    kappa0: float
    case: MinimumCase
    phi_at_min: float
    interval: ExpMomentInterval

    def describe(self) -> dict:
        return {"kappa0": self.kappa0, "case": self.case.value,
                "phi_at_min": self.phi_at_min,
                "interval": self.interval.describe()}


def _interior_start(iv: ExpMomentInterval) -> float:
    lo, hi = iv.a.as_float(), iv.b.as_float()
    if lo < 0.0 < hi:
        return 0.0
    if hi == 0.0:  # interval is [a, 0]
        return (max(lo, -1.0)) / 2.0 if math.isfinite(lo) else -0.5
    # interval is [0, b]
    return (min(hi, 1.0)) / 2.0 if math.isfinite(hi) else 0.5


def _walk_to_bracket(m_of, start: float, v_start: float, lo: float, hi: float,
                     direction: int) -> tuple:
    """March from ``start`` toward the ``(lo, hi)`` end lying in
    ``direction`` until the increasing function ``m`` changes sign.

    Returns ``("bracket", lo, hi, v_lo, v_hi)`` or ``("endpoint", κ_end)``
    when the end is finite and the sign never flips.
    """
    end = hi if direction > 0 else lo
    prev_k, prev_v = start, v_start
    for k in range(_MAX_DOUBLINGS):
        if math.isfinite(end):
            gap = end - prev_k
            step = gap / 2.0
            nxt = prev_k + step
            if abs(gap) <= _KAPPA_TOL * max(1.0, abs(end)):
                return ("endpoint", end)
        else:
            nxt = prev_k + direction * max(1.0, abs(prev_k)) * (2.0 ** k)
        v = m_of(nxt)
        if v.is_undefined:
            raise NoFiniteMinimizer(
                f"derivative function undefined at interior point {nxt}")
        sign = v.sign()
        if sign == 0:
            return ("bracket", nxt, nxt, 0.0, 0.0)
        if (sign > 0) != (prev_v > 0):
            # sign change; if the value blew past float range, pull the far
            # end back toward the last good point until it is finite again
            far_k, far_v = nxt, v
            for _ in range(200):
                if far_v.is_finite:
                    break
                far_k = 0.5 * (prev_k + far_k)
                far_v = m_of(far_k)
                if far_v.is_finite and (far_v.value > 0) == (prev_v > 0):
                    prev_k, prev_v = far_k, far_v.value
                    far_k, far_v = nxt, v
            else:
                raise NoFiniteMinimizer(
                    "could not isolate a finite bracket for the root")
            if direction > 0:
                return ("bracket", prev_k, far_k, prev_v, far_v.value)
            return ("bracket", far_k, prev_k, far_v.value, prev_v)
        if not v.is_finite:
            raise NoFiniteMinimizer(
                f"derivative function jumped to {v} at {nxt} without crossing zero")
        prev_k, prev_v = nxt, v.value
    raise NoFiniteMinimizer("no sign change within the search range")


def minimize_mgf(t: TripletLike, horizon: float,
                 q: QuadratureSettings = DEFAULT_SETTINGS) -> MinimumPoint:
    """Locate ``argmin φ_T`` over the finite-moment interval.

    Monotone (arbitrage) markets are refused; the degenerate interval
    ``I = {0}`` returns the minimizer 0 with ``φ = 1``; otherwise the root
    of the increasing derivative is bracketed by doubling/halving steps
    from an interior point and polished by Brent's method, falling back to
    the finite endpoint at which the derivative fails to change sign.
    """
    if not horizon > 0:
        raise ValueError("horizon must be > 0")
    vt = as_validated(t, q)
    if is_monotone(vt, q) is not Monotonicity.NOT_MONOTONE:
        raise ArbitrageMarketError("monotone price process")
    iv = exp_moment_interval(vt, q)
    if iv.is_degenerate:
        return MinimumPoint(0.0, MinimumCase.DEGENERATE_ZERO, 1.0, iv)

    def m_of(k: float) -> ExtReal:
        return cumulant_derivative(vt, k, q)

    start = _interior_start(iv)
    v0 = m_of(start)
    if not v0.is_finite:
        raise NoFiniteMinimizer(f"derivative not finite at interior point {start}")
    if v0.value == 0.0:
        kappa0 = start
        case = MinimumCase.INTERIOR_ROOT
    else:
        direction = 1 if v0.value < 0.0 else -1
        # fast path: a finite endpoint with an evaluable derivative tells us
        # immediately whether the minimum sits there or the root is interior
        endpoint = (iv.b if direction > 0 else iv.a)
        end_in_I = iv.b_in_I if direction > 0 else iv.a_in_I
        bracket = None
        if endpoint.is_finite and end_in_I:
            ve = m_of(endpoint.value)
            if (direction > 0 and ve <= 0.0) or (direction < 0 and ve >= 0.0):
                kappa0 = endpoint.value
                case = (MinimumCase.RIGHT_ENDPOINT if direction > 0
                        else MinimumCase.LEFT_ENDPOINT)
                c_min = min(cumulant(vt, kappa0, q).value, 0.0)
                return MinimumPoint(kappa0, case, math.exp(horizon * c_min), iv)
            if ve.is_finite:
                if direction > 0:
                    bracket = (start, endpoint.value, v0.value, ve.value)
                else:
                    bracket = (endpoint.value, start, ve.value, v0.value)
        if bracket is None:
            outcome = _walk_to_bracket(m_of, start, v0.value,
                                       iv.a.as_float(), iv.b.as_float(),
                                       direction)
            if outcome[0] == "endpoint":
                kappa0 = outcome[1]
                case = (MinimumCase.RIGHT_ENDPOINT if direction > 0
                        else MinimumCase.LEFT_ENDPOINT)
                c_min = min(cumulant(vt, kappa0, q).value, 0.0)
                return MinimumPoint(kappa0, case, math.exp(horizon * c_min), iv)
            bracket = outcome[1:]
        lo, hi, v_lo, v_hi = bracket
        if lo == hi:
            kappa0 = lo
        else:
            kappa0 = float(brentq(lambda k: m_of(k).value, lo, hi,
                                  xtol=_KAPPA_TOL, rtol=4 * 2.3e-16,
                                  maxiter=300))
        case = MinimumCase.INTERIOR_ROOT
    c_min = min(cumulant(vt, kappa0, q).value, 0.0)
    return MinimumPoint(kappa0, case, math.exp(horizon * c_min), iv)


# ---------------------------------------------------------------------------
# Esscher parameter classification
# ---------------------------------------------------------------------------


class EsscherCase(enum.Enum):
    INTERVAL_INTERIOR = "interval_interior"
    RIGHT_ENDPOINT_CLOSED = "right_endpoint_closed"
    LEFT_ENDPOINT_CLOSED = "left_endpoint_closed"
    BOTH_ENDPOINTS = "both_endpoints"
    DEGENERATE_ZERO_MEAN = "degenerate_zero_mean"


@dataclass(frozen=True)
class EsscherParameterStatus:
    """Existence (and location) of a zero of ``ψ_T`` on ``E``."""

    exists: bool
    case: Optional[EsscherCase]
    kappa0: Optional[float]
    diagnostic: str
    interval: ExpMomentInterval

    def describe(self) -> dict:
        return {"exists": self.exists,
                "case": self.case.value if self.case else None,
                "kappa0": self.kappa0, "diagnostic": self.diagnostic,
                "interval": self.interval.describe()}


def _shape_case(iv: ExpMomentInterval) -> EsscherCase:
    if iv.a_in_E and iv.b_in_E:
        return EsscherCase.BOTH_ENDPOINTS
    if iv.b_in_E:
        return EsscherCase.RIGHT_ENDPOINT_CLOSED
    if iv.a_in_E:
        return EsscherCase.LEFT_ENDPOINT_CLOSED
    return EsscherCase.INTERVAL_INTERIOR


def classify_esscher_parameter(t: TripletLike, horizon: float,
                               q: QuadratureSettings = DEFAULT_SETTINGS
                               ) -> EsscherParameterStatus:
    """Decide whether some tilt makes the tilted process driftless.

    Covers the degenerate interval (where everything hinges on whether the
    process mean exists and vanishes) and, on proper intervals, reduces to
    whether the increasing derivative function crosses zero inside the
    derivative-moment set ``E``.
    """
    vt = as_validated(t, q)
    iv = exp_moment_interval(vt, q)

    if iv.is_degenerate:
        right_ok = vt.nu.right_tail().moment_finite(1, 0.0)
        left_ok = vt.nu.left_tail().moment_finite(1, 0.0)
        if not (right_ok and left_ok):
            what = ("undefined" if not right_ok and not left_ok
                    else ("+inf" if not right_ok else "-inf"))
            return EsscherParameterStatus(
                False, None, None,
                f"degenerate moment interval and the process mean is {what}", iv)
        mean = cumulant_derivative(vt, 0.0, q)
        if abs(mean.value) <= _M_ATOL:
            return EsscherParameterStatus(
                True, EsscherCase.DEGENERATE_ZERO_MEAN, 0.0,
                "degenerate moment interval but the process is driftless", iv)
        return EsscherParameterStatus(
            False, None, None,
            f"degenerate moment interval with nonzero mean {mean.value:.6g}", iv)

    try:
        mp = minimize_mgf(vt, horizon, q)
    except ArbitrageMarketError:
        return EsscherParameterStatus(
            False, None, None,
            "monotone price process: the derivative function has constant sign", iv)

    if mp.case is MinimumCase.INTERIOR_ROOT:
        return EsscherParameterStatus(
            True, _shape_case(iv), mp.kappa0,
            "interior zero of the derivative function", iv)

    # endpoint minimum: the parameter exists only if the derivative
    # actually vanishes there (within tolerance) and the endpoint is in E
    v_end = cumulant_derivative(vt, mp.kappa0, q)
    if v_end.is_finite and abs(v_end.value) <= _M_ATOL:
        return EsscherParameterStatus(
            True, _shape_case(iv), mp.kappa0,
            "derivative vanishes exactly at the interval endpoint", iv)
    side = "below" if mp.case is MinimumCase.RIGHT_ENDPOINT else "above"
    return EsscherParameterStatus(
        False, None, None,
        f"derivative stays {'negative' if side == 'below' else 'positive'} "
        f"on the whole moment interval", iv)

"""Shared numerical kernels: quadrature, root finding, scalar maximization, ODE integration.

These routines are deliberately small, deterministic and bracket-safe so the
rest of the package can use them both as production engines and as oracles
when cross-checking closed forms. They are pure functions over caller-owned
state and safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidBracket, NonConvergence, StepUnderflow

_EPS = math.ulp(1.0)

__all__ = [
    "Tolerance",
    "Bracket",
    "OdeTrace",
    "integrate",
    "find_root",
    "maximize_scalar",
    "integrate_ode",
]


@dataclass(frozen=True)
class Tolerance:
    """Convergence targets for an iterative routine.

    rel is a dimensionless ratio, abs carries the units of the target
    quantity, max_iter caps refinement levels / iterations / steps.
    """

    rel: float = 1e-10
    abs: float = 0.0
    max_iter: int = 100

    def __post_init__(self) -> None:
        if not self.rel > 0.0:
            raise ValueError(f"Tolerance.rel must be > 0, got {self.rel}")
        if self.abs < 0.0:
            raise ValueError(f"Tolerance.abs must be >= 0, got {self.abs}")
        if self.max_iter < 1:
            raise ValueError(f"Tolerance.max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True)
class Bracket:
    """A closed interval [lo, hi] with lo < hi."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError(f"Bracket needs lo < hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class OdeTrace:
    """Accepted-step solution of an initial value problem.

    t has shape (n,), y has shape (n, d); row k is the state at t[k].
    """

    t: np.ndarray
    y: np.ndarray

    @property
    def final(self) -> np.ndarray:
        return self.y[-1]


_DEFAULT_QUAD_TOL = Tolerance(rel=1e-10, abs=0.0, max_iter=50)


def _simpson(width: float, f0: float, fm: float, f1: float) -> float:
    return width * (f0 + 4.0 * fm + f1) / 6.0


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: Tolerance = _DEFAULT_QUAD_TOL,
) -> float:
    """Adaptive composite Simpson quadrature of f over [a, b].

    Each subinterval is accepted once the Richardson error estimate
    (S_left + S_right - S_parent)/15 falls below its share of the global
    budget, and the extrapolated value is accumulated. tol.max_iter bounds
    the bisection depth.

    Raises NonConvergence if refinement does not stabilize.
    """
    if a == b:
        return 0.0
    if b < a:
        return -integrate(f, b, a, tol)

    fa = f(a)
    mid = 0.5 * (a + b)
    fm = f(mid)
    fb = f(b)
    whole = _simpson(b - a, fa, fm, fb)
    # Magnitude floor guards odd-integrand cancellation from zeroing the budget.
    scale = max(abs(whole), (b - a) * (abs(fa) + 4.0 * abs(fm) + abs(fb)) / 6.0)
    budget = tol.abs + tol.rel * scale

    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s_parent, depth = stack.pop()
        m = 0.5 * (lo + hi)
        lm = 0.5 * (lo + m)
        rm = 0.5 * (m + hi)
        flm = f(lm)
        frm = f(rm)
        s_left = _simpson(m - lo, flo, flm, fmid)
        s_right = _simpson(hi - m, fmid, frm, fhi)
        err = (s_left + s_right - s_parent) / 15.0
        local_budget = budget * (hi - lo) / (b - a)
        if abs(err) <= local_budget or (hi - lo) <= 16.0 * _EPS * (abs(lo) + abs(hi)):
            total += s_left + s_right + err
        else:
            if depth + 1 >= tol.max_iter:
                raise NonConvergence(
                    f"quadrature did not stabilize within {tol.max_iter} refinement "
                    f"levels on [{lo}, {hi}] (err={err:.3e}, budget={local_budget:.3e})"
                )
            stack.append((lo, m, flo, flm, fmid, s_left, depth + 1))
            stack.append((m, hi, fmid, frm, fhi, s_right, depth + 1))
    return total


_DEFAULT_ROOT_TOL = Tolerance(rel=1e-12, abs=0.0, max_iter=200)


def find_root(
    f: Callable[[float], float],
    b: Bracket,
    tol: Tolerance = _DEFAULT_ROOT_TOL,
) -> float:
    """Hybrid bisection/secant root of f inside the bracket.

    The iterate never leaves [b.lo, b.hi]: secant proposals falling outside
    the current sign-change interval are replaced by bisection. Returns x
    once |f(x)| <= tol.abs or the interval width shrinks below
    tol.rel * |x|.

    Raises InvalidBracket if f(b.lo) and f(b.hi) have the same sign,
    NonConvergence after tol.max_iter iterations.
    """
    lo, hi = b.lo, b.hi
    flo = f(lo)
    if flo == 0.0 or abs(flo) <= tol.abs:
        return lo
    fhi = f(hi)
    if fhi == 0.0 or abs(fhi) <= tol.abs:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise InvalidBracket(
            f"f has the same sign at both bracket ends: f({lo})={flo:.6g}, "
            f"f({hi})={fhi:.6g}"
        )

    x_prev, f_prev = lo, flo
    x_cur, f_cur = hi, fhi
    for _ in range(tol.max_iter):
        mid = 0.5 * (lo + hi)
        width = hi - lo
        if (
            width <= tol.rel * abs(mid)
            or width <= 8.0 * _EPS * max(abs(lo), abs(hi))
            or mid == lo
            or mid == hi
        ):
            return mid

        x_new = mid
        if f_cur != f_prev:
            secant = x_cur - f_cur * (x_cur - x_prev) / (f_cur - f_prev)
            if lo < secant < hi:
                x_new = secant
        f_new = f(x_new)
        if f_new == 0.0 or abs(f_new) <= tol.abs:
            return x_new
        if (f_new > 0.0) == (flo > 0.0):
            lo, flo = x_new, f_new
        else:
            hi, fhi = x_new, f_new
        x_prev, f_prev = x_cur, f_cur
        x_cur, f_cur = x_new, f_new
    raise NonConvergence(
        f"root bracket stalled at [{lo}, {hi}] after {tol.max_iter} iterations"
    )


_DEFAULT_MAX_TOL = Tolerance(rel=1e-10, abs=1e-12, max_iter=300)
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = 1.0 - _INVPHI


def maximize_scalar(
    f: Callable[[float], float],
    b: Bracket,
    tol: Tolerance = _DEFAULT_MAX_TOL,
) -> tuple[float, float]:
    """Golden-section maximization of a unimodal f over the bracket.

    Returns (argmax, max). Unimodality is the caller's responsibility; on a
    plateau any interior point is a valid answer. The interval shrinks until
    its width is below tol.rel * |argmax| + tol.abs.
    """
    lo, hi = b.lo, b.hi
    width = hi - lo
    x1 = lo + _INVPHI2 * width
    x2 = lo + _INVPHI * width
    f1 = f(x1)
    f2 = f(x2)
    for _ in range(tol.max_iter):
        mid = 0.5 * (lo + hi)
        width = hi - lo
        if width <= tol.rel * abs(mid) + tol.abs or width <= 8.0 * _EPS * max(
            abs(lo), abs(hi)
        ):
            return (x1, f1) if f1 >= f2 else (x2, f2)
        if f1 >= f2:
            hi = x2
            x2, f2 = x1, f1
            width = hi - lo
            x1 = lo + _INVPHI2 * width
            f1 = f(x1)
        else:
            lo = x1
            x1, f1 = x2, f2
            width = hi - lo
            x2 = lo + _INVPHI * width
            f2 = f(x2)
    raise NonConvergence(
        f"golden-section interval [{lo}, {hi}] did not reach tolerance in "
        f"{tol.max_iter} iterations"
    )


_DEFAULT_ODE_TOL = Tolerance(rel=1e-8, abs=1e-12, max_iter=5_000_000)

# Dormand-Prince 5(4) tableau.
_DP_C = (0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0)
_DP_A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0),
    (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0),
)
# y5 - y4 error weights (5th-order row minus the embedded 4th-order row).
_DP_E = (
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)


def _initial_step(rhs, t0, y0, f0, span, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    scale[scale == 0.0] = atol if atol > 0.0 else rtol
    d0 = math.sqrt(float(np.mean((y0 / scale) ** 2)))
    d1 = math.sqrt(float(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 * span if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = y0 + h0 * f0
    f1 = np.asarray(rhs(t0 + h0, y1), dtype=float)
    d2 = math.sqrt(float(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6 * span, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, span)


def integrate_ode(
    rhs: Callable[[float, np.ndarray], Sequence[float]],
    x0: Sequence[float] | float,
    t_span: tuple[float, float],
    tol: Tolerance = _DEFAULT_ODE_TOL,
) -> OdeTrace:
    """Adaptive Dormand-Prince 5(4) integration of dx/dt = rhs(t, x).

    Returns the trace at accepted steps, time-ordered, including both span
    endpoints. tol.rel / tol.abs drive the per-step error test; tol.max_iter
    caps the total number of attempted steps.

    Raises StepUnderflow if the step collapses below the resolvable size
    (stiffness guard), NonConvergence if the step budget runs out.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ValueError(f"t_span must satisfy t0 < t1, got {t_span}")
    y = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    rtol, atol = tol.rel, tol.abs
    span = t1 - t0

    t = t0
    f_cur = np.asarray(rhs(t, y), dtype=float)
    h = _initial_step(rhs, t, y, f_cur, span, rtol, atol)
    h_min_floor = 16.0 * _EPS

    ts = [t0]
    ys = [y.copy()]
    k = np.empty((7, y.size), dtype=float)
    attempts = 0
    while t < t1:
        if attempts >= tol.max_iter:
            raise NonConvergence(
                f"ODE step budget of {tol.max_iter} exhausted at t={t:.6g}"
            )
        h = min(h, t1 - t)
        if h <= h_min_floor * max(abs(t), span):
            raise StepUnderflow(
                f"adaptive step collapsed to h={h:.3e} at t={t:.6g}"
            )
        attempts += 1

        k[0] = f_cur
        for i in range(1, 6):
            acc = k[0] * _DP_A[i][0]
            for j in range(1, i):
                acc = acc + k[j] * _DP_A[i][j]
            k[i] = np.asarray(rhs(t + _DP_C[i] * h, y + h * acc), dtype=float)
        y_new = y + h * (
            k[0] * _DP_A[6][0]
            + k[2] * _DP_A[6][2]
            + k[3] * _DP_A[6][3]
            + k[4] * _DP_A[6][4]
            + k[5] * _DP_A[6][5]
        )
        # k[6] is the FSAL stage: rhs at (t + h, y_new).
        k[6] = np.asarray(rhs(t + h, y_new), dtype=float)
        err_vec = h * (
            k[0] * _DP_E[0]
            + k[2] * _DP_E[2]
            + k[3] * _DP_E[3]
            + k[4] * _DP_E[4]
            + k[5] * _DP_E[5]
            + k[6] * _DP_E[6]
        )
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        scale[scale == 0.0] = max(atol, rtol)
        err_norm = math.sqrt(float(np.mean((err_vec / scale) ** 2)))
        # Error-per-unit-step control: each step may spend a tolerance share
        # proportional to its length, so the accumulated global error stays
        # of the order of the requested tolerance (and halving the tolerance
        # at least halves the result change). A plain per-step criterion acts
        # as the acceptance floor: at a switching surface of the right-hand
        # side the proportional share is unreachable at any h, and the floor
        # lets the integrator cross with one tolerance-sized local error.
        ratio = err_norm * (span / h)

        if ratio <= 1.0 or err_norm <= 1.0:
            t = t + h
            y = y_new
            f_cur = k[6]
            ts.append(t)
            ys.append(y.copy())
            factor = 5.0 if ratio == 0.0 else min(5.0, 0.9 * ratio**-0.25)
            h *= max(factor, 0.2)
        else:
            h *= max(0.2, 0.9 * ratio**-0.25)

    return OdeTrace(t=np.asarray(ts), y=np.asarray(ys))

"""Shared numerical kernel.

Bracketed root finding, quadrature that tolerates inverse-square-root
endpoint singularities, an embedded adaptive Runge-Kutta integrator with
event detection, finite-difference derivatives, and monotone-function
inversion.  Everything is pure with respect to its inputs; the cumulative
quadrature tables built here are immutable after construction and safe to
share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate as _scipy_integrate

__all__ = [
    "NumericsError",
    "NoSignChange",
    "MaxIterations",
    "NonIntegrable",
    "InvalidSpec",
    "StepUnderflow",
    "DomainTooSmall",
    "OutOfImage",
    "OutOfDomain",
    "DegenerateDomain",
    "Bracket",
    "QuadratureSpec",
    "OdeState",
    "OdeSolution",
    "find_root",
    "expand_bracket",
    "integrate",
    "solve_ode",
    "fd_derivative",
    "one_sided_derivative",
    "monotone_inverse",
    "gauss_kronrod_panel",
    "CumulativeQuadrature",
]

ROOT_TOL = 1e-12
QUAD_REL_TOL = 1e-10
QUAD_ABS_TOL = 1e-12
ODE_TOL = 1e-10

_EPS = float(np.finfo(float).eps)


class NumericsError(Exception):
    """Base class for numerical-kernel failures."""


class NoSignChange(NumericsError):
    """The proposed interval does not bracket a sign change."""


class MaxIterations(NumericsError):
    """An iteration failed to converge within its budget."""


class NonIntegrable(NumericsError):
    """Quadrature refinement stalled before reaching the tolerance."""


class InvalidSpec(NumericsError):
    """A quadrature specification violates its invariants."""


class StepUnderflow(NumericsError):
    """The ODE step size collapsed below machine resolution."""


class DomainTooSmall(NumericsError):
    """A finite-difference stencil does not fit inside the domain."""


class OutOfImage(NumericsError):
    """Inversion target lies at or beyond the endpoint limits."""


class OutOfDomain(NumericsError):
    """An evaluation point lies outside the admissible domain."""


class DegenerateDomain(NumericsError):
    """A parameter sits at (or below) a degenerate double-root threshold."""


# ----------------------------------------------------------------------
# Root finding
# ----------------------------------------------------------------------

def _opposite_signs(a: float, b: float) -> bool:
    # sign comparison instead of a*b < 0: the product underflows to +-0
    # for subnormal values and would silently report "no sign change"
    return (a > 0.0) != (b > 0.0) and a != 0.0 and b != 0.0


@dataclass(frozen=True)
class Bracket:
    """A sign-change interval: lo < hi with f(lo) * f(hi) < 0."""

    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise NoSignChange(f"bracket endpoints out of order: [{self.lo}, {self.hi}]")
        if not (np.isfinite(self.f_lo) and np.isfinite(self.f_hi)):
            raise NoSignChange("bracket function values must be finite")
        if not _opposite_signs(self.f_lo, self.f_hi) \
                and self.f_lo != 0.0 and self.f_hi != 0.0:
            raise NoSignChange(
                f"no sign change on [{self.lo}, {self.hi}]: f={self.f_lo}, {self.f_hi}"
            )

    @classmethod
    def from_function(cls, f: Callable[[float], float], lo: float, hi: float) -> "Bracket":
        return cls(lo, hi, f(lo), f(hi))


def expand_bracket(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    grow: float = 2.0,
    max_expansions: int = 200,
) -> Bracket:
    """Grow `hi` geometrically away from `lo` until f changes sign."""
    f_lo = f(lo)
    f_hi = f(hi)
    for _ in range(max_expansions):
        if _opposite_signs(f_lo, f_hi):
            return Bracket(lo, hi, f_lo, f_hi)
        hi = lo + (hi - lo) * grow
        f_hi = f(hi)
    raise NoSignChange(f"no sign change found expanding from [{lo}, {hi}]")


def find_root(
    f: Callable[[float], float],
    bracket: Bracket,
    tol: float = ROOT_TOL,
    max_iter: int = 200,
) -> float:
    """Safeguarded secant/bisection hybrid on a validated bracket.

    Alternates a secant step (when it lands strictly inside the current
    interval) with plain bisection, which guarantees convergence.  Returns
    a point whose enclosing interval has width <= tol (absolute, with a
    machine-epsilon relative floor).
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    a, b = bracket.lo, bracket.hi
    fa, fb = bracket.f_lo, bracket.f_hi
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b

    use_secant = True
    for _ in range(max_iter):
        width = b - a
        if width <= tol + 4.0 * _EPS * max(abs(a), abs(b)):
            return a if abs(fa) <= abs(fb) else b
        x = None
        if use_secant and fb != fa:
            x_sec = b - fb * (b - a) / (fb - fa)
            if a + 0.01 * width < x_sec < b - 0.01 * width:
                x = x_sec
        if x is None:
            x = a + 0.5 * width
        use_secant = not use_secant

        fx = f(x)
        if fx == 0.0:
            return x
        if _opposite_signs(fa, fx):
            b, fb = x, fx
        else:
            a, fa = x, fx
    raise MaxIterations(f"root not localized to {tol} in {max_iter} iterations")


# ----------------------------------------------------------------------
# Quadrature
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec:
    """Definite-integral request over (lower, upper).

    Endpoints flagged singular may carry an integrable divergence up to
    (distance)^{-1/2}; those ends are removed by the substitution
    x = end +/- s**2 before the adaptive rule sees the integrand.
    """

    lower: float
    upper: float
    singular_lower: bool = False
    singular_upper: bool = False
    rel_tol: float = QUAD_REL_TOL
    abs_tol: float = QUAD_ABS_TOL

    def __post_init__(self):
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise InvalidSpec("integration limits must be finite")
        if not self.lower < self.upper:
            raise InvalidSpec(f"need lower < upper, got [{self.lower}, {self.upper}]")
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise InvalidSpec("tolerances must be positive")


def _smooth_pieces(f, spec: QuadratureSpec):
    """Split/substitute so every piece is free of endpoint divergence."""
    a, b = spec.lower, spec.upper
    pieces = []
    if spec.singular_lower and spec.singular_upper:
        mid = 0.5 * (a + b)
        pieces.append((lambda s: 2.0 * s * f(a + s * s), 0.0, math.sqrt(mid - a)))
        pieces.append((lambda s: 2.0 * s * f(b - s * s), 0.0, math.sqrt(b - mid)))
    elif spec.singular_lower:
        pieces.append((lambda s: 2.0 * s * f(a + s * s), 0.0, math.sqrt(b - a)))
    elif spec.singular_upper:
        pieces.append((lambda s: 2.0 * s * f(b - s * s), 0.0, math.sqrt(b - a)))
    else:
        pieces.append((f, a, b))
    return pieces


def _tanh_sinh(g, a, b, rel_tol, abs_tol, max_level=14):
    """Double-exponential rule on (a, b); open, never samples the endpoints.

    Level-doubling trapezoid in the transformed variable; returns
    (value, error_estimate).  Fallback for integrands the adaptive
    Gauss-Kronrod rule mishandles.
    """
    c = 0.5 * (a + b)
    d = 0.5 * (b - a)
    t_max = 3.8

    def term(t):
        u = 0.5 * math.pi * math.sinh(t)
        x = c + d * math.tanh(u)
        w = d * 0.5 * math.pi * math.cosh(t) / math.cosh(u) ** 2
        if w <= 0.0 or not (a < x < b):
            return 0.0
        return w * g(x)

    h = 1.0
    s = term(0.0)
    n_side = int(t_max / h)
    for i in range(1, n_side + 1):
        s += term(i * h) + term(-i * h)
    estimate = h * s
    prev = math.inf
    for level in range(1, max_level + 1):
        h *= 0.5
        add = 0.0
        t = h
        while t <= t_max:
            add += term(t) + term(-t)
            t += 2.0 * h
        s += add
        estimate = h * s
        err = abs(estimate - prev)
        if level >= 3 and err <= max(abs_tol, rel_tol * abs(estimate)):
            return estimate, err
        prev = estimate
    return estimate, abs(estimate - prev)


def integrate(f: Callable[[float], float], spec: QuadratureSpec) -> tuple[float, float]:
    """Integrate f over spec's interval; returns (value, error_estimate).

    Flagged singular ends are substituted away, then each smooth piece goes
    through adaptive Gauss-Kronrod (QUADPACK); a double-exponential rule is
    the fallback when the adaptive rule stalls.  Raises NonIntegrable when
    neither route reaches the requested tolerance.
    """
    total = 0.0
    total_err = 0.0
    pieces = _smooth_pieces(f, spec)
    for g, a, b in pieces:
        out = _scipy_integrate.quad(
            g, a, b,
            epsabs=spec.abs_tol / len(pieces),
            epsrel=spec.rel_tol,
            limit=200,
            full_output=1,
        )
        val, err = out[0], out[1]
        ok = len(out) < 4 and np.isfinite(val)
        tol_here = max(spec.abs_tol, spec.rel_tol * abs(val))
        if not ok or err > 10.0 * tol_here:
            val, err = _tanh_sinh(g, a, b, spec.rel_tol, spec.abs_tol)
            tol_here = max(spec.abs_tol, spec.rel_tol * abs(val))
            if not np.isfinite(val) or err > 100.0 * tol_here:
                raise NonIntegrable(
                    f"refinement stalled on ({a}, {b}): err={err}, tol={tol_here}"
                )
        total += val
        total_err += err
    return total, total_err


# 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
_GK_NODES = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813,
])
_GK_WEIGHTS = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
])
_G7_WEIGHTS = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
])


def gauss_kronrod_panel(f_vec, a: float, b: float) -> tuple[float, float]:
    """Single 15-point Kronrod panel of a vectorized integrand.

    Returns (value, error_estimate); the estimate is the Gauss/Kronrod
    discrepancy.
    """
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid + half * _GK_NODES
    y = np.asarray(f_vec(x), dtype=float)
    k15 = half * float(np.dot(_GK_WEIGHTS, y))
    g7 = half * float(np.dot(_G7_WEIGHTS, y[1::2]))
    return k15, abs(k15 - g7)


def _gk_adaptive(f_vec, a, b, tol_abs, rel=1e-13, depth=0, max_depth=8):
    val, err = gauss_kronrod_panel(f_vec, a, b)
    converged = err <= tol_abs + rel * abs(val)
    if converged or depth >= max_depth or (b - a) < 64.0 * _EPS * max(1.0, abs(a), abs(b)):
        return val, err
    m = 0.5 * (a + b)
    v1, e1 = _gk_adaptive(f_vec, a, m, 0.5 * tol_abs, rel, depth + 1, max_depth)
    v2, e2 = _gk_adaptive(f_vec, m, b, 0.5 * tol_abs, rel, depth + 1, max_depth)
    return v1 + v2, e1 + e2


class CumulativeQuadrature:
    """Cumulative integral of a vectorized integrand over (lower, upper).

    The endpoints may carry inverse-square-root singularities; the first
    and last cells are evaluated through the x = end +/- s**2 substitution,
    so the table holds finite values all the way to the closed endpoints.
    Nodes cluster near the ends (cosine spacing), matching where the
    integrand steepens.  `value(x)` adds one Gauss-Kronrod panel from the
    nearest node, which keeps repeated evaluation cheap and consistent with
    the table.
    """

    def __init__(
        self,
        f_vec: Callable[[np.ndarray], np.ndarray],
        lower: float,
        upper: float,
        singular_lower: bool = False,
        singular_upper: bool = False,
        n_cells: int = 512,
        tol: float = 1e-14,
        left_sub: Callable[[np.ndarray], np.ndarray] | None = None,
        right_sub: Callable[[np.ndarray], np.ndarray] | None = None,
    ):
        """left_sub/right_sub, when given, are the substituted end-cell
        integrands g(s) = 2 s f(end +/- s^2) written so the distance to the
        endpoint enters as s^2 exactly; this sidesteps the cancellation of
        computing (x - end) from a rounded x and is what keeps the table
        accurate to ~1e-13 relative.  Without them a generic substitution
        of f is used, whose accuracy floor near a singular end is set by
        eps * |end| / distance.
        """
        if not lower < upper:
            raise InvalidSpec("need lower < upper")
        self.f = f_vec
        self.lower = float(lower)
        self.upper = float(upper)
        self.singular_lower = singular_lower
        self.singular_upper = singular_upper
        self._left = left_sub if left_sub is not None else self._generic_left()
        self._right = right_sub if right_sub is not None else self._generic_right()
        j = np.arange(n_cells + 1)
        self.nodes = lower + (upper - lower) * 0.5 * (1.0 - np.cos(np.pi * j / n_cells))
        self.nodes[0] = lower
        self.nodes[-1] = upper
        # absolute floor per cell; panels also accept at ~1e-13 relative
        cell_tol = tol * max(1.0, upper - lower)
        cum = np.empty(n_cells + 1)
        cum[0] = 0.0
        for i in range(n_cells):
            a, b = self.nodes[i], self.nodes[i + 1]
            if i == 0 and singular_lower:
                v, _ = _gk_adaptive(self._left, 0.0, math.sqrt(b - a), cell_tol)
            elif i == n_cells - 1 and singular_upper:
                v, _ = _gk_adaptive(self._right, 0.0, math.sqrt(b - a), cell_tol)
                # substitution runs from the far (upper) end backwards
            else:
                v, _ = _gk_adaptive(self.f, a, b, cell_tol)
            cum[i + 1] = cum[i] + v
        self.table = cum
        self._cell_tol = cell_tol

    def _generic_left(self):
        f, end = self.f, self.lower
        return lambda s: 2.0 * s * f(end + s * s)

    def _generic_right(self):
        f, end = self.f, self.upper
        return lambda s: 2.0 * s * f(end - s * s)

    @property
    def total(self) -> float:
        return float(self.table[-1])

    def value(self, x: float) -> float:
        """Cumulative integral from `lower` to x (x in the closed interval)."""
        if x <= self.lower:
            if x < self.lower - 1e-12 * (self.upper - self.lower):
                raise OutOfDomain(f"{x} below {self.lower}")
            return 0.0
        if x >= self.upper:
            if x > self.upper + 1e-12 * (self.upper - self.lower):
                raise OutOfDomain(f"{x} above {self.upper}")
            return self.total
        i = int(np.searchsorted(self.nodes, x) - 1)
        i = max(0, min(i, len(self.nodes) - 2))
        a = float(self.nodes[i])
        if x == a:
            return float(self.table[i])
        if i == 0 and self.singular_lower:
            v, _ = _gk_adaptive(self._left, 0.0, math.sqrt(x - self.lower), self._cell_tol)
            return v
        if i == len(self.nodes) - 2 and self.singular_upper:
            v, _ = _gk_adaptive(self._right, 0.0, math.sqrt(self.upper - x), self._cell_tol)
            return self.total - v
        v, _ = _gk_adaptive(self.f, a, x, self._cell_tol)
        return float(self.table[i]) + v


# ----------------------------------------------------------------------
# ODE integration (Dormand-Prince 5(4), adaptive, with event detection)
# ----------------------------------------------------------------------

@dataclass
class OdeState:
    """One accepted point of a trajectory: time, state vector, step used."""

    t: float
    y: np.ndarray
    step: float

    def __post_init__(self):
        self.y = np.atleast_1d(np.asarray(self.y, dtype=float))
        if self.step <= 0.0:
            raise ValueError("step must be positive")
        if not np.all(np.isfinite(self.y)):
            raise ValueError("state vector must be finite")


@dataclass
class OdeSolution:
    states: list[OdeState] = field(default_factory=list)
    events: list[OdeState] = field(default_factory=list)

    def __iter__(self):
        return iter(self.states)

    def __len__(self):
        return len(self.states)


_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_C = [0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


def _hermite(t, t0, y0, f0, t1, y1, f1):
    """Cubic Hermite interpolant of a step, for event refinement."""
    h = t1 - t0
    s = (t - t0) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def solve_ode(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: OdeState,
    t_end: float,
    tol: float = ODE_TOL,
    event: Callable[[float, np.ndarray], float] | None = None,
    max_events: int | None = None,
    max_steps: int = 1_000_000,
) -> OdeSolution:
    """Adaptive Dormand-Prince 5(4) trajectory from y0.t to t_end.

    Local error is controlled to `tol` (used as both absolute and relative
    weight).  When `event` is supplied, sign changes of event(t, y) across
    accepted steps are refined on the step's Hermite interpolant and
    recorded; integration stops early once `max_events` are found.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    t = float(y0.t)
    y = np.atleast_1d(np.asarray(y0.y, dtype=float))
    direction = 1.0 if t_end >= t else -1.0
    h = min(abs(y0.step), abs(t_end - t)) * direction
    if h == 0.0:
        return OdeSolution([OdeState(t, y, max(abs(y0.step), _EPS))])

    sol = OdeSolution()
    sol.states.append(OdeState(t, y.copy(), abs(h)))
    k1 = np.asarray(rhs(t, y), dtype=float)
    e_prev = event(t, y) if event is not None else None

    for _ in range(max_steps):
        if direction * (t - t_end) >= 0.0:
            break
        if direction * (t + h - t_end) > 0.0:
            h = t_end - t
        if abs(h) < 32.0 * _EPS * max(1.0, abs(t)):
            raise StepUnderflow(f"step collapsed at t={t}")

        k = [k1]
        failed = False
        for i in range(1, 7):
            yi = y + h * sum(a * kk for a, kk in zip(_DP_A[i], k))
            if not np.all(np.isfinite(yi)):
                failed = True
                break
            k.append(np.asarray(rhs(t + _DP_C[i] * h, yi), dtype=float))
        if failed:
            h *= 0.5
            continue
        karr = np.array(k)
        y5 = y + h * (_DP_B5 @ karr)
        y4 = y + h * (_DP_B4 @ karr)
        scale = tol + tol * np.maximum(np.abs(y), np.abs(y5))
        err = math.sqrt(float(np.mean(((y5 - y4) / scale) ** 2)))

        if err <= 1.0:
            t_new = t + h
            f_new = k[6]  # FSAL: stage 7 evaluated at (t+h, y5)
            if event is not None:
                e_new = event(t_new, y5)
                if e_prev is not None and _opposite_signs(e_prev, e_new):
                    ta, tb = t, t_new
                    ea, eb = e_prev, e_new
                    for _ in range(80):
                        tm = 0.5 * (ta + tb)
                        ym = _hermite(tm, t, y, k1, t_new, y5, f_new)
                        em = event(tm, ym)
                        if _opposite_signs(ea, em) or em == 0.0:
                            tb, eb = tm, em
                        else:
                            ta, ea = tm, em
                    tm = 0.5 * (ta + tb)
                    ym = _hermite(tm, t, y, k1, t_new, y5, f_new)
                    sol.events.append(OdeState(tm, ym, abs(h)))
                    if max_events is not None and len(sol.events) >= max_events:
                        sol.states.append(OdeState(t_new, y5.copy(), abs(h)))
                        return sol
                e_prev = e_new
            t, y, k1 = t_new, y5, f_new
            sol.states.append(OdeState(t, y.copy(), abs(h)))
            h *= min(5.0, max(0.2, 0.9 * err ** -0.2 if err > 0 else 5.0))
        else:
            h *= max(0.2, 0.9 * err ** -0.2)
    else:
        raise MaxIterations("step budget exhausted before t_end")
    return sol


# ----------------------------------------------------------------------
# Finite differences
# ----------------------------------------------------------------------

_CENTRAL_STENCILS = {
    # order -> (offsets, coefficients, h_power), 4th-order accurate
    1: ([-2, -1, 1, 2], [1 / 12, -8 / 12, 8 / 12, -1 / 12], 1),
    2: ([-2, -1, 0, 1, 2], [-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12], 2),
    3: ([-3, -2, -1, 1, 2, 3], [1 / 8, -1.0, 13 / 8, -13 / 8, 1.0, -1 / 8], 3),
}
_FORWARD_STENCILS = {
    # 2nd-order accurate one-sided stencils; mirror for the backward side
    1: ([0, 1, 2], [-3 / 2, 2.0, -1 / 2], 1),
    2: ([0, 1, 2, 3], [2.0, -5.0, 4.0, -1.0], 2),
    3: ([0, 1, 2, 3, 4], [-5 / 2, 9.0, -12.0, 7.0, -3 / 2], 3),
}
# step exponents ~ eps^(1/(order + accuracy))
_CENTRAL_H = {1: 1e-3, 2: 2e-3, 3: 5e-3}
_ONESIDED_H = {1: 2e-6, 2: 2e-4, 3: 2e-3}


def one_sided_derivative(f, x: float, order: int, step: float, forward: bool) -> float:
    """One-sided derivative of order 1..3, Richardson-extrapolated twice.

    Uses the 2nd-order stencils at step, step/2 and step/4 and cancels the
    h^2 and h^3 error terms; meant for comparing one-sided limits at
    finite-smoothness junction points, where raw truncation would swamp
    the mismatch being measured.
    """

    def raw(s_step):
        s = s_step if forward else -s_step
        vals = [f(x + i * s) for i in range(5)]
        if order == 1:
            return (-3.0 * vals[0] + 4.0 * vals[1] - vals[2]) / (2.0 * s)
        if order == 2:
            return (2.0 * vals[0] - 5.0 * vals[1] + 4.0 * vals[2] - vals[3]) / (s * s)
        if order == 3:
            return (-5.0 * vals[0] + 18.0 * vals[1] - 24.0 * vals[2]
                    + 14.0 * vals[3] - 3.0 * vals[4]) / (2.0 * s ** 3)
        raise ValueError("order must be 1, 2 or 3")

    d1 = raw(step)
    d2 = raw(0.5 * step)
    d4 = raw(0.25 * step)
    r1 = (4.0 * d2 - d1) / 3.0
    r2 = (4.0 * d4 - d2) / 3.0
    return (8.0 * r2 - r1) / 7.0


def fd_derivative(
    f: Callable[[float], float],
    x: float,
    order: int,
    scale: float = 1.0,
    side: str = "central",
    step: float | None = None,
    lo: float | None = None,
    hi: float | None = None,
) -> float:
    """Finite-difference derivative of the given order (1, 2 or 3).

    `side` is "central", "forward" or "backward"; `scale` sets the length
    scale the default step is proportional to.  If domain bounds are given
    and even the smallest sensible stencil does not fit, DomainTooSmall is
    raised.
    """
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    if scale <= 0.0:
        raise ValueError("scale must be positive")
    if side == "central":
        offsets, coeffs, hpow = _CENTRAL_STENCILS[order]
        h = step if step is not None else _CENTRAL_H[order] * scale
    elif side in ("forward", "backward"):
        offsets, coeffs, hpow = _FORWARD_STENCILS[order]
        h = step if step is not None else _ONESIDED_H[order] * scale
        if side == "backward":
            offsets = [-o for o in offsets]
            coeffs = [c * (-1) ** order for c in coeffs]
    else:
        raise ValueError(f"unknown side {side!r}")

    if lo is not None or hi is not None:
        span_lo = min(offsets) * h
        span_hi = max(offsets) * h
        room_lo = x - lo if lo is not None else math.inf
        room_hi = hi - x if hi is not None else math.inf
        shrink = 1.0
        if span_lo < 0 and -span_lo > room_lo:
            shrink = min(shrink, room_lo / -span_lo)
        if span_hi > 0 and span_hi > room_hi:
            shrink = min(shrink, room_hi / span_hi)
        h *= shrink
        if h < 1e4 * _EPS * max(1.0, abs(x)):
            raise DomainTooSmall(f"stencil of order {order} does not fit at x={x}")

    acc = 0.0
    for o, c in zip(offsets, coeffs):
        acc += c * f(x + o * h)
    return acc / h ** hpow


# ----------------------------------------------------------------------
# Monotone inversion
# ----------------------------------------------------------------------

def monotone_inverse(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    y: float,
    tol: float = ROOT_TOL,
) -> float:
    """Solve f(x) = y for a strictly monotone f on the open interval (lo, hi).

    Raises OutOfImage when y sits at or beyond the sampled endpoint values.
    """
    width = hi - lo
    if width <= 0.0:
        raise ValueError("need lo < hi")
    delta = max(1e-13 * width, 4.0 * _EPS * max(abs(lo), abs(hi)))
    a, b = lo + delta, hi - delta
    fa, fb = f(a), f(b)
    increasing = fb > fa
    f_min, f_max = (fa, fb) if increasing else (fb, fa)
    if not (f_min < y < f_max):
        raise OutOfImage(f"target {y} outside sampled image ({f_min}, {f_max})")
    g = (lambda x: f(x) - y)
    return find_root(g, Bracket(a, b, fa - y, fb - y), tol=tol)

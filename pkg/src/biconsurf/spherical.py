"""The sphere-ambient family on its fundamental strip.

For C > 4/3^{3/2} the polynomial-like function T(xi) = -xi^{8/3} + 3C xi^2 - 3
has exactly two positive roots xi01 < xi02 straddling xi00 = (9C/4)^{3/2}.
On the strip (xi01, xi02) x R the metric

    g_C = 3 / (xi^2 T(xi)) dxi^2 + dtheta^2 / xi^2

is realized inside the unit 3-sphere by

    Phi_C(xi, theta) = (sqrt(1 - 1/(C xi^2)) cos zeta,
                        sqrt(1 - 1/(C xi^2)) sin zeta,
                        cos(sqrt(C) theta) / (sqrt(C) xi),
                        sin(sqrt(C) theta) / (sqrt(C) xi)),

with zeta the quadrature of sqrt(C) tau^{4/3} / ((C tau^2 - 1) sqrt(T(tau)))
based at xi00.  The same immersion arises from an arclength-parametrized
curve whose curvature k solves k'' = -(16/9) k - 32 k^3 + (7/4) C1 k^{5/2}
with C1 = 16 * 3^{1/4} C; that route is kept here as an ODE cross-check,
connected to the strip coordinates by k = 3^{-3/2} xi^{4/3}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import diffgeo
from .numerics import (
    Bracket,
    CumulativeQuadrature,
    DegenerateDomain,
    OdeState,
    OutOfDomain,
    expand_bracket,
    find_root,
    integrate,
    QuadratureSpec,
    solve_ode,
)

__all__ = [
    "C_MIN",
    "FamilyParamsS3",
    "DomainRoots",
    "T",
    "T_deriv",
    "L",
    "domain_roots",
    "metric_gC",
    "gauss_curvature_DC",
    "grad_K_norm",
    "SphereFamily",
    "family",
    "zeta0",
    "immersion_PhiC",
    "phic_patch",
    "curvature_ode_k",
    "phi_coordinate_bridge",
    "c0_ode_residual",
    "master_ode_residual",
    "metric_profile_derivs",
]

C_MIN = 4.0 / 3.0 ** 1.5  # threshold where the two roots of T coalesce

ROOT_TOL = 1e-13


@dataclass(frozen=True)
class FamilyParamsS3:
    """Sphere-family parameters: C above the double-root threshold."""

    C: float
    sign: int = +1
    c_base: float = 0.0

    def __post_init__(self):
        if self.C <= C_MIN:
            raise DegenerateDomain(f"C = {self.C} <= {C_MIN}")
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")

    @property
    def C1(self) -> float:
        return 16.0 * 3.0 ** 0.25 * self.C


@dataclass(frozen=True)
class DomainRoots:
    """Roots of T bracketing the strip, plus their curvature-side images."""

    xi01: float
    xi00: float
    xi02: float

    def __post_init__(self):
        if not (0.0 < self.xi01 < self.xi00 < self.xi02):
            raise ValueError("roots out of order")

    @property
    def k01(self) -> float:
        return 3.0 ** -1.5 * self.xi01 ** (4.0 / 3.0)

    @property
    def k02(self) -> float:
        return 3.0 ** -1.5 * self.xi02 ** (4.0 / 3.0)

    def contains(self, xi: float) -> bool:
        return self.xi01 < xi < self.xi02


def T(C: float, xi):
    xi = np.asarray(xi, dtype=float) if not np.isscalar(xi) else xi
    return -np.power(xi, 8.0 / 3.0) + 3.0 * C * np.square(xi) - 3.0


def T_deriv(C: float, xi):
    return -(8.0 / 3.0) * np.power(xi, 5.0 / 3.0) + 6.0 * C * xi


def T_deriv2(C: float, xi):
    return -(40.0 / 9.0) * np.power(xi, 2.0 / 3.0) + 6.0 * C


def T_over_distance(C: float, root: float, d):
    """T(root + d) / d from the Taylor polynomial around the root.

    Valid for |d| well inside the strip (the d^4 truncation is below
    machine precision for |d| <= ~1e-3 root); the point is that d enters
    exactly, so there is no cancellation even for d near the rounding
    scale of root.
    """
    d = np.asarray(d, dtype=float)
    t1 = float(T_deriv(C, root))
    t2 = float(T_deriv2(C, root))
    t3 = -(80.0 / 27.0) * root ** (-1.0 / 3.0)
    t4 = (80.0 / 81.0) * root ** (-4.0 / 3.0)
    return t1 + d * (t2 / 2.0 + d * (t3 / 6.0 + d * (t4 / 24.0)))


def T_near_roots(C: float, tau, roots: "DomainRoots", switch: float | None = None):
    """T evaluated stably arbitrarily close to its strip roots.

    Direct evaluation of T loses relative accuracy within ~1e-7 of a root
    (catastrophic cancellation against the noise of the root itself);
    inside a small window the value is recovered from the Taylor expansion
    about the root instead.
    """
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    span = roots.xi02 - roots.xi01
    if switch is None:
        switch = 1e-4 * span
    out = T(C, tau)
    for root in (roots.xi01, roots.xi02):
        d = tau - root
        mask = np.abs(d) <= switch
        if np.any(mask):
            dm = d[mask]
            out[mask] = dm * T_over_distance(C, root, dm)
    return out


def T_stable(C: float, xi: float, roots: "DomainRoots") -> float:
    return float(T_near_roots(C, xi, roots)[0])


def L(C1: float, k):
    return -16.0 / 9.0 - 16.0 * np.square(k) + C1 * np.power(k, 1.5)


def domain_roots(C: float, tol: float = ROOT_TOL) -> DomainRoots:
    """Bracketed roots xi01 < xi00 < xi02 of T for an admissible C.

    The midpoint xi00 = (9C/4)^{3/2} maximizes nothing in particular but
    always separates the two roots; T(xi00) = 2187 C^4 / 256 - 3, so a
    non-positive value there flags the degenerate (double-root) regime.
    """
    xi00 = (2.25 * C) ** 1.5
    t00 = float(T(C, xi00))
    if t00 <= 10.0 * np.finfo(float).eps * max(1.0, 3.0 * C * xi00 ** 2):
        raise DegenerateDomain(
            f"C = {C} at or below the double-root threshold {C_MIN}"
        )
    f = lambda x: float(T(C, x))
    lo = find_root(f, Bracket.from_function(f, 1e-9, xi00), tol=tol)
    upper = expand_bracket(f, xi00, 2.0 * xi00)
    hi = find_root(f, upper, tol=tol)
    return DomainRoots(xi01=lo, xi00=xi00, xi02=hi)


def metric_gC(C: float, xi: float) -> tuple[float, float]:
    """Closed-form metric coefficients (E, G) on the strip; F = 0."""
    t = float(T(C, xi))
    if xi <= 0.0 or t <= 0.0:
        raise OutOfDomain(f"xi = {xi} outside the strip for C = {C}")
    return 3.0 / (xi * xi * t), 1.0 / (xi * xi)


def gauss_curvature_DC(xi: float) -> float:
    """Strip Gauss curvature 1 - xi^{8/3}/9; independent of C."""
    return 1.0 - xi ** (8.0 / 3.0) / 9.0


def grad_K_norm(C: float, xi: float) -> float:
    """Metric norm of the curvature gradient on the strip: vanishes at both ends."""
    t = float(T(C, xi))
    if t < 0.0:
        raise OutOfDomain(f"xi = {xi} outside the strip")
    # |grad K| = sqrt(E^{-1}) |K'| with K' = -(8/27) xi^{5/3}
    return math.sqrt(xi * xi * t / 3.0) * (8.0 / 27.0) * xi ** (5.0 / 3.0)


class SphereFamily:
    """Per-C bundle: roots, zeta quadrature, metric, and the immersion.

    Construction is single-threaded; the finished object is immutable in
    practice and safe for concurrent evaluation.
    """

    def __init__(self, C: float, sign: int = +1, c_base: float = 0.0, n_cells: int = 512):
        self.params = FamilyParamsS3(C=C, sign=sign, c_base=c_base)
        self.C = float(C)
        self.roots = domain_roots(C)
        sc = math.sqrt(self.C)

        roots = self.roots
        C_ = self.C

        def zeta_integrand(tau):
            tau = np.atleast_1d(np.asarray(tau, dtype=float))
            tv = np.maximum(T_near_roots(C_, tau, roots), 1e-300)
            return sc * np.power(tau, 4.0 / 3.0) / ((C_ * tau * tau - 1.0) * np.sqrt(tv))

        def zeta_smooth(tau):
            # the integrand with the 1/sqrt(T) factor stripped
            return sc * np.power(tau, 4.0 / 3.0) / (C_ * tau * tau - 1.0)

        def zeta_left(s):
            # 2 s f(xi01 + s^2) with sqrt(T) = s sqrt(T/d), d = s^2 exact
            d = s * s
            return 2.0 * zeta_smooth(roots.xi01 + d) / np.sqrt(T_over_distance(C_, roots.xi01, d))

        def zeta_right(s):
            d = s * s
            return 2.0 * zeta_smooth(roots.xi02 - d) / np.sqrt(-T_over_distance(C_, roots.xi02, -d))

        self._zeta_cum = CumulativeQuadrature(
            zeta_integrand, self.roots.xi01, self.roots.xi02,
            singular_lower=True, singular_upper=True, n_cells=n_cells,
            left_sub=zeta_left, right_sub=zeta_right,
        )
        self._zeta_base = self._zeta_cum.value(self.roots.xi00)

    # -- scalar quantities -------------------------------------------------

    def zeta0(self, xi: float) -> float:
        """Turning-angle quadrature based at xi00 (zeta0(xi00) = 0)."""
        if not (self.roots.xi01 <= xi <= self.roots.xi02):
            raise OutOfDomain(f"xi = {xi} outside [{self.roots.xi01}, {self.roots.xi02}]")
        return self._zeta_cum.value(xi) - self._zeta_base

    def zeta0_deriv(self, xi: float) -> float:
        t = T_stable(self.C, xi, self.roots)
        if t <= 0.0:
            raise OutOfDomain(f"xi = {xi} at or outside the strip ends")
        return math.sqrt(self.C) * xi ** (4.0 / 3.0) / ((self.C * xi * xi - 1.0) * math.sqrt(t))

    @property
    def zeta_limits(self) -> tuple[float, float]:
        """(limit at xi01, limit at xi02); both finite."""
        return (-self._zeta_base, self._zeta_cum.total - self._zeta_base)

    def zeta(self, xi: float) -> float:
        return self.params.sign * (self.zeta0(xi) + self.params.c_base)

    # -- immersion ----------------------------------------------------------

    def radius(self, xi: float) -> float:
        w = 1.0 - 1.0 / (self.C * xi * xi)
        if w <= 0.0:
            raise OutOfDomain(f"C xi^2 <= 1 at xi = {xi}")
        return math.sqrt(w)

    def immersion(self, xi: float, theta: float) -> np.ndarray:
        if not self.roots.contains(xi):
            raise OutOfDomain(f"xi = {xi} outside the open strip")
        R = self.radius(xi)
        z = self.zeta(xi)
        sc = math.sqrt(self.C)
        return np.array([
            R * math.cos(z),
            R * math.sin(z),
            math.cos(sc * theta) / (sc * xi),
            math.sin(sc * theta) / (sc * xi),
        ])

    def immersion_partials(self, xi: float, theta: float):
        R = self.radius(xi)
        z = self.zeta(xi)
        sc = math.sqrt(self.C)
        dR = 1.0 / (self.C * xi ** 3 * R)
        dz = self.params.sign * self.zeta0_deriv(xi)
        ct, st = math.cos(sc * theta), math.sin(sc * theta)
        cz, sz = math.cos(z), math.sin(z)
        d_xi = np.array([
            dR * cz - R * sz * dz,
            dR * sz + R * cz * dz,
            -ct / (sc * xi * xi),
            -st / (sc * xi * xi),
        ])
        d_theta = np.array([0.0, 0.0, -st / xi, ct / xi])
        return d_xi, d_theta

    def patch(self, xi_margin: float = 1e-3, theta_range=(0.0, 1.0)) -> diffgeo.ImmersionPatch:
        """Strip patch trimmed by a relative margin at the singular ends."""
        width = self.roots.xi02 - self.roots.xi01
        lo = self.roots.xi01 + xi_margin * width
        hi = self.roots.xi02 - xi_margin * width
        return diffgeo.ImmersionPatch(
            u_range=(lo, hi),
            v_range=theta_range,
            ambient=diffgeo.SPHERE3,
            position=lambda xi, th: self.immersion(xi, th),
            first_partials=lambda xi, th: self.immersion_partials(xi, th),
            name=f"PhiC(C={self.C})",
            u_singularities=(self.roots.xi01, self.roots.xi02),
        )

    def metric_profile_derivs(self):
        """Conformal exponent derivatives (w.r.t. the isothermal coordinate)
        of the strip metric, indexed by xi.

        With du = sqrt(3/T) dxi the metric reads e^{-2 log xi}(du^2 + dtheta^2);
        the chain rule turns the T-closed-forms into u-derivatives of the
        exponent phi = -log xi.
        """
        C = self.C

        def derivs(xi: float):
            t = float(T(C, xi))
            if t <= 0.0:
                raise OutOfDomain(f"xi = {xi} outside the strip")
            tp = float(T_deriv(C, xi))
            tpp = float(T_deriv2(C, xi))
            root = math.sqrt(t / 3.0)
            phi = -math.log(xi)
            d1 = -root / xi
            d2 = -tp / (6.0 * xi) + t / (3.0 * xi * xi)
            d3 = root * (-tpp / (6.0 * xi) + tp / (2.0 * xi * xi) - 2.0 * t / (3.0 * xi ** 3))
            return phi, d1, d2, d3

        return derivs


@lru_cache(maxsize=32)
def family(C: float) -> SphereFamily:
    """Cached per-C family bundle (thread-safe via lru_cache)."""
    return SphereFamily(C)


# -- module-level convenience wrappers ---------------------------------------

def zeta0(C: float, xi: float) -> float:
    return family(C).zeta0(xi)


def immersion_PhiC(params: FamilyParamsS3 | float, xi: float, theta: float) -> np.ndarray:
    if isinstance(params, FamilyParamsS3):
        fam = SphereFamily(params.C, params.sign, params.c_base) \
            if (params.sign, params.c_base) != (1, 0.0) else family(params.C)
    else:
        fam = family(float(params))
    return fam.immersion(xi, theta)


def phic_patch(C: float, xi_margin: float = 1e-3, theta_range=(0.0, 1.0)):
    return family(C).patch(xi_margin=xi_margin, theta_range=theta_range)


# -- curvature ODE route ------------------------------------------------------

def curvature_ode_k(
    params: FamilyParamsS3,
    k_start: float,
    direction: int = +1,
    n_turning_points: int = 7,
    t_end: float = 100.0,
    tol: float = 1e-10,
) -> dict:
    """Integrate the profile-curvature oscillation and report invariants.

    Starts on the zero level set of the conserved quantity
    P = (k')^2 + (16/9) k^2 + 16 k^4 - C1 k^{7/2}, with k' taken from P = 0,
    and integrates k'' = -(16/9) k - 32 k^3 + (7/4) C1 k^{5/2}.  Turning
    points (k' = 0) are located by event detection; the equation itself is
    regular there, so the trajectory passes through them and oscillates
    between the two roots of L.  Returns the trajectory with the maximum
    conserved-quantity drift (absolute and relative to the term scale) and
    the k-range covered.
    """
    C1 = params.C1
    roots = domain_roots(params.C)
    if not (roots.k01 < k_start < roots.k02):
        raise OutOfDomain(f"k_start = {k_start} outside ({roots.k01}, {roots.k02})")
    lk = float(L(C1, k_start))
    if lk <= 0.0:
        raise OutOfDomain(f"L(k_start) = {lk} <= 0")
    kp0 = direction * k_start * math.sqrt(lk)

    def rhs(t, y):
        k = y[0]
        return np.array([y[1], -16.0 / 9.0 * k - 32.0 * k ** 3 + 1.75 * C1 * k ** 2.5])

    def prime(k, kp):
        return kp * kp + 16.0 / 9.0 * k * k + 16.0 * k ** 4 - C1 * k ** 3.5

    sol = solve_ode(
        rhs,
        OdeState(0.0, np.array([k_start, kp0]), 1e-3),
        t_end,
        tol=tol,
        event=lambda t, y: y[1],
        max_events=n_turning_points,
    )
    ks = np.array([s.y[0] for s in sol.states])
    kps = np.array([s.y[1] for s in sol.states])
    drift = np.abs(prime(ks, kps))
    scale = np.max(kps ** 2 + 16.0 / 9.0 * ks ** 2 + 16.0 * ks ** 4 + C1 * ks ** 3.5)
    return {
        "states": sol.states,
        "turning_points": sol.events,
        "max_drift": float(np.max(drift)),
        "max_drift_relative": float(np.max(drift) / scale),
        "k_min": float(np.min(ks)),
        "k_max": float(np.max(ks)),
        "k01": roots.k01,
        "k02": roots.k02,
    }


# -- isothermal-coordinate bridge ---------------------------------------------

def _bridge_radicand(a: float, b: float, phi):
    return b / 3.0 * np.exp(-2.0 * np.asarray(phi) / 3.0) - np.exp(2.0 * np.asarray(phi)) + a


def phi_coordinate_bridge(a: float, b: float, phi: float) -> tuple[float, float]:
    """Isothermal coordinate u(phi) of the conformal-exponent route, plus C.

    Requires a > 0, b < 0 and a positive radicand at phi.  The base point
    of the quadrature maps to xi00 under xi = (-b)^{3/8} e^{-phi}, which
    keeps the convention aligned with the strip quadratures.  The induced
    strip constant is C = a (-b)^{-3/4}.
    """
    if a <= 0.0 or b >= 0.0:
        raise OutOfDomain("need a > 0 and b < 0")
    C = a * (-b) ** -0.75
    if C <= C_MIN:
        raise DegenerateDomain(f"induced C = {C} <= {C_MIN}")
    rad = float(_bridge_radicand(a, b, phi))
    if rad <= 0.0:
        raise OutOfDomain(f"radicand {rad} <= 0 at phi = {phi}")
    roots = domain_roots(C)
    scale38 = (-b) ** 0.375
    phi0 = math.log(scale38 / roots.xi00)
    lo, hi = sorted((phi0, phi))
    if lo == hi:
        return 0.0, C
    spec = QuadratureSpec(lower=lo, upper=hi)
    val, _ = integrate(lambda p: 1.0 / math.sqrt(float(_bridge_radicand(a, b, p))), spec)
    return math.copysign(val, phi - phi0), C


def bridge_to_strip(a: float, b: float, phi: float, v: float) -> tuple[float, float]:
    """The change of variables (phi, v) -> (xi, theta)."""
    scale38 = (-b) ** 0.375
    return scale38 * math.exp(-phi), scale38 * v


def bridge_metric_match(a: float, b: float, phi_values) -> dict:
    """Transform the conformal metric through the bridge and compare to g_C.

    The (phi, v) metric e^{2 phi}(dphi^2 / radicand + dv^2) must pull back
    to the closed-form strip coefficients; reports the worst relative
    mismatch over the given phi samples.
    """
    C = a * (-b) ** -0.75
    worst = 0.0
    for phi in np.asarray(phi_values, dtype=float):
        rad = float(_bridge_radicand(a, b, phi))
        if rad <= 0.0:
            raise OutOfDomain(f"phi = {phi} outside the admissible band")
        xi, _ = bridge_to_strip(a, b, phi, 0.0)
        e2phi = math.exp(2.0 * phi)
        # dxi = -xi dphi and theta = (-b)^{3/8} v
        E_transformed = (e2phi / rad) / (xi * xi)
        G_transformed = e2phi * (-b) ** -0.75
        E_closed, G_closed = metric_gC(C, xi)
        worst = max(worst,
                    abs(E_transformed - E_closed) / abs(E_closed),
                    abs(G_transformed - G_closed) / abs(G_closed))
    return {"C": C, "max_rel_mismatch": worst}


# -- conformal-exponent equation ----------------------------------------------

def master_ode_residual(c: float, derivs, u: float) -> float:
    """Residual of 8 c e^{2 phi} phi' + 2 phi' phi'' + 3 phi''' at u."""
    phi, d1, d2, d3 = derivs(u)
    return 8.0 * c * math.exp(2.0 * phi) * d1 + 2.0 * d1 * d2 + 3.0 * d3


def _flat_profile_derivs(u: float):
    th = math.tanh(u / 3.0)
    sech2 = 1.0 / math.cosh(u / 3.0) ** 2
    phi = 3.0 * math.log(math.cosh(u / 3.0))
    return phi, th, sech2 / 3.0, -2.0 / 9.0 * sech2 * th


def c0_ode_residual(u: float) -> float:
    """Flat-case equation 3 phi''' + 2 phi' phi'' = 0 on phi = 3 log cosh(u/3)."""
    _, d1, d2, d3 = _flat_profile_derivs(u)
    return 3.0 * d3 + 2.0 * d1 * d2


def metric_profile_derivs(C: float):
    return family(C).metric_profile_derivs()

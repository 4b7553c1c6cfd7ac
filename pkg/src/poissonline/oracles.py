"""Independent checks for the kernels and solvers.

Nothing here reuses the subordination quadrature path: spectral sums are
built from an orthonormal eigenfunction recurrence, PDE defects from
central differences, and the limit studies compare against closed forms.
Agreement between these routes and the kernel evaluations is what the
verification suites assert.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import mpmath as mp
import numpy as np

from .kernels import (
    EvaluationPoint,
    OscillatorParam,
    dirac_kernel,
    euler_kernel,
    halfplane_poisson_kernel,
    mehler_heat_kernel,
    oscillator_poisson_kernel,
)
from .quadrature import QuadratureConfig

__all__ = [
    "SpectralConfig",
    "StencilConfig",
    "VerificationReport",
    "InsufficientOrderError",
    "InvalidStencilError",
    "hermite_function",
    "spectral_heat_kernel",
    "spectral_poisson_kernel",
    "heat_tail_bound",
    "poisson_tail_bound",
    "required_heat_order",
    "required_poisson_order",
    "pde_residual",
    "kernel_field",
    "eigen_solution_field",
    "residual_convergence_orders",
    "limit_a_to_zero_gap",
    "boundary_limit_gap",
    "make_report",
]

# Uniform sup bound for the unit-frequency eigenfunctions; the frequency-a
# family is bounded by _PHI_SUP * a**0.25.
_PHI_SUP = 0.816

_QUARTER_LOG_PI = 0.25 * math.log(math.pi)


class InsufficientOrderError(ValueError):
    """The configured truncation order cannot certify the requested tolerance."""


class InvalidStencilError(ValueError):
    """A finite-difference stencil would leave the kernel's domain."""


@dataclass(frozen=True)
class SpectralConfig:
    """Truncation order and frequency for the eigenfunction sums."""

    n_max: int
    a: float

    def __post_init__(self):
        if not (isinstance(self.n_max, int) and not isinstance(self.n_max, bool)
                and self.n_max >= 1):
            raise ValueError(f"n_max must be a positive integer, got {self.n_max!r}")
        if not (isinstance(self.a, (int, float)) and math.isfinite(self.a)
                and self.a > 0):
            raise ValueError(f"a must be a positive finite real, got {self.a!r}")
        object.__setattr__(self, "a", float(self.a))


@dataclass(frozen=True)
class StencilConfig:
    """Central-difference step sizes in the boundary and spatial directions."""

    h_y: float = 1e-3
    h_x: float = 1e-3

    def __post_init__(self):
        for name in ("h_y", "h_x"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite real, got {v!r}")
            object.__setattr__(self, name, float(v))


@dataclass(frozen=True)
class VerificationReport:
    """One named check: a measured quantity against its tolerance."""

    check_name: str
    measured: float
    tolerance: float
    passed: bool
    context: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.passed != (self.measured <= self.tolerance):
            raise ValueError("passed must equal (measured <= tolerance)")


def make_report(check_name: str, measured: float, tolerance: float,
                **context) -> VerificationReport:
    measured = float(measured)
    tolerance = float(tolerance)
    return VerificationReport(check_name, measured, tolerance,
                              measured <= tolerance, dict(context))


# ---------------------------------------------------------------------------
# Eigenfunctions and spectral sums


def _hermite_all(n_max: int, a: float, x):
    """Orthonormal oscillator eigenfunctions phi_0..phi_n_max at x.

    Uses the normalized three-term recurrence with the Gaussian weight
    folded in (in z = sqrt(a) x):

        psi_0 = pi^{-1/4} exp(-z^2/2)
        psi_{k+1} = sqrt(2/(k+1)) z psi_k - sqrt(k/(k+1)) psi_{k-1}

    so no raw polynomial value is ever formed; all iterates stay bounded
    by ~0.8 and the recurrence is safe far beyond n = 500.  The returned
    array has shape (n_max + 1,) + shape(x) and carries the a**0.25
    rescaling of phi_n(x) = a^{1/4} psi_n(sqrt(a) x).
    """
    z = math.sqrt(a) * np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + z.shape)
    with np.errstate(under="ignore"):
        psi_prev = np.exp(-0.5 * z * z - _QUARTER_LOG_PI)
        out[0] = psi_prev
        if n_max >= 1:
            psi = math.sqrt(2.0) * z * psi_prev
            out[1] = psi
            for k in range(1, n_max):
                psi, psi_prev = (math.sqrt(2.0 / (k + 1)) * z * psi
                                 - math.sqrt(k / (k + 1.0)) * psi_prev), psi
                out[k + 1] = psi
    return a ** 0.25 * out


def hermite_function(n: int, a: float, x):
    """L2-normalized eigenfunction phi_n of -d^2/dx^2 + a^2 x^2.

    phi_n has eigenvalue (2n + 1) a and unit L2 norm; phi_0(0) = (a/pi)^{1/4}.
    Accepts scalar or array x and returns a matching float or array.
    """
    if not (isinstance(n, int) and not isinstance(n, bool) and n >= 0):
        raise ValueError(f"n must be a nonnegative integer, got {n!r}")
    if not (isinstance(a, (int, float)) and math.isfinite(a) and a > 0):
        raise ValueError(f"a must be a positive finite real, got {a!r}")
    values = _hermite_all(n, float(a), x)[n]
    if np.ndim(x) == 0:
        return float(values)
    return values


def heat_tail_bound(t: float, sc: SpectralConfig) -> float:
    """Bound on the heat sum remainder beyond n_max (geometric tail)."""
    r = math.exp(-2.0 * sc.a * t)
    lead = math.exp(-(2 * sc.n_max + 3) * sc.a * t)
    return _PHI_SUP ** 2 * math.sqrt(sc.a) * lead / (1.0 - r)


def poisson_tail_bound(y: float, sc: SpectralConfig) -> float:
    """Bound on the Poisson sum remainder beyond n_max.

    Uses sum_{n>N} exp(-y sqrt((2n+1)a)) <= (s0/(a y) + 1/(a y^2)) e^{-y s0}
    with s0 = sqrt((2N+1)a), times the uniform eigenfunction bound squared.
    """
    s0 = math.sqrt((2 * sc.n_max + 1) * sc.a)
    weight = s0 / (sc.a * y) + 1.0 / (sc.a * y * y)
    return _PHI_SUP ** 2 * math.sqrt(sc.a) * weight * math.exp(-y * s0)


def required_poisson_order(y: float, a: float, tol: float) -> int:
    """Smallest n_max whose Poisson tail bound is below tol."""
    n = 1
    while poisson_tail_bound(y, SpectralConfig(n, a)) > tol:
        n *= 2
        if n > 4_000_000:
            raise InsufficientOrderError(
                f"no practical truncation certifies tol={tol} at y={y}, a={a}"
            )
    lo, hi = n // 2, n
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if poisson_tail_bound(y, SpectralConfig(mid, a)) > tol:
            lo = mid
        else:
            hi = mid
    return hi


def required_heat_order(t: float, a: float, tol: float) -> int:
    """Smallest n_max whose heat tail bound is below tol."""
    n = 1
    while heat_tail_bound(t, SpectralConfig(n, a)) > tol:
        n *= 2
        if n > 4_000_000:
            raise InsufficientOrderError(
                f"no practical truncation certifies tol={tol} at t={t}, a={a}"
            )
    lo, hi = n // 2, n
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if heat_tail_bound(t, SpectralConfig(mid, a)) > tol:
            lo = mid
        else:
            hi = mid
    return hi


def _heat_sum_mp(t: float, x: float, xp: float, a: float, n_max: int) -> float:
    """Exact-arithmetic heat sum, safe against sign cancellation.

    Off the diagonal the terms e^{-(2n+1)at} phi_n(x) phi_n(x') alternate
    in sign and can cancel to far below machine epsilon times their
    magnitudes (e.g. to ~1e-18 from terms of size ~0.1), so the sum is
    carried out in mpmath from the exact binary values of the inputs,
    with the working precision doubled until the measured cancellation
    leaves at least 20 digits of headroom.
    """
    dps = 50
    while True:
        with mp.workdps(dps):
            am, tm = mp.mpf(a), mp.mpf(t)
            z1 = mp.sqrt(am) * mp.mpf(x)
            z2 = mp.sqrt(am) * mp.mpf(xp)
            c = mp.pi ** mp.mpf("-0.25")
            p1_prev, p2_prev = c * mp.e ** (-z1 * z1 / 2), c * mp.e ** (-z2 * z2 / 2)
            weight = mp.e ** (-am * tm)
            ratio = mp.e ** (-2 * am * tm)
            total = weight * p1_prev * p2_prev
            gross = abs(total)
            if n_max >= 1:
                p1, p2 = mp.sqrt(2) * z1 * p1_prev, mp.sqrt(2) * z2 * p2_prev
                weight *= ratio
                term = weight * p1 * p2
                total += term
                gross += abs(term)
                for k in range(1, n_max):
                    cma, cmb = mp.sqrt(mp.mpf(2) / (k + 1)), mp.sqrt(mp.mpf(k) / (k + 1))
                    p1, p1_prev = cma * z1 * p1 - cmb * p1_prev, p1
                    p2, p2_prev = cma * z2 * p2 - cmb * p2_prev, p2
                    weight *= ratio
                    term = weight * p1 * p2
                    total += term
                    gross += abs(term)
            total *= mp.sqrt(am)
            gross *= mp.sqrt(am)
            if total != 0 and gross / abs(total) < mp.mpf(10) ** (dps - 20):
                return float(total)
            if total == 0:
                return 0.0
        dps *= 2
        if dps > 800:  # pragma: no cover - would need ~780 digits of cancellation
            raise InsufficientOrderError(
                "heat sum cancellation exceeds any practical working precision"
            )


def spectral_heat_kernel(t: float, x: float, xp: float, sc: SpectralConfig,
                         tol: float = 1e-12) -> float:
    """Heat kernel via the eigenfunction sum sum_n e^{-(2n+1)at} phi_n phi_n.

    Raises InsufficientOrderError when the truncation tail bound at
    sc.n_max exceeds tol, so a certified value is never silently wrong.
    The summation itself runs in exact arithmetic (see _heat_sum_mp), so
    the only error sources are the truncation tail, bounded by tol, and
    the final rounding to float.
    """
    if not (t > 0 and math.isfinite(t)):
        raise ValueError(f"t must be a positive finite real, got {t!r}")
    bound = heat_tail_bound(t, sc)
    if bound > tol:
        raise InsufficientOrderError(
            f"heat tail bound {bound:.3e} exceeds tol={tol:.3e} at n_max={sc.n_max}"
        )
    return _heat_sum_mp(t, float(x), float(xp), sc.a, sc.n_max)


def spectral_poisson_kernel(y: float, x: float, xp: float, sc: SpectralConfig,
                            tol: float = 1e-9) -> float:
    """Poisson kernel via sum_n e^{-y sqrt((2n+1)a)} phi_n(x) phi_n(x').

    The sqrt-exponent tail decays slowly for small y, so the truncation
    bound is checked at call time; InsufficientOrderError reports the
    order that would be needed.
    """
    if not (y > 0 and math.isfinite(y)):
        raise ValueError(f"y must be a positive finite real, got {y!r}")
    bound = poisson_tail_bound(y, sc)
    if bound > tol:
        needed = required_poisson_order(y, sc.a, tol)
        raise InsufficientOrderError(
            f"poisson tail bound {bound:.3e} exceeds tol={tol:.3e} at "
            f"n_max={sc.n_max}; n_max={needed} would certify it"
        )
    phi_x = _hermite_all(sc.n_max, sc.a, x)
    phi_xp = phi_x if xp == x else _hermite_all(sc.n_max, sc.a, xp)
    n = np.arange(sc.n_max + 1)
    with np.errstate(under="ignore"):
        weights = np.exp(-y * np.sqrt((2 * n + 1) * sc.a))
    return float(np.sum(weights * phi_x * phi_xp))


# ---------------------------------------------------------------------------
# Finite-difference PDE residuals

_OPERATORS = ("dirac", "euler", "oscillator")


def pde_residual(operator: str, fieldfn: Callable[[float, float], float],
                 y: float, x: float, st: StencilConfig | None = None,
                 a: float | None = None, tolerance: float = 1e-5,
                 check_name: str | None = None) -> VerificationReport:
    """Relative central-difference defect of (Op + d^2/dy^2) field = 0.

    Parameters
    ----------
    operator : {"dirac", "euler", "oscillator"}
        Spatial operator: d/dX, -2 a xi d/dxi, or d^2/dx^2 - a^2 x^2.
    fieldfn : callable
        The field (y, spatial) -> value whose defect is measured.
    y, x : float
        Evaluation point; the stencil must stay inside y > 0, and for the
        scaling operator inside one open half-line, else
        InvalidStencilError is raised.
    a : float, optional
        Required for the euler and oscillator operators.
    tolerance : float
        Threshold applied to the relative residual
        |defect| / (|field| + machine epsilon).
    """
    if operator not in _OPERATORS:
        raise ValueError(f"operator must be one of {_OPERATORS}, got {operator!r}")
    st = st or StencilConfig()
    if y - st.h_y <= 0.0:
        raise InvalidStencilError(
            f"stencil reaches y <= 0 (y={y}, h_y={st.h_y})"
        )
    if operator in ("euler", "oscillator") and a is None:
        raise ValueError(f"operator {operator!r} requires the parameter a")
    if operator == "euler" and (x == 0.0 or (x > 0) != (x - math.copysign(st.h_x, x) > 0)):
        raise InvalidStencilError(
            f"stencil crosses the invariant line xi = 0 (xi={x}, h_x={st.h_x})"
        )

    f0 = fieldfn(y, x)
    fyp = fieldfn(y + st.h_y, x)
    fym = fieldfn(y - st.h_y, x)
    d2y = (fyp - 2.0 * f0 + fym) / (st.h_y * st.h_y)

    fxp = fieldfn(y, x + st.h_x)
    fxm = fieldfn(y, x - st.h_x)
    if operator == "dirac":
        spatial = (fxp - fxm) / (2.0 * st.h_x)
    elif operator == "euler":
        spatial = -2.0 * a * x * (fxp - fxm) / (2.0 * st.h_x)
    else:
        d2x = (fxp - 2.0 * f0 + fxm) / (st.h_x * st.h_x)
        spatial = d2x - (a * a) * (x * x) * f0

    residual = abs(spatial + d2y) / (abs(f0) + np.finfo(float).eps)
    name = check_name or f"pde-residual-{operator}"
    return make_report(name, residual, tolerance,
                       operator=operator, y=y, x=x, h_y=st.h_y, h_x=st.h_x)


def kernel_field(operator: str, source: float, a: float | None = None,
                 cfg: QuadratureConfig | None = None,
                 prefactor_scale: float = 1.0) -> Callable[[float, float], float]:
    """The kernel itself as a field (y, target) -> value, source held fixed."""
    if operator == "dirac":
        return lambda y, x: dirac_kernel(EvaluationPoint(y, x, source)).value
    if operator == "euler":
        pa = OscillatorParam(a)
        return lambda y, x: euler_kernel(EvaluationPoint(y, x, source), pa).value
    if operator == "oscillator":
        pa = OscillatorParam(a)
        return lambda y, x: oscillator_poisson_kernel(
            EvaluationPoint(y, x, source), pa, cfg,
            prefactor_scale=prefactor_scale).value
    raise ValueError(f"operator must be one of {_OPERATORS}, got {operator!r}")


def eigen_solution_field(operator: str, *, rate: float | None = None,
                         exponent: float | None = None, n: int | None = None,
                         a: float | None = None) -> Callable[[float, float], float]:
    """Closed-form eigen-datum solutions of (Op + d^2/dy^2) u = 0.

    dirac       exp(-y sqrt(rate)) exp(-rate X)          (rate > 0)
    euler       exp(-y sqrt(2 a exponent)) |xi|^exponent (exponent > 0)
    oscillator  exp(-y sqrt((2n+1) a)) phi_n(x)

    Each decays in y with rate sqrt(eigenvalue), which is what the solvers
    must reproduce when fed the matching data preset.
    """
    if operator == "dirac":
        if rate is None or rate <= 0:
            raise ValueError("the dirac eigen-solution requires rate > 0")
        root = math.sqrt(rate)
        return lambda y, X: math.exp(-y * root - rate * X)
    if operator == "euler":
        if a is None or exponent is None or exponent <= 0:
            raise ValueError("the euler eigen-solution requires a and exponent > 0")
        root = math.sqrt(2.0 * a * exponent)
        return lambda y, xi: math.exp(-y * root) * abs(xi) ** exponent
    if operator == "oscillator":
        if a is None or n is None:
            raise ValueError("the oscillator eigen-solution requires a and n")
        root = math.sqrt((2 * n + 1) * a)
        return lambda y, x: math.exp(-y * root) * hermite_function(n, a, x)
    raise ValueError(f"operator must be one of {_OPERATORS}, got {operator!r}")


def residual_convergence_orders(operator: str,
                                fieldfn: Callable[[float, float], float],
                                y: float, x: float, h_values: Sequence[float],
                                a: float | None = None) -> list[float]:
    """Observed orders log2(r(h) / r(h/2)) along a halving sequence of h."""
    h_values = [float(h) for h in h_values]
    if len(h_values) < 2:
        raise ValueError("need at least two step sizes")
    for h0, h1 in zip(h_values[:-1], h_values[1:]):
        if abs(h0 / h1 - 2.0) > 1e-12:
            raise ValueError("h_values must halve at each step")
    residuals = [
        pde_residual(operator, fieldfn, y, x, StencilConfig(h, h), a=a,
                     tolerance=math.inf).measured
        for h in h_values
    ]
    return [math.log2(r0 / r1) for r0, r1 in zip(residuals[:-1], residuals[1:])]


# ---------------------------------------------------------------------------
# Limit studies


def limit_a_to_zero_gap(y: float, x: float, xp: float,
                        a_sequence: Sequence[float],
                        cfg: QuadratureConfig | None = None,
                        prefactor_scale: float = 1.0) -> VerificationReport:
    """Flat-limit study: oscillator kernel against the half-plane kernel.

    Evaluates the relative gap |P_a - P| / P along a decreasing sequence
    of frequencies.  Passes when the gaps decrease strictly and the final
    gap is at most 10 * a_final; `measured` is the final gap (inf when the
    sequence fails to decrease), `tolerance` the 10 * a_final bound, and
    the full gap list rides along in the context.
    """
    a_sequence = [float(a) for a in a_sequence]
    if not a_sequence:
        raise ValueError("a_sequence must not be empty")
    if any(a <= 0 or not math.isfinite(a) for a in a_sequence):
        raise ValueError("a_sequence entries must be positive finite reals")
    if any(a1 >= a0 for a0, a1 in zip(a_sequence[:-1], a_sequence[1:])):
        raise ValueError("a_sequence must decrease strictly")
    point = EvaluationPoint(y, x, xp)
    reference = halfplane_poisson_kernel(point).value
    gaps = []
    for a in a_sequence:
        kv = oscillator_poisson_kernel(point, OscillatorParam(a), cfg,
                                       prefactor_scale=prefactor_scale)
        gaps.append(abs(kv.value - reference) / reference)
    decreasing = all(g1 < g0 for g0, g1 in zip(gaps[:-1], gaps[1:]))
    measured = gaps[-1] if decreasing else math.inf
    return make_report("limit-a-to-zero", measured, 10.0 * a_sequence[-1],
                       gaps=tuple(gaps), a_sequence=tuple(a_sequence),
                       y=y, x=x, xp=xp, reference=reference)


def boundary_limit_gap(problem: str, data, y_sequence: Sequence[float],
                       spatial_points: Sequence[float], a: float | None = None,
                       cfg: QuadratureConfig | None = None) -> VerificationReport:
    """Boundary recovery study: sup |solution(y, .) - data| along y -> 0.

    Solves the requested problem at each y in the decreasing sequence and
    measures the sup norm of the defect over the given spatial points.
    Passes when the sup gaps are non-increasing; `measured` is the largest
    consecutive increment (<= 0 means monotone recovery) and the gap list
    is returned in the context.
    """
    from . import solvers  # local import; solvers layers on top of this module

    y_sequence = [float(y) for y in y_sequence]
    if not y_sequence:
        raise ValueError("y_sequence must not be empty")
    if any(y1 >= y0 for y0, y1 in zip(y_sequence[:-1], y_sequence[1:])):
        raise ValueError("y_sequence must decrease strictly")
    points = [float(x) for x in spatial_points]
    if not points:
        raise ValueError("spatial_points must not be empty")

    gaps = []
    for y in y_sequence:
        worst = 0.0
        for x in points:
            if problem == "dirac":
                solved = solvers.solve_dirac(data, y, x, cfg).value
                datum = float(data(x))
            elif problem == "euler":
                solved = solvers.solve_euler(data, y, x, a, cfg).value
                datum = float(data(x, a=a))
            elif problem == "oscillator":
                solved = solvers.solve_oscillator(data, y, x, a, cfg).value
                datum = float(data(x, a=a))
            else:
                raise ValueError(f"unknown problem {problem!r}")
            worst = max(worst, abs(solved - datum))
        gaps.append(worst)
    increments = [g1 - g0 for g0, g1 in zip(gaps[:-1], gaps[1:])]
    measured = max(increments) if increments else 0.0
    return make_report(f"boundary-limit-{problem}", measured, 0.0,
                       gaps=tuple(gaps), y_sequence=tuple(y_sequence))

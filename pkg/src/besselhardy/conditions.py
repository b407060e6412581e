"""Superharmonic comparison profiles and the decay-condition checks.

A profile is built on a balanced interval J between 2I and 2I^d: the interval
where the stopping functional equals exactly 1.  The profile

    phi(x) = 1 + (2(1-alpha))^{-1} int_J V(y) |x^{1-alpha} - y^{1-alpha}| dmu(y)

is evaluated in closed form for piecewise-constant-plus-power potentials, as
is its derivative phi'(x) = x^{-alpha}/2 * (int_{J, y<x} V dmu - int_{J, y>x} V dmu).
The checks: the weak form of -phi'' - (alpha/x) phi' = -1_J V including the
boundary term at 0, monotonicity of u -> K_u phi(z), and the large-time /
small-time decay rates of the Schroedinger mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import BalanceUnreachable
from .grid import Grid, GridFunction
from .kernel import heat_kernel
from .measure import Interval, Potential, WeightedMeasure, enlarge
from .section import DyadicInterval, ProperSection
from .semigroup import DEFAULT_SCHEME, SplittingScheme, schrodinger_apply


def balance_functional(m: WeightedMeasure, potential: Potential, interval: Interval) -> float:
    """|J|^2 / mu(J) * int_J V dmu with the plain set diameter of J."""
    return (interval.length**2 / m.mu(interval)) * m.potential_integral(potential, interval)


@dataclass(frozen=True)
class SuperharmonicProfile:
    measure: WeightedMeasure
    potential: Potential
    host: DyadicInterval
    balanced: Interval  # J
    c_j: float  # mu(J) / |J|^2 == int_J V dmu at balance
    balance_residual: float

    def phi(self, x):
        """Closed-form profile value; array-safe."""
        m = self.measure
        a = m.alpha
        xs = np.asarray(x, dtype=np.float64)
        total = np.zeros_like(xs)
        xp = xs ** (1.0 - a)
        for lo, hi, coeff, e in self.potential.terms():
            lo = max(lo, self.balanced.a)
            hi = min(hi, self.balanced.b)
            if lo >= hi:
                continue
            p_w = a + e + 1.0
            p_m = e + 2.0

            def w0(s):
                return coeff * s**p_w / p_w

            def m1(s):
                return coeff * s**p_m / p_m

            cut = np.clip(xs, lo, hi)
            below = xp * (w0(cut) - w0(lo)) - (m1(cut) - m1(lo))
            above = (m1(hi) - m1(cut)) - xp * (w0(hi) - w0(cut))
            total += below + above
        vals = 1.0 + total / (2.0 * (1.0 - a))
        return float(vals) if vals.ndim == 0 else vals

    def phi_prime(self, x):
        """Three-branch closed form of the derivative."""
        m = self.measure
        xs = np.asarray(x, dtype=np.float64)
        below = np.zeros_like(xs)
        for lo, hi, coeff, e in self.potential.terms():
            lo = max(lo, self.balanced.a)
            hi = min(hi, self.balanced.b)
            if lo >= hi:
                continue
            p_w = m.alpha + e + 1.0
            cut = np.clip(xs, lo, hi)
            below += coeff * (cut**p_w - lo**p_w) / p_w
        total = m.potential_integral(self.potential, self.balanced)
        vals = 0.5 * xs ** (-m.alpha) * (2.0 * below - total)
        return float(vals) if vals.ndim == 0 else vals

    def phi_gridfunction(self, grid: Grid) -> GridFunction:
        return GridFunction(grid, self.phi(grid.nodes))


def find_balanced_J(
    m: WeightedMeasure,
    potential: Potential,
    host: DyadicInterval,
    tol: float = 1e-10,
    max_iter: int = 200,
) -> SuperharmonicProfile:
    """Bisect along the expanding family from 2I to 2(I^d) until balance = 1.

    The family interpolates endpoints linearly, so it is nested; the balance
    functional is nondecreasing along it (nested-ratio monotonicity plus
    V >= 0), which makes plain bisection exact.  Raises BalanceUnreachable
    when even 2(I^d) has balance <= 1 (a corrupted or non-stopping host).
    """
    if not (0.0 < m.alpha < 1.0):
        raise ValueError("profiles require alpha in (0, 1)")
    inner = enlarge(host.to_interval(), 2.0)
    outer = enlarge(host.parent().to_interval(), 2.0)
    g_inner = balance_functional(m, potential, inner)
    g_outer = balance_functional(m, potential, outer)
    if g_inner > 1.0 + tol:
        raise BalanceUnreachable(f"2I already exceeds balance: {g_inner}")
    if g_outer <= 1.0:
        raise BalanceUnreachable(
            f"2(I^d) has balance {g_outer} <= 1; host does not satisfy the stopping rule"
        )

    def at(s: float) -> Interval:
        a = (1.0 - s) * inner.a + s * outer.a
        b = (1.0 - s) * inner.b + s * outer.b
        return Interval(a, b)

    lo_s, hi_s = 0.0, 1.0
    best = inner
    gb = g_inner
    for _ in range(max_iter):
        mid = 0.5 * (lo_s + hi_s)
        j = at(mid)
        g = balance_functional(m, potential, j)
        if abs(g - 1.0) < abs(gb - 1.0):
            best, gb = j, g
        if abs(g - 1.0) <= tol:
            break
        if g > 1.0:
            hi_s = mid
        else:
            lo_s = mid
    if abs(gb - 1.0) > tol and abs(g_inner - 1.0) <= tol:
        best, gb = inner, g_inner
    c_j = m.mu(best) / best.length**2
    return SuperharmonicProfile(m, potential, host, best, c_j, abs(gb - 1.0))


# ---------------------------------------------------------------------------
# weak identity


@dataclass(frozen=True)
class SmoothBump:
    """Cubic smoothstep bump: 0 outside (lo, hi), plateau 1 in the middle."""

    lo: float
    hi: float
    ramp_frac: float = 0.25

    def _w(self) -> float:
        return self.ramp_frac * (self.hi - self.lo)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        w = self._w()
        up = np.clip((x - self.lo) / w, 0.0, 1.0)
        down = np.clip((self.hi - x) / w, 0.0, 1.0)
        out = (up * up * (3 - 2 * up)) * (down * down * (3 - 2 * down))
        return out if x.ndim else float(out)

    def derivative(self, x):
        x = np.asarray(x, dtype=np.float64)
        w = self._w()
        up = np.clip((x - self.lo) / w, 0.0, 1.0)
        down = np.clip((self.hi - x) / w, 0.0, 1.0)
        s_up = up * up * (3 - 2 * up)
        s_down = down * down * (3 - 2 * down)
        d_up = 6.0 * up * (1.0 - up) / w
        d_down = -6.0 * down * (1.0 - down) / w
        out = d_up * s_down + s_up * d_down
        return out if x.ndim else float(out)

    @property
    def support(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    @property
    def kinks(self) -> tuple[float, ...]:
        w = self._w()
        return (self.lo, self.lo + w, self.hi - w, self.hi)


@dataclass(frozen=True)
class LeftPlateauBump:
    """psi == 1 on [0, flat_to], smoothstep down to 0 at zero_at."""

    flat_to: float
    zero_at: float

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        u = np.clip((self.zero_at - x) / (self.zero_at - self.flat_to), 0.0, 1.0)
        out = u * u * (3 - 2 * u)
        return out if x.ndim else float(out)

    def derivative(self, x):
        x = np.asarray(x, dtype=np.float64)
        w = self.zero_at - self.flat_to
        u = np.clip((self.zero_at - x) / w, 0.0, 1.0)
        out = -6.0 * u * (1.0 - u) / w
        return out if x.ndim else float(out)

    @property
    def support(self) -> tuple[float, float]:
        return (0.0, self.zero_at)

    @property
    def kinks(self) -> tuple[float, ...]:
        return (self.flat_to, self.zero_at)


def phi_equation_residual(
    profile: SuperharmonicProfile,
    test_fn,
    include_boundary_term: bool = True,
    quad_tol: float = 1e-11,
) -> float:
    """Residual of the weak identity

        int psi' phi' dmu + int psi 1_J V dmu - psi(0) c_J / 2 = 0.

    The boundary term activates only when the test function is nonzero at the
    origin (the flux -phi'(x) x^alpha at 0+ equals c_J/2).
    """
    m = profile.measure
    lo, hi = test_fn.support
    j = profile.balanced
    pts = sorted(
        {p for p in (j.a, j.b, *test_fn.kinks) if lo < p < hi}
        | {p for t in profile.potential.terms() for p in t[:2] if lo < p < hi and math.isfinite(p)}
    )

    def grad_integrand(x):
        return test_fn.derivative(x) * profile.phi_prime(x) * x**m.alpha

    term1, _ = quad(
        grad_integrand, lo, hi, points=pts or None, epsabs=quad_tol, epsrel=quad_tol, limit=300
    )

    vlo, vhi = max(lo, j.a), min(hi, j.b)
    term2 = 0.0
    if vlo < vhi:
        vpts = [p for p in pts if vlo < p < vhi]

        def v_integrand(x):
            return test_fn(x) * profile.potential(x) * x**m.alpha

        term2, _ = quad(
            v_integrand, vlo, vhi, points=vpts or None, epsabs=quad_tol, epsrel=quad_tol, limit=300
        )

    boundary = test_fn(0.0) * profile.c_j / 2.0 if include_boundary_term else 0.0
    return abs(term1 + term2 - boundary)


# ---------------------------------------------------------------------------
# evolution-based checks


@dataclass
class SuperharmonicReport:
    us: np.ndarray
    thetas: np.ndarray
    phi_at_z: float
    z: float
    truncation_bars: np.ndarray
    monotone_ok: bool
    bounded_ok: bool
    worst_step: float  # largest relative increase between consecutive u


def check_superharmonic(
    m: WeightedMeasure,
    potential: Potential,
    profile: SuperharmonicProfile,
    z: float,
    u_grid,
    grid: Grid,
    scheme: SplittingScheme = DEFAULT_SCHEME,
    rel_slack: float = 1e-6,
) -> SuperharmonicReport:
    """Evolve the profile and test theta(u) = K_u phi(z): non-increasing, <= phi(z).

    The profile grows like x^{1-alpha}, so the grid truncates it; the report
    carries a Gaussian-tail bound on the truncated contribution per time and
    the monotonicity check allows for it.
    """
    iz = grid.index_of(z)
    z = float(grid.nodes[iz])
    phi_gf = profile.phi_gridfunction(grid)
    phi_z = float(profile.phi(z))
    us = np.sort(np.asarray(u_grid, dtype=np.float64))
    thetas = np.empty(us.size)
    bars = np.empty(us.size)
    current = phi_gf
    prev = 0.0
    for i, u in enumerate(us):
        current = schrodinger_apply(m, potential, u - prev, current, scheme)
        prev = u
        thetas[i] = float(current.values[iz])
        bars[i] = _tail_bound(m, profile, z, u, grid.x_max)
    worst = 0.0
    monotone = True
    for k in range(us.size - 1):
        allowed = thetas[k] * (1.0 + rel_slack) + bars[k + 1]
        if thetas[k + 1] > allowed:
            monotone = False
        if thetas[k] > 0:
            worst = max(worst, (thetas[k + 1] - thetas[k]) / thetas[k])
    bounded = bool(np.all(thetas <= phi_z * (1.0 + rel_slack)))
    return SuperharmonicReport(us, thetas, phi_z, z, bars, monotone, bounded, worst)


def _tail_bound(
    m: WeightedMeasure, profile: SuperharmonicProfile, z: float, u: float, x_max: float
) -> float:
    """Crude Gaussian upper bound on int_{x > x_max} P_u(z, x) phi(x) dmu."""
    c_up, c_const = 4.8, 4.0
    p = 1.0 + m.alpha
    ball = ((z + math.sqrt(u)) ** p - max(0.0, z - math.sqrt(u)) ** p) / p

    def integrand(x):
        return math.exp(-((x - z) ** 2) / (c_up * u)) * profile.phi(x) * x**m.alpha

    hi = x_max + 30.0 * math.sqrt(u) + 10.0
    val, _ = quad(integrand, x_max, hi, epsabs=1e-14, epsrel=1e-9, limit=100)
    return c_const / ball * val


def theta_mass(
    m: WeightedMeasure,
    potential: Potential,
    z: float,
    t: float,
    grid: Grid,
    scheme: SplittingScheme = DEFAULT_SCHEME,
    n_steps: int | None = None,
) -> float:
    """Total mu-mass of the Schroedinger kernel column from z at time t."""
    col = GridFunction.point_mass(grid, z)
    col = schrodinger_apply(m, potential, t, col, scheme, n_steps=n_steps)
    return col.integral()


@dataclass
class DecayFitEntry:
    label: str
    xs: np.ndarray
    values: np.ndarray
    fitted_exponent: float
    threshold: float
    passed: bool
    extras: dict = field(default_factory=dict)


@dataclass
class DecayFitReport:
    kind: str
    entries: list[DecayFitEntry]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)


def _pick_intervals(section: ProperSection, count: int = 3) -> list[DyadicInterval]:
    ivs = list(section.intervals)
    if len(ivs) <= count:
        return ivs
    idx = np.linspace(0, len(ivs) - 1, count).round().astype(int)
    return [ivs[i] for i in sorted(set(idx.tolist()))]


def check_condition_D(
    m: WeightedMeasure,
    potential: Potential,
    section: ProperSection,
    grid: Grid,
    intervals: list[DyadicInterval] | None = None,
    n_max: int = 8,
    steps_per_leg: int = 8,
) -> DecayFitReport:
    """Large-time mass decay: M(n) = int K_{2^n |I|^2}(., y) dmu for y in I**.

    Fits log2 M(n) against n over the last half of the range; the target rate
    is slope <= -(1-alpha)/2 + 0.1.  Also reports the implied constants of
    the weak polynomial form M(n) <= C n^{-1-eps}.
    """
    chosen = intervals if intervals is not None else _pick_intervals(section)
    entries = []
    for d in chosen:
        base = d.to_interval()
        y = float(grid.nodes[grid.index_of(base.center)])
        t0 = d.length**2
        col = GridFunction.point_mass(grid, y)
        masses = np.empty(n_max + 1)
        prev = 0.0
        for n in range(n_max + 1):
            t_target = math.ldexp(t0, n)
            col = schrodinger_apply(m, potential, t_target - prev, col, n_steps=steps_per_leg)
            prev = t_target
            masses[n] = col.integral()
        ns = np.arange(n_max + 1)
        tail = ns >= n_max // 2
        slope = _lsq_slope(ns[tail].astype(float), np.log2(np.maximum(masses[tail], 1e-300)))
        threshold = -(1.0 - m.alpha) / 2.0 + 0.1
        pos = ns >= 1
        loglog = _lsq_slope(
            np.log2(ns[pos].astype(float)), np.log2(np.maximum(masses[pos], 1e-300))
        )
        eps = max(0.0, -loglog - 1.0)
        c_weak = float(np.max(masses[pos] * ns[pos] ** (1.0 + eps)))
        entries.append(
            DecayFitEntry(
                label=str(d),
                xs=ns.astype(float),
                values=masses,
                fitted_exponent=slope,
                threshold=threshold,
                passed=bool(slope <= threshold),
                extras={"y": y, "epsilon_weak": eps, "C_weak": c_weak, "t0": t0},
            )
        )
    return DecayFitReport("D", entries)


def check_condition_K(
    m: WeightedMeasure,
    potential: Potential,
    section: ProperSection,
    grid: Grid,
    intervals: list[DyadicInterval] | None = None,
    t_count: int = 6,
    s_nodes: int = 24,
    max_probes: int = 48,
) -> DecayFitReport:
    """Small-time accumulated interaction:

        G(t) = sup_x int_0^{2t} int P_s(x,y) 1_{I***}(y) V(y) dmu(y) ds,

    fitted as G ~ C (t/|I|^2)^delta for t <= |I|^2.  Near-origin intervals
    (rho(0,I) <= 2|I|) must reach delta >= (1-alpha)/2 - 0.1, others
    delta >= 1/2 - 0.1.  The s-integral is evaluated in the variable sqrt(s),
    which absorbs the integrable s^{-(1-alpha)/2} blow-up near s = 0.
    """
    chosen = intervals if intervals is not None else _pick_intervals(section)
    beta = section.beta
    gl_u, gl_w = np.polynomial.legendre.leggauss(s_nodes)
    entries = []
    v_nodes = np.asarray(potential(grid.nodes), dtype=np.float64)
    for d in chosen:
        base = d.to_interval()
        star3 = enlarge(base, beta**3)
        mask = (grid.nodes >= star3.a) & (grid.nodes <= star3.b)
        weight_vec = np.where(mask, v_nodes, 0.0) * grid.weights
        near = (grid.nodes >= star3.a - 2.0 * base.length) & (
            grid.nodes <= star3.b + 2.0 * base.length
        )
        probes = grid.nodes[near]
        if probes.size > max_probes:
            probes = probes[np.linspace(0, probes.size - 1, max_probes).round().astype(int)]
        t0 = d.length**2
        ts = t0 * 2.0 ** (-np.arange(t_count, dtype=float))
        gs = np.empty(ts.size)
        for i, t in enumerate(ts):
            u_hi = math.sqrt(2.0 * t)
            us = 0.5 * u_hi * (gl_u + 1.0)
            ws = 0.5 * u_hi * gl_w
            acc = np.zeros(probes.size)
            for u, w_u in zip(us, ws):
                s = u * u
                rows = heat_kernel(m, s, probes[:, None], grid.nodes[None, :])
                acc += (2.0 * u * w_u) * (rows @ weight_vec)
            gs[i] = float(acc.max())
        threshold = (
            (1.0 - m.alpha) / 2.0 - 0.1 if base.a <= 2.0 * base.length else 0.5 - 0.1
        )
        if np.all(gs == 0.0):
            entries.append(
                DecayFitEntry(str(d), ts, gs, math.inf, threshold, True, {"vacuous": True})
            )
            continue
        ratio = np.log(ts / t0)
        small = ratio <= np.median(ratio)  # small-t half of the range
        delta = _lsq_slope(ratio[small], np.log(np.maximum(gs[small], 1e-300)))
        entries.append(
            DecayFitEntry(
                label=str(d),
                xs=ts,
                values=gs,
                fitted_exponent=delta,
                threshold=threshold,
                passed=bool(delta >= threshold),
                extras={"near_origin": base.a <= 2.0 * base.length},
            )
        )
    return DecayFitReport("K", entries)


def _lsq_slope(xs: np.ndarray, ys: np.ndarray) -> float:
    a = np.vstack([xs, np.ones_like(xs)]).T
    sol, *_ = np.linalg.lstsq(a, ys, rcond=None)
    return float(sol[0])

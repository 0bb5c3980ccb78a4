"""Asymptotics and Borel-Laplace resummation at roots of unity.

At a resonance ``Lambda0 = e^{2 pi i n0/m0}`` the regularized solution
``eta f(Lambda0 e^eta, z)`` has a Gevrey-1 expansion whose Borel transform is
an explicit meromorphic function: with ``phi(s) = e^s/(1 - e^s)`` and
``Omega = 2 pi i n0/m0``,

``PsiHat(xi, z) = Psi1 - sum_{a != 0} sum_{k < m0}
(e^{2 pi i k a/m0}/(2 pi i a)) [g(L0^k z e^{m0 xi/(2 pi i a)}) - g(L0^k z)]``,

with simple poles on the moving lattice ``xi_{a,b}(z)`` and residues of
modulus ``1/m0``.  Laplace integration along rays avoiding the lattice
reproduces the solution on either side of the unit circle from the same data.

Note on signs: the source text defines ``C_{a,b} = -(1/m0) e^{2 pi i a b n0'/m0}``
and calls these the residues, but its own closed form (and the recovered
cross-resonance limits) force ``res = +(1/m0) e^{2 pi i a b n0'/m0}``;
that verified sign is used here throughout.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from math import gcd
from typing import Sequence

import mpmath as mp

from .borel import BorelGerm, composition_convolution, unit_convolve, _taylor_conv
from .errors import (DiskExceeded, NoConvergence, PoleCluster, PoleProximity)
from .numbers import PrimitiveRoot, primitive_roots
from .series import (BWDCoefficients, EvalResult, TruncatedPowerSeries, _Kahan,
                     bwd_from_solution)

_TWO_PI = 2 * math.pi
_J_TAIL = 8  # Taylor order of the accelerated a-tail


# ---------------------------------------------------------------------------
# resonance bookkeeping
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Resonance:
    """Root of unity ``e^{2 pi i n0/m0}`` with the Bezout pair
    ``m0 m0' + n0 n0' = 1`` (``n0'`` the inverse of ``n0`` mod ``m0``)."""

    n0: int
    m0: int
    n0p: int
    m0p: int

    @classmethod
    def of(cls, n0: int, m0: int) -> "Resonance":
        if m0 < 1 or not 0 <= n0 < m0 or gcd(n0, m0) != 1 and m0 > 1:
            raise ValueError("need 0 <= n0 < m0 with (n0|m0) = 1")
        if m0 == 1:
            return cls(0, 1, 0, 1)
        # extended gcd for n0 x + m0 y = 1
        x0, x1 = 0, 1
        r0, r1 = m0, n0
        while r1:
            q, r = divmod(r0, r1)
            r0, r1 = r1, r
            x0, x1 = x1, x0 - q * x1
        n0p = x0 % m0
        m0p = (1 - n0 * n0p) // m0
        return cls(n0, m0, n0p, m0p)

    @property
    def lambda0(self) -> complex:
        return cmath.exp(2j * math.pi * self.n0 / self.m0)

    @property
    def omega(self) -> complex:
        return 2j * math.pi * self.n0 / self.m0

    @property
    def root(self) -> PrimitiveRoot:
        return PrimitiveRoot(self.n0, self.m0)


@dataclass(frozen=True)
class MovingPole:
    """Moving singular point ``xi_{a,b}(z) = (2 pi a/m0)(-i log z + 2 pi b/m0)``
    of the resonance Borel transform, with its residue (modulus ``1/m0``)."""

    res: Resonance
    a: int
    b: int

    def __post_init__(self):
        if self.a == 0:
            raise ValueError("a must be nonzero")

    def location(self, z: complex) -> complex:
        return (_TWO_PI * self.a / self.res.m0) * (
            -1j * cmath.log(z) + _TWO_PI * self.b / self.res.m0)

    @property
    def residue(self) -> complex:
        m0 = self.res.m0
        return cmath.exp(2j * math.pi * self.a * self.b * self.res.n0p / m0) / m0


def pole_lattice(res: Resonance, z: complex, a_range: int, b_range: int,
                 ) -> list[MovingPole]:
    out = []
    for a in range(-a_range, a_range + 1):
        if a == 0:
            continue
        for b in range(-b_range, b_range + 1):
            out.append(MovingPole(res, a, b))
    return out


# ---------------------------------------------------------------------------
# right-hand sides: exact delta or truncated series
# ---------------------------------------------------------------------------


def _phi_basis_tables(j_max: int) -> list[dict[int, float]]:
    """Coefficient tables of ``(d/ds)^j phi`` in the basis ``(1-w)^{-e}``,
    where ``phi = -1 + (1-w)^{-1}`` and ``w = e^s``."""
    tables = [{0: -1.0, 1: 1.0}]
    for _ in range(j_max):
        cur = tables[-1]
        nxt: dict[int, float] = {}
        for e, c in cur.items():
            if e:
                nxt[e + 1] = nxt.get(e + 1, 0.0) + c * e
                nxt[e] = nxt.get(e, 0.0) - c * e
        tables.append(nxt)
    return tables


_PHI_TABLES = _phi_basis_tables(20)


class DeltaSource:
    """Exact source ``g = delta``: ``g(w) = w/(1 - w)`` and its shift calculus."""

    radius = 1.0

    def value_shift(self, w: complex, u: complex) -> tuple[complex, float]:
        wu = w * cmath.exp(u)
        d = 1 - wu
        if abs(d) < 1e-13:
            raise PoleProximity(f"shifted argument {wu} hits the pole of delta")
        return wu / d, 0.0

    def derivs(self, w: complex, j_max: int) -> list[complex]:
        inv = 1 / (1 - w)
        out = []
        for j in range(j_max + 1):
            out.append(sum(c * inv ** e for e, c in _PHI_TABLES[j].items()))
        return out

    def deriv_sup(self, w: complex, j: int, u_cap: float) -> float:
        margin = abs(1 - w) - abs(w) * (math.exp(u_cap) - 1)
        if margin <= 0:
            raise PoleProximity("shift cap reaches the pole of delta")
        inv = 1 / margin
        return sum(abs(c) * inv ** e for e, c in _PHI_TABLES[j].items())


class SeriesSource:
    """Source backed by a :class:`TruncatedPowerSeries`."""

    def __init__(self, g: TruncatedPowerSeries):
        self.g = g
        self.radius = g.tail_radius if g.tail_bound else g.disk_radius

    def value_shift(self, w: complex, u: complex) -> tuple[complex, float]:
        wu = w * cmath.exp(u)
        return self.g.eval(wu)

    def derivs(self, w: complex, j_max: int) -> list[complex]:
        out = []
        for j in range(j_max + 1):
            acc = _Kahan()
            wn = 1 + 0j
            for n in range(1, self.g.order + 1):
                wn *= w
                c = self.g.coeff(n)
                if c:
                    acc.add(c * wn * n ** j)
            out.append(acc.value)
        return out

    def deriv_sup(self, w: complex, j: int, u_cap: float) -> float:
        r = abs(w) * math.exp(u_cap)
        if self.g.tail_bound and r > self.g.tail_radius:
            raise DiskExceeded("shift cap leaves the certified disk of g")
        total = sum(abs(self.g.coeff(n)) * r ** n * n ** j
                    for n in range(1, self.g.order + 1))
        if self.g.tail_bound:
            total += sum(self.g.coeff_bound(n) * r ** n * n ** j
                         for n in range(self.g.order + 1, self.g.order + 240))
        return total


def _as_source(g):
    if g is None or g == "delta" or isinstance(g, DeltaSource):
        return g if isinstance(g, DeltaSource) else DeltaSource()
    if isinstance(g, SeriesSource):
        return g
    if isinstance(g, TruncatedPowerSeries):
        return SeriesSource(g)
    raise TypeError("g must be None/'delta' or a TruncatedPowerSeries")


def l_m_hadamard(g, m0: int, z: complex) -> complex:
    """``(L_{m0} (.) g)(z) = sum_j g_{j m0} z^{j m0}/(j m0)``; exact for delta."""
    src = _as_source(g)
    if isinstance(src, DeltaSource):
        return -cmath.log(1 - z ** m0) / m0
    gg = src.g
    acc = _Kahan()
    j = 1
    while j * m0 <= gg.order:
        acc.add(gg.coeff(j * m0) * z ** (j * m0) / (j * m0))
        j += 1
    return acc.value


# ---------------------------------------------------------------------------
# the Borel transform PsiHat
# ---------------------------------------------------------------------------


_polylog_cache: dict[tuple[int, int, int], complex] = {}


def _halfline_character_sum(m0: int, k: int, j: int) -> complex:
    """``sum_{a >= 1} [e^{2 pi i k a/m0} + (-1)^{j+1} e^{-2 pi i k a/m0}] / a^{j+1}``
    via polylogarithms at roots of unity (j >= 1)."""
    key = (m0, k % m0, j)
    if key not in _polylog_cache:
        x = mp.expjpi(mp.mpf(2 * k) / m0)
        v = mp.polylog(j + 1, x) + (-1) ** (j + 1) * mp.polylog(j + 1, mp.conj(x))
        _polylog_cache[key] = complex(v)
    return _polylog_cache[key]


def psi_one(res: Resonance, g, z: complex) -> complex:
    """Value at ``xi = 0``: ``sum_k (k/m0 - 1/2) g(Lambda0^k z)``."""
    src = _as_source(g)
    m0 = res.m0
    acc = _Kahan()
    for k in range(m0):
        wk = z * cmath.exp(2j * math.pi * k * res.n0 / m0)
        acc.add((k / m0 - 0.5) * src.value_shift(wk, 0.0)[0])
    return acc.value


def psi_hat(res: Resonance, g, xi: complex, z: complex,
            a_max: int | None = None, tol: float = 1e-10) -> EvalResult:
    """Evaluate the resonance Borel transform at ``xi``.

    The sum over ``|a| <= A`` is taken directly (paired ``+-a``); the tail is
    folded analytically through the Taylor expansion of the shifts in
    ``u_a = m0 xi/(2 pi i a)``, with polylogarithm character sums and an
    explicit remainder from derivative sup bounds.
    """
    src = _as_source(g)
    m0 = res.m0
    z = complex(z)
    if z == 0:
        raise ValueError("z must be nonzero")
    xi = complex(xi)
    wk = [z * cmath.exp(2j * math.pi * k * res.n0 / m0) for k in range(m0)]

    # pole proximity against the nearest lattice points
    s = cmath.log(z)
    for a in range(1, 40):
        for sgn in (a, -a):
            base = _TWO_PI * sgn / m0
            # xi_{a,b} = base*(-i s) + base*2 pi b/m0  -> solve for b
            bb = (xi / base + 1j * s) * m0 / _TWO_PI
            for b in (math.floor(bb.real), math.floor(bb.real) + 1):
                loc = base * (-1j * s + _TWO_PI * b / m0)
                if abs(xi - loc) < max(10 * tol, 1e-12):
                    raise PoleProximity(
                        f"xi within {abs(xi - loc):.2e} of the pole (a={sgn}, b={b})")

    # shift cap and the direct/tail split
    dist_pole = min(abs(1 - w) for w in wk) if isinstance(src, DeltaSource) else None
    if isinstance(src, DeltaSource):
        u_cap = min(0.45, 0.5 * dist_pole / max(abs(z), 1e-12))
    else:
        u_cap = min(0.45, 0.5 * math.log(max(src.radius / abs(z), 1.0 + 1e-9)))
    A_needed = int(m0 * abs(xi) / (_TWO_PI * u_cap)) + 1
    A = max(a_max or 0, A_needed, 24)

    acc = _Kahan()
    acc.add(psi_one(res, g, z))
    eval_err = 0.0
    for a in range(1, A + 1):
        for sgn in (a, -a):
            u = m0 * xi / (2j * math.pi * sgn)
            for k in range(m0):
                phase = cmath.exp(2j * math.pi * k * sgn / m0)
                v1, e1 = src.value_shift(wk[k], u)
                v0, e0 = src.value_shift(wk[k], 0.0)
                acc.add(-phase / (2j * math.pi * sgn) * (v1 - v0))
                eval_err += (e1 + e0) / (_TWO_PI * a)

    # analytic tail over |a| > A, Taylor in u up to order J
    u_A = m0 * abs(xi) / (_TWO_PI * (A + 1))
    tail_err = 0.0
    for k in range(m0):
        ders = src.derivs(wk[k], _J_TAIL + 1)
        for j in range(1, _J_TAIL + 1):
            if ders[j] == 0:
                continue
            Skj = _halfline_character_sum(m0, k, j)
            # subtract the partial sum a <= A
            part = 0.0j
            for a in range(1, A + 1):
                ph = cmath.exp(2j * math.pi * k * a / m0)
                part += (ph + (-1) ** (j + 1) * ph.conjugate()) / a ** (j + 1)
            Skj_tail = Skj - part
            coef = (m0 * xi) ** j / (math.factorial(j) * (2j * math.pi) ** (j + 1))
            acc.add(-coef * ders[j] * Skj_tail)
        # remainder beyond J: |R| <= 2 sum_{a>A} (1/2 pi a) M_{J+1} u_a^{J+1}/(J+1)!
        MJ = src.deriv_sup(wk[k], _J_TAIL + 1, u_A)
        rem = (MJ / math.factorial(_J_TAIL + 1)) * \
            (m0 * abs(xi) / _TWO_PI) ** (_J_TAIL + 1)
        # sum over a > A of a^{-(J+2)} < integral
        rem *= 2 / ((_J_TAIL + 1) * A ** (_J_TAIL + 1)) / math.pi
        tail_err += rem
    return EvalResult(acc.value, tail_err + eval_err, f"psi-hat(A={A})")


# ---------------------------------------------------------------------------
# residues, resummation, cross-resonance recovery
# ---------------------------------------------------------------------------


def _nearest_other_pole(res: Resonance, z: complex, xi0: complex) -> float:
    s = cmath.log(z)
    best = math.inf
    for a in range(-24, 25):
        if a == 0:
            continue
        base = _TWO_PI * a / res.m0
        bb = (xi0 / base + 1j * s) * res.m0 / _TWO_PI
        for b in range(math.floor(bb.real) - 1, math.floor(bb.real) + 3):
            loc = base * (-1j * s + _TWO_PI * b / res.m0)
            d = abs(xi0 - loc)
            if d > 1e-12 and d < best:
                best = d
    return best


def pole_residue_check(res: Resonance, z: complex, a: int, b: int,
                       radii: Sequence[float] | None = None,
                       nodes: int = 24, tol: float = 1e-8) -> EvalResult:
    """Estimate ``lim (xi - xi_{a,b}) PsiHat(xi)`` by circle means on a
    shrinking radius schedule with Richardson extrapolation.

    Compare with :attr:`MovingPole.residue`.
    """
    pole = MovingPole(res, a, b)
    xi0 = pole.location(z)
    gap = _nearest_other_pole(res, z, xi0)
    if radii is None:
        r0 = min(gap / 8, 0.3)
        radii = [r0, r0 / 2, r0 / 4]
    if gap < 3 * max(radii):
        raise PoleCluster(
            f"nearest pole at distance {gap:.3g} < 3 x largest radius")
    ests = []
    for rho in radii:
        acc = _Kahan()
        for i in range(nodes):
            xi = xi0 + rho * cmath.exp(2j * math.pi * i / nodes)
            acc.add((xi - xi0) * psi_hat(res, "delta", xi, z, tol=tol).value)
        ests.append(acc.value / nodes)
    # Richardson in rho (error is O(rho) from the regular part... O(rho^2) on circles)
    rs = list(radii)
    tbl = [ests]
    for lev in range(1, len(rs)):
        row = []
        for i in range(len(rs) - lev):
            r0_, r1_ = rs[i] ** 2, rs[i + lev] ** 2
            row.append((r0_ * tbl[lev - 1][i + 1] - r1_ * tbl[lev - 1][i]) / (r0_ - r1_))
        tbl.append(row)
    est = tbl[-1][0]
    err = abs(tbl[-1][0] - tbl[-2][0]) if len(tbl) > 1 else abs(ests[-1] - ests[0])
    return EvalResult(est, err, "residue-circle-mean")


@dataclass(frozen=True)
class ResumReport:
    value: complex
    error: float
    tilt_deg: int
    ray_length: float
    node_budget: float


def _ray_clearance(res: Resonance, z: complex, theta: float, T: float) -> float:
    """Distance from the lattice to the ray segment ``[0, T e^{i theta}]``."""
    s = cmath.log(z)
    e = cmath.exp(1j * theta)
    best = math.inf
    a_hi = max(4, int(res.m0 * T * 1.2) + 2)
    for a in range(-a_hi, a_hi + 1):
        if a == 0:
            continue
        base = _TWO_PI * a / res.m0
        # b range whose poles could approach the segment
        for b in range(-a_hi - 2, a_hi + 3):
            loc = base * (-1j * s + _TWO_PI * b / res.m0)
            t = (loc * e.conjugate()).real
            t = min(max(t, 0.0), T)
            best = min(best, abs(loc - t * e))
    return best


def resum(res: Resonance, g, eta: complex, z: complex, tol: float = 1e-8,
          ) -> ResumReport:
    """Borel-Laplace resummation
    ``f(Lambda0 e^eta, z) ~ (1/eta) [ (L_{m0} (.) g)(z) + int_ray PsiHat e^{-xi/eta} ]``.

    The ray is ``R+`` for ``Re eta > 0`` and ``R-`` for ``Re eta < 0``; if the
    pole lattice approaches the ray it is tilted by the smallest whole degree
    that clears it (recorded in the report, since crossing poles changes the
    result by their contribution).
    """
    from .borel import QuadSpec, tanh_sinh
    eta = complex(eta)
    if eta.real == 0:
        raise ValueError("need Re eta != 0")
    theta0 = 0.0 if eta.real > 0 else math.pi
    src = _as_source(g)

    psi1 = abs(psi_one(res, g, z))
    # linear growth constant: |PsiHat| <= psi1 + C |xi| on pole-free rays
    lip = max(abs(d) for d in src.derivs(z, 1))
    C_lin = res.m0 ** 2 * lip * (math.pi ** 2 / 6) / (2 * math.pi ** 2) * 4

    tilt = 0
    theta = theta0
    sigma = (cmath.exp(1j * theta) / eta).real
    T = max(1.0, math.log((psi1 + C_lin + 1) / (tol * max(sigma, 1e-9))) / max(sigma, 1e-9))
    for attempt in range(0, 11):
        for sign in ((0,) if attempt == 0 else (1, -1)):
            cand = theta0 + math.radians(attempt * sign if attempt else 0)
            sig = (cmath.exp(1j * cand) / eta).real
            if sig <= 0:
                continue
            Tc = max(1.0, math.log((psi1 + C_lin * 10) / (tol * sig)) / sig + 1 / sig)
            if _ray_clearance(res, z, cand, Tc) > 0.2:
                theta, tilt, sigma, T = cand, (attempt * sign if attempt else 0), sig, Tc
                break
        else:
            continue
        break
    else:
        raise PoleProximity("no ray within +-10 degrees clears the pole lattice")

    e = cmath.exp(1j * theta)
    node_tol = tol / (4 * (T + 1))
    node_budget = 0.0

    def f(t: float) -> complex:
        nonlocal node_budget
        r = psi_hat(res, g, t * e, z, tol=node_tol)
        node_budget = max(node_budget, r.error)
        return r.value * cmath.exp(-t * e / eta)

    val, qerr = tanh_sinh(f, 0.0, T, QuadSpec(tol=tol / 4))
    tail = (psi1 + C_lin * (T + 1 / sigma)) * math.exp(-sigma * T) / sigma
    head = l_m_hadamard(g, res.m0, z)
    total = (head + val * e) / eta
    err = (qerr + tail + node_budget * T) / abs(eta)
    return ResumReport(value=total, error=err, tilt_deg=tilt,
                       ray_length=T, node_budget=node_budget)


def cross_resonance_limit(res: Resonance, target: PrimitiveRoot, z: complex,
                          schedule: Sequence[float] | None = None,
                          j_terms: int = 4000) -> EvalResult:
    """Recover ``lim (h - n/m) f(e^{2 pi i h}, z)`` at another root from the
    singular part of the resummation at ``res`` - the constructive content of
    the one-resonance-determines-all statement.  The limit equals
    ``(1/(2 pi i)) L_m(z)``.

    The singular part is the lattice geometric series
    ``(1/m0) sum_{a = jM} e^{a s/(m0 h - n0)} / (1 - e^{2 pi i a (n0' h + m0')/(m0 h - n0)})``
    with ``M = m0 n - n0 m`` exactly; the approach is vertical from below
    (``Im h < 0``) with Richardson extrapolation on the schedule.
    """
    n, m = target.n, target.m
    if (res.n0, res.m0) == (n, m):
        raise ValueError("target must differ from the base resonance")
    # ensure n/m > n0/m0 by shifting the representative angle by +1 if needed
    n_eff = n if n * res.m0 > res.n0 * m else n + m
    M = res.m0 * n_eff - res.n0 * m
    s = cmath.log(z)
    if schedule is None:
        schedule = [0.02 * 0.5 ** i for i in range(7)]

    def W(t: float) -> complex:
        h = n_eff / m - 1j * t
        den0 = res.m0 * h - res.n0
        acc = _Kahan()
        for j in range(1, j_terms + 1):
            a = j * M
            num = cmath.exp(a * s / den0)
            if abs(num) < 1e-30:
                break
            dend = 1 - cmath.exp(2j * math.pi * a * (res.n0p * h + res.m0p) / den0)
            acc.add(num / dend)
        S = acc.value / res.m0
        return (h - n_eff / m) * S / (h - res.n0 / res.m0)

    ts = list(schedule)
    vals = [W(t) for t in ts]
    tbl = [vals]
    for lev in range(1, len(ts)):
        row = []
        for i in range(len(ts) - lev):
            t0, t1 = ts[i], ts[i + lev]
            row.append((t0 * tbl[lev - 1][i + 1] - t1 * tbl[lev - 1][i]) / (t0 - t1))
        tbl.append(row)
    est = tbl[-1][0]
    resid = [abs(tbl[lev][0] - tbl[lev - 1][0]) for lev in range(1, len(tbl))]
    if len(resid) >= 3 and not resid[-1] <= 10 * min(resid):
        raise NoConvergence("cross-resonance extrapolation does not settle")
    return EvalResult(est, max(resid[-1], 1e-15), f"cross-resonance(M={M})")


# ---------------------------------------------------------------------------
# asymptotic coefficients and the two-route chain check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AsymCoeffs:
    """Expansion data of ``(q - Lambda0) Sigma(a)`` at the resonance.

    ``constant`` is the residue payload value ``a_{Lambda0}(z)`` (the constant
    term of the expansion); ``regular[n] = A_n`` are the Taylor coefficients
    of the regular part, with per-index tail budgets.
    """

    base: Resonance
    z: complex | None
    constant: complex
    regular: tuple
    tail_bounds: tuple

    def series_coefficient(self, n: int) -> complex:
        """Coefficient of ``(q - Lambda0)^n`` in the full expansion."""
        return self.constant if n == 0 else self.regular[n - 1]


def _tail_power_geom(r: float, M: int, p: int) -> float:
    """``sum_{m > M} m^p r^m`` summed numerically to negligibility."""
    total = 0.0
    m = M + 1
    while True:
        t = m ** p * r ** m
        total += t
        if t < 1e-18 * (1 + total) and m > M + 4:
            return total
        m += 1
        if m > M + 200000:
            return total


def asym_coeffs(a: BWDCoefficients, res: Resonance, N: int,
                tol: float = 1e-12, *, z: complex | None = None) -> AsymCoeffs:
    """Regular-part coefficients
    ``A_n = (-1)^n sum_{Lambda != Lambda0} a_Lambda (Lambda0 - Lambda)^{-n-1}``
    with tails from the decay certificate and the exact root gap
    ``|Lambda0 - Lambda| >= 4/(m0 m)``.
    """
    c, r = a.decay
    lam0 = res.lambda0
    gamma1 = 4.0 / res.m0
    const = 0.0 + 0j
    key0 = (res.n0, res.m0)
    sums = [_Kahan() for _ in range(N + 1)]
    for (nn, mm), payload in a.sorted_items():
        val, _err = a.payload_value(payload, z)
        if (nn, mm) == key0:
            const = val
            continue
        lam = cmath.exp(2j * math.pi * nn / mm)
        inv = 1 / (lam0 - lam)
        p = inv
        for n in range(N + 1):
            sums[n].add(val * p)
            p *= inv
    regular = tuple((-1) ** n * sums[n].value for n in range(N + 1))
    tails = tuple(c * gamma1 ** (-(n + 1)) * _tail_power_geom(r, a.m_cutoff, n)
                  for n in range(N + 1))
    return AsymCoeffs(base=res, z=z, constant=const, regular=regular,
                      tail_bounds=tails)


def _log1p_inverse_series(order: int) -> list[mp.mpf]:
    """Coefficients of ``L(t) = 1/log(1+t) - 1/t`` (starting at t^0)."""
    n = order + 3
    a = [mp.mpf(-1) ** k / (k + 1) for k in range(n)]  # log(1+t)/t
    b = [mp.mpf(1)] + [mp.mpf(0)] * (n - 1)
    for k in range(1, n):
        b[k] = -sum(a[j] * b[k - j] for j in range(1, k + 1))
    return [b[k + 1] for k in range(order + 2)]  # L_k = b_{k+1}


def l_of_t(t: complex, order: int = 24) -> complex:
    """``L(t) = 1/log(1+t) - 1/t = 1/2 + O(t)`` (series for small t)."""
    Ls = _log1p_inverse_series(order)
    if abs(t) < 0.4:
        acc = 0j
        for c in reversed(Ls[:order + 1]):
            acc = acc * t + complex(c)
        return acc
    return 1 / cmath.log(1 + t) - 1 / t


def l_omega(omega: complex, t: complex) -> complex:
    """``L_omega(t) = -e^{-omega/2} + (1 + t L(t)) e^{-omega L(t)} = O(t)``."""
    L = l_of_t(t)
    return -cmath.exp(-omega / 2) + (1 + t * L) * cmath.exp(-omega * L)


def _gamma_a_series(a_val: complex, p_max: int) -> list[complex]:
    """Taylor coefficients of ``X / (a e^X - 1)`` through order ``p_max``."""
    if abs(a_val - 1) < 1e-14:
        return [complex(mp.bernoulli(p)) / math.factorial(p) for p in range(p_max + 1)]
    # denominator d(X) = a e^X - 1 = (a - 1) + a X + a X^2/2! + ...
    d = [a_val - 1] + [a_val / math.factorial(k) for k in range(1, p_max + 2)]
    # X / d(X): invert d then shift
    inv = [1 / d[0]] + [0j] * (p_max + 1)
    for k in range(1, p_max + 2):
        inv[k] = -inv[0] * sum(d[j] * inv[k - j] for j in range(1, k + 1))
    return [0j] + inv[:p_max]  # X * inv(X), truncated


def psi_taylor_gamma_route(res: Resonance, z: complex, p_max: int,
                           ) -> list[complex]:
    """Coefficients ``Psi_p`` (p = 0..p_max) of the formal solution of
    ``Psi(eta, s + Omega + eta) - Psi(eta, s) = eta phi(s)`` via the
    root-averaged difference operators ``X/(Lambda^r e^X - 1)``.

    Independent of the pole-sum route; ``Psi_0 = L_{m0}(z)``.
    """
    m0 = res.m0
    lam0 = res.lambda0
    src = DeltaSource()
    wk = [z * cmath.exp(2j * math.pi * k * res.n0 / m0) for k in range(m0)]
    ders = [src.derivs(wk[k], p_max) for k in range(m0)]
    gam = [_gamma_a_series(lam0 ** r, p_max) for r in range(m0)]
    out = [-cmath.log(1 - z ** m0) / m0]
    for p in range(1, p_max + 1):
        acc = _Kahan()
        for r in range(m0):
            gp = gam[r][p]
            if gp == 0:
                continue
            # phi_{m0,r}^{(p-1)}(s) = sum_k (Lambda^{-kr}/m0) phi^{(p-1)}(s + k Omega)
            for k in range(m0):
                acc.add(gp * cmath.exp(-2j * math.pi * k * r * res.n0 / m0) / m0
                        * ders[k][p - 1])
        out.append(acc.value)
    return out


@dataclass(frozen=True)
class ChainReport:
    coeffs_asym: tuple
    coeffs_chain: tuple
    max_diff: float
    l_series_head: tuple


def eta_t_chain_check(res: Resonance, z: complex, N: int,
                      m_cutoff: int = 320) -> ChainReport:
    """Build the Taylor coefficients of the ``t``-plane Borel transform two ways:

    (i) from the asymptotic coefficients ``A_n`` of the regular part
    (``coeff_n = Lambda0^{n+1} a_{n+1} / n!``), and

    (ii) from the ``eta``-plane coefficients ``Psi_p`` (difference-operator
    route) pushed through the variable change ``eta = log(1+t)``:
    translate by 1/2, composition-convolve with the germ of
    ``l(t) = L(t) - 1/2``, then assemble with the germ of ``t L(t)``.

    The two constructions share no code path beyond series arithmetic.
    """
    if N > 16:
        raise ValueError("N <= 16 for the truncated formal computation")
    lam0 = res.lambda0
    # route (i)
    delta_g = TruncatedPowerSeries.delta(max(300, 2 * m_cutoff), 0.8)
    bw = bwd_from_solution(delta_g, 0.75, 0.5, m_cutoff)
    ac = asym_coeffs(bw, res, N + 1, z=z)
    route_i = tuple(lam0 ** (n + 1) * ac.series_coefficient(n + 1) / math.factorial(n)
                    for n in range(N + 1))

    # route (ii)
    psi_p = psi_taylor_gamma_route(res, z, N + 2)
    psihat = BorelGerm(taylor=tuple(psi_p[n + 1] / math.factorial(n)
                                    for n in range(N + 1)))
    Ls = _log1p_inverse_series(N + 2)
    lhat = BorelGerm(taylor=tuple(complex(Ls[k + 1]) / math.factorial(k)
                                  for k in range(N + 1)))
    mhat = tuple(complex(Ls[k]) / math.factorial(k) for k in range(N + 1))
    chihat = composition_convolution(psihat, lhat, N, L_const=0.5)
    lval = -cmath.log(1 - z ** res.m0) / res.m0
    mconv = _taylor_conv(mhat, chihat.taylor, N)
    route_ii = tuple(lam0 * (lval * mhat[n] + chihat.coeff(n) + mconv[n])
                     for n in range(N + 1))
    diff = max(abs(x - y) for x, y in zip(route_i, route_ii))
    return ChainReport(coeffs_asym=route_i, coeffs_chain=route_ii,
                       max_diff=diff, l_series_head=tuple(float(v) for v in Ls[:4]))

"""Power-series kernel: Hadamard products, the fundamental solution
``f(q, z) = sum z^n/(q^n - 1)``, its simple-pole decomposition over roots of
unity, and the half-circle splitting used at constant-type points.

Every evaluator returns a value together with an explicit truncation budget;
long summations run in a fixed index order through compensated accumulation.
On the unit circle a small-divisor lower bound |q^n - 1| >= 4 beta_k (valid
for n < m_{k+1} by the best-approximation law) certifies the tails; without
an exact angle such points raise :class:`NearResonance`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import mpmath as mp

from .errors import (DiskExceeded, Divergent, NearResonance, NoConvergence,
                     PrecisionExhausted)
from .numbers import (ContinuedFraction, PrimitiveRoot, cf_expand, convergents,
                      enumerate_roots, primitive_roots)


class _Kahan:
    """Compensated complex accumulator (Kahan-Neumaier)."""

    __slots__ = ("s", "c")

    def __init__(self):
        self.s = 0j
        self.c = 0j

    def add(self, x: complex):
        t = self.s + x
        if abs(self.s.real) + abs(self.s.imag) >= abs(x.real) + abs(x.imag):
            self.c += (self.s - t) + x
        else:
            self.c += (x - t) + self.s
        self.s = t

    @property
    def value(self) -> complex:
        return self.s + self.c


# ---------------------------------------------------------------------------
# truncated power series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncatedPowerSeries:
    """Complex coefficients ``c_0..c_N`` (indexed by power) with a sup-norm
    bound on the discarded tail.

    ``tail_bound`` majorizes ``|sum_{n>N} c_n z^n|`` on ``|z| <= tail_radius``;
    exact polynomials carry ``tail_bound = 0`` and infinite radii.
    ``disk_radius`` is the certified radius of analyticity/boundedness.
    """

    coeffs: tuple
    disk_radius: float = math.inf
    tail_bound: float = 0.0
    tail_radius: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs))
        if self.tail_bound < 0:
            raise ValueError("tail_bound must be >= 0")
        if self.tail_bound > 0 and not self.tail_radius < self.disk_radius:
            raise ValueError("need tail_radius < disk_radius for a certified tail")

    # -- basic views ----------------------------------------------------

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, n: int) -> complex:
        return self.coeffs[n] if 0 <= n <= self.order else 0.0

    def coeff_bound(self, n: int) -> float:
        """|c_n| for stored n; a Cauchy bound ``tail_bound/tail_radius^n`` beyond."""
        if n <= self.order:
            return abs(self.coeffs[n])
        if self.tail_bound == 0:
            return 0.0
        if not math.isfinite(self.tail_radius):
            return 0.0
        return self.tail_bound / self.tail_radius ** n

    def sup_bound(self, rho: float) -> float:
        """Upper bound for ``sup_{|z|<=rho} |f(z)|`` (requires rho <= tail_radius)."""
        if self.tail_bound > 0 and rho > self.tail_radius:
            raise DiskExceeded(f"sup bound requested at {rho} > {self.tail_radius}")
        return sum(abs(c) * rho ** n for n, c in enumerate(self.coeffs)) + self.tail_bound

    def eval(self, z: complex) -> tuple[complex, float]:
        """Horner evaluation with the tail budget; raises outside the tail disk."""
        if self.tail_bound > 0 and abs(z) > self.tail_radius:
            raise DiskExceeded(
                f"|z|={abs(z):.6g} exceeds certified tail radius {self.tail_radius:.6g}")
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc, self.tail_bound

    def __call__(self, z: complex) -> complex:
        return self.eval(z)[0]

    # -- constructors -----------------------------------------------------

    @classmethod
    def polynomial(cls, coeffs: Sequence[complex]) -> "TruncatedPowerSeries":
        return cls(tuple(coeffs))

    @classmethod
    def delta(cls, order: int, tail_radius: float = 0.75) -> "TruncatedPowerSeries":
        """``z/(1-z) = z + z^2 + ...`` truncated, with geometric tail bound."""
        if not 0 < tail_radius < 1:
            raise ValueError("tail_radius must be in (0,1)")
        bound = tail_radius ** (order + 1) / (1 - tail_radius)
        return cls((0,) + (1,) * order, disk_radius=1.0,
                   tail_bound=bound, tail_radius=tail_radius)


def l_m_series(m: int, order: int, tail_radius: float = 0.75) -> TruncatedPowerSeries:
    """``-(1/m) log(1 - z^m) = sum_j z^{jm}/(jm)`` truncated at ``order``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    coeffs = [0.0] * (order + 1)
    j = 1
    while j * m <= order:
        coeffs[j * m] = 1.0 / (j * m)
        j += 1
    bound = tail_radius ** (order + 1) / ((order + 1) * (1 - tail_radius))
    return TruncatedPowerSeries(tuple(coeffs), disk_radius=1.0,
                                tail_bound=bound, tail_radius=tail_radius)


def hadamard(A: TruncatedPowerSeries, B: TruncatedPowerSeries,
             ) -> TruncatedPowerSeries:
    """Coefficientwise product, truncated at ``min(N_A, N_B)``.

    The product converges on the disk of radius ``r_A r_B``; the tail bound
    composes through Cauchy estimates of both factors.
    """
    order = min(A.order, B.order)
    coeffs = tuple(A.coeff(n) * B.coeff(n) for n in range(order + 1))
    disk = A.disk_radius * B.disk_radius
    if A.tail_bound == 0 and B.tail_bound == 0:
        return TruncatedPowerSeries(coeffs, disk_radius=disk)
    # |c_n(A)| <= MA/rA^n on n > NA etc.; combine on radius rA*rB*margin
    rA = A.tail_radius if math.isfinite(A.tail_radius) else A.disk_radius
    rB = B.tail_radius if math.isfinite(B.tail_radius) else B.disk_radius
    if not (math.isfinite(rA) and math.isfinite(rB)):
        # one factor is an exact polynomial: tail of product vanishes beyond order
        return TruncatedPowerSeries(coeffs, disk_radius=disk)
    MA = A.sup_bound(rA)
    MB = B.sup_bound(rB)
    r_prod = rA * rB
    # |a_n b_n| <= MA MB / r_prod^n  for n > order;  sum on |z| <= rho < r_prod
    rho = 0.9 * r_prod
    q = rho / r_prod
    bound = MA * MB * q ** (order + 1) / (1 - q)
    return TruncatedPowerSeries(coeffs, disk_radius=disk,
                                tail_bound=bound, tail_radius=rho)


def hadamard_contour(A: TruncatedPowerSeries, B: TruncatedPowerSeries,
                     z: complex, rho: float, nodes: int = 512) -> complex:
    """Circle-convolution route ``(1/2 pi i) int A(w) B(z/w) dw/w`` on |w|=rho.

    Independent of the coefficientwise route; used as an oracle.
    """
    acc = _Kahan()
    for k in range(nodes):
        w = rho * cmath.exp(2j * math.pi * k / nodes)
        acc.add(A(w) * B(z / w))
    return acc.value / nodes


# ---------------------------------------------------------------------------
# evaluation points and the fundamental solution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvalPoint:
    """Evaluation point with its region tag (inside/outside/circle)."""

    q: complex
    z: complex
    region: str

    @classmethod
    def from_qz(cls, q: complex, z: complex, circle_tol: float = 1e-12,
                ) -> "EvalPoint":
        aq = abs(q)
        region = "circle" if abs(aq - 1) <= circle_tol else (
            "inside" if aq < 1 else "outside")
        return cls(complex(q), complex(z), region)


@dataclass(frozen=True)
class EvalResult:
    value: complex
    error: float
    route: str

    def __iter__(self):
        yield self.value
        yield self.error


def _geom_tail(x: float, start_power: int) -> float:
    """``sum_{n >= start} x^n`` for 0 <= x < 1."""
    if x >= 1:
        return math.inf
    return x ** start_power / (1 - x)


def _closing_bound(z_abs: float, m0: int, a_max: int) -> float:
    """Bound ``sum over later convergent blocks`` of ``z^{m} (a_max+1) m / (2(1-z))``
    using the doubling law ``m_{k+2} >= 2 m_k`` (so denominators at least double
    every two steps starting from ``m0``)."""
    if z_abs <= 0:
        return 0.0
    if m0 * math.log(1 / z_abs) < 2:
        return math.inf  # h(m) not yet decreasing: caller must go deeper
    total = 0.0
    m = m0
    while True:
        term = (a_max + 1) * m * z_abs ** m / (2 * (1 - z_abs))
        total += 2 * term
        if term == 0.0 or term < 1e-320:
            return total
        m *= 2


def _circle_divisor_tail(cf, z_abs: float, n_start: int, tol_target: float,
                         ) -> tuple[float, bool]:
    """Rigorous bound for ``sum_{n >= n_start} |z|^n / |q^n - 1|`` on the circle.

    Blocks ``n in [m_k, m_{k+1})`` use the exact ``beta_k`` lower bound
    ``|q^n - 1| >= 4 beta_k``; the remainder past the computed window uses
    ``beta_k m_{k+1} < 1`` plus the quotient bound ``a_max``.  The growth
    constant is exact for quadratic angles (periodic quotients); for sampled
    angles it extrapolates the observed window (flag ``False`` returned).
    """
    if cf.finite:
        raise NearResonance("angle is rational: the point sits on a resonance")
    if cf.period is not None:
        L, K = cf.period
        a_max = max(cf.quotients(L + K))
        rigorous = True
    else:
        a_max = max(cf.quotients(16))
        rigorous = False
    depth = 16
    cs = convergents(cf, depth)
    tail = 0.0
    k = 0
    while True:
        while k + 1 >= len(cs):
            depth *= 2
            if depth > 4096:
                raise NearResonance("small-divisor blocks do not close")
            cs = convergents(cf, depth)
            if len(cs) < depth + 1 and cf.finite:
                raise NearResonance("angle is rational")
        if not rigorous:
            a_max = max(a_max, max(cf.quotients(min(len(cs) - 1, depth))))
        lo = max(n_start, cs[k].m)
        hi = cs[k + 1].m
        if hi > lo:
            g = _geom_tail(z_abs, lo)
            if g > 0:
                tail += g / (4 * max(float(cs[k].beta), 5e-324))
        m_next = cs[k + 1].m
        if m_next >= n_start:
            closing = _closing_bound(z_abs, m_next, a_max)
            if closing < tol_target / 4 or closing <= tail * 1e-8:
                return tail + closing, rigorous
        k += 1
        if k > 2000:
            raise NearResonance("small-divisor blocks do not close")


def _certified_circle_terms(angle, z_abs: float, tol: float,
                            ) -> tuple[int, float, object, int]:
    """Pick a truncation ``N`` with a certified bound on
    ``sum_{n > N} |z|^n / |q^n - 1|`` for ``q = e^{2 pi i angle}``.

    Returns ``(N, tail_bound, cf, precision)``.
    """
    cf = cf_expand(angle, 8)
    N = 32
    while True:
        tail, _rig = _circle_divisor_tail(cf, z_abs, N + 1, tol)
        if tail < tol / 2:
            prec = 80 + 4 * max(N, 2).bit_length()
            return N, tail, cf, prec
        N *= 2
        if N > 2 ** 20:
            raise NearResonance("circle tail will not certify at this tolerance")


def eval_f_delta(q: complex | None, z: complex, tol: float = 1e-12,
                 *, angle=None) -> EvalResult:
    """Fundamental solution ``sum_{n>=1} z^n/(q^n - 1)`` with error <= tol.

    Off the circle the coefficient series is summed with a geometric tail
    bound.  On the circle pass ``angle`` (an exact object: quadratic
    irrational, continued fraction, or certifiable sample); ``q`` is then
    derived from it and small divisors are certified block by block.
    """
    z = complex(z)
    if abs(z) >= 1:
        raise ValueError("need |z| < 1 for the fundamental solution")
    if angle is not None:
        return _eval_f_delta_circle(angle, z, tol)
    q = complex(q)
    aq = abs(q)
    if abs(aq - 1) < 1e-9:
        raise NearResonance(
            "q is numerically on the unit circle: pass an exact angle instead")
    if aq < 1:
        floor = 1 - aq
    else:
        floor = aq - 1
    # sum_{n>N} |z|^n/|q^n-1| <= geom(|z|, N+1)/floor
    N = 1
    while _geom_tail(abs(z), N + 1) / floor > tol / 2:
        N *= 2
    acc = _Kahan()
    qn = 1 + 0j
    zn = 1 + 0j
    for n in range(1, N + 1):
        qn *= q
        zn *= z
        acc.add(zn / (qn - 1))
    return EvalResult(acc.value, _geom_tail(abs(z), N + 1) / floor, "coefficient")


def _eval_f_delta_circle(angle, z: complex, tol: float) -> EvalResult:
    N, tail, cf, prec = _certified_circle_terms(angle, abs(z), tol)
    with mp.workprec(prec):
        x = cf.value(prec)
        acc = mp.mpc(0)
        for n in range(1, N + 1):
            theta = 2 * (n * x)  # e^{i pi theta}
            qn = mp.expjpi(theta)
            acc += (mp.mpc(z) ** n) / (qn - 1)
        val = complex(acc)
    return EvalResult(val, tail, "coefficient-circle")


def eval_f_minus(g: TruncatedPowerSeries, q: complex, z: complex,
                 tol: float = 1e-12) -> EvalResult:
    """Iterated form ``-sum_{m>=0} g(q^m z)`` for |q| < 1 (independent route)."""
    q, z = complex(q), complex(z)
    if not abs(q) < 1:
        raise ValueError("need |q| < 1")
    rho = abs(z)
    sup = g.sup_bound(min(rho, g.tail_radius) if g.tail_bound else rho)
    # |g(w)| <= Lip * |w| near 0: use coefficient bound sum |g_n| rho^(n-1) * |w|
    lip = sum(abs(c) * rho ** max(n - 1, 0) for n, c in enumerate(g.coeffs)) + (
        g.tail_bound / max(rho, 1e-300))
    acc = _Kahan()
    budget = 0.0
    m = 0
    w = z
    while True:
        remaining = lip * abs(w) / (1 - abs(q))
        if remaining < tol / 2 and m > 0:
            budget += remaining
            break
        val, err = g.eval(w)
        acc.add(-val)
        budget += err
        m += 1
        w *= q
        if m > 100000:
            raise NoConvergence("iterated sum did not reach tolerance")
    return EvalResult(acc.value, budget, "iterated-inside")


def eval_f_plus(g: TruncatedPowerSeries, q: complex, z: complex,
                tol: float = 1e-12) -> EvalResult:
    """Iterated form ``sum_{m>=1} g(q^{-m} z)`` for |q| > 1 (independent route)."""
    q = complex(q)
    if not abs(q) > 1:
        raise ValueError("need |q| > 1")
    inner = eval_f_minus(g, 1 / q, complex(z) / q, tol)
    return EvalResult(-inner.value, inner.error, "iterated-outside")


def eval_f_g(g: TruncatedPowerSeries, q: complex | None, z: complex,
             tol: float = 1e-12, *, angle=None) -> EvalResult:
    """General solution ``sum g_n z^n/(q^n - 1)`` through the coefficient route.

    ``g`` must certify ``|z|`` inside its tail disk (or be an exact
    polynomial).  On the circle pass ``angle`` as in :func:`eval_f_delta`.
    """
    z = complex(z)
    if g.tail_bound > 0 and abs(z) > g.tail_radius:
        raise DiskExceeded("z outside the certified disk of g")
    if angle is not None:
        return _eval_f_g_circle(g, angle, z, tol)
    q = complex(q)
    aq = abs(q)
    if abs(aq - 1) < 1e-9:
        raise NearResonance(
            "q is numerically on the unit circle: pass an exact angle instead")
    floor = abs(aq - 1)
    acc = _Kahan()
    qn = 1 + 0j
    for n in range(1, g.order + 1):
        qn *= q
        acc.add(g.coeff(n) * z ** n / (qn - 1))
    # coefficient tail via Cauchy bounds
    if g.tail_bound:
        ratio = abs(z) / g.tail_radius
        tail = g.tail_bound * _geom_tail(ratio, g.order + 1) / floor \
            if ratio < 1 else g.tail_bound / floor
    else:
        tail = 0.0
    return EvalResult(acc.value, tail, "coefficient")


def _eval_f_g_circle(g: TruncatedPowerSeries, angle, z: complex, tol: float,
                     ) -> EvalResult:
    gsup = max(abs(c) for c in g.coeffs) + (
        g.coeff_bound(g.order + 1) if g.tail_bound else 0.0)
    N, tail, cf, prec = _certified_circle_terms(angle, abs(z), tol / max(gsup, 1.0))
    with mp.workprec(prec):
        x = cf.value(prec)
        acc = mp.mpc(0)
        for n in range(1, min(N, g.order) + 1):
            qn = mp.expjpi(2 * (n * x))
            acc += g.coeff(n) * (mp.mpc(z) ** n) / (qn - 1)
        val = complex(acc)
    # terms n in (g.order, N] use the Cauchy coefficient bound, folded into tail
    extra = sum(g.coeff_bound(n) * abs(z) ** n for n in range(g.order + 1, N + 1))
    return EvalResult(val, tail * max(gsup, 1.0) + extra, "coefficient-circle")


# ---------------------------------------------------------------------------
# Borel-Wolff-Denjoy coefficients over roots of unity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BWDCoefficients:
    """Map from primitive roots to payloads with a geometric decay certificate.

    ``entries[(n, m)]`` is the payload attached to ``exp(2 pi i n/m)`` - a
    z-series (for solution-derived data) or a complex scalar.  The certificate
    ``decay = (c, r)`` asserts ``||a_Lambda|| <= c r^m / m`` with the norm of a
    series payload taken as its sup on the certified disk.
    """

    entries: Mapping[tuple[int, int], object]
    decay: tuple[float, float]
    m_cutoff: int
    source_g: TruncatedPowerSeries | None = None
    z_radius: float = 0.0

    def sorted_items(self):
        return sorted(self.entries.items(), key=lambda kv: (kv[0][1], kv[0][0]))

    def payload_value(self, payload, z: complex | None) -> tuple[complex, float]:
        if isinstance(payload, TruncatedPowerSeries):
            if z is None:
                raise ValueError("series payloads need a z to evaluate at")
            return payload.eval(z)
        return complex(payload), 0.0


def bwd_from_solution(g: TruncatedPowerSeries, r1: float, r2: float,
                      m_cutoff: int) -> BWDCoefficients:
    """Simple-pole data of the solution with right-hand side ``g``:
    payload ``Lambda * (L_m (.) g)`` at each primitive root of order
    ``m <= m_cutoff``, certified with ``r = r2/r1``.

    The decay constant is ``||g||_{r1} / (1 - r)``, from the Hadamard-operator
    bound ``||L_m||_{B_r} <= r^m/(m (1 - r^m))``.
    """
    if not 0 < r2 < r1:
        raise ValueError("need 0 < r2 < r1")
    if g.tail_bound > 0 and r1 > g.tail_radius:
        raise DiskExceeded("g is not certified out to r1")
    r = r2 / r1
    g_norm = g.sup_bound(min(r1, g.tail_radius if g.tail_bound else r1))
    c = g_norm / (1 - r)
    entries: dict[tuple[int, int], TruncatedPowerSeries] = {}
    for m in range(1, m_cutoff + 1):
        coeffs = [0.0] * (g.order + 1)
        j = 1
        while j * m <= g.order:
            coeffs[j * m] = g.coeff(j * m) / (j * m)
            j += 1
        # tail of the payload beyond g.order, on |z| <= r2
        tail = sum(g.coeff_bound(n) * r2 ** n / n
                   for n in range(g.order + 1, g.order + 200)) if g.tail_bound else 0.0
        base = TruncatedPowerSeries(tuple(coeffs), disk_radius=r1,
                                    tail_bound=tail * 1.01 + 1e-300 if g.tail_bound else 0.0,
                                    tail_radius=r2 if g.tail_bound else math.inf)
        for root in primitive_roots(m):
            lam = root.value
            entries[(root.n, root.m)] = TruncatedPowerSeries(
                tuple(lam * cc for cc in base.coeffs),
                disk_radius=base.disk_radius, tail_bound=base.tail_bound,
                tail_radius=base.tail_radius)
    return BWDCoefficients(entries=entries, decay=(c, r), m_cutoff=m_cutoff,
                           source_g=g, z_radius=r2)


def _root_distance_floor(q: complex) -> float:
    return abs(abs(q) - 1.0)


def eval_bwd(a: BWDCoefficients, q: complex, tol: float | None = 1e-10,
             *, z: complex | None = None) -> EvalResult:
    """Partial sum of ``sum a_Lambda/(q - Lambda)`` over the enumerated roots,
    with the decay-certificate tail ``c r^{M+1} / ((1-r) dist)``.

    ``tol=None`` skips enforcement and just reports the budget.
    """
    q = complex(q)
    d0 = _root_distance_floor(q)
    c, r = a.decay
    if d0 <= 0:
        raise NearResonance("q on the unit circle: no distance floor")
    tail = c * _geom_tail(r, a.m_cutoff + 1) / d0
    if tol is not None and tail > tol:
        raise NearResonance(
            f"tail bound {tail:.3g} exceeds tol={tol:.3g}: increase m_cutoff or move q")
    acc = _Kahan()
    pay_err = 0.0
    for (n, m), payload in a.sorted_items():
        lam = cmath.exp(2j * math.pi * n / m)
        dq = q - lam
        if abs(dq) < 1e-15:
            raise NearResonance(f"q coincides with the root {n}/{m}")
        val, err = a.payload_value(payload, z)
        acc.add(val / dq)
        pay_err += err / abs(dq)
    return EvalResult(acc.value, tail + pay_err, "bwd-partial")


def termwise_derivative(a: BWDCoefficients, j: int, q: complex,
                        tol: float = 1e-10, *, z: complex | None = None,
                        domain_alpha: float | None = None) -> EvalResult:
    """j-th derivative ``(-1)^j j! sum a_Lambda/(q - Lambda)^{j+1}`` termwise.

    With ``domain_alpha`` given, enforces the compact-domain convergence
    condition ``r e^{(j+1) alpha} < 1`` and raises :class:`Divergent` when it
    fails.
    """
    if j < 0:
        raise ValueError("j must be >= 0")
    c, r = a.decay
    if domain_alpha is not None and r * math.exp((j + 1) * domain_alpha) >= 1:
        raise Divergent(
            f"sum m^{j + 1} (r e^{(j + 1)}a)^m diverges for j={j} on this domain")
    q = complex(q)
    d0 = _root_distance_floor(q)
    if d0 <= 0:
        raise NearResonance("q on the unit circle: no distance floor")
    fact = math.factorial(j)
    tail = fact * c * _geom_tail(r, a.m_cutoff + 1) / d0 ** (j + 1)
    if tail > tol:
        raise NearResonance(
            f"derivative tail {tail:.3g} exceeds tol: increase m_cutoff or move q")
    acc = _Kahan()
    pay_err = 0.0
    sign = (-1) ** j
    for (n, m), payload in a.sorted_items():
        lam = cmath.exp(2j * math.pi * n / m)
        dq = q - lam
        val, err = a.payload_value(payload, z)
        acc.add(sign * fact * val / dq ** (j + 1))
        pay_err += fact * err / abs(dq) ** (j + 1)
    return EvalResult(acc.value, tail + pay_err, f"bwd-derivative-{j}")


def nontangential_residue(a: BWDCoefficients, root: PrimitiveRoot,
                          steps: Sequence[float] | None = None,
                          *, z: complex | None = None, tol: float = 1e-9,
                          ) -> EvalResult:
    """Limit of ``(q - Lambda0) Sigma(a)(q)`` along a radial approach schedule,
    by Richardson (Neville) extrapolation in the approach parameter.
    """
    if steps is None:
        steps = [0.25 * 0.5 ** i for i in range(9)]
    lam = root.value
    ts = list(steps)
    vals = []
    for t in ts:
        q = lam * (1 + t)
        res = eval_bwd(a, q, tol=None, z=z)
        vals.append((q - lam) * res.value)
    # Neville extrapolation to t -> 0
    tbl = [list(vals)]
    for lev in range(1, len(ts)):
        row = []
        for i in range(len(ts) - lev):
            t0, t1 = ts[i], ts[i + lev]
            p = (t0 * tbl[lev - 1][i + 1] - t1 * tbl[lev - 1][i]) / (t0 - t1)
            row.append(p)
        tbl.append(row)
    est = tbl[-1][0]
    resid = [abs(tbl[lev][0] - tbl[lev - 1][0]) for lev in range(1, len(tbl))]
    if len(resid) >= 3 and not resid[-1] <= 10 * min(resid):
        raise NoConvergence("extrapolation residuals do not decrease")
    return EvalResult(est, max(resid[-1], 1e-16), "nontangential-extrapolation")


# ---------------------------------------------------------------------------
# half-circle splitting at an irrational angle
# ---------------------------------------------------------------------------


def _alpha_mpf(angle, prec: int = 200):
    if hasattr(angle, "alpha"):
        return angle.alpha(prec)
    if isinstance(angle, ContinuedFraction):
        return angle.value(prec)
    with mp.workprec(prec):
        return mp.mpf(angle)


def _lower_halfcircle(k: int, n: int, alpha) -> bool:
    """Whether ``exp(2 pi i k/n)`` lies in ``{e^{2 pi i x}, x in (alpha - 1/2, alpha)}``."""
    with mp.workprec(200):
        c = mp.frac(mp.mpf(k) / n - alpha)
        return c > mp.mpf(1) / 2


def split_coefficients(angle, n: int, l: int) -> tuple[complex, complex]:
    """Half-circle character sums ``(1/n) sum_{Lambda in R_n cap S^<} Lambda^{-l}``
    and the complementary ``S^>`` sum, for the full set ``R_n`` of n-th roots.

    ``angle`` fixes the splitting point ``lambda = e^{2 pi i alpha}`` and must
    be irrational (quadratic irrationals and continued fractions accepted).
    """
    if not 0 <= l <= n - 1:
        raise ValueError("need 0 <= l <= n-1")
    alpha = _alpha_mpf(angle)
    lo = _Kahan()
    hi = _Kahan()
    for k in range(n):
        lam_pow = cmath.exp(-2j * math.pi * k * l / n)
        if _lower_halfcircle(k, n, alpha):
            lo.add(lam_pow)
        else:
            hi.add(lam_pow)
    return lo.value / n, hi.value / n


@dataclass(frozen=True)
class SplitValues:
    lower: complex
    upper: complex
    error: float
    route: str

    @property
    def total(self) -> complex:
        return self.lower + self.upper


def split_bwd(a: BWDCoefficients, angle, q: complex, z: complex,
              tol: float = 1e-10) -> tuple[SplitValues, SplitValues]:
    """Split ``Sigma(a)`` into the two half-circles at ``angle``, both by the
    direct root-by-root partition and by the Hadamard-coefficient route; the
    pair of routes is returned (direct, hadamard) for cross-validation.

    Requires solution-derived coefficients (``a.source_g`` present).
    """
    if a.source_g is None:
        raise ValueError("split_bwd needs solution-derived coefficients")
    q, z = complex(q), complex(z)
    alpha = _alpha_mpf(angle)
    d0 = _root_distance_floor(q)
    if d0 <= 0:
        raise NearResonance("q on the unit circle")
    c, r = a.decay
    tail = c * _geom_tail(r, a.m_cutoff + 1) / d0

    lo, hi = _Kahan(), _Kahan()
    pay_err = 0.0
    for (nn, mm), payload in a.sorted_items():
        lam = cmath.exp(2j * math.pi * nn / mm)
        val, err = a.payload_value(payload, z)
        term = val / (q - lam)
        pay_err += err / abs(q - lam)
        if _lower_halfcircle(nn, mm, alpha):
            lo.add(term)
        else:
            hi.add(term)
    direct = SplitValues(lo.value, hi.value, tail + pay_err, "direct")

    g = a.source_g
    # A^<>_n(q) = (1/(q^n - 1)) sum_l delta_{n,l} q^l ; summed against g_n z^n
    N = g.order
    lo2, hi2 = _Kahan(), _Kahan()
    for n in range(1, N + 1):
        gn = g.coeff(n)
        if gn == 0:
            continue
        d_lo = _Kahan()
        d_hi = _Kahan()
        ql = 1 + 0j
        rows = [_lower_halfcircle(k, n, alpha) for k in range(n)]
        for l in range(n):
            slo, shi = 0j, 0j
            for k in range(n):
                lam_pow = cmath.exp(-2j * math.pi * k * l / n)
                if rows[k]:
                    slo += lam_pow
                else:
                    shi += lam_pow
            d_lo.add(slo / n * ql)
            d_hi.add(shi / n * ql)
            ql *= q
        qn = q ** n
        lo2.add(gn * z ** n * d_lo.value / (qn - 1))
        hi2.add(gn * z ** n * d_hi.value / (qn - 1))
    # tail of the coefficient route
    zr = abs(z)
    had_tail = 0.0
    if g.tail_bound:
        x = zr * max(1.0, abs(q)) / g.tail_radius
        if x < 1:
            had_tail = g.tail_bound * _geom_tail(x, N + 1) / d0
        else:
            had_tail = math.inf
    hadamard_route = SplitValues(lo2.value, hi2.value, had_tail, "hadamard")
    return direct, hadamard_route

"""Small-divisor domain geometry: approximation functions, excluded diamonds,
compact exhaustions of the complex circle neighborhood.

An *approximation function* ``psi`` is a decreasing gauge on the positive
integers with ``2 sum psi(m) < 1`` and ``psi(m) <= 1/(2m)``.  It defines

* ``C_psi``: angles whose convergent denominators obey
  ``m_{k+1} <= 1/psi(m_k)`` for every ``k`` - "far from all rationals";
* ``Q_psi``: rationals whose own finite expansions satisfy the same
  inequalities - exactly one per connected component of the complement;
* diamonds of slope ``kappa`` over those components, whose removal from a
  horizontal strip leaves compact sets ``K_j``.

Membership in ``C_psi`` involves infinitely many conditions, so every check
here is a semi-decision carrying the depth actually verified.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import mpmath as mp

from .errors import Unresolved
from .numbers import ContinuedFraction, cf_expand, convergents


# ---------------------------------------------------------------------------
# approximation functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ApproximationFunction:
    """Decreasing gauge ``psi`` with ``2 sum psi < 1`` and ``psi(m) <= 1/(2m)``.

    Kinds: ``exponential`` (``gamma e^(-alpha m)``), ``power``
    (``gamma m^(1-tau)``), ``table`` (explicit values, zero beyond the table).
    """

    kind: str
    gamma: float = 0.0
    alpha: float = 0.0
    tau: float = 0.0
    values: tuple = ()

    def __post_init__(self):
        if self.kind == "exponential":
            if not (self.gamma > 0 and self.alpha > 0):
                raise ValueError("exponential needs gamma, alpha > 0")
            lim = min(self.alpha * math.e / 2, (math.exp(self.alpha) - 1) / 2, 1.0)
            if not self.gamma < lim:
                raise ValueError(
                    f"gamma={self.gamma} violates gamma < min(alpha e/2, (e^alpha - 1)/2, 1) = {lim}")
        elif self.kind == "power":
            if not (self.gamma > 0 and self.tau > 2):
                raise ValueError("power needs gamma > 0 and tau > 2")
            if not self.gamma <= 1 / (2 * float(mp.zeta(self.tau - 1))):
                raise ValueError("gamma too large: 2 sum psi >= 1")
            if not self.gamma <= 0.5:
                raise ValueError("gamma must be <= 1/2 so psi(m) <= 1/(2m)")
        elif self.kind == "table":
            vals = tuple(float(v) for v in self.values)
            if not vals or any(v <= 0 for v in vals):
                raise ValueError("table must be nonempty and positive")
            if any(b > a for a, b in zip(vals, vals[1:])):
                raise ValueError("table must be decreasing")
            if 2 * sum(vals) >= 1:
                raise ValueError("2 sum psi >= 1")
            if any(v > 1 / (2 * (m + 1)) for m, v in enumerate(vals)):
                raise ValueError("psi(m) > 1/(2m) somewhere")
            object.__setattr__(self, "values", vals)
        else:
            raise ValueError(f"unknown kind {self.kind!r}")

    @classmethod
    def exponential(cls, gamma: float, alpha: float) -> "ApproximationFunction":
        return cls("exponential", gamma=gamma, alpha=alpha)

    @classmethod
    def power(cls, gamma: float, tau: float) -> "ApproximationFunction":
        return cls("power", gamma=gamma, tau=tau)

    @classmethod
    def table(cls, values: Sequence[float]) -> "ApproximationFunction":
        return cls("table", values=tuple(values))

    def __call__(self, m: int) -> float:
        if m < 1:
            raise ValueError("m must be >= 1")
        if self.kind == "exponential":
            return self.gamma * math.exp(-self.alpha * m)
        if self.kind == "power":
            return self.gamma * m ** (1 - self.tau)
        return self.values[m - 1] if m <= len(self.values) else 0.0

    def inv(self, m: int) -> float:
        """``1/psi(m)``, the denominator growth bound at level ``m``."""
        if self.kind == "exponential":
            try:
                return math.exp(self.alpha * m) / self.gamma
            except OverflowError:
                return math.inf
        v = self(m)
        return math.inf if v == 0 else 1 / v

    def allows(self, m: int, m_next: int) -> bool:
        """Whether ``m_next <= 1/psi(m)`` (log-space, overflow-safe)."""
        if self.kind == "exponential":
            return math.log(m_next) + math.log(self.gamma) <= self.alpha * m
        return m_next <= self.inv(m)

    def total(self) -> float:
        """``sum_{m>=1} psi(m)`` (closed form where available)."""
        if self.kind == "exponential":
            return self.gamma / (math.exp(self.alpha) - 1)
        if self.kind == "power":
            return self.gamma * float(mp.zeta(self.tau - 1))
        return sum(self.values)


# ---------------------------------------------------------------------------
# C_psi and W^A_gamma membership (semi-decisions)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MembershipCertificate:
    """Semi-decision outcome: ``holds`` means "no violation up to depth"."""

    holds: bool
    depth_checked: int
    violating_k: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.holds


def in_c_psi(x, psi: ApproximationFunction, k_max: int) -> MembershipCertificate:
    """Check ``m_{k+1} <= 1/psi(m_k)`` for ``k = 0..k_max``.

    Rational inputs are rejected outright: the set contains no rationals.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if isinstance(x, (Fraction, int)):
        return MembershipCertificate(False, 0, reason="rational point")
    cf = cf_expand(x, k_max + 2)
    if cf.finite:
        return MembershipCertificate(False, 0, reason="rational point")
    cs = convergents(cf, k_max + 1)
    for k in range(k_max + 1):
        if not psi.allows(cs[k].m, cs[k + 1].m):
            return MembershipCertificate(False, k_max, violating_k=k)
    return MembershipCertificate(True, k_max)


def in_w_set(x, gamma: float, s: Sequence[float] | Callable[[int], float],
             k_max: int) -> MembershipCertificate:
    """Check ``m_{k+1} <= gamma^{-1} exp(s_k m_k)`` for ``k = 0..k_max``."""
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    s_at = s if callable(s) else (lambda k: s[k])
    cf = cf_expand(x, k_max + 2)
    if cf.finite:
        return MembershipCertificate(False, 0, reason="rational point")
    cs = convergents(cf, k_max + 1)
    for k in range(k_max + 1):
        bound = mp.exp(mp.mpf(s_at(k)) * cs[k].m) / gamma
        if cs[k + 1].m > bound:
            return MembershipCertificate(False, k_max, violating_k=k)
    return MembershipCertificate(True, k_max)


# ---------------------------------------------------------------------------
# Q_psi and the excluded diamonds
# ---------------------------------------------------------------------------


def in_q_psi(r, psi: ApproximationFunction) -> bool:
    """Exact membership of a rational in ``Q_psi`` (finite check on its prefix).

    Integers (the class of ``0/1``) belong by convention; otherwise the
    canonical expansion ``[0; a_1..a_k]`` must satisfy ``m_{j+1} <= 1/psi(m_j)``
    for ``j = 0..k-1``.
    """
    r = Fraction(r)
    if r.denominator == 1:
        return True
    cf = ContinuedFraction.from_rational(r - math.floor(r))
    cs = convergents(cf, len(cf.known_quotients()))
    return all(psi.allows(cs[j].m, cs[j + 1].m) for j in range(len(cs) - 1))


def _ones_tail_value(a0: int, quots: Sequence[int], precision: int = 120) -> mp.mpf:
    """Value of ``[a0; q_1, .., q_k, 1, 1, 1, ...]`` (all-ones tail appended)."""
    with mp.workprec(precision):
        v = (1 + mp.sqrt(5)) / 2  # [1; 1, 1, ...]
        for a in reversed(list(quots)):
            v = a + 1 / v
        return a0 + 1 / v


def _ones_tail_cf(quots: Sequence[int]) -> ContinuedFraction:
    qs = [int(a) for a in quots]
    return ContinuedFraction.from_quotients(
        0, lambda k: qs[k - 1] if k <= len(qs) else 1, n_hint=len(qs) + 80)


@dataclass(frozen=True)
class DiamondComponent:
    """Excluded diamond over the component ``]x_left, x_right[`` of ``frac``.

    True endpoints are sup/inf of a Cantor-like set and are only bracketed:

    * ``x_left`` lies in ``[outer_lo, center - psi(m)/(2m)]``,
    * ``x_right`` lies in ``[center + psi(m)/(2m), outer_hi]``,

    where ``outer_lo``/``outer_hi`` are *certified* points of ``C_psi`` built
    from the maximal-quotient, all-ones-tail construction (re-verified to
    ``depth``), and both satisfy ``|outer - center| < 2 psi(m)/m``.
    """

    frac: Fraction
    outer_lo: float
    outer_hi: float
    inner_lo: float
    inner_hi: float
    kappa: float
    depth: int

    @property
    def center(self) -> float:
        return self.frac.numerator / self.frac.denominator

    @property
    def x_left(self) -> tuple[float, float]:
        """Bracket for the left endpoint: (certified below, proven above)."""
        return (self.outer_lo, self.inner_lo)

    @property
    def x_right(self) -> tuple[float, float]:
        return (self.inner_hi, self.outer_hi)

    def contains(self, x: complex, *, outer: bool = True) -> bool:
        """Diamond membership; ``outer=True`` uses the enclosing bracket
        (a ``False`` answer then certifies exclusion from the true diamond),
        ``outer=False`` the enclosed one (``True`` certifies inclusion)."""
        lo = self.outer_lo if outer else self.inner_lo
        hi = self.outer_hi if outer else self.inner_hi
        re, im = x.real, x.imag
        if not lo < re < hi:
            return False
        return abs(im) < self.kappa * min(re - lo, hi - re)


def component_bracket(r, psi: ApproximationFunction, *, kappa: float = 0.5,
                      refine: int = 60) -> DiamondComponent:
    """Bracket the connected component of ``r`` in the complement of ``C_psi``.

    Certified enclosing points follow the maximal-quotient construction
    ``x+ = [0; a_1..a_k, a, 1, 1, ...]`` and
    ``x- = [0; a_1..a_{k-1}, a_k - 1, 1, b, 1, 1, ...]`` with ``a``, ``b``
    maximal under ``a m + m_- <= 1/psi(m)`` and ``(b+1) m - m_- <= 1/psi(m)``;
    their quotients are fully known, so membership in ``C_psi`` is re-verified
    out to ``refine`` levels.
    """
    r = Fraction(r)
    if not in_q_psi(r, psi):
        raise ValueError(f"{r} is not in Q_psi")
    base_int = math.floor(r)
    if r.denominator == 1:
        m = 1
        a = int(psi.inv(1))
        if a < 2:
            raise ValueError("psi leaves no room for the inner construction")
        plus_quots = [a]
        minus_quots = None  # symmetric: x- = -x+
        x_plus = float(_ones_tail_value(base_int, plus_quots))
        x_minus = 2 * base_int - x_plus
    else:
        cf = ContinuedFraction.from_rational(r - base_int)
        quots = cf.known_quotients()
        cs = convergents(cf, len(quots))
        m = cs[-1].m
        m_minus = cs[-2].m if len(cs) >= 2 else 1
        inv = psi.inv(m)
        a = int((inv - m_minus) // m)
        b = int((inv + m_minus) // m) - 1
        if a < 1 or b < 1:
            raise ValueError("psi leaves no room for the inner construction")
        plus_quots = quots + [a]
        minus_quots = quots[:-1] + [quots[-1] - 1, 1, b]
        v1 = float(_ones_tail_value(base_int, plus_quots))
        v2 = float(_ones_tail_value(base_int, minus_quots))
        x_minus, x_plus = sorted((v1, v2))

    for qs in (plus_quots, minus_quots):
        if qs is None:
            continue
        cert = in_c_psi(_ones_tail_cf(qs), psi, refine)
        if not cert:
            raise AssertionError(
                f"constructed bracket point failed C_psi at k={cert.violating_k}")

    center = float(r)
    w_in = psi(m) / (2 * m)
    for v in (x_minus, x_plus):
        if not abs(v - center) < 2 * psi(m) / m:
            raise AssertionError("bracket point violates the 2 psi(m)/m bound")
    return DiamondComponent(
        frac=r, outer_lo=x_minus, outer_hi=x_plus,
        inner_lo=center - w_in, inner_hi=center + w_in,
        kappa=kappa, depth=refine)


# ---------------------------------------------------------------------------
# compacts K_j
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CompactSpec:
    """Parameters of the exhausting compacts built from ``psi_j = gamma_j e^(-alpha m)``."""

    gamma_seq: tuple
    alpha: float
    kappa: float
    d: float

    def __post_init__(self):
        gs = tuple(float(g) for g in self.gamma_seq)
        if any(b > a for a, b in zip(gs, gs[1:])):
            raise ValueError("gamma_seq must be decreasing")
        lim = min(self.alpha * math.e / 2, (math.exp(self.alpha) - 1) / 2, 1.0)
        if any(not 0 < g < lim for g in gs):
            raise ValueError("gamma_j out of range")
        if not 0 < self.kappa < 1 or self.d <= 0:
            raise ValueError("need kappa in (0,1), d > 0")
        object.__setattr__(self, "gamma_seq", gs)

    def psi(self, j: int) -> ApproximationFunction:
        return ApproximationFunction.exponential(self.gamma_seq[j], self.alpha)


@dataclass(frozen=True)
class KjResolution:
    member: bool
    resolution: float
    m_tested: int

    def __bool__(self) -> bool:
        return self.member


def in_kj(q: complex, spec: CompactSpec, j: int, m_max: int = 80) -> KjResolution:
    """Membership of ``q = e^{2 pi i x}`` in ``K_j``, decided up to a resolution.

    Tests the strip bound ``|Im x| <= d`` and exclusion from every diamond
    with denominator ``<= m_max``; diamonds with larger denominators are
    narrower than the reported resolution.  Points falling between the
    certain-in and certain-out brackets of an identified component raise
    :class:`Unresolved`.
    """
    psi = spec.psi(j)
    x = cmath.log(complex(q)) / (2j * math.pi)
    x = complex(x.real % 1.0, x.imag)
    if abs(x.imag) > spec.d:
        return KjResolution(False, 0.0, 0)
    resolution = 4 * psi(m_max + 1) / (m_max + 1)
    for m in range(1, m_max + 1):
        base = math.floor(x.real * m)
        for n in (base, base + 1):
            if m > 1 and math.gcd(n % m, m) != 1:
                continue  # reduced form was handled at its own denominator
            center = n / m
            if abs(x.real - center) > 2 * psi(m) / m:
                continue
            if not in_q_psi(Fraction(n, m), psi):
                continue
            w_in = psi(m) / (2 * m)
            if abs(x.imag) < spec.kappa * min(x.real - (center - w_in),
                                              (center + w_in) - x.real):
                return KjResolution(False, resolution, m)
            w_out = 2 * psi(m) / m
            if abs(x.imag) < spec.kappa * min(x.real - (center - w_out),
                                              (center + w_out) - x.real):
                raise Unresolved(
                    f"point lies between the certain-in and certain-out diamonds of {n}/{m}")
    return KjResolution(True, resolution, m_max)


def measure_lower_bound(spec: CompactSpec, j: int) -> float:
    """``2d - 8 kappa sum (psi_j(m)/m)^2`` with the tail summed to negligibility."""
    psi = spec.psi(j)
    total = mp.mpf(0)
    m = 1
    while True:
        term = (mp.mpf(psi(m)) / m) ** 2
        total += term
        if term < mp.mpf(1e-22) * (1 + total):
            break
        m += 1
    return float(2 * spec.d - 8 * spec.kappa * total)


def sample_kj_points(spec: CompactSpec, j: int, count: int, seed: int = 0,
                     *, depth: int = 60) -> list[complex]:
    """Deterministic sample of ``K_j`` points: certified angles on the circle
    plus points on the slope-``kappa`` cone rays above and below them.

    Angles are the certified bracket points of small-denominator components
    together with the golden angle; everything is re-verified through
    :func:`in_c_psi` to ``depth``.
    """
    import random
    rng = random.Random(seed)
    psi = spec.psi(j)
    angles: list[float] = []
    if in_c_psi(_ones_tail_cf([]), psi, depth):
        angles.append(float(_ones_tail_value(0, [])))
    fracs = [Fraction(n, m) for m in range(1, 8) for n in range(m)
             if math.gcd(n, m) == 1 or m == 1]
    for fr in fracs:
        if not in_q_psi(fr, psi):
            continue
        try:
            comp = component_bracket(fr, psi, kappa=spec.kappa, refine=depth)
        except ValueError:
            continue
        angles.extend([comp.outer_hi % 1.0, comp.outer_lo % 1.0])
    if not angles:
        raise ValueError("no certified angles available for this spec")
    out: list[complex] = []
    while len(out) < count:
        y = rng.choice(angles)
        t = rng.uniform(0.0, spec.d)
        branch = rng.randrange(3)
        if branch == 0:
            xx = complex(y, 0.0)
        elif branch == 1:
            xx = complex(y, t * rng.choice([-1, 1]))  # vertical ray
        else:
            xx = complex(y + rng.choice([-1, 1]) * t / spec.kappa,
                         t * rng.choice([-1, 1]))  # slope-kappa ray
        if abs(xx.imag) > spec.d:
            continue
        out.append(cmath.exp(2j * math.pi * xx))
    return out

"""Quadratic-form values, one-sided Lagrange spectral constants, Diophantine classes.

The central objects are a quadratic irrational ``alpha`` in (0, 1) with
defining polynomial ``P(X) = a X^2 + b X + c`` (integer coefficients,
``a >= 1``, discriminant ``Delta = b^2 - 4ac`` positive and not a square) and
the integer form ``F(N, D) = a N^2 + b N D + c D^2 = D^2 P(N/D)``.

Because ``F`` only takes nonzero integer values, the quality
``D^2 |N/D - alpha|`` of a rational approximation is classified exactly by the
integer ``|F(N, D)|``: the one-sided spectral constants are ``nu = r/sqrt(Delta)``
where ``r`` is the smallest ``|F|`` class recurring on that side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt

import mpmath as mp

from .errors import PrecisionExhausted, WindowTooSmall
from .numbers import ContinuedFraction, cf_expand, convergents

_ANGLE_PREC = 200  # bits, for the 9/10 angle condition and side floats


def _is_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n


@dataclass(frozen=True)
class QuadraticIrrational:
    """Root ``alpha in (0,1)`` of ``a X^2 + b X + c`` with conjugate ``alpha_bar``.

    ``eps`` selects the root: ``alpha = (-b + eps sqrt(Delta)) / (2a)``.
    """

    a: int
    b: int
    c: int
    eps: int

    def __post_init__(self):
        if self.a < 1:
            raise ValueError("a must be >= 1")
        if self.eps not in (-1, 1):
            raise ValueError("eps must be +-1")
        if self.disc < 2 or _is_square(self.disc):
            raise ValueError("discriminant must be >= 2 and not a perfect square")
        lo = self.compare_fraction(Fraction(0))
        hi = self.compare_fraction(Fraction(1))
        if not (lo < 0 < hi):
            raise ValueError("alpha must lie in (0, 1)")

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @classmethod
    def from_poly(cls, a: int, b: int, c: int, eps: int | None = None,
                  ) -> "QuadraticIrrational":
        """Pick the root in (0, 1); ``eps`` overrides the automatic choice."""
        if eps is not None:
            return cls(a, b, c, eps)
        for e in (1, -1):
            try:
                return cls(a, b, c, e)
            except ValueError:
                continue
        raise ValueError("neither root lies in (0, 1)")

    @classmethod
    def golden(cls) -> "QuadraticIrrational":
        """(sqrt 5 - 1)/2, the fixed point of the Gauss map."""
        return cls(1, 1, -1, 1)

    @classmethod
    def sqrt3_minus_one(cls) -> "QuadraticIrrational":
        return cls(1, 2, -2, 1)

    # -- exact arithmetic ---------------------------------------------

    def compare_fraction(self, r: Fraction) -> int:
        """Sign of ``r - alpha`` using integer arithmetic only."""
        r = Fraction(r)
        N, D = r.numerator, r.denominator
        t = 2 * self.a * N + self.b * D  # sign of t - eps sqrt(Delta) D
        rhs = self.disc * D * D
        if self.eps > 0:
            if t <= 0:
                return -1
            return 1 if t * t > rhs else -1
        if t >= 0:
            return 1
        return -1 if t * t > rhs else 1

    def side_of(self, N: int, D: int) -> int:
        """+1 if N/D > alpha, -1 otherwise (equality impossible)."""
        return self.compare_fraction(Fraction(N, D))

    def floor_mult(self, D: int) -> int:
        """Exact ``floor(alpha * D)`` for ``D >= 1``."""
        u = isqrt(self.disc * D * D)
        if self.eps > 0:
            return (-self.b * D + u) // (2 * self.a)
        return (-self.b * D - u - 1) // (2 * self.a)

    # -- numeric views --------------------------------------------------

    def alpha(self, precision: int = _ANGLE_PREC) -> mp.mpf:
        with mp.workprec(precision):
            return (-self.b + self.eps * mp.sqrt(self.disc)) / (2 * self.a)

    def alpha_bar(self, precision: int = _ANGLE_PREC) -> mp.mpf:
        with mp.workprec(precision):
            return (-self.b - self.eps * mp.sqrt(self.disc)) / (2 * self.a)

    def conjugate_gap(self, precision: int = _ANGLE_PREC) -> mp.mpf:
        """``|alpha - alpha_bar| = sqrt(Delta)/a``."""
        with mp.workprec(precision):
            return mp.sqrt(self.disc) / self.a

    @property
    def cf(self) -> ContinuedFraction:
        """Exact eventually-periodic expansion (cached)."""
        cf = getattr(self, "_cf_cache", None)
        if cf is None:
            if self.eps > 0:
                cf = ContinuedFraction.from_surd(-self.b, self.disc, 2 * self.a)
            else:
                cf = ContinuedFraction.from_surd(self.b, self.disc, -2 * self.a)
            object.__setattr__(self, "_cf_cache", cf)
        return cf

    def form_value(self, N: int, D: int) -> int:
        return form_value(self, N, D)


def form_value(q: QuadraticIrrational, N: int, D: int) -> int:
    """Exact ``F(N, D) = a N^2 + b N D + c D^2``; never 0 for ``D >= 1``."""
    return q.a * N * N + q.b * N * D + q.c * D * D


@dataclass(frozen=True)
class SpectralData:
    """One-sided Lagrange constants and the pole-driving approximant sequences.

    ``a_seq_plus/minus`` list the recurrent minimal-|F| pairs ``(D, N)`` in
    increasing ``D``; along them ``D^2 |N/D - alpha| -> nu`` on the respective
    side.  ``kappa = sqrt(nu)``; ``kappa_prime`` is a strictly larger exponent
    valid off the minimal class.
    """

    quad: QuadraticIrrational
    r_plus: int
    r_minus: int
    nu_plus: object
    nu_minus: object
    kappa_plus: object
    kappa_minus: object
    kappa_prime_plus: object
    kappa_prime_minus: object
    a_seq_plus: tuple
    a_seq_minus: tuple
    d_max: int

    def side(self, sign: str):
        if sign not in "+-":
            raise ValueError("side must be '+' or '-'")
        return (self.a_seq_plus if sign == "+" else self.a_seq_minus)

    @property
    def weak_side(self) -> str:
        """The side ``eps`` with ``kappa_eps <= kappa_(-eps)``."""
        return "+" if self.r_plus <= self.r_minus else "-"


def spectral_constants(q: QuadraticIrrational, D_max: int = 100_000,
                       *, min_recurrence: int = 4) -> SpectralData:
    """Scan denominators ``D <= D_max`` and classify approximants by ``|F|``.

    Candidates are ``N in {floor(alpha D), floor(alpha D)+1}`` (all elements
    of the minimal classes have this form beyond a finite set), restricted by
    the angle condition ``|N/D - alpha_bar| >= (9/10)|alpha - alpha_bar|``.

    A class ``(side, |F|)`` counts as recurrent when it contains at least
    ``min_recurrence`` distinct ``D > D_max**0.4`` and at least one
    ``D > D_max/10``: members of a genuine class recur geometrically in ``D``
    (period doubling along the expansion), i.e. densely in ``log D``, so a
    fixed-count top-decade window would miss them.
    """
    with mp.workprec(_ANGLE_PREC):
        alpha = q.alpha()
        abar = q.alpha_bar()
        gap = abs(alpha - abar)
        thresh = mp.mpf(9) / 10 * gap
        abar_f, thresh_f = float(abar), float(thresh)

        classes: dict[tuple[str, int], list[tuple[int, int]]] = {}
        for D in range(1, D_max + 1):
            N0 = q.floor_mult(D)
            # by construction N0/D < alpha < (N0+1)/D, so the sides are fixed
            for N, side in ((N0, "-"), (N0 + 1, "+")):
                d = abs(N / D - abar_f)
                if d < thresh_f - 1e-9:
                    continue
                if d < thresh_f + 1e-9 and abs(mp.mpf(N) / D - abar) < thresh:
                    continue
                F = form_value(q, N, D)
                classes.setdefault((side, abs(F)), []).append((D, N))

        lo_cut = round(D_max ** 0.4)
        hi_cut = D_max // 10
        result = {}
        for sign in "+-":
            admitted = []
            for (s, r), pairs in classes.items():
                if s != sign:
                    continue
                ds = sorted({d for d, _ in pairs})
                n_lo = sum(1 for d in ds if d > lo_cut)
                n_hi = sum(1 for d in ds if d > hi_cut)
                if n_lo >= min_recurrence and n_hi >= 1:
                    admitted.append(r)
            if not admitted:
                raise WindowTooSmall(
                    f"no recurrent |F| class found on side {sign} with D_max={D_max}")
            r = min(admitted)
            seq = tuple(sorted(classes[(sign, r)]))
            if len(seq) < 5:
                raise WindowTooSmall(
                    f"only {len(seq)} elements of the minimal class on side {sign}")
            result[sign] = (r, seq)

        sqd = mp.sqrt(q.disc)
        out = {}
        for sign in "+-":
            r, seq = result[sign]
            nu = r / sqd
            # a larger exponent valid off the minimal class: bump |F| by one
            # and widen the conjugate distance by delta0 = gap/10 (a choice,
            # any delta0 with nu' > nu works).
            nu_prime = (r + 1) / (q.a * (gap + gap / 10))
            out[sign] = (r, nu, mp.sqrt(nu), mp.sqrt(nu_prime), seq)

    return SpectralData(
        quad=q,
        r_plus=out["+"][0], r_minus=out["-"][0],
        nu_plus=out["+"][1], nu_minus=out["-"][1],
        kappa_plus=out["+"][2], kappa_minus=out["-"][2],
        kappa_prime_plus=out["+"][3], kappa_prime_minus=out["-"][3],
        a_seq_plus=out["+"][4], a_seq_minus=out["-"][4],
        d_max=D_max,
    )


@dataclass(frozen=True)
class DCCertificate:
    """Outcome of a Diophantine-condition check on convergent denominators."""

    holds: bool
    gamma: float
    tau: float
    checked_to: int
    violating_k: int | None = None

    def __bool__(self) -> bool:
        return self.holds


def dc_membership(x, gamma: float, tau: float, k_max: int) -> DCCertificate:
    """Check ``m_{k+1} < gamma^{-1} m_k^{tau-1}`` for ``k <= k_max``.

    This is the convergent form of the Diophantine inequality
    ``|x - n/m| >= gamma m^{-tau}``; a ``True`` answer certifies no violation
    up to the stated depth only.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if tau < 2:
        raise ValueError("tau must be >= 2")
    cf = cf_expand(x, k_max + 1)
    cs = convergents(cf, k_max + 1)
    inv_gamma = mp.mpf(1) / mp.mpf(gamma)
    for k in range(min(k_max, len(cs) - 2) + 1):
        m_k, m_k1 = cs[k].m, cs[k + 1].m
        if not mp.mpf(m_k1) < inv_gamma * mp.mpf(m_k) ** (tau - 1):
            return DCCertificate(False, gamma, tau, k_max, violating_k=k)
    return DCCertificate(True, gamma, tau, min(k_max, len(cs) - 2))

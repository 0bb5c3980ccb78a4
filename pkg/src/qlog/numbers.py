"""Exact continued-fraction arithmetic, arithmetic functions, roots of unity.

Conventions
-----------
A continued fraction is written ``x = a_0 + 1/(a_1 + 1/(a_2 + ...))`` with
``a_k >= 1`` for ``k >= 1``.  Finite (rational) expansions are kept canonical:
the last quotient is ``>= 2`` (except for integers, whose expansion is just
``[a_0]``), so every rational has exactly one representation.

Convergents ``n_k/m_k`` follow the recurrence ``n_k = a_k n_{k-1} + n_{k-2}``,
``m_k = a_k m_{k-1} + m_{k-2}`` seeded with ``(n_{-2}, n_{-1}) = (0, 1)`` and
``(m_{-2}, m_{-1}) = (1, 0)``; ``beta_k = |m_k x - n_k|``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt
from typing import Callable, Iterator, Sequence

import mpmath as mp

from .errors import PrecisionExhausted

#: Exact rational type used throughout (always reduced, denominator >= 1).
Rational = Fraction


def _to_fraction(x) -> Fraction:
    """Exact Fraction from a float or mpmath mpf (no rounding)."""
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    xm = mp.mpf(x)
    sign, man, exp, _ = xm._mpf_
    if man == 0:
        return Fraction(0)
    # int() guards against gmpy2.mpz mantissas leaking into Fraction arithmetic
    v = Fraction(int(man)) * Fraction(2) ** int(exp)
    return -v if sign else v


# ---------------------------------------------------------------------------
# continued fractions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Convergent:
    """One convergent ``n/m`` of a continued fraction with ``beta = |m x - n|``."""

    k: int
    n: int
    m: int
    beta: object  # mpmath.mpf

    @property
    def frac(self) -> Fraction:
        return Fraction(self.n, self.m)


def _floor_surd(P: int, D: int, Q: int, sq: int) -> int:
    """Exact floor((P + sqrt(D))/Q) for irrational sqrt(D); any sign of Q."""
    if Q > 0:
        return (P + sq) // Q
    # floor(-y) = -floor(y) - 1 for irrational y
    return -((P + sq) // (-Q)) - 1


class ContinuedFraction:
    """Partial quotients of a real number, from an exact or sampled source.

    Quotient lists are extended lazily and cached; the instance is immutable
    from the caller's point of view.  ``source`` is one of ``"rational"``,
    ``"quadratic"``, ``"float-sample"`` or ``"synthetic"``.
    """

    def __init__(self, a0: int, source: str, *, quotients: Sequence[int] = (),
                 extender: Callable[[int], Sequence[int]] | None = None,
                 period: tuple[int, int] | None = None,
                 value_fn: Callable[[int], mp.mpf] | None = None,
                 finite: bool | None = None):
        self.a0 = int(a0)
        self.source = source
        self._quots: list[int] = [int(a) for a in quotients]
        self._extender = extender
        #: (preperiod L, period K) counted in the a_1, a_2, ... indexing;
        #: present only for quadratic sources.
        self.period = period
        self._value_fn = value_fn
        self.finite = (extender is None) if finite is None else finite
        for a in self._quots:
            if a < 1:
                raise ValueError("partial quotients must be >= 1")
        if self.finite and self._quots and self._quots[-1] < 2:
            raise ValueError("canonical finite expansion must end with a quotient >= 2")

    # -- construction -------------------------------------------------

    @classmethod
    def from_rational(cls, r: Fraction | int) -> "ContinuedFraction":
        r = Fraction(r)
        a0 = r.numerator // r.denominator
        quots = []
        p, q = r.numerator - a0 * r.denominator, r.denominator
        while p:  # Euclid
            a, rem = divmod(q, p)
            quots.append(a)
            q, p = p, rem
        if quots and quots[-1] == 1 and len(quots) > 1:
            quots.pop()
            quots[-1] += 1

        def value_fn(prec: int, v: Fraction = r) -> mp.mpf:
            with mp.workprec(prec):
                return mp.mpf(v.numerator) / v.denominator

        return cls(a0, "rational", quotients=quots, value_fn=value_fn)

    @classmethod
    def from_surd(cls, P: int, D: int, Q: int) -> "ContinuedFraction":
        """Expansion of ``x = (P + sqrt(D))/Q`` by the exact reduced-surd iteration.

        ``D > 0`` must not be a perfect square; the divisibility
        ``Q | (D - P^2)`` is arranged internally by rescaling.  Periodicity is
        detected by repetition of the surd state, giving the exact preperiod
        ``L`` and period ``K`` (in the ``a_1, a_2, ...`` indexing).
        """
        if D <= 0 or isqrt(D) ** 2 == D:
            raise ValueError("D must be positive and not a perfect square")
        if Q == 0:
            raise ValueError("Q must be nonzero")
        P0, D0, Q0 = P, D, Q
        if (D - P * P) % Q:
            P, D, Q = P * abs(Q), D * Q * Q, Q * abs(Q)
        sq = isqrt(D)
        a0 = _floor_surd(P, D, Q, sq)
        quots: list[int] = []
        states: dict[tuple[int, int], int] = {}
        # iterate on the fractional part x_k = (Pk + sqrt D)/Qk in (0, 1)
        Pk, Qk = P - a0 * Q, Q
        while True:
            # 1/x_k = (P' + sqrt D)/Q' with P' = -Pk, Q' = (D - Pk^2)/Qk
            P1 = -Pk
            Q1 = (D - P1 * P1) // Qk
            if (P1, Q1) in states:
                L = states[(P1, Q1)]
                period = (L, len(quots) - L)
                break
            states[(P1, Q1)] = len(quots)
            a = _floor_surd(P1, D, Q1, sq)
            quots.append(a)
            Pk, Qk = P1 - a * Q1, Q1

        L, K = period
        pre, per = quots[:L], quots[L:L + K]

        def extender(n: int) -> list[int]:
            out = list(pre)
            while len(out) < n:
                out.extend(per)
            return out[:n]

        def value_fn(prec: int) -> mp.mpf:
            with mp.workprec(prec):
                return (P0 + mp.sqrt(mp.mpf(D0))) / Q0

        return cls(a0, "quadratic", quotients=quots, extender=extender,
                   period=(L, K), value_fn=value_fn)

    @classmethod
    def from_sample(cls, x, *, err=None) -> "ContinuedFraction":
        """Expansion of a floating sample; every quotient is certified by exact
        interval arithmetic on ``[x - err, x + err]``.

        Raises :class:`PrecisionExhausted` (during extension) as soon as the
        bracket no longer pins down the next quotient.
        """
        xf = _to_fraction(x)
        if err is None:
            prec = 53 if isinstance(x, float) else mp.mp.prec
            eps = max(abs(xf), Fraction(1)) / 2 ** max(16, prec - 4)
        else:
            eps = abs(_to_fraction(err))
        lo, hi = xf - eps, xf + eps
        a0 = math.floor(lo)
        if math.floor(hi) != a0:
            raise PrecisionExhausted("sample does not certify the integer part")
        state = {"lo": lo - a0, "hi": hi - a0, "quots": []}

        def extender(n: int) -> list[int]:
            quots = state["quots"]
            while len(quots) < n:
                lo_, hi_ = state["lo"], state["hi"]
                if lo_ <= 0:
                    raise PrecisionExhausted(
                        f"sample certifies only {len(quots)} quotients")
                ilo, ihi = 1 / hi_, 1 / lo_
                a = math.floor(ilo)
                if math.floor(ihi) != a or a < 1:
                    raise PrecisionExhausted(
                        f"sample certifies only {len(quots)} quotients")
                quots.append(a)
                state["lo"], state["hi"] = ilo - a, ihi - a
            return quots[:n]

        def value_fn(prec: int) -> mp.mpf:
            with mp.workprec(prec):
                return mp.mpf(xf.numerator) / xf.denominator

        return cls(a0, "float-sample", extender=extender, value_fn=value_fn)

    @classmethod
    def from_quotients(cls, a0: int, quotients, *, n_hint: int = 64,
                       ) -> "ContinuedFraction":
        """Synthetic expansion from explicit quotients.

        ``quotients`` is either a finite sequence (must be canonical) or a
        callable ``k -> a_k`` for ``k = 1, 2, ...``.  The attached value is a
        deep convergent, accurate to ``1/m^2`` at depth ``n_hint`` - plenty
        for the beta of shallower convergents.
        """
        if callable(quotients):
            fn = quotients

            def extender(n: int) -> list[int]:
                out = [int(fn(k)) for k in range(1, n + 1)]
                if any(a < 1 for a in out):
                    raise ValueError("partial quotients must be >= 1")
                return out

            def value_fn(prec: int) -> mp.mpf:
                qs = extender(n_hint)
                n2, n1, m2, m1 = 0, 1, 1, 0
                for a in [a0] + qs:
                    n2, n1 = n1, a * n1 + n2
                    m2, m1 = m1, a * m1 + m2
                with mp.workprec(prec):
                    return mp.mpf(n1) / m1

            return cls(a0, "synthetic", extender=extender, value_fn=value_fn)

        quots = [int(a) for a in quotients]
        r = Fraction(0)
        for a in reversed(quots):
            r = Fraction(1, a + r)
        r += a0

        def value_fn(prec: int, v: Fraction = r) -> mp.mpf:
            with mp.workprec(prec):
                return mp.mpf(v.numerator) / v.denominator

        return cls(a0, "synthetic", quotients=quots, value_fn=value_fn, finite=True)

    # -- access ---------------------------------------------------------

    def quotients(self, n: int) -> list[int]:
        """First ``n`` partial quotients ``a_1..a_n``.

        Raises IndexError past the end of a finite expansion and propagates
        :class:`PrecisionExhausted` from uncertifiable samples.
        """
        if len(self._quots) < n and self._extender is not None:
            got = self._extender(n)
            if len(got) > len(self._quots):
                self._quots = [int(a) for a in got]
        if len(self._quots) < n:
            raise IndexError(f"expansion has only {len(self._quots)} quotients")
        return self._quots[:n]

    def known_quotients(self) -> list[int]:
        return list(self._quots)

    def value(self, precision: int = 120) -> mp.mpf:
        if self._value_fn is None:
            raise ValueError("no value function attached")
        return self._value_fn(precision)

    def __repr__(self):
        head = ",".join(str(a) for a in self._quots[:8])
        tail = "" if self.finite else ",..."
        return f"ContinuedFraction([{self.a0};{head}{tail}], source={self.source!r})"


def cf_expand(x, depth: int) -> ContinuedFraction:
    """Expand ``x`` to at least ``depth`` partial quotients.

    ``x`` may be a Fraction/int (exact, possibly fewer quotients), a tuple
    ``(P, D, Q)`` meaning ``(P + sqrt(D))/Q`` (exact surd), an object exposing
    a ``cf`` attribute, an existing expansion, or a float/mpf sample
    (certified; raises :class:`PrecisionExhausted` when uncertifiable).
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if hasattr(x, "cf"):
        cf = x.cf
    elif isinstance(x, (Fraction, int)):
        cf = ContinuedFraction.from_rational(x)
    elif isinstance(x, ContinuedFraction):
        cf = x
    elif isinstance(x, tuple) and len(x) == 3:
        cf = ContinuedFraction.from_surd(*x)
    else:
        cf = ContinuedFraction.from_sample(x)
    if not cf.finite:
        cf.quotients(depth)  # force extension / certification now
    return cf


def convergents(cf: ContinuedFraction, k_max: int, *,
                precision: int = 120) -> list[Convergent]:
    """Convergents ``k = 0..k_max`` with exact integers and high-precision beta.

    For finite expansions the list stops at the last convergent.  The working
    precision is raised with ``m_k`` so the cancellation in ``m_k x - n_k``
    still leaves ~40 significant bits.
    """
    try:
        quots = cf.quotients(k_max)
    except IndexError:
        quots = cf.known_quotients()
    n2, n1 = 0, 1
    m2, m1 = 1, 0
    out = []
    x_cache: dict[int, mp.mpf] = {}

    def x_at(prec: int) -> mp.mpf:
        if prec not in x_cache:
            x_cache[prec] = cf.value(prec)
        return x_cache[prec]

    for k, a in enumerate([cf.a0] + list(quots)):
        if k > k_max:
            break
        n = a * n1 + n2
        m = a * m1 + m2
        prec = max(precision, 2 * m.bit_length() + 40)
        with mp.workprec(prec):
            beta = abs(m * x_at(prec) - n)
        out.append(Convergent(k=k, n=n, m=m, beta=beta))
        n2, n1 = n1, n
        m2, m1 = m1, m
    return out


def is_convergent(x, r, depth: int) -> bool:
    """True iff the reduced fraction ``r`` occurs among the convergents of ``x``
    (depth extended automatically until ``m_k > r.denominator``)."""
    r = Fraction(r)
    cf = cf_expand(x, depth)
    k = depth
    while True:
        cs = convergents(cf, k)
        if any(c.n == r.numerator and c.m == r.denominator for c in cs):
            return True
        if cs[-1].m > r.denominator or (cf.finite and len(cs) <= k):
            return False
        k *= 2


# ---------------------------------------------------------------------------
# arithmetic functions
# ---------------------------------------------------------------------------


def factorize(n: int) -> dict[int, int]:
    """Prime factorization by trial division (adequate for n <= 10^6 scale)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    fac: dict[int, int] = {}
    m = n
    while m % 2 == 0:
        fac[2] = fac.get(2, 0) + 1
        m //= 2
    p = 3
    while p * p <= m:
        while m % p == 0:
            fac[p] = fac.get(p, 0) + 1
            m //= p
        p += 2
    if m > 1:
        fac[m] = fac.get(m, 0) + 1
    return fac


def mobius(n: int) -> int:
    fac = factorize(n)
    if any(e > 1 for e in fac.values()):
        return 0
    return -1 if len(fac) % 2 else 1


def totient(n: int) -> int:
    t = n
    for p in factorize(n):
        t -= t // p
    return t


def totient_sieve(n_max: int) -> list[int]:
    """phi(0..n_max) by sieve; phi[0] is set to 0."""
    phi = list(range(n_max + 1))
    for p in range(2, n_max + 1):
        if phi[p] == p:  # p prime
            for k in range(p, n_max + 1, p):
                phi[k] -= phi[k] // p
    if n_max >= 0:
        phi[0] = 0
    return phi


# ---------------------------------------------------------------------------
# roots of unity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PrimitiveRoot:
    """A primitive ``m``-th root of unity ``exp(2 pi i n/m)``, ``(n|m) = 1``."""

    n: int
    m: int

    def __post_init__(self):
        ok = self.m == 1 and self.n == 0 or (
            self.m > 1 and 0 <= self.n < self.m and gcd(self.n, self.m) == 1)
        if not ok:
            raise ValueError(f"({self.n}, {self.m}) is not a reduced angle")

    @property
    def order(self) -> int:
        return self.m

    @property
    def frac(self) -> Fraction:
        return Fraction(self.n, self.m)

    @property
    def value(self) -> complex:
        return cmath.exp(2j * math.pi * self.n / self.m)

    def mp_value(self, precision: int = 120):
        with mp.workprec(precision):
            return mp.expjpi(mp.mpf(2 * self.n) / self.m)


def primitive_roots(m: int) -> list[PrimitiveRoot]:
    """The ``phi(m)`` primitive roots of order ``m``, in increasing-``n`` order."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if m == 1:
        return [PrimitiveRoot(0, 1)]
    return [PrimitiveRoot(n, m) for n in range(m) if gcd(n, m) == 1]


def enumerate_roots(m_max: int) -> Iterator[PrimitiveRoot]:
    """All roots of unity of order <= m_max, Farey-ordered (m asc, then n asc)."""
    for m in range(1, m_max + 1):
        yield from primitive_roots(m)


def ramanujan_sum(m: int, n: int) -> int:
    """Power sum ``sum_{Lambda primitive of order m} Lambda^n``, exact integer.

    Classical closed form ``mu(m/g) phi(m)/phi(m/g)`` with ``g = gcd(n, m)``;
    depends on ``n`` only through ``n mod m`` and is even in ``n``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if m == 1:
        return 1
    g = gcd(n % m, m)
    d = m // g
    mu = mobius(d)
    if mu == 0:
        return 0
    return mu * (totient(m) // totient(d))

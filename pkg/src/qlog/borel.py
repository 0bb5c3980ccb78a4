"""Borel-Laplace calculus on truncated germs, Gevrey/Carleman diagnostics,
and Pade approximants.

The formal model lives in powers of ``1/x``: a series ``sum a_n x^{-n}`` maps
to the constant ``a_0`` plus the germ ``sum a_{n+1} xi^n / n!`` in the Borel
plane.  Multiplication becomes convolution
``(f*g)(xi) = int_0^xi f(u) g(xi - u) du``; substitution ``x -> x + L(x)``
becomes composition-convolution.  Ray Laplace transforms are evaluated with
tanh-sinh quadrature on a truncated ray, the truncation length chosen from
the germ's exponential growth certificate.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import mpmath as mp
import numpy as np

from .errors import (DampingInsufficient, DegenerateFit, NotConverged,
                     RayHitsSingularity, SingularSystem)

_FACT = [math.factorial(k) for k in range(171)]


def _factorial(n: int) -> float:
    return _FACT[n] if n < len(_FACT) else math.inf


# ---------------------------------------------------------------------------
# formal series and germs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FormalSeries1:
    """Truncated series ``sum_{n<=N} a_n x^{-n}`` with an optional Gevrey-1
    certificate ``|a_n| <= c0 c1^n n!`` (verified on the stored coefficients).
    """

    coeffs: tuple
    gevrey1_cert: tuple[float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs))
        if self.gevrey1_cert is not None:
            c0, c1 = self.gevrey1_cert
            for n, a in enumerate(self.coeffs):
                if abs(a) > c0 * c1 ** n * _factorial(n) * (1 + 1e-12):
                    raise ValueError(f"certificate violated at n={n}")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, n: int) -> complex:
        return self.coeffs[n] if 0 <= n <= self.order else 0.0

    def multiply(self, other: "FormalSeries1") -> "FormalSeries1":
        order = min(self.order + other.order, max(self.order, other.order))
        out = [0j] * (order + 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                if i + j <= order:
                    out[i + j] += a * b
        return FormalSeries1(tuple(out))


@dataclass(frozen=True)
class BorelGerm:
    """Convergent germ in the Borel plane: Taylor coefficients, an optional
    closed-form evaluator with its validity note, and an optional exponential
    growth certificate ``||phi(xi)|| <= C e^(delta |xi|)`` on the named region.
    """

    taylor: tuple
    evaluator: Callable[[complex], complex] | None = None
    region: str = ""
    growth: tuple[float, float] | None = None  # (delta, C)
    singularities: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "taylor", tuple(complex(c) for c in self.taylor))
        if self.evaluator is not None:
            self.cross_check()

    @property
    def order(self) -> int:
        return len(self.taylor) - 1

    def coeff(self, n: int) -> complex:
        return self.taylor[n] if 0 <= n <= self.order else 0.0

    def taylor_eval(self, xi: complex) -> complex:
        acc = 0j
        for c in reversed(self.taylor):
            acc = acc * xi + c
        return acc

    def cross_check(self, radius: float = 1e-3, points: int = 5,
                    rtol: float = 1e-6) -> None:
        """Taylor-vs-evaluator consistency near 0 (germ invariant)."""
        for k in range(points):
            xi = radius * cmath.exp(2j * math.pi * (k + 0.3) / points)
            a = self.taylor_eval(xi)
            b = self.evaluator(xi)
            scale = max(1.0, abs(a))
            if abs(a - b) > 1e3 * rtol * scale * max(1.0, radius ** self.order):
                if abs(a - b) > rtol * scale + abs(self.coeff(self.order)) * radius ** self.order * 10:
                    raise ValueError(
                        f"evaluator disagrees with Taylor data at {xi}: {a} vs {b}")

    def __call__(self, xi: complex) -> complex:
        if self.evaluator is not None:
            return self.evaluator(xi)
        return self.taylor_eval(xi)


def formal_borel(s: FormalSeries1) -> tuple[complex, BorelGerm]:
    """Split the constant term and map ``a_{n+1} -> a_{n+1} xi^n/n!``.

    With a Gevrey-1 certificate ``(c0, c1)`` the germ converges on a disk of
    radius ``>= 1/c1``; the certificate is carried as a growth bound there.
    """
    a0 = s.coeff(0)
    taylor = tuple(s.coeff(n + 1) / _factorial(n) for n in range(s.order))
    growth = None
    if s.gevrey1_cert is not None:
        c0, c1 = s.gevrey1_cert
        growth = (c1, c0 * c1)  # |phi| <= c0 c1 sum (c1 xi)^n = ~ c0 c1 e^{c1 xi}
    return a0, BorelGerm(taylor=taylor, growth=growth)


def formal_laplace(a0: complex, germ: BorelGerm, order: int) -> FormalSeries1:
    """Inverse of :func:`formal_borel` at the coefficient level."""
    coeffs = [a0] + [germ.coeff(n) * _factorial(n) for n in range(order)]
    return FormalSeries1(tuple(coeffs))


def convolve(f: BorelGerm, g: BorelGerm, order: int) -> BorelGerm:
    """Convolution ``int_0^xi f(u) g(xi-u) du`` truncated at ``order``.

    Implemented through the formal model: multiply the Laplace preimages
    (without constant terms) and transform back - exact at truncation, and
    identical to the direct ``i! j! / (i+j+1)!`` rule.
    """
    sf = formal_laplace(0.0, f, order + 1)
    sg = formal_laplace(0.0, g, order + 1)
    prod = [0j] * (order + 2)
    for i, a in enumerate(sf.coeffs):
        if a == 0:
            continue
        for j, b in enumerate(sg.coeffs):
            if i + j <= order + 1:
                prod[i + j] += a * b
    taylor = tuple(prod[n + 1] / _factorial(n) for n in range(order + 1))
    return BorelGerm(taylor=taylor)


def unit_convolve(g: BorelGerm, order: int) -> BorelGerm:
    """``1 * g``: the antiderivative germ (convolution with the constant 1)."""
    taylor = [0j] * (order + 1)
    for n in range(1, order + 1):
        taylor[n] = g.coeff(n - 1) / n
    return BorelGerm(taylor=tuple(taylor))


def borel_translate(g: BorelGerm, b: complex) -> BorelGerm:
    """Counterpart of ``x -> x + b``: multiply the germ by ``e^{-b xi}``."""
    order = g.order
    out = [0j] * (order + 1)
    for n in range(order + 1):
        acc = 0j
        for k in range(n + 1):
            acc += ((-b) ** k / _factorial(k)) * g.coeff(n - k)
        out[n] = acc
    ev = None
    if g.evaluator is not None:
        ev = lambda xi, _g=g, _b=b: cmath.exp(-_b * xi) * _g.evaluator(xi)
    growth = None
    if g.growth is not None:
        growth = (g.growth[0] + abs(b), g.growth[1])
    return BorelGerm(taylor=tuple(out), evaluator=ev, region=g.region,
                     growth=growth, singularities=g.singularities)


def borel_dilate(g: BorelGerm, lam: complex) -> BorelGerm:
    """Counterpart of ``x -> lam x``: ``xi -> lam^{-1} phi(lam^{-1} xi)``."""
    if lam == 0:
        raise ValueError("lam must be nonzero")
    inv = 1 / lam
    taylor = tuple(inv ** (n + 1) * g.coeff(n) for n in range(g.order + 1))
    ev = None
    if g.evaluator is not None:
        ev = lambda xi, _g=g, _i=inv: _i * _g.evaluator(_i * xi)
    growth = None
    if g.growth is not None:
        growth = (g.growth[0] * abs(inv), g.growth[1] * abs(inv))
    sing = tuple(lam * s for s in g.singularities)
    return BorelGerm(taylor=tuple(taylor), evaluator=ev, region=g.region,
                     growth=growth, singularities=sing)


def _dhat(taylor: Sequence[complex], order: int) -> tuple:
    """Multiplication by ``-xi`` (Borel counterpart of d/dx)."""
    out = [0j] * (order + 1)
    for n in range(1, order + 1):
        out[n] = -complex(taylor[n - 1])
    return tuple(out)


def _taylor_mul(a: Sequence[complex], b: Sequence[complex], order: int) -> tuple:
    out = [0j] * (order + 1)
    for i, x in enumerate(a[:order + 1]):
        if x == 0:
            continue
        for j, y in enumerate(b[:order + 1 - i]):
            out[i + j] += x * y
    return tuple(out)


def _taylor_conv(a: Sequence[complex], b: Sequence[complex], order: int) -> tuple:
    out = [0j] * (order + 1)
    for i, x in enumerate(a[:order + 1]):
        if x == 0:
            continue
        fi = _factorial(i)
        for j, y in enumerate(b[:order - i]):
            out[i + j + 1] += x * y * fi * _factorial(j) / _factorial(i + j + 1)
    return tuple(out)


def composition_convolution(g: BorelGerm, Lhat: BorelGerm, order: int,
                            r_max: int | None = None, tol: float = 0.0,
                            L_const: complex = 0.0) -> BorelGerm:
    """Germ of ``phi(x + L(x))``: ``phi + sum_{r>=1} L^{*r} * d^r phi / r!``.

    ``Lhat`` is the germ of the ``x^{-1} C[[x^{-1}]]`` part of ``L``; a
    constant part is passed as ``L_const`` and handled exactly as the
    translation factor ``e^{-L_const xi}`` applied first.

    At truncation order ``order`` the series terminates after at most
    ``order + 1`` terms (each convolution raises the valuation), so the
    result is exact at truncation; a too-small ``r_max`` raises
    :class:`NotConverged` if the last retained term was still above ``tol``.
    """
    if L_const:
        g = borel_translate(g, L_const)
    base = tuple(g.coeff(n) for n in range(order + 1))
    lcoef = tuple(Lhat.coeff(n) for n in range(order + 1))
    acc = list(base)
    lpow: tuple | None = None
    cur = base
    r_stop = order + 1 if r_max is None else r_max
    last_norm = math.inf
    for r in range(1, r_stop + 1):
        cur = _dhat(cur, order)
        lpow = lcoef if r == 1 else _taylor_conv(lpow, lcoef, order)
        term = _taylor_conv(lpow, cur, order)
        fr = _factorial(r)
        term = tuple(t / fr for t in term)
        last_norm = max(abs(t) for t in term) if term else 0.0
        for n in range(order + 1):
            acc[n] += term[n]
        if all(t == 0 for t in term):
            last_norm = 0.0
            break
    if r_max is not None and last_norm > tol:
        raise NotConverged(
            f"composition-convolution terms still {last_norm:.3g} after r_max={r_max}")
    return BorelGerm(taylor=tuple(acc))


# ---------------------------------------------------------------------------
# tanh-sinh ray quadrature and the Laplace transform
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadSpec:
    """Quadrature request: target tolerance and level cap for tanh-sinh."""

    tol: float = 1e-10
    max_level: int = 11


def tanh_sinh(f: Callable[[float], complex], a: float, b: float,
              spec: QuadSpec = QuadSpec()) -> tuple[complex, float]:
    """Deterministic tanh-sinh quadrature of ``f`` on ``[a, b]``.

    Returns ``(value, error_estimate)``; the estimate is the difference of
    the last two refinement levels (plus machine slack).
    """
    if b <= a:
        return 0j, 0.0
    half = (b - a) / 2
    mid = (a + b) / 2
    tmax = 4.0

    def nodes(h: float, only_odd: bool):
        k = 1 if only_odd else 0
        step = 2 if only_odd else 1
        while k * h <= tmax:
            t = k * h
            u = math.pi / 2 * math.sinh(t)
            x = math.tanh(u)
            w = (math.pi / 2) * math.cosh(t) / math.cosh(u) ** 2
            yield t, x, w
            k += step

    h = 1.0
    # level 0
    total = f(mid) * (math.pi / 2)
    for t, x, w in nodes(h, only_odd=False):
        if t == 0:
            continue
        total += w * (f(mid + half * x) + f(mid - half * x))
    prev = total * half * h
    err = math.inf
    for level in range(1, spec.max_level + 1):
        h /= 2
        add = 0j
        for t, x, w in nodes(h, only_odd=True):
            add += w * (f(mid + half * x) + f(mid - half * x))
        cur = prev / 2 + add * half * h
        err = abs(cur - prev)
        prev = cur
        if err < spec.tol / 2 and level >= 3:
            break
    return prev, err + 1e-16 * abs(prev)


def laplace_ray(g: BorelGerm, theta: float, x: complex,
                quad: QuadSpec = QuadSpec()) -> tuple[complex, float]:
    """``int_0^{e^{i theta} inf} phi(xi) e^{-x xi} d xi`` by truncated tanh-sinh.

    Needs an evaluator and a growth certificate; the damping
    ``sigma = Re(x e^{i theta}) - delta`` must be positive
    (:class:`DampingInsufficient` otherwise), and declared singularities must
    stay off the ray (:class:`RayHitsSingularity`).
    """
    if g.evaluator is None:
        raise ValueError("laplace_ray needs a germ with an evaluator")
    if g.growth is None:
        raise ValueError("laplace_ray needs a growth certificate")
    delta, C = g.growth
    e = cmath.exp(1j * theta)
    sigma = (x * e).real - delta
    if sigma <= 0:
        raise DampingInsufficient(
            f"Re(x e^itheta) = {(x * e).real:.4g} does not dominate growth {delta:.4g}")
    for s in g.singularities:
        # distance from the ray {t e : t >= 0}
        t = (s * e.conjugate()).real
        d = abs(s - max(t, 0.0) * e)
        if d < 1e-9:
            raise RayHitsSingularity(f"singular point {s} lies on the ray")
    T = max(math.log(max(C, 1.0) / (quad.tol * sigma)) / sigma, 1.0 / sigma)
    tail = C * math.exp(-sigma * T) / sigma

    def f(t: float) -> complex:
        xi = t * e
        return g.evaluator(xi) * cmath.exp(-x * xi)

    val, qerr = tanh_sinh(f, 0.0, T, quad)
    return val * e, qerr + tail


# ---------------------------------------------------------------------------
# Gevrey and Carleman diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GevreyFit:
    tau: float
    stderr: float
    k_range: tuple[int, int]

    @property
    def band(self) -> tuple[float, float]:
        return (self.tau - 2 * self.stderr, self.tau + 2 * self.stderr)


def gevrey_order_fit(coeffs, k_range: tuple[int, int] | None = None,
                     *, log_magnitudes: Sequence[float] | None = None,
                     ) -> GevreyFit:
    """Least-squares slope of ``log|a_k|`` against ``k log k`` (with a free
    ``k``-linear term), estimating the Gevrey order ``tau`` of
    ``|a_k| ~ c0 c1^k Gamma(1 + k tau)``.

    Pass either raw coefficients or precomputed ``log|a_k]`` values (index =
    k, non-finite entries skipped).
    """
    if log_magnitudes is None:
        log_magnitudes = [math.log(abs(c)) if abs(c) > 0 else -math.inf
                          for c in coeffs]
    lo, hi = k_range if k_range is not None else (1, len(log_magnitudes) - 1)
    ks, ys = [], []
    for k in range(max(lo, 1), min(hi, len(log_magnitudes) - 1) + 1):
        y = log_magnitudes[k]
        if math.isfinite(y):
            ks.append(k)
            ys.append(y)
    if len(ks) < 4:
        raise DegenerateFit("need at least 4 usable coefficients")
    X = np.array([[1.0, k, k * math.log(k)] for k in ks])
    y = np.array(ys)
    beta, res, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < 3:
        raise DegenerateFit("regression design is rank-deficient")
    dof = max(len(ks) - 3, 1)
    resid = y - X @ beta
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(X.T @ X)
    return GevreyFit(tau=float(beta[2]), stderr=float(math.sqrt(max(cov[2, 2], 0.0))),
                     k_range=(ks[0], ks[-1]))


@dataclass(frozen=True)
class CarlemanVerdict:
    """Quasianalyticity verdict for a Carleman class.

    For Gevrey families the verdict is exact (``tau <= 1``).  For finite
    tables only the ``beta_n`` prefix and partial sums of ``sum 1/beta_n``
    can be reported; divergence is not decidable from finite data, and
    ``decidable`` is False in that case.
    """

    quasianalytic: bool | None
    decidable: bool
    detail: str
    beta_prefix: tuple = ()
    partial_sums: tuple = ()


def carleman_check(family) -> CarlemanVerdict:
    """``family`` is ``("gevrey", tau)`` or ``("table", [M_0, M_1, ...])``."""
    kind = family[0]
    if kind == "gevrey":
        tau = float(family[1])
        return CarlemanVerdict(
            quasianalytic=tau <= 1, decidable=True,
            detail=f"Gevrey family M_n = Gamma(1 + n tau), tau={tau}: "
                   f"quasianalytic iff tau <= 1")
    if kind == "table":
        M = [float(v) for v in family[1]]
        if any(v <= 0 for v in M):
            raise ValueError("table entries must be positive")
        beta = []
        for n in range(1, len(M)):
            beta.append(min(M[k] ** (1.0 / k) for k in range(n, len(M))))
        sums = []
        acc = 0.0
        for b in beta:
            acc += 1.0 / b
            sums.append(acc)
        return CarlemanVerdict(
            quasianalytic=None, decidable=False,
            detail="divergence of sum 1/beta_n is not decidable from finite data",
            beta_prefix=tuple(beta), partial_sums=tuple(sums))
    raise ValueError(f"unknown family kind {kind!r}")


# ---------------------------------------------------------------------------
# Pade approximants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PadeApproximant:
    """[N/N+1] rational approximant: numerator degree N, denominator degree
    N+1 normalized by ``den[0] = 1``; coefficients stored as mpmath values at
    the requested binary precision, with solve diagnostics.
    """

    num: tuple
    den: tuple
    precision: int
    residual: float
    cond_estimate: float

    @property
    def N(self) -> int:
        return len(self.num) - 1


def pade(coeffs, N: int, precision: int = 256) -> PadeApproximant:
    """Denominator from the Toeplitz system
    ``sum_{j=1}^{N+1} den_j c_{k-j} = -c_k`` for ``k = N+1..2N+1``, solved at
    ``precision`` bits (least squares on the square system), then the
    numerator by direct convolution.

    Raises :class:`SingularSystem` (with an effective-rank estimate) when the
    solve fails or the residual is not small.
    """
    cs = list(coeffs)
    if len(cs) < 2 * N + 2:
        raise ValueError(f"need 2N+2 = {2 * N + 2} coefficients, got {len(cs)}")
    with mp.workprec(precision):
        cs_mp = [mp.mpmathify(c) for c in cs]
        A = mp.matrix(N + 1, N + 1)
        rhs = mp.matrix(N + 1, 1)
        for i, k in enumerate(range(N + 1, 2 * N + 2)):
            for j in range(1, N + 2):
                A[i, j - 1] = cs_mp[k - j] if k - j >= 0 else 0
            rhs[i] = -cs_mp[k]
        try:
            sol = mp.qr_solve(A, rhs)[0]
        except (ZeroDivisionError, ValueError) as exc:
            rank = _effective_rank(A, precision)
            raise SingularSystem(f"Toeplitz solve failed: {exc}",
                                 effective_rank=rank)
        den = [mp.mpf(1)] + [sol[j] for j in range(N + 1)]
        num = []
        for k in range(N + 1):
            s = mp.mpf(0)
            for j in range(0, min(k, N + 1) + 1):
                s += den[j] * cs_mp[k - j]
            num.append(s)
        # residual of the defining conditions, relative
        resid = mp.mpf(0)
        scale = mp.mpf(0)
        for i, k in enumerate(range(N + 1, 2 * N + 2)):
            s = cs_mp[k]
            for j in range(1, N + 2):
                if k - j >= 0:
                    s += den[j] * cs_mp[k - j]
            resid = max(resid, abs(s))
            scale = max(scale, abs(cs_mp[k]))
        rel = float(resid / scale) if scale > 0 else float(resid)
        if not rel < 1e-3:
            raise SingularSystem(
                f"Pade conditions violated (relative residual {rel:.3g})",
                effective_rank=_effective_rank(A, precision))
        # crude condition estimate: norm(A) * norm(A^-1 e_i) probing
        try:
            normA = max(sum(abs(A[i, j]) for j in range(N + 1)) for i in range(N + 1))
            probe = mp.qr_solve(A, mp.matrix([1] + [0] * N))[0]
            inv_col = sum(abs(v) for v in probe)
            cond = float(normA * inv_col)
        except Exception:
            cond = float("inf")
    return PadeApproximant(num=tuple(num), den=tuple(den), precision=precision,
                           residual=rel, cond_estimate=cond)


def _effective_rank(A, precision: int) -> int | None:
    try:
        with mp.workprec(precision):
            U, S, V = mp.svd_r(mp.matrix([[float(A[i, j]) for j in range(A.cols)]
                                          for i in range(A.rows)]))
            smax = max(S[i] for i in range(S.rows))
            return int(sum(1 for i in range(S.rows)
                           if S[i] > smax * mp.mpf(2) ** (-precision // 2)))
    except Exception:
        return None


def pade_eval(p: PadeApproximant, q) -> object:
    """Evaluate ``num/den`` by Horner at the approximant's precision."""
    with mp.workprec(p.precision):
        qq = mp.mpmathify(q)
        nv = mp.mpf(0)
        for c in reversed(p.num):
            nv = nv * qq + c
        dv = mp.mpf(0)
        for c in reversed(p.den):
            dv = dv * qq + c
        return nv / dv

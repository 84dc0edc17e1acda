"""Totally real fields from monic integer polynomials, with certified embeddings.

A field is presented by its minimal polynomial; roots are isolated with Sturm
sequences and refined to dyadic intervals.  Tuples are powers of the largest
root, and the embedding matrix is kept in integer fixed point (mantissa at
scale 2**-frac_bits plus an error bound in ulps) so that fractional parts of
k*alpha stay certified for k far beyond what float64 can carry.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    NotPrime,
    NotSquarefree,
    NotTotallyReal,
    PrecisionExhausted,
    Reducible,
)

# Displacement outputs of frac_nearest are certified to 2**-DISP_CERT_BITS.
DISP_CERT_BITS = 64

DEFAULT_PRECISION_BITS = 192


# ---------------------------------------------------------------------------
# exact polynomial helpers (coefficients ascending, c_0 first)
# ---------------------------------------------------------------------------


def _poly_eval(coeffs, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _poly_derivative(coeffs):
    return tuple(i * c for i, c in enumerate(coeffs) if i > 0)


def _sign_at_dyadic(coeffs, num: int, scale_bits: int) -> int:
    """Sign of f(num / 2**scale_bits) using integer arithmetic only."""
    d = len(coeffs) - 1
    acc = 0
    # Horner at scale: acc_i = acc_{i+1} * num + c_i * 2**(i*scale... ) done
    # as sum c_i * num**i * 2**((d-i)*scale_bits).
    for i, c in enumerate(coeffs):
        if c:
            acc += c * num**i << ((d - i) * scale_bits)
    return (acc > 0) - (acc < 0)


def _frac_sign(coeffs, x: Fraction) -> int:
    v = _poly_eval(coeffs, x)
    return (v > 0) - (v < 0)


def _sturm_chain(coeffs):
    chain = [tuple(Fraction(c) for c in coeffs)]
    deriv = _poly_derivative(coeffs)
    if deriv:
        chain.append(tuple(Fraction(c) for c in deriv))
    while len(chain[-1]) > 1:
        rem = _poly_mod(chain[-2], chain[-1])
        if not any(rem):
            break
        chain.append(tuple(-c for c in rem))
    return chain


def _poly_mod(a, b):
    """Remainder of a by b over the rationals (coefficients ascending)."""
    a = list(a)
    db, lb = len(b) - 1, b[-1]
    while len(a) - 1 >= db and any(a):
        da = len(a) - 1
        q = a[-1] / lb
        for i in range(db + 1):
            a[da - db + i] -= q * b[i]
        while a and a[-1] == 0:
            a.pop()
        if not a:
            return (Fraction(0),)
    return tuple(a) if a else (Fraction(0),)


def _variations(values) -> int:
    signs = [(v > 0) - (v < 0) for v in values]
    signs = [s for s in signs if s != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a * b < 0)


def _variations_at(chain, x: Fraction) -> int:
    return _variations([_poly_eval(c, x) for c in chain])


def _variations_at_inf(chain, sign: int) -> int:
    vals = []
    for c in chain:
        lead = c[-1]
        deg = len(c) - 1
        vals.append(lead * sign**deg)
    return _variations(vals)


def _count_roots(chain, lo: Fraction, hi: Fraction) -> int:
    return _variations_at(chain, lo) - _variations_at(chain, hi)


def _integer_root_exists(coeffs) -> bool:
    """Rational root test for a monic integer polynomial (roots are integers)."""
    c0 = coeffs[0]
    if c0 == 0:
        return True
    for r in _divisors(abs(c0)):
        for cand in (r, -r):
            if _poly_eval(coeffs, Fraction(cand)) == 0:
                return True
    return False


def _divisors(m: int):
    out = []
    i = 1
    while i * i <= m:
        if m % i == 0:
            out.append(i)
            if i != m // i:
                out.append(m // i)
        i += 1
    return sorted(out)


def _quartic_has_quadratic_factor(coeffs) -> bool:
    """Check for a monic integer quadratic factor of a monic quartic."""
    c0, c1, c2, c3, _ = coeffs
    if c0 == 0:
        return True
    for b in _divisors(abs(c0)):
        for bb in (b, -b):
            e, rem = divmod(c0, bb)
            if rem != 0:
                continue
            # (x^2+ax+bb)(x^2+cx+e): a+c=c3, ac=c2-bb-e, a*e+bb*c=c1
            s = c2 - bb - e
            disc = c3 * c3 - 4 * s
            if disc < 0:
                continue
            r = math.isqrt(disc)
            if r * r != disc:
                continue
            for a in {(c3 + r) // 2, (c3 - r) // 2}:
                c = c3 - a
                if a * c == s and a * e + bb * c == c1:
                    return True
    return False


# ---------------------------------------------------------------------------
# types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MinimalPolynomial:
    """Monic integer polynomial, coefficients c_0..c_d with c_d = 1."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if len(coeffs) < 3:
            raise ValueError("degree must be at least 2")
        if coeffs[-1] != 1:
            raise ValueError("polynomial must be monic")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        return _poly_eval(self.coeffs, x)

    def cauchy_bound(self) -> int:
        return 1 + max(abs(c) for c in self.coeffs[:-1])


@dataclass(frozen=True)
class NumberField:
    """A totally real field with isolated, refined real root intervals.

    roots are disjoint dyadic intervals in ascending order; each has a strict
    sign change and width at most 2**-precision_bits.
    """

    polynomial: MinimalPolynomial
    roots: tuple[tuple[Fraction, Fraction], ...]
    precision_bits: int
    irreducibility_checked: bool = True

    @property
    def degree(self) -> int:
        return self.polynomial.degree

    def root_floats(self) -> tuple[float, ...]:
        return tuple(float((lo + hi) / 2) for lo, hi in self.roots)


@dataclass(frozen=True)
class AlgebraicTuple:
    """Powers of the largest root, with fixed-point embedding matrix.

    embed row j, column i holds sigma_j(alpha_i) as an integer mantissa at
    scale 2**-frac_bits; embed_err[j][i] bounds the error in ulps.  Row 0 is
    the designated embedding (the largest root), the remaining rows are the
    other embeddings by ascending root.  Column 0 is exactly one.
    """

    field: NumberField
    n: int
    coords: tuple[tuple[Fraction, ...], ...]
    embed_mantissa: tuple[tuple[int, ...], ...]
    embed_err_ulps: tuple[tuple[int, ...], ...]
    frac_bits: int

    @property
    def dim(self) -> int:
        return self.n + 1

    def embed_floats(self) -> np.ndarray:
        scale = self.frac_bits
        return np.array(
            [[math.ldexp(float(m), -scale) if abs(m) < 2**970 else float(Fraction(m, 2**scale))
              for m in row] for row in self.embed_mantissa]
        )

    def alpha_mantissas(self) -> tuple[int, ...]:
        return self.embed_mantissa[0][1:]

    def alpha_fractions(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(m, 2**self.frac_bits) for m in self.alpha_mantissas())

    def alpha_floats(self) -> tuple[float, ...]:
        return tuple(float(x) for x in self.alpha_fractions())

    def error_bound(self) -> float:
        worst = max(max(row) for row in self.embed_err_ulps)
        return math.ldexp(worst, -self.frac_bits)

    def max_err_ulps(self) -> int:
        return max(max(row) for row in self.embed_err_ulps)


# ---------------------------------------------------------------------------
# field construction
# ---------------------------------------------------------------------------


def make_field(coeffs, precision_bits: int = DEFAULT_PRECISION_BITS) -> NumberField:
    """Build a totally real field from monic integer coefficients (c_0 first).

    Raises NotSquarefree, Reducible or NotTotallyReal when the polynomial is
    unsuitable.  Roots come back as disjoint dyadic intervals of width at
    most 2**-precision_bits with a verified sign change at the endpoints.
    """
    poly = coeffs if isinstance(coeffs, MinimalPolynomial) else MinimalPolynomial(tuple(coeffs))
    if precision_bits < 64:
        raise ValueError("precision_bits must be at least 64")

    chain = _sturm_chain(poly.coeffs)
    # gcd(f, f') trivial iff the sturm chain terminates in a nonzero constant
    if len(chain[-1]) > 1:
        raise NotSquarefree(f"{poly.coeffs} shares a factor with its derivative")

    if _integer_root_exists(poly.coeffs):
        raise Reducible(f"{poly.coeffs} has a rational root")
    checked = True
    if poly.degree == 4 and _quartic_has_quadratic_factor(poly.coeffs):
        raise Reducible(f"{poly.coeffs} splits into two monic quadratics")
    if poly.degree > 4:
        checked = False
        warnings.warn(
            "irreducibility is not verified beyond degree 4", stacklevel=2
        )

    total = _variations_at_inf(chain, -1) - _variations_at_inf(chain, 1)
    if total != poly.degree:
        raise NotTotallyReal(
            f"{poly.coeffs} has {total} real roots, needs {poly.degree}"
        )

    isolated = _isolate_roots(poly, chain)
    refined = tuple(_refine_root(poly, lo, hi, precision_bits) for lo, hi in isolated)
    return NumberField(poly, refined, precision_bits, checked)


def _isolate_roots(poly: MinimalPolynomial, chain):
    bound = poly.cauchy_bound()
    queue = [(Fraction(-bound), Fraction(bound))]
    done = []
    while queue:
        lo, hi = queue.pop()
        k = _count_roots(chain, lo, hi)
        if k == 0:
            continue
        if k == 1:
            done.append((lo, hi))
            continue
        mid = (lo + hi) / 2
        # mid cannot be a root: dyadic roots of a monic integer polynomial
        # are integers, excluded by the rational-root check
        queue.append((lo, mid))
        queue.append((mid, hi))
    done.sort()
    return done


def _refine_root(poly: MinimalPolynomial, lo: Fraction, hi: Fraction, bits: int):
    """Shrink a bracketing interval below 2**-bits.

    Bisection with exact integer sign tests carries the bracket to ~48 bits;
    Newton steps (rounded back to dyadics) finish, each verified by an exact
    sign change before the bracket is accepted.
    """
    coeffs = poly.coeffs
    dcoeffs = _poly_derivative(coeffs)
    target = Fraction(1, 2 ** (bits + 4))

    sign_lo = _frac_sign(coeffs, lo)

    def bisect_until(a, b, sa, width):
        while b - a > width:
            m = (a + b) / 2
            sm = _frac_sign(coeffs, m)
            if sm == sa:
                a = m
            else:
                b = m
        return a, b

    lo, hi = bisect_until(lo, hi, sign_lo, Fraction(1, 2**48))
    acc = 48
    x = (lo + hi) / 2
    while hi - lo > target:
        fx = _poly_eval(coeffs, x)
        dfx = _poly_eval(dcoeffs, x)
        if dfx == 0:
            lo, hi = bisect_until(lo, hi, _frac_sign(coeffs, lo), (hi - lo) / 4)
            x = (lo + hi) / 2
            continue
        step = fx / dfx
        acc = min(2 * acc - 4, bits + 8)
        scale = 2**acc
        xn = Fraction(round((x - step) * scale), scale)
        w = Fraction(1, 2 ** (acc - 2))
        a, b = xn - w, xn + w
        if lo <= a and b <= hi and _frac_sign(coeffs, a) * _frac_sign(coeffs, b) < 0:
            lo, hi = a, b
            x = xn
        else:
            lo, hi = bisect_until(lo, hi, _frac_sign(coeffs, lo), (hi - lo) / 4)
            x = (lo + hi) / 2
    return lo, hi


# ---------------------------------------------------------------------------
# tuples and fixed-point embedding
# ---------------------------------------------------------------------------


def _fx_mul(m1: int, e1: int, m2: int, e2: int, bits: int):
    """Multiply two fixed-point values with error bounds in ulps."""
    half = 1 << (bits - 1)
    m = (m1 * m2 + half) >> bits
    err = ((abs(m1) * e2 + abs(m2) * e1 + e1 * e2) >> bits) + 2
    return m, err


def power_tuple(field: NumberField) -> AlgebraicTuple:
    """Tuple (theta, theta^2, ..., theta^n) for theta the largest root."""
    d = field.degree
    n = d - 1
    bits = field.precision_bits
    scale = 1 << bits

    # row 0 is the designated embedding: theta = largest root
    ordered = (field.roots[-1],) + field.roots[:-1]
    mant_rows, err_rows = [], []
    for lo, hi in ordered:
        mid = (lo + hi) / 2
        m0 = round(mid * scale)
        e0 = int((hi - lo) / 2 * scale) + 2
        mant, errs = [scale], [0]
        m, e = m0, e0
        mant.append(m)
        errs.append(e)
        for _ in range(2, n + 1):
            m, e = _fx_mul(m, e, m0, e0, bits)
            mant.append(m)
            errs.append(e)
        mant_rows.append(tuple(mant))
        err_rows.append(tuple(errs))

    coords = tuple(
        tuple(Fraction(1) if i == j else Fraction(0) for j in range(d)) for i in range(d)
    )
    return AlgebraicTuple(
        field=field,
        n=n,
        coords=coords,
        embed_mantissa=tuple(mant_rows),
        embed_err_ulps=tuple(err_rows),
        frac_bits=bits,
    )


def frac_nearest(tup: AlgebraicTuple, k: int):
    """Nearest integer vector to k*alpha with signed displacements.

    Returns (pvec, dispvec, delta) with dispvec exact dyadic Fractions in
    [-1/2, 1/2) and delta their max absolute value, certified to 2**-64.
    """
    if k < 1:
        raise ValueError("k must be positive")
    bits = tup.frac_bits
    guard = 1 << (bits - DISP_CERT_BITS)
    if k * max(tup.max_err_ulps(), 1) >= guard:
        raise PrecisionExhausted(
            f"k={k} exceeds the certified range at {bits} fraction bits"
        )
    scale = 1 << bits
    half = scale >> 1
    pvec, disp = [], []
    dmax = 0
    for m in tup.alpha_mantissas():
        t = k * m
        p = (t + half) >> bits
        dn = t - (p << bits)
        pvec.append(p)
        disp.append(Fraction(dn, scale))
        if abs(dn) > dmax:
            dmax = abs(dn)
    return tuple(pvec), tuple(disp), Fraction(dmax, scale)


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def padic_valuation(k: int, p: int) -> int:
    v = 0
    while k % p == 0:
        k //= p
        v += 1
    return v


def padic_norm(k: int, p: int) -> Fraction:
    """|k|_p = p**-v for v the largest power of p dividing k."""
    if k < 1:
        raise ValueError("k must be positive")
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    return Fraction(1, p ** padic_valuation(k, p))

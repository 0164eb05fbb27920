"""Scalar arithmetic for q-deformed computations.

Two scalar layers share one convention, q in (0,1) given as a decimal string:

* ``QContext`` / ``NumScalar``: arbitrary-precision complex numbers (mpmath)
  bound to a fixed (q, precision) pair.  Mixing scalars from different
  contexts is an error, never a silent coercion.
* ``ExactScalar``: Laurent polynomials in s = q^(1/2) with Gaussian-rational
  coefficients, for identities that hold in the coefficient ring itself.

Half-integers are carried doubled (ints) throughout the package; a power
q^(m) with m a half-integer is the ring element s^(2m).
"""

from __future__ import annotations

from fractions import Fraction

import mpmath

_MIN_PREC = 53


class QContext:
    """Deformation parameter and working precision for numeric evaluation."""

    __slots__ = ("q_str", "prec", "q", "qi", "s", "si", "logq")

    def __init__(self, q_str: str, prec: int = 128):
        if not isinstance(q_str, str):
            raise TypeError("q must be given as a decimal string")
        self.q_str = q_str
        self.prec = int(prec)
        if self.prec < _MIN_PREC:
            raise ValueError(f"precision must be at least {_MIN_PREC} bits")
        with mpmath.workprec(self.prec):
            q = mpmath.mpf(q_str)
            if not (0 < q < 1):
                raise ValueError("q must lie strictly between 0 and 1")
            self.q = q
            self.qi = 1 / q
            self.s = mpmath.sqrt(q)
            self.si = 1 / self.s
            self.logq = mpmath.log(q)

    def guard(self):
        """Context manager setting mpmath working precision."""
        return mpmath.workprec(self.prec)

    def key(self) -> tuple:
        """Hashable identity used for caches."""
        return (self.q_str, self.prec)

    def mpf(self, x) -> mpmath.mpf:
        """Convert an int/str/Fraction to mpf at context precision."""
        with self.guard():
            if isinstance(x, Fraction):
                return mpmath.mpf(x.numerator) / x.denominator
            return mpmath.mpf(x)

    def mpc(self, x) -> mpmath.mpc:
        """Convert to mpc at context precision."""
        with self.guard():
            if isinstance(x, ExactScalar):
                return x.eval(self).value
            if isinstance(x, NumScalar):
                self.check(x.ctx)
                return x.value
            if isinstance(x, Fraction):
                return mpmath.mpc(self.mpf(x))
            return mpmath.mpc(x)

    def num(self, x) -> "NumScalar":
        """Wrap a value as a NumScalar in this context."""
        return NumScalar(self.mpc(x), self)

    def check(self, other: "QContext"):
        """Fail loudly when two contexts are mixed."""
        if other is not self and other.key() != self.key():
            raise ValueError(
                f"context mismatch: (q={self.q_str}, P={self.prec}) vs "
                f"(q={other.q_str}, P={other.prec})"
            )

    def q_pow(self, two_m: int) -> mpmath.mpf:
        """q^(m) for the half-integer m = two_m/2."""
        with self.guard():
            return self.s ** two_m

    def q_int(self, n: int) -> mpmath.mpf:
        """Numeric q-integer [n] = (q^n - q^-n)/(q - q^-1)."""
        with self.guard():
            return (self.q ** n - self.qi ** n) / (self.q - self.qi)

    def q_bracket(self, x) -> mpmath.mpf:
        """Numeric q-bracket [x] for a real argument x."""
        with self.guard():
            x = mpmath.mpf(x)
            return (self.q ** x - self.qi ** x) / (self.q - self.qi)

    def __repr__(self):
        return f"QContext(q={self.q_str}, prec={self.prec})"


class NumScalar:
    """Arbitrary-precision complex number bound to a QContext."""

    __slots__ = ("value", "ctx")

    def __init__(self, value, ctx: QContext):
        self.ctx = ctx
        if isinstance(value, mpmath.mpc):
            self.value = value
        else:
            with ctx.guard():
                self.value = mpmath.mpc(value)

    def _coerce(self, other) -> mpmath.mpc:
        if isinstance(other, NumScalar):
            self.ctx.check(other.ctx)
            return other.value
        if isinstance(other, (int, Fraction)):
            return self.ctx.mpc(other)
        if isinstance(other, (mpmath.mpf, mpmath.mpc)):
            return mpmath.mpc(other)
        return NotImplemented

    def _binop(self, other, op):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        with self.ctx.guard():
            return NumScalar(op(self.value, v), self.ctx)

    def __add__(self, other):
        return self._binop(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binop(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._binop(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binop(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binop(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return self._binop(other, lambda a, b: b / a)

    def __neg__(self):
        return NumScalar(-self.value, self.ctx)

    def conj(self) -> "NumScalar":
        return NumScalar(mpmath.conj(self.value), self.ctx)

    def __abs__(self):
        with self.ctx.guard():
            return abs(self.value)

    def __eq__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return self.value == v

    def __hash__(self):
        return hash((self.value.real, self.value.imag, self.ctx.key()))

    def __repr__(self):
        return f"NumScalar({self.value}, q={self.ctx.q_str})"


def _norm_coeff(c) -> tuple:
    """Normalize a coefficient to a (Fraction re, Fraction im) pair."""
    if isinstance(c, tuple):
        re, im = c
        return (Fraction(re), Fraction(im))
    if isinstance(c, (int, Fraction)):
        return (Fraction(c), Fraction(0))
    if isinstance(c, complex):
        if c.real != int(c.real) or c.imag != int(c.imag):
            raise TypeError("float coefficients are not exact; pass Fractions")
        return (Fraction(int(c.real)), Fraction(int(c.imag)))
    raise TypeError(f"cannot use {type(c).__name__} as an exact coefficient")


class ExactScalar:
    """Laurent polynomial in s = q^(1/2) over the Gaussian rationals.

    Stored canonically: exponent -> (re, im) with no zero coefficients.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        clean = {}
        for k, c in (coeffs or {}).items():
            re, im = _norm_coeff(c)
            if re or im:
                clean[int(k)] = (re, im)
        self.coeffs = clean

    @classmethod
    def from_int(cls, n) -> "ExactScalar":
        """Constant polynomial from an int or Fraction."""
        return cls({0: (Fraction(n), Fraction(0))})

    @classmethod
    def s_power(cls, k: int) -> "ExactScalar":
        """The monomial s^k (so q^(m) is s_power(2m))."""
        return cls({int(k): (Fraction(1), Fraction(0))})

    @classmethod
    def i_unit(cls) -> "ExactScalar":
        """The imaginary unit."""
        return cls({0: (Fraction(0), Fraction(1))})

    def is_zero(self) -> bool:
        return not self.coeffs

    @staticmethod
    def _coerce(other):
        if isinstance(other, ExactScalar):
            return other
        if isinstance(other, (int, Fraction)):
            return ExactScalar.from_int(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        out = dict(self.coeffs)
        for k, (re, im) in o.coeffs.items():
            r0, i0 = out.get(k, (Fraction(0), Fraction(0)))
            out[k] = (r0 + re, i0 + im)
        return ExactScalar(out)

    __radd__ = __add__

    def __neg__(self):
        return ExactScalar({k: (-re, -im) for k, (re, im) in self.coeffs.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        out = {}
        for k1, (r1, i1) in self.coeffs.items():
            for k2, (r2, i2) in o.coeffs.items():
                k = k1 + k2
                r0, i0 = out.get(k, (Fraction(0), Fraction(0)))
                out[k] = (r0 + r1 * r2 - i1 * i2, i0 + r1 * i2 + i1 * r2)
        return ExactScalar(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers")
        out = ExactScalar.from_int(1)
        for _ in range(n):
            out = out * self
        return out

    def conj(self) -> "ExactScalar":
        """Complex conjugation; s is real, so exponents are untouched."""
        return ExactScalar({k: (re, -im) for k, (re, im) in self.coeffs.items()})

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def eval(self, ctx: QContext) -> NumScalar:
        """Numeric value in the given context."""
        with ctx.guard():
            total = mpmath.mpc(0)
            for k, (re, im) in sorted(self.coeffs.items()):
                c = mpmath.mpc(ctx.mpf(re), ctx.mpf(im))
                total += c * ctx.s ** k
            return NumScalar(total, ctx)

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k in sorted(self.coeffs):
            re, im = self.coeffs[k]
            if im == 0:
                coeff = f"{re}" if re.denominator == 1 else f"({re})"
            elif re == 0:
                coeff = f"({im}i)"
            else:
                coeff = f"({re}{'+' if im > 0 else '-'}{abs(im)}i)"
            if k == 0:
                parts.append(coeff)
            elif coeff == "1":
                parts.append(f"s^{k}")
            else:
                parts.append(f"{coeff}*s^{k}")
        return " + ".join(parts)

    def __repr__(self):
        return f"ExactScalar({self})"


def q_int(n: int) -> ExactScalar:
    """Exact q-integer [n] = sum of s^(2(n-1-2i)) for i < n, with [-n] = -[n]."""
    if not isinstance(n, int):
        raise TypeError("q_int takes an integer")
    if n < 0:
        return -q_int(-n)
    return ExactScalar({2 * (n - 1 - 2 * i): (Fraction(1), Fraction(0)) for i in range(n)})


def q_factor(two_m: int) -> ExactScalar:
    """Exact q^(m) for the half-integer m = two_m/2."""
    return ExactScalar.s_power(int(two_m))

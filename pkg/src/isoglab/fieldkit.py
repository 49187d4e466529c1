"""Prime fields, extension fields and dense univariate polynomials.

Fields are lightweight objects that do arithmetic on *raw* representations
(an ``int`` for F_p, a ``tuple`` of k ints for F_{p^k}).  ``FieldElement`` and
``ExtFieldElement`` wrap a raw value together with its field and give the
usual operator syntax; library internals work on raw values to stay fast.
"""

from __future__ import annotations

import os
from functools import cached_property, lru_cache
from itertools import product

from sympy import factorint, isprime

from .errors import (
    DivisionByZero,
    FieldMismatch,
    FieldTooLarge,
    NotIrreducible,
    NotPrime,
)
from .rng import SeededRng

#: Degree reported for the zero polynomial.
DEG_ZERO = -1

#: Largest field that exhaustive scans are allowed to touch.
MAX_SCAN = 1 << 22


def max_ext_elements() -> int:
    """Global cap on enumerated extension-field sizes (ISOGLAB_MAX_EXT)."""
    value = os.environ.get("ISOGLAB_MAX_EXT")
    return int(value) if value else MAX_SCAN


# ---------------------------------------------------------------------------
# fields


class PrimeField:
    degree = 1

    def __init__(self, p: int):
        p = int(p)
        if p >= 1 << 62:
            raise NotPrime(f"modulus {p} is not below 2^62")
        if not isprime(p):
            raise NotPrime(f"{p} is not prime")
        self.p = p
        self.characteristic = p
        self.order = p
        self.prime_field = self
        self.zero = 0
        self.one = 1

    def __repr__(self):
        return f"GF({self.p})"

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))

    def __call__(self, value) -> "FieldElement":
        if isinstance(value, FieldElement):
            self.check(value)
            return value
        return FieldElement(self, int(value) % self.p)

    def check(self, el):
        if el.field != self:
            raise FieldMismatch(f"{el.field!r} element used in {self!r}")

    # raw arithmetic
    def from_int(self, n: int) -> int:
        return n % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def neg(self, a):
        return -a % self.p

    def mul(self, a, b):
        return a * b % self.p

    def smul(self, n: int, a):
        return n * a % self.p

    def inv(self, a):
        if a == 0:
            raise DivisionByZero(f"inverse of 0 in GF({self.p})")
        return pow(a, -1, self.p)

    def div(self, a, b):
        return a * self.inv(b) % self.p

    def pow(self, a, e: int):
        if e < 0:
            return pow(self.inv(a), -e, self.p)
        return pow(a, e, self.p)

    def is_zero(self, a) -> bool:
        return a == 0

    def is_square(self, a) -> bool:
        return a == 0 or pow(a, (self.p - 1) // 2, self.p) == 1

    def sqrt(self, a):
        """Raw square root (smaller of the pair) or None."""
        return _tonelli_shanks(self, a)

    def frobenius(self, a, times: int = 1):
        return a

    def key(self, a):
        return (a,)

    def label(self, a) -> str:
        return str(a)

    def elements(self):
        return range(self.p)

    def random(self, rng: SeededRng):
        return rng.randbelow(self.p)

    def nonsquare(self):
        """Smallest non-residue in the order 2, 3, 4, ..."""
        return _smallest_nonsquare(self.p)

    def embed(self, a):
        return a

    def base_coords(self, a):
        return (a,)

    def parse(self, text: str):
        return int(text) % self.p


@lru_cache(maxsize=None)
def _smallest_nonsquare(p: int) -> int:
    for z in range(2, p):
        if pow(z, (p - 1) // 2, p) == p - 1:
            return z
    raise NotPrime(f"no non-residue mod {p}")


class ExtField:
    """F_p[z]/(modulus) for a monic irreducible modulus of degree k >= 2."""

    def __init__(self, base: PrimeField, modulus, *, check: bool = True):
        if isinstance(modulus, Poly):
            if modulus.field != base:
                raise FieldMismatch("modulus must have prime-field coefficients")
            mod = list(modulus.coeffs)
        else:
            mod = [c % base.p for c in modulus]
        while mod and mod[-1] == 0:
            mod.pop()
        k = len(mod) - 1
        if k < 1 or mod[-1] != 1:
            raise NotIrreducible("modulus must be monic of degree >= 1")
        if check and not is_irreducible(Poly(base, mod)):
            raise NotIrreducible(f"{Poly(base, mod)} is reducible over {base!r}")
        self.base = base
        self.prime_field = base
        self.p = base.p
        self.characteristic = base.p
        self.k = k
        self.degree = k
        self.order = base.p ** k
        self.modulus = tuple(mod)
        self.zero = (0,) * k
        self.one = (1,) + (0,) * (k - 1)
        # reduction rule z^k = -sum_{i<k} m_i z^i
        self._red = tuple(-c % base.p for c in mod[:k])
        self.var = "i" if k == 2 and mod == [base.p - _canonical_qnr(base.p), 0, 1] else "z"

    def __repr__(self):
        return f"GF({self.p}^{self.k})"

    def __eq__(self, other):
        return isinstance(other, ExtField) and other.modulus == self.modulus and other.p == self.p

    def __hash__(self):
        return hash(("GFext", self.p, self.modulus))

    def __call__(self, value) -> "ExtFieldElement":
        if isinstance(value, ExtFieldElement):
            self.check(value)
            return value
        return ExtFieldElement(self, self.coerce(value))

    def check(self, el):
        if el.field != self:
            raise FieldMismatch(f"{el.field!r} element used in {self!r}")

    def coerce(self, value):
        if isinstance(value, FieldElement):
            if value.field != self.base:
                raise FieldMismatch("prime-field element from a different characteristic")
            return self.embed(value.value)
        if isinstance(value, int):
            return self.embed(value)
        if isinstance(value, Poly):
            return self._reduce(list(value.coeffs))
        coeffs = [int(c) % self.p for c in value]
        return self._reduce(coeffs)

    def from_int(self, n: int):
        return self.embed(n % self.p)

    def embed(self, a: int):
        return (a % self.p,) + (0,) * (self.k - 1)

    def base_coords(self, a):
        return a

    def _reduce(self, c):
        p, k, red = self.p, self.k, self._red
        c = [x % p for x in c]
        for top in range(len(c) - 1, k - 1, -1):
            t = c[top]
            if t:
                off = top - k
                for i in range(k):
                    c[off + i] = (c[off + i] + t * red[i]) % p
        c = c[:k] + [0] * (k - len(c))
        return tuple(c)

    def add(self, a, b):
        p = self.p
        return tuple((x + y) % p for x, y in zip(a, b))

    def sub(self, a, b):
        p = self.p
        return tuple((x - y) % p for x, y in zip(a, b))

    def neg(self, a):
        p = self.p
        return tuple(-x % p for x in a)

    def smul(self, n: int, a):
        p = self.p
        return tuple(n * x % p for x in a)

    def mul(self, a, b):
        p = self.p
        if self.k == 2:
            a0, a1 = a
            b0, b1 = b
            r0, r1 = self._red
            hi = a1 * b1
            return ((a0 * b0 + hi * r0) % p, (a0 * b1 + a1 * b0 + hi * r1) % p)
        k = self.k
        prod = [0] * (2 * k - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] += x * y
        return self._reduce(prod)

    def inv(self, a):
        if not any(a):
            raise DivisionByZero(f"inverse of 0 in {self!r}")
        p = self.p
        if self.k == 2:
            a0, a1 = a
            r0, r1 = self._red
            # conjugate of a0 + a1 z is (a0 + a1 r1) - a1 z
            c0 = (a0 + a1 * r1) % p
            norm = (a0 * c0 - a1 * a1 * r0) % p
            ninv = pow(norm, -1, p)
            return (c0 * ninv % p, -a1 * ninv % p)
        return self.pow(a, self.order - 2)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a, e: int):
        if e < 0:
            a, e = self.inv(a), -e
        result = self.one
        while e:
            if e & 1:
                result = self.mul(result, a)
            e >>= 1
            if e:
                a = self.mul(a, a)
        return result

    def is_zero(self, a) -> bool:
        return not any(a)

    def is_square(self, a) -> bool:
        return not any(a) or self.pow(a, (self.order - 1) // 2) == self.one

    def sqrt(self, a):
        return _tonelli_shanks(self, a)

    def frobenius(self, a, times: int = 1):
        return self.pow(a, self.p ** (times % self.k))

    def key(self, a):
        return tuple(a)

    def label(self, a) -> str:
        if self.k == 2:
            return f"{a[0]}+{a[1]}*{self.var}"
        return "+".join(f"{c}*z^{i}" if i else str(c) for i, c in enumerate(a))

    def parse(self, text: str):
        text = text.replace(" ", "")
        if self.k == 2 and "*" in text:
            c0, rest = text.split("+", 1)
            c1 = rest.split("*", 1)[0]
            return (int(c0) % self.p, int(c1) % self.p)
        if "+" not in text and "*" not in text:
            return self.embed(int(text))
        coeffs = [0] * self.k
        for term in text.split("+"):
            if "*z^" in term:
                c, e = term.split("*z^")
                coeffs[int(e)] = int(c) % self.p
            else:
                coeffs[0] = int(term) % self.p
        return tuple(coeffs)

    def elements(self):
        for digits in product(range(self.p), repeat=self.k):
            yield tuple(reversed(digits))

    def random(self, rng: SeededRng):
        return tuple(rng.randbelow(self.p) for _ in range(self.k))

    def nonsquare(self):
        """First non-square in canonical element order starting from 2."""
        for a in self.elements():
            if any(a) and a != self.one and not self.is_square(a):
                return a
        raise NotIrreducible("no non-square found")

    def in_prime_field(self, a) -> bool:
        return not any(a[1:])

    def element_at(self, a) -> "ExtFieldElement":
        return ExtFieldElement(self, a)


def _tonelli_shanks(field, a):
    """Square root of a raw element; returns the smaller root by key, or None."""
    if field.is_zero(a):
        return field.zero
    if not field.is_square(a):
        return None
    q = field.order
    s, odd = 0, q - 1
    while odd % 2 == 0:
        s, odd = s + 1, odd // 2
    z = field.nonsquare()
    m = s
    c = field.pow(z, odd)
    t = field.pow(a, odd)
    r = field.pow(a, (odd + 1) // 2)
    while t != field.one:
        i, t2 = 0, t
        while t2 != field.one:
            t2 = field.mul(t2, t2)
            i += 1
        b = c
        for _ in range(m - i - 1):
            b = field.mul(b, b)
        r = field.mul(r, b)
        c = field.mul(b, b)
        t = field.mul(t, c)
        m = i
    other = field.neg(r)
    return min(r, other, key=field.key)


@lru_cache(maxsize=None)
def _canonical_qnr(p: int) -> int:
    return p - 1 if p % 4 == 3 else _smallest_nonsquare(p)


@lru_cache(maxsize=None)
def gf(p: int, k: int = 1):
    """Canonical field of order p^k.

    k = 2 uses z^2 = -1 when p = 3 (mod 4) and z^2 = n (n the smallest
    non-residue) otherwise; higher k use the lexicographically smallest monic
    irreducible polynomial.
    """
    base = PrimeField(p)
    if k == 1:
        return base
    if k == 2:
        return ExtField(base, [-_canonical_qnr(p) % p, 0, 1], check=False)
    return ExtField(base, smallest_irreducible(base, k).coeffs, check=False)


def smallest_irreducible(field: PrimeField, k: int) -> "Poly":
    p = field.p
    for digits in product(range(p), repeat=k):
        coeffs = list(reversed(digits)) + [1]
        if coeffs[0] == 0:
            continue
        f = Poly(field, coeffs)
        if is_irreducible(f):
            return f
    raise NotIrreducible(f"no irreducible of degree {k} over GF({p})")


# ---------------------------------------------------------------------------
# elements


class _Element:
    __slots__ = ("field", "_raw")

    def _other(self, other):
        if isinstance(other, _Element):
            if other.field != self.field:
                raise FieldMismatch(f"cannot mix {self.field!r} and {other.field!r}")
            return other._raw
        if isinstance(other, int):
            return self.field.from_int(other)
        return NotImplemented

    def _wrap(self, raw):
        return type(self)(self.field, raw)

    def __add__(self, other):
        o = self._other(other)
        return self._wrap(self.field.add(self._raw, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        return self._wrap(self.field.sub(self._raw, o))

    def __rsub__(self, other):
        o = self._other(other)
        return self._wrap(self.field.sub(o, self._raw))

    def __mul__(self, other):
        o = self._other(other)
        return self._wrap(self.field.mul(self._raw, o))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        return self._wrap(self.field.div(self._raw, o))

    def __rtruediv__(self, other):
        o = self._other(other)
        return self._wrap(self.field.div(o, self._raw))

    def __neg__(self):
        return self._wrap(self.field.neg(self._raw))

    def __pow__(self, e: int):
        if e.bit_length() > 128:
            raise ValueError("exponent larger than 2^128")
        return self._wrap(self.field.pow(self._raw, e))

    def inverse(self):
        return self._wrap(self.field.inv(self._raw))

    def is_zero(self):
        return self.field.is_zero(self._raw)

    def is_square(self):
        return self.field.is_square(self._raw)

    def sqrt(self):
        r = self.field.sqrt(self._raw)
        return None if r is None else self._wrap(r)

    def __eq__(self, other):
        if isinstance(other, _Element):
            return self.field == other.field and self._raw == other._raw
        if isinstance(other, int):
            return self._raw == self.field.from_int(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.field, self._raw))

    def __lt__(self, other):
        return self.field.key(self._raw) < self.field.key(self._other(other))

    def __str__(self):
        return self.field.label(self._raw)

    def __repr__(self):
        return f"{self.field!r}({self})"

    @property
    def raw(self):
        return self._raw


class FieldElement(_Element):
    __slots__ = ()

    def __init__(self, field: PrimeField, value: int):
        self.field = field
        self._raw = value % field.p

    @property
    def value(self) -> int:
        return self._raw

    def __int__(self):
        return self._raw

    def legendre(self) -> int:
        return legendre(self)


class ExtFieldElement(_Element):
    __slots__ = ()

    def __init__(self, field: ExtField, rep):
        self.field = field
        self._raw = tuple(rep)

    @property
    def rep(self) -> "Poly":
        return Poly(self.field.base, list(self._raw))


def fp_arith(a, b, op: str):
    """Dispatch table for the basic field operations."""
    if op == "neg":
        return -a
    if op == "inv":
        return a.inverse()
    if op == "pow":
        return a ** int(b)
    if isinstance(b, _Element) and b.field != a.field:
        raise FieldMismatch(f"cannot mix {a.field!r} and {b.field!r}")
    ops = {"add": a.__add__, "sub": a.__sub__, "mul": a.__mul__, "div": a.__truediv__}
    return ops[op](b)


def legendre(a) -> int:
    """Quadratic character of a prime-field element: -1, 0 or +1."""
    field = a.field
    if a.is_zero():
        return 0
    return 1 if field.is_square(a.raw) else -1


def legendre_int(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def kronecker(d: int, n: int) -> int:
    """Kronecker symbol (d | n) for a prime n, including n = 2."""
    if n == 2:
        if d % 2 == 0:
            return 0
        return 1 if d % 8 in (1, 7) else -1
    return legendre_int(d, n)


def sqrt_mod(a):
    """Square root of a field element, the smaller of the two, or None."""
    return a.sqrt()


# ---------------------------------------------------------------------------
# polynomials


class Poly:
    """Dense polynomial; ``coeffs[i]`` is the raw coefficient of x^i."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field, coeffs=()):
        self.field = field
        zero = field.zero
        c = list(coeffs)
        if c and isinstance(c[0], _Element):
            c = [field.coerce(x) if isinstance(field, ExtField) else field(x).raw for x in c]
        elif c and isinstance(field, ExtField) and isinstance(c[0], int):
            c = [field.from_int(x) for x in c]
        elif c and isinstance(field, PrimeField):
            c = [x % field.p for x in c]
        while c and c[-1] == zero:
            c.pop()
        self.coeffs = tuple(c)

    @classmethod
    def _raw(cls, field, coeffs):
        zero = field.zero
        while coeffs and coeffs[-1] == zero:
            coeffs.pop()
        obj = cls.__new__(cls)
        obj.field = field
        obj.coeffs = tuple(coeffs)
        return obj

    @classmethod
    def x(cls, field):
        return cls._raw(field, [field.zero, field.one])

    @classmethod
    def const(cls, field, c):
        return cls._raw(field, [c])

    @classmethod
    def from_roots(cls, field, roots):
        f = cls.const(field, field.one)
        for r in roots:
            f = f * cls._raw(field, [field.neg(r), field.one])
        return f

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def lc(self):
        return self.coeffs[-1] if self.coeffs else self.field.zero

    def is_monic(self):
        return bool(self.coeffs) and self.coeffs[-1] == self.field.one

    def __getitem__(self, i):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else self.field.zero

    def __len__(self):
        return len(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.field == other.field and self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash((self.field, self.coeffs))

    def __repr__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == self.field.zero:
                continue
            cs = self.field.label(c)
            if isinstance(self.field, ExtField):
                cs = f"({cs})"
            if i == 0:
                terms.append(cs)
            else:
                mon = "x" if i == 1 else f"x^{i}"
                terms.append(mon if c == self.field.one else f"{cs}*{mon}")
        return " + ".join(terms)

    def _check(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(self.field, self.field.from_int(other) if isinstance(other, int) else other)
        if other.field != self.field:
            raise FieldMismatch("polynomials over different fields")
        return other

    def __add__(self, other):
        other = self._check(other)
        F = self.field
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = F.add(out[i], c)
        return Poly._raw(F, out)

    __radd__ = __add__

    def __neg__(self):
        F = self.field
        return Poly._raw(F, [F.neg(c) for c in self.coeffs])

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        other = self._check(other)
        F = self.field
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly._raw(F, [])
        if isinstance(F, PrimeField):
            p = F.p
            out = [0] * (len(a) + len(b) - 1)
            for i, x in enumerate(a):
                if x:
                    for j, y in enumerate(b):
                        out[i + j] += x * y
            return Poly._raw(F, [c % p for c in out])
        out = [F.zero] * (len(a) + len(b) - 1)
        add, mul, zero = F.add, F.mul, F.zero
        for i, x in enumerate(a):
            if x != zero:
                for j, y in enumerate(b):
                    out[i + j] = add(out[i + j], mul(x, y))
        return Poly._raw(F, out)

    __rmul__ = __mul__

    def scale(self, c):
        F = self.field
        return Poly._raw(F, [F.mul(c, x) for x in self.coeffs])

    def __pow__(self, e: int):
        result = Poly.const(self.field, self.field.one)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def divmod(self, other):
        other = self._check(other)
        if other.is_zero():
            raise DivisionByZero("polynomial division by zero")
        F = self.field
        n = len(other.coeffs) - 1
        r = list(self.coeffs)
        if len(r) <= n:
            return Poly._raw(F, []), Poly._raw(F, r)
        inv_lc = F.inv(other.coeffs[-1])
        q = [F.zero] * (len(r) - n)
        b = other.coeffs
        if isinstance(F, PrimeField):
            p = F.p
            for i in range(len(r) - 1, n - 1, -1):
                c = r[i] * inv_lc % p
                if c:
                    q[i - n] = c
                    off = i - n
                    for j in range(n + 1):
                        r[off + j] = (r[off + j] - c * b[j]) % p
        else:
            sub, mul, zero = F.sub, F.mul, F.zero
            for i in range(len(r) - 1, n - 1, -1):
                c = mul(r[i], inv_lc)
                if c != zero:
                    q[i - n] = c
                    off = i - n
                    for j in range(n + 1):
                        r[off + j] = sub(r[off + j], mul(c, b[j]))
        return Poly._raw(F, q), Poly._raw(F, r[:n])

    def __divmod__(self, other):
        return self.divmod(other)

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def exact_div(self, other):
        q, r = self.divmod(other)
        if not r.is_zero():
            raise ArithmeticError("division is not exact")
        return q

    def monic(self):
        if not self.coeffs:
            return self
        return self.scale(self.field.inv(self.coeffs[-1]))

    def gcd(self, other):
        a, b = self, self._check(other)
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def xgcd(self, other):
        """(g, s, t) with s*self + t*other = g, g monic."""
        F = self.field
        r0, r1 = self, self._check(other)
        s0, s1 = Poly.const(F, F.one), Poly._raw(F, [])
        t0, t1 = Poly._raw(F, []), Poly.const(F, F.one)
        while not r1.is_zero():
            q, r = r0.divmod(r1)
            r0, r1 = r1, r
            s0, s1 = s1, s0 - q * s1
            t0, t1 = t1, t0 - q * t1
        if r0.is_zero():
            return r0, s0, t0
        c = F.inv(r0.lc())
        return r0.scale(c), s0.scale(c), t0.scale(c)

    def invmod(self, m):
        g, s, _ = self.xgcd(m)
        if g.degree != 0:
            raise DivisionByZero("polynomial not invertible modulo m")
        return s % m

    def powmod(self, e: int, m):
        result = Poly.const(self.field, self.field.one) % m
        base = self % m
        while e:
            if e & 1:
                result = (result * base) % m
            e >>= 1
            if e:
                base = (base * base) % m
        return result

    def derivative(self):
        F = self.field
        return Poly._raw(F, [F.smul(i, c) for i, c in enumerate(self.coeffs)][1:])

    def __call__(self, x):
        """Evaluate at a raw value of the coefficient field (Horner)."""
        F = self.field
        acc = F.zero
        for c in reversed(self.coeffs):
            acc = F.add(F.mul(acc, x), c)
        return acc

    def eval_in(self, field, x):
        """Evaluate at a raw value of an extension ``field`` of the coefficient field."""
        if field == self.field:
            return self(x)
        acc = field.zero
        for c in reversed(self.coeffs):
            acc = field.add(field.mul(acc, x), field.embed(c))
        return acc

    def compose(self, g):
        acc = Poly._raw(self.field, [])
        for c in reversed(self.coeffs):
            acc = acc * g + Poly.const(self.field, c)
        return acc


def poly_arith(f: Poly, g: Poly, op: str, modulus: Poly = None, exponent: int = None):
    if op == "add":
        return f + g
    if op == "mul":
        return f * g
    if op == "divmod":
        return f.divmod(g)
    if op == "gcd":
        return f.gcd(g)
    if op == "modexp":
        return f.powmod(exponent, g if modulus is None else modulus)
    raise ValueError(f"unknown op {op!r}")


# ---------------------------------------------------------------------------
# irreducibility, roots, factorization


def is_irreducible(f: Poly) -> bool:
    """Rabin's test over the coefficient field (of order q)."""
    if f.degree < 1:
        return False
    f = f.monic()
    d = f.degree
    if d == 1:
        return True
    q = f.field.order
    x = Poly.x(f.field)
    xq = x.powmod(q ** d, f) if d * q.bit_length() < 64 else _frobenius_power(x, q, d, f)
    if xq != x % f:
        return False
    for r in factorint(d):
        h = _frobenius_power(x, q, d // r, f)
        if (h - x).gcd(f).degree != 0:
            return False
    return True


def _frobenius_power(x: Poly, q: int, times: int, f: Poly) -> Poly:
    h = x % f
    for _ in range(times):
        h = h.powmod(q, f)
    return h


def _scan_guard(field):
    if field.order > MAX_SCAN:
        raise FieldTooLarge(f"{field!r} has more than 2^22 elements")


def enumerate_roots(f: Poly) -> list:
    """All roots in the coefficient field, ascending canonical order (raw values)."""
    F = f.field
    _scan_guard(F)
    if f.is_zero():
        raise ValueError("the zero polynomial vanishes everywhere")
    if f.degree <= 0:
        return []
    x = Poly.x(F)
    g = (x.powmod(F.order, f) - x).gcd(f)
    roots = [lin.coeffs[0] for lin in equal_degree_split(g, 1)]
    roots = [F.neg(r) for r in roots]
    return sorted(roots, key=F.key)


def enumerate_roots_scan(f: Poly) -> list:
    """Reference root finder: evaluates f at every field element."""
    F = f.field
    _scan_guard(F)
    return sorted((a for a in F.elements() if F.is_zero(f(a))), key=F.key)


def find_root(f: Poly):
    roots = enumerate_roots(f)
    return roots[0] if roots else None


def squarefree_part(f: Poly) -> Poly:
    d = f.derivative()
    if d.is_zero():
        # f is a p-th power; desk-scale callers never hit this path with useful data
        return f.monic()
    return f.exact_div(f.gcd(d)).monic()


def distinct_degree_factor(f: Poly):
    """[(d, g_d)] where g_d is the product of the degree-d irreducible factors."""
    F = f.field
    q = F.order
    x = Poly.x(F)
    f = f.monic()
    out = []
    h = x % f
    d = 0
    while f.degree >= 2 * (d + 1):
        d += 1
        h = h.powmod(q, f)
        g = (h - x).gcd(f)
        if g.degree > 0:
            out.append((d, g))
            f = f.exact_div(g)
            h = h % f
    if f.degree > 0:
        out.append((f.degree, f))
    return out


def equal_degree_split(f: Poly, d: int, rng: SeededRng = None) -> list:
    """Cantor-Zassenhaus split of a squarefree product of degree-d irreducibles."""
    F = f.field
    f = f.monic()
    if f.degree <= 0:
        return []
    if f.degree == d:
        return [f]
    if F.characteristic == 2:
        raise NotImplementedError("characteristic 2")
    rng = rng or SeededRng(0x5EED + f.degree)
    q = F.order
    e = (q ** d - 1) // 2
    one = Poly.const(F, F.one)
    while True:
        a = Poly._raw(F, [F.random(rng) for _ in range(f.degree)])
        if a.degree <= 0:
            continue
        g = a.gcd(f)
        if 0 < g.degree < f.degree:
            break
        g = (a.powmod(e, f) - one).gcd(f)
        if 0 < g.degree < f.degree:
            break
    return equal_degree_split(g, d, rng) + equal_degree_split(f.exact_div(g), d, rng)


def factor_squarefree(f: Poly) -> list:
    """Monic irreducible factors of a squarefree polynomial, sorted canonically."""
    out = []
    for d, g in distinct_degree_factor(f):
        out.extend(equal_degree_split(g, d))
    return sorted(out, key=poly_key)


def poly_key(f: Poly):
    F = f.field
    return (f.degree, tuple(F.key(c) for c in reversed(f.coeffs)))

"""Prime-field arithmetic GF(q) and the randomness sources used to draw symbols."""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DivisionByZero, ModulusMismatch, SourceExhausted

# Deterministic Miller-Rabin witnesses, valid for every n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_INV_TABLE_LIMIT = 1 << 16


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    n = max(n, 2)
    while not is_prime(n):
        n += 1
    return n


def egcd_inverse(a: int, q: int) -> int:
    """Inverse of ``a`` modulo ``q`` by the extended Euclidean algorithm."""
    a %= q
    if a == 0:
        raise DivisionByZero(f"0 has no inverse in GF({q})")
    r0, r1, s0, s1 = q, a, 0, 1
    while r1:
        quot = r0 // r1
        r0, r1 = r1, r0 - quot * r1
        s0, s1 = s1, s0 - quot * s1
    return s0 % q


@dataclass(frozen=True)
class GF:
    """The prime field of order ``q``; plays the role of the field modulus."""

    q: int

    def __post_init__(self):
        if not isinstance(self.q, (int, np.integer)) or not is_prime(int(self.q)):
            raise ValueError(f"field order must be prime, got {self.q!r}")
        object.__setattr__(self, "q", int(self.q))

    def __call__(self, value) -> FieldElement:
        return FieldElement(int(value) % self.q, self)

    def __repr__(self):
        return f"GF({self.q})"

    @cached_property
    def _inv_table(self) -> np.ndarray | None:
        if self.q > _INV_TABLE_LIMIT:
            return None
        table = np.zeros(self.q, dtype=np.int64)
        for a in range(1, self.q):
            table[a] = egcd_inverse(a, self.q)
        return table

    def inv(self, a: int) -> int:
        a %= self.q
        if a == 0:
            raise DivisionByZero(f"0 has no inverse in GF({self.q})")
        if self.q <= 64:
            return egcd_inverse(a, self.q)
        table = self._inv_table
        return int(table[a]) if table is not None else egcd_inverse(a, self.q)

    @property
    def width_bits(self) -> int:
        return (self.q - 1).bit_length()

    def elements(self):
        return [FieldElement(v, self) for v in range(self.q)]


class FieldElement:
    """An immutable element of GF(q)."""

    __slots__ = ("value", "field")

    def __init__(self, value: int, field: GF):
        if not 0 <= value < field.q:
            raise ValueError(f"{value} is not reduced modulo {field.q}")
        object.__setattr__(self, "value", int(value))
        object.__setattr__(self, "field", field)

    def __setattr__(self, name, value):
        raise AttributeError("FieldElement is immutable")

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field.q != self.field.q:
                raise ModulusMismatch(f"GF({self.field.q}) vs GF({other.field.q})")
            return other.value
        if isinstance(other, (int, np.integer)):
            return int(other) % self.field.q
        return NotImplemented

    def _new(self, v: int) -> FieldElement:
        return FieldElement(v % self.field.q, self.field)

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(self.value - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(o - self.value)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(self.value * o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._new(self.value * self.field.inv(o))

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._new(o * self.field.inv(self.value))

    def __neg__(self):
        return self._new(-self.value)

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return self._new(pow(self.value, e, self.field.q))

    def inverse(self) -> FieldElement:
        return self._new(self.field.inv(self.value))

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field.q == other.field.q and self.value == other.value
        if isinstance(other, (int, np.integer)):
            return self.value == int(other) % self.field.q
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.field.q))

    def __int__(self):
        return self.value

    __index__ = __int__

    def __repr__(self):
        return f"{self.value} (mod {self.field.q})"


def arith(op: str, a: FieldElement, b=None) -> FieldElement:
    """Apply ``op`` in {add, sub, mul, neg, inv, pow}; ``b`` is an exponent for pow."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "neg":
        return -a
    if op == "inv":
        return a.inverse()
    if op == "pow":
        return a ** int(b)
    raise ValueError(f"unknown field operation {op!r}")


# -- randomness ---------------------------------------------------------------


class RandomnessSource:
    """Produces unbiased ``nbits``-bit words; subclasses choose where they come from."""

    def words(self, nbits: int, count: int) -> np.ndarray:
        raise NotImplementedError


class SeededSource(RandomnessSource):
    """Deterministic source for tests and reproducible encodes."""

    def __init__(self, seed: int):
        self.seed = seed
        self._gen = np.random.Generator(np.random.PCG64(seed))

    def words(self, nbits, count):
        return self._gen.integers(0, 1 << nbits, size=count, dtype=np.uint64).astype(np.int64)


class SystemSource(RandomnessSource):
    """OS entropy (``os.urandom``)."""

    def words(self, nbits, count):
        raw = np.frombuffer(os.urandom(8 * count), dtype=np.uint64)
        return (raw & np.uint64((1 << nbits) - 1)).astype(np.int64)


class FixedSource(RandomnessSource):
    """Replays a fixed list of words, then raises :class:`SourceExhausted`."""

    def __init__(self, values):
        self._values = [int(v) for v in values]
        self._pos = 0

    def words(self, nbits, count):
        if self._pos + count > len(self._values):
            raise SourceExhausted(f"needed {count} more words, {len(self._values) - self._pos} left")
        out = self._values[self._pos:self._pos + count]
        self._pos += count
        mask = (1 << nbits) - 1
        return np.array([v & mask for v in out], dtype=np.int64)


def uniform_vector(src: RandomnessSource, field: GF, count: int) -> np.ndarray:
    """``count`` independent uniform symbols of ``field`` by rejection sampling."""
    nbits = max(field.width_bits, 1)
    out = np.empty(count, dtype=np.int64)
    filled = 0
    while filled < count:
        need = count - filled
        draw = src.words(nbits, need)
        good = draw[draw < field.q]
        out[filled:filled + good.size] = good
        filled += good.size
    return out


def uniform_sample(src: RandomnessSource, field: GF) -> FieldElement:
    return FieldElement(int(uniform_vector(src, field, 1)[0]), field)

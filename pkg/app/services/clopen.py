"""
Clopen service: input bit streams, clopen families X(a, b, c, d) decided by a
finite prefix, and the Cantor pairing used by the bit-test family.
"""

import math
import threading
from typing import Callable, Optional

from app.models.schemas import BitStreamSpec, ClopenSpec

# ── Pairing ──


def cantor_pair(x: int, y: int) -> int:
    return (x + y) * (x + y + 1) // 2 + y


def cantor_unpair(z: int) -> tuple[int, int]:
    d = (math.isqrt(8 * z + 1) - 1) // 2
    y = z - d * (d + 1) // 2
    return d - y, y


def cantor4(a: int, b: int, c: int, d: int) -> int:
    """π(a, π(b, π(c, d)))."""
    return cantor_pair(a, cantor_pair(b, cantor_pair(c, d)))


def uncantor4(z: int) -> tuple[int, int, int, int]:
    a, rest = cantor_unpair(z)
    b, rest = cantor_unpair(rest)
    c, d = cantor_unpair(rest)
    return a, b, c, d


# ── Bit streams ──


class BitStream:
    """Read-only x ∈ {0,1}^ℕ."""

    def bit(self, i: int) -> int:
        raise NotImplementedError

    def prefix(self, n: int) -> list[int]:
        return [self.bit(i) for i in range(n)]


class PeriodicBitStream(BitStream):
    """A literal prefix followed by a repeated period."""

    def __init__(self, prefix: str = "", period: str = "0"):
        if not period:
            raise ValueError("period must be non-empty")
        self._prefix = [int(ch) for ch in prefix]
        self._period = [int(ch) for ch in period]

    def bit(self, i: int) -> int:
        if i < 0:
            raise IndexError(i)
        if i < len(self._prefix):
            return self._prefix[i]
        return self._period[(i - len(self._prefix)) % len(self._period)]


class FunctionBitStream(BitStream):
    """x[i] = fn(i); fn must be total and deterministic."""

    def __init__(self, fn: Callable[[int], int]):
        self._fn = fn

    def bit(self, i: int) -> int:
        if i < 0:
            raise IndexError(i)
        return 1 if self._fn(i) else 0


class CountingBitStream(BitStream):
    """Wraps a stream and records how long a prefix has been read (max index + 1)."""

    def __init__(self, inner: BitStream):
        self.inner = inner
        self.consumed = 0
        self.queries = 0
        self._lock = threading.Lock()

    def bit(self, i: int) -> int:
        with self._lock:
            self.queries += 1
            if i + 1 > self.consumed:
                self.consumed = i + 1
        return self.inner.bit(i)

    def reset(self) -> None:
        with self._lock:
            self.consumed = 0
            self.queries = 0


# ── Clopen families ──


class ClopenFamily:
    """X(a, b, c, d): membership reads only the first prefix_len(a, b, c, d) bits of x."""

    def prefix_len(self, a: int, b: int, c: int, d: int) -> int:
        raise NotImplementedError

    def prefix_bound(self, a_max: int, b_max: int, c_max: int, d_max: int) -> int:
        """Largest prefix_len over the box [0, a_max] × ... × [0, d_max]."""
        return max(
            self.prefix_len(a, b, c, d)
            for a in range(a_max + 1)
            for b in range(b_max + 1)
            for c in range(c_max + 1)
            for d in range(d_max + 1)
        )

    def member(self, a: int, b: int, c: int, d: int, x: BitStream) -> bool:
        raise NotImplementedError


class ConstFamily(ClopenFamily):
    def __init__(self, value: bool):
        self.value = value

    def prefix_len(self, a: int, b: int, c: int, d: int) -> int:
        return 0

    def prefix_bound(self, a_max: int, b_max: int, c_max: int, d_max: int) -> int:
        return 0

    def member(self, a: int, b: int, c: int, d: int, x: BitStream) -> bool:
        return self.value


class BitTestFamily(ClopenFamily):
    """x ∈ X(a, b, c, d) iff x[cantor4(a, b, c, d)] = 1."""

    def prefix_len(self, a: int, b: int, c: int, d: int) -> int:
        return cantor4(a, b, c, d) + 1

    def prefix_bound(self, a_max: int, b_max: int, c_max: int, d_max: int) -> int:
        return cantor4(a_max, b_max, c_max, d_max) + 1

    def member(self, a: int, b: int, c: int, d: int, x: BitStream) -> bool:
        return x.bit(cantor4(a, b, c, d)) == 1


class TableFamily(ClopenFamily):
    """Finitely many explicit memberships; every other index gets `default`."""

    def __init__(self, entries: dict[tuple[int, int, int, int], bool], default: bool = True):
        self.entries = dict(entries)
        self.default = default

    def prefix_len(self, a: int, b: int, c: int, d: int) -> int:
        return 0

    def prefix_bound(self, a_max: int, b_max: int, c_max: int, d_max: int) -> int:
        return 0

    def member(self, a: int, b: int, c: int, d: int, x: BitStream) -> bool:
        return self.entries.get((a, b, c, d), self.default)


class CallableFamily(ClopenFamily):
    """Membership from a function of (a, b, c, d, x) with a declared prefix bound."""

    def __init__(
        self,
        fn: Callable[[int, int, int, int, BitStream], bool],
        prefix_len: Optional[Callable[[int, int, int, int], int]] = None,
    ):
        self._fn = fn
        self._prefix_len = prefix_len or (lambda a, b, c, d: 0)

    def prefix_len(self, a: int, b: int, c: int, d: int) -> int:
        return self._prefix_len(a, b, c, d)

    def member(self, a: int, b: int, c: int, d: int, x: BitStream) -> bool:
        return self._fn(a, b, c, d, x)


# ── Ingestion ──


def family_from_spec(spec: ClopenSpec) -> ClopenFamily:
    if spec.kind == "const":
        return ConstFamily(spec.value)
    if spec.kind == "bit_test":
        return BitTestFamily()
    return TableFamily({(e.a, e.b, e.c, e.d): e.value for e in spec.entries}, spec.default)


def bitstream_from_spec(spec: BitStreamSpec) -> PeriodicBitStream:
    return PeriodicBitStream(spec.prefix, spec.period)

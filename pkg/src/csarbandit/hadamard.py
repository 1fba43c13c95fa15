"""Hadamard matrix constructions and the row-sign partitions used for sampling.

Constructible orders are closed under Kronecker products of

* Sylvester matrices, order 2**m;
* Paley type I, order p + 1 for a prime p = 3 (mod 4);
* Paley type II, order 2(q + 1) for a prime q = 1 (mod 4) (opt-in only).

Every matrix is returned in normalized form: first row and first column all +1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import InvalidGrouping, InvalidParams, NoOrderFound, NotConstructible

MAX_MULTIPLE = 64


@dataclass(frozen=True, eq=False)
class HadamardMatrix:
    entries: np.ndarray

    def __post_init__(self):
        h = np.array(self.entries, dtype=np.int64)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise InvalidParams("a Hadamard matrix must be square")
        h.setflags(write=False)
        object.__setattr__(self, "entries", h)

    @property
    def order(self) -> int:
        return self.entries.shape[0]

    def is_valid(self) -> bool:
        h = self.entries
        n = self.order
        return bool(
            np.all(np.abs(h) == 1)
            and np.array_equal(h @ h.T, n * np.eye(n, dtype=np.int64))
            and np.all(h[0] == 1)
        )

    def __eq__(self, other):
        if not isinstance(other, HadamardMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def __repr__(self):
        return f"HadamardMatrix(order={self.order})"

    def to_text(self) -> str:
        return "\n".join("".join("+" if x > 0 else "-" for x in row) for row in self.entries)


def _normalize(h: np.ndarray) -> np.ndarray:
    h = h * h[:, :1]
    return h * h[:1, :]


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def _jacobsthal(p: int) -> np.ndarray:
    residues = {(x * x) % p for x in range(1, p)}
    chi = np.array([0] + [1 if r in residues else -1 for r in range(1, p)], dtype=np.int64)
    idx = np.arange(p)
    return chi[(idx[None, :] - idx[:, None]) % p]


def sylvester(m: int) -> HadamardMatrix:
    if m < 0:
        raise InvalidParams("m must be nonnegative")
    h = np.ones((1, 1), dtype=np.int64)
    block = np.array([[1, 1], [1, -1]], dtype=np.int64)
    for _ in range(m):
        h = np.kron(h, block)
    return HadamardMatrix(h)


def paley_one(p: int) -> HadamardMatrix:
    if not is_prime(p) or p % 4 != 3:
        raise NotConstructible(f"Paley I needs a prime p = 3 (mod 4), got {p}")
    s = np.zeros((p + 1, p + 1), dtype=np.int64)
    s[0, 1:] = 1
    s[1:, 0] = -1
    s[1:, 1:] = _jacobsthal(p)
    return HadamardMatrix(_normalize(np.eye(p + 1, dtype=np.int64) + s))


def paley_two(q: int) -> HadamardMatrix:
    if not is_prime(q) or q % 4 != 1:
        raise NotConstructible(f"Paley II needs a prime q = 1 (mod 4), got {q}")
    c = np.zeros((q + 1, q + 1), dtype=np.int64)
    c[0, 1:] = 1
    c[1:, 0] = 1
    c[1:, 1:] = _jacobsthal(q)
    h = np.kron(c, np.array([[1, -1], [-1, -1]])) + np.kron(
        np.eye(q + 1, dtype=np.int64), np.array([[1, 1], [1, -1]])
    )
    return HadamardMatrix(_normalize(h))


def kronecker(a: HadamardMatrix, b: HadamardMatrix) -> HadamardMatrix:
    return HadamardMatrix(_normalize(np.kron(a.entries, b.entries)))


@lru_cache(maxsize=None)
def construct(order: int, paley_two_enabled: bool = False) -> HadamardMatrix | None:
    """A Hadamard matrix of exactly ``order``, or None if none is constructible."""
    if order < 1 or (order > 2 and order % 4):
        return None
    if order & (order - 1) == 0:
        return sylvester(order.bit_length() - 1)
    if is_prime(order - 1) and (order - 1) % 4 == 3:
        return paley_one(order - 1)
    if paley_two_enabled and order % 2 == 0:
        q = order // 2 - 1
        if is_prime(q) and q % 4 == 1:
            return paley_two(q)
    for a in range(2, order // 2 + 1):
        if order % a:
            continue
        left = construct(a, paley_two_enabled)
        right = construct(order // a, paley_two_enabled) if left is not None else None
        if right is not None:
            return kronecker(left, right)
    return None


def hadamard(order: int, paley_two_enabled: bool = False) -> HadamardMatrix:
    h = construct(order, paley_two_enabled)
    if h is None:
        raise NotConstructible(f"no construction available for order {order}")
    return h


@lru_cache(maxsize=None)
def smallest_order(k: int, max_multiple: int = MAX_MULTIPLE) -> tuple[int, HadamardMatrix]:
    """Smallest constructible order 2q that is a multiple of 2k."""
    if k < 1:
        raise InvalidParams("k must be >= 1")
    for c in range(1, max_multiple + 1):
        h = construct(2 * k * c)
        if h is not None:
            return 2 * k * c, h
    raise NoOrderFound(f"no constructible order 2k*c for k={k}, c <= {max_multiple}")


@dataclass(frozen=True)
class RowPartition:
    row: int
    plus: tuple[int, ...]
    minus: tuple[int, ...]


def row_partitions(h: HadamardMatrix) -> list[RowPartition]:
    """Column split per row; row 0 (all +1) splits into first/second half."""
    n = h.order
    half = n // 2
    parts = [RowPartition(0, tuple(range(half, n)), tuple(range(half)))]
    for i in range(1, n):
        row = h.entries[i]
        parts.append(
            RowPartition(
                i,
                tuple(int(j) for j in np.flatnonzero(row > 0)),
                tuple(int(j) for j in np.flatnonzero(row < 0)),
            )
        )
    return parts


def split_into_k_groups(partition: RowPartition, k: int):
    """Chunk each side, in ascending column order, into groups of exactly k."""
    side = len(partition.plus)
    if k < 1 or side % k or len(partition.minus) != side:
        raise InvalidGrouping(f"cannot split sides of size {side} into groups of {k}")

    def chunks(cols):
        cols = sorted(cols)
        return [tuple(cols[i : i + k]) for i in range(0, len(cols), k)]

    return chunks(partition.plus), chunks(partition.minus)

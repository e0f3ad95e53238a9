"""Finite groups as multiplication tables, plus a few named groups.

Elements are always the integers ``0..order-1``.  Named constructors also
attach ``elements``, a tuple of human-readable labels (permutation tuples
for symmetric groups, quaternion units for Q8, residues for C_n) that the
built-in character tables evaluate on.
"""

from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import CharacterTableError, GroupTableError


@dataclass(frozen=True, eq=False)
class GroupTable:
    mul: np.ndarray
    name: str = ""
    elements: tuple = field(default=())

    def __post_init__(self):
        mul = np.array(self.mul, dtype=np.int64)
        mul.setflags(write=False)
        object.__setattr__(self, "mul", mul)
        _validate_table(mul)

    @property
    def order(self) -> int:
        return self.mul.shape[0]

    @cached_property
    def identity(self) -> int:
        n = self.order
        return int(np.flatnonzero((self.mul == np.arange(n)[None, :]).all(axis=1))[0])

    @cached_property
    def inverse(self) -> np.ndarray:
        inv = np.argmax(self.mul == self.identity, axis=1)
        inv.setflags(write=False)
        return inv

    def conjugation(self, g: int) -> np.ndarray:
        """The inner automorphism x -> g x g^-1 as a permutation array."""
        return self.mul[self.mul[g], self.inverse[g]]

    def is_abelian(self) -> bool:
        return bool((self.mul == self.mul.T).all())

    def label(self, x: int):
        return self.elements[x] if self.elements else x


def _validate_table(mul: np.ndarray) -> None:
    if mul.ndim != 2 or mul.shape[0] != mul.shape[1] or mul.shape[0] == 0:
        raise GroupTableError("shape: table must be a non-empty square array")
    n = mul.shape[0]
    if mul.min() < 0 or mul.max() >= n:
        raise GroupTableError("closure: entry outside 0..order-1")
    ids = np.flatnonzero((mul == np.arange(n)[None, :]).all(axis=1))
    if len(ids) == 0 or not (mul[:, ids[0]] == np.arange(n)).all():
        raise GroupTableError("identity: no two-sided identity element")
    e = ids[0]
    left, right = (mul == e).any(axis=1), (mul == e).any(axis=0)
    if not (left.all() and right.all()):
        bad = int(np.flatnonzero(~(left & right))[0])
        raise GroupTableError(f"inverse: element {bad} has no inverse", witness=[bad])
    idx = np.arange(n)
    lhs = mul[mul[:, :, None], idx[None, None, :]]
    rhs = mul[idx[:, None, None], mul[None, :, :]]
    if not np.array_equal(lhs, rhs):
        a, b, c = (int(v) for v in np.argwhere(lhs != rhs)[0])
        raise GroupTableError(
            f"associativity: ({a}*{b})*{c} != {a}*({b}*{c})", witness=[a, b, c]
        )


def from_elements(elements: Sequence, op: Callable, name: str = "") -> GroupTable:
    index = {x: i for i, x in enumerate(elements)}
    mul = [[index[op(x, y)] for y in elements] for x in elements]
    return GroupTable(np.array(mul), name=name, elements=tuple(elements))


def cyclic(n: int) -> GroupTable:
    if n < 1:
        raise GroupTableError("cyclic group order must be positive")
    return from_elements(range(n), lambda x, y: (x + y) % n, name=f"C{n}")


def symmetric(n: int) -> GroupTable:
    """S_n on {0..n-1}, elements in lexicographic order; (xy)(i) = x(y(i))."""
    if not 1 <= n <= 5:
        raise GroupTableError("built-in symmetric groups cover n <= 5")
    perms = list(itertools.permutations(range(n)))
    return from_elements(perms, lambda x, y: tuple(x[i] for i in y), name=f"S{n}")


def dihedral(n: int) -> GroupTable:
    """Symmetries of the n-gon; elements (k, s) mean r^k s^s."""
    elems = [(k, s) for s in (0, 1) for k in range(n)]

    def op(a, b):
        (k1, s1), (k2, s2) = a, b
        return ((k1 + (-k2 if s1 else k2)) % n, s1 ^ s2)

    return from_elements(elems, op, name=f"D{n}")


_QUAT_UNITS = ("1", "i", "j", "k")
# unit products: (a, b) -> (sign, unit)
_QUAT_PROD = {
    ("1", "1"): (1, "1"), ("1", "i"): (1, "i"), ("1", "j"): (1, "j"), ("1", "k"): (1, "k"),
    ("i", "1"): (1, "i"), ("i", "i"): (-1, "1"), ("i", "j"): (1, "k"), ("i", "k"): (-1, "j"),
    ("j", "1"): (1, "j"), ("j", "i"): (-1, "k"), ("j", "j"): (-1, "1"), ("j", "k"): (1, "i"),
    ("k", "1"): (1, "k"), ("k", "i"): (1, "j"), ("k", "j"): (-1, "i"), ("k", "k"): (-1, "1"),
}


def quaternion() -> GroupTable:
    elems = [(s, u) for u in _QUAT_UNITS for s in (1, -1)]

    def op(a, b):
        sign, unit = _QUAT_PROD[(a[1], b[1])]
        return (a[0] * b[0] * sign, unit)

    return from_elements(elems, op, name="Q8")


def named_group(name: str) -> GroupTable:
    key = name.strip().upper()
    if key == "Q8":
        return quaternion()
    kind, _, num = key[0], None, key[1:]
    if not num.isdigit():
        raise GroupTableError(f"unknown group name {name!r}", witness={"name": name})
    n = int(num)
    if kind == "C":
        return cyclic(n)
    if kind == "S":
        return symmetric(n)
    if kind == "D":
        return dihedral(n)
    raise GroupTableError(f"unknown group name {name!r}", witness={"name": name})


# ---------------------------------------------------------------------------
# class functions for the built-in character tables
# ---------------------------------------------------------------------------

def _cycle_type(perm: tuple) -> tuple:
    seen, lengths = set(), []
    for start in range(len(perm)):
        if start in seen:
            continue
        length, x = 0, start
        while x not in seen:
            seen.add(x)
            x = perm[x]
            length += 1
        lengths.append(length)
    return tuple(sorted(lengths, reverse=True))


def _sign(perm: tuple) -> int:
    return (-1) ** sum(length - 1 for length in _cycle_type(perm))


def _fixed(perm: tuple) -> int:
    return sum(1 for i, p in enumerate(perm) if i == p)


_S4_TWO_DIM = {(1, 1, 1, 1): 2, (2, 1, 1): 0, (2, 2): 2, (3, 1): -1, (4,): 0}


def class_functions(g: GroupTable) -> list[Callable]:
    """Irreducible characters of a named group as functions of element labels.

    Only C_n, S3, S4 and Q8 are covered; anything else raises.
    """
    name = g.name
    if name.startswith("C") and name[1:].isdigit():
        n = g.order
        return [
            (lambda x, j=j: cmath.exp(2j * cmath.pi * j * x / n)) for j in range(n)
        ]
    if name == "S3":
        return [lambda p: 1, _sign, lambda p: _fixed(p) - 1]
    if name == "S4":
        return [
            lambda p: 1,
            _sign,
            lambda p: _S4_TWO_DIM[_cycle_type(p)],
            lambda p: _fixed(p) - 1,
            lambda p: _sign(p) * (_fixed(p) - 1),
        ]
    if name == "Q8":
        def linear(kernel_unit):
            return lambda q: 1 if q[1] in ("1", kernel_unit) else -1

        return [
            lambda q: 1,
            linear("i"),
            linear("j"),
            linear("k"),
            lambda q: {"1": 2 * q[0]}.get(q[1], 0),
        ]
    raise CharacterTableError(f"no built-in character table for {name!r}")

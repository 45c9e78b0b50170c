"""Finitely generated groups with canonical element encodings.

Every group exposes the same small surface: ``identity``, ``generators``,
``multiply``, ``invert`` and a self-delimiting byte encoding.  Elements are
plain immutable Python values (tuples and ints) so they hash and compare
cheaply; two elements are equal as group elements iff their encodings are
byte-equal.

Supported families: free abelian ``Z^d``, free groups ``F_k``, the discrete
Heisenberg group, finite cyclic groups (mostly as lamp groups), direct
products, and wreath products ``H wr G`` with switch-walk-switch generators.
"""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass
from typing import Any, Hashable, Sequence

Element = Hashable

_OFFSET = 1 << 63
_I64 = struct.Struct(">Q")
_U32 = struct.Struct(">I")


class GroupError(ValueError):
    """Malformed descriptor, foreign element or corrupt encoding."""


# --------------------------------------------------------------------------
# descriptors
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ZPowerD:
    d: int

    def text(self) -> str:
        return "Z" if self.d == 1 else f"Z^{self.d}"


@dataclass(frozen=True)
class FreeGroup:
    k: int

    def text(self) -> str:
        return f"F{self.k}"


@dataclass(frozen=True)
class Heisenberg:
    def text(self) -> str:
        return "H3"


@dataclass(frozen=True)
class Cyclic:
    m: int

    def text(self) -> str:
        return f"Z{self.m}"


@dataclass(frozen=True)
class DirectProduct:
    left: Any
    right: Any

    def text(self) -> str:
        return f"{self.left.text()}x{_paren(self.right, DirectProduct)}"


@dataclass(frozen=True)
class WreathProduct:
    lamp: Any
    base: Any

    def text(self) -> str:
        return f"{_paren(self.lamp, (DirectProduct, WreathProduct))}wr{_paren(self.base, DirectProduct)}"


Descriptor = ZPowerD | FreeGroup | Heisenberg | Cyclic | DirectProduct | WreathProduct


def _paren(desc, kinds) -> str:
    return f"({desc.text()})" if isinstance(desc, kinds) else desc.text()


_TOKEN = re.compile(r"\s*(Z\^\d+|Z\d+|Z|F\d+|H3|wr|x|\(|\))")


def parse_descriptor(text: str) -> Descriptor:
    """Parse a short group specifier such as ``Z^2``, ``F2xZ`` or ``Z2wrZ``.

    ``Z`` is the integers, ``Z^d`` free abelian of rank d, ``Zm`` (m >= 2)
    the cyclic group of order m, ``Fk`` the free group, ``H3`` the integer
    Heisenberg group.  ``x`` builds direct products (left associative) and
    binds looser than ``wr``.
    """
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise GroupError(f"cannot parse group specifier {text!r} at offset {pos}")
        tokens.append(m.group(1))
        pos = m.end()
    if not tokens:
        raise GroupError("empty group specifier")

    def atom(i):
        if i >= len(tokens):
            raise GroupError(f"group specifier {text!r} ends early")
        tok = tokens[i]
        if tok == "(":
            desc, i = expr(i + 1)
            if i >= len(tokens) or tokens[i] != ")":
                raise GroupError(f"unbalanced parentheses in {text!r}")
            return desc, i + 1
        if tok == "Z":
            return ZPowerD(1), i + 1
        if tok.startswith("Z^"):
            return ZPowerD(int(tok[2:])), i + 1
        if tok.startswith("Z"):
            return Cyclic(int(tok[1:])), i + 1
        if tok.startswith("F"):
            return FreeGroup(int(tok[1:])), i + 1
        if tok == "H3":
            return Heisenberg(), i + 1
        raise GroupError(f"unexpected token {tok!r} in {text!r}")

    def wr_term(i):
        lamp, i = atom(i)
        if i < len(tokens) and tokens[i] == "wr":
            base, i = wr_term(i + 1)
            return WreathProduct(lamp, base), i
        return lamp, i

    def expr(i):
        left, i = wr_term(i)
        while i < len(tokens) and tokens[i] == "x":
            right, i = wr_term(i + 1)
            left = DirectProduct(left, right)
        return left, i

    desc, end = expr(0)
    if end != len(tokens):
        raise GroupError(f"trailing tokens in group specifier {text!r}")
    return desc


# --------------------------------------------------------------------------
# integer codec shared by all variants
# --------------------------------------------------------------------------


def _put_int(out: bytearray, x: int) -> None:
    # offset binary keeps byte order equal to numeric order
    out += _I64.pack(x + _OFFSET)


def _get_int(buf: bytes, pos: int) -> tuple[int, int]:
    if pos + 8 > len(buf):
        raise GroupError("truncated encoding")
    return _I64.unpack_from(buf, pos)[0] - _OFFSET, pos + 8


def _get_u32(buf: bytes, pos: int) -> tuple[int, int]:
    if pos + 4 > len(buf):
        raise GroupError("truncated encoding")
    return _U32.unpack_from(buf, pos)[0], pos + 4


# --------------------------------------------------------------------------
# group handles
# --------------------------------------------------------------------------


class Group:
    """Common interface; subclasses fill in the arithmetic."""

    descriptor: Descriptor
    identity: Element
    generators: tuple
    generator_names: tuple[str, ...]

    def __repr__(self) -> str:
        return f"<group {self.text} with {len(self.generators)} generators>"

    @property
    def text(self) -> str:
        return self.descriptor.text()

    @property
    def is_infinite(self) -> bool:
        return True

    def multiply(self, a, b):
        raise NotImplementedError

    def invert(self, a):
        raise NotImplementedError

    def is_element(self, a) -> bool:
        raise NotImplementedError

    def canonical(self, a):
        """Normalize a raw payload; a no-op on canonical elements."""
        return a

    def _check(self, *elements) -> None:
        for a in elements:
            if not self.is_element(a):
                raise GroupError(f"{a!r} is not an element of {self.text}")

    def mul(self, a, b):
        """``multiply`` with membership checks on both arguments."""
        self._check(a, b)
        return self.multiply(a, b)

    def inv(self, a):
        self._check(a)
        return self.invert(a)

    def times_generator(self, a, i: int):
        return self.multiply(a, self.generators[i])

    def word_product(self, word: Sequence[int], start=None):
        x = self.identity if start is None else start
        for i in word:
            x = self.times_generator(x, i)
        return x

    def encode(self, a) -> bytes:
        out = bytearray()
        self._write(a, out)
        return bytes(out)

    def decode(self, data: bytes):
        a, pos = self._read(bytes(data), 0)
        if pos != len(data):
            raise GroupError("trailing bytes after element encoding")
        return a

    def _write(self, a, out: bytearray) -> None:
        raise NotImplementedError

    def _read(self, buf: bytes, pos: int):
        raise NotImplementedError

    def _finish(self) -> None:
        gens = []
        names = []
        for g, name in zip(self._raw_generators, self._raw_names):
            if g != self.identity and g not in gens:
                gens.append(g)
                names.append(name)
        self.generators = tuple(gens)
        self.generator_names = tuple(names)
        self.generator_index = {g: i for i, g in enumerate(gens)}
        self.inverse_generator = tuple(self.generator_index[self.invert(g)] for g in gens)


class FreeAbelianGroup(Group):
    def __init__(self, desc: ZPowerD):
        if desc.d < 1:
            raise GroupError("Z^d needs d >= 1")
        self.descriptor = desc
        self.d = desc.d
        self.identity = (0,) * self.d
        self._raw_generators = []
        self._raw_names = []
        for j in range(self.d):
            for sign in (1, -1):
                v = [0] * self.d
                v[j] = sign
                self._raw_generators.append(tuple(v))
                self._raw_names.append(("+" if sign > 0 else "-") + f"e{j + 1}")
        self._finish()

    def is_element(self, a) -> bool:
        return isinstance(a, tuple) and len(a) == self.d and all(type(x) is int for x in a)

    def multiply(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def invert(self, a):
        return tuple(-x for x in a)

    def times_generator(self, a, i):
        j, sign = divmod(i, 2)
        a = list(a)
        a[j] += -1 if sign else 1
        return tuple(a)

    def _write(self, a, out):
        for x in a:
            _put_int(out, x)

    def _read(self, buf, pos):
        vals = []
        for _ in range(self.d):
            x, pos = _get_int(buf, pos)
            vals.append(x)
        return tuple(vals), pos


class FreeGroupHandle(Group):
    """Reduced words over letters ``±1..±k`` (letter ``-i`` is ``a_i^-1``)."""

    def __init__(self, desc: FreeGroup):
        if desc.k < 1 or desc.k > 127:
            raise GroupError("F_k needs 1 <= k <= 127")
        self.descriptor = desc
        self.k = desc.k
        self.identity = ()
        self._raw_generators = []
        self._raw_names = []
        for j in range(1, self.k + 1):
            self._raw_generators += [(j,), (-j,)]
            self._raw_names += [f"a{j}", f"A{j}"]
        self._finish()

    def is_element(self, a) -> bool:
        if not isinstance(a, tuple):
            return False
        for i, x in enumerate(a):
            if type(x) is not int or x == 0 or abs(x) > self.k:
                return False
            if i and a[i - 1] == -x:
                return False
        return True

    def canonical(self, a):
        out: list[int] = []
        for x in a:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
        return tuple(out)

    def multiply(self, a, b):
        i = 0
        n = min(len(a), len(b))
        while i < n and a[-1 - i] == -b[i]:
            i += 1
        return a[: len(a) - i] + b[i:]

    def invert(self, a):
        return tuple(-x for x in reversed(a))

    def times_generator(self, a, i):
        x = self.generators[i][0]
        if a and a[-1] == -x:
            return a[:-1]
        return a + (x,)

    def _write(self, a, out):
        out += _U32.pack(len(a))
        out += bytes(x + 128 for x in a)

    def _read(self, buf, pos):
        n, pos = _get_u32(buf, pos)
        if pos + n > len(buf):
            raise GroupError("truncated encoding")
        word = tuple(b - 128 for b in buf[pos : pos + n])
        if not self.is_element(word):
            raise GroupError("encoded word is not reduced or uses unknown letters")
        return word, pos + n


class HeisenbergGroup(Group):
    """Integer upper unitriangular matrices; ``(a, b, c)`` has a,b above the
    diagonal and c in the corner."""

    def __init__(self, desc: Heisenberg):
        self.descriptor = desc
        self.identity = (0, 0, 0)
        self._raw_generators = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)]
        self._raw_names = ["x", "X", "y", "Y"]
        self._finish()

    def is_element(self, a) -> bool:
        return isinstance(a, tuple) and len(a) == 3 and all(type(x) is int for x in a)

    def multiply(self, a, b):
        return (a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1])

    def invert(self, a):
        return (-a[0], -a[1], a[0] * a[1] - a[2])

    def _write(self, a, out):
        for x in a:
            _put_int(out, x)

    def _read(self, buf, pos):
        vals = []
        for _ in range(3):
            x, pos = _get_int(buf, pos)
            vals.append(x)
        return tuple(vals), pos


class CyclicGroup(Group):
    def __init__(self, desc: Cyclic):
        if desc.m < 2:
            raise GroupError("cyclic group needs order m >= 2")
        self.descriptor = desc
        self.m = desc.m
        self.identity = 0
        self._raw_generators = [1, self.m - 1]
        self._raw_names = ["t", "T"]
        self._finish()

    @property
    def is_infinite(self) -> bool:
        return False

    def is_element(self, a) -> bool:
        return type(a) is int and 0 <= a < self.m

    def canonical(self, a):
        return a % self.m

    def multiply(self, a, b):
        return (a + b) % self.m

    def invert(self, a):
        return (-a) % self.m

    def _write(self, a, out):
        _put_int(out, a)

    def _read(self, buf, pos):
        x, pos = _get_int(buf, pos)
        if not 0 <= x < self.m:
            raise GroupError("cyclic residue out of range")
        return x, pos


class DirectProductGroup(Group):
    def __init__(self, desc: DirectProduct):
        self.descriptor = desc
        self.left = construct_group(desc.left)
        self.right = construct_group(desc.right)
        self.identity = (self.left.identity, self.right.identity)
        self._raw_generators = [(s, self.right.identity) for s in self.left.generators]
        self._raw_generators += [(self.left.identity, t) for t in self.right.generators]
        self._raw_names = [f"({n},1)" for n in self.left.generator_names]
        self._raw_names += [f"(1,{n})" for n in self.right.generator_names]
        self._finish()

    @property
    def is_infinite(self) -> bool:
        return self.left.is_infinite or self.right.is_infinite

    def is_element(self, a) -> bool:
        return (
            isinstance(a, tuple)
            and len(a) == 2
            and self.left.is_element(a[0])
            and self.right.is_element(a[1])
        )

    def canonical(self, a):
        return (self.left.canonical(a[0]), self.right.canonical(a[1]))

    def multiply(self, a, b):
        return (self.left.multiply(a[0], b[0]), self.right.multiply(a[1], b[1]))

    def invert(self, a):
        return (self.left.invert(a[0]), self.right.invert(a[1]))

    def times_generator(self, a, i):
        nl = len(self.left.generators)
        if i < nl:
            return (self.left.times_generator(a[0], i), a[1])
        return (a[0], self.right.times_generator(a[1], i - nl))

    def _write(self, a, out):
        self.left._write(a[0], out)
        self.right._write(a[1], out)

    def _read(self, buf, pos):
        x, pos = self.left._read(buf, pos)
        y, pos = self.right._read(buf, pos)
        return (x, y), pos


@dataclass(frozen=True)
class SwitchWalkSwitch:
    """Decomposition of one wreath generator: optional lamp generator index
    applied before the step, base generator index, optional lamp index after."""

    before: int | None
    walk: int
    after: int | None


def _first(pair):
    return pair[0]


class WreathProductGroup(Group):
    """``H wr G`` as pairs ``(position, lamps)``.

    ``lamps`` is a tuple of ``(base element, lamp value)`` pairs with no
    identity values, sorted by the encoding of the base element.  The product
    rule is ``(g1, L1)(g2, L2) = (g1 g2, L1 * L2 shifted by g1)``.
    """

    def __init__(self, desc: WreathProduct):
        self.descriptor = desc
        self.lamp = construct_group(desc.lamp)
        self.base = construct_group(desc.base)
        if len(self.lamp.generators) == 0:
            raise GroupError("wreath product needs a nontrivial lamp group")
        self.identity = (self.base.identity, ())
        self._key_cache: dict = {}
        # offset-binary integer tuples encode in the same order they compare
        self._natural_order = isinstance(self.base, (FreeAbelianGroup, HeisenbergGroup, CyclicGroup))
        self._raw_generators = []
        self._raw_names = []
        self._raw_sws = []
        switches = [None] + list(range(len(self.lamp.generators)))
        e = self.base.identity
        for s1 in switches:
            for w, walk in enumerate(self.base.generators):
                for s2 in switches:
                    lamps = {}
                    if s1 is not None:
                        lamps[e] = self.lamp.generators[s1]
                    if s2 is not None:
                        prev = lamps.get(walk, self.lamp.identity)
                        lamps[walk] = self.lamp.multiply(prev, self.lamp.generators[s2])
                    self._raw_generators.append((walk, self._pack(lamps)))
                    self._raw_sws.append(SwitchWalkSwitch(s1, w, s2))
                    n1 = "" if s1 is None else self.lamp.generator_names[s1]
                    n2 = "" if s2 is None else self.lamp.generator_names[s2]
                    self._raw_names.append(f"[{n1}]{self.base.generator_names[w]}[{n2}]")
        self._finish()
        sws_of = dict(zip(self._raw_generators, self._raw_sws))
        self.sws = tuple(sws_of[g] for g in self.generators)
        self.sws_index = {s: i for i, s in enumerate(self.sws)}

    @property
    def is_infinite(self) -> bool:
        return self.base.is_infinite

    def key(self, g) -> bytes:
        k = self._key_cache.get(g)
        if k is None:
            k = self.base.encode(g)
            if len(self._key_cache) < 1_000_000:
                self._key_cache[g] = k
        return k

    def _pack(self, lamps: dict) -> tuple:
        e = self.lamp.identity
        items = [(g, v) for g, v in lamps.items() if v != e]
        if self._natural_order:
            items.sort(key=_first)
        else:
            items.sort(key=lambda p: self.key(p[0]))
        return tuple(items)

    def lamp_map(self, a) -> dict:
        return dict(a[1])

    def is_element(self, a) -> bool:
        if not (isinstance(a, tuple) and len(a) == 2 and isinstance(a[1], tuple)):
            return False
        if not self.base.is_element(a[0]):
            return False
        prev = None
        for item in a[1]:
            if not (isinstance(item, tuple) and len(item) == 2):
                return False
            g, v = item
            if not self.base.is_element(g) or not self.lamp.is_element(v) or v == self.lamp.identity:
                return False
            k = self.key(g)
            if prev is not None and k <= prev:
                return False
            prev = k
        return True

    def canonical(self, a):
        pos, lamps = a
        merged: dict = {}
        for g, v in lamps:
            g = self.base.canonical(g)
            merged[g] = self.lamp.multiply(merged.get(g, self.lamp.identity), self.lamp.canonical(v))
        return (self.base.canonical(pos), self._pack(merged))

    def multiply(self, a, b):
        g1, l1 = a
        g2, l2 = b
        if not l2:
            return (self.base.multiply(g1, g2), l1)
        merged = dict(l1)
        lamp = self.lamp
        for s, v in l2:
            t = self.base.multiply(g1, s)
            prev = merged.get(t)
            merged[t] = v if prev is None else lamp.multiply(prev, v)
        return (self.base.multiply(g1, g2), self._pack(merged))

    def invert(self, a):
        g, lamps = a
        ginv = self.base.invert(g)
        inv = {self.base.multiply(ginv, s): self.lamp.invert(v) for s, v in lamps}
        return (ginv, self._pack(inv))

    def times_generator(self, a, i):
        sw = self.sws[i]
        pos, lamps = a
        if sw.before is None and sw.after is None:
            return (self.base.times_generator(pos, sw.walk), lamps)
        merged = dict(lamps)
        lamp = self.lamp
        if sw.before is not None:
            merged[pos] = lamp.multiply(merged.get(pos, lamp.identity), lamp.generators[sw.before])
        pos = self.base.times_generator(pos, sw.walk)
        if sw.after is not None:
            merged[pos] = lamp.multiply(merged.get(pos, lamp.identity), lamp.generators[sw.after])
        return (pos, self._pack(merged))

    def _write(self, a, out):
        pos, lamps = a
        self.base._write(pos, out)
        out += _U32.pack(len(lamps))
        for g, v in lamps:
            self.base._write(g, out)
            self.lamp._write(v, out)

    def _read(self, buf, pos):
        g, pos = self.base._read(buf, pos)
        n, pos = _get_u32(buf, pos)
        lamps = []
        for _ in range(n):
            s, pos = self.base._read(buf, pos)
            v, pos = self.lamp._read(buf, pos)
            lamps.append((s, v))
        a = (g, tuple(lamps))
        if not self.is_element(a):
            raise GroupError("lamp list is not canonical")
        return a, pos


_HANDLES = {
    ZPowerD: FreeAbelianGroup,
    FreeGroup: FreeGroupHandle,
    Heisenberg: HeisenbergGroup,
    Cyclic: CyclicGroup,
    DirectProduct: DirectProductGroup,
    WreathProduct: WreathProductGroup,
}

_cache: dict = {}


def construct_group(descriptor: Descriptor | str) -> Group:
    """Build (or fetch the memoized) group handle for a descriptor or text specifier."""
    if isinstance(descriptor, str):
        descriptor = parse_descriptor(descriptor)
    handle = _cache.get(descriptor)
    if handle is None:
        cls = _HANDLES.get(type(descriptor))
        if cls is None:
            raise GroupError(f"unknown group descriptor {descriptor!r}")
        if isinstance(descriptor, ZPowerD) and (type(descriptor.d) is not int or descriptor.d < 1):
            raise GroupError("Z^d needs an integer d >= 1")
        if isinstance(descriptor, FreeGroup) and (type(descriptor.k) is not int or descriptor.k < 1):
            raise GroupError("F_k needs an integer k >= 1")
        handle = cls(descriptor)
        _cache[descriptor] = handle
    return handle


def identity(group: Group):
    return group.identity


def multiply(group: Group, a, b):
    return group.mul(a, b)


def invert(group: Group, a):
    return group.inv(a)


def encode_element(group: Group, a) -> bytes:
    group._check(a)
    return group.encode(a)


def decode_element(group: Group, data: bytes):
    return group.decode(data)


LAMPLIGHTER = WreathProduct(Cyclic(2), ZPowerD(1))


def lamplighter_element(lit: Sequence[int], position: int):
    """Element of ``Z2 wr Z`` with lamps lit at the given integers."""
    return ((position,), tuple(((i,), 1) for i in sorted(set(lit))))


def lit_positions(a) -> list[int]:
    """Lit lamp positions of a ``Z2 wr Z`` element, ascending."""
    return sorted(g[0] for g, _ in a[1])

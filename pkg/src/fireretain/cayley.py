"""Balls in Cayley graphs: BFS enumeration, growth, vertex boundaries, caches.

A :class:`Ball` numbers its elements layer by layer (word length 0, 1, ...)
and, inside a layer, by canonical encoding order.  Sub-balls are therefore
id prefixes, which the simulation and isoperimetry code rely on.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from fireretain.groups import Group, GroupError, construct_group

DEFAULT_MEMORY_BUDGET = 4_000_000  # elements per materialized ball

MAGIC = b"CAYB"
FORMAT_VERSION = 1


class BallTooLarge(RuntimeError):
    def __init__(self, group_text: str, radius: int, largest_radius: int, budget: int):
        self.radius = radius
        self.largest_radius = largest_radius
        self.budget = budget
        super().__init__(
            f"ball of radius {radius} in {group_text} exceeds the memory budget of "
            f"{budget} elements; largest feasible radius is {largest_radius}"
        )


class CacheError(ValueError):
    pass


class VersionMismatch(CacheError):
    pass


class DescriptorMismatch(CacheError):
    pass


class ChecksumError(CacheError):
    pass


@dataclass
class Ball:
    group: Group
    radius: int
    elements: list
    layer_sizes: list[int]
    index: dict = field(repr=False)
    _neighbors: np.ndarray | None = field(default=None, repr=False)
    _lengths: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, x) -> bool:
        return x in self.index

    @property
    def layers(self) -> list[list]:
        out = []
        start = 0
        for n in self.layer_sizes:
            out.append(self.elements[start : start + n])
            start += n
        return out

    def volume(self, r: int) -> int:
        """v(r) = |B_r| for r <= radius."""
        if r < 0 or r > self.radius:
            raise ValueError(f"radius {r} outside 0..{self.radius}")
        return sum(self.layer_sizes[: r + 1])

    def growth(self) -> list[int]:
        return list(np.cumsum(self.layer_sizes, dtype=np.int64).tolist())

    @property
    def lengths(self) -> np.ndarray:
        """Word length of every element, indexed by id."""
        if self._lengths is None:
            self._lengths = np.repeat(
                np.arange(len(self.layer_sizes), dtype=np.int32),
                np.asarray(self.layer_sizes, dtype=np.int64),
            )
        return self._lengths

    def word_length(self, x) -> int:
        return int(self.lengths[self.index[x]])

    def ids(self, xs: Iterable) -> np.ndarray:
        try:
            return np.fromiter((self.index[x] for x in xs), dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"element {exc.args[0]!r} is outside the ball of radius {self.radius}") from None

    def mask(self, xs: Iterable) -> np.ndarray:
        m = np.zeros(len(self), dtype=bool)
        m[self.ids(xs)] = True
        return m

    def elements_of(self, mask_or_ids: np.ndarray) -> set:
        arr = np.asarray(mask_or_ids)
        ids = np.flatnonzero(arr) if arr.dtype == bool else arr
        return {self.elements[i] for i in ids.tolist()}

    @property
    def neighbors(self) -> np.ndarray:
        """``neighbors[i, s]`` = id of ``elements[i] * generators[s]``, or -1
        when that product lies outside the ball."""
        if self._neighbors is None:
            G = self.group
            get = self.index.get
            ngen = len(G.generators)
            table = np.empty((len(self), ngen), dtype=np.int32)
            tg = G.times_generator
            for i, x in enumerate(self.elements):
                table[i] = [get(tg(x, s), -1) for s in range(ngen)]
            self._neighbors = table
        return self._neighbors


def enumerate_ball(group: Group, R: int, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> Ball:
    """Exact BFS ball of radius ``R`` around the identity.

    Refuses (rather than truncating) when the ball would exceed
    ``memory_budget`` elements; the exception carries the largest radius
    that fits.
    """
    if R < 0:
        raise ValueError("radius must be non-negative")
    e = group.identity
    elements = [e]
    index = {e: 0}
    layer_sizes = [1]
    frontier = [e]
    ngen = len(group.generators)
    tg = group.times_generator
    for k in range(1, R + 1):
        fresh = set()
        for x in frontier:
            for s in range(ngen):
                y = tg(x, s)
                if y not in index:
                    fresh.add(y)
        if len(index) + len(fresh) > memory_budget:
            raise BallTooLarge(group.text, R, k - 1, memory_budget)
        layer = sorted(fresh, key=group.encode)
        for y in layer:
            index[y] = len(elements)
            elements.append(y)
        layer_sizes.append(len(layer))
        frontier = layer
    return Ball(group, R, elements, layer_sizes, index)


@dataclass(frozen=True)
class GrowthTable:
    group_text: str
    values: tuple[int, ...]

    @property
    def rows(self) -> list[tuple[int, int]]:
        return list(enumerate(self.values))

    def __getitem__(self, r: int) -> int:
        return self.values[r]


def growth_table(group: Group, R_max: int, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> GrowthTable:
    ball = enumerate_ball(group, R_max, memory_budget)
    return GrowthTable(group.text, tuple(ball.growth()))


def _as_mask(ball: Ball, A) -> np.ndarray:
    if isinstance(A, np.ndarray) and A.dtype == bool:
        if A.shape != (len(ball),):
            raise ValueError("mask does not match the ball")
        return A
    return ball.mask(A)


def outer_boundary_mask(ball: Ball, mask: np.ndarray) -> np.ndarray:
    nb = ball.neighbors[mask].ravel()
    nb = nb[nb >= 0]
    out = np.zeros(len(ball), dtype=bool)
    out[nb] = True
    out &= ~mask
    return out


def inner_boundary_mask(ball: Ball, mask: np.ndarray) -> np.ndarray:
    # a neighbor beyond the ball is outside A as well
    nb = ball.neighbors
    inside = np.where(nb >= 0, mask[np.maximum(nb, 0)], False)
    return mask & ~inside.all(axis=1)


def outer_boundary(A, within: Ball) -> set:
    """Elements of the ball outside ``A`` with a neighbor in ``A``."""
    return within.elements_of(outer_boundary_mask(within, _as_mask(within, A)))


def inner_boundary(A, within: Ball) -> set:
    """Elements of ``A`` with a neighbor outside ``A`` (possibly beyond the
    ball, so the whole ball has its outer sphere as inner boundary)."""
    return within.elements_of(inner_boundary_mask(within, _as_mask(within, A)))


# --------------------------------------------------------------------------
# cache files
# --------------------------------------------------------------------------


def _checksum(data: bytes) -> bytes:
    return hashlib.blake2b(data, digest_size=8).digest()


def ball_bytes(ball: Ball) -> bytes:
    text = ball.group.text.encode()
    out = bytearray(MAGIC)
    out += struct.pack(">I", FORMAT_VERSION)
    out += struct.pack(">I", len(text)) + text
    out += struct.pack(">I", ball.radius)
    for n in ball.layer_sizes:
        out += struct.pack(">Q", n)
    for x in ball.elements:
        ball.group._write(x, out)
    out += _checksum(bytes(out))
    return bytes(out)


def save_ball(ball: Ball, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(ball_bytes(ball))
    tmp.replace(path)
    return path


def read_header(data: bytes) -> tuple[str, int, list[int], int]:
    """Validate magic, version and checksum; return (descriptor text,
    radius, layer sizes, offset of the element payload)."""
    if len(data) < 24 or data[:4] != MAGIC:
        raise CacheError("not a ball cache file")
    if _checksum(data[:-8]) != data[-8:]:
        raise ChecksumError("ball cache checksum mismatch")
    (version,) = struct.unpack_from(">I", data, 4)
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"cache format version {version}, expected {FORMAT_VERSION}")
    (tlen,) = struct.unpack_from(">I", data, 8)
    text = data[12 : 12 + tlen].decode()
    pos = 12 + tlen
    (radius,) = struct.unpack_from(">I", data, pos)
    pos += 4
    sizes = list(struct.unpack_from(f">{radius + 1}Q", data, pos))
    pos += 8 * (radius + 1)
    return text, radius, sizes, pos


def load_ball(group: Group, path) -> Ball:
    data = Path(path).read_bytes()
    text, radius, sizes, pos = read_header(data)
    if text != group.text:
        raise DescriptorMismatch(f"cache holds a ball of {text}, requested {group.text}")
    body = data[:-8]
    elements = []
    try:
        for _ in range(sum(sizes)):
            x, pos = group._read(body, pos)
            elements.append(x)
    except GroupError as exc:
        raise CacheError(f"corrupt element payload: {exc}") from None
    if pos != len(body):
        raise CacheError("trailing bytes in ball cache payload")
    index = {x: i for i, x in enumerate(elements)}
    if len(index) != len(elements):
        raise CacheError("duplicate elements in ball cache")
    return Ball(group, radius, elements, sizes, index)


def cache_path(cache_dir, group: Group, R: int) -> Path:
    safe = group.text.replace("^", "p").replace("(", "_").replace(")", "_")
    return Path(cache_dir) / f"{safe}_R{R}.cayb"


# --------------------------------------------------------------------------
# packed frontier BFS for Z2 wr Z
# --------------------------------------------------------------------------


def lamplighter_layers(R: int) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield ``(positions, masks)`` for each sphere of ``Z2 wr Z`` with the
    switch-walk-switch generators, radius 0..R.

    Lamp ``p`` is bit ``p + R`` of the mask.  The Cayley graph is bipartite
    (every generator moves the lamplighter by one), so a sphere is the set of
    neighbors of the previous sphere minus the sphere before it; only two
    spheres are ever held in memory.
    """
    if not 0 <= R <= 28:
        raise ValueError("packed lamplighter BFS supports radii 0..28")
    shift = np.uint64(6)
    low = np.uint64(63)
    off = R

    def pack(pos, mask):
        return (mask << shift) | (pos + off).astype(np.uint64)

    def unpack(keys):
        return (keys & low).astype(np.int64) - off, keys >> shift

    prev = np.empty(0, dtype=np.uint64)
    cur = np.array([0], dtype=np.uint64) << shift | np.uint64(off)
    yield unpack(cur)
    one = np.uint64(1)
    for _ in range(R):
        pos, mask = unpack(cur)
        here = one << (pos + off).astype(np.uint64)
        cands = []
        for step in (1, -1):
            npos = pos + step
            there = one << (npos + off).astype(np.uint64)
            for m in (mask, mask ^ here):
                cands.append(pack(npos, m))
                cands.append(pack(npos, m ^ there))
        nxt = np.unique(np.concatenate(cands))
        nxt = nxt[~np.isin(nxt, prev, assume_unique=True)]
        prev, cur = cur, nxt
        yield unpack(cur)


def lamplighter_growth(R: int) -> list[int]:
    total = 0
    out = []
    for pos, _ in lamplighter_layers(R):
        total += len(pos)
        out.append(total)
    return out


def shield_membership(pos: np.ndarray, mask: np.ndarray, M: int, R: int) -> np.ndarray:
    """Vectorized test for the shield set: lamps 0..M lit, no lamp at a
    negative position, lamplighter strictly right of M + 1."""
    one = np.uint64(1)
    neg = (one << np.uint64(R)) - one
    block = ((one << np.uint64(M + 1)) - one) << np.uint64(R)
    return ((mask & neg) == 0) & ((mask & block) == block) & (pos > M + 1)


def shield_census(M: int, R: int) -> list[tuple[int, int, int]]:
    """Rows ``(r, |S cap B_r|, v(r))`` for r = 0..R via the packed BFS."""
    rows = []
    vol = 0
    hits = 0
    for r, (pos, mask) in enumerate(lamplighter_layers(R)):
        vol += len(pos)
        hits += int(np.count_nonzero(shield_membership(pos, mask, M, R)))
        rows.append((r, hits, vol))
    return rows


def packed_to_element(position: int, mask: int, R: int):
    lit = [p - R for p in range(mask.bit_length()) if mask >> p & 1]
    return ((position,), tuple(((p,), 1) for p in lit))


__all__ = [
    "Ball",
    "BallTooLarge",
    "CacheError",
    "ChecksumError",
    "DescriptorMismatch",
    "GrowthTable",
    "VersionMismatch",
    "cache_path",
    "construct_group",
    "enumerate_ball",
    "growth_table",
    "inner_boundary",
    "inner_boundary_mask",
    "lamplighter_growth",
    "lamplighter_layers",
    "load_ball",
    "outer_boundary",
    "outer_boundary_mask",
    "save_ball",
    "shield_census",
]

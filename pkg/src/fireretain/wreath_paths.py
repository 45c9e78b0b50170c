"""Connecting paths in wreath products H wr G, compiled to generator words.

Given pair families A = {a_i} and B = {b_i} we build, for each i, a path
from a_i to b_i out of high-level moves (walk the lamplighter along a fixed
geodesic, set a lamp, rewrite the lamps on a region) and compile it into a
word over the switch-walk-switch generators.  Disjointness of the compiled
paths is then checked exactly by hashing vertices.

Four family shapes are handled:

1. all lamp configurations in A and B distinct;
2. all lamplighter positions in A and B distinct;
3. A with distinct configurations, B sharing one configuration (not used in
   A) at distinct positions;
4. case 3 with A and B swapped.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from fireretain.cayley import BallTooLarge, DEFAULT_MEMORY_BUDGET, enumerate_ball
from fireretain.groups import (
    LAMPLIGHTER,
    CyclicGroup,
    FreeAbelianGroup,
    FreeGroupHandle,
    Group,
    SwitchWalkSwitch,
    WreathProductGroup,
    construct_group,
)


class PathError(ValueError):
    pass


class CaseRefusal(PathError):
    pass


class PathTooLong(PathError):
    pass


# --------------------------------------------------------------------------
# geodesics
# --------------------------------------------------------------------------


class Geodesics:
    """Canonical geodesic words in a group.

    Closed forms for Z^d (coordinates in order), free groups (the reduced
    word), and cyclic groups; otherwise the lexicographically least geodesic
    read off a BFS ball, grown on demand up to the memory budget.
    """

    def __init__(self, group: Group, memory_budget: int = DEFAULT_MEMORY_BUDGET):
        self.group = group
        self.memory_budget = memory_budget
        self._ball = None
        self._cache: dict = {}

    def _ensure(self, radius: int):
        if self._ball is None or self._ball.radius < radius:
            self._ball = enumerate_ball(self.group, radius, self.memory_budget)
        return self._ball

    def ball(self, radius: int):
        return self._ensure(radius)

    def word(self, x) -> list[int]:
        G = self.group
        if isinstance(G, FreeAbelianGroup):
            out = []
            for j, c in enumerate(x):
                out += [2 * j if c > 0 else 2 * j + 1] * abs(c)
            return out
        if isinstance(G, FreeGroupHandle):
            return [2 * (abs(c) - 1) + (c < 0) for c in x]
        if isinstance(G, CyclicGroup):
            if x == 0:
                return []
            if G.m == 2:
                return [0]
            return [0] * x if x <= G.m - x else [1] * (G.m - x)
        hit = self._cache.get(x)
        if hit is not None:
            return list(hit)
        radius = 0 if self._ball is None else self._ball.radius
        while True:
            ball = self._ensure(radius)
            if x in ball:
                break
            radius = max(1, 2 * radius)
        word = []
        cur = x
        length = ball.word_length(cur)
        ginv = [G.invert(s) for s in G.generators]
        while length:
            for s, si in enumerate(ginv):
                y = G.multiply(si, cur)
                if y in ball.index and ball.word_length(y) == length - 1:
                    word.append(s)
                    cur = y
                    length -= 1
                    break
        self._cache[x] = tuple(word)
        return word

    def length(self, x) -> int:
        return len(self.word(x))

    def distance(self, p, q) -> int:
        G = self.group
        return self.length(G.multiply(G.invert(p), q))

    def ball_elements(self, n: int) -> list:
        G = self.group
        if isinstance(G, FreeAbelianGroup) and G.d == 1:
            return [(i,) for i in range(-n, n + 1)]
        return list(self._ensure(n).elements)


# --------------------------------------------------------------------------
# families and waypoints
# --------------------------------------------------------------------------


@dataclass
class PairFamily:
    group: WreathProductGroup
    n: int
    A: list
    B: list
    case: int | None = None


@dataclass(frozen=True)
class Waypoints:
    g: object
    g_star: object
    h: object
    n: int


def _config(a) -> tuple:
    return a[1]


def classify_case(A: Sequence, B: Sequence) -> int:
    """First of the four family shapes satisfied by (A, B)."""
    if len(A) != len(B):
        raise PathError(f"families differ in length ({len(A)} vs {len(B)})")
    if not A:
        raise PathError("families must be nonempty")
    if len(set(A)) != len(A) or len(set(B)) != len(B):
        raise PathError("families must consist of distinct elements")
    confA = [_config(a) for a in A]
    confB = [_config(b) for b in B]
    posA = [a[0] for a in A]
    posB = [b[0] for b in B]
    N = len(A)
    if len(set(confA + confB)) == 2 * N:
        return 1
    if len(set(posA + posB)) == 2 * N:
        return 2
    if len(set(confA)) == N and len(set(confB)) == 1 and confB[0] not in confA and len(set(posB)) == N:
        return 3
    if len(set(confB)) == N and len(set(confA)) == 1 and confA[0] not in confB and len(set(posA)) == N:
        return 4
    reasons = [
        f"{2 * N - len(set(confA + confB))} repeated lamp configurations",
        f"{2 * N - len(set(posA + posB))} repeated positions",
    ]
    raise CaseRefusal("no case applies: " + ", ".join(reasons))


def choose_waypoints(group: WreathProductGroup, n: int, geodesics: Geodesics | None = None) -> Waypoints:
    """Base elements g, g* at distance 5n and 10n from the identity and a
    non-identity lamp generator h."""
    if n < 1:
        raise PathError("scale n must be positive")
    base = group.base
    if isinstance(base, FreeAbelianGroup):
        g = (5 * n,) + (0,) * (base.d - 1)
        gs = (10 * n,) + (0,) * (base.d - 1)
    else:
        geo = geodesics or Geodesics(base)
        try:
            ball = geo.ball(10 * n)
        except BallTooLarge as exc:
            raise PathError(f"cannot pick waypoints in {base.text} at scale {n}: {exc}") from None
        if ball.layer_sizes[-1] == 0 or ball.layer_sizes[5 * n] == 0:
            raise PathError(f"{base.text} has no elements at distance {5 * n} and {10 * n}")
        g = ball.layers[5 * n][0]
        gs = ball.layers[10 * n][0]
    geo = geodesics or Geodesics(base)
    if geo.length(g) != 5 * n or geo.length(gs) != 10 * n:
        raise PathError("waypoint word lengths are off")
    return Waypoints(g, gs, group.lamp.generators[0], n)


# --------------------------------------------------------------------------
# program builder and compiler
# --------------------------------------------------------------------------


@dataclass
class WreathPath:
    start: object
    end: object
    word: list[int]
    vertices: list
    steps: list[tuple[str, int, int]]  # (label, first word index, one past last)
    index: int = 0

    @property
    def length(self) -> int:
        return len(self.word)

    def vertex_after(self, label: str):
        """Vertex reached at the end of the annotated step ``label``."""
        for name, _, stop in self.steps:
            if name == label:
                return self.vertices[stop]
        raise KeyError(label)


class _Program:
    """Records walk/switch actions while tracking the current element."""

    def __init__(self, group: WreathProductGroup, geo: Geodesics, lamp_geo: Geodesics, start):
        self.G = group
        self.geo = geo
        self.lamp_geo = lamp_geo
        self.pos = start[0]
        self.lamps = dict(start[1])
        self.actions: list[tuple[str, int, str]] = []
        self.step = ""

    def walk(self, word):
        base = self.G.base
        for s in word:
            self.actions.append(("walk", s, self.step))
            self.pos = base.times_generator(self.pos, s)

    def move_to(self, target):
        base = self.G.base
        self.walk(self.geo.word(base.multiply(base.invert(self.pos), target)))

    def set_lamp(self, value):
        lamp = self.G.lamp
        cur = self.lamps.get(self.pos, lamp.identity)
        for s in self.lamp_geo.word(lamp.multiply(lamp.invert(cur), value)):
            self.actions.append(("switch", s, self.step))
        if value == lamp.identity:
            self.lamps.pop(self.pos, None)
        else:
            self.lamps[self.pos] = value

    def set_region(self, target: dict, region: Sequence):
        """Rewrite lamps on ``region`` to ``target`` (missing keys = off)."""
        e = self.G.lamp.identity
        todo = [p for p in region if self.lamps.get(p, e) != target.get(p, e)]
        base = self.G.base
        if isinstance(base, FreeAbelianGroup) and base.d == 1:
            # single sweep: leftmost change first, then rightwards
            order = sorted(todo)
        else:
            order = []
            left = list(todo)
            cur = self.pos
            while left:
                nxt = min(left, key=lambda p: (self.geo.distance(cur, p), base.encode(p)))
                left.remove(nxt)
                order.append(nxt)
                cur = nxt
        for p in order:
            self.move_to(p)
            self.set_lamp(target.get(p, e))

    def current(self):
        return self.G.canonical((self.pos, tuple(self.lamps.items())))


def compile_actions(group: WreathProductGroup, actions, lamp_geo: Geodesics) -> tuple[list[int], list[str]]:
    """Fold walk/switch actions into switch-walk-switch generators.

    Switches pending at a position are reduced to a shortest lamp word; its
    first letter rides on the arriving walk, its last on the leaving walk,
    and any letters in between use out-and-back detours.
    """
    lamp = group.lamp
    base = group.base
    walks: list[tuple[int, str]] = []
    pend: list[list[tuple[int, str]]] = [[]]
    for kind, idx, step in actions:
        if kind == "walk":
            walks.append((idx, step))
            pend.append([])
        else:
            pend[-1].append((idx, step))
    m = len(walks)
    S1: list = [None] * m
    S2: list = [None] * m
    middle: list[list[int]] = []
    mid_steps: list[str] = []
    for j, items in enumerate(pend):
        net = lamp.identity
        for idx, _ in items:
            net = lamp.multiply(net, lamp.generators[idx])
        letters = lamp_geo.word(net)
        if j >= 1 and letters:
            S2[j - 1] = letters.pop(0)
        if j < m and letters:
            S1[j] = letters.pop()
        middle.append(letters)
        mid_steps.append(items[-1][1] if items else "")
    w0 = 0
    w0inv = base.inverse_generator[0]
    word: list[int] = []
    labels: list[str] = []
    for j in range(m + 1):
        letters = middle[j]
        for k in range(0, len(letters), 2):
            pair = letters[k : k + 2]
            word.append(group.sws_index[SwitchWalkSwitch(pair[0], w0, None)])
            second = pair[1] if len(pair) == 2 else None
            word.append(group.sws_index[SwitchWalkSwitch(None, w0inv, second)])
            labels += [mid_steps[j]] * 2
        if j < m:
            word.append(group.sws_index[SwitchWalkSwitch(S1[j], walks[j][0], S2[j])])
            labels.append(walks[j][1])
    return word, labels


def _finish_path(group, start, end, word, labels, index) -> WreathPath:
    vertices = [start]
    x = start
    for s in word:
        x = group.times_generator(x, s)
        vertices.append(x)
    if x != end:
        raise PathError(f"compiled word for path {index} ends at {x!r}, expected {end!r}")
    steps: list[tuple[str, int, int]] = []
    for i, lab in enumerate(labels):
        if steps and steps[-1][0] == lab:
            steps[-1] = (lab, steps[-1][1], i + 1)
        else:
            steps.append((lab, i, i + 1))
    return WreathPath(start, end, word, vertices, steps, index)


def reverse_path(group: WreathProductGroup, path: WreathPath) -> WreathPath:
    inv = group.inverse_generator
    L = len(path.word)
    return WreathPath(
        path.end,
        path.start,
        [inv[s] for s in reversed(path.word)],
        list(reversed(path.vertices)),
        [(lab, L - stop, L - start) for lab, start, stop in reversed(path.steps)],
        path.index,
    )


class PathBuilder:
    """Compiles the per-case recipes for one wreath product and scale n."""

    def __init__(self, group: WreathProductGroup, n: int, waypoints: Waypoints | None = None,
                 memory_budget: int = DEFAULT_MEMORY_BUDGET):
        if not isinstance(group, WreathProductGroup):
            raise PathError("connecting paths need a wreath product")
        self.G = group
        self.n = n
        self.geo = Geodesics(group.base, memory_budget)
        self.lamp_geo = Geodesics(group.lamp, memory_budget)
        self.wp = waypoints or choose_waypoints(group, n, self.geo)
        if self.wp.n != n:
            raise PathError("waypoints were chosen for a different scale")
        self.ball_n = self.geo.ball_elements(n)
        base = group.base
        self.region_e = self.ball_n
        self.region_g = [base.multiply(self.wp.g, b) for b in self.ball_n]
        self.region_gs = [base.multiply(self.wp.g_star, b) for b in self.ball_n]

    def translate(self, config: tuple, c) -> dict:
        base = self.G.base
        return {base.multiply(c, p): v for p, v in config}

    def restrict(self, x, region) -> dict:
        lamps = dict(x[1])
        return {p: lamps[p] for p in region if p in lamps}

    def _program(self, start) -> _Program:
        return _Program(self.G, self.geo, self.lamp_geo, start)

    def case1(self, a, b) -> _Program:
        base = self.G.base
        g, gs = self.wp.g, self.wp.g_star
        x_i, y_i = a[1], b[1]
        P = self._program(a)
        P.step = "1:move-g"
        P.move_to(g)
        P.step = "2:copy-g"
        P.set_region(self.translate(x_i, g), self.region_g)
        P.step = "3:move-g*"
        P.move_to(gs)
        P.step = "4:copy-g*"
        P.set_region(self.translate(x_i, gs), self.region_gs)
        P.step = "5:move-e"
        P.move_to(base.identity)
        P.step = "6:rewrite-e"
        P.set_region(dict(y_i), self.region_e)
        P.step = "7:move-g"
        P.move_to(g)
        P.step = "8:clear-g"
        P.set_region({}, self.region_g)
        P.step = "9:move-g*"
        P.move_to(gs)
        P.step = "10:clear-g*"
        P.set_region({}, self.region_gs)
        P.step = "11:move-l"
        P.move_to(b[0])
        return P

    def case2(self, a, b) -> _Program:
        base = self.G.base
        g, gs, h = self.wp.g, self.wp.g_star, self.wp.h
        e = self.G.lamp.identity
        k, l = a[0], b[0]
        kg = base.multiply(k, g)
        lgs = base.multiply(l, gs)
        P = self._program(a)
        P.step = "1:walk-kg"
        P.walk(self.geo.word(g))
        P.step = "2:light-kg"
        P.set_lamp(h)
        P.step = "3:move-lg*"
        P.move_to(lgs)
        P.step = "4:light-lg*"
        P.set_lamp(h)
        P.step = "5:move-kg"
        P.move_to(kg)
        P.step = "6:off-kg"
        P.set_lamp(e)
        P.step = "7:rewrite-e"
        P.set_region(dict(b[1]), self.region_e)
        P.step = "8:move-lg*"
        P.move_to(lgs)
        P.step = "9:off-lg*"
        P.set_lamp(e)
        P.step = "10:walk-back-l"
        P.walk([base_inv for base_inv in self._inverse_word(self.geo.word(gs))])
        return P

    def _inverse_word(self, word):
        inv = self.G.base.inverse_generator
        return [inv[s] for s in reversed(word)]

    def case3(self, src, dst) -> _Program:
        """From an element of the shared-configuration side to one of the
        distinct-configuration side."""
        base = self.G.base
        g, h = self.wp.g, self.wp.h
        e = self.G.lamp.identity
        lg = base.multiply(src[0], g)
        P = self._program(src)
        P.step = "1:walk-lg"
        P.walk(self.geo.word(g))
        P.step = "2:light-lg"
        P.set_lamp(h)
        P.step = "3:rewrite-e"
        P.set_region(dict(dst[1]), self.region_e)
        P.step = "4:move-lg"
        P.move_to(lg)
        P.step = "5:off-lg"
        P.set_lamp(e)
        P.step = "6:move-k"
        P.move_to(dst[0])
        return P

    def build(self, a, b, case: int, index: int = 0) -> WreathPath:
        if a == b:
            raise PathError(f"pair {index}: a_i equals b_i")
        if case == 1:
            P, start, end = self.case1(a, b), a, b
        elif case == 2:
            P, start, end = self.case2(a, b), a, b
        elif case == 3:
            P, start, end = self.case3(b, a), b, a
        elif case == 4:
            P, start, end = self.case3(a, b), a, b
        else:
            raise PathError(f"unknown case {case}")
        word, labels = compile_actions(self.G, P.actions, self.lamp_geo)
        path = _finish_path(self.G, start, end, word, labels, index)
        if case == 3:
            path = reverse_path(self.G, path)
        if path.length > 100 * self.n:
            raise PathTooLong(f"path {index} has length {path.length} > {100 * self.n}")
        return path


def validate_family(family: PairFamily, builder: PathBuilder, require_in_ball: bool = True) -> None:
    n = family.n
    region = set(builder.ball_n)
    for x in list(family.A) + list(family.B):
        if not family.group.is_element(x):
            raise PathError(f"{x!r} is not an element of {family.group.text}")
        if any(p not in region for p, _ in x[1]):
            raise PathError(f"lamps of {x!r} are not supported in B_{n} of the base")
    if require_in_ball:
        ball = enumerate_ball(family.group, n)
        outside = [x for x in list(family.A) + list(family.B) if x not in ball]
        if outside:
            raise PathError(f"{outside[0]!r} lies outside B_{n}")


def construct_connecting_paths(family: PairFamily, waypoints: Waypoints | None = None,
                               require_in_ball: bool = True) -> list[WreathPath]:
    """One compiled path a_i -> b_i per pair, following the recipe for the
    family's case.  Raises on any family/waypoint mismatch or on a path
    longer than 100n."""
    case = classify_case(family.A, family.B)
    if family.case is not None and family.case != case:
        raise PathError(f"family declared case {family.case} but classifies as case {case}")
    builder = PathBuilder(family.group, family.n, waypoints)
    validate_family(family, builder, require_in_ball)
    if case == 1:
        off = [x for x in list(family.A) + list(family.B) if not x[1]]
        if off:
            raise PathError("case 1 families must not contain the all-off lamp configuration")
    return [builder.build(a, b, case, i) for i, (a, b) in enumerate(zip(family.A, family.B))]


def case1_separation(builder: PathBuilder, path: WreathPath, a, b) -> list[bool]:
    """Per vertex: lamps on B_n(e) equal x_i or y_i, or lamps on B_n(g) or
    B_n(g*) are the translated copy of x_i."""
    wp = builder.wp
    x_e, y_e = builder.restrict(a, builder.region_e), builder.restrict(b, builder.region_e)
    copy_g = builder.translate(a[1], wp.g)
    copy_gs = builder.translate(a[1], wp.g_star)
    out = []
    for v in path.vertices:
        out.append(
            builder.restrict(v, builder.region_e) in (x_e, y_e)
            or builder.restrict(v, builder.region_g) == copy_g
            or builder.restrict(v, builder.region_gs) == copy_gs
        )
    return out


@dataclass
class DisjointnessReport:
    case: int
    n: int
    pairwise_disjoint: bool
    counts: list[int]
    pairs: list[tuple[int, int]] = field(repr=False)

    @property
    def max_count(self) -> int:
        return max(self.counts, default=0)

    @property
    def bound(self) -> int:
        return 100 * self.n * self.n

    @property
    def ok(self) -> bool:
        if self.case == 1:
            return self.pairwise_disjoint
        return self.max_count <= self.bound


def verify_disjointness(paths: Sequence[WreathPath], case: int, n: int) -> DisjointnessReport:
    """Exact intersection census over vertex sets."""
    owners: dict = {}
    for i, p in enumerate(paths):
        for v in set(p.vertices):
            owners.setdefault(v, []).append(i)
    pairs = set()
    for idx in owners.values():
        for a in range(len(idx)):
            for b in range(a + 1, len(idx)):
                pairs.add((idx[a], idx[b]))
    counts = [0] * len(paths)
    for i, j in pairs:
        counts[i] += 1
        counts[j] += 1
    return DisjointnessReport(case, n, not pairs, counts, sorted(pairs))


def dilute_paths(paths: Sequence[WreathPath], report: DisjointnessReport) -> list[WreathPath]:
    """Greedy scan in index order keeping a path iff it meets no kept path."""
    if len(report.counts) != len(paths):
        raise PathError("report does not match the path list")
    adj: dict[int, set] = {}
    for i, j in report.pairs:
        adj.setdefault(i, set()).add(j)
        adj.setdefault(j, set()).add(i)
    kept: list[int] = []
    for i in range(len(paths)):
        if not adj.get(i, set()).intersection(kept):
            kept.append(i)
    return [paths[i] for i in kept]


def lamplighter_family(case: int, n: int, size: int, seed: int = 0) -> PairFamily:
    """Synthetic families on Z2 wr Z for exercising the compiler.

    Case 1 and 3/4 families are drawn from B_n.  A case-2 family needs 2*size
    distinct positions, which B_n cannot supply once size > n, so its
    positions run along 0, 1, ..., 2*size - 1 (A even, B odd) while lamp
    supports stay inside [-n, n].
    """
    G = construct_group(LAMPLIGHTER)
    rng = random.Random(seed)
    ball = enumerate_ball(G, n)
    by_conf: dict = {}
    for x in ball.elements:
        by_conf.setdefault(x[1], []).append(x)
    if case == 1:
        confs = [c for c in by_conf if c]
        if len(confs) < 2 * size:
            raise PathError(f"B_{n} holds only {len(confs)} nonempty configurations")
        picked = rng.sample(confs, 2 * size)
        elems = [rng.choice(by_conf[c]) for c in picked]
        A, B = elems[:size], elems[size:]
    elif case == 2:
        pool = sorted(by_conf, key=len)[: max(1, size // 4)]
        A = [((2 * i,), rng.choice(pool)) for i in range(size)]
        B = [((2 * i + 1,), rng.choice(pool)) for i in range(size)]
        if len(set(x[1] for x in A + B)) == 2 * size:
            raise PathError("case-2 family accidentally satisfies case 1")
    elif case in (3, 4):
        shared = rng.choice([c for c in by_conf if len(by_conf[c]) >= size])
        distinct = [c for c in by_conf if c != shared]
        if len(distinct) < size:
            raise PathError(f"B_{n} has too few configurations for {size} pairs")
        A = [rng.choice(by_conf[c]) for c in rng.sample(distinct, size)]
        B = rng.sample(by_conf[shared], size)
        if case == 4:
            A, B = B, A
    else:
        raise PathError(f"unknown case {case}")
    return PairFamily(G, n, A, B, case)

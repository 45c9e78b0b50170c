import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fireretain.cayley import (
    MAGIC,
    BallTooLarge,
    ChecksumError,
    DescriptorMismatch,
    VersionMismatch,
    ball_bytes,
    cache_path,
    enumerate_ball,
    growth_table,
    inner_boundary,
    lamplighter_growth,
    lamplighter_layers,
    load_ball,
    outer_boundary,
    outer_boundary_mask,
    packed_to_element,
    save_ball,
    shield_census,
)
from fireretain.groups import LAMPLIGHTER, construct_group
from fireretain.strategies import in_shield

import oracles


def test_small_examples():
    assert enumerate_ball(construct_group("Z^2"), 3).growth() == [1, 5, 13, 25]
    assert enumerate_ball(construct_group("F2"), 2).volume(2) == 17
    assert enumerate_ball(construct_group(LAMPLIGHTER), 1).volume(1) == 9
    assert growth_table(construct_group("Z"), 4).values == (1, 3, 5, 7, 9)


def test_f2_b2_encodings_distinct():
    ball = enumerate_ball(construct_group("F2"), 2)
    assert len({ball.group.encode(x) for x in ball.elements}) == 17


@pytest.mark.parametrize("text,R", [("Z^2", 6), ("Z^3", 4), ("F2", 5), ("H3", 5), ("Z2wrZ", 5), ("F2xZ", 4),
                                    ("Z3wrZ", 3), ("Z2wrZ^2", 3), ("Z5", 4), ("Z2wrF2", 3)])
def test_ball_matches_dictionary_bfs(text, R):
    G = construct_group(text)
    ball = enumerate_ball(G, R)
    dist = oracles.brute_ball(G, R)
    assert len(ball) == len(dist)
    assert all(ball.word_length(x) == d for x, d in dist.items())


@pytest.mark.parametrize("text,R", [("Z^2", 5), ("F2", 4), ("H3", 4), ("Z2wrZ", 4)])
def test_layer_structure(text, R):
    ball = enumerate_ball(construct_group(text), R)
    layers = ball.layers
    assert layers[0] == [ball.group.identity]
    prev = set()
    for k, layer in enumerate(layers):
        enc = [ball.group.encode(x) for x in layer]
        assert enc == sorted(enc)
        if k:
            for x in layer:
                nbrs = [ball.group.mul(x, s) for s in ball.group.generators]
                assert any(y in ball and ball.word_length(y) == k - 1 for y in nbrs)
        assert not prev & set(layer)
        prev |= set(layer)
    # sub-balls are id prefixes
    for r in range(R + 1):
        assert (ball.lengths[: ball.volume(r)] <= r).all()


def test_growth_closed_forms():
    z2 = enumerate_ball(construct_group("Z^2"), 20).growth()
    assert z2 == [2 * n * n + 2 * n + 1 for n in range(21)]
    assert enumerate_ball(construct_group("Z^3"), 6).growth() == [oracles.zd_volume(3, n) for n in range(7)]
    f3 = enumerate_ball(construct_group("F3"), 5).growth()
    assert f3 == [oracles.free_volume(3, n) for n in range(6)]


def test_lamplighter_growth_three_ways():
    ball = enumerate_ball(construct_group(LAMPLIGHTER), 8).growth()
    packed = lamplighter_growth(8)
    closed = [oracles.lamplighter_volume(r) for r in range(9)]
    assert ball == packed == closed
    assert closed[:6] == [1, 9, 30, 78, 184, 416]


def test_lamplighter_word_length_closed_form():
    ball = enumerate_ball(construct_group(LAMPLIGHTER), 7)
    for x in ball.elements:
        lit = [g[0] for g, _ in x[1]]
        assert ball.word_length(x) == oracles.lamplighter_length(x[0][0], lit)


def test_packed_layers_decode_to_ball_layers():
    ball = enumerate_ball(construct_group(LAMPLIGHTER), 6)
    R = 6
    for k, (pos, mask) in enumerate(lamplighter_layers(R)):
        decoded = {packed_to_element(int(p), int(m), R) for p, m in zip(pos, mask)}
        assert decoded == set(ball.layers[k])


def test_shield_census_matches_counting_oracle():
    for M in (2, 3):
        for r, hits, vol in shield_census(M, 14):
            assert hits == oracles.shield_count(r, M)
            assert vol == oracles.lamplighter_volume(r)


def test_shield_census_matches_ball_membership():
    ball = enumerate_ball(construct_group(LAMPLIGHTER), 9)
    for r, hits, _ in shield_census(3, 9):
        assert hits == sum(in_shield(x, 3) for x in ball.elements[: ball.volume(r)])


def test_heisenberg_degree_four_band():
    g = enumerate_ball(construct_group("H3"), 12).growth()
    for n in (4, 5, 6):
        assert 8 <= g[2 * n] / g[n] <= 32


def test_free_group_growth_ratio_tends_to_three():
    g = enumerate_ball(construct_group("F2"), 9).growth()
    ratios = [g[n + 1] / g[n] for n in range(1, 9)]
    assert all(abs(a - 3) >= abs(b - 3) for a, b in zip(ratios, ratios[1:]))


def test_direct_product_growth_law():
    F = enumerate_ball(construct_group("F2"), 6).growth()
    Z = enumerate_ball(construct_group("Z"), 6).growth()
    P = enumerate_ball(construct_group("F2xZ"), 6).growth()
    for n in range(7):
        assert F[n // 2] * Z[n // 2] <= P[n] <= F[n] * Z[n]


def test_memory_budget_refusal():
    with pytest.raises(BallTooLarge) as exc:
        enumerate_ball(construct_group("F2"), 8, memory_budget=1000)
    assert exc.value.largest_radius == 5  # v(5) = 485, v(6) = 1457


def test_boundaries():
    z = construct_group("Z")
    b3 = enumerate_ball(z, 3)
    assert outer_boundary({(0,)}, b3) == {(-1,), (1,)}
    assert outer_boundary(set(), b3) == set()
    b4 = enumerate_ball(z, 4)
    assert inner_boundary({(i,) for i in range(-2, 3)}, b4) == {(-2,), (2,)}
    assert inner_boundary(set(b4.elements), b4) == set(b4.layers[4])
    assert inner_boundary(set(), b4) == set()
    z2 = enumerate_ball(construct_group("Z^2"), 3)
    b1 = z2.elements[: z2.volume(1)]
    assert outer_boundary(b1, z2) == set(z2.layers[2])


@settings(max_examples=40)
@given(st.lists(st.booleans(), min_size=41, max_size=41))
def test_boundary_duality(bits):
    ball = enumerate_ball(construct_group("Z^2"), 6)
    A = np.zeros(len(ball), dtype=bool)
    A[:41] = bits  # inside B_4, so every neighbor stays in the ball
    comp = ~A
    # the complement also borders the world beyond the ball along its sphere
    assert outer_boundary(A, ball) == inner_boundary(comp, ball) - set(ball.layers[6])
    out = outer_boundary_mask(ball, A)
    assert not (out & A).any()


def test_cache_round_trip(tmp_path):
    for text, R in [("Z^2", 5), ("F2", 4), ("Z2wrZ", 4), ("H3", 3), ("F2xZ", 3)]:
        G = construct_group(text)
        ball = enumerate_ball(G, R)
        p = save_ball(ball, cache_path(tmp_path, G, R))
        back = load_ball(G, p)
        assert back.elements == ball.elements and back.layer_sizes == ball.layer_sizes
        assert ball_bytes(back) == p.read_bytes()
        assert p.read_bytes()[:4] == MAGIC


def test_cache_errors(tmp_path):
    G = construct_group("Z^2")
    p = save_ball(enumerate_ball(G, 5), tmp_path / "z2.cayb")
    with pytest.raises(DescriptorMismatch):
        load_ball(construct_group("F2"), p)
    data = bytearray(p.read_bytes())
    data[40] ^= 0xFF
    p.write_bytes(bytes(data))
    with pytest.raises(ChecksumError):
        load_ball(G, p)
    # bump the version but keep the checksum valid
    import hashlib
    good = bytearray(ball_bytes(enumerate_ball(G, 2)))[:-8]
    good[4:8] = (99).to_bytes(4, "big")
    good += hashlib.blake2b(bytes(good), digest_size=8).digest()
    p.write_bytes(bytes(good))
    with pytest.raises(VersionMismatch):
        load_ball(G, p)


def test_shield_density_limit_is_four_thirds_of_two_to_minus_m_minus_three():
    # packed census and closed-form counting agree; both head to (4/3) 2^(-M-3)
    from fractions import Fraction

    for M in (3, 4):
        limit = Fraction(4, 3) / 2 ** (M + 3)
        rows = shield_census(M, 19)
        dist = [abs(Fraction(h, v) - limit) for _, h, v in rows[-4:]]
        assert all(b < a for a, b in zip(dist, dist[1:]))
        far = Fraction(oracles.shield_count(120, M), oracles.lamplighter_volume(120))
        assert abs(far - limit) < Fraction(1, 10**12)

from fractions import Fraction as F
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from convexagree import oracles
from convexagree.convexity import (
    EncodingError,
    EuclideanRational,
    FiniteExplicit,
    GridBox,
    Grid1D,
    InputError,
    ProductSpace,
    ValueMultiset,
    dilated_decode,
    dilated_encode,
    helly_number,
    hull_contains,
    pick_canonical,
    product_space,
    safe_area,
    space_from_spec,
)

PLANE = EuclideanRational(2)


def members(space, area):
    return frozenset(v for v in space.elements() if v in area)


# -- hull membership ---------------------------------------------------------------

def test_interval_membership():
    assert hull_contains(Grid1D(8), [1, 5], 3)
    assert not hull_contains(Grid1D(8), [1, 5], 6)


def test_box_corner_is_inside():
    assert hull_contains(GridBox([5, 5]), [(0, 0), (4, 4)], (0, 4))


def test_plane_triangle_membership():
    tri = [PLANE.point(0, 0), PLANE.point(2, 0), PLANE.point(0, 2)]
    # Oracle first, then the fast path.
    assert oracles.plane_hull_contains(tri, PLANE.point(1, 1))
    assert not oracles.plane_hull_contains(tri, PLANE.point(2, 2))
    assert hull_contains(PLANE, tri, PLANE.point(1, 1))
    assert not hull_contains(PLANE, tri, PLANE.point(2, 2))


def test_space_mismatch_is_input_error():
    with pytest.raises(InputError):
        hull_contains(GridBox([4, 4]), [(0, 0)], 3)
    with pytest.raises(InputError):
        hull_contains(PLANE, [(F(1),)], PLANE.point(0, 0))
    with pytest.raises(InputError):
        Grid1D(4).check(4)


# -- safe areas ---------------------------------------------------------------------

def test_line_safe_area_drops_outlier():
    space = Grid1D(128)
    M = [1, 2, 3, 100]
    expected = oracles.safe_set(space, M, 1)
    assert expected == frozenset({2, 3})
    area = safe_area(space, M, 1)
    assert members(space, area) == frozenset({2, 3})
    assert pick_canonical(area) == 2


@pytest.mark.parametrize("space,v", [(Grid1D(8), 5), (GridBox([3, 3]), (1, 2)),
                                     (PLANE, PLANE.point(F(1, 3), 2))])
def test_repeated_value_is_its_own_safe_area(space, v):
    area = safe_area(space, [v, v, v], 1)
    assert pick_canonical(area) == v
    assert v in area
    if space.finite:
        assert members(space, area) == {v}


def test_box_safe_area_matches_oracle():
    space = GridBox([10, 10])
    M = [(0, 0), (1, 1), (9, 9)]
    expected = oracles.safe_set(space, M, 1)
    assert expected == frozenset({(1, 1)})
    assert members(space, safe_area(space, M, 1)) == expected


def test_k_larger_than_multiset_is_rejected():
    with pytest.raises(InputError):
        safe_area(Grid1D(8), [1, 2], 3)


def test_empty_area_has_no_witness():
    area = safe_area(Grid1D(8), [1, 7], 1)
    assert area.empty
    assert pick_canonical(area) is None


def test_smaller_encoding_wins():
    space = Grid1D(8)
    assert pick_canonical(safe_area(space, [2, 3], 0)) == 2


def _plane_vertices(M, k):
    """Extreme points of the planar safe area, from lines through input pairs."""
    cands = set(M)
    lines = [(p, q) for p, q in combinations(sorted(set(M)), 2)]
    for (a, b), (c, d) in combinations(lines, 2):
        den = (b[0] - a[0]) * (d[1] - c[1]) - (b[1] - a[1]) * (d[0] - c[0])
        if den == 0:
            continue
        s = ((c[0] - a[0]) * (d[1] - c[1]) - (c[1] - a[1]) * (d[0] - c[0])) / den
        cands.add((a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])))
    inside = [p for p in cands if oracles.plane_safe_contains(M, k, p)]
    return {p for p in inside if not oracles.plane_hull_contains([q for q in inside if q != p], p)}


def test_plane_witness_is_best_vertex():
    M = [PLANE.point(*c) for c in [(0, 0), (6, 0), (0, 6), (6, 6), (3, 1)]]
    area = safe_area(PLANE, M, 1)
    verts = _plane_vertices(M, 1)
    assert verts
    w = pick_canonical(area)
    assert w in verts
    best = min(len(PLANE.shortest_dilated(v, M)) for v in verts)
    assert len(PLANE.wire_encode(w, area)) == best
    assert PLANE.wire_decode(PLANE.wire_encode(w, area)) == w


# -- Helly numbers --------------------------------------------------------------------

def test_helly_numbers():
    assert helly_number(Grid1D(8)) == 2
    assert helly_number(GridBox([3, 3, 3])) == 2
    assert helly_number(EuclideanRational(1)) == 2
    assert helly_number(PLANE) == 3
    assert helly_number(product_space([Grid1D(4), Grid1D(4)])) == 2


def test_dilation_factors():
    assert Grid1D(4).dilation == 1
    assert EuclideanRational(1).dilation == 2
    assert PLANE.dilation == 6


# -- dilated encoding ---------------------------------------------------------------

def test_flag_bit_prefix_for_grids():
    space = Grid1D(16)
    bits = dilated_encode(space, 9)
    assert bits == "0" + space.encode(9)
    assert len(bits) == len(space.encode(9)) + 1
    assert dilated_decode(space, bits) == 9
    with pytest.raises(EncodingError):
        dilated_encode(space, 9, [[0]])


def test_dilated_round_trip_random_vertices():
    import numpy as np
    rng = np.random.Generator(np.random.Philox(key=[3, 7]))
    done = 0
    while done < 1000:
        a, b, c, d = (PLANE.point(*(F(int(x), int(y)) for x, y in zip(rng.integers(-40, 40, 2),
                                                                          rng.integers(1, 9, 2))))
                      for _ in range(4))
        den = (b[0] - a[0]) * (d[1] - c[1]) - (b[1] - a[1]) * (d[0] - c[0])
        if a == b or c == d or den == 0:
            continue
        s = ((c[0] - a[0]) * (d[1] - c[1]) - (c[1] - a[1]) * (d[0] - c[0])) / den
        v = (a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1]))
        bits = dilated_encode(PLANE, v, [[a, b], [c, d]])
        assert bits[0] == "1"
        assert dilated_decode(PLANE, bits) == v
        assert dilated_decode(PLANE, dilated_encode(PLANE, v)) == v
        done += 1


def test_four_point_vertex_within_six_times_input_length():
    M = [PLANE.point(*c) for c in [(F(-7, 3), 5), (11, F(2, 9)), (F(5, 4), -13), (-9, -8)]]
    area = safe_area(PLANE, M, 1)
    L = max(len(PLANE.encode(p)) for p in M)
    assert not area.empty
    assert len(PLANE.wire_encode(pick_canonical(area), area)) <= 6 * L


def test_malformed_hyperplane_witness():
    p, q = PLANE.point(0, 0), PLANE.point(1, 1)
    with pytest.raises(EncodingError):
        dilated_encode(PLANE, PLANE.point(5, 0), [[p, q], [p, q]])
    with pytest.raises(EncodingError):
        dilated_encode(PLANE, p, [[p, q]])
    with pytest.raises(EncodingError):
        dilated_decode(PLANE, "1")


def test_nested_hyperplane_forms_are_refused():
    p, q, r = PLANE.point(0, 0), PLANE.point(2, 0), PLANE.point(0, 2)
    bits = dilated_encode(PLANE, PLANE.point(0, 0), [[p, q], [p, r]])
    # Replace the first nested point's flag with the hyperplane flag.
    pos = 1 + PLANE.count_width
    forged = bits[:pos] + "1" + bits[pos + 1:]
    with pytest.raises(EncodingError):
        dilated_decode(PLANE, forged)


# -- products ---------------------------------------------------------------------------

def test_product_hull_is_box():
    space = product_space([Grid1D(4), Grid1D(4)])
    assert oracles.hull_set(space, [(0, 0), (1, 1)]) == {(0, 0), (0, 1), (1, 0), (1, 1)}
    got = {v for v in space.elements() if hull_contains(space, [(0, 0), (1, 1)], v)}
    assert got == {(0, 0), (0, 1), (1, 0), (1, 1)}


def test_single_factor_product_matches_factor():
    g = Grid1D(8)
    p = product_space([g])
    for M in [[1, 5, 6], [0, 7, 7, 2]]:
        for k in range(len(M)):
            a, b = safe_area(g, M, k), safe_area(p, [(x,) for x in M], k)
            assert members(g, a) == {v[0] for v in members(p, b)}
    assert p.helly == g.helly


def test_product_encoding_concatenates_fixed_width():
    space = product_space([Grid1D(8), Grid1D(4)])
    assert space.encode((5, 2)) == Grid1D(8).encode(5) + Grid1D(4).encode(2)
    assert len(space.encode((0, 0))) == 5


def test_product_needs_finite_factors():
    with pytest.raises(InputError):
        product_space([Grid1D(4), PLANE])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 7), st.integers(0, 5)), min_size=1, max_size=6), st.data())
def test_product_safe_area_is_coordinatewise(M, data):
    k = data.draw(st.integers(0, len(M) - 1))
    space = product_space([Grid1D(8), Grid1D(6)])
    assert members(space, safe_area(space, M, k)) == oracles.safe_set(space, M, k)
    per = [oracles.safe_set(f, [m[i] for m in M], k) for i, f in enumerate(space.factors)]
    assert oracles.safe_set(space, M, k) == {(a, b) for a in per[0] for b in per[1]}


# -- finite explicit spaces ----------------------------------------------------------------

CHAIN = {"elements": ["a", "b", "c", "d"],
         "hulls": [[[0, 2], [0, 1, 2]], [[1, 3], [1, 2, 3]], [[0, 3], [0, 1, 2, 3]],
                   [[0, 1], [0, 1]], [[1, 2], [1, 2]], [[2, 3], [2, 3]],
                   [[0], [0]], [[1], [1]], [[2], [2]], [[3], [3]]]}


def test_finite_explicit_path_convexity():
    space = space_from_spec({"kind": "finite-explicit", **CHAIN})
    assert space.helly == 2
    assert hull_contains(space, ["a", "c"], "b")
    assert not hull_contains(space, ["a", "c"], "d")
    M = ["a", "b", "c", "d"]
    assert members(space, safe_area(space, M, 1)) == oracles.safe_set(space, M, 1)


def test_finite_explicit_rejects_non_closed_family():
    bad = {"elements": ["a", "b", "c"], "hulls": [[[0, 1], [0, 1]], [[1, 2], [0, 1, 2]], [[0, 2], [0, 2]]]}
    with pytest.raises(InputError):
        FiniteExplicit.from_json(bad)


# -- properties -------------------------------------------------------------------------------

SPACES = [Grid1D(8), GridBox([4, 4]), product_space([Grid1D(6), Grid1D(3)])]


@st.composite
def element_lists(draw, min_size=1, max_size=7):
    space = draw(st.sampled_from(SPACES))
    elems = space.elements()
    M = draw(st.lists(st.sampled_from(elems), min_size=min_size, max_size=max_size))
    return space, M


@settings(max_examples=100, deadline=None)
@given(element_lists())
def test_codec_round_trip_and_order_is_total(sm):
    space, M = sm
    encs = {space.encode(v): v for v in space.elements()}
    assert len(encs) == len(space.elements())
    for v in M:
        assert space.decode(space.encode(v)) == v
        assert space.element(v).bit_length == len(space.encode(v))


@settings(max_examples=100, deadline=None)
@given(element_lists(max_size=5), st.data())
def test_hull_is_monotone_and_idempotent(sm, data):
    space, M = sm
    extra = data.draw(st.lists(st.sampled_from(space.elements()), max_size=3))
    small = {v for v in space.elements() if hull_contains(space, M, v)}
    big = {v for v in space.elements() if hull_contains(space, M + extra, v)}
    assert small <= big
    closed = {v for v in space.elements() if hull_contains(space, sorted(small), v)}
    assert closed == small


@settings(max_examples=150, deadline=None)
@given(element_lists(), st.data())
def test_safe_area_matches_enumeration(sm, data):
    space, M = sm
    k = data.draw(st.integers(0, len(M)))
    area = safe_area(space, M, k)
    expected = oracles.safe_set(space, M, k)
    assert members(space, area) == expected
    assert pick_canonical(area) == oracles.canonical_min(space, expected)


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_safe_area_nonempty_below_helly_threshold(data):
    space = data.draw(st.sampled_from(SPACES))
    n = data.draw(st.integers(1, 7))
    t_max = (n - 1) // space.helly
    t = data.draw(st.integers(0, t_max))
    k = data.draw(st.integers(0, t))
    M = data.draw(st.lists(st.sampled_from(space.elements()), min_size=n - t + k, max_size=n - t + k))
    area = safe_area(space, M, k)
    assert not area.empty
    inside = members(space, area)
    for sub in combinations(range(len(M)), n - t):
        assert inside <= oracles.hull_set(space, [M[i] for i in sub])


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_bounded_removal_variant_nonempty(data):
    space = data.draw(st.sampled_from(SPACES))
    n = data.draw(st.integers(1, 7))
    t = data.draw(st.integers(0, (n - 1) // (space.helly + 1)))
    k = data.draw(st.integers(0, n))
    size = n - 2 * t + k
    if size > n or size < 1:
        return
    M = data.draw(st.lists(st.sampled_from(space.elements()), min_size=size, max_size=size))
    assert not safe_area(space, M, min(k, t)).empty


@settings(max_examples=100, deadline=None)
@given(element_lists(), st.randoms(use_true_random=False), st.data())
def test_witness_ignores_input_order(sm, rnd, data):
    space, M = sm
    k = data.draw(st.integers(0, len(M)))
    shuffled = list(M)
    rnd.shuffle(shuffled)
    assert pick_canonical(safe_area(space, M, k)) == pick_canonical(safe_area(space, shuffled, k))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=3, max_size=5), st.data())
def test_plane_membership_matches_triangle_oracle(pts, data):
    M = [PLANE.point(*p) for p in pts]
    k = data.draw(st.integers(0, len(M) - 1))
    area = safe_area(PLANE, M, k)
    probes = [PLANE.point(F(x, 2), F(y, 2)) for x in range(-8, 9, 3) for y in range(-8, 9, 3)]
    for p in probes:
        assert (p in area) == oracles.plane_safe_contains(M, k, p)
    if not area.empty:
        assert oracles.plane_safe_contains(M, k, pick_canonical(area))


def test_multiset_equality_ignores_order():
    assert ValueMultiset([1, 2, 2]) == ValueMultiset([2, 1, 2])
    assert ValueMultiset([1, 2]) != ValueMultiset([1, 2, 2])
    assert len(ValueMultiset([3, 3, 3])) == 3

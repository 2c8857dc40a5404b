"""Tests for coloring sources, the comb fixture and the board JSON format."""

import numpy as np
import pytest

from app.models.schemas import BallWindow, CombParams, RectWindow
from app.services.coloring import (
    CombParamsError,
    comb_source,
    diagonal_source,
    empty_source,
    family_source,
    finite_source,
    full_source,
    labeled_edges_fixture,
    overlay,
    random_source,
    source_from_json,
    source_to_json,
)
from app.services.hexgrid import Tile, is_adjacent, window_contains, window_tiles
from tests.oracles import label_components


def test_diagonal_ball_six_has_thirteen_blacks():
    assert len(diagonal_source().blacks_in(BallWindow(radius=6))) == 13


def test_overlay_adds_finite_tiles():
    src = overlay(diagonal_source(), finite_source([(0, 5)]))
    assert len(src.blacks_in(BallWindow(radius=6))) == 14
    assert src.is_black(Tile(0, 5))
    assert src.finite_support() is None


def test_empty_and_full():
    w = BallWindow(radius=4)
    assert empty_source().blacks_in(w) == []
    assert empty_source().finite_support() == frozenset()
    assert full_source().blacks_in(w) == window_tiles(w)


@pytest.mark.parametrize(
    "src",
    [diagonal_source(), full_source(), comb_source(), comb_source(CombParams(branch_count_limit=3))],
    ids=["diagonal", "full", "comb", "comb-limited"],
)
@pytest.mark.parametrize(
    "window",
    [BallWindow(radius=40), BallWindow(center=(25, -7), radius=15), RectWindow(q_min=-5, q_max=30, r_min=-20, r_max=9)],
)
def test_fast_enumeration_matches_probing(src, window):
    assert src.blacks_in(window) == [t for t in window_tiles(window) if src.is_black(t)]


def test_comb_lobe_starts():
    assert comb_source().lobe_starts(400) == [0, 4, 10, 18, 28, 40, 54, 70, 88, 108, 130, 154, 180, 208, 238, 270, 304, 340, 378]


def test_comb_profile_moves_one_row_per_column():
    comb = comb_source()
    assert [comb.profile(q) for q in range(5)] == [0, 1, 0, 1, 0]
    for q in range(1, 500):
        assert abs(comb.profile(q) - comb.profile(q - 1)) == 1


def test_comb_lobe_heights_grow():
    comb = comb_source()
    starts = comb.lobe_starts(400)
    heights = [max(comb.profile(q) for q in range(a, b + 1)) for a, b in zip(starts, starts[1:])]
    assert heights == list(range(1, len(starts)))


def test_comb_branches_are_connected_staircases():
    comb = comb_source()
    for b in range(4):
        tiles = comb.branch_tiles(b, 120)
        assert tiles[0] == (0, 2 * b)
        assert all(comb.is_black(t) for t in tiles)
        assert all(is_adjacent(x, y) for x, y in zip(tiles, tiles[1:]))


def test_comb_window_is_one_component():
    blacks = set(comb_source().blacks_in(BallWindow(radius=60)))
    labels = label_components(blacks, 60)
    assert len(set(labels.values())) == 1


def test_comb_branch_returns_to_base_line_more_often_in_larger_balls():
    comb = comb_source()

    def returns(radius):
        w = BallWindow(radius=radius)
        return sum(1 for t in comb.branch_tiles(0, radius) if window_contains(w, t) and comb.profile(t.q) == 0)

    counts = [returns(r) for r in (100, 200, 400)]
    assert counts[0] < counts[1] < counts[2]
    assert counts[1] >= 5


def test_comb_branch_limit():
    comb = comb_source(CombParams(branch_count_limit=2))
    assert comb.branch_tiles(1, 10)
    assert comb.branch_tiles(2, 10) == []
    # spine
    assert comb.is_black(Tile(0, 4))
    assert not any(comb.is_black(t) for t in comb_source().branch_tiles(2, 40)[1:])


def test_comb_explicit_amplitudes_continue_by_step():
    comb = comb_source(CombParams(amplitudes=[2, 5], amplitude_step=3))
    assert [comb.amplitude(m) for m in range(4)] == [2, 5, 8, 11]


@pytest.mark.parametrize(
    "params",
    [
        CombParams(amplitudes=[2, 2]),
        CombParams(amplitudes=[0, 3]),
        CombParams(amplitudes=[]),
        CombParams(amplitude_offset=0),
        CombParams(amplitude_step=0),
    ],
)
def test_invalid_comb_params(params):
    with pytest.raises(CombParamsError):
        comb_source(params)


def test_random_source_is_seeded():
    w = BallWindow(radius=8)
    a = random_source(np.random.default_rng(7), w, 0.5)
    b = random_source(np.random.default_rng(7), w, 0.5)
    assert a.blacks_in(w) == b.blacks_in(w)
    assert random_source(np.random.default_rng(7), w, 0.0).blacks_in(w) == []
    assert random_source(np.random.default_rng(7), w, 1.0).blacks_in(w) == window_tiles(w)


def test_family_source():
    assert family_source("diagonal").is_black(Tile(9, 0))
    assert family_source("comb", {"branch_count_limit": 1}).params.branch_count_limit == 1
    with pytest.raises(ValueError):
        family_source("spiral")


def test_labeled_fixture_edges_are_valid():
    src, labels = labeled_edges_fixture()
    for a, b in labels.values():
        assert is_adjacent(a, b)
        assert src.is_black(a)
        assert not src.is_black(b)


@pytest.mark.parametrize(
    "src",
    [finite_source([(0, 0), (3, -1)]), diagonal_source(), full_source(), comb_source(CombParams(jog_pairs=2))],
)
def test_json_board_format_preserves_blacks(src):
    w = BallWindow(radius=30)
    loaded = source_from_json(source_to_json(src))
    assert loaded.blacks_in(w) == src.blacks_in(w)


def test_json_export_of_unknown_source_needs_window():
    src = overlay(diagonal_source(), finite_source([(0, 5)]))
    with pytest.raises(ValueError):
        source_to_json(src)
    w = BallWindow(radius=6)
    assert source_from_json(source_to_json(src, w)).blacks_in(w) == src.blacks_in(w)


def test_json_board_needs_blacks_or_family():
    with pytest.raises(ValueError):
        source_from_json({"tiles": []})

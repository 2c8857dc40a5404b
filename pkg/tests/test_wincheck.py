"""Tests for the bounded formula evaluators on the analytic fixtures."""

import numpy as np
import pytest

from app.models.schemas import BallWindow, Resolution, Sign, Truth
from app.services.coloring import (
    ColoringSource,
    comb_source,
    diagonal_source,
    empty_source,
    finite_source,
    full_source,
    random_source,
)
from app.services.hexgrid import PreconditionError, Tile
from app.services.wincheck import (
    FORMULAS,
    check_resolution,
    eval_phi,
    eval_phi1,
    eval_phi1_primed,
    eval_phi2,
    eval_phi3,
    eval_phi4,
    eval_psi1,
    eval_psi1_primed,
    truth_all,
    truth_any,
    truth_not,
    verdict_report,
)

T, F, U = Truth.TRUE, Truth.FALSE, Truth.UNKNOWN


def test_kleene_connectives():
    assert truth_all([T, T]) == T
    assert truth_all([T, U]) == U
    assert truth_all([U, F]) == F
    assert truth_all([]) == T
    assert truth_any([F, F]) == F
    assert truth_any([F, U]) == U
    assert truth_any([U, T]) == T
    assert truth_any([]) == F
    assert [truth_not(v) for v in (T, F, U)] == [F, T, U]


@pytest.fixture(scope="module")
def diagonal_res():
    return Resolution(window=BallWindow(radius=50), n_max=3)


def test_diagonal_formulas(diagonal_res):
    src = diagonal_source()
    phi1 = eval_phi1(src, diagonal_res)
    assert phi1.value == T
    assert phi1.certificate_kind == "size_threshold"
    assert eval_phi2(src, Sign.PLUS, diagonal_res).value == T
    assert eval_phi2(src, Sign.MINUS, diagonal_res).value == T
    assert eval_phi3(src, Sign.PLUS, diagonal_res).value == T
    assert eval_phi3(src, Sign.MINUS, diagonal_res).value == T
    assert eval_phi4(src, diagonal_res).value == T


def test_diagonal_exit_witnesses_point_both_ways(diagonal_res):
    src = diagonal_source()
    plus = eval_phi3(src, Sign.PLUS, diagonal_res)
    minus = eval_phi3(src, Sign.MINUS, diagonal_res)
    assert plus.certificate_kind == minus.certificate_kind == "window_exit_suffix"
    assert plus.witness["direction"] != minus.witness["direction"]


def test_full_board():
    res = Resolution(window=BallWindow(radius=20))
    src = full_source()
    assert eval_phi1(src, res).value == T
    phi2 = eval_phi2(src, Sign.PLUS, res)
    assert phi2.value == T
    assert set(phi2.witness["needed_r"].values()) == {0}
    assert eval_phi3(src, Sign.PLUS, res).value == U
    assert eval_phi4(src, res).value == T


def test_empty_board():
    res = Resolution(window=BallWindow(radius=20))
    src = empty_source()
    phi1 = eval_phi1(src, res)
    assert phi1.value == F
    assert phi1.certificate_kind == "no_anchor"
    assert eval_phi1_primed(src, res).value == F
    assert eval_phi2(src, Sign.PLUS, res).value == T
    phi3 = eval_phi3(src, Sign.MINUS, res)
    assert phi3.value == F
    assert phi3.certificate_kind == "finite_support"
    assert eval_phi4(src, res).value == F


def test_finite_board_loses():
    res = Resolution(window=BallWindow(radius=20))
    src = finite_source([(q, 0) for q in range(-6, 7)])
    verdict = eval_phi1(src, res)
    assert verdict.value == F
    assert verdict.certificate_kind == "all_anchors_finite"
    assert eval_phi4(src, res).value == F


def test_comb_satisfies_phi1_and_phi1_primed():
    res = Resolution(window=BallWindow(radius=600), n_max=4, trace_budget=2000)
    src = comb_source()
    assert eval_phi1(src, res).value == T
    assert eval_phi1_primed(src, res).value == T


def test_comb_has_separated_non_exiting_border_traces():
    res = Resolution(window=BallWindow(radius=600), n_max=4, trace_budget=2000)
    verdict = eval_phi2(comb_source(), Sign.PLUS, res)
    assert verdict.value == F
    assert verdict.certificate_kind == "separated_nonexiting_traces"
    assert len(verdict.witness["edges"]) == res.witness_budget


def test_comb_is_never_certified_winning():
    res = Resolution(window=BallWindow(radius=200), n_max=3)
    src = comb_source()
    assert eval_phi3(src, Sign.PLUS, res).value == U
    assert eval_phi3(src, Sign.MINUS, res).value == T
    assert eval_phi4(src, res).value == U


def test_psi1():
    res = Resolution(window=BallWindow(radius=50), n_max=3)
    assert eval_psi1(diagonal_source(), Tile(0, 0), 0, Sign.PLUS, res).value == T
    assert eval_psi1(diagonal_source(), Tile(0, 0), 0, Sign.MINUS, res).value == T
    pair = finite_source([(0, 0), (1, 0)])
    verdict = eval_psi1(pair, Tile(0, 0), 0, Sign.PLUS, res)
    assert verdict.value == F
    assert verdict.witness["size"] == 2


def test_psi1_primed():
    res = Resolution(window=BallWindow(radius=50), n_max=3)
    reached = eval_psi1_primed(diagonal_source(), Tile(1, 0), 1, Sign.PLUS, res)
    assert reached.value == T
    assert reached.witness["reached"] == [3, 0]
    assert eval_psi1_primed(finite_source([(0, 0)]), Tile(0, 0), 0, Sign.PLUS, res).value == F


@pytest.mark.parametrize(
    "tile,n,sign",
    [((-1, 0), 0, Sign.PLUS), ((0, 1), 0, Sign.PLUS), ((2, 0), 1, Sign.MINUS), ((60, 0), 0, Sign.PLUS)],
    ids=["outside-quarter-plane", "vacant", "outside-minus", "outside-window"],
)
def test_psi1_preconditions(tile, n, sign):
    res = Resolution(window=BallWindow(radius=50), n_max=3)
    with pytest.raises(PreconditionError):
        eval_psi1(diagonal_source(), Tile(*tile), n, sign, res)


def test_resolution_must_contain_corners():
    with pytest.raises(PreconditionError):
        check_resolution(Resolution(window=BallWindow(radius=2), n_max=3))
    with pytest.raises(PreconditionError):
        eval_phi1(diagonal_source(), Resolution(window=BallWindow(radius=2), n_max=3))


def test_dispatch_and_report():
    res = Resolution(window=BallWindow(radius=20))
    src = empty_source()
    for name in FORMULAS:
        verdict = eval_phi(name, src, res)
        report = verdict_report(name, verdict, res)
        assert report.formula == name
        assert report.verdict == verdict.value
    phi4 = verdict_report("phi4", eval_phi("phi4", src, res), res)
    assert set(phi4.parts) == {"phi1", "phi2+", "phi2-", "phi3+", "phi3-"}
    with pytest.raises(ValueError):
        eval_phi("phi5", src, res)


@pytest.mark.parametrize("radius", [12, 16, 20, 24, 40, 60])
@pytest.mark.parametrize("n_max", [1, 2, 3])
@pytest.mark.parametrize("size_threshold", [10, 40])
def test_comb_never_certified_winning_at_any_resolution(radius, n_max, size_threshold):
    res = Resolution(window=BallWindow(radius=radius), n_max=n_max, size_threshold=size_threshold, trace_budget=4000)
    verdict = eval_phi4(comb_source(), res)
    assert verdict.parts["phi3+"].value != T
    assert verdict.value != T


def test_finite_random_boards_are_never_certified_winning():
    rng = np.random.default_rng(11)
    res = Resolution(
        window=BallWindow(radius=20), n_max=2, r_max=1, trace_budget=6, witness_budget=3, size_threshold=10
    )
    for _ in range(30):
        src = random_source(rng, BallWindow(radius=14), 0.6)
        assert eval_phi2(src, Sign.PLUS, res).value != F
        assert eval_phi2(src, Sign.MINUS, res).value != F
        assert eval_phi3(src, Sign.PLUS, res).value != T
        assert eval_phi3(src, Sign.MINUS, res).value != T
        assert eval_phi1(src, res).value != T
        assert eval_phi4(src, res).value != T


def test_phi2_finite_support_inside_ball():
    res = Resolution(window=BallWindow(radius=20), n_max=2, r_max=1)
    verdict = eval_phi2(finite_source([(0, 0), (1, 0)]), Sign.PLUS, res)
    assert verdict.value == T
    assert verdict.certificate_kind == "finite_support"
    assert verdict.witness == {"support_radius": 1}


def _refinement_sources():
    rng = np.random.default_rng(5)
    return {
        "diagonal": diagonal_source(),
        "empty": empty_source(),
        "full": full_source(),
        "segment": finite_source([(q, 0) for q in range(-6, 7)]),
        "random": random_source(rng, BallWindow(radius=14), 0.45),
    }


@pytest.mark.parametrize("name", ["diagonal", "empty", "full", "segment", "random"])
def test_larger_budgets_only_settle_unknown_verdicts(name):
    src = _refinement_sources()[name]
    coarse = Resolution(window=BallWindow(radius=30), n_max=3, trace_budget=40, component_budget=2000)
    fine = coarse.model_copy(update={"trace_budget": 4000, "component_budget": 500_000})
    for formula in FORMULAS:
        before = eval_phi(formula, src, coarse).value
        after = eval_phi(formula, src, fine).value
        if before != U:
            assert after == before, formula


class _HalfDiagonal(ColoringSource):
    def is_black(self, t: Tile) -> bool:
        return t[1] == 0 and t[0] >= 0


def test_phi1_on_an_infinite_anchor_is_never_false():
    res = Resolution(window=BallWindow(radius=30), n_max=2)
    verdict = eval_phi1(_HalfDiagonal(), res)
    assert verdict.value == U
    assert verdict.witness == {"undecided_anchors": [[0, 0]]}

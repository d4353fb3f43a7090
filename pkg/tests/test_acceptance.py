"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Sizes and tolerances are the stated ones; nothing here is relaxed. Criterion 10
is split into its legality/annotation part (10a) and its token-count part (10b)
so that each verdict is reported separately.
"""

from __future__ import annotations

import pytest

from brdyn import verify as V
from brdyn.verify import Check


def report(capsys, number: str, check: Check) -> None:
    with capsys.disabled():
        print(f"\n[criterion {number}] {check.line()}")
    assert check.ok, check.detail


def test_criterion_01_tree_bound(capsys):
    report(capsys, "1", V.tree_bound(games=200, max_resources=8, runs=10**4))


def test_criterion_02_type1_circles_acyclic(capsys):
    report(capsys, "2", V.type1_acyclic(games=200, max_n=6))


def test_criterion_03_type3_cycles(capsys):
    report(capsys, "3", V.type3_cycles(ns=(3, 4, 5, 6)))


def test_criterion_04_potentials(capsys):
    report(capsys, "4", V.potentials(per_case=40, max_n=6))


def test_criterion_05_case3_linear(capsys):
    report(capsys, "5", V.case3_linear(ns=(4, 6, 8)))


def test_criterion_06_random_walk(capsys):
    report(capsys, "6", V.random_walk(ns=(10, 20), runs=10**4))


def test_criterion_07_block_balance(capsys):
    report(capsys, "7", V.block_balance(max_n=8))


def test_criterion_08_token_monotone(capsys):
    report(capsys, "8", V.token_monotone(runs=1000, max_n=12))


def test_criterion_09_gadget_oracle(capsys):
    report(capsys, "9", V.gadget_oracle())


def test_criterion_10a_replays_legal_and_match_panels(capsys):
    report(capsys, "10a", V.gadget_replay(n=4))


def test_criterion_10b_replay_token_growth_four_gadgets(capsys):
    report(capsys, "10b", V.gadget_token_growth(4))


def test_criterion_10_supplement_token_growth_six_gadgets(capsys):
    report(capsys, "10 (supplement, six gadgets)", V.gadget_token_growth(6))


@pytest.mark.slow
def test_criterion_11_gadget_scaling(capsys):
    report(
        capsys, "11",
        V.gadget_scaling(ns=(4, 8, 10, 12, 16, 20), runs=400, ratio_ns=(4, 8, 10), monotone_ns=(4, 8, 12, 16, 20)),
    )


def test_criterion_12_rank_reduction_and_tree_conversion(capsys):
    report(capsys, "12", V.rank_and_tree(games=100, max_n=6))

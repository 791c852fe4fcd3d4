import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from core.python.rcga_pipeline.eda_core import TRACE_MASSES, new_frequency_matrix, run
from core.python.rcga_pipeline.errors import InvalidParameterError
from core.python.rcga_pipeline.fitness_core import G_ONEMAX, make_objective
from core.python.rcga_pipeline.hierarchy_core import (
    PhaseTracker,
    build_hierarchy,
    compute_ell,
    compute_kappa_star,
    mass,
    phase_state,
    phases_from_masses,
    suffix_numerators,
    suffix_starts_for,
)


def test_r10_table():
    h = build_hierarchy(10)
    assert h.kappa_star == 6
    assert h.ells == (0, 3, 5, 7, 8, 8)
    assert [list(h.block(kappa)) for kappa in range(7)] == [[0, 1, 2], [3, 4], [5, 6], [7], [], [8], [9]]
    assert list(h.suffix(1)) == [3, 4, 5, 6, 7, 8, 9]
    assert list(h.suffix(6)) == [9]


def test_r11_table():
    h = build_hierarchy(11)
    assert h.kappa_star == 6
    assert h.ells == (0, 4, 6, 8, 9, 9)


def test_small_alphabets():
    assert build_hierarchy(4).kappa_star == 3
    h = build_hierarchy(3)
    assert h.kappa_star == 2
    assert h.ells == (0, 1)
    assert [list(h.block(kappa)) for kappa in range(3)] == [[0], [1], [2]]


def test_binary_alphabet_is_rejected():
    with pytest.raises(InvalidParameterError):
        build_hierarchy(2)
    assert suffix_starts_for(2) == (0, 1)


@pytest.mark.parametrize("r", range(3, 513))
def test_blocks_partition_values(r):
    h = build_hierarchy(r)
    covered = [value for kappa in range(h.kappa_star + 1) for value in h.block(kappa)]
    assert covered == list(range(r))
    assert h.ells[0] == 0
    assert all(a <= b for a, b in zip(h.ells, h.ells[1:]))
    assert h.ells[-1] <= r - 2
    # kappa* is the ceiling of log_{3/2}(r - 1), and strictly above it
    assert 1.5 ** h.kappa_star >= r - 1
    assert h.kappa_star == 0 or 1.5 ** (h.kappa_star - 1) < r - 1
    assert h.kappa_star > math.log(r - 1, 1.5)


def test_ell_matches_float_formula():
    for r in (5, 10, 37, 100):
        for kappa in range(compute_kappa_star(r)):
            assert compute_ell(kappa, r) == math.ceil(round((1 - (2 / 3) ** kappa) * (r - 1), 9))


def test_block_of():
    h = build_hierarchy(10)
    assert [h.block_of(value) for value in range(10)] == [0, 0, 0, 1, 1, 2, 2, 3, 5, 6]
    with pytest.raises(InvalidParameterError):
        h.block_of(10)


def test_mass_queries():
    m = new_frequency_matrix(2, 10, 20)
    h = build_hierarchy(10)
    assert mass(m, 0, h.suffix(1)) == Fraction(7, 10)
    assert mass(m, 1, range(10)) == 1
    assert mass(m, 1, []) == 0
    with pytest.raises(InvalidParameterError):
        mass(m, 2, [0])
    with pytest.raises(InvalidParameterError):
        mass(m, 0, [10])


@given(split=st.integers(0, 9), seed=st.integers(0, 1000))
def test_mass_is_additive(split, seed):
    m = new_frequency_matrix(1, 10, 30)
    rng = np.random.default_rng(seed)
    m.counts[0] = rng.multinomial(30, [0.1] * 10)
    assert mass(m, 0, range(split)) + mass(m, 0, range(split, 10)) == 1


def test_suffix_numerators_match_mass():
    m = new_frequency_matrix(3, 10, 10)
    m.counts[1] = [0, 0, 0, 4, 0, 3, 0, 0, 0, 3]
    h = build_hierarchy(10)
    suffix = suffix_numerators(m.counts, h.starts)
    for kappa, start in enumerate(h.starts):
        assert Fraction(int(suffix[1, kappa]), 10) == mass(m, 1, range(start, 10))


def test_phase_state_examples():
    h = build_hierarchy(10)
    m = new_frequency_matrix(3, 10, 10)
    state = phase_state(m, 0, h)
    assert (state.psi, state.confined, state.complete) == (0, True, False)

    m.counts[1] = [0] * 9 + [10]
    state = phase_state(m, 1, h)
    assert (state.psi, state.confined, state.complete) == (6, True, True)

    m.counts[2] = [0, 0, 0, 4, 1, 1, 1, 1, 1, 1]
    assert phase_state(m, 2, h).psi == 1


def test_phase_state_reports_reappearing_mass():
    h = build_hierarchy(10)
    m = new_frequency_matrix(1, 10, 10)
    m.counts[0] = [0, 0, 0, 4, 1, 1, 1, 1, 1, 1]
    tracked = phase_state(m, 0, h)
    m.counts[0] = [1, 0, 0, 3, 1, 1, 1, 1, 1, 1]
    state = phase_state(m, 0, h, previous=tracked)
    assert state.psi == 1 and not state.confined


def _suffix(h, rows, K):
    counts = np.asarray(rows, dtype=np.int64)
    assert np.all(counts.sum(axis=1) == K)
    return suffix_numerators(counts, h.starts)


def test_tracker_records_skips_and_ratios():
    h = build_hierarchy(10)
    tracker = PhaseTracker(h, 1)
    tracker.start(_suffix(h, [[1] * 10], 10))
    # K_0 emptied at t=5 straight into K_2: phase 1 is skipped
    tracker.observe(5, _suffix(h, [[0, 0, 0, 0, 0, 4, 1, 1, 2, 2]], 10))
    tracker.observe(9, _suffix(h, [[0] * 9 + [10]], 10))
    records = tracker.finish()

    assert [(rec.kappa, rec.start, rec.end, rec.skipped) for rec in records] == [
        (0, 0, 5, False), (1, 5, 5, True), (2, 5, 9, False), (3, 9, 9, True), (4, 9, 9, True), (5, 9, 9, True)]
    first = records[0]
    assert first.ratios_start[1] == Fraction(5, 7)
    assert first.ratios_end[1] == Fraction(1, 1)
    assert first.length == 5
    assert tracker.regressions == 0


def test_tracker_keeps_unfinished_phase_open():
    h = build_hierarchy(4)
    tracker = PhaseTracker(h, 2)
    tracker.start(_suffix(h, [[1, 1, 1, 1], [0, 0, 0, 4]], 4))
    records = tracker.finish()
    assert len(records) == 1
    assert records[0].position == 0 and records[0].end is None and records[0].length is None


def test_initial_ratios_are_at_least_two_fifths():
    for r in (10, 11, 16, 50):
        h = build_hierarchy(r)
        tracker = PhaseTracker(h, 1)
        tracker.start(suffix_numerators(new_frequency_matrix(1, r, r).counts, h.starts))
        ratios = tracker.records[0].ratios_start
        assert all(ratio >= Fraction(2, 5) for ratio in ratios.values())


def test_phases_never_regress_along_a_run():
    n, r, K = 6, 5, 20
    h = build_hierarchy(r)
    result = run(n, r, K, make_objective(G_ONEMAX, n, r), 3000, seed=12, trace_level=TRACE_MASSES)
    initial = suffix_numerators(result.initial_matrix.counts, h.starts)
    records = phases_from_masses(initial, result.trace, h)

    tracker = PhaseTracker(h, n)
    tracker.start(initial)
    for record in result.trace:
        tracker.observe(record.t + 1, record.suffix)
    assert tracker.regressions == 0
    for i in range(n):
        phases = [rec for rec in records if rec.position == i]
        assert [rec.kappa for rec in phases] == sorted(rec.kappa for rec in phases)
        assert phases[0].kappa == 0 and phases[0].start == 0

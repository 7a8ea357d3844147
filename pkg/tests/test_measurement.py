"""Density profiles, the space-time matrix, and derived statistics."""

from types import SimpleNamespace

import numpy as np
import pytest

from physarum.measurement import (BASELINE_WINDOW, ONSET_WINDOW,
                                  RECOVERY_FACTOR, RECOVERY_PERSISTENCE,
                                  DensityProfile, SpaceTimeMatrix,
                                  column_density, contrast_index,
                                  onset_columns, recovery_step,
                                  sample_if_due, summarize_run, uniformity_cv)


def matrix_from_rows(rows, interval=10, start=0):
    rows = np.asarray(rows)
    st = SpaceTimeMatrix(interval, rows.shape[1])
    for k, row in enumerate(rows):
        st.add_row(start + k * interval, row)
    return st


# --- column_density ---

def test_column_density_counts_by_floor():
    agents = SimpleNamespace(x=np.array([0.2, 0.9, 3.5, 3.1, 7.0]))
    counts = column_density(agents, 8)
    assert counts.tolist() == [2, 0, 0, 2, 0, 0, 0, 1]
    assert counts.dtype == np.int64


def test_column_density_empty_and_errors():
    assert column_density(SimpleNamespace(x=np.array([])), 5).tolist() == [0] * 5
    with pytest.raises(ValueError):
        column_density(SimpleNamespace(x=np.array([5.0])), 5)
    with pytest.raises(ValueError):
        column_density(SimpleNamespace(x=np.array([-0.1])), 5)


# --- SpaceTimeMatrix ---

def test_matrix_rows_and_steps():
    st = SpaceTimeMatrix(10, 4)
    st.add_row(0, [1, 2, 3, 4])
    st.add_row(10, [4, 3, 2, 1])
    assert len(st) == 2
    assert st.steps.tolist() == [0, 10]
    assert st.counts.shape == (2, 4)
    assert st.profile(1).step == 10
    assert st.profile(1).counts.tolist() == [4, 3, 2, 1]


def test_matrix_validation():
    st = SpaceTimeMatrix(10, 4)
    with pytest.raises(ValueError):
        st.add_row(0, [1, 2, 3])
    with pytest.raises(ValueError):
        st.add_row(0, [1, -2, 3, 4])
    st.add_row(0, [1, 2, 3, 4])
    with pytest.raises(ValueError):
        st.add_row(25, [1, 2, 3, 4])  # not one interval later
    with pytest.raises(ValueError):
        SpaceTimeMatrix(0, 4)
    with pytest.raises(ValueError):
        SpaceTimeMatrix(10, 0)


def test_rows_in_steps_is_inclusive():
    st = matrix_from_rows(np.ones((6, 3)), interval=10)
    steps, rows = st.rows_in_steps(10, 40)
    assert steps.tolist() == [10, 20, 30, 40]
    assert rows.shape == (4, 3)


# --- contrast ---

def test_contrast_index_ratio_of_means():
    profile = DensityProfile(0, np.array([1, 1, 4, 6, 1, 1]))
    assert contrast_index(profile, [2, 3]) == pytest.approx(5.0)


def test_contrast_index_scale_invariant():
    counts = np.array([3, 9, 27, 5, 8, 2])
    a = contrast_index(DensityProfile(0, counts), [1, 2])
    b = contrast_index(DensityProfile(0, counts * 17), [1, 2])
    assert a == pytest.approx(b)


def test_contrast_index_degenerate_values():
    assert contrast_index(DensityProfile(0, np.array([5, 5, 0, 0])), [0, 1]) \
        == float("inf")
    assert np.isnan(contrast_index(DensityProfile(0, np.array([0, 0, 0])), [0]))


def test_contrast_index_requires_strict_subset():
    profile = DensityProfile(0, np.array([1, 2, 3]))
    with pytest.raises(ValueError):
        contrast_index(profile, [0, 1, 2])
    with pytest.raises(ValueError):
        contrast_index(profile, [])


# --- uniformity ---

def test_uniformity_cv_values():
    assert uniformity_cv(DensityProfile(0, np.array([7, 7, 7, 7]))) == 0.0
    # population std of [2, 4] is 1, mean 3
    assert uniformity_cv(DensityProfile(0, np.array([2, 4]))) \
        == pytest.approx(1 / 3)
    with pytest.raises(ValueError):
        uniformity_cv(DensityProfile(0, np.array([0, 0])))


# --- recovery ---

def test_recovery_immediate_when_uniform():
    rows = np.vstack([np.tile([9, 1, 2], (5, 1)), np.tile([4, 4, 4], (10, 1))])
    st = matrix_from_rows(rows, interval=10)
    # uniform from step 50 on; persistence satisfied by the remaining samples
    assert recovery_step(st, 50, baseline_cv=0.1, factor=1.5,
                         persistence=5) == 50
    assert recovery_step(st, 45, baseline_cv=0.1, factor=1.5,
                         persistence=5) == 50


def test_recovery_absent_when_never_uniform():
    rows = np.tile([9, 1, 2], (12, 1))
    st = matrix_from_rows(rows, interval=10)
    assert recovery_step(st, 0, baseline_cv=0.1, factor=1.5,
                         persistence=3) is None


def test_recovery_requires_persistence():
    quiet = [4, 4, 4]
    noisy = [9, 1, 2]
    rows = np.vstack([[noisy] * 3, [quiet] * 4, [noisy] * 2, [quiet] * 6])
    st = matrix_from_rows(rows, interval=10)
    # first quiet stretch lasts 4 samples, second 6: persistence 5 picks the
    # second stretch (sample index 9 -> step 90)
    assert recovery_step(st, 0, baseline_cv=0.1, factor=1.0,
                         persistence=5) == 90


def test_recovery_validation():
    st = matrix_from_rows(np.ones((4, 3)))
    with pytest.raises(ValueError):
        recovery_step(st, 0, 0.1, factor=0.5)
    with pytest.raises(ValueError):
        recovery_step(st, 0, 0.1, factor=1.5, persistence=0)
    assert recovery_step(SpaceTimeMatrix(10, 3), 0, 0.1, 1.5) is None


def test_recovery_not_confirmed_past_run_end():
    rows = np.vstack([np.tile([9, 1, 2], (5, 1)), np.tile([4, 4, 4], (3, 1))])
    st = matrix_from_rows(rows, interval=10)
    # only 3 uniform samples remain; persistence 5 cannot be confirmed
    assert recovery_step(st, 50, 0.1, 1.5, persistence=5) is None


# --- onset ---

def build_onset_matrix(width=300, samples=10, bumps=((100, 3), (199, 2))):
    """Flat matrix except monotone density growth at the given columns."""
    rows = np.full((samples, width), 20, dtype=np.int64)
    for col, slope in bumps:
        rows[:, col] += slope * np.arange(samples)
    return matrix_from_rows(rows, interval=10, start=1000)


def test_onset_finds_the_two_changing_columns():
    st = build_onset_matrix()
    assert onset_columns(st, 1000, ONSET_WINDOW) == [100, 199]


def test_onset_constant_matrix_is_empty():
    st = matrix_from_rows(np.full((8, 50), 6), interval=10, start=1000)
    assert onset_columns(st, 1000, ONSET_WINDOW) == []


def test_onset_needs_two_samples():
    st = matrix_from_rows(np.full((3, 50), 6), interval=10, start=0)
    with pytest.raises(ValueError):
        onset_columns(st, 20, 5)


def test_onset_translation_equivariance():
    width, shift = 300, 137
    base = np.full((10, width), 20, dtype=np.int64)
    gen = np.random.default_rng(31)
    base += gen.integers(0, 3, size=base.shape)
    base[:, 100] += 4 * np.arange(10)[:, None].squeeze()
    base[:, 213] += 3 * np.arange(10)
    st = matrix_from_rows(base, interval=10, start=0)
    st_shift = matrix_from_rows(np.roll(base, shift, axis=1), interval=10,
                                start=0)
    got = onset_columns(st, 0, 90)
    got_shift = onset_columns(st_shift, 0, 90)
    assert sorted((c + shift) % width for c in got) == got_shift


def test_onset_plateau_resolves_to_lowest_column():
    rows = np.full((6, 40), 10, dtype=np.int64)
    rows[:, 5:8] += 4 * np.arange(6)[:, None]  # three-column plateau
    rows[:, 20] += 2 * np.arange(6)
    st = matrix_from_rows(rows, interval=10, start=0)
    assert onset_columns(st, 0, 50) == [5, 20]


def test_onset_wraps_circularly():
    rows = np.full((6, 40), 10, dtype=np.int64)
    rows[:, 0] += 5 * np.arange(6)   # peak at the seam
    rows[:, 39] += 2 * np.arange(6)
    st = matrix_from_rows(rows, interval=10, start=0)
    assert 0 in onset_columns(st, 0, 50)


# --- sampling ---

def test_sample_if_due_interval_10():
    st = SpaceTimeMatrix(10, 6)
    world = SimpleNamespace(population=SimpleNamespace(x=np.array([1.5, 4.5])))
    for step in range(100):
        sample_if_due(world, step, st, 10)
    assert len(st) == 10
    assert st.steps.tolist() == list(range(0, 100, 10))


def test_sample_if_due_interval_one_and_long():
    world = SimpleNamespace(population=SimpleNamespace(x=np.array([1.5])))
    st = SpaceTimeMatrix(1, 3)
    for step in range(7):
        sample_if_due(world, step, st, 1)
    assert len(st) == 7
    st2 = SpaceTimeMatrix(50, 3)
    for step in range(20):
        sample_if_due(world, step, st2, 50)
    assert len(st2) == 1 and st2.steps.tolist() == [0]
    with pytest.raises(ValueError):
        sample_if_due(world, 0, st2, 0)


# --- summarize_run ---

def synthetic_run(width=12, samples=200):
    """Baseline noise, a density hump inside columns 4..7 during the event,
    then uniformity again."""
    gen = np.random.default_rng(9)
    rows = np.full((samples, width), 50, dtype=np.int64)
    rows += gen.integers(-2, 3, size=rows.shape)
    event = (np.arange(samples) >= 100) & (np.arange(samples) < 120)
    rows[np.ix_(event, range(4, 8))] += 60
    return matrix_from_rows(rows, interval=10)


def test_summarize_run_fields():
    st = synthetic_run()
    summary = summarize_run(st, inside_columns=range(4, 8),
                            stimulus_start=1000, stimulus_end=1200)
    assert summary.steps.size == len(st)
    assert summary.contrast.shape == summary.uniformity.shape
    lo, hi = BASELINE_WINDOW
    sel = (summary.steps >= lo) & (summary.steps < hi)
    assert summary.baseline_cv == pytest.approx(summary.uniformity[sel].mean())
    assert summary.baseline_cv < 0.1
    # the hump drives contrast well above 1 and its peak sits in the event
    assert summary.contrast_peak > 1.5
    assert 1000 <= summary.contrast_peak_step < 1200
    assert summary.recovery_step is not None
    assert summary.recovery_step >= 1200
    assert len(summary.onset_columns) == 2
    assert all(3 <= c <= 8 for c in summary.onset_columns)


def test_summarize_run_short_run_degrades():
    st = matrix_from_rows(np.full((3, 6), 5), interval=10)
    summary = summarize_run(st, inside_columns=[2, 3], stimulus_start=None,
                            stimulus_end=None)
    assert summary.baseline_cv is None
    assert summary.recovery_step is None
    assert summary.onset_columns == []
    assert summary.contrast_peak == pytest.approx(1.0)


def test_summary_constants():
    assert BASELINE_WINDOW == (500, 1000)
    assert RECOVERY_FACTOR == 1.5
    assert RECOVERY_PERSISTENCE == 50
    assert ONSET_WINDOW == 500

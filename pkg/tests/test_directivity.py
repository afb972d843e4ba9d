"""Analytic plane-wave sensor response."""

import numpy as np
import pytest

from patfp.directivity import (
    critical_angle,
    directivity,
    directivity_table,
    directivity_zero,
    reflection_coefficient,
)
from patfp.medium import default_medium, sensor_coefficients


def test_reflection_coefficient_limits(params):
    alpha = sensor_coefficients(params).alpha
    # Normal incidence: (1 - alpha)/(1 + alpha).
    assert reflection_coefficient(0.0, alpha) == pytest.approx(
        (1.0 - alpha) / (1.0 + alpha), rel=1e-14
    )
    # Grazing incidence: cos(90) = 0 exactly with degree-aware trig.
    assert reflection_coefficient(90.0, alpha) == -1.0
    # Matched impedance reflects nothing at normal incidence.
    assert reflection_coefficient(0.0, 1.0) == 0.0
    with pytest.raises(ValueError, match="alpha"):
        reflection_coefficient(10.0, 0.0)


def test_directivity_normal_incidence_value(params):
    # D(0) = 1 + R(0) = 2/(1 + alpha).
    alpha = sensor_coefficients(params).alpha
    assert directivity(0.0, params) == pytest.approx(2.0 / (1.0 + alpha), rel=1e-14)
    assert directivity(0.0, params) == pytest.approx(1.2633336607405952, rel=1e-10)


def test_directivity_vanishes_at_grazing(params):
    # (1 + R(90)) = 0 exactly.
    assert directivity(90.0, params) == 0.0


def test_critical_angle_formula(params):
    # sin(theta_c) = c/c_s = 15/22 for the reference water/polymer pair.
    expected = float(np.degrees(np.arcsin(15.0 / 22.0)))
    assert critical_angle(params) == pytest.approx(expected, abs=1e-12)
    assert critical_angle(params) == pytest.approx(42.98588608019038, abs=1e-9)


def test_zero_crossing_matches_critical_angle(params):
    zero = directivity_zero(params)
    assert zero is not None
    assert zero == pytest.approx(critical_angle(params), abs=1e-9)
    # Sign flip across the zero.
    assert directivity(zero - 0.5, params) > 0.0
    assert directivity(zero + 0.5, params) < 0.0


def test_no_critical_angle_for_slow_film():
    from dataclasses import replace

    slow = replace(default_medium(), c_s=0.9)
    assert critical_angle(slow) is None
    assert directivity_zero(slow) is None


def test_directivity_table_structure(params):
    table = directivity_table(params, step_deg=0.5)
    assert table.shape == (181, 3)
    assert table[0, 0] == 0.0
    assert table[-1, 0] == 90.0
    assert np.all(np.diff(table[:, 0]) > 0)
    # Columns match the scalar functions.
    alpha = sensor_coefficients(params).alpha
    k = 60
    assert table[k, 1] == pytest.approx(
        reflection_coefficient(table[k, 0], alpha), rel=1e-14
    )
    assert table[k, 2] == pytest.approx(directivity(table[k, 0], params), rel=1e-14)
    with pytest.raises(ValueError, match="step_deg"):
        directivity_table(params, step_deg=0.0)


def test_directivity_single_sign_change(params):
    """D crosses zero exactly once on (0, 90)."""
    table = directivity_table(params, step_deg=0.1)
    d = table[:, 2]
    interior = d[(table[:, 0] > 0.0) & (table[:, 0] < 90.0)]
    signs = np.sign(interior)
    changes = int(np.sum(signs[1:] != signs[:-1]))
    assert changes == 1

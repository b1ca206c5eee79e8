"""Energy functionals, run records, order estimation, scaling fits."""

import numpy as np
import pytest

from chstep.diagnostics import (
    RunRecord,
    convergence_order,
    double_well,
    energy,
    modified_energy,
    scaling_fit,
)
from chstep.errors import DegenerateRefinement, InsufficientData
from chstep.schemes import ModelParams


P = ModelParams(kappa=1.0, epsilon=0.5, L=2 * np.pi, M=16)


def test_double_well_minima():
    assert double_well(np.array([1.0, -1.0])) == pytest.approx([0.0, 0.0])
    assert double_well(np.array([0.0])) == pytest.approx([0.25])


def test_energy_constant_field():
    phi = np.zeros((P.M, P.M))
    # gradient term vanishes; F(0) = 1/4 over the area
    assert energy(P, phi) == pytest.approx(0.25 * P.L**2, rel=1e-12)


def test_energy_single_mode():
    g = P.grid
    x, y = g.points()
    a = 0.01
    phi = a * np.sin(x) * np.sin(y)
    # leading order: (eps^2/2)|grad phi|^2 + F(phi) ~ F(0) area + O(a^2)
    e = energy(P, phi)
    assert abs(e - 0.25 * P.L**2) <= a**2 * P.L**2


def test_modified_energy_reduces_to_plain():
    phi = np.zeros((P.M, P.M))
    prev = phi + 0.001
    assert modified_energy(P, phi, prev, 0.1, None) == pytest.approx(energy(P, phi))


def test_modified_energy_exceeds_plain():
    g = P.grid
    x, y = g.points()
    phi = 0.01 * np.sin(x) * np.sin(y)
    prev = 0.02 * np.sin(x) * np.sin(y)
    assert modified_energy(P, phi, prev, 0.1, 0.1) > energy(P, phi)


def test_run_record_roundtrip(tmp_path):
    rec = RunRecord()
    rec.append(1, 0.1, 0.1, float("nan"), 2.0, 2.1, 0.0, 5, 1.5)
    rec.append(2, 0.25, 0.15, 1.5, 1.9, 2.0, 0.0, 4, 1.2)
    path = tmp_path / "rec.csv"
    rec.to_csv(path)
    header = path.read_text().splitlines()[0]
    assert header == "n,t,tau,r,energy,modified_energy,volume,iters,wall_ms"
    back = RunRecord.from_csv(path)
    assert back.column("t") == pytest.approx([0.1, 0.25])
    assert back.column("energy") == pytest.approx([2.0, 1.9])


def test_run_record_requires_increasing_time():
    rec = RunRecord()
    rec.append(1, 0.1, 0.1, 1.0, 1.0, 1.0, 0.0, 1, 0.0)
    with pytest.raises(ValueError):
        rec.append(2, 0.05, 0.1, 1.0, 1.0, 1.0, 0.0, 1, 0.0)


def test_convergence_order_exact_quadratic():
    taus = [0.1, 0.05, 0.025]
    errs = [t**2 for t in taus]
    orders = convergence_order(errs, taus)
    assert orders == pytest.approx([2.0, 2.0], rel=1e-12)


def test_convergence_order_degenerate():
    with pytest.raises(DegenerateRefinement):
        convergence_order([1.0, 0.5], [0.1, 0.1])


def test_scaling_fit_recovers_power_law():
    rec = RunRecord()
    ts = np.linspace(1.0, 100.0, 400)
    for i, t in enumerate(ts, start=1):
        rec.append(i, float(t), 0.1, 1.0, float(3.0 * t ** (-1.0 / 3.0)),
                   float("nan"), 0.0, 1, 0.0)
    slope = scaling_fit(rec, 2.0, 100.0)
    assert slope == pytest.approx(-1.0 / 3.0, abs=0.01)


def test_scaling_fit_empty_window():
    rec = RunRecord()
    rec.append(1, 0.1, 0.1, 1.0, 1.0, float("nan"), 0.0, 1, 0.0)
    with pytest.raises(InsufficientData):
        scaling_fit(rec, 10.0, 20.0)

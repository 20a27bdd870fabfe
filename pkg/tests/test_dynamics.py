import numpy as np
import pytest

from sta_transport import dynamics_oracle
from sta_transport.dynamics_oracle import (
    TransportVerdict, initial_minimum, quadratic_potential, quadratic_trajectory, simulate_full,
    simulate_quadratic,
)
from sta_transport.errors import ContractError, EscapeError
from sta_transport.trajectory import make_septic_si


def _mw2d2(setup):
    return setup.ion.mass * setup.trap.omega**2 * setup.geometry.spacing_d**2


def test_quadratic_model_is_exact(setup):
    v = simulate_quadratic(setup, rel_tol=1e-10)
    d = setup.geometry.spacing_d
    assert v.max_tracking_error < 1e-8 * d
    assert v.excitation_energy < 1e-10 * _mw2d2(setup)
    assert v.final_position == pytest.approx(d, abs=1e-8 * d)


def test_quadratic_model_exact_for_septic(setup):
    s = setup.with_polynomial(make_septic_si(-0.0194, 0.0049, setup.geometry.spacing_d))
    v = simulate_quadratic(s)
    assert v.max_tracking_error < 1e-8 * s.geometry.spacing_d


def test_truncated_protocol_leaves_motion(setup):
    v = simulate_quadratic(setup, t_end=0.9 * setup.duration)
    assert v.excitation_energy > 1e-6 * _mw2d2(setup)
    with pytest.raises(ContractError):
        simulate_quadratic(setup, t_end=1.1 * setup.duration)


def test_full_model_near_adiabatic(setup):
    s = setup.with_duration(10e-6)
    assert simulate_full(s).relative_excitation(s) < 1e-4


def test_full_model_reports_tracking(setup):
    v = simulate_full(setup)
    assert np.isfinite(v.max_tracking_error)
    assert v.max_tracking_error >= 0


def test_uncompensated_drive_excites(setup):
    floor = simulate_quadratic(setup).excitation_energy
    bare = simulate_full(setup, compensate=False)
    assert bare.excitation_energy > 1e6 * max(floor, 1e-30 * _mw2d2(setup))
    assert bare.relative_excitation(setup) > 1e-2


def test_wide_trap_converges_to_quadratic(setup):
    floor = 1e-10 * _mw2d2(setup)
    narrow = simulate_full(setup).excitation_energy
    wide_setup = setup.with_geometry(width_c=10 * setup.geometry.spacing_d)
    wide = simulate_full(wide_setup).excitation_energy
    assert wide < 1e-3 * narrow or (wide < floor and narrow < floor)


def test_initial_minimum_is_origin_for_compensated_start(setup):
    assert abs(initial_minimum(setup)) <= 1e-12 * setup.geometry.spacing_d


def test_energy_audit(setup, rng):
    """d/dt of kinetic plus potential energy equals the explicit time derivative of V."""
    m, tf = setup.ion.mass, setup.duration
    state = quadratic_trajectory(setup)
    h = 1e-6 * tf
    ts = rng.uniform(0.01 * tf, 0.99 * tf, 50)

    def mechanical(t):
        x, v = state(t)
        return 0.5 * m * v * v + quadratic_potential(setup, x, t)

    total_rate = (mechanical(ts + h) - mechanical(ts - h)) / (2 * h)
    x, _ = state(ts)
    explicit = (quadratic_potential(setup, x, ts + h) - quadratic_potential(setup, x, ts - h)) / (2 * h)
    scale = np.max(np.abs(explicit))
    np.testing.assert_allclose(total_rate, explicit, rtol=1e-4, atol=1e-4 * scale)


def test_escape_is_reported(setup, monkeypatch):
    monkeypatch.setattr(dynamics_oracle, "initial_minimum", lambda s, c=True: 0.0)
    monkeypatch.setattr(dynamics_oracle, "_axial_force", lambda s, x, t, c: 1e-12)
    with pytest.raises(EscapeError, match="trapping region"):
        simulate_full(setup)


def test_verdict_rejects_negative_energy():
    with pytest.raises(ContractError):
        TransportVerdict(0.0, 0.0, -1.0, 0.0)

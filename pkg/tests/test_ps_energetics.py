import numpy as np
import pytest

from sta_transport.electrostatics import total_potential, voltages
from sta_transport.model import HBAR, default_parameters, table_parameters
from sta_transport.numerics import integrate, loglog_slope
from sta_transport.ps_energetics import (
    e_ps, e_ps_consumption, f_shift, p_ps, p_ps_f0, p_ps_peak,
)
from sta_transport.trajectory import TransportPolynomial, derivatives, make_septic


def _fd_energy_rate(setup, ts, use_shift):
    h = 1e-6 * setup.duration
    return (e_ps(setup, ts + h, use_shift).total - e_ps(setup, ts - h, use_shift).total) / (2 * h)


def test_shift_boundary_values(setup):
    geom, ion, trap, _, _ = setup
    expected = -ion.mass * trap.omega**2 * geom.width_c**2
    assert f_shift(setup, 0.0) == pytest.approx(expected, rel=1e-12)
    assert f_shift(setup, 0.0) == pytest.approx(-2.77e-19, rel=5e-3)
    assert f_shift(setup, setup.duration) == pytest.approx(expected, rel=1e-12)


def test_shift_equals_potential_plus_tilt(setup, rng):
    """f = V(alpha) + m alpha'' alpha, the energy identity at the trap centre."""
    geom, ion, _, _, spec = setup
    ts = np.concatenate([[spec.duration_tf / 2], rng.uniform(0, spec.duration_tf, 20)])
    alpha, _, acc, _ = derivatives(spec.polynomial, spec, ts)
    V = total_potential(geom, ion, voltages(setup, ts), alpha)
    np.testing.assert_allclose(f_shift(setup, ts), V + ion.mass * acc * alpha, rtol=1e-6)


def test_energy_breakdown(setup, rng):
    zp = 0.5 * HBAR * setup.trap.omega
    start = e_ps(setup, 0.0)
    assert start.total == pytest.approx(zp - setup.ion.mass * setup.trap.omega**2 * setup.geometry.width_c**2, rel=1e-12)
    assert e_ps(setup, 0.0, use_shift=False).total == pytest.approx(4.31e-28, rel=5e-3)
    assert e_ps(setup, setup.duration).total == pytest.approx(start.total, rel=1e-12)
    b = e_ps(setup, rng.uniform(0, setup.duration))
    assert b.total == pytest.approx(b.zero_point + b.kinetic + b.tilt + b.shift, rel=1e-12)


@pytest.mark.parametrize("use_shift", [True, False])
def test_power_matches_energy_derivative(rng, use_shift):
    setup = default_parameters().with_polynomial(make_septic(-0.02, 0.006))
    ts = rng.uniform(0.001, 0.999, 100) * setup.duration
    exact = p_ps(setup, ts) if use_shift else p_ps_f0(setup, ts)
    fd = _fd_energy_rate(setup, ts, use_shift)
    floor = 1e-4 * np.max(np.abs(exact))
    np.testing.assert_allclose(fd, exact, rtol=1e-4, atol=floor)


def test_midpoint_power_matches_derivative(setup):
    t = np.array([setup.duration / 2])
    peak = p_ps_peak(setup.ion, setup.transport)
    assert abs(p_ps(setup, t) - _fd_energy_rate(setup, t, True))[0] <= 1e-4 * peak


def test_boundary_power(setup):
    assert abs(p_ps(setup, 0.0)) == pytest.approx(4.28e-12, rel=1e-2)
    assert abs(p_ps(setup, 0.0)) == pytest.approx(p_ps_peak(setup.ion, setup.transport), rel=1e-12)


def test_static_trap_has_no_power(setup):
    static = setup.with_polynomial(TransportPolynomial.hold())
    ts = np.linspace(0, setup.duration, 11)
    assert np.all(p_ps(static, ts) == 0)
    assert e_ps_consumption(static) == 0.0


def test_consumption_table_values(table_setup):
    assert e_ps_consumption(table_setup) == pytest.approx(5.513e-19, rel=1e-2)
    assert e_ps_consumption(table_setup, use_shift=False) == pytest.approx(3.441e-19, rel=1e-2)


@pytest.mark.parametrize("power", [p_ps, p_ps_f0])
def test_zero_net_cycle(setup, power):
    signed = integrate(lambda t: power(setup, t), 0.0, setup.duration, rel_tol=1e-10,
                       abs_tol=1e-12 * e_ps_consumption(setup)).value
    assert abs(signed) < 1e-6 * e_ps_consumption(setup, use_shift=power is p_ps)


def test_peak_scaling(setup):
    base = p_ps_peak(setup.ion, setup.transport)
    doubled = p_ps_peak(setup.ion, setup.with_duration(2 * setup.duration).transport)
    assert base / doubled == pytest.approx(8.0, rel=1e-12)
    assert p_ps_peak(setup.ion, setup.with_duration(1e-7).transport) == pytest.approx(3.13e-10, rel=1e-2)


def test_consumption_scaling_short_window():
    setup = default_parameters()
    # 30 log-spaced durations, the sweep default; the local slope steepens
    # toward 0.4 us so the fitted value sits near -2.1
    tfs = np.geomspace(0.05e-6, 0.4e-6, 30)
    slope = loglog_slope(tfs, [e_ps_consumption(setup.with_duration(t)) for t in tfs])
    assert slope == pytest.approx(-2.0, abs=0.1)

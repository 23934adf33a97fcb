import math

import numpy as np
import pytest

import openhall as oh


def test_rashba_open_sigma0_is_half_ln2():
    m = oh.rashba_dresselhaus(23, 10, 5)
    r = oh.hall_two_band_spin(m, 0.1)
    assert r["converged"]
    assert r["sigma0"] == pytest.approx(math.log(2) / 2, rel=1e-6)
    assert r["dsigma1"] < 0


def test_general_route_matches_closed_forms():
    m = oh.rashba_dresselhaus(23, 30, 5)
    closed = oh.hall_two_band_spin(m, 0.1)
    general = oh.hall_conductivity(m, oh.spin_lowering(0.1))
    assert general["sigma0"] == pytest.approx(closed["sigma0"], rel=1e-6)
    assert general["dsigma1"] == pytest.approx(closed["dsigma1"], rel=1e-4)


def test_chern_numbers():
    assert oh.chern_number(oh.rashba_dresselhaus(23, 10, 5), 0)["chern"] == 1
    assert oh.chern_number(oh.rashba_dresselhaus(23, 30, 5), 0)["chern"] == -1
    assert oh.chern_number(oh.qwz_lattice(3.0), 0)["chern"] == 0


def test_steady_state_agrees_with_oracle():
    m = oh.spin_one_lift(oh.bi2se3_valley(2, 1, 0.5))
    spec = oh.single_steady_band(0, [0.0, 0.1, 0.17])
    rho0, rho1 = oh.steady_state(m, spec, (0.3, -0.2), general=True)
    o0, o1, exponent = oh.oracle_response(m, spec, (0.3, -0.2))
    assert np.allclose(rho0, o0, atol=1e-9)
    assert np.linalg.norm(rho1 - o1) < 1e-6 * max(1e-3, np.linalg.norm(o1))
    assert exponent >= 1.8


def test_eigensystem_is_ascending():
    values, vectors = oh.eigensystem(oh.rashba_dresselhaus(23, 10, 5), (0.1, 0.2))
    assert values[0] < values[1]
    h = oh.hamiltonian(oh.rashba_dresselhaus(23, 10, 5), (0.1, 0.2))
    assert np.allclose(vectors @ np.diag(values) @ vectors.conj().T, h)


def test_errors_are_typed():
    with pytest.raises(oh.ValidationError):
        oh.hall_conductivity(oh.rashba_dresselhaus(23, 10, 5), oh.single_steady_band(0, [0.0, -1.0]))
    with pytest.raises(oh.Error):
        oh.magnetic_lattice(1, 0.5, 1, 0, 1, 1)


def test_validate_suite():
    checks = oh.validate(points=4)
    assert all(ok for _, ok, _, _ in checks)
    assert not all(ok for _, ok, _, _ in oh.validate(points=4, flip_s3=True))

import math

import numpy as np
import pytest

import jointrdf as jr

Q = np.array(
    [
        [3.929, -0.11, 0.642, 0.976],
        [-0.11, 2.629, -0.859, 0.337],
        [0.642, -0.859, 2.142, 1.797],
        [0.976, 0.337, 1.797, 3.495],
    ]
)


@pytest.fixture
def source():
    return jr.GaussianPairSource(Q, 2, 2)


def test_closed_form_case(source):
    rep = jr.solve(source, jr.DistortionPair(0.4, 0.5))
    assert rep.branch == jr.Branch.ClosedFormInteriorD
    np.testing.assert_allclose(rep.sigma, np.diag([0.2, 0.2, 0.25, 0.25]), atol=1e-12)
    assert rep.rate_nats == pytest.approx(rep.gray_bound_nats, abs=1e-9)


def test_interior_point_case(source):
    rep = jr.solve(source, (1.65, 1.85))
    assert rep.branch == jr.Branch.InteriorPoint
    assert rep.certificate.stationarity_residual <= 1e-7
    assert np.linalg.eigvalsh(Q - rep.sigma).min() <= 1e-6
    assert abs(rep.sigma[0:2, 2:4]).max() > 1e-3
    assert rep.rate_nats == pytest.approx(jr.rate_of(source, rep.sigma), abs=1e-12)


def test_realization_and_condition1(source):
    rep = jr.solve(source, (1.65, 1.85))
    real = jr.realize(source, rep.sigma)
    report = jr.verify_condition1(real)
    assert report.passed
    assert report.rank == 3


def test_canonical_form(source):
    cf = jr.to_canonical_form(source)
    assert cf.partition == [0, 2, 0, 0, 2, 0]
    assert jr.determinant_identity_residual(source, cf) < 1e-10
    # Independent MI from numpy determinants.
    mi = 0.5 * (math.log(np.linalg.det(Q[:2, :2]) * np.linalg.det(Q[2:, 2:]) / np.linalg.det(Q)))
    assert jr.mutual_information(source) == pytest.approx(mi, abs=1e-12)


def test_simulation(source):
    d = jr.DistortionPair(0.4, 0.5)
    real = jr.realize(source, jr.solve(source, d).sigma)
    check = jr.simulate_distortion(real, d, 200_000, seed=3)
    assert check.passed
    assert check.d_hat1 == pytest.approx(0.4, rel=0.02)


def test_errors_are_raised():
    with pytest.raises(jr.Error):
        jr.GaussianPairSource(np.array([[1.0, 0.5], [0.0, 1.0]]), 1, 1)
    with pytest.raises(jr.Error):
        jr.GaussianPairSource(np.eye(3), 2, 2)

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import bconv, h2
from ibkit.closedform import (
    GaussianIBModel,
    binary_ib,
    critical_betas,
    scalar_gaussian_ib,
    vector_gaussian_ib,
)
from ibkit.errors import EigenFailure, NotPositiveDefinite, OutOfRange, ShapeMismatch

LN2 = math.log(2)


@pytest.fixture(scope="module")
def model3():
    rng = np.random.default_rng(11)
    h = rng.normal(size=(3, 3))
    a = rng.normal(size=(3, 3))
    return GaussianIBModel.from_channel(h, a @ a.T + 0.5 * np.eye(3), np.eye(3))


def decoupled_point(lams, gamma):
    """Per-direction sum for the whitened problem, written from the eigenvalues alone."""
    cpx = rel = 0.0
    for lam in lams:
        if gamma * (1 - lam) > 1:
            c = 0.5 * math.log((gamma - 1) * (1 - lam) / lam)
            cpx += c
            rel += c - 0.5 * math.log(gamma * (1 - lam))
    return cpx, rel


class TestBinary:
    def test_endpoints(self):
        pt = binary_ib(0.1, 0.5)
        assert (pt.complexity, pt.relevance) == pytest.approx((0.0, 0.0), abs=1e-15)
        pt = binary_ib(0.1, 0.0)
        assert pt.complexity == pytest.approx(LN2)
        assert pt.relevance / LN2 == pytest.approx(1 - h2(0.1), abs=1e-14)

    def test_interior(self):
        pt = binary_ib(0.1, 0.25)
        assert pt.complexity / LN2 == pytest.approx(1 - h2(0.25), abs=1e-14)
        assert pt.relevance / LN2 == pytest.approx(1 - h2(0.3), abs=1e-14)
        assert pt.parameter == 0.25

    @pytest.mark.parametrize("p,q", [(-0.1, 0.2), (0.6, 0.2), (0.1, 1.5)])
    def test_range(self, p, q):
        with pytest.raises(OutOfRange):
            binary_ib(p, q)

    @given(st.floats(0, 0.5), st.floats(0, 1))
    @settings(max_examples=80, deadline=None)
    def test_matches_independent_formula(self, p, q):
        pt = binary_ib(p, q)
        assert pt.relevance / LN2 == pytest.approx(1 - h2(bconv(p, q)), abs=1e-12)
        assert pt.relevance <= pt.complexity + 1e-12


class TestScalar:
    def test_endpoints(self):
        assert scalar_gaussian_ib(1.0, 0.0) == 0.0
        assert scalar_gaussian_ib(3.0, 50.0) == pytest.approx(0.5 * math.log(4), abs=1e-15)

    def test_range(self):
        with pytest.raises(OutOfRange):
            scalar_gaussian_ib(-1.0, 0.5)
        with pytest.raises(OutOfRange):
            scalar_gaussian_ib(1.0, -0.5)

    @pytest.mark.parametrize("snr", [0.3, 1.0, 10.0])
    def test_vector_solver_agrees(self, snr):
        m = GaussianIBModel.scalar(snr)
        assert m.eigvals[0] == pytest.approx(1 / (1 + snr))
        for g in np.geomspace(1.01 * critical_betas(m)[0], 1e4, 25):
            _, pt = vector_gaussian_ib(m, float(g))
            assert pt.relevance == pytest.approx(scalar_gaussian_ib(snr, pt.complexity), abs=1e-9)


class TestVector:
    def test_eigvecs_normalized(self, model3):
        v = model3.eigvecs
        np.testing.assert_allclose(v.T @ model3.sigma_x @ v, np.eye(3), atol=1e-10)
        np.testing.assert_allclose(v.T @ model3.sigma_x_given_y @ v, np.diag(model3.eigvals), atol=1e-10)
        assert np.all(np.diff(model3.eigvals) >= 0)

    def test_eigvals_match_generalized_problem(self, model3):
        ref = np.sort(np.linalg.eigvals(model3.sigma_x_given_y @ np.linalg.inv(model3.sigma_x)).real)
        np.testing.assert_allclose(model3.eigvals, ref, atol=1e-10)

    def test_rank_steps_at_critical_values(self, model3):
        betas = critical_betas(model3)
        assert np.all(np.diff(betas) >= 0)
        gammas = np.geomspace(0.5, 10 * betas[-1], 60)
        dims = [vector_gaussian_ib(model3, float(g))[0].active_dims for g in gammas]
        assert dims == sorted(dims)
        for g, d in zip(gammas, dims):
            assert d == int(np.sum(betas < g))

    def test_matches_decoupled_sum(self, model3):
        for g in np.geomspace(1.0, 1e3, 40):
            _, pt = vector_gaussian_ib(model3, float(g))
            cpx, rel = decoupled_point(model3.eigvals, float(g))
            assert (pt.complexity, pt.relevance) == pytest.approx((cpx, rel), abs=1e-9)

    def test_ceiling(self, model3):
        _, pt = vector_gaussian_ib(model3, 1e9)
        assert pt.relevance == pytest.approx(model3.mutual_information(), abs=1e-7)
        assert pt.relevance <= model3.mutual_information() + 1e-12

    def test_diagonal_decomposes(self):
        snrs = [0.5, 2.0, 8.0]
        m = GaussianIBModel(np.diag([1 + s for s in snrs]), np.eye(3))
        for g in (1.5, 4.0, 20.0):
            _, pt = vector_gaussian_ib(m, g)
            parts = [vector_gaussian_ib(GaussianIBModel.scalar(s), g)[1] for s in snrs]
            assert pt.complexity == pytest.approx(sum(p.complexity for p in parts), abs=1e-12)
            assert pt.relevance == pytest.approx(sum(p.relevance for p in parts), abs=1e-12)

    def test_projection_shape(self, model3):
        proj, _ = vector_gaussian_ib(model3, 1e3)
        assert proj.A.shape == (proj.active_dims, 3)
        proj, pt = vector_gaussian_ib(model3, 0.5)
        assert proj.A.shape == (0, 3) and pt.complexity == 0.0


class TestModelErrors:
    def test_not_pd(self):
        with pytest.raises(NotPositiveDefinite):
            GaussianIBModel([[1.0, 2.0], [2.0, 1.0]], np.eye(2) * 0.1)

    def test_asymmetric(self):
        with pytest.raises(NotPositiveDefinite):
            GaussianIBModel([[2.0, 0.5], [0.0, 2.0]], np.eye(2))

    def test_conditional_exceeds_marginal(self):
        with pytest.raises(EigenFailure):
            GaussianIBModel([[1.0]], [[2.0]])

    def test_small_excess_clamped(self):
        m = GaussianIBModel([[1.0]], [[1.0 + 1e-9]])
        assert m.eigvals[0] == 1.0
        assert critical_betas(m)[0] == math.inf

    def test_shape(self):
        with pytest.raises(ShapeMismatch):
            GaussianIBModel(np.eye(2), np.eye(3))
        with pytest.raises(ShapeMismatch):
            GaussianIBModel.from_channel(np.ones((2, 3)), np.eye(2), np.eye(2))

    def test_zero_eigenvalue_active(self):
        m = GaussianIBModel(np.diag([1.0, 2.0]), np.diag([0.0, 1.0]))
        assert m.eigvals[0] == 0.0
        with pytest.raises(NotPositiveDefinite):
            vector_gaussian_ib(m, 3.0)

    def test_bad_gamma(self, model3):
        with pytest.raises(OutOfRange):
            vector_gaussian_ib(model3, -1.0)
        with pytest.raises(OutOfRange):
            vector_gaussian_ib(model3, math.inf)

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import bconv, h2, random_joint, random_rows
from ibkit.errors import (
    CardinalityMismatch,
    EmptyAlphabet,
    IndexOutOfRange,
    LengthMismatch,
    NegativeEntry,
    NotNormalized,
    OutOfRange,
)
from ibkit.prob import (
    Encoder,
    InfoValue,
    JointPMF,
    binary_entropy,
    entropy,
    ib_terms,
    induced_distributions,
    kl_divergence,
    log_loss,
    mutual_information,
    mutual_information_table,
    to_bits,
    validate_joint,
)

LN2 = math.log(2)


class TestValidateJoint:
    def test_uniform(self):
        j = validate_joint([[0.25, 0.25], [0.25, 0.25]])
        assert (j.x_card, j.y_card) == (2, 2)
        np.testing.assert_allclose(j.p, 0.25)

    def test_dsbs(self):
        j = validate_joint([[0.45, 0.05], [0.05, 0.45]])
        np.testing.assert_allclose(j.p, JointPMF.dsbs(0.1).p)

    def test_negative_entry_names_position(self):
        with pytest.raises(NegativeEntry, match="row 0, column 1"):
            validate_joint([[0.5, -0.1], [0.3, 0.3]])

    def test_not_normalized(self):
        with pytest.raises(NotNormalized):
            validate_joint([[0.5, 0.5], [0.5, 0.5]])
        j = validate_joint([[0.5, 0.5], [0.5, 0.5]], renormalize=True)
        assert j.p.sum() == pytest.approx(1.0)

    def test_small_deviation_accepted(self):
        j = validate_joint([[0.5 + 5e-7, 0.5]])
        assert j.p.sum() == pytest.approx(1.0, abs=1e-15)

    def test_empty(self):
        with pytest.raises(EmptyAlphabet):
            validate_joint([])
        with pytest.raises(EmptyAlphabet):
            validate_joint([[]])

    def test_ragged(self):
        with pytest.raises(LengthMismatch, match="row 1"):
            validate_joint([[0.5, 0.25], [0.25]])

    def test_non_numeric(self):
        with pytest.raises(NotNormalized, match="row 1, column 0"):
            validate_joint([[0.5, 0.25], ["x", 0.25]])

    def test_prune_zero_rows(self):
        j = validate_joint([[0.5, 0.0], [0.0, 0.0], [0.25, 0.25]])
        assert j.x_card == 2 and j.x_index == (0, 2)
        keep = validate_joint([[0.5, 0.0], [0.0, 0.0], [0.25, 0.25]], prune_zeros=False)
        assert keep.x_card == 3

    def test_immutable(self):
        j = JointPMF.dsbs(0.1)
        with pytest.raises(ValueError):
            j.p[0, 0] = 1.0


class TestInformation:
    def test_independent(self):
        j = validate_joint(np.outer([0.3, 0.7], [0.2, 0.5, 0.3]))
        assert mutual_information(j) == pytest.approx(0.0, abs=1e-15)

    def test_dsbs(self, dsbs01):
        assert mutual_information(dsbs01).bits == pytest.approx(1 - h2(0.1), abs=1e-9)

    def test_identity(self):
        j = validate_joint([[0.5, 0.0], [0.0, 0.5]], prune_zeros=False)
        assert mutual_information(j).bits == pytest.approx(1.0, abs=1e-15)

    def test_infovalue(self):
        v = InfoValue(LN2)
        assert v.bits == pytest.approx(1.0) and v.nats == pytest.approx(LN2)
        assert to_bits(LN2) == pytest.approx(1.0)

    def test_conditional_entropies(self, dsbs01):
        assert dsbs01.h_y_given_x().bits == pytest.approx(h2(0.1), abs=1e-12)
        assert dsbs01.h_x_given_y().bits == pytest.approx(h2(0.1), abs=1e-12)


class TestKL:
    def test_equal(self):
        assert kl_divergence([0.2, 0.8], [0.2, 0.8]) == 0.0

    def test_point_mass(self):
        assert kl_divergence([1, 0], [0.5, 0.5]) == pytest.approx(LN2, abs=1e-15)

    def test_infinite(self):
        assert math.isinf(kl_divergence([0.5, 0.5], [1, 0]))

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            kl_divergence([0.5, 0.5], [1 / 3] * 3)

    @given(st.integers(0, 10_000), st.integers(2, 6))
    @settings(max_examples=60, deadline=None)
    def test_nonnegative(self, seed, n):
        rng = np.random.default_rng(seed)
        p, q = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
        assert kl_divergence(p, q) >= 0
        assert kl_divergence(p, p) == pytest.approx(0.0, abs=1e-15)
        if not np.allclose(p, q):
            assert kl_divergence(p, q) > 0


class TestBinaryEntropy:
    @pytest.mark.parametrize("x,bits", [(0.5, 1.0), (0.0, 0.0), (1.0, 0.0)])
    def test_values(self, x, bits):
        assert binary_entropy(x) == pytest.approx(bits, abs=1e-15)

    def test_quarter(self):
        assert binary_entropy(0.25) == pytest.approx(0.811278, abs=1e-6)
        assert binary_entropy(0.25) == pytest.approx(h2(0.25), abs=1e-14)

    def test_range(self):
        with pytest.raises(OutOfRange):
            binary_entropy(1.5)


class TestLogLoss:
    def test_one_hot(self):
        assert log_loss(1, [0, 1, 0]) == 0.0

    def test_uniform(self):
        assert log_loss(2, [0.25] * 4) == pytest.approx(math.log(4))

    def test_value(self):
        assert log_loss(0, [0.8, 0.2]) == pytest.approx(0.22314, abs=1e-5)

    def test_zero(self):
        assert math.isinf(log_loss(1, [1.0, 0.0]))

    def test_index(self):
        with pytest.raises(IndexOutOfRange):
            log_loss(2, [0.5, 0.5])


class TestInduced:
    def test_identity(self, dsbs01):
        ind = induced_distributions(dsbs01, Encoder.identity(2))
        np.testing.assert_allclose(ind.p_y_given_u, dsbs01.p_y_given_x, atol=1e-15)

    def test_constant(self, dsbs01):
        ind = induced_distributions(dsbs01, Encoder.constant(2))
        np.testing.assert_allclose(ind.p_y_given_u[0], dsbs01.p_y, atol=1e-15)

    def test_bsc_composition(self, dsbs01):
        ind = induced_distributions(dsbs01, Encoder.bsc(0.25))
        r = bconv(0.1, 0.25)
        assert r == pytest.approx(0.3)
        np.testing.assert_allclose(ind.p_y_given_u, [[1 - r, r], [r, 1 - r]], atol=1e-15)

    def test_undefined_rows_flagged(self, dsbs01):
        ind = induced_distributions(dsbs01, Encoder([[1, 0, 0], [0, 1, 0]]))
        assert list(ind.defined) == [True, True, False]
        assert np.all(np.isnan(ind.p_y_given_u[2]))

    def test_mismatch(self, dsbs01):
        with pytest.raises(CardinalityMismatch):
            induced_distributions(dsbs01, Encoder.identity(3))

    def test_encoder_validation(self):
        with pytest.raises(NotNormalized, match="row 1"):
            Encoder([[1.0, 0.0], [0.5, 0.6]])
        with pytest.raises(NegativeEntry):
            Encoder([[1.1, -0.1]])


@given(st.integers(0, 10_000), st.integers(2, 4), st.integers(2, 4), st.integers(1, 5))
@settings(max_examples=80, deadline=None)
def test_data_processing_and_chain_rule(seed, nx, ny, nu):
    rng = np.random.default_rng(seed)
    j = random_joint(rng, nx, ny)
    e = Encoder(random_rows(rng, j.x_card, nu))
    cpx, rel = ib_terms(j, e)
    assert rel <= cpx + 1e-10
    assert rel <= mutual_information(j) + 1e-10
    # H(X,Y) = H(X) + H(Y|X)
    assert entropy(j.p) == pytest.approx(float(j.h_x()) + float(j.h_y_given_x()), abs=1e-10)
    # I(U;X) two ways: from the (U,X) table and as H(U) - H(U|X)
    ind = induced_distributions(j, e)
    via_table = mutual_information_table(ind.joint_uxy.sum(axis=2))
    h_u_given_x = sum(j.p_x[x] * entropy(e.rows[x]) for x in range(j.x_card))
    assert via_table == pytest.approx(entropy(ind.p_u) - h_u_given_x, abs=1e-10)
    assert via_table == pytest.approx(cpx, abs=1e-10)

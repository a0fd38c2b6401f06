import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minsyn.discrete import (
    AbsoluteContinuityError,
    DiscreteJoint,
    ci_decoder_distribution,
    discrete_ci_synergy,
    discrete_wms_synergy,
    entropy,
    mutual_information,
    total_correlation,
)

from _oracles import literal_ci_synergy

LN2 = np.log(2.0)


def random_joint(rng, m=2, nx=2, arity=2) -> DiscreteJoint:
    p = rng.random(size=(arity,) * m + (nx,)) + 1e-3
    return DiscreteJoint(p / p.sum())


def random_factorized_joint(rng, m=3, nx=2, arity=2) -> DiscreteJoint:
    px = rng.random(nx) + 0.1
    px /= px.sum()
    conds = []
    for _ in range(m):
        c = rng.random((arity, nx)) + 0.05
        conds.append(c / c.sum(axis=0, keepdims=True))
    return DiscreteJoint.from_conditionals(px, conds)


class TestEntropy:
    def test_fair_bit(self):
        assert entropy([0.5, 0.5]) == pytest.approx(LN2, abs=1e-15)

    def test_deterministic(self):
        assert entropy([1.0, 0.0]) == 0.0

    def test_hand_value(self):
        expected = -(0.8 * np.log(0.8) + 0.2 * np.log(0.2))
        assert entropy([0.8, 0.2]) == pytest.approx(expected, abs=1e-15)
        assert entropy([0.8, 0.2]) == pytest.approx(0.50040, abs=1e-5)

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            entropy([0.5, 0.6])

    @given(st.lists(st.floats(0.001, 1.0), min_size=2, max_size=8))
    @settings(max_examples=50, deadline=None)
    def test_nonnegative_and_bounded(self, raw):
        p = np.array(raw) / sum(raw)
        h = entropy(p)
        assert 0.0 <= h <= np.log(p.size) + 1e-12


class TestJointValidation:
    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            DiscreteJoint(np.array([[0.6, -0.1], [0.3, 0.2]]))

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            DiscreteJoint(np.full((2, 2), 0.3))

    def test_rejects_too_many_latents(self):
        with pytest.raises(ValueError):
            DiscreteJoint(np.full((2,) * 14, 1.0 / 2 ** 14))

    def test_text_round_trip(self):
        rng = np.random.default_rng(0)
        joint = random_joint(rng, m=2)
        again = DiscreteJoint.from_text(joint.to_text())
        assert np.allclose(joint.probs, again.probs, atol=1e-15)

    def test_text_parsing(self):
        txt = """
        # XOR gate
        0 0 0 0.25
        0 1 1 0.25
        1 0 1 0.25
        1 1 0 0.25
        """
        joint = DiscreteJoint.from_text(txt)
        assert joint.arities == (2, 2, 2)
        assert np.allclose(joint.probs, DiscreteJoint.xor().probs)


class TestMutualInformation:
    def test_xor_single_input_uninformative(self):
        xor = DiscreteJoint.xor()
        assert mutual_information(xor, [0]) == 0.0
        assert mutual_information(xor, [1]) == 0.0

    def test_xor_pair_determines_target(self):
        assert mutual_information(DiscreteJoint.xor(), [0, 1]) == pytest.approx(
            LN2, abs=1e-12)

    def test_independent_target(self):
        p = np.full((2, 2), 0.25)
        assert mutual_information(DiscreteJoint(p), [0]) == pytest.approx(0.0, abs=1e-15)

    def test_empty_group_rejected(self):
        with pytest.raises(ValueError):
            mutual_information(DiscreteJoint.xor(), [])

    def test_monotone_in_group(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            joint = random_joint(rng, m=3)
            whole = mutual_information(joint, [0, 1, 2])
            for sub in ([0], [1], [2], [0, 1], [0, 2], [1, 2]):
                assert whole >= mutual_information(joint, sub) - 1e-12


class TestTotalCorrelation:
    def test_independent_bits(self):
        assert total_correlation(DiscreteJoint(np.full((2, 2, 2), 0.125))) == pytest.approx(
            0.0, abs=1e-12)

    def test_copied_bit(self):
        p = np.zeros((2, 2, 2))
        p[0, 0, :] = 0.25
        p[1, 1, :] = 0.25
        assert total_correlation(DiscreteJoint(p)) == pytest.approx(LN2, abs=1e-12)

    def test_xor_inputs_independent(self):
        assert total_correlation(DiscreteJoint.xor()) == pytest.approx(0.0, abs=1e-12)


class TestCiDecoder:
    def test_factorized_recovers_true_posterior(self):
        rng = np.random.default_rng(4)
        joint = random_factorized_joint(rng, m=3)
        table = ci_decoder_distribution(joint)
        pz = joint.z_marginal()
        true_post = joint.probs / pz[..., None]
        assert np.allclose(table.probs, true_post, atol=1e-12)

    def test_xor_posterior_is_prior(self):
        table = ci_decoder_distribution(DiscreteJoint.xor())
        assert np.allclose(table.probs, 0.5, atol=1e-15)

    def test_single_latent_bayes(self):
        rng = np.random.default_rng(6)
        joint = random_joint(rng, m=1)
        table = ci_decoder_distribution(joint)
        pz = joint.z_marginal()
        assert np.allclose(table.probs, joint.probs / pz[..., None], atol=1e-12)

    def test_rows_normalized(self):
        rng = np.random.default_rng(8)
        joint = random_joint(rng, m=2, nx=3, arity=3)
        table = ci_decoder_distribution(joint)
        sums = np.nansum(table.probs, axis=-1)
        assert np.allclose(sums[table.defined], 1.0, atol=1e-12)

    def test_zero_support_flagged(self):
        p = np.zeros((2, 2, 2))
        # z1 = z2 = x deterministically: the conditionals are degenerate, so
        # the factorized model has no mass on mixed configurations either
        p[0, 0, 0] = p[1, 1, 1] = 0.5
        table = ci_decoder_distribution(DiscreteJoint(p))
        assert table.defined[0, 0] and table.defined[1, 1]
        assert not table.defined[0, 1] and not table.defined[1, 0]
        assert np.isnan(table.probs[0, 1]).all()


class TestCiSynergy:
    def test_xor_is_one_bit(self):
        assert discrete_ci_synergy(DiscreteJoint.xor()) == pytest.approx(LN2, abs=1e-12)

    def test_factorized_zero(self):
        rng = np.random.default_rng(5)
        for m in (1, 2, 3, 4):
            joint = random_factorized_joint(rng, m=m)
            assert discrete_ci_synergy(joint) <= 1e-12

    def test_matches_literal_summation(self):
        rng = np.random.default_rng(9)
        for _ in range(25):
            joint = random_joint(rng, m=2)
            assert discrete_ci_synergy(joint) == pytest.approx(
                literal_ci_synergy(joint.probs), abs=1e-12)

    def test_single_latent_exact_zero(self):
        rng = np.random.default_rng(10)
        for _ in range(10):
            joint = random_joint(rng, m=1, nx=3, arity=4)
            assert discrete_ci_synergy(joint) == 0.0

    def test_nonnegative(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            joint = random_joint(rng, m=3)
            assert discrete_ci_synergy(joint) >= 0.0


class TestWmsSynergy:
    def test_xor(self):
        assert discrete_wms_synergy(DiscreteJoint.xor()) == pytest.approx(LN2, abs=1e-12)

    def test_redundant_copies_negative(self):
        # Z1 = Z2 = X fair bit: whole ln2, singles ln2 each
        p = np.zeros((2, 2, 2))
        p[0, 0, 0] = p[1, 1, 1] = 0.5
        assert discrete_wms_synergy(DiscreteJoint(p)) == pytest.approx(-LN2, abs=1e-12)

    def test_independent_target_zero(self):
        p = np.full((2, 2, 2), 0.125)
        assert discrete_wms_synergy(DiscreteJoint(p)) == pytest.approx(0.0, abs=1e-12)


class TestRelabelingInvariance:
    def test_symbol_relabeling_and_permutation(self):
        rng = np.random.default_rng(13)
        joint = random_joint(rng, m=2, nx=2, arity=3)
        flipped = DiscreteJoint(joint.probs[::-1, :, :])  # relabel z1 symbols
        swapped = DiscreteJoint(np.transpose(joint.probs, (1, 0, 2)))
        for f in (discrete_ci_synergy, discrete_wms_synergy, total_correlation):
            assert f(joint) == pytest.approx(f(flipped), abs=1e-12)
            assert f(joint) == pytest.approx(f(swapped), abs=1e-12)

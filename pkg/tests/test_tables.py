"""Potential algebra: products, marginalization, evidence, indicators."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctprop.errors import EvidenceError, ModelInconsistencyError, ZeroEvidenceError
from ctprop.tables import (
    Potential,
    Variable,
    broadcast_over,
    extend_with_indicator,
    multiply,
    normalize,
    product,
    restrict,
    sum_out,
)

from conftest import make_variable

A = make_variable(0, 2, "a")
B = make_variable(1, 3, "b")
C = make_variable(2, 2, "c")


def pot(scope, values):
    return Potential(scope, np.asarray(values, dtype=float))


@st.composite
def small_potentials(draw, scope):
    n = 1
    for v in scope:
        n *= v.card
    vals = draw(st.lists(st.floats(0.0, 10.0, allow_nan=False), min_size=n, max_size=n))
    return pot(scope, np.asarray(vals).reshape(tuple(v.card for v in scope)))


class TestVariable:
    def test_requires_states(self):
        with pytest.raises(ValueError):
            Variable(0, "empty", ())

    def test_duplicate_state_labels(self):
        with pytest.raises(ValueError):
            Variable(0, "x", ("s", "s"))

    def test_state_index_resolution(self):
        assert B.state_index("s2") == 2
        assert B.state_index(1) == 1
        with pytest.raises(EvidenceError):
            B.state_index("nope")
        with pytest.raises(EvidenceError):
            B.state_index(3)


class TestMultiply:
    def test_scalar_identity(self):
        p = pot([A], [0.3, 0.7])
        out = multiply(Potential.scalar(1.0), p)
        assert out.scope == p.scope
        np.testing.assert_array_equal(out.values, p.values)

    def test_constant_factor_scaling(self):
        p = pot([A], [0.3, 0.7])
        q = pot([A], [2.0, 2.0])
        np.testing.assert_allclose(multiply(p, q).values, [0.6, 1.4])

    def test_scope_union_sorted(self):
        p = pot([A], [1.0, 2.0])
        q = pot([B], [1.0, 2.0, 3.0])
        out = multiply(q, p)
        assert [v.id for v in out.scope] == [0, 1]
        np.testing.assert_allclose(out.values, np.outer([1, 2], [1, 2, 3]))

    def test_identity_clash_rejected(self):
        impostor = Variable(0, "a0imp", ("t0", "t1"))
        with pytest.raises(ModelInconsistencyError):
            multiply(pot([A], [1, 1]), pot([impostor], [1, 1]))

    def test_same_name_different_id_rejected(self):
        impostor = Variable(5, A.name, A.states)
        with pytest.raises(ModelInconsistencyError):
            multiply(pot([A], [1, 1]), pot([impostor], [1, 1]))

    @given(small_potentials([A, B]), small_potentials([B, C]))
    @settings(max_examples=100, deadline=None)
    def test_commutative(self, p, q):
        left = multiply(p, q)
        right = multiply(q, p)
        np.testing.assert_allclose(left.values, right.values)

    @given(small_potentials([A]), small_potentials([B]), small_potentials([A, C]))
    @settings(max_examples=100, deadline=None)
    def test_associative(self, p, q, r):
        left = multiply(multiply(p, q), r)
        right = multiply(p, multiply(q, r))
        np.testing.assert_allclose(left.values, right.values, rtol=1e-12, atol=1e-12)


class TestSumOut:
    def test_empty_is_identity(self):
        p = pot([A, B], np.arange(6))
        out = sum_out(p, [])
        np.testing.assert_array_equal(out.values, p.values)

    def test_full_scope_of_joint_gives_one(self):
        joint = pot([A, B], np.full((2, 3), 1.0 / 6))
        out = sum_out(joint, [A, B])
        assert out.scope == ()
        assert out.values == pytest.approx(1.0)

    def test_hand_summed_marginal(self):
        # P(a|c) * P(c) summed over c, against explicit arithmetic
        p_c = pot([C], [0.4, 0.6])
        p_a_given_c = pot([A, C], [[0.3, 0.8], [0.7, 0.2]])
        marg = sum_out(multiply(p_a_given_c, p_c), [C])
        np.testing.assert_allclose(
            marg.values, [0.3 * 0.4 + 0.8 * 0.6, 0.7 * 0.4 + 0.2 * 0.6])

    def test_not_in_scope_rejected(self):
        with pytest.raises(ValueError):
            sum_out(pot([A], [1, 1]), [B])

    @given(small_potentials([A, B]), small_potentials([B, C]))
    @settings(max_examples=100, deadline=None)
    def test_distributes_over_multiply(self, p, q):
        # summing out a variable absent from q commutes with the product
        left = sum_out(multiply(p, q), [A])
        right = multiply(sum_out(p, [A]), q)
        np.testing.assert_allclose(left.values, right.values, rtol=1e-12, atol=1e-12)

    @given(small_potentials([A, B, C]))
    @settings(max_examples=100, deadline=None)
    def test_composes_over_disjoint_sets(self, p):
        left = sum_out(sum_out(p, [A]), [C])
        right = sum_out(p, [A, C])
        np.testing.assert_allclose(left.values, right.values, rtol=1e-12, atol=1e-12)

    def test_cpt_rows_sum_to_ones_table(self):
        p_a_given_c = pot([A, C], [[0.3, 0.8], [0.7, 0.2]])
        out = sum_out(p_a_given_c, [A])
        np.testing.assert_allclose(out.values, [1.0, 1.0])


class TestRestrict:
    def test_empty_evidence_is_identity(self):
        p = pot([A, B], np.arange(6))
        assert restrict(p, {}) is p

    def test_slice_matches_manual_indexing(self):
        p = pot([A, B], np.arange(6).reshape(2, 3))
        out = restrict(p, {A: "s1"})
        assert out.scope == (B,)
        np.testing.assert_array_equal(out.values, [3, 4, 5])

    def test_unknown_state_rejected(self):
        with pytest.raises(EvidenceError):
            restrict(pot([A], [1, 1]), {A: "bogus"})

    def test_outside_scope_rejected(self):
        with pytest.raises(ValueError):
            restrict(pot([A], [1, 1]), {B: 0})

    @given(small_potentials([A, B, C]), st.integers(0, 1))
    @settings(max_examples=100, deadline=None)
    def test_commutes_with_sum_out_on_disjoint_vars(self, p, s):
        left = restrict(sum_out(p, [B]), {A: s})
        right = sum_out(restrict(p, {A: s}), [B])
        np.testing.assert_allclose(left.values, right.values, rtol=1e-12, atol=1e-12)

    def test_restrict_then_sum_equals_matching_rows(self):
        rng = np.random.default_rng(7)
        p = pot([A, B, C], rng.uniform(size=(2, 3, 2)))
        out = sum_out(restrict(p, {B: 1}), [A])
        np.testing.assert_allclose(out.values, p.values[:, 1, :].sum(axis=0))


class TestNormalize:
    def test_uniform(self):
        out = normalize(pot([A], [0.2, 0.2]))
        np.testing.assert_allclose(out.values, [0.5, 0.5])

    def test_already_normalized_is_fixed_point(self):
        p = pot([A], [0.25, 0.75])
        np.testing.assert_array_equal(normalize(p).values, p.values)

    def test_zero_mass_raises(self):
        with pytest.raises(ZeroEvidenceError):
            normalize(pot([A], [0.0, 0.0]))


class TestIndicatorExtension:
    def test_empty_is_identity(self):
        p = pot([A], [1.0, 2.0])
        assert extend_with_indicator(p, {}) is p

    def test_scalar_to_indicator_column(self):
        h = make_variable(7, 2, "h")
        out = extend_with_indicator(Potential.scalar(0.4), {h: 0})
        assert out.scope == (h,)
        np.testing.assert_allclose(out.values, [0.4, 0.0])

    def test_overlap_rejected(self):
        with pytest.raises(ValueError):
            extend_with_indicator(pot([A], [1, 1]), {A: 0})

    @given(small_potentials([A, B]), st.integers(0, 1))
    @settings(max_examples=100, deadline=None)
    def test_sum_out_recovers_original(self, p, s):
        out = extend_with_indicator(p, {C: s})
        back = sum_out(out, [C])
        np.testing.assert_allclose(back.values, p.values)


class TestHelpers:
    def test_product_of_nothing_is_one(self):
        out = product([])
        assert out.scope == ()
        assert out.values == pytest.approx(1.0)

    def test_broadcast_repeats_values(self):
        p = pot([A], [1.0, 2.0])
        out = broadcast_over(p, [B])
        assert [v.id for v in out.scope] == [0, 1]
        np.testing.assert_array_equal(out.values, [[1, 1, 1], [2, 2, 2]])

    def test_values_are_immutable(self):
        p = pot([A], [1.0, 2.0])
        with pytest.raises(ValueError):
            p.values[0] = 5.0

    def test_negative_values_rejected(self):
        with pytest.raises(ValueError):
            pot([A], [-0.1, 1.1])

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            pot([A], [np.nan, 1.0])

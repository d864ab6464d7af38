"""Bound formulas: frozen hand values, error paths, and algebraic properties."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spherebuckle.bounds import (
    BoundTerms,
    CheckRecord,
    bound_next,
    bound_terms,
    build_report,
    chebyshev_check,
    check_theorem,
    check_yang,
    compute_S_T,
    default_delta_grid,
    dominance_gap,
    optimal_delta,
    report_to_csv_rows,
    wangxia_rhs,
    CSV_COLUMNS,
)
from spherebuckle.errors import (
    AllGapsZero,
    InvalidDelta,
    InvalidInput,
    NegativeDiscriminant,
    OrderViolation,
    SingularTerm,
)
from spherebuckle.spectrum import Spectrum


def spec(n, *vals):
    return Spectrum(n, tuple(float(v) for v in vals))


# Random admissible spectra: sorted draws comfortably above n-2.
def spectra(min_k=1, max_k=6):
    return st.integers(2, 5).flatmap(
        lambda n: st.lists(
            st.floats(n, n + 100.0), min_size=min_k, max_size=max_k
        ).map(lambda v: Spectrum(n, tuple(sorted(v))))
    )


class TestBoundTerms:
    @pytest.mark.parametrize(
        "n,lam,w,p",
        [(2, 2.0, 2.0, 2.0), (3, 3.0, 2.5, 3.25), (4, 4.0, 3.0, 5.0)],
    )
    def test_hand_values(self, n, lam, w, p):
        t = bound_terms(lam, n)
        assert t == BoundTerms(w, p)

    def test_singular(self):
        with pytest.raises(SingularTerm):
            bound_terms(1.0, 3)
        with pytest.raises(SingularTerm):
            bound_terms(2.0, 4)

    @given(st.floats(0.001, 200.0))
    def test_n2_reduction_exact(self, lam):
        t = bound_terms(lam, 2)
        assert t.w == lam and t.p == lam


class TestComputeST:
    def test_n2_singleton(self):
        assert compute_S_T(spec(2, 2), 1) == (4.0, 12.0)

    def test_n3_singleton(self):
        S, T = compute_S_T(spec(3, 3), 1)
        assert S == 7.0625 and T == 33.375

    def test_identical_pair_averages(self):
        assert compute_S_T(spec(2, 2, 2), 2) == (4.0, 12.0)

    def test_bad_k(self):
        with pytest.raises(InvalidInput):
            compute_S_T(spec(2, 2), 0)
        with pytest.raises(InvalidInput):
            compute_S_T(spec(2, 2), 2)


class TestBoundNext:
    def test_n2_singleton(self):
        assert bound_next(spec(2, 2), 1) == (6.0, 4.0, 2.0)

    def test_n3_singleton(self):
        up, gap, lo = bound_next(spec(3, 3), 1)
        assert up == 11.125 and gap == 8.125 and lo == 3.0

    def test_identical_triple_reduces_to_k1(self):
        up, gap, lo = bound_next(spec(2, 5, 5, 5), 3)
        assert math.isclose(up, 30.0, rel_tol=1e-14)
        assert math.isclose(lo, 5.0, rel_tol=1e-14)

    def test_negative_discriminant_reported(self):
        # Tiny first eigenvalue with a huge spread drives T above S^2.
        with pytest.raises(NegativeDiscriminant) as exc:
            bound_next(spec(2, 1e-6, 4.0), 2)
        assert exc.value.S**2 < exc.value.T

    @given(spectra())
    @settings(max_examples=80)
    def test_k1_closed_form_identity(self, s):
        up, gap, lo = bound_next(s, 1)
        t = bound_terms(s.values[0], s.n)
        expect = s.values[0] + t.w * t.p
        assert math.isclose(up, expect, rel_tol=1e-12)
        assert math.isclose(lo, s.values[0], rel_tol=1e-12)
        assert math.isclose(gap, t.w * t.p, rel_tol=1e-12)


class TestCheckTheorem:
    def test_saturation_equality_n2(self):
        r = check_theorem(spec(2, 2), 1, 6.0)
        assert r.lhs == 32.0 and r.rhs == 32.0 and r.holds

    def test_n3_hand_value(self):
        r = check_theorem(spec(3, 3), 1, 5.0)
        assert r.lhs == 10.0
        assert math.isclose(r.rhs, 2.0 * math.sqrt(65.0), rel_tol=1e-15)
        assert r.holds

    def test_zero_gaps(self):
        r = check_theorem(spec(4, 4, 4), 2, 4.0)
        assert r.lhs == 0.0 and r.rhs == 0.0 and r.holds

    def test_order_violation(self):
        with pytest.raises(OrderViolation):
            check_theorem(spec(2, 2, 3), 2, 2.5)


class TestCheckYang:
    def test_saturation_equality_n2(self):
        r = check_yang(spec(2, 2), 1, 6.0)
        assert r.lhs == 16.0 and r.rhs == 16.0 and r.holds

    def test_n3_hand_value(self):
        r = check_yang(spec(3, 3), 1, 5.0)
        assert r.lhs == 4.0 and r.rhs == 16.25 and r.holds

    def test_zero_gap(self):
        r = check_yang(spec(4, 4), 1, 4.0)
        assert r.lhs == 0.0 and r.rhs == 0.0 and r.holds

    @given(spectra(min_k=2), st.floats(0.0, 50.0))
    @settings(max_examples=120)
    def test_implied_by_theorem(self, s, bump):
        # Whenever the quadratic inequality holds, the Yang-type one follows.
        k = len(s.values) - 1
        lam_next = s.values[k] + bump
        thm = check_theorem(s, k, lam_next)
        yang = check_yang(s, k, lam_next)
        if thm.slack >= 0:
            assert yang.slack >= -1e-10 * max(abs(yang.lhs), abs(yang.rhs), 1.0)

    @given(spectra())
    @settings(max_examples=80)
    def test_holds_at_quadratic_root(self, s):
        # The upper bound is the root of the Yang-type quadratic, so the
        # inequality saturates (within roundoff) at lambda_next = upper.
        k = len(s.values)
        up, _, _ = bound_next(s, k)
        r = check_yang(s, k, up)
        assert r.slack >= -1e-12 * max(abs(r.lhs), abs(r.rhs), 1.0)


class TestWangXia:
    def test_delta_one(self):
        r = wangxia_rhs(spec(2, 2), 1, 6.0, 1.0)
        assert r.lhs == 32.0 and r.rhs == 44.0 and r.holds

    def test_delta_half(self):
        r = wangxia_rhs(spec(2, 2), 1, 6.0, 0.5)
        assert r.lhs == 32.0 and r.rhs == 34.0 and r.holds

    def test_zero_gap_any_delta(self):
        for d in (0.3, 1.0, 7.0):
            r = wangxia_rhs(spec(3, 3), 1, 3.0, d)
            assert r.lhs == 0.0 and r.rhs == 0.0

    def test_invalid_delta(self):
        with pytest.raises(InvalidDelta):
            wangxia_rhs(spec(2, 2), 1, 6.0, 0.0)
        with pytest.raises(InvalidDelta):
            wangxia_rhs(spec(2, 2), 1, 6.0, -1.0)


class TestOptimalDelta:
    def test_n2_hand_value(self):
        d, rhs = optimal_delta(spec(2, 2), 1, 6.0)
        assert d == 0.5 and rhs == 32.0

    def test_n3_hand_value(self):
        d, rhs = optimal_delta(spec(3, 3), 1, 5.0)
        assert math.isclose(d, math.sqrt(0.65), rel_tol=1e-15)
        assert math.isclose(rhs, 2.0 * math.sqrt(65.0), rel_tol=1e-14)

    def test_all_gaps_zero(self):
        with pytest.raises(AllGapsZero):
            optimal_delta(spec(2, 2), 1, 2.0)

    @given(spectra(min_k=2), st.floats(0.1, 50.0))
    @settings(max_examples=100)
    def test_matches_theorem_rhs(self, s, bump):
        k = len(s.values) - 1
        lam_next = s.values[k] + bump
        _, minimized = optimal_delta(s, k, lam_next)
        thm = check_theorem(s, k, lam_next)
        assert math.isclose(minimized, thm.rhs, rel_tol=1e-12)

    @given(spectra(min_k=2), st.floats(0.1, 50.0))
    @settings(max_examples=60)
    def test_no_sampled_delta_beats_closed_form(self, s, bump):
        k = len(s.values) - 1
        lam_next = s.values[k] + bump
        _, minimized = optimal_delta(s, k, lam_next)
        gaps = [lam_next - v for v in s.values[:k]]
        terms = [bound_terms(v, s.n) for v in s.values[:k]]
        sw = sum(g * g * t.w for g, t in zip(gaps, terms))
        sp = sum(g * t.p for g, t in zip(gaps, terms))
        for d in default_delta_grid():
            sampled = d * sw + sp / d
            assert sampled >= minimized * (1.0 - 1e-10)


class TestDominance:
    def test_hand_values(self):
        out = dominance_gap(spec(2, 2), 1, 6.0, [1.0, 0.5])
        (d1, wx1, new1, g1), (d2, wx2, new2, g2) = out
        assert (wx1, new1, g1) == (44.0, 32.0, 12.0)
        assert (wx2, new2, g2) == (34.0, 32.0, 2.0)

    def test_zero_gap(self):
        out = dominance_gap(spec(3, 3), 1, 3.0, [0.7])
        assert out[0][3] == 0.0

    def test_empty_grid_rejected(self):
        with pytest.raises(InvalidInput):
            dominance_gap(spec(2, 2), 1, 6.0, [])

    @given(spectra(min_k=2), st.floats(0.1, 50.0))
    @settings(max_examples=60)
    def test_never_negative(self, s, bump):
        k = len(s.values) - 1
        lam_next = s.values[k] + bump
        for d, wx, new, gap in dominance_gap(s, k, lam_next, default_delta_grid()):
            assert gap >= -1e-10 * max(abs(wx), abs(new), 1.0)


class TestChebyshev:
    def test_k1_equality(self):
        r = chebyshev_check(spec(3, 3), 1, 5.0)
        assert math.isclose(r.lhs, r.rhs, rel_tol=1e-15)

    def test_two_term_hand_value(self):
        r = chebyshev_check(spec(3, 3, 4), 2, 5.0)
        assert math.isclose(r.lhs, (41.0 / 3.0) * 10.75, rel_tol=1e-14)
        assert math.isclose(r.rhs, 5.0 * (16.25 + (11.0 / 3.0) * 4.25), rel_tol=1e-14)
        assert r.holds

    def test_zero_gap(self):
        r = chebyshev_check(spec(2, 2, 2), 2, 2.0)
        assert r.lhs == 0.0 and r.rhs == 0.0 and r.holds

    @given(spectra(min_k=2), st.floats(0.0, 50.0))
    @settings(max_examples=100)
    def test_always_holds_for_sorted(self, s, bump):
        k = len(s.values) - 1
        r = chebyshev_check(s, k, s.values[k] + bump)
        assert r.slack >= -1e-10 * max(abs(r.lhs), abs(r.rhs), 1.0)


class TestNTwoDegeneration:
    @given(st.lists(st.floats(0.5, 100.0), min_size=2, max_size=6), st.floats(0.0, 20.0))
    @settings(max_examples=100)
    def test_formulas_collapse(self, vals, bump):
        # At n=2 the simplified forms use w = p = lambda everywhere.
        vals = sorted(vals)
        s = Spectrum(2, tuple(vals))
        k = len(vals) - 1
        lam_next = vals[k] + bump
        gaps = [lam_next - v for v in vals[:k]]
        thm = check_theorem(s, k, lam_next)
        lhs_simple = 2.0 * sum(g * g for g in gaps)
        rhs_simple = 2.0 * math.sqrt(
            sum(g * g * v for g, v in zip(gaps, vals))
        ) * math.sqrt(sum(g * v for g, v in zip(gaps, vals)))
        assert abs(thm.lhs - lhs_simple) <= 1e-14 * max(abs(thm.lhs), 1.0)
        assert abs(thm.rhs - rhs_simple) <= 1e-14 * max(abs(thm.rhs), 1.0)
        yang = check_yang(s, k, lam_next)
        yang_rhs_simple = sum(g * v * v for g, v in zip(gaps, vals))
        assert abs(yang.rhs - yang_rhs_simple) <= 1e-14 * max(abs(yang.rhs), 1.0)


class TestMonotonicityEmpirical:
    def test_report_upper_next_perturbations(self):
        # Not asserted as an invariant, only measured: bumping one
        # eigenvalue upward should not pull the upper bound down.
        import random

        rng = random.Random(1234)
        violations = 0
        trials = 300
        for _ in range(trials):
            n = rng.choice([2, 3, 4])
            k = rng.randint(1, 5)
            vals = sorted(rng.uniform(n, n + 50) for _ in range(k))
            s = Spectrum(n, tuple(vals))
            base, _, _ = bound_next(s, k)
            i = rng.randrange(k)
            bumped = list(vals)
            hi = bumped[i + 1] if i + 1 < k else bumped[i] + 10.0
            bumped[i] = rng.uniform(bumped[i], hi)
            try:
                new, _, _ = bound_next(Spectrum(n, tuple(sorted(bumped))), k)
            except NegativeDiscriminant:
                continue
            if new < base * (1.0 - 1e-9):
                violations += 1
        print(f"upper_next monotonicity violations: {violations}/{trials}")


class TestRecordsAndReport:
    def test_checkrecord_tolerance(self):
        r = CheckRecord.make("yang15", 1.0 + 5e-11, 1.0)
        assert r.holds and r.slack < 0
        r2 = CheckRecord.make("yang15", 1.0 + 1e-9, 1.0)
        assert not r2.holds

    def test_build_report_ids_and_csv(self):
        s = spec(2, 2.0, 6.0)
        rep = build_report(s, 1, lambda_next=6.0, theta0=1.0, meta={"N": 64})
        ids = {c.inequality_id for c in rep.checks}
        assert ids == {
            "thm14",
            "yang15",
            "upper16",
            "gap17",
            "lower216",
            "chebyshev",
            "wx13",
            "dominance",
        }
        assert rep.delta_star == 0.5
        wx = [c for c in rep.checks if c.inequality_id == "wx13"]
        assert len(wx) == 50 and all(c.delta is not None for c in wx)
        rows = report_to_csv_rows(rep)
        assert len(rows) == len(rep.checks)
        for row in rows:
            assert tuple(row.keys()) == CSV_COLUMNS
        base = [r for r in rows if r["inequality_id"] == "upper16"][0]
        assert base["delta"] == "" and base["meta_N"] == 64

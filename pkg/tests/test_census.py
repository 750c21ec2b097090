import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

import entroscope as es
from entroscope.growth import InsufficientData

from oracles import brute_census, readable_words

PHI = (1 + math.sqrt(5)) / 2

forbidden_sets = st.lists(
    st.text(alphabet="ab", min_size=1, max_size=3), min_size=1, max_size=2
).map(lambda ws: es.ForbiddenSet(tuple(tuple(w) for w in ws)))


class TestCountWords:
    def test_full_shift_plain(self, b2):
        c = es.count_words(b2, "v", "v", 3)
        assert c.counts == (1, 2, 4, 8)

    def test_full_shift_fibonacci(self, b2):
        F = es.ForbiddenSet.from_strings(["aa"], b2.alphabet)
        expected = tuple(brute_census(b2, "v", "v", 6, F.words))
        assert expected == (1, 2, 3, 5, 8, 13, 21)
        assert es.count_words(b2, "v", "v", 6, forbidden=F).counts == expected

    def test_line_central_binomials(self, line_z):
        expected = tuple(brute_census(line_z, 0, 0, 4))
        assert expected == (1, 0, 2, 0, 6)
        assert es.count_words(line_z, 0, 0, 4).counts == expected

    def test_empty_word_count(self, two_cycle):
        assert es.count_words(two_cycle, "x", "y", 2).counts[0] == 0
        assert es.count_words(two_cycle, "x", "x", 2).counts[0] == 1

    def test_nondeterministic_rejected(self):
        g = es.explicit_graph(["a"], [("x", "a", "y"), ("x", "a", "z")], roots=["x"])
        with pytest.raises(es.NondeterministicWindow):
            es.count_words(g, "x", "y", 2)

    @pytest.mark.parametrize(
        "fixture,x,y", [("golden_mean", "v1", "v1"), ("two_cycle", "x", "y"), ("line_z", 0, 1)]
    )
    def test_oracle_equivalence(self, fixture, x, y, request):
        g = request.getfixturevalue(fixture)
        assert es.count_words(g, x, y, 8).counts == tuple(brute_census(g, x, y, 8))

    @pytest.mark.parametrize("words", [["aa"], ["ab"], ["ba", "bb"], ["aba"]])
    def test_oracle_equivalence_forbidden(self, golden_mean, words):
        F = es.ForbiddenSet.from_strings(words, golden_mean.alphabet)
        got = es.count_words(golden_mean, "v1", "v1", 8, forbidden=F).counts
        assert got == tuple(brute_census(golden_mean, "v1", "v1", 8, F.words))

    @given(F=forbidden_sets)
    def test_forbidding_never_increases_counts(self, F):
        b2 = es.explicit_graph(
            ["a", "b"], [("v", "a", "v"), ("v", "b", "v")], roots=["v"]
        )
        plain = es.count_words(b2, "v", "v", 8).counts
        restricted = es.count_words(b2, "v", "v", 8, forbidden=F).counts
        assert all(cf <= c for cf, c in zip(restricted, plain))

    def test_product_consistency(self, golden_mean):
        F = es.ForbiddenSet.from_strings(["ab"], golden_mean.alphabet)
        A = es.build_factor_automaton(F, golden_mean.alphabet)
        pg = es.product_graph(golden_mean, A, roots=["v1"])
        start = ("v1", A.start)
        states = es.forward_ball(pg, start, 8).vertices
        for n in range(9):
            direct = es.count_words(golden_mean, "v1", "v1", n, forbidden=F).counts[n]
            via_product = sum(
                es.count_words(pg, start, q, n).counts[n]
                for q in states
                if q[0] == "v1"
            )
            assert direct == via_product


class TestDeterminize:
    def test_already_deterministic(self, golden_mean):
        w = es.full_window(golden_mean)
        dfa = es.determinize(golden_mean, w)
        assert dfa.roots == (("v1",),)
        assert readable_words(dfa, dfa.roots[0], 6) == readable_words(
            golden_mean, "v1", 6
        )

    def test_subset_vertex_after_collision(self):
        g = es.explicit_graph(
            ["a"], [("x", "a", "y"), ("x", "a", "z")], roots=["x"]
        )
        w = es.full_window(g)
        dfa = es.determinize(g, w)
        (edge,) = dfa.out_edges(("x",))
        assert edge.target == ("y", "z")

    def test_three_state_nfa_language_equal(self):
        nfa = es.explicit_graph(
            ["a", "b"],
            [
                ("0", "a", "1"),
                ("0", "a", "2"),
                ("1", "b", "0"),
                ("2", "b", "2"),
                ("2", "a", "1"),
            ],
            roots=["0"],
        )
        w = es.full_window(nfa)
        dfa = es.determinize(nfa, w)
        ball = es.forward_ball(dfa, dfa.roots[0], 8)
        assert es.check_deterministic(dfa, ball) == []
        assert readable_words(dfa, dfa.roots[0], 8) == readable_words(nfa, "0", 8)


class TestEntropyFromCounts:
    def test_fibonacci_slope(self, b2):
        F = es.ForbiddenSet.from_strings(["aa"], b2.alphabet)
        census = es.count_words(b2, "v", "v", 30, forbidden=F)
        est = es.entropy_from_counts(census)
        assert est.method == "count-fit"
        assert abs(est.value - math.log(PHI)) < 0.01

    def test_full_shift_exact_line(self, b2):
        est = es.entropy_from_counts(es.count_words(b2, "v", "v", 40))
        assert abs(est.value - math.log(2)) < 1e-9
        assert est.diagnostics["residual"] < 1e-9

    def test_line_period_two(self, line_z):
        est = es.entropy_from_counts(es.count_words(line_z, 0, 0, 40))
        assert est.period == 2
        assert abs(est.value - math.log(2)) < 0.05

    def test_finite_language_sentinel(self, b2):
        F = es.ForbiddenSet.from_strings(["a", "b"], b2.alphabet)
        census = es.count_words(b2, "v", "v", 10, forbidden=F)
        assert census.counts == (1,) + (0,) * 10
        est = es.entropy_from_counts(census)
        assert est.finite_language
        assert est.value == float("-inf")

    def test_insufficient_data(self, b2):
        with pytest.raises(InsufficientData):
            es.entropy_from_counts(es.count_words(b2, "v", "v", 0))

    def test_last_ratio_diagnostic(self, b2):
        est = es.entropy_from_counts(es.count_words(b2, "v", "v", 30))
        assert abs(est.diagnostics["last_ratio"] - math.log(2)) < 1e-12


class TestSpectralEntropy:
    def test_full_shift(self, b2):
        est = es.spectral_entropy_finite(b2)
        assert est.method == "spectral"
        assert abs(est.value - math.log(2)) < 1e-12

    def test_golden_mean(self, golden_mean):
        est = es.spectral_entropy_finite(golden_mean)
        assert abs(est.value - math.log(PHI)) < 1e-9

    def test_three_cycle_zero(self, three_cycle):
        assert abs(es.spectral_entropy_finite(three_cycle).value) < 1e-12

    def test_not_strongly_connected(self):
        g = es.explicit_graph(["a"], [("x", "a", "y")], roots=["x"])
        with pytest.raises(es.NotStronglyConnected):
            es.spectral_entropy_finite(g)

    def test_nondeterministic_rejected(self):
        g = es.explicit_graph(
            ["a"], [("x", "a", "y"), ("x", "a", "x"), ("y", "a", "x")], roots=["x"]
        )
        with pytest.raises(es.NondeterministicWindow):
            es.spectral_entropy_finite(g)

    @pytest.mark.parametrize("fixture", ["b2", "golden_mean", "three_cycle"])
    def test_count_agreement(self, fixture, request):
        g = request.getfixturevalue(fixture)
        root = g.roots[0]
        spectral = es.spectral_entropy_finite(g)
        counted = es.entropy_from_counts(es.count_words(g, root, root, 40), tail=20)
        assert abs(spectral.value - counted.value) < 0.02


class TestGapReport:
    def test_golden_mean_drop(self, b2):
        F = es.ForbiddenSet.from_strings(["aa"], b2.alphabet)
        report = es.entropy_gap_report(b2, "v", "v", F, 40)
        assert abs(report.h.value - math.log(2)) < 1e-9
        assert abs(report.h_forbidden.value - math.log(PHI)) < 1e-4
        assert abs(report.gap - (math.log(2) - math.log(PHI))) < 1e-3
        assert report.certificate is not None
        assert report.certificate.bound < 1.0
        assert report.certificate_scope == "global"

    def test_polynomial_survivor(self, b2):
        # words avoiding ab are b^i a^j: exactly n + 1 per length
        F = es.ForbiddenSet.from_strings(["ab"], b2.alphabet)
        report = es.entropy_gap_report(b2, "v", "v", F, 40)
        assert report.census_forbidden.counts == tuple(range(1, 42))
        assert report.h_forbidden.value < 0.05
        assert abs(report.gap - math.log(2)) < 0.05

    def test_undense_forbidden_warns(self):
        # b is in the alphabet but labels no edge, so forbidding it is free
        g = es.explicit_graph(
            ["a", "b"],
            [("0", "a", "1"), ("1", "a", "2"), ("2", "a", "0")],
            roots=["0"],
        )
        F = es.ForbiddenSet.from_strings(["b"], g.alphabet)
        report = es.entropy_gap_report(g, "0", "0", F, 30)
        assert report.certificate is None
        assert report.gap == 0
        assert any("dense" in w for w in report.warnings)
        assert any("drop" in w for w in report.warnings)

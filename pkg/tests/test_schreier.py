import itertools
import math

import pytest

import entroscope as es
from entroscope.schreier import ActionError, builtin_family, schreier_graph

from oracles import brute_census, coset_rep

INV = {"a": "A", "A": "a", "b": "B", "B": "b", "r": "l", "l": "r",
       "u": "d", "d": "u"}


class TestBuiltinFamilies:
    def test_line_structure(self):
        spec = builtin_family("line_Z")
        g = schreier_graph(spec)
        assert spec.root == 0
        assert {(e.label, e.target) for e in g.out_edges(0)} == {("r", 1), ("l", -1)}
        assert spec.declared.conn_k == 1
        assert spec.declared.rho == 1.0

    def test_grid_structure(self):
        g = schreier_graph(builtin_family("grid_Z2"))
        targets = {(e.label, e.target) for e in g.out_edges((0, 0))}
        assert targets == {("r", (1, 0)), ("l", (-1, 0)), ("u", (0, 1)), ("d", (0, -1))}

    def test_free2_root_loops(self):
        spec = builtin_family("free2_mod_cyclic")
        g = schreier_graph(spec)
        assert spec.root == ""
        edges = {(e.label, e.target) for e in g.out_edges("")}
        assert edges == {("a", ""), ("A", ""), ("b", "b"), ("B", "B")}

    def test_unknown_family(self):
        with pytest.raises(KeyError):
            builtin_family("lamplighter")

    def test_action_error_is_hard(self):
        spec = es.ActionSpec(
            name="broken", alphabet=("a",), act=lambda v, a: 1 / 0, root="o"
        )
        g = schreier_graph(spec)
        with pytest.raises(ActionError):
            g.out_edges("o")

    @pytest.mark.parametrize("family", ["line_Z", "grid_Z2", "free2_mod_cyclic"])
    def test_fully_deterministic_on_window(self, family):
        g = schreier_graph(builtin_family(family))
        w = es.forward_ball(g, g.roots[0], 3)
        assert es.check_deterministic(g, w) == []
        assert es.check_fully_deterministic(g, w) == []

    @pytest.mark.parametrize("family", ["line_Z", "grid_Z2", "free2_mod_cyclic"])
    def test_inverse_closure(self, family):
        g = schreier_graph(builtin_family(family))
        spec = builtin_family(family)
        w = es.forward_ball(g, g.roots[0], 4)
        for d in w.vertices:
            for sym in g.alphabet:
                assert spec.act(spec.act(d, sym), INV[sym]) == d


class TestFree2Cosets:
    def test_act_composition_matches_reduced_word_oracle(self):
        spec = builtin_family("free2_mod_cyclic")
        for n in range(6):
            for word in itertools.product("aAbB", repeat=n):
                d = spec.root
                for sym in word:
                    d = spec.act(d, sym)
                assert d == coset_rep(word)

    def test_census_small(self):
        spec = builtin_family("free2_mod_cyclic")
        census = es.word_problem_census(spec, 2)
        # oracle: words of length <= 2 reducing into the a-span
        expected = [
            sum(1 for w in itertools.product("aAbB", repeat=n) if coset_rep(w) == "")
            for n in range(3)
        ]
        assert expected == [1, 2, 6]
        assert census.counts == (1, 2, 6)


class TestWordProblemCensus:
    def test_line_plain(self):
        spec = builtin_family("line_Z")
        assert es.word_problem_census(spec, 4).counts == (1, 0, 2, 0, 6)

    def test_line_no_double_right(self, line_z):
        spec = builtin_family("line_Z")
        F = es.ForbiddenSet.from_strings(["rr"], spec.alphabet)
        expected = tuple(brute_census(line_z, 0, 0, 4, F.words))
        assert expected == (1, 0, 2, 0, 3)
        assert es.word_problem_census(spec, 4, forbidden=F).counts == expected

    def test_word_over_wrong_alphabet_rejected(self):
        spec = builtin_family("line_Z")
        with pytest.raises(es.ForbiddenWordError):
            es.ForbiddenSet.from_strings(["rx"], spec.alphabet)


class TestGrowthSensitivity:
    def test_line_certified_drop(self):
        spec = builtin_family("line_Z")
        F = es.ForbiddenSet.from_strings(["rr"], spec.alphabet)
        report = es.growth_sensitivity_report(spec, F, 40)
        assert abs(report.h.value - math.log(2)) < 0.05
        assert report.h_forbidden.value < report.h.value - 0.05
        cert = report.certificate
        assert cert is not None
        assert (cert.alpha, cert.D, cert.R, cert.conn_k) == (0.5, 0, 2, 1)
        assert report.certificate_scope == "global"
        assert report.h_forbidden.value < cert.h_bound(2)

    def test_grid_certified_drop(self):
        spec = builtin_family("grid_Z2")
        F = es.ForbiddenSet.from_strings(["uu"], spec.alphabet)
        report = es.growth_sensitivity_report(spec, F, 20)
        assert report.certificate is not None
        assert report.certificate.alpha == 0.25
        assert report.h_forbidden.value < report.h.value

    def test_free2_window_scoped(self):
        spec = builtin_family("free2_mod_cyclic")
        F = es.ForbiddenSet.from_strings(["bb"], spec.alphabet)
        report = es.growth_sensitivity_report(
            spec, F, 10, cert_inputs=es.CertificateInputs(window_radius=4)
        )
        assert report.h_forbidden.value < report.h.value
        if report.certificate is not None:
            assert report.certificate_scope == "window"
            assert any("window" in w for w in report.warnings)

from fractions import Fraction as F

import pytest

from pandora_matching import repro
from pandora_matching.oracle import optimal_welfare
from pandora_matching.repro import (
    NamedInstance,
    ReportRow,
    bundled_star,
    indistinguishable_edge,
    no_dessert_edge,
    no_dessert_star,
    report,
)


class TestNamedInstances:
    @pytest.mark.parametrize("n", [1, 4, 10])
    def test_bundled_star_table(self, n):
        for _, compute, expected in bundled_star(n).table:
            assert compute() == expected

    def test_indistinguishable_table(self):
        for _, compute, expected in indistinguishable_edge().table:
            assert compute() == expected

    @pytest.mark.parametrize("alpha", [F(1, 2), F(1, 3), F(1, 4)])
    def test_no_dessert_edge_table(self, alpha):
        for _, compute, expected in no_dessert_edge(alpha).table:
            assert compute() == expected

    @pytest.mark.parametrize("alpha,m", [(F(1, 2), 2), (F(1, 4), 1), (F(1, 4), 3)])
    def test_no_dessert_star_table(self, alpha, m):
        for _, compute, expected in no_dessert_star(alpha, m).table:
            assert compute() == expected

    def test_star_without_copies_is_just_the_outside_option(self):
        inst = no_dessert_star(F(1, 4), 0).instance
        assert optimal_welfare(inst).value == 4

    def test_alpha_range_enforced(self):
        with pytest.raises(ValueError):
            no_dessert_edge(F(3, 2))
        with pytest.raises(ValueError):
            no_dessert_edge(0)

    def test_star_graph_shape(self):
        inst = no_dessert_star(F(1, 2), 3).instance
        assert len(inst.edges) == 4
        assert all("i" in e.id for e in inst.edges)


class TestReport:
    def test_full_run_matches_everywhere(self):
        rows = report()
        assert rows and all(r.match for r in rows)

    def test_only_selects_one_instance(self):
        rows = report(only="indistinguishable-edge")
        assert {r.instance for r in rows} == {"indistinguishable-edge"}

    def test_parameters_are_threaded_through(self):
        rows = report(only="no-dessert-edge", alpha=F(1, 8))
        by_name = {r.quantity: r for r in rows}
        assert by_name["sigma1_ij"].computed == 7
        assert by_name["welfare_desc_ij"].computed == F(7, 8)

    def test_mismatch_is_visible(self):
        row = ReportRow("x", "q", F(1), F(2))
        assert not row.match

    def test_perturbed_expectation_detected(self, monkeypatch):
        named = indistinguishable_edge()
        broken = NamedInstance(named.name, named.params, named.instance, (
            ("opt_free", named.table[2][1], F(1, 3)),))
        monkeypatch.setattr(repro, "build", lambda name, **kw: broken)
        rows = report(only="indistinguishable-edge")
        assert any(not r.match for r in rows)

    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError):
            repro.build("nope")

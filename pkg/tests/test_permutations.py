import itertools

import numpy as np
import pytest

from eptriad.errors import NotAGroup
from eptriad.permutations import (
    D3_LABELS,
    PermutationElement,
    all_elements,
    compose,
    element,
    identify,
    to_matrix,
    verify_group,
)


class TestElementBasics:
    def test_rejects_non_permutation(self):
        with pytest.raises(ValueError):
            PermutationElement((1, 1, 3))

    def test_string_round_trip(self):
        for lbl in D3_LABELS:
            p = element(lbl)
            assert PermutationElement.from_string(p.as_string()) == p

    def test_canonical_strings(self):
        assert element("mu1").as_string() == "132"
        assert element("mu2").as_string() == "321"
        assert element("mu3").as_string() == "213"
        assert element("rho1").as_string() == "231"
        assert element("rho2").as_string() == "312"

    def test_orders(self):
        assert element("e").order() == 1
        for m in ("mu1", "mu2", "mu3"):
            assert element(m).order() == 2
        for r in ("rho1", "rho2"):
            assert element(r).order() == 3


class TestComposition:
    def test_mu1_after_mu3_is_rho1(self):
        assert identify(compose(element("mu1"), element("mu3"))) == "rho1"

    def test_mu3_after_mu1_is_rho2(self):
        assert identify(compose(element("mu3"), element("mu1"))) == "rho2"

    def test_identity_neutral(self):
        assert compose(element("e"), element("mu2")) == element("mu2")

    def test_mu2_decomposes(self):
        chain = compose(element("mu3"), compose(element("mu1"), element("mu3")))
        assert identify(chain) == "mu2"

    def test_inverse(self):
        for lbl in D3_LABELS:
            p = element(lbl)
            assert compose(p, p.inverse()) == element("e")


class TestMatrices:
    def test_printed_patterns(self):
        assert to_matrix(element("mu1")).tolist() == [[1, 0, 0], [0, 0, 1], [0, 1, 0]]
        assert to_matrix(element("mu3")).tolist() == [[0, 1, 0], [1, 0, 0], [0, 0, 1]]
        assert to_matrix(element("mu2")).tolist() == [[0, 0, 1], [0, 1, 0], [1, 0, 0]]
        assert to_matrix(element("rho1")).tolist() == [[0, 1, 0], [0, 0, 1], [1, 0, 0]]
        assert to_matrix(element("rho2")).tolist() == [[0, 0, 1], [1, 0, 0], [0, 1, 0]]
        assert to_matrix(element("e")).tolist() == np.eye(3).tolist()

    def test_homomorphism_all_pairs(self):
        for a, b in itertools.product(all_elements(), repeat=2):
            lhs = to_matrix(compose(a, b))
            rhs = to_matrix(a) @ to_matrix(b)
            assert np.array_equal(lhs, rhs)

    def test_determinants_match_parity(self):
        for m in ("mu1", "mu2", "mu3"):
            assert np.isclose(np.linalg.det(to_matrix(element(m))), -1.0)
        for r in ("rho1", "rho2"):
            assert np.isclose(np.linalg.det(to_matrix(element(r))), 1.0)
        assert np.isclose(np.linalg.det(to_matrix(element("e"))), 1.0)


class TestGroupVerification:
    def test_full_d3(self):
        report = verify_group(all_elements())
        assert set(report.labels) == set(D3_LABELS)
        assert report.witness == ("mu1", "mu3")
        assert report.orders["rho1"] == 3 and report.orders["mu2"] == 2

    def test_dihedral_presentation(self):
        r, s = element("rho1"), element("mu3")
        e = element("e")
        assert compose(r, compose(r, r)) == e
        assert compose(s, s) == e
        assert compose(s, compose(r, s)) == r.inverse()

    def test_rotation_subgroup(self):
        report = verify_group((element("e"), element("rho1"), element("rho2")))
        assert report.witness is None      # C3 is abelian

    def test_order_two_subgroup(self):
        report = verify_group((element("e"), element("mu1")))
        assert report.orders["mu1"] == 2

    def test_closure_failure(self):
        with pytest.raises(NotAGroup, match="closure"):
            verify_group((element("e"), element("mu1"), element("mu3")))

    def test_missing_identity(self):
        with pytest.raises(NotAGroup, match="identity"):
            verify_group((element("mu1"), element("rho1")))

    def test_cayley_table_complete(self):
        report = verify_group(all_elements())
        assert len(report.cayley) == 36
        # rows and columns are permutations of the label set (Latin square)
        for a in report.labels:
            row = [report.cayley[(a, b)] for b in report.labels]
            assert sorted(row) == sorted(report.labels)

import numpy as np
import pytest

from eptriad.errors import NoConvergence, NotAnEP
from eptriad.locate import (
    branch_cut_trace,
    ep_order,
    refine_ep,
    seed_eps_in_slice,
    trace_ea,
    verify_arc,
)
from eptriad.model import ParamPoint, discriminant_formula

G = 0.61

# regression fixtures: slice crossings of the two arcs, computed by the
# Newton refinement itself and frozen (the source text never prints them)
EP_SLICE_033 = (0.540816844, 0.396296821)
EP_SLICE_000 = (0.559949094, 0.0)
EP_SLICE_0055 = (0.559375966, 0.065185721)


class TestSeeding:
    def test_two_clusters_at_eta_033(self):
        cands = seed_eps_in_slice(0.33, G, ((-1, 1), (-1, 1)), 64)
        assert len(cands) == 2

    def test_two_clusters_at_eta_0(self):
        cands = seed_eps_in_slice(0.0, G, ((-1, 1), (-1, 1)), 64)
        assert len(cands) == 2

    def test_empty_window(self):
        cands = seed_eps_in_slice(0.9, G, ((-0.1, 0.1), (-0.1, 0.1)), 32)
        assert cands == []

    def test_resolution_floor(self):
        with pytest.raises(ValueError):
            seed_eps_in_slice(0.0, G, ((-1, 1), (-1, 1)), 16)


class TestRefinement:
    def test_eta_033_fixtures(self):
        eps = [refine_ep(c.center) for c in seed_eps_in_slice(0.33, G, ((-1, 1), (-1, 1)), 64)]
        found = sorted((e.point.zeta, e.point.xi) for e in eps)
        z, x = EP_SLICE_033
        assert np.allclose(found, [(-z, -x), (z, x)], atol=1e-6)
        for e in eps:
            assert e.order == 2
            assert e.residual < 1e-10

    def test_eta_0_fixtures(self):
        eps = [refine_ep(c.center) for c in seed_eps_in_slice(0.0, G, ((-1, 1), (-1, 1)), 64)]
        found = sorted((e.point.zeta, e.point.xi) for e in eps)
        z, x = EP_SLICE_000
        assert np.allclose(found, [(-z, -x), (z, x)], atol=1e-6)

    def test_repeated_eigenvalue_is_double_root(self):
        e = refine_ep(ParamPoint(0.33, -0.54, -0.40, G))
        from eptriad.model import char_poly

        co = char_poly(e.point)
        assert abs(co(e.repeated_eigenvalue)) < 1e-6
        assert abs(co.derivative(e.repeated_eigenvalue)) < 1e-5

    def test_origin_is_order_3(self):
        e = refine_ep(ParamPoint(0, 0, 0, 0))
        assert e.order == 3
        assert abs(e.point.zeta) < 1e-12 and abs(e.point.xi) < 1e-12

    def test_hopeless_seed_raises(self):
        bad = ParamPoint(0.9, 1.4, 1.4, G)
        assert abs(discriminant_formula(bad)) > 1e3
        with pytest.raises(NoConvergence):
            refine_ep(bad)


class TestOrderClassification:
    def test_origin(self):
        assert ep_order(ParamPoint(0, 0, 0, 0)) == 3

    def test_slice_ep_is_order_2(self):
        e = refine_ep(ParamPoint(0.33, 0.54, 0.40, G))
        assert ep_order(e.point) == 2

    def test_non_ep_rejected(self):
        with pytest.raises(NotAnEP):
            ep_order(ParamPoint(0.33, 0, 0, G))


@pytest.fixture(scope="module")
def arcs_g061():
    eps = [refine_ep(c.center) for c in seed_eps_in_slice(0.0, G, ((-1, 1), (-1, 1)), 64)]
    return [trace_ea(G, e, step=0.02) for e in eps]


class TestArcTracing:
    def test_two_disjoint_open_arcs(self, arcs_g061):
        assert len(arcs_g061) == 2
        for arc in arcs_g061:
            assert arc.terminated == "boundary"
            assert not arc.closed
            spacing = np.linalg.norm(np.diff(arc.coords(), axis=0), axis=1)
            assert spacing.max() < 1.6 * 0.02   # consecutive points within step bound
        a, b = (arc.coords() for arc in arcs_g061)
        # arcs stay on opposite sides of the zeta = 0 plane
        assert (a[:, 1] > 0).all() != (b[:, 1] > 0).all()
        gap = np.min(np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2))
        assert gap > 0.5

    def test_no_drift(self, arcs_g061):
        for arc in arcs_g061:
            assert verify_arc(arc) < 1e-10

    def test_slice_consistency(self, arcs_g061):
        """Arc crossings of the eta = 0.33 plane match the slice refinement."""
        targets = np.array([[EP_SLICE_033[0], EP_SLICE_033[1]], [-EP_SLICE_033[0], -EP_SLICE_033[1]]])
        hits = []
        for arc in arcs_g061:
            co = arc.coords()
            k = np.argmin(np.abs(co[:, 0] - 0.33))
            seed = ParamPoint(0.33, co[k, 1], co[k, 2], G)
            refined = refine_ep(seed)
            hits.append([refined.point.zeta, refined.point.xi])
        hits = np.array(sorted(hits, key=lambda h: h[0]))
        targets = np.array(sorted(targets.tolist(), key=lambda h: h[0]))
        assert np.allclose(hits, targets, atol=1e-6)

    def test_step_halving_converges(self):
        e = refine_ep(ParamPoint(0.0, 0.56, 0.0, G))
        coarse = trace_ea(G, e, step=0.04, max_points=400).coords()
        fine = trace_ea(G, e, step=0.02, max_points=800).coords()
        # every coarse point lies on the finely traced curve
        d = np.min(np.linalg.norm(fine[None, :, :] - coarse[:, None, :], axis=2), axis=1)
        assert np.max(d) < 1e-3

    def test_nexus_termination_at_g0(self):
        e = refine_ep(ParamPoint(0.1, 0.03, -0.04, 0.0))
        arc = trace_ea(0.0, e, step=0.02, max_points=600)
        assert arc.terminated == "rank_deficient"
        hit = arc.rank_deficient_at
        assert hit is not None
        assert np.linalg.norm([hit.point.eta, hit.point.zeta, hit.point.xi]) < 0.05

    def test_pairing_changes_with_sign_of_g(self):
        """eta = 0 crossings sit on the zeta axis for g > 0, the xi axis for g < 0."""
        for g in (0.05, 0.2):
            zstar = np.sqrt(64 * g**3 / (27 + 72 * g))
            e = refine_ep(ParamPoint(0.0, zstar, 0.0, g), max_iter=80)
            assert abs(e.point.xi) < 1e-8
            assert abs(e.point.zeta) > 1e-3
        for g in (-0.05, -0.2):
            xstar = np.sqrt(64 * abs(g) ** 3 / 27)
            e = refine_ep(ParamPoint(0.0, 0.0, xstar, g), max_iter=80)
            assert abs(e.point.zeta) < 1e-8
            assert abs(e.point.xi) > 1e-3

    def test_bifurcation_structure_across_g(self):
        """Two separated arcs for g != 0; four branches meeting at the nexus at g = 0."""
        # g != 0: both traces terminate at the domain boundary and never meet
        for g in (-0.2, 0.2):
            seeds = seed_eps_in_slice(0.0, g, ((-1, 1), (-1, 1)), 64)
            assert len(seeds) == 2
            arcs = [trace_ea(g, refine_ep(c.center), step=0.02) for c in seeds]
            assert all(a.terminated == "boundary" for a in arcs)
        # g = 0: branches hit the rank-deficient nexus instead
        for eta0 in (0.05, -0.05):
            sign = 1.0 if eta0 > 0 else -1.0
            z = sign * np.sqrt(64 * abs(eta0) ** 3 / 54)
            e = refine_ep(ParamPoint(eta0, z, -z, 0.0), max_iter=80)
            arc = trace_ea(0.0, e, step=0.02, max_points=600)
            assert arc.terminated == "rank_deficient"


class TestBranchCuts:
    def test_outer_pair_cut_along_zeta_axis(self):
        pts = branch_cut_trace(0.0, G, (1, 3), ((-1, 1), (-0.3, 0.3)), 61)
        assert len(pts) > 0
        inner = pts[np.abs(pts[:, 0]) < 0.5]
        assert len(inner) > 0
        assert np.max(np.abs(inner[:, 1])) < 0.05     # parallel to the zeta axis
        assert np.max(np.abs(pts[:, 0])) < 0.60       # ends at the arc crossings

    def test_cuts_attached_to_each_ep_at_eta_033(self):
        """Each slice EP has a cut terminating on it (tracked labels are
        sweep-path dependent, so the pair carrying each cut is discovered)."""
        z, x = EP_SLICE_033
        for target in (np.array([z, x]), np.array([-z, -x])):
            best = np.inf
            for pair in ((1, 2), (1, 3), (2, 3)):
                pts = branch_cut_trace(0.33, G, pair, ((-1, 1), (-1, 1)), 61)
                if len(pts):
                    best = min(best, float(np.min(np.linalg.norm(pts - target, axis=1))))
            assert best < 0.06

    def test_empty_for_quiet_window(self):
        pts = branch_cut_trace(0.9, G, (1, 2), ((0.55, 0.95), (0.55, 0.95)), 41)
        assert pts.shape[0] == 0

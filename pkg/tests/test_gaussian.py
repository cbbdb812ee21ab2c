import itertools
import math
import warnings

import numpy as np
import pytest

from omentangle import (
    Mode,
    MonogamyWarning,
    contangle,
    extract_submatrix,
    log_negativity,
    min_residual_contangle,
    nu_minus_two_mode,
    partial_transpose,
    residual_contangle,
    steady_state,
    symplectic_eigenvalues,
)
from helpers import FIG4, FIG5C, FIG8, FIG9, random_params, random_physical_cov, tmsv

PI = math.pi
OPTO = [(a, b) for a in ("h", "v") for b in ("m1", "m2")]


class TestSymplecticSpectrum:
    def test_vacuum(self):
        np.testing.assert_allclose(symplectic_eigenvalues(np.eye(8) / 2), [0.5] * 4, atol=1e-14)

    def test_thermal_williamson(self):
        rng = np.random.default_rng(1)
        for k in (1, 2, 3, 4):
            nu = np.sort(0.5 + rng.exponential(2.0, size=k))
            np.testing.assert_allclose(symplectic_eigenvalues(np.diag(np.repeat(nu, 2))), nu,
                                       rtol=1e-12)

    def test_symplectic_invariance(self):
        # S (diag nu) S^T has the same spectrum for any symplectic S
        rng = np.random.default_rng(2)
        for _ in range(20):
            v = random_physical_cov(rng, 3)
            assert np.all(symplectic_eigenvalues(v) >= 0.5 - 1e-9)

    def test_tmsv_pt_eigenvalue(self):
        for r in (0.1, 0.5, 1.0, 2.0):
            chi = partial_transpose(tmsv(r), [0])
            assert symplectic_eigenvalues(chi)[0] == pytest.approx(np.exp(-2 * r) / 2, rel=1e-12)
            assert nu_minus_two_mode(tmsv(r)) == pytest.approx(np.exp(-2 * r) / 2, rel=1e-9)


class TestClosedForm:
    def test_matches_general_on_random_states(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            chi = random_physical_cov(rng, 2)
            nu = symplectic_eigenvalues(partial_transpose(chi, [0]))[0]
            assert abs(nu_minus_two_mode(chi) - nu) < 1e-9 * max(1, nu)

    def test_matches_general_on_model_reductions(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            v = steady_state(random_params(rng))
            for a, b in itertools.combinations(Mode, 2):
                chi = extract_submatrix(v, [a, b])
                nu = symplectic_eigenvalues(partial_transpose(chi, [0]))[0]
                assert abs(nu_minus_two_mode(chi) - nu) < 1e-9 * max(1, nu)


class TestPartialTranspose:
    def test_two_mode(self):
        chi = np.arange(16.0).reshape(4, 4)
        chi = chi + chi.T
        pt = partial_transpose(chi, [0])
        signs = np.array([1, -1, 1, 1])
        np.testing.assert_array_equal(pt, chi * np.outer(signs, signs))

    def test_three_mode_last(self):
        chi = np.ones((6, 6))
        pt = partial_transpose(chi, [2])
        assert np.all(pt[5, :5] == -1) and pt[5, 5] == 1
        assert np.all(pt[:5, :5] == 1)

    def test_involution(self):
        rng = np.random.default_rng(5)
        chi = random_physical_cov(rng, 3)
        np.testing.assert_array_equal(partial_transpose(partial_transpose(chi, [1]), [1]), chi)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            partial_transpose(np.eye(4), [2])


class TestExtraction:
    def test_full_identity_order(self):
        v = np.arange(64.0).reshape(8, 8)
        np.testing.assert_array_equal(extract_submatrix(v, list(Mode)), v)

    def test_brute_force_indexing(self):
        v = np.arange(64.0).reshape(8, 8)
        for modes in itertools.permutations(range(4), 3):
            sub = extract_submatrix(v, modes)
            for i, a in enumerate(modes):
                for j, b in enumerate(modes):
                    for p in range(2):
                        for q in range(2):
                            assert sub[2 * i + p, 2 * j + q] == v[2 * a + p, 2 * b + q]

    def test_mechanics_block(self):
        v = np.diag(np.arange(8.0))
        np.testing.assert_array_equal(extract_submatrix(v, ["m1", "m2"]), np.diag([4.0, 5, 6, 7]))

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            extract_submatrix(np.eye(8), ["h", "h"])

    def test_mode_parsing(self):
        assert Mode.parse("m2") is Mode.M2
        assert Mode.parse("B1") is Mode.M1
        assert Mode.parse(1) is Mode.V
        with pytest.raises(ValueError):
            Mode.parse("x")


class TestLogNegativity:
    @pytest.mark.parametrize("r", [0.1, 0.5, 1.0])
    def test_tmsv(self, r):
        v = np.eye(8) / 2
        v[np.ix_([0, 1, 4, 5], [0, 1, 4, 5])] = tmsv(r)
        res = log_negativity(v, "h", "m1")
        assert res.value == pytest.approx(2 * r, abs=1e-9)
        assert res.entangled

    def test_pt_side_symmetry(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            v = steady_state(random_params(rng))
            for a, b in itertools.combinations(Mode, 2):
                chi = extract_submatrix(v, [a, b])
                nu_a = symplectic_eigenvalues(partial_transpose(chi, [0]))[0]
                nu_b = symplectic_eigenvalues(partial_transpose(chi, [1]))[0]
                assert abs(nu_a - nu_b) < 1e-12 * max(1, nu_a)
                assert log_negativity(v, a, b).value == pytest.approx(
                    log_negativity(v, b, a).value, abs=1e-12)

    def test_separable_exactly_zero(self):
        rng = np.random.default_rng(7)
        a, b = random_physical_cov(rng, 1), random_physical_cov(rng, 1)
        v = np.eye(8) / 2
        v[0:2, 0:2], v[2:4, 2:4] = a, b
        assert log_negativity(v, "h", "v").value == 0.0

    def test_same_mode_rejected(self):
        with pytest.raises(ValueError):
            log_negativity(np.eye(8) / 2, "h", "h")

    def test_zero_coupling(self):
        v = steady_state(FIG5C.replace(G_m=0.0))
        for a, b in itertools.combinations(Mode, 2):
            res = log_negativity(v, a, b)
            assert res.value == 0.0
            assert res.nu_min >= 0.5 - 1e-9

    def test_polarization_zeros(self):
        for base in (FIG4, FIG5C):
            v = steady_state(base.replace(phi=0.0))
            for m in ("m1", "m2"):
                assert log_negativity(v, "h", m).value == 0.0
            v = steady_state(base.replace(phi=PI / 2))
            for m in ("m1", "m2"):
                assert log_negativity(v, "v", m).value == 0.0

    def test_twin_symmetry(self):
        v = steady_state(FIG5C)
        for m in ("m1", "m2"):
            assert abs(log_negativity(v, "h", m).value - log_negativity(v, "v", m).value) < 1e-9

    def test_mechanical_swap(self):
        for theta in np.linspace(0, 2 * PI, 13):
            v1 = steady_state(FIG5C.replace(theta=theta))
            v2 = steady_state(FIG5C.replace(theta=-theta))
            for a in ("h", "v"):
                e1 = log_negativity(v1, a, "m1").value
                e2 = log_negativity(v2, a, "m2").value
                assert abs(e1 - e2) < 1e-9

    def test_fig5c_point_entangled(self):
        v = steady_state(FIG5C)
        assert all(log_negativity(v, a, b).value > 0 for a, b in OPTO)


class TestContangle:
    def test_is_squared_negativity(self):
        v = steady_state(FIG5C)
        for a, b in OPTO:
            assert contangle(v, a, b) == pytest.approx(log_negativity(v, a, b).value ** 2, rel=1e-14)

    def test_permutation_within_group(self):
        v = steady_state(FIG8)
        assert contangle(v, "h", ("m1", "m2")) == pytest.approx(
            contangle(v, "h", ("m2", "m1")), abs=1e-14)

    def test_overlap_rejected(self):
        with pytest.raises(ValueError):
            contangle(np.eye(8) / 2, "h", ("h", "m1"))

    def test_bad_sizes_rejected(self):
        with pytest.raises(ValueError):
            contangle(np.eye(8) / 2, ("h", "v"), "m1")


class TestResidualContangle:
    def test_zero_coupling(self):
        v = steady_state(FIG8.replace(G_m=0.0))
        assert residual_contangle(v, "h", "m1", "m2") == 0.0
        assert min_residual_contangle(v, ("h", "m1", "m2")).value == 0.0

    def test_no_hopping_no_tripartite(self):
        v = steady_state(FIG8.replace(J_m=0.0))
        for a in ("h", "v"):
            assert abs(min_residual_contangle(v, (a, "m1", "m2")).value) < 1e-9

    def test_dark_mode_unbroken_theta(self):
        for theta in (0.0, PI):
            v = steady_state(FIG9.replace(theta=theta))
            assert abs(min_residual_contangle(v, ("h", "m1", "m2")).value) < 1e-9

    def test_fig8_monogamy(self):
        v = steady_state(FIG8)
        with warnings.catch_warnings():
            warnings.simplefilter("error", MonogamyWarning)
            r = residual_contangle(v, "h", "m1", "m2")
            res = min_residual_contangle(v, ("h", "m1", "m2"))
        whole = contangle(v, "h", ("m1", "m2"))
        assert r > 0
        assert whole >= contangle(v, "h", "m1") + contangle(v, "h", "m2") - 1e-9
        assert res.value > 0 and res.meta["monogamy_ok"]
        assert set(res.meta["residuals"]) == {"h", "m1", "m2"}
        assert res.value == pytest.approx(min(res.meta["residuals"].values()))

    def test_min_is_permutation_invariant(self):
        v = steady_state(FIG8)
        ref = min_residual_contangle(v, ("h", "m1", "m2")).value
        for perm in itertools.permutations(("h", "m1", "m2")):
            assert min_residual_contangle(v, perm).value == pytest.approx(ref, abs=1e-14)

    def test_twin_symmetry(self):
        v = steady_state(FIG9)
        rh = min_residual_contangle(v, ("h", "m1", "m2")).value
        rv = min_residual_contangle(v, ("v", "m1", "m2")).value
        assert abs(rh - rv) < 1e-9

    def test_monogamy_violation_surfaced(self):
        # an unphysical "covariance" (u maximally correlated with both
        # mechanics at once) breaks monogamy and must be flagged, not clamped
        v = np.eye(8) / 2
        v[np.ix_([0, 1, 4, 5], [0, 1, 4, 5])] = tmsv(0.6)
        v[np.ix_([0, 1, 6, 7], [0, 1, 6, 7])] = tmsv(0.6)
        v[0:2, 0:2] = np.eye(2) * math.cosh(1.2) / 2
        r_whole = contangle(v, "h", ("m1", "m2"))
        r_parts = contangle(v, "h", "m1") + contangle(v, "h", "m2")
        assert r_whole - r_parts < -1e-9
        with pytest.warns(MonogamyWarning):
            residual_contangle(v, "h", "m1", "m2")
        with pytest.warns(MonogamyWarning):
            res = min_residual_contangle(v, ("h", "m1", "m2"))
        assert res.value < 0 and not res.meta["monogamy_ok"]

    def test_distinct_modes_required(self):
        with pytest.raises(ValueError):
            residual_contangle(np.eye(8) / 2, "h", "h", "m1")
        with pytest.raises(ValueError):
            min_residual_contangle(np.eye(8) / 2, ("h", "m1", "m1"))

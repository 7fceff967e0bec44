import numpy as np
import pytest

from lvmkit.config_geometry import Configuration
from lvmkit.holonomy import holonomy_pair
from lvmkit.resonance import ResonanceClass
from lvmkit.resonant_group import (GroupElement, IllConditioned, PointV,
                                   triangularize)
from lvmkit.family_gluing import (
    FamilyPoint,
    NotInImage,
    check_condition,
    family_action,
    family_point_from_dict,
    glue_phi_pq,
    glue_psi_p,
    invert_phi_pq,
    invert_psi_p,
    p_eigenvalues,
)

E1 = Configuration(2, (
    (1, 0),
    (1j, 0),
    (0, 1),
    (0, 1j),
    (-1 - 1j, -1 - 1j),
    (-1.1 - 1.1j, -1.1 - 1.1j),
))


def _c(rng, scale=1.0):
    return complex(rng.normal(), rng.normal()) * scale


def rand_T(rng):
    """Random T-shaped pair with commuting matrices and |a2| > |a3|."""
    a1 = 1.5 + _c(rng, 0.2)
    a2 = 2.0 + _c(rng, 0.2)
    a3 = 0.5 + _c(rng, 0.1)
    b1 = 0.8 + _c(rng, 0.2)
    b2 = 1.3 + _c(rng, 0.2)
    b3 = 0.4 + _c(rng, 0.1)
    eps = _c(rng, 0.3)
    delta = eps * (b3 - b2) / (a3 - a2)
    amat = np.diag([a1, a2, a3]).astype(complex)
    amat[2, 1] = eps
    bmat = np.diag([b1, b2, b3]).astype(complex)
    bmat[2, 1] = delta
    return FamilyPoint("T", amat, bmat, lam=_c(rng, 0.5))


def rand_Tpq(rng, p, q):
    a1 = 1.5 + _c(rng, 0.2)
    a2 = 2.0 + _c(rng, 0.2)
    a3 = 0.5 + _c(rng, 0.1)
    b1 = 0.8 + _c(rng, 0.2)
    b2 = 1.3 + _c(rng, 0.2)
    b3 = 0.4 + _c(rng, 0.1)
    eps = _c(rng, 0.3)
    delta = eps * (b3 - b1 ** p * b2 ** q) / (a3 - a1 ** p * a2 ** q)
    amat = np.diag([a1, a2, a3]).astype(complex)
    amat[2, 1] = eps
    bmat = np.diag([b1, b2, b3]).astype(complex)
    bmat[2, 1] = delta
    return FamilyPoint("T_pq", amat, bmat, lam=_c(rng, 0.5), p=p, q=q)


def rand_point(rng):
    return PointV((2 + _c(rng), _c(rng), 1 + _c(rng)))


def pair_diff(u, v):
    """Max entrywise distance between two (FamilyPoint, PointV) outputs."""
    out = max(np.max(np.abs(u[0].amat - v[0].amat)),
              np.max(np.abs(u[0].bmat - v[0].bmat)),
              np.max(np.abs(u[1].array() - v[1].array())))
    if u[0].lam is not None and v[0].lam is not None:
        out = max(out, abs(u[0].lam - v[0].lam))
    return out


class TestPEigenvalues:
    def test_p_zero_is_plain_eigenvalues(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            mat = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            got = sorted(p_eigenvalues(1.7 + 0.3j, mat, 0), key=abs)
            want = sorted(np.linalg.eigvals(mat), key=abs)
            assert max(abs(g - w) for g, w in zip(got, want)) < 1e-12

    def test_swap_matrix(self):
        got = p_eigenvalues(2, [[0, 1], [1, 0]], 1)
        want = (1 / np.sqrt(2), -1 / np.sqrt(2))
        assert np.allclose(sorted(got, key=lambda z: z.real),
                           sorted(want), atol=1e-12)

    def test_diagonal_factorization(self):
        rng = np.random.default_rng(1)
        for p in (-2, 0, 1, 3):
            a, d = _c(rng) + 2, _c(rng) + 1
            alpha = _c(rng) + 1.5
            got = set()
            for v in p_eigenvalues(alpha, np.diag([a, d]), p):
                got.add(v)
            for want in (a, d * alpha ** (-p)):
                assert min(abs(v - want) for v in got) < 1e-10

    def test_ordering_deterministic(self):
        vals = p_eigenvalues(2, [[0, 1], [1, 0]], 1)
        assert vals[0].real > vals[1].real
        assert vals == p_eigenvalues(2, [[0, 1], [1, 0]], 1)

    def test_zero_alpha_rejected(self):
        with pytest.raises(ValueError):
            p_eigenvalues(0, np.eye(2), 1)

    def test_invariant_under_triangularizing_conjugation(self):
        cls = ResonanceClass("Double", p=1)
        rng = np.random.default_rng(2)
        for _ in range(10):
            mat = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            a1 = 2 + _c(rng, 0.5)
            f = GroupElement(cls, (a1, mat))
            _, t = triangularize(f)
            before = sorted(p_eigenvalues(a1, mat, 1),
                            key=lambda z: (z.real, z.imag))
            after = sorted(p_eigenvalues(a1, t.data[1], 1),
                           key=lambda z: (z.real, z.imag))
            assert max(abs(x - y) for x, y in zip(before, after)) < 1e-9


class TestFamilyPoint:
    def test_shape_enforced(self):
        mat = np.diag([1.0, 2.0, 3.0]).astype(complex)
        bad = np.array(mat)
        bad[0, 1] = 0.5
        with pytest.raises(ValueError):
            FamilyPoint("T", bad, mat, lam=0.0)

    def test_lambda_rules(self):
        mat = np.diag([1.0, 2.0, 3.0]).astype(complex)
        with pytest.raises(ValueError):
            FamilyPoint("T", mat, mat)  # missing lambda
        with pytest.raises(ValueError):
            FamilyPoint("S_p", mat, mat, lam=0.0, p=1)
        FamilyPoint("S_p", mat, mat, p=1)

    def test_index_rules(self):
        mat = np.diag([1.0, 2.0, 3.0]).astype(complex)
        with pytest.raises(ValueError):
            FamilyPoint("T_pq", mat, mat, lam=0.0, p=1, q=1)  # q >= 2
        with pytest.raises(ValueError):
            FamilyPoint("S_p", mat, mat)  # missing p
        with pytest.raises(ValueError):
            FamilyPoint("T", mat, mat, lam=0.0, p=1)

    def test_singular_rejected(self):
        with pytest.raises(ValueError):
            FamilyPoint("T", np.diag([1.0, 2.0, 0.0]),
                        np.diag([1.0, 2.0, 3.0]), lam=0.0)

    def test_dict_round_trip(self):
        rng = np.random.default_rng(3)
        for point in (rand_T(rng), rand_Tpq(rng, 1, 2)):
            back = family_point_from_dict(point.as_dict())
            assert back.space == point.space
            assert np.max(np.abs(back.amat - point.amat)) < 1e-15
            assert np.max(np.abs(back.bmat - point.bmat)) < 1e-15
            assert abs(back.lam - point.lam) < 1e-15
            assert back.p == point.p and back.q == point.q


class TestCheckCondition:
    def test_diagonal_reference_pair_satisfies_C(self):
        h = holonomy_pair(E1)
        point = FamilyPoint("T", np.diag(h.alpha), np.diag(h.beta), lam=0.0)
        report = check_condition(point, config=E1, bound=16)
        assert report.condition == "C"
        assert report.satisfied

    def test_modulus_violation_fails_first_clause(self):
        rng = np.random.default_rng(4)
        point = rand_Tpq(rng, 1, 2)
        amat = np.array(point.amat)
        amat[1, 1], amat[2, 2] = amat[2, 2], amat[1, 1]  # |a2| <= |a3| now
        amat[2, 1] = 0
        bmat = np.array(point.bmat)
        bmat[2, 1] = 0
        bad = FamilyPoint("T_pq", amat, bmat, lam=point.lam, p=1, q=2)
        report = check_condition(bad)
        assert report.condition == "K_pq"
        assert not report.clause("modulus-ordering")

    def test_sharp_resonant_clause(self):
        a1, a2 = 1.2, 0.8 + 0.1j
        b1, b2 = 0.9, 1.4
        p, q = 1, 2
        amat = np.diag([a1, a2, a1 ** p * a2 ** q]).astype(complex)
        bmat = np.diag([b1, b2, b1 ** p * b2 ** q]).astype(complex)
        point = FamilyPoint("T_pq", amat, bmat, lam=0.0, p=p, q=q)
        report = check_condition(point, sharp=True)
        assert report.condition == "K_pq^S"
        assert report.clause("resonant-alpha") and report.clause("resonant-beta")

    def test_sharp_variant_of_C_rejected(self):
        rng = np.random.default_rng(5)
        with pytest.raises(ValueError):
            check_condition(rand_T(rng), sharp=True)

    def test_psi_image_satisfies_balance_equations(self):
        rng = np.random.default_rng(6)
        for _ in range(5):
            point = rand_T(rng)
            out, _ = glue_psi_p(point, rand_point(rng), 1)
            report = check_condition(out)
            assert report.condition == "C_p"
            for name in ("off-diagonal-balance", "lower-shear", "upper-shear"):
                assert report.clause(name)
            assert report.clause("eigen-admissibility")

    def test_bound_recorded(self):
        rng = np.random.default_rng(7)
        assert check_condition(rand_T(rng), bound=9).bound == 9


class TestFamilyAction:
    def test_linear_chart_matches_matrix_powers(self):
        rng = np.random.default_rng(8)
        point = rand_T(rng)
        x = rand_point(rng)
        for r, s in ((1, 0), (0, 1), (2, -1), (-1, 3)):
            m = (np.linalg.matrix_power(point.amat, r) if r >= 0
                 else np.linalg.matrix_power(np.linalg.inv(point.amat), -r))
            n = (np.linalg.matrix_power(point.bmat, s) if s >= 0
                 else np.linalg.matrix_power(np.linalg.inv(point.bmat), -s))
            want = m @ n @ x.array()
            got = family_action(point, (r, s), x).array()
            assert np.max(np.abs(got - want)) < 1e-10

    def test_twisted_chart_generator_display(self):
        rng = np.random.default_rng(9)
        p, q = 1, 2
        point = rand_Tpq(rng, p, q)
        a1, a2, a3, b1, b2, b3 = point.diagonals()
        eps = point.amat[2, 1]
        x = rand_point(rng)
        xi1, xi2, xi3 = x.array()
        got = family_action(point, (1, 0), x).array()
        want = (a1 * xi1, a2 * xi2, a3 * xi3 + eps * xi1 ** p * xi2 ** q)
        assert np.max(np.abs(got - np.array(want))) < 1e-12

    def test_block_chart_generator_display(self):
        rng = np.random.default_rng(10)
        out, _ = glue_psi_p(rand_T(rng), rand_point(rng), 1)
        a1 = out.amat[0, 0]
        a2, e2 = out.amat[1, 1], out.amat[1, 2]
        e1, a3 = out.amat[2, 1], out.amat[2, 2]
        x = rand_point(rng)
        xi1, xi2, xi3 = x.array()
        got = family_action(out, (1, 0), x).array()
        want = (a1 * xi1,
                a2 * xi2 + e2 * xi1 ** (-1) * xi3,
                a3 * xi3 + e1 * xi1 * xi2)
        assert np.max(np.abs(got - np.array(want))) < 1e-12

    def test_word_homomorphism(self):
        rng = np.random.default_rng(11)
        point = rand_Tpq(rng, 1, 2)
        x = rand_point(rng)
        one = family_action(point, (1, 1), x)
        two = family_action(point, (0, 1), family_action(point, (1, 0), x))
        assert np.max(np.abs(one.array() - two.array())) < 1e-12


class TestGluePsiP:
    def test_trivial_input_is_fixed(self):
        amat = np.diag([1.5, 2.0, 0.5]).astype(complex)
        bmat = np.diag([0.8, 1.3, 0.4]).astype(complex)
        point = FamilyPoint("T", amat, bmat, lam=0.0)
        x = PointV((2, 1 + 1j, -0.5))
        out, y = glue_psi_p(point, x, 1)
        assert np.max(np.abs(out.amat - amat)) == 0
        assert np.max(np.abs(out.bmat - bmat)) == 0
        assert np.max(np.abs(y.array() - x.array())) == 0

    def test_lambda_zero_keeps_block_shape(self):
        rng = np.random.default_rng(12)
        base = rand_T(rng)
        point = FamilyPoint("T", base.amat, base.bmat, lam=0.0)
        out, y = glue_psi_p(point, rand_point(rng), 1)
        # matrices: only the second shear entry is rebalanced
        assert np.max(np.abs(out.amat - point.amat)) < 1e-14
        assert out.amat[1, 2] == 0 and out.bmat[1, 2] == 0
        diff = np.abs(out.bmat - point.bmat)
        diff[2, 1] = 0
        assert np.max(diff) < 1e-14

    def test_two_path_equivariance(self):
        rng = np.random.default_rng(13)
        worst = 0.0
        for _ in range(50):
            point = rand_T(rng)
            x = rand_point(rng)
            out = glue_psi_p(point, x, 1)
            for word in ((1, 0), (0, 1)):
                lhs = glue_psi_p(point, family_action(point, word, x), 1)
                rhs = (out[0], family_action(out[0], word, out[1]))
                scale = 1 + np.max(np.abs(out[1].array()))
                worst = max(worst, pair_diff(lhs, rhs) / scale)
        assert worst <= 1e-10

    def test_degenerate_eigenvalues_refused(self):
        amat = np.diag([1.5, 2.0, 2.0 + 1e-14]).astype(complex)
        bmat = np.diag([0.8, 1.3, 0.4]).astype(complex)
        point = FamilyPoint("T", amat, bmat, lam=0.1)
        with pytest.raises(IllConditioned):
            glue_psi_p(point, PointV((1, 1, 0)), 1)

    def test_sampled_injectivity(self):
        rng = np.random.default_rng(14)
        x = PointV((2, 1, 1))
        points = [rand_T(rng) for _ in range(20)]
        images = [glue_psi_p(pt, x, 1) for pt in points]
        for i in range(len(points)):
            for j in range(i + 1, len(points)):
                sep_in = pair_diff((points[i], x), (points[j], x))
                if sep_in >= 1e-4:
                    assert pair_diff(images[i], images[j]) >= 1e-8

    def test_wrong_space_rejected(self):
        rng = np.random.default_rng(15)
        with pytest.raises(ValueError):
            glue_psi_p(rand_Tpq(rng, 1, 2), PointV((1, 1, 0)), 1)


class TestInvertPsiP:
    def test_round_trip(self):
        rng = np.random.default_rng(16)
        worst = 0.0
        for p in (-1, 0, 1, 2):
            for _ in range(10):
                point = rand_T(rng)
                x = rand_point(rng)
                out = glue_psi_p(point, x, p)
                back = invert_psi_p(out[0], out[1], p)
                worst = max(worst, pair_diff(back, (point, x)))
        assert worst <= 1e-10

    def test_forward_after_inverse(self):
        rng = np.random.default_rng(17)
        point = rand_T(rng)
        x = rand_point(rng)
        out = glue_psi_p(point, x, 1)
        back = invert_psi_p(out[0], out[1], 1)
        again = glue_psi_p(back[0], back[1], 1)
        assert pair_diff(again, out) <= 1e-10

    def test_lambda_zero_recovered(self):
        rng = np.random.default_rng(18)
        base = rand_T(rng)
        point = FamilyPoint("T", base.amat, base.bmat, lam=0.0)
        out = glue_psi_p(point, rand_point(rng), 1)
        back, _ = invert_psi_p(out[0], out[1], 1)
        assert abs(back.lam) <= 1e-12

    def test_modulus_ordering_violation_not_in_image(self):
        # both role assignments of the twisted eigenvalues fail the
        # ordering |a2'| > |a3'| when a1^p inflates the smaller one
        amat = np.diag([2.0, 1.0, 1.5]).astype(complex)
        bmat = np.diag([1.5, 0.7, 0.9]).astype(complex)
        point = FamilyPoint("S_p", amat, bmat, p=1)
        with pytest.raises(NotInImage):
            invert_psi_p(point, PointV((1, 1, 0)), 1)

    def test_diagonal_mismatch_not_in_image(self):
        # vanishing lower shear but the diagonal entry is not the
        # preferred twisted eigenvalue
        amat = np.diag([2.0, 0.5, 3.0]).astype(complex)
        bmat = np.diag([1.5, 0.4, 2.0]).astype(complex)
        point = FamilyPoint("S_p", amat, bmat, p=1)
        with pytest.raises(NotInImage):
            invert_psi_p(point, PointV((1, 1, 0)), 1)

    def test_mismatched_index_rejected(self):
        rng = np.random.default_rng(19)
        out, y = glue_psi_p(rand_T(rng), rand_point(rng), 1)
        with pytest.raises(ValueError):
            invert_psi_p(out, y, 2)


class TestGluePhiPq:
    def test_vanishing_shear_is_identity(self):
        amat = np.diag([1.5, 2.0, 0.5]).astype(complex)
        bmat = np.diag([0.8, 1.3, 0.4]).astype(complex)
        point = FamilyPoint("T_pq", amat, bmat, lam=0.3 + 0.1j, p=1, q=2)
        x = PointV((2, 1 + 1j, -0.5))
        out, y = glue_phi_pq(point, x, 1, 2)
        assert out.space == "T"
        assert out.bmat[2, 1] == 0
        assert np.max(np.abs(out.amat - amat)) == 0
        assert np.max(np.abs(y.array() - x.array())) == 0
        assert out.lam == point.lam

    def test_lambda_passes_through(self):
        rng = np.random.default_rng(20)
        point = rand_Tpq(rng, 1, 2)
        out, _ = glue_phi_pq(point, rand_point(rng), 1, 2)
        assert out.lam == point.lam

    def test_two_path_equivariance(self):
        rng = np.random.default_rng(21)
        worst = 0.0
        for _ in range(50):
            point = rand_Tpq(rng, 1, 2)
            x = rand_point(rng)
            out = glue_phi_pq(point, x, 1, 2)
            for word in ((1, 0), (0, 1)):
                lhs = glue_phi_pq(point, family_action(point, word, x), 1, 2)
                rhs = (out[0], family_action(out[0], word, out[1]))
                scale = 1 + np.max(np.abs(out[1].array()))
                worst = max(worst, pair_diff(lhs, rhs) / scale)
        assert worst <= 1e-10

    def test_round_trip(self):
        rng = np.random.default_rng(22)
        worst = 0.0
        for _ in range(20):
            point = rand_Tpq(rng, 1, 2)
            x = rand_point(rng)
            out = glue_phi_pq(point, x, 1, 2)
            back = invert_phi_pq(out[0], out[1], 1, 2)
            worst = max(worst, pair_diff(back, (point, x)))
        assert worst <= 1e-10

    def test_resonant_eigenvalue_refused(self):
        a1, a2 = 1.2, 0.8
        amat = np.diag([a1, a2, a1 * a2 ** 2]).astype(complex)
        amat[2, 1] = 0.3
        bmat = np.diag([0.9, 1.4, 1.1]).astype(complex)
        point = FamilyPoint("T_pq", amat, bmat, lam=0.0, p=1, q=2)
        with pytest.raises(IllConditioned):
            glue_phi_pq(point, PointV((1, 1, 0)), 1, 2)

    def test_mismatched_indices_rejected(self):
        rng = np.random.default_rng(23)
        point = rand_Tpq(rng, 1, 2)
        with pytest.raises(ValueError):
            glue_phi_pq(point, PointV((1, 1, 0)), 1, 3)

import numpy as np
import pytest

from conftest import herm, rand_complex, rand_hermitian, rand_hpd
from securebc import (NonPositiveDefinite, SingularMatrix, logdet_hpd,
                      project_psd, psd_inv_sqrt, psd_sqrt, random_psd,
                      svd_square_diag)

rng = np.random.default_rng(42)


class TestLogdet:
    def test_identity(self):
        assert logdet_hpd(np.eye(3)) == pytest.approx(0.0, abs=1e-14)

    def test_diagonal(self):
        assert logdet_hpd(np.diag([4.0, 9.0])) == pytest.approx(np.log(36.0), abs=1e-12)

    def test_against_lu_determinant(self):
        for _ in range(30):
            m = rand_hpd(rng, 4, scale=4.0)
            sign, ref = np.linalg.slogdet(m)
            assert sign > 0
            assert logdet_hpd(m) == pytest.approx(ref, rel=1e-10)

    def test_rejects_indefinite(self):
        with pytest.raises(NonPositiveDefinite):
            logdet_hpd(np.diag([1.0, -1.0]))

    def test_rejects_near_singular(self):
        with pytest.raises(NonPositiveDefinite):
            logdet_hpd(np.diag([1.0, 1e-16]))

    def test_additive_on_commuting_pairs(self):
        for _ in range(20):
            n = int(rng.integers(2, 5))
            q = np.linalg.qr(rand_complex(rng, n, n))[0]
            d1 = rng.random(n) + 0.3
            d2 = rng.random(n) + 0.3
            a = (q * d1) @ herm(q)
            b = (q * d2) @ herm(q)
            assert logdet_hpd(a) + logdet_hpd(b) == pytest.approx(
                logdet_hpd(a @ b), abs=1e-9)


class TestPsdSqrt:
    def test_identity(self):
        assert np.allclose(psd_sqrt(np.eye(4)), np.eye(4), atol=1e-14)

    def test_diagonal(self):
        assert np.allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]),
                           atol=1e-13)

    def test_squares_back(self):
        for _ in range(30):
            n = int(rng.integers(1, 6))
            m = random_psd(n, rng)
            r = psd_sqrt(m)
            err = np.linalg.norm(r @ r - m) / max(np.linalg.norm(m), 1e-300)
            assert err < 1e-10
            assert np.linalg.eigvalsh(r)[0] >= -1e-12


class TestPsdInvSqrt:
    def test_identity(self):
        assert np.allclose(psd_inv_sqrt(np.eye(3)), np.eye(3), atol=1e-13)

    def test_diagonal(self):
        out = psd_inv_sqrt(np.diag([4.0, 16.0]))
        assert np.allclose(out, np.diag([0.5, 0.25]), atol=1e-13)

    def test_reconstructs_identity(self):
        for _ in range(30):
            n = int(rng.integers(1, 6))
            m = rand_hpd(rng, n, scale=float(n))
            r = psd_inv_sqrt(m)
            assert np.linalg.norm(r @ m @ r - np.eye(n)) < 1e-9

    def test_singular_raises(self):
        with pytest.raises(SingularMatrix):
            psd_inv_sqrt(np.diag([1.0, 0.0]))

    def test_ridge_rescues_singular(self):
        out = psd_inv_sqrt(np.diag([1.0, 0.0]), ridge=1.0)
        assert np.allclose(out, np.diag([1 / np.sqrt(2.0), 1.0]), atol=1e-12)

    def test_negative_ridge_rejected(self):
        with pytest.raises(ValueError):
            psd_inv_sqrt(np.eye(2), ridge=-0.1)


class TestProjectPsd:
    def test_clamps_negative_eigenvalue(self):
        assert np.allclose(project_psd(np.diag([1.0, -1.0])), np.diag([1.0, 0.0]),
                           atol=1e-14)

    def test_psd_is_fixed_point(self):
        for _ in range(20):
            m = random_psd(int(rng.integers(1, 5)), rng)
            assert np.max(np.abs(project_psd(m) - m)) < 1e-12

    def test_matches_independent_eigensolver(self):
        # oracle: general (non-Hermitian-path) eigensolver, clamp, rebuild
        for _ in range(40):
            n = int(rng.integers(1, 6))
            m = rand_hermitian(rng, n, scale=2.0)
            w, v = np.linalg.eig(m)
            ref = (v * np.clip(w.real, 0.0, None)) @ np.linalg.inv(v)
            assert np.max(np.abs(project_psd(m) - ref)) < 1e-10

    def test_idempotent(self):
        for _ in range(20):
            m = rand_hermitian(rng, int(rng.integers(1, 6)), scale=3.0)
            once = project_psd(m)
            twice = project_psd(once)
            assert np.max(np.abs(twice - once)) < 1e-12


class TestSvdSquareDiag:
    def test_identity(self):
        triple = svd_square_diag(np.eye(3))
        assert np.allclose(triple.singular, np.ones(3), atol=1e-14)
        assert np.allclose(triple.reconstruct(), np.eye(3), atol=1e-13)

    def test_rank_deficient_diagonal(self):
        triple = svd_square_diag(np.diag([3.0, 0.0]))
        assert np.allclose(triple.singular, [3.0, 0.0], atol=1e-14)

    def test_rectangular_reconstruction(self):
        for _ in range(30):
            r, c = int(rng.integers(1, 5)), int(rng.integers(1, 5))
            m = rand_complex(rng, r, c)
            triple = svd_square_diag(m)
            k = min(r, c)
            assert triple.singular.shape == (k,)
            assert triple.left.shape == (r, k)
            assert triple.right.shape == (c, k)
            rel = np.linalg.norm(triple.reconstruct() - m) / np.linalg.norm(m)
            assert rel < 1e-10

    def test_orthonormal_columns_and_ordering(self):
        m = rand_complex(rng, 4, 3)
        triple = svd_square_diag(m)
        assert np.allclose(herm(triple.left) @ triple.left, np.eye(3), atol=1e-10)
        assert np.allclose(herm(triple.right) @ triple.right, np.eye(3), atol=1e-10)
        assert np.all(np.diff(triple.singular) <= 1e-14)

    def test_singular_values_unitarily_invariant(self):
        for _ in range(20):
            m = rand_complex(rng, 3, 4)
            u = np.linalg.qr(rand_complex(rng, 3, 3))[0]
            v = np.linalg.qr(rand_complex(rng, 4, 4))[0]
            s0 = svd_square_diag(m).singular
            s1 = svd_square_diag(u @ m @ v).singular
            assert np.max(np.abs(s0 - s1)) < 1e-10


class TestRandomPsd:
    def test_trace_and_psd(self):
        for _ in range(10):
            m = random_psd(3, rng, trace=2.5)
            assert np.trace(m).real == pytest.approx(2.5, rel=1e-12)
            assert np.linalg.eigvalsh(m)[0] >= -1e-12

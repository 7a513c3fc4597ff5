import numpy as np
import pytest

from blflow import (Exponents, VectorSystem, build_C, certificate_defect,
                    make_cert, projection_check, solve_certificate,
                    solve_s_system)
from blflow.errors import CertificateRejection


class TestSSystem:
    def test_young_golden_weights(self, young3):
        sysm, e, _ = young3
        res = solve_s_system(sysm, e)
        assert res.converged
        assert res.residual <= 1e-10
        assert np.allclose(res.s_sq, [1 / 3, 1 / 3, 1 / 3], atol=1e-10)

    def test_identity_system(self):
        sysm = VectorSystem(np.eye(2))
        e = Exponents([1.0, 1.0])
        res = solve_s_system(sysm, e)
        assert res.converged
        assert np.allclose(res.s_sq, [0.5, 0.5], atol=1e-10)

    def test_scalar_system(self, holder):
        sysm, e, _, _ = holder
        res = solve_s_system(sysm, e)
        assert res.converged
        # k=1: s_j^2 proportional to 1/p_j
        assert np.allclose(res.s_sq, [0.5, 0.5], atol=1e-10)

    def test_warm_start_converges_fast(self, young3):
        sysm, e, _ = young3
        res = solve_s_system(sysm, e, s0=[1 / 3, 1 / 3, 1 / 3])
        assert res.converged and res.iterations == 1


class TestBuildC:
    def test_identity_gives_two_identity(self):
        # A = I, p = (1, 1): s^2 = (1/2, 1/2), M = I/2, C = 2I
        sysm = VectorSystem(np.eye(2))
        e = Exponents([1.0, 1.0])
        res = solve_s_system(sysm, e)
        cert = build_C(sysm, e, res.s_sq)
        assert np.allclose(cert.C, 2.0 * np.eye(2), atol=1e-10)
        assert np.allclose(cert.sigma, [2.0, 2.0], atol=1e-10)
        assert cert.residual <= 1e-10

    def test_young_defect_zero(self, young3, young3_cert):
        sysm, e, _ = young3
        assert certificate_defect(sysm, e, young3_cert) <= 1e-10
        assert np.allclose(young3_cert.sigma, [2.0, 2.0, 2.0], atol=1e-8)

    def test_perturbed_C_has_large_defect(self, young3, young3_cert):
        sysm, e, _ = young3
        C_bad = young3_cert.C + np.array([[0.05, 0.0], [0.0, -0.03]])
        cert = make_cert(sysm, C_bad, e=e)
        assert certificate_defect(sysm, e, cert) > 1e-3

    def test_rejects_nonpositive_weights(self, young3):
        sysm, e, _ = young3
        with pytest.raises(CertificateRejection):
            build_C(sysm, e, [0.5, -0.1, 0.6])

    def test_gauge_covariance(self, young3, young3_cert):
        # scaling s^2 by 1/lam scales M by 1/lam, hence C by lam; the
        # defining residual is scale-free
        sysm, e, _ = young3
        lam = 3.0
        cert = build_C(sysm, e, young3_cert.s_sq / lam)
        assert np.allclose(cert.C, lam * young3_cert.C, rtol=1e-12)
        assert cert.residual <= 1e-9


class TestProjection:
    def test_holder_projection(self, holder):
        # k=1, s^2 = (1/2, 1/2), C = (1): P = [[1/2, 1/2], [1/2, 1/2]]
        sysm, e, _, _ = holder
        res = solve_s_system(sysm, e)
        cert = build_C(sysm, e, res.s_sq)
        S = np.sqrt(cert.s_sq)
        P = (sysm.A * S).T @ cert.C @ (sysm.A * S)
        assert np.allclose(P, np.full((2, 2), 0.5), atol=1e-10)
        rep = projection_check(sysm, cert)
        assert rep.ok and rep.rank == 1 and rep.diag_bound_ok
        assert rep.trace == pytest.approx(1.0, abs=1e-10)

    def test_young_projection(self, young3, young3_cert):
        sysm, _, _ = young3
        rep = projection_check(sysm, young3_cert)
        assert rep.ok
        assert rep.rank == 2
        assert rep.trace == pytest.approx(2.0, abs=1e-9)
        assert rep.idempotency_defect <= 1e-10
        assert sorted(np.round(rep.eigenvalues, 8)) == [0.0, 1.0, 1.0]

    def test_trace_equals_k_random(self):
        rng = np.random.default_rng(19)
        for _ in range(20):
            k = int(rng.integers(1, 3))
            n = k + int(rng.integers(1, 3))
            while True:
                A = rng.normal(size=(k, n))
                if np.min(np.linalg.svd(A, compute_uv=False)) > 0.3:
                    break
            sysm = VectorSystem(A)
            w = rng.uniform(0.3, 1.0, size=n)
            inv_p = w * (k / w.sum())
            if np.any(inv_p >= 1.0):
                continue
            cert, res = solve_certificate(sysm, Exponents(inv_p))
            if not res.converged:
                continue
            rep = projection_check(sysm, cert)
            assert rep.trace == pytest.approx(k, abs=1e-8)
            assert rep.diag_bound_ok

    def test_diag_bound_fails_for_wrong_weights(self, young3, young3_cert):
        # shrinking one s_j^2 without re-solving breaks A^T C A <= diag(1/s^2)
        sysm, _, _ = young3
        bad = make_cert(sysm, young3_cert.C,
                        s_sq=young3_cert.s_sq * np.array([4.0, 1.0, 1.0]))
        rep = projection_check(sysm, bad)
        assert not rep.diag_bound_ok


class TestSolveChain:
    def test_boundary_warning_note(self, young3):
        sysm, e, _ = young3
        cert, _ = solve_certificate(sysm, e, boundary_slack=1e-8)
        assert any("boundary" in note for note in cert.notes)

    def test_clean_run_has_no_notes(self, young3):
        sysm, e, _ = young3
        cert, res = solve_certificate(sysm, e, boundary_slack=0.3)
        assert res.converged and cert.notes == ()

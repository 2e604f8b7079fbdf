"""Limit-law transform tests, including the quadrature oracle for the MP law."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad

from spectral_lab.stieltjes import (
    WIGNER,
    BulkDomainError,
    WindowParams,
    in_spectral_window,
    m_mp,
    m_reciprocal_variant,
    m_wigner,
    mp_law,
    rate_psi,
)


def mp_transform_by_quadrature(z: complex, phi: float) -> complex:
    """Independent oracle: integrate the MP density against 1/(x - z).

    The absolutely continuous part has density
    sqrt(phi) * sqrt((x - gm)(gp - x)) / (2 pi x) on [gm, gp]; for
    phi < 1 a point mass of weight (1 - phi) sits at the origin.
    """
    law = mp_law(phi)
    gm, gp = law.gamma_minus, law.gamma_plus

    def density(x: float) -> float:
        return math.sqrt(phi) * math.sqrt((x - gm) * (gp - x)) / (2.0 * math.pi * x)

    re, _ = quad(lambda x: (density(x) * (x - z.real)) / abs(x - z) ** 2, gm, gp, limit=200)
    im, _ = quad(lambda x: (density(x) * z.imag) / abs(x - z) ** 2, gm, gp, limit=200)
    m = complex(re, im)
    if phi < 1.0:
        m += (1.0 - phi) / (0.0 - z)
    return m


class TestWigner:
    def test_boundary_value_at_origin_is_i(self):
        assert m_wigner(0, boundary=True) == pytest.approx(1j)

    def test_spike_point_value(self):
        # solves m^2 + z m + 1 = 0 with the upper branch: 1 + 8i m = 0 there
        m = m_wigner(63j / 8)
        assert m == pytest.approx(0.125j, abs=1e-14)
        assert abs(1 + 8j * m) < 1e-14

    def test_edge_value(self):
        assert m_wigner(2.0) == pytest.approx(-1.0)
        assert m_wigner(-2.0) == pytest.approx(1.0)

    def test_open_bulk_is_error_without_boundary_mode(self):
        with pytest.raises(BulkDomainError):
            m_wigner(0.5)
        with pytest.raises(BulkDomainError):
            m_wigner(-1.99)

    def test_bulk_boundary_mode_limit_from_above(self):
        for x in (-1.5, -0.3, 0.0, 0.7, 1.9):
            m = m_wigner(x, boundary=True)
            assert m.imag > 0
            assert m == pytest.approx(m_wigner(x + 1e-9j), abs=1e-8)

    def test_branch_consistency_upper_half_plane(self):
        rng = np.random.default_rng(7)
        z = rng.uniform(-5, 5, 1000) + 1j * rng.uniform(1e-3, 5, 1000)
        for zi in z:
            m = m_wigner(zi)
            assert m.imag > 0
            assert abs(m * m + zi * m + 1) < 1e-12

    def test_conjugate_symmetry(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            zi = complex(rng.uniform(-4, 4), rng.uniform(0.01, 4))
            assert m_wigner(np.conj(zi)) == pytest.approx(np.conj(m_wigner(zi)), abs=1e-14)

    def test_herglotz_decay(self):
        for y in (10.0, 100.0, 1000.0):
            assert abs(m_wigner(1j * y) + 1.0 / (1j * y)) < 2.0 / y**2


class TestMarchenkoPastur:
    def test_square_edge_value(self):
        assert m_mp(4.0, mp_law(1.0)) == pytest.approx(-0.5)

    def test_quadrature_oracle_single_point(self):
        law = mp_law(1.0)
        assert m_mp(-1.0, law) == pytest.approx(mp_transform_by_quadrature(-1 + 0j, 1.0), abs=1e-6)

    def test_hx_crosscheck_at_minus_half(self):
        # residual of c/((c-1)z) + m(z) at c = -1, z = c^2/(c-1) = -1/2
        c = -1.0
        z = c * c / (c - 1.0)
        assert abs(c / ((c - 1.0) * z) + m_mp(z, mp_law(1.0))) < 1e-12

    def test_quadrature_oracle_off_bulk_grid(self):
        rng = np.random.default_rng(11)
        for phi in (0.5, 1.0, 2.0):
            law = mp_law(phi)
            gm, gp = law.gamma_minus, law.gamma_plus
            pts = []
            pts += [complex(gm - d, 0) for d in (0.5, 1.5, 3.0)]
            pts += [complex(gp + d, 0) for d in (0.5, 1.5, 3.0)]
            pts += [complex(rng.uniform(gm - 1, gp + 1), rng.uniform(0.5, 3)) for _ in range(10)]
            pts += [complex(rng.uniform(gm - 1, gp + 1), -rng.uniform(0.5, 3)) for _ in range(4)]
            for z in pts:
                if z == 0:
                    continue
                assert abs(m_mp(z, law) - mp_transform_by_quadrature(z, phi)) < 1e-6, (phi, z)

    def test_zero_is_domain_error(self):
        with pytest.raises(BulkDomainError):
            m_mp(0.0, mp_law(1.0))

    def test_bulk_interior_error_and_boundary_mode(self):
        law = mp_law(1.0)
        with pytest.raises(BulkDomainError):
            m_mp(2.0, law)
        m = m_mp(2.0, law, boundary=True)
        assert m.imag > 0
        assert m == pytest.approx(m_mp(2.0 + 1e-9j, law), abs=1e-8)

    def test_herglotz_and_conjugate_symmetry(self):
        rng = np.random.default_rng(12)
        for phi in (0.5, 2.0):
            law = mp_law(phi)
            for _ in range(200):
                z = complex(rng.uniform(-3, 8), rng.uniform(0.01, 4))
                m = m_mp(z, law)
                assert m.imag > 0
                assert m_mp(np.conj(z), law) == pytest.approx(np.conj(m), abs=1e-13)

    def test_herglotz_decay(self):
        for phi in (0.5, 1.0, 2.0):
            law = mp_law(phi)
            for y in (10.0, 100.0, 1000.0):
                assert abs(m_mp(1j * y, law) + 1.0 / (1j * y)) < 2.0 / y**2


class TestReciprocalVariant:
    def test_edge_composition(self):
        law = mp_law(1.0)
        z = 1.0 / 4.0
        assert m_reciprocal_variant(z, law) == pytest.approx(0.25 * (-0.5))

    def test_defining_identity_bitwise(self):
        law = mp_law(1.0)
        rng = np.random.default_rng(3)
        omega = 0.4
        for _ in range(50):
            r = rng.uniform(2 * omega, 1 / omega)
            th = rng.uniform(-math.pi + 0.1, -0.1)
            z = r * complex(math.cos(th), math.sin(th))
            assert m_reciprocal_variant(z, law) == z * m_mp(1.0 / z, law)

    def test_negative_one(self):
        law = mp_law(1.0)
        assert m_reciprocal_variant(-1.0, law) == pytest.approx(-m_mp(-1.0, law))

    def test_zero_error(self):
        with pytest.raises(BulkDomainError):
            m_reciprocal_variant(0.0, mp_law(1.0))


class TestRatePsi:
    def test_closed_form_at_i(self):
        im_m = (math.sqrt(5) - 1) / 2
        expected = math.sqrt(im_m / 100) + 1 / 100
        assert rate_psi(WIGNER, 1j, 100) == pytest.approx(expected, rel=1e-12)

    def test_scaling_in_n(self):
        z = 0.3 + 0.7j
        for law in (WIGNER, mp_law(1.0)):
            p1 = rate_psi(law, z, 500)
            p4 = rate_psi(law, z, 2000)
            first1 = p1 - 1.0 / (500 * z.imag)
            first4 = p4 - 1.0 / (2000 * z.imag)
            assert first4 == pytest.approx(first1 / 2, rel=1e-9)

    def test_sup_bound_on_compact_rectangle(self):
        xs = np.linspace(-1, 1, 21)
        ys = np.linspace(1, 2, 11)
        for N in (100, 400, 1600, 6400):
            sup = max(rate_psi(WIGNER, complex(x, y), N) for x in xs for y in ys)
            assert sup <= 2.0 * N**-0.5

    def test_nonpositive_imag_error(self):
        with pytest.raises(ValueError):
            rate_psi(WIGNER, 1.0 + 0j, 100)
        with pytest.raises(ValueError):
            rate_psi(WIGNER, 1 - 1j, 100)


class TestWindows:
    def test_wigner_member(self):
        p = WindowParams(omega=0.5, N=100)
        assert in_spectral_window(WIGNER, 1 + 1j, p)

    def test_wigner_below_floor(self):
        p = WindowParams(omega=0.5, N=100)
        # floor is N^(omega-1) = 0.1
        assert not in_spectral_window(WIGNER, 1 + 1e-3j, p)

    def test_mp_member(self):
        law = mp_law(1.0)
        p = WindowParams(omega=0.5, N=100)
        z = 0.1 + 1j
        # |z| ~ 1.005 >= omega, kappa = 0.1 <= 2, y = 1 within bounds
        assert in_spectral_window(law, z, p)
        assert not in_spectral_window(law, 0.05 + 0.1j, p)  # |z| < omega

    def test_params_validation(self):
        with pytest.raises(ValueError):
            WindowParams(omega=1.5, N=10)
        with pytest.raises(ValueError):
            WindowParams(omega=0.5, N=10, beta=0.6)

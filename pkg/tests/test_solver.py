"""Radial systems, eigensolvers, refinement control, energy identity."""

import math

import numpy as np
import pytest

import oracles
from spherebuckle.errors import (
    GridTooCoarse,
    InvalidInput,
    NoConvergence,
    NotPositiveDefinite,
    UnsupportedMode,
)
from spherebuckle.spectrum import CapDomain, EigenPair
from spherebuckle.solver import (
    _solve_mode,
    angular_eigenvalue,
    assemble_mode,
    convergence_table,
    coordinate_split_residuals,
    radial_stencil,
    solve_cap,
    solve_gevp,
)


class TestOracleSelfChecks:
    def test_bessel_zeros_frozen(self):
        assert oracles.bessel_first_zero(1.0) == oracles.J_1_1
        assert oracles.bessel_first_zero(1.5) == oracles.J_3HALF_1
        assert oracles.bessel_first_zero(2.0) == oracles.J_2_1

    def test_transcendental_cross_check(self):
        # J_{3/2} vanishes exactly where tan x = x; two independent
        # routes to the same number.
        assert abs(oracles.tan_eq_x_root() - oracles.J_3HALF_1) < 1e-14

    def test_bessel_values_vanish_at_zeros(self):
        for nu, z in ((1.0, oracles.J_1_1), (1.5, oracles.J_3HALF_1)):
            assert abs(oracles.bessel_j(nu, z)) < 1e-13

    def test_hemisphere_reference_near_analytic(self):
        # cos(theta) solves the hemisphere Dirichlet problem with value 2.
        assert abs(oracles.HEMISPHERE_DIRICHLET_N2 - 2.0) < 1e-10


class TestAngularEigenvalue:
    @pytest.mark.parametrize("m,n,mu", [(0, 2, 0.0), (0, 5, 0.0), (3, 2, 9.0), (2, 3, 6.0)])
    def test_values(self, m, n, mu):
        assert angular_eigenvalue(m, n) == mu

    def test_invalid(self):
        with pytest.raises(InvalidInput):
            angular_eigenvalue(-1, 2)


class TestAssembleMode:
    def test_grid_too_coarse(self):
        with pytest.raises(GridTooCoarse):
            assemble_mode(CapDomain(2, 1.0), 0, 15)

    @pytest.mark.parametrize("n,theta0,m", [(2, 1.0, 0), (3, 2.0, 1), (4, 3.0, 2)])
    def test_symmetric_and_definite(self, n, theta0, m):
        sys_ = assemble_mode(CapDomain(n, theta0), m, 48)
        A, B = sys_.A, sys_.B
        assert np.abs(A - A.T).max() <= 1e-14 * np.abs(A).max()
        assert np.abs(B - B.T).max() <= 1e-14 * np.abs(B).max()
        np.linalg.cholesky(B)
        w = np.linalg.eigvalsh(A)
        assert w[0] >= -1e-10 * w[-1]

    def test_grid_is_cell_centered(self):
        sys_ = assemble_mode(CapDomain(2, 1.0), 0, 32)
        h = 1.0 / 32
        assert sys_.grid[0] == pytest.approx(h / 2)
        assert sys_.grid[-1] == pytest.approx(1.0 - h / 2)
        assert sys_.mu == 0.0

    def test_interior_stencil_annihilates_constants(self):
        # With mu = 0 the radial operator kills constants; the discrete
        # rows (away from the unfolded last row) must do so to roundoff.
        sub, diag, sup = radial_stencil(2, 1.0, 0, 64)
        rows = (sub + diag + sup)[1:-1]
        scale = (64 / 1.0) ** 2
        assert np.abs(rows).max() <= 1e-11 * scale
        # first row uses the even-parity fold: entries are diag and sup only
        assert abs(diag[0] + sup[0]) <= 1e-11 * scale


class TestSolveGevp:
    def test_diagonal_identity(self):
        out = solve_gevp(np.diag([2.0, 8.0]), np.eye(2), 2)
        assert [v for v, _ in out] == [2.0, 8.0]

    def test_diagonal_weights(self):
        out = solve_gevp(2.0 * np.eye(2), np.diag([2.0, 1.0]), 2)
        assert [v for v, _ in out] == pytest.approx([1.0, 2.0], rel=1e-14)

    def test_matches_charpoly_oracle(self):
        rng = np.random.default_rng(20240817)
        for _ in range(5):
            F = rng.normal(size=(6, 6))
            A = F @ F.T + 1e-3 * np.eye(6)
            G = rng.normal(size=(6, 6))
            B = G @ G.T + 0.5 * np.eye(6)
            got = [v for v, _ in solve_gevp(A, B, 6)]
            want = oracles.charpoly_eigs(A, B)
            for g, w in zip(got, want):
                assert abs(g - w) <= 1e-10 * max(1.0, abs(w))

    def test_b_orthonormal_vectors(self):
        rng = np.random.default_rng(7)
        F = rng.normal(size=(12, 12))
        A = F @ F.T
        G = rng.normal(size=(12, 12))
        B = G @ G.T + np.eye(12)
        pairs = solve_gevp(A, B, 5)
        V = np.column_stack([v for _, v in pairs])
        gram = V.T @ B @ V
        assert np.abs(gram - np.eye(5)).max() < 1e-8

    def test_permutation_invariance(self):
        rng = np.random.default_rng(99)
        F = rng.normal(size=(10, 10))
        A = F @ F.T + 0.1 * np.eye(10)
        G = rng.normal(size=(10, 10))
        B = G @ G.T + np.eye(10)
        base = [v for v, _ in solve_gevp(A, B, 4)]
        p = rng.permutation(10)
        P = np.eye(10)[p]
        shuffled = [v for v, _ in solve_gevp(P @ A @ P.T, P @ B @ P.T, 4)]
        for a, b in zip(base, shuffled):
            assert abs(a - b) <= 1e-10 * max(1.0, abs(b))

    def test_not_positive_definite(self):
        with pytest.raises(NotPositiveDefinite):
            solve_gevp(np.eye(3), np.diag([1.0, -1.0, 1.0]), 1)

    def test_input_validation(self):
        with pytest.raises(InvalidInput):
            solve_gevp(np.eye(3), np.eye(2), 1)
        with pytest.raises(InvalidInput):
            solve_gevp(np.eye(3), np.eye(3), 4)

    def test_solver_failure_maps_to_no_convergence(self, monkeypatch):
        import scipy.linalg

        import spherebuckle.solver as mod

        def boom(*args, **kwargs):
            raise scipy.linalg.LinAlgError("synthetic failure")

        monkeypatch.setattr(mod, "eigh", boom)
        with pytest.raises(NoConvergence):
            solve_gevp(np.eye(4), np.eye(4), 2)

    def test_deterministic_sign(self):
        out = solve_gevp(np.diag([1.0, 2.0]), np.eye(2), 2)
        for _, v in out:
            assert v[np.argmax(np.abs(v))] > 0


class TestHemisphereAnchor:
    def test_gradient_form_matches_reference(self):
        # Smallest generalized eigenvalue of (B, mass) is the Dirichlet
        # eigenvalue of the hemisphere. The rim face term is first-order
        # accurate for functions with nonzero rim slope, so this anchors
        # the value and the shrinking error, not a rate.
        ref = oracles.HEMISPHERE_DIRICHLET_N2
        errs = []
        for N in (64, 128):
            sys_ = assemble_mode(CapDomain(2, math.pi / 2), 0, N)
            h = math.pi / 2 / N
            wts = np.sin(sys_.grid) * h
            M = sys_.M
            mass = np.diag(wts[:M])
            mass[M - 1, M - 1] += wts[N - 1] / 9.0
            val = solve_gevp(sys_.B, mass, 1)[0][0]
            errs.append(abs(val - ref))
        assert errs[0] < 0.03 * ref
        assert errs[1] < 0.6 * errs[0]


class TestBandedEngine:
    def test_matches_dense_at_moderate_grid(self):
        sys_ = assemble_mode(CapDomain(3, 2.0), 1, 256)
        lam, X = _solve_mode(sys_, 6)
        dense = [v for v, _ in solve_gevp(sys_.A, sys_.B, 6)]
        for a, b in zip(lam, dense):
            assert abs(a - b) <= 1e-9 * dense[0]

    def test_lowest_eigenvalue_increases_with_mode(self):
        # The clamped discretization must be free of spurious low modes:
        # the first eigenvalue of each azimuthal channel interlaces upward.
        lows = []
        for m in range(5):
            sys_ = assemble_mode(CapDomain(2, 3.0), m, 128)
            lam, _ = _solve_mode(sys_, 1)
            lows.append(lam[0])
        assert all(a < b for a, b in zip(lows, lows[1:]))

    def test_ritz_basis_b_orthonormal(self):
        from spherebuckle.solver import _apply_B

        sys_ = assemble_mode(CapDomain(2, 1.0), 0, 512)
        lam, X = _solve_mode(sys_, 5)
        V = X[:, :5]
        gram = V.T @ _apply_B(sys_, V)
        d = np.sqrt(np.diag(gram))
        gram = gram / np.outer(d, d)
        assert np.abs(gram - np.eye(5)).max() < 1e-8


class TestSolveCap:
    def test_flat_limit_with_multiplicity(self):
        # Vanishing aperture degenerates to the clamped unit disk scaled
        # by theta0^2: the first three values are the squares of the first
        # order-1 zero and the doubly degenerate order-2 zero.
        spectrum, _ = solve_cap(CapDomain(2, 0.05), 3, N0=64, max_refinements=6)
        t2 = 0.05**2
        want = [oracles.J_1_1**2, oracles.J_2_1**2, oracles.J_2_1**2]
        for got, w in zip(spectrum.values, want):
            assert abs(got * t2 - w) < 0.01 * w

    def test_flat_limit_three_dim(self):
        spectrum, _ = solve_cap(CapDomain(3, 0.05), 1, N0=64, max_refinements=6)
        got = spectrum.values[0] * 0.05**2
        assert abs(got - oracles.J_3HALF_1**2) < 0.01 * oracles.J_3HALF_1**2

    def test_positive_nondecreasing_and_meta(self):
        spectrum, pairs = solve_cap(CapDomain(2, 1.0), 5, N0=64, max_refinements=6)
        vals = spectrum.values
        assert all(v > 0 for v in vals)
        assert all(a <= b for a, b in zip(vals, vals[1:]))
        assert spectrum.meta["N"] >= 256
        assert spectrum.meta["mode_cutoff"] >= 2
        assert len(spectrum.meta["order"]) == 5
        assert len(pairs) == 5
        assert pairs[0].m == 0
        assert len(pairs[0].profile) == spectrum.meta["N"]

    def test_deterministic(self):
        a, _ = solve_cap(CapDomain(3, 1.5), 4, N0=64, max_refinements=6)
        b, _ = solve_cap(CapDomain(3, 1.5), 4, N0=64, max_refinements=6)
        assert a.values == b.values

    def test_no_convergence_when_starved(self):
        with pytest.raises(NoConvergence):
            solve_cap(CapDomain(2, 1.0), 3, N0=32, max_refinements=1, rel_tol=1e-14)

    def test_requires_positive_k(self):
        with pytest.raises(InvalidInput):
            solve_cap(CapDomain(2, 1.0), 0)

    def test_observed_orders_second_order(self):
        rows = convergence_table(CapDomain(2, 1.0), 5, levels=4, N0=64)
        orders = rows[-1][2]
        assert all(o is not None and 1.7 <= o <= 2.3 for o in orders)


class TestEnergyIdentity:
    @pytest.mark.parametrize("n,theta0", [(2, 1.0), (3, 1.5)])
    def test_normalized_pair_sums_to_one(self, n, theta0):
        domain = CapDomain(n, theta0)
        _, pairs = solve_cap(domain, 1, N0=64, max_refinements=7)
        ra, rb = coordinate_split_residuals(pairs[0], domain)
        assert ra < 1e-8 and rb < 1e-8

    def test_scaling_by_two_gives_three(self):
        domain = CapDomain(2, 1.0)
        _, pairs = solve_cap(domain, 1, N0=64, max_refinements=5)
        p = pairs[0]
        doubled = EigenPair(
            value=p.value,
            m=0,
            theta=p.theta,
            profile=tuple(2.0 * f for f in p.profile),
        )
        ra, rb = coordinate_split_residuals(doubled, domain)
        assert abs(ra - 3.0) < 1e-10 and abs(rb - 3.0) < 1e-10

    def test_rejects_nonaxisymmetric(self):
        p = EigenPair(value=1.0, m=1, theta=(0.5,), profile=(1.0,))
        with pytest.raises(UnsupportedMode):
            coordinate_split_residuals(p, CapDomain(2, 1.0))

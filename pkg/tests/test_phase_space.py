import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kerrkitten.errors import SigmaOutOfRange, UnderResolvedGrid
from kerrkitten.fock_state import DensityMatrix, ModelParams, build_state, density, evolve
from kerrkitten.phase_space import (
    append_manifest,
    default_grid,
    evaluate_field,
    husimi_point,
    negativity_r,
    negativity_w,
    polar_q,
    r_closed,
    r_point,
    supported_field,
    wehrl_entropy,
    wigner_point,
    write_field_csv,
)
from kerrkitten.quad_engine import PhaseSpaceGrid

from conftest import complex_in_disc, fock_rho, model_params, oracle_r, oracle_wigner

SMALL = model_params(max_alpha=1.5, max_r=0.5, max_kappa=2)


class TestPointValues:
    def test_vacuum_and_one_photon_origin(self, vacuum):
        assert wigner_point(vacuum, 0.0) == pytest.approx(2 / math.pi, rel=1e-14)
        assert wigner_point(fock_rho(1), 0.0) == pytest.approx(-2 / math.pi, rel=1e-14)
        assert husimi_point(vacuum, 0.0) == pytest.approx(1 / math.pi, rel=1e-14)

    def test_coherent_gaussians(self):
        p = ModelParams(alpha=1.2 - 0.5j, r=0.0, c=0.0)
        s = build_state(p)
        b = 0.3 + 0.8j
        d2 = abs(b - p.alpha) ** 2
        assert wigner_point(s, b) == pytest.approx(2 / math.pi * math.exp(-2 * d2), abs=1e-10)
        assert husimi_point(s, b) == pytest.approx(math.exp(-d2) / math.pi, abs=1e-10)
        sigma = 0.7
        assert r_point(s, b, sigma) == pytest.approx(math.exp(-d2 / sigma) / (math.pi * sigma), abs=1e-10)

    @given(SMALL, complex_in_disc(2.5), st.sampled_from((0.5, 0.6, 0.8, 1.0)), st.floats(0, 1))
    def test_against_displaced_oracle(self, p, beta, sigma, t):
        rho = density(evolve(build_state(p), p, t))
        got = r_point(rho, beta, sigma)
        ref = oracle_r(rho.elements, beta, sigma)
        assert abs(got - ref) <= 1e-8 * max(abs(ref), 1e-3)

    @given(SMALL, complex_in_disc(2.5))
    def test_pure_and_density_paths_agree(self, p, beta):
        s = build_state(p)
        rho = density(s)
        assert husimi_point(s, beta) == pytest.approx(husimi_point(rho, beta), rel=1e-10, abs=1e-14)
        assert wigner_point(rho, beta) == pytest.approx(oracle_wigner(rho.elements, beta), rel=1e-8, abs=1e-11)

    def test_diagonal_kernel_matches_full(self):
        pops = np.array([0.2, 0.5, 0.0, 0.3])
        rho = DensityMatrix(np.diag(pops).astype(complex))
        full = DensityMatrix(np.diag(pops).astype(complex) + 0.0)
        beta = np.array([0.0, 0.4 + 0.1j, -1.3j, 2.0])
        for sigma in (0.5, 0.75, 1.0):
            ref = [oracle_r(full.elements, b, sigma) for b in beta]
            np.testing.assert_allclose(r_point(rho, beta, sigma), ref, rtol=1e-10, atol=1e-14)

    def test_sigma_range(self, vacuum):
        for s in (0.0, -0.2, 1.5):
            with pytest.raises(SigmaOutOfRange):
                r_point(vacuum, 0.3, s)
        with pytest.raises(SigmaOutOfRange):
            r_closed(ModelParams(alpha=1.0), 0.3, 1.2)

    def test_r_below_half_squeezed_coherent(self):
        # R of a squeezed coherent state is Gaussian with the W covariances
        # plus (σ - 1/2)/2; it exists for σ > (1 - e^{-2r})/2
        p = ModelParams(alpha=0.5, r=0.2, c=0.0)
        beta = 0.4 + 0.3j
        mean = 0.5 * math.exp(0.2)
        d = beta - mean
        for sigma in (0.2, 0.3, 0.45, 0.5, 0.8):
            vx = math.exp(0.4) / 4 + (sigma - 0.5) / 2
            vy = math.exp(-0.4) / 4 + (sigma - 0.5) / 2
            ref = math.exp(-d.real**2 / (2 * vx) - d.imag**2 / (2 * vy)) / (2 * math.pi * math.sqrt(vx * vy))
            assert r_closed(p, beta, sigma) == pytest.approx(ref, rel=1e-8)
        assert r_point(build_state(p), beta, 0.45) == pytest.approx(r_closed(p, beta, 0.45), rel=1e-8)


class TestClosedForms:
    @given(SMALL, complex_in_disc(2.5), st.sampled_from(("t0", "quarter", "eighth")),
           st.sampled_from((0.5, 0.7, 1.0)))
    def test_r_closed_matches_fock_sum(self, p, beta, tp, sigma):
        t = {"t0": 0.0, "quarter": math.pi / 4, "eighth": math.pi / 8}[tp]
        # far from the bulk the Fock sum sees the truncation tail; keep it tiny
        s = evolve(build_state(p, eps_trunc=1e-30), p, t)
        ref = r_point(s, beta, sigma)
        got = r_closed(p, beta, sigma, tp)
        assert abs(got - ref) <= 1e-8 * max(abs(ref), 1e-4)

    def test_r_closed_below_half_against_converged_fock_sum(self):
        p = ModelParams(alpha=2.0, r=0.5, c=1.0, kappa=1)
        s = evolve(build_state(p, eps_trunc=1e-60), p, math.pi / 8)
        for beta in (0.5 + 0.5j, 2.0 + 1.0j):
            ref = r_point(s, beta, 0.4)
            assert r_closed(p, beta, 0.4, "eighth") == pytest.approx(ref, rel=1e-8)

    def test_r_closed_default_sigma_examples(self):
        p = ModelParams(alpha=2.0, r=0.5, c=1.0, kappa=1)
        s = build_state(p, eps_trunc=1e-30)
        assert r_closed(p, 1.0, 0.8) == pytest.approx(r_point(s, 1.0, 0.8), rel=1e-9)
        assert r_closed(p, 0.7j, 1.0) == pytest.approx(husimi_point(s, 0.7j), rel=1e-9)
        assert r_closed(p, 0.7j, 0.5) == pytest.approx(wigner_point(s, 0.7j), rel=1e-9)

    def test_unknown_timepoint(self):
        with pytest.raises(ValueError):
            r_closed(ModelParams(alpha=1.0), 0.0, 0.5, "half")


class TestFields:
    def test_one_photon_negativity(self):
        f = supported_field(fock_rho(1), "W", PhaseSpaceGrid(5.0, 401))
        assert negativity_w(f) == pytest.approx(4 * math.exp(-0.5) - 2, abs=2e-4)

    def test_coherent_wehrl_minimum(self):
        f = supported_field(build_state(ModelParams(alpha=1.0 + 1.0j, c=0.0)), "Q", PhaseSpaceGrid(7.0, 201))
        assert wehrl_entropy(f) == pytest.approx(1 + math.log(math.pi), abs=2e-4)

    @pytest.mark.parametrize("kind,sigma", [("W", None), ("Q", None), ("R", 0.8)])
    def test_normalization(self, kind, sigma):
        p = ModelParams(alpha=1.5, r=0.4, c=1.0, kappa=1)
        s = evolve(build_state(p), p, math.pi / 8)
        f = supported_field(s, kind, default_grid(p, 201), sigma=sigma)
        assert f.integral() == pytest.approx(1.0, abs=2e-4)

    def test_parity_mirror_matches_full_evaluation(self):
        p = ModelParams(alpha=1.2, r=0.3, c=1.0, kappa=1)
        s = evolve(build_state(p), p, 0.4)
        g = PhaseSpaceGrid(5.0, 41)
        a = evaluate_field(s, "W", g).values
        b = evaluate_field(s, "W", g, use_parity=False).values
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(a, a[::-1, ::-1], rtol=1e-12, atol=1e-15)

    def test_husimi_is_gaussian_smoothed_wigner(self):
        p = ModelParams(alpha=1.0, r=0.3, c=1.0, kappa=1)
        s = evolve(build_state(p), p, math.pi / 8)
        g = PhaseSpaceGrid(6.0, 241)
        W = evaluate_field(s, "W", g, use_parity=False).values
        Q = evaluate_field(s, "Q", g, use_parity=False).values
        ax = g.axis
        kern = np.exp(-2 * ax**2)
        kern /= kern.sum()
        # Q = W * (2/π) e^{-2|β|²}; the kernel separates along both axes
        conv = np.apply_along_axis(lambda v: np.convolve(v, kern, "same"), 0, W)
        conv = np.apply_along_axis(lambda v: np.convolve(v, kern, "same"), 1, conv)
        inner = slice(60, 181)
        assert np.max(np.abs(conv[inner, inner] - Q[inner, inner])) < 5e-4

    def test_negativity_falls_with_sigma(self):
        p = ModelParams(alpha=2.0, r=0.5, c=1.0, kappa=1)
        s = evolve(build_state(p, eps_trunc=1e-30), p, math.pi / 8)
        g = default_grid(p, 161)
        vals = [negativity_r(s, sig, g) for sig in (0.45, 0.5, 0.6, 0.75, 0.95)]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 1e-3

    def test_kitten_time_more_negative_than_cat_time(self):
        p = ModelParams(alpha=2.0, r=0.5, c=1.0, kappa=1)
        s = build_state(p, eps_trunc=1e-30)
        s8, s4 = evolve(s, p, math.pi / 8), evolve(s, p, math.pi / 4)
        g = default_grid(p, 161)
        for sig in np.arange(0.5, 0.96, 0.05):
            a = supported_field(s8, "R", g, sigma=float(sig)).abs_integral()
            b = supported_field(s4, "R", g, sigma=float(sig)).abs_integral()
            assert a >= b

    def test_q_nonnegative(self):
        p = ModelParams(alpha=1.5, r=0.5, c=-1.0, kappa=2)
        f = evaluate_field(build_state(p), "Q", default_grid(p, 81))
        assert f.values.min() >= 0 and f.values.max() <= 1 / math.pi

    def test_under_resolved_grid(self):
        s = build_state(ModelParams(alpha=4.0, c=0.0))
        with pytest.raises(UnderResolvedGrid):
            supported_field(s, "Q", PhaseSpaceGrid(1.0, 21), max_grow=1)
        f = evaluate_field(s, "W", PhaseSpaceGrid(1.0, 21))
        with pytest.raises(UnderResolvedGrid):
            negativity_w(f)

    def test_wrong_kind(self, vacuum):
        g = PhaseSpaceGrid(4.0, 21)
        with pytest.raises(ValueError):
            evaluate_field(vacuum, "P", g)
        with pytest.raises(ValueError):
            evaluate_field(vacuum, "R", g)
        with pytest.raises(ValueError):
            wehrl_entropy(evaluate_field(vacuum, "W", g))

    def test_workers_do_not_change_result(self):
        p = ModelParams(alpha=1.0, r=0.2, c=1.0, kappa=1)
        s = evolve(build_state(p), p, 0.3)
        g = PhaseSpaceGrid(6.0, 101)
        a = evaluate_field(s, "W", g, workers=1).values
        b = evaluate_field(s, "W", g, workers=3).values
        assert np.array_equal(a, b)


class TestPolarQ:
    def test_vacuum_is_uniform(self, vacuum):
        th = np.linspace(0, 2 * math.pi, 7)
        np.testing.assert_allclose(polar_q(vacuum, th), 1 / (2 * math.pi), rtol=1e-14)

    def test_against_radial_quadrature(self):
        p = ModelParams(alpha=1.3, r=0.4, c=1.0, kappa=1)
        s = evolve(build_state(p), p, 0.5)
        r = np.linspace(0, 12, 6001)
        for th in (0.0, 1.1, 4.0):
            q = husimi_point(s, r * complex(math.cos(th), math.sin(th)))
            ref = np.trapezoid(q * r, r)
            assert polar_q(s, th) == pytest.approx(ref, rel=1e-6)

    def test_integrates_to_one(self):
        p = ModelParams(alpha=2.0, r=0.5, c=1.0, kappa=1)
        th = np.linspace(0, 2 * math.pi, 256, endpoint=False)
        q = polar_q(evolve(build_state(p), p, math.pi / 8), th)
        assert np.mean(q) * 2 * math.pi == pytest.approx(1.0, abs=1e-10)
        assert q.min() >= -1e-12


def test_csv_and_manifest(tmp_path):
    f = evaluate_field(fock_rho(0), "W", PhaseSpaceGrid(3.0, 5))
    path = tmp_path / "w.csv"
    write_field_csv(path, f, {"lambda_t": 0.0})
    lines = path.read_text().splitlines()
    assert lines[0] == "# kind=W"
    assert "re_beta, im_beta, value" in lines
    assert len(lines) - lines.index("re_beta, im_beta, value") - 1 == 25
    m = tmp_path / "manifest.txt"
    append_manifest(m, {"a": 0.1, "b": "x"})
    assert m.read_text() == "a=0.1\nb=x\n"

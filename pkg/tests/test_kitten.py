import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kerrkitten.errors import UnsupportedSelection, WrongKappa
from kerrkitten.fock_state import ModelParams, build_state, coeff_vector, density, evolve
from kerrkitten.kitten import (
    KittenSpec,
    collapse_width,
    component_params,
    fiducial_norm,
    fiducial_norm_k1,
    fiducial_state,
    hs_distance,
    hs_distance_phase_space,
    hs_scan,
    kitten_selection,
    kitten_time,
    scan_times,
    wigner_kitten_k1,
    write_scan_csv,
)
from kerrkitten.phase_space import default_grid, evaluate_field, wigner_point
from kerrkitten.quad_engine import PhaseSpaceGrid

from conftest import complex_in_disc, fock_rho

FIG = ModelParams(alpha=2.0, r=0.5, c=1.0, kappa=1)


def random_spec(draw_params, p, f):
    return KittenSpec(p, f[:p], 0.3, draw_params)


kitten_params = st.builds(ModelParams, alpha=complex_in_disc(2.5).filter(lambda a: abs(a) > 0.3),
                          r=st.floats(0.0, 0.8), theta_sq=st.floats(0, 6.3), c=st.just(1.0), kappa=st.just(1))
weights = st.lists(complex_in_disc(1.0).filter(lambda z: abs(z) > 0.2), min_size=4, max_size=4)


class TestSelection:
    def test_p4_weights_and_angle(self):
        spec = kitten_selection(4, FIG)
        np.testing.assert_allclose(spec.f, [1, -1j, 1, -1j], atol=1e-15)
        assert spec.theta_rot == pytest.approx(math.pi / 4)
        np.testing.assert_allclose(spec.angles(), math.pi / 4 + np.arange(4) * math.pi / 2)

    def test_p2_is_yurke_stoler_like(self):
        spec = kitten_selection(2, ModelParams(alpha=1.0, c=1.0, kappa=0))
        assert abs(spec.f[0]) == abs(spec.f[1]) == pytest.approx(1.0)

    def test_unsupported(self):
        with pytest.raises(UnsupportedSelection):
            kitten_selection(4, FIG.replace(c=-1.0))
        with pytest.raises(UnsupportedSelection):
            kitten_selection(3, FIG)
        with pytest.raises(ValueError):
            KittenSpec(2, (1.0,), 0.0, FIG)

    def test_component_rotation(self):
        spec = kitten_selection(4, FIG)
        cps = component_params(spec)
        for th, cp in zip(spec.angles(), cps):
            assert cp.alpha == pytest.approx(FIG.alpha * cmath.exp(1j * th))
            assert cp.xi == pytest.approx(FIG.xi * cmath.exp(2j * th))


class TestNormalization:
    @given(kitten_params, weights, st.sampled_from((2, 3, 4)))
    def test_closed_forms_agree_with_fock_sum(self, p, f, nlobes):
        spec = random_spec(p, nlobes, f)
        vec = sum(fj * coeff_vector(cp, 400) for fj, cp in zip(spec.f, component_params(spec)))
        ref = 1.0 / math.sqrt(math.fsum(np.abs(vec) ** 2))
        assert fiducial_norm(spec) == pytest.approx(ref, rel=1e-9)
        assert fiducial_norm_k1(spec) == pytest.approx(ref, rel=1e-9)

    def test_k1_only(self):
        spec = kitten_selection(4, FIG.replace(kappa=2))
        with pytest.raises(WrongKappa):
            fiducial_norm_k1(spec)
        with pytest.raises(WrongKappa):
            wigner_kitten_k1(spec, 0.0)

    def test_fiducial_state_normalized(self):
        s = fiducial_state(kitten_selection(4, FIG))
        assert abs(s.norm2() - 1.0) < 1e-10


class TestKittenWigner:
    @given(kitten_params, weights, complex_in_disc(3.0))
    def test_matches_fock_wigner(self, p, f, beta):
        spec = random_spec(p, 4, f)
        s = fiducial_state(spec, eps_trunc=1e-30)
        ref = wigner_point(s, beta)
        assert abs(wigner_kitten_k1(spec, beta) - ref) <= 1e-8 * max(abs(ref), 1e-3)

    def test_integrates_to_one(self):
        spec = kitten_selection(4, FIG)
        g = default_grid(FIG, 161)
        w = wigner_kitten_k1(spec, g.points())
        assert float(np.sum(w)) * g.cell_area == pytest.approx(1.0, abs=2e-4)


class TestDistances:
    def test_orthogonal_and_identical(self):
        assert hs_distance(fock_rho(0), fock_rho(1)) == pytest.approx(math.sqrt(2))
        s = build_state(FIG)
        assert hs_distance(s, density(s)) == pytest.approx(0.0, abs=1e-15)

    def test_phase_space_form(self):
        s = evolve(build_state(FIG), FIG, 0.3)
        fid = fiducial_state(kitten_selection(4, FIG))
        ref = hs_distance(s, fid)
        got = hs_distance_phase_space(s, fid, default_grid(FIG, 201))
        assert got == pytest.approx(ref, abs=5e-4)

    @pytest.mark.parametrize("alpha", [2.0, 4.0])
    def test_state_is_kitten_at_eighth_period(self, alpha):
        p = FIG.replace(alpha=alpha)
        d = hs_scan(p, kitten_selection(4, p), [kitten_time(4)])
        assert d[0] < 1e-3

    def test_scan_minimum_location(self):
        spec = kitten_selection(4, FIG)
        ts = scan_times(0.0, math.pi / 4, 96)
        d = hs_scan(FIG, spec, ts)
        assert ts[int(np.argmin(d))] == pytest.approx(math.pi / 8)
        # pure-state form agrees with the matrix form
        t = ts[17]
        ref = hs_distance(evolve(build_state(FIG), FIG, t), fiducial_state(spec))
        assert d[17] == pytest.approx(ref, abs=1e-10)

    def test_collapse_narrows_with_amplitude(self):
        widths = []
        for alpha in (2.0, 3.0, 4.0):
            p = FIG.replace(alpha=alpha)
            widths.append(collapse_width(p, kitten_selection(4, p), kitten_time(4)))
        assert widths[0] > widths[1] > widths[2] > 0

    def test_collapse_width_zero_away_from_kitten(self):
        assert collapse_width(FIG, kitten_selection(4, FIG), 0.05) == 0.0


def test_times_and_csv(tmp_path):
    assert kitten_time(4) == pytest.approx(math.pi / 8)
    assert kitten_time(2, lambda_kerr=2.0) == pytest.approx(math.pi / 8)
    ts = scan_times(0.0, math.pi / 4, 600)
    assert ts.size == 601 and ts[-1] == pytest.approx(math.pi / 4)
    path = tmp_path / "scan.csv"
    write_scan_csv(path, ts[:2], [0.5, 0.4], {"p": 4})
    assert path.read_text().splitlines()[:2] == ["# p=4", "lambda_t, d_hs"]


def test_fiducial_field_is_real_wigner():
    spec = kitten_selection(4, FIG)
    f = evaluate_field(fiducial_state(spec, eps_trunc=1e-30), "W", PhaseSpaceGrid(6.0, 31))
    np.testing.assert_allclose(f.values, wigner_kitten_k1(spec, f.grid.points()), rtol=1e-7, atol=1e-10)

import numpy as np
import pytest
from conftest import ABAR_PRINTED, K_PRINTED, P_PRINTED

from vesselsafe import control, linalg, safety
from vesselsafe.control import CompensatorConfig
from vesselsafe.vessel import VesselParams


class TestDesign:
    def test_reference_gain_and_closed_loop(self, design):
        assert np.abs(design.K - K_PRINTED).max() < 0.01
        assert np.abs(design.Abar - ABAR_PRINTED).max() < 0.01

    def test_scalar_design(self):
        d = control.design_lqr([[-1.0]], [[1.0]], [[1.0]], [[1.0]])
        assert np.isclose(d.K[0, 0], np.sqrt(2.0) - 1.0, atol=1e-12)

    def test_design_invariants(self, design):
        assert linalg.is_pos_def(design.P)
        assert linalg.is_hurwitz(design.Abar)
        resid = design.P @ design.Abar + design.Abar.T @ design.P + design.Q_eff
        assert np.abs(resid).max() < 1e-6


class TestConfigValidation:
    def test_mu_range(self, sec7):
        with pytest.raises(ValueError, match="mu"):
            CompensatorConfig(R_prime=np.eye(2), b_prime=3.0, M=10.0,
                              mu=10.0, M_prime=9.0)

    def test_blend_level_range(self):
        with pytest.raises(ValueError, match="M_prime"):
            CompensatorConfig(R_prime=np.eye(2), b_prime=3.0, M=10.0,
                              mu=1.0, M_prime=0.5)

    def test_blend_level_may_equal_m(self):
        cfg = CompensatorConfig(R_prime=np.eye(2), b_prime=3.0, M=10.0,
                                mu=1.0, M_prime=10.0)
        assert cfg.M_prime == 10.0

    def test_rate_positive(self):
        with pytest.raises(ValueError, match="b_prime"):
            CompensatorConfig(R_prime=np.eye(2), b_prime=0.0, M=10.0,
                              mu=1.0, M_prime=9.0)


class TestTrackingLaw:
    def test_zero_at_origin(self, design):
        assert np.allclose(control.u_tra(np.zeros(3), design), 0.0)

    def test_first_column(self, design):
        u = control.u_tra([1.0, 0.0, 0.0], design)
        assert np.allclose(u, [0.05, -0.02], atol=0.011)

    def test_linearity(self, design):
        rng = np.random.default_rng(10)
        for _ in range(20):
            x = rng.normal(size=3)
            a = rng.normal()
            assert np.allclose(control.u_tra(a * x, design),
                               a * control.u_tra(x, design), atol=1e-12)


class TestLinearCompensator:
    def test_zero_at_origin(self, sec7, design):
        assert np.allclose(control.u_com(np.zeros(3), design, sec7.comp), 0.0)

    def test_hand_value_on_reference_state(self, sec7, design):
        # hand oracle on the two-decimal reference P at x = (0.5, 0.5, 0):
        # P x = (0.965, 1.29, 5.20), B'P x = (-0.965, 3*1.29 - 5.20) =
        # (-0.965, -1.33), u_com = -(1/15) B'P x = (0.064333, 0.088667)
        x = np.array([0.5, 0.5, 0.0])
        hand = -np.array([[-1.0, 0.0, 0.0], [0.0, 3.0, -1.0]]) @ (P_PRINTED @ x) / 15.0
        assert np.allclose(hand, [0.0643333, 0.0886667], atol=1e-6)
        u = control.u_com(x, design, sec7.comp)
        assert np.allclose(u, hand, atol=1e-3)

    def test_combined_gain_identity(self, sec7, design):
        # u_tra + u_com = -(R^-1 + R'^-1) B'P x as a matrix identity
        Ktot = design.K + control.compensator_gain(design, sec7.comp)
        expect = (np.linalg.inv(design.R) + np.linalg.inv(sec7.comp.R_prime)) \
            @ design.B.T @ design.P
        assert np.abs(Ktot - expect).max() < 1e-12


def _perp_to_noise_direction(design, p):
    """A direction with G'P x = 0."""
    w = design.P @ p.G
    v = np.array([1.0, 0.0, 0.0]) - (w[0] / (w @ w)) * w
    return v / np.linalg.norm(v)


class TestNonlinearCompensator:
    def test_gamma_at_origin_is_noise_energy(self, sec7, design):
        g0 = control.gamma(np.zeros(3), design, sec7.comp, sec7.vessel)
        assert np.isclose(g0, float(sec7.vessel.G @ design.P @ sec7.vessel.G), atol=1e-15)
        assert np.isclose(g0, 0.5704, atol=1e-3)
        assert g0 > 0.0

    def test_gamma_sign_matches_generator_shortfall(self, sec7, design, zcbf):
        # gamma > 0 iff the uncompensated generator falls short of b' H_sigma
        rng = np.random.default_rng(11)
        checked = 0
        for _ in range(200):
            x = rng.normal(size=3) * [1.0, 1.0, 0.4]
            g = control.gamma(x, design, sec7.comp, sec7.vessel)
            if abs(g) < 1e-9:
                continue
            u = control.u_tra(x, design)
            dpart, dif, H = safety.generator_h(x, u, zcbf, sec7.vessel)
            shortfall = (dpart + dif) - sec7.comp.b_prime * H
            assert (g > 0.0) == (shortfall < 0.0)
            checked += 1
        assert checked > 150

    def test_phi_s_zero_at_origin(self, sec7, design):
        assert np.allclose(control.phi_s(np.zeros(3), design, sec7.comp, sec7.vessel), 0.0)

    def test_phi_s_zero_when_gamma_nonpositive(self, sec7, design):
        v = _perp_to_noise_direction(design, sec7.vessel)
        found = False
        for scale in (1.0, 2.0, 4.0, 8.0):
            x = scale * v
            if control.gamma(x, design, sec7.comp, sec7.vessel) <= 0.0:
                assert np.all(control.phi_s(x, design, sec7.comp, sec7.vessel) == 0.0)
                found = True
        assert found, "no inactive-branch state found along the zero-authority direction"

    def test_active_branch_enforces_design_rate_exactly(self, sec7, design, zcbf):
        rng = np.random.default_rng(12)
        checked = 0
        for _ in range(500):
            x = rng.normal(size=3)
            x *= np.sqrt(rng.uniform(sec7.comp.M - 1.0, sec7.comp.M)
                         / (x @ design.P @ x))
            phi = control.phi_s(x, design, sec7.comp, sec7.vessel)
            if not np.any(phi):
                continue
            u = control.u_tra(x, design) + phi
            dpart, dif, H = safety.generator_h(x, u, zcbf, sec7.vessel)
            assert abs((dpart + dif) - sec7.comp.b_prime * H) < 1e-8
            checked += 1
        assert checked > 100

    def test_u_nlc_zero_above_blend_level(self, sec7, design):
        rng = np.random.default_rng(13)
        for _ in range(50):
            x = rng.normal(size=3)
            x *= np.sqrt(rng.uniform(0.0, sec7.comp.M - sec7.comp.M_prime)
                         / (x @ design.P @ x))  # h >= M_prime
            assert np.all(control.u_nlc(x, design, sec7.comp, sec7.vessel) == 0.0)

    @pytest.mark.parametrize("level_name", ["mu", "M_prime"])
    def test_u_nlc_continuous_at_blend_surfaces(self, sec7, design, level_name):
        level = getattr(sec7.comp, level_name)
        rng = np.random.default_rng(14)
        for _ in range(1000):
            d = rng.normal(size=3)
            d /= np.sqrt(d @ design.P @ d)
            r = np.sqrt(sec7.comp.M - level)  # h(r d) = level
            u_in = control.u_nlc((r - 1e-9) * d, design, sec7.comp, sec7.vessel)
            u_out = control.u_nlc((r + 1e-9) * d, design, sec7.comp, sec7.vessel)
            jump = np.linalg.norm(u_in - u_out)
            assert jump <= 1e-6 * (1.0 + np.linalg.norm(u_in))


class TestTotalController:
    def test_tra_at_origin(self, sec7, design):
        u = control.total_controller("tra", np.zeros(3), design, sec7.comp, sec7.vessel)
        assert np.allclose(u, 0.0)

    def test_tra_com_is_pointwise_sum(self, sec7, design):
        rng = np.random.default_rng(15)
        for _ in range(20):
            x = rng.normal(size=3)
            u = control.total_controller("tra+com", x, design, sec7.comp, sec7.vessel)
            expect = control.u_tra(x, design) + control.u_com(x, design, sec7.comp)
            assert np.allclose(u, expect, atol=1e-15)

    def test_tra_nlc_matches_tra_above_blend_level(self, sec7, design):
        x = np.array([0.1, 0.05, 0.0])
        assert sec7.comp.M - x @ design.P @ x >= sec7.comp.M_prime
        u_nlc_mode = control.total_controller("tra+nlc", x, design, sec7.comp, sec7.vessel)
        u_tra_mode = control.total_controller("tra", x, design, sec7.comp, sec7.vessel)
        assert np.array_equal(u_nlc_mode, u_tra_mode)

    def test_unknown_mode_rejected(self, sec7, design):
        with pytest.raises(ValueError, match="mode"):
            control.total_controller("mpc", np.zeros(3), design, sec7.comp, sec7.vessel)


class TestDegenerateDirection:
    def test_phi_s_bounded_or_guarded_near_zero_authority(self, sec7, design):
        # approach the zero-authority set g'P x = 0 along a ray: outputs
        # must stay finite, and inside the guard threshold they are exactly
        # zero regardless of the activation indicator
        v = _perp_to_noise_direction(design, sec7.vessel)
        w_dir = design.P @ sec7.vessel.G
        w_dir /= np.linalg.norm(w_dir)
        base = 3.0 * v
        for eps in np.geomspace(1.0, 1e-9, 19):
            x = base + eps * w_dir
            phi = control.phi_s(x, design, sec7.comp, sec7.vessel)
            assert np.all(np.isfinite(phi))
            gx = control.gamma(x, design, sec7.comp, sec7.vessel)
            px = design.P @ x
            import vesselsafe.vessel as _v
            den = 2.0 * float((_v.input_gain(x, sec7.vessel).T @ px)
                              @ (_v.input_gain(x, sec7.vessel).T @ px))
            if gx <= 0.0 or den <= sec7.comp.eps_den:
                assert np.all(phi == 0.0)

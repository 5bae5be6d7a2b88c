import warnings

import numpy as np
import pytest

from entflow.bipartite import SchmidtVector, majorizes, max_prob, monotone_E, osbp_direct_possible
from entflow.errors import (
    CompletenessViolation,
    DeterministicCase,
    InvalidInput,
    InvalidSegments,
    ProbabilityOutOfRange,
)
from entflow.protocols import (
    SegmentedUnitVectors,
    chi_max,
    chi_min,
    default_units,
    emit_measurement_operators,
    least_entangled_path,
    most_entangled_path,
    schmidt_state_vector,
    straight_path,
    xi_state,
    zeta_eta,
)
from entflow.survival import hazard, path_probability
from oracles import random_schmidt

S = SchmidtVector


class TestXi:
    def test_three_level_example(self):
        r = xi_state(S([0.55, 0.35, 0.1]), S([0.5, 0.3, 0.2]))
        assert r.xi.coeffs == pytest.approx((0.5625, 0.3375, 0.1), abs=1e-15)
        assert r.ratios == pytest.approx((0.5, 1.125), abs=1e-15)
        assert r.boundaries == (3, 1)

    def test_two_level_example(self):
        psi = S([0.8, 0.2])
        r = xi_state(psi, S([0.6, 0.4]))
        assert r.ratios == pytest.approx((0.5, 4 / 3), abs=1e-15)
        assert r.xi.coeffs == pytest.approx(psi.coeffs, abs=1e-15)

    def test_deterministic_case(self):
        phi = S([0.7, 0.2, 0.1])
        with pytest.warns(UserWarning):
            r = xi_state(S([0.5, 0.3, 0.2]), phi)
        assert r.boundaries == (1,)
        assert r.ratios == pytest.approx((1.0,), abs=1e-15)
        assert r.xi.coeffs == pytest.approx(phi.coeffs, abs=1e-15)

    def test_properties_random(self, rng):
        for _ in range(1000):
            d = int(rng.integers(2, 7))
            psi, phi = S(random_schmidt(rng, d)), S(random_schmidt(rng, d))
            p = max_prob(psi, phi).p
            if p >= 1.0:
                continue
            r = xi_state(psi, phi)
            assert majorizes(r.xi, psi)
            assert max_prob(r.xi, phi).p == pytest.approx(p, abs=1e-10)
            assert all(y > x for x, y in zip(r.ratios, r.ratios[1:]))


class TestZetaEta:
    PSI, PHI = S([0.55, 0.35, 0.1]), S([0.5, 0.3, 0.2])

    def test_default_units_reproduce_xi(self):
        zeta, eta = zeta_eta(self.PSI, self.PHI)
        assert zeta.coeffs == xi_state(self.PSI, self.PHI).xi.coeffs
        assert eta.coeffs == self.PHI.coeffs
        zeta, eta = zeta_eta(self.PSI, self.PHI, default_units(self.PSI, self.PHI))
        assert zeta.coeffs == pytest.approx((0.5625, 0.3375, 0.1), abs=1e-15)
        assert eta.coeffs == pytest.approx(self.PHI.coeffs, abs=1e-15)

    def test_psi_shaped_units(self):
        units = default_units(self.PSI, self.PHI, shape_of="psi")
        zeta, eta = zeta_eta(self.PSI, self.PHI, units)
        assert zeta.coeffs == pytest.approx(self.PSI.coeffs, abs=1e-15)
        # segment {1,2} of phi (mass 0.8) reshaped like psi's (0.55, 0.35)/0.9
        assert eta.coeffs == pytest.approx((0.8 * 0.55 / 0.9, 0.8 * 0.35 / 0.9, 0.2), abs=1e-15)
        assert max_prob(zeta, eta).p == pytest.approx(max_prob(self.PSI, self.PHI).p, abs=1e-12)
        assert majorizes(zeta, self.PSI) and majorizes(self.PHI, eta)

    def test_single_segment(self):
        psi, phi = S([0.5, 0.3, 0.2]), S([0.7, 0.2, 0.1])
        units = default_units(psi, phi, shape_of="psi")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            zeta, eta = zeta_eta(psi, phi, units)
        assert zeta.coeffs == pytest.approx(psi.coeffs, abs=1e-15)
        assert eta.coeffs == pytest.approx(psi.coeffs, abs=1e-15)

    def test_sandwich_violation(self):
        bad = SegmentedUnitVectors((3, 1), ((0, 0, 1.0), (0.1, 0.9, 0.0)))
        with pytest.raises(InvalidSegments):
            zeta_eta(self.PSI, self.PHI, bad)

    def test_wrong_boundaries_and_support(self):
        with pytest.raises(InvalidSegments):
            zeta_eta(self.PSI, self.PHI, SegmentedUnitVectors((2, 1), ((0, 1.0, 0), (1.0, 0, 0))))
        with pytest.raises(InvalidSegments):
            zeta_eta(self.PSI, self.PHI, SegmentedUnitVectors((3, 1), ((0.5, 0, 0.5), (0.6, 0.4, 0.0))))

    def test_random_units_keep_probability(self, rng):
        done = 0
        for _ in range(300):
            d = int(rng.integers(3, 6))
            psi, phi = S(random_schmidt(rng, d)), S(random_schmidt(rng, d))
            if max_prob(psi, phi).p >= 1:
                continue
            base = default_units(psi, phi, "psi")
            top = default_units(psi, phi, "phi")
            s = float(rng.uniform())
            mixed = SegmentedUnitVectors(base.boundaries, tuple(
                tuple((1 - s) * a + s * b for a, b in zip(u, v)) for u, v in zip(base.vectors, top.vectors)))
            zeta, eta = zeta_eta(psi, phi, mixed)
            assert max_prob(zeta, eta).p == pytest.approx(max_prob(psi, phi).p, abs=1e-10)
            done += 1
        assert done > 50


class TestChi:
    def test_chi_max_direct(self):
        c = chi_max(S([0.5, 0.3, 0.2]), 0.8)
        assert c.coeffs == pytest.approx((0.375, 0.375, 0.25), abs=1e-15)

    def test_chi_max_reorder(self):
        psi = S([0.5, 0.3, 0.2])
        c = chi_max(psi, 0.65)
        assert c.coeffs == pytest.approx((9 / 26, 9 / 26, 4 / 13), abs=1e-15)
        assert max_prob(psi, c).p == pytest.approx(0.65, abs=1e-12)

    def test_chi_max_identity_and_domain(self):
        psi = S([0.5, 0.3, 0.2])
        assert chi_max(psi, 1.0) is psi
        with pytest.raises(ProbabilityOutOfRange):
            chi_max(psi, 0.5)
        with pytest.raises(ProbabilityOutOfRange):
            chi_max(psi, 1.2)

    def test_chi_min(self):
        phi = S([0.5, 0.3, 0.2])
        c = chi_min(phi, 0.5)
        assert c.coeffs == pytest.approx((0.75, 0.15, 0.1), abs=1e-15)
        ratios = [monotone_E(c, l) / monotone_E(phi, l) for l in (2, 3)]
        assert ratios == pytest.approx([0.5, 0.5], abs=1e-15)
        assert max_prob(c, phi).p == pytest.approx(0.5, abs=1e-15)
        assert chi_min(phi, 1.0) is phi
        assert chi_min(S([0.6, 0.4]), 0.5).coeffs == pytest.approx((0.8, 0.2), abs=1e-15)
        with pytest.raises(ProbabilityOutOfRange):
            chi_min(phi, 0.0)

    def test_chi_max_dominance(self, rng):
        for _ in range(100):
            d = int(rng.integers(2, 6))
            psi = S(random_schmidt(rng, d))
            p = float(rng.uniform(d * psi.coeffs[-1], 1.0))
            top = chi_max(psi, p)
            assert max_prob(psi, top).p == pytest.approx(p, abs=1e-10)
            for _ in range(100):
                sigma = S(random_schmidt(rng, d))
                if max_prob(psi, sigma).p >= p:
                    assert all(monotone_E(sigma, k) <= monotone_E(top, k) + 1e-12 for k in range(1, d + 1))

    def test_duality(self, rng):
        for _ in range(200):
            d = int(rng.integers(2, 6))
            phi = S(random_schmidt(rng, d))
            p = float(rng.uniform(0.05, 0.95))
            low = chi_min(phi, p)
            assert osbp_direct_possible(low, phi)
            assert chi_max(low, p).coeffs == pytest.approx(phi.coeffs, abs=1e-12)


class TestPaths:
    PSI, PHI = S([0.7, 0.2, 0.1]), S([0.5, 0.3, 0.2])

    def test_straight(self):
        path = straight_path(S([0.8, 0.2]), S([0.6, 0.4]))
        assert path.state(0.0).coeffs == (0.8, 0.2)
        assert path.state(1.0).coeffs == pytest.approx((0.6, 0.4), abs=1e-15)
        assert path.state(0.5).coeffs == pytest.approx((0.7, 0.3), abs=1e-15)
        for t in (0.0, 0.25, 0.9):
            assert path.tails_at(t)[1] == pytest.approx(0.2 + 0.2 * t, abs=1e-15)

    def test_most_entangled(self):
        path = most_entangled_path(self.PSI, self.PHI)
        assert path.waypoints()[1].coeffs == pytest.approx((0.4, 0.4, 0.2), abs=1e-15)
        assert path_probability(path).probability == pytest.approx(0.5, abs=1e-6)
        for t in np.linspace(0.55, 0.95, 10):
            assert hazard(path, float(t), method="analytic") == 0.0
            assert abs(hazard(path, float(t))) < 1e-9

    def test_least_entangled(self):
        path = least_entangled_path(self.PSI, self.PHI)
        assert path.waypoints()[1].coeffs == pytest.approx((0.75, 0.15, 0.1), abs=1e-15)
        assert path_probability(path).probability == pytest.approx(0.5, abs=1e-6)
        for t in np.linspace(0.05, 0.45, 10):
            assert hazard(path, float(t), method="analytic") == 0.0
            assert abs(hazard(path, float(t))) < 1e-9

    def test_deterministic_rejected(self):
        with pytest.raises(DeterministicCase):
            most_entangled_path(self.PHI, self.PSI)
        with pytest.raises(DeterministicCase):
            least_entangled_path(self.PHI, self.PSI)


class TestMeasurementOperators:
    PSI, PHI = S([0.7, 0.2, 0.1]), S([0.5, 0.3, 0.2])

    def test_identity_branch(self):
        ops = emit_measurement_operators(self.PHI, self.PHI, (1, 0, 0))
        assert np.allclose(ops.operators[0], np.eye(3), atol=1e-15)

    def test_branch_norm(self):
        ops = emit_measurement_operators(self.PSI, self.PHI, (0.5, 0, 0))
        x = schmidt_state_vector(self.PSI)
        out = np.kron(ops.operators[0], np.eye(3)) @ x
        assert np.vdot(out, out).real == pytest.approx(0.5, abs=1e-15)
        assert ops.completeness_defect_min >= -1e-10

    def test_branch_outputs_are_target(self):
        ops = emit_measurement_operators(self.PSI, self.PHI, (0.5, 0, 0))
        target = schmidt_state_vector(self.PHI)
        for q, out in zip(ops.branch_probs, ops.branch_outputs(self.PSI)):
            assert np.allclose(out, np.sqrt(q) * target, atol=1e-15)

    def test_equal_split_not_complete_here(self):
        p = max_prob(self.PSI, self.PHI).p
        with pytest.raises(CompletenessViolation):
            emit_measurement_operators(self.PSI, self.PHI, (p / 3,) * 3)

    def test_equal_split_complete_for_maximally_entangled(self):
        phi = S([1 / 3] * 3)
        ops = emit_measurement_operators(phi, phi, (1 / 3,) * 3)
        total = sum(m.conj().T @ m for m in ops.operators)
        assert np.allclose(total, np.eye(3), atol=1e-15)
        for out in ops.branch_outputs(phi):
            assert np.allclose(out, np.sqrt(1 / 3) * schmidt_state_vector(phi), atol=1e-15)

    def test_permuted_branches(self):
        psi, phi = S([0.4, 0.35, 0.25]), S([0.5, 0.3, 0.2])
        ops = emit_measurement_operators(psi, phi, (0.2, 0.2, 0.2))
        for q, out in zip(ops.branch_probs, ops.branch_outputs(psi)):
            assert np.allclose(out, np.sqrt(q) * schmidt_state_vector(phi), atol=1e-14)

    def test_errors(self):
        with pytest.raises(ProbabilityOutOfRange):
            emit_measurement_operators(self.PSI, self.PHI, (0.4, 0.2, 0.0))
        with pytest.raises(InvalidInput):
            emit_measurement_operators(S([0.6, 0.4]), S([0.6, 0.4]), (1, 0, 0))
        with pytest.raises(InvalidInput):
            emit_measurement_operators(self.PSI, self.PHI, (0.1, 0.1))

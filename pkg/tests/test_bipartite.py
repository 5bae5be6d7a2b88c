import pytest

from entflow.bipartite import (
    SchmidtVector,
    in_interval,
    is_intermediate,
    lattice_join,
    lattice_meet,
    locc_possible,
    majorizes,
    max_prob,
    monotone_E,
    osbp_direct_possible,
)
from entflow.errors import DegenerateInput, DimensionMismatch, IndexOutOfRange, InvalidInput, InvariantViolation
from oracles import majorized, prob_bipartite, random_schmidt, simplex_grid

S = SchmidtVector
PHI_PLUS = S([1 / 3] * 3)


class TestSchmidtVector:
    def test_sorts_on_construction(self):
        assert S([0.2, 0.5, 0.3]).coeffs == (0.5, 0.3, 0.2)

    def test_rejects_bad_sum(self):
        with pytest.raises(InvariantViolation):
            S([0.5, 0.4])

    def test_rejects_negative(self):
        with pytest.raises(InvariantViolation):
            S([1.1, -0.1])

    def test_zero_coefficient(self):
        with pytest.raises(DegenerateInput):
            S([1.0, 0.0])
        assert S([1.0, 0.0], allow_degenerate=True).coeffs == (1.0, 0.0)

    def test_empty_and_nonfinite(self):
        with pytest.raises(InvalidInput):
            S([])
        with pytest.raises(InvalidInput):
            S([float("nan"), 1.0])

    def test_json_round_trip(self):
        v = S([0.5, 0.3, 0.2])
        assert S.from_json(v.to_json()) == v
        assert v.to_json() == {"d": 3, "lambda": [0.5, 0.3, 0.2]}
        with pytest.raises(InvalidInput):
            S.from_json({"d": 2, "lambda": [0.5, 0.3, 0.2]})


class TestMonotones:
    def test_examples(self):
        assert monotone_E(S([0.5, 0.3, 0.2]), 2) == pytest.approx(0.5, abs=1e-15)
        assert monotone_E(S([0.6, 0.3, 0.1]), 1) == 1.0
        assert monotone_E(PHI_PLUS, 3) == pytest.approx(1 / 3, abs=1e-15)

    def test_index_range(self):
        with pytest.raises(IndexOutOfRange):
            monotone_E(PHI_PLUS, 0)
        with pytest.raises(IndexOutOfRange):
            monotone_E(PHI_PLUS, 4)


class TestMajorization:
    def test_examples(self):
        assert majorizes(S([0.6, 0.3, 0.1]), S([0.5, 0.4, 0.1]))
        a = S([0.5, 0.3, 0.2])
        assert majorizes(a, a)
        x, y = S([0.6, 0.2, 0.2]), S([0.5, 0.4, 0.1])
        assert not majorizes(x, y) and not majorizes(y, x)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            majorizes(S([0.5, 0.5]), PHI_PLUS)


class TestMaxProb:
    def test_four_fifths(self):
        r = max_prob(S([0.6, 0.3, 0.1]), S([0.5, 0.4, 0.1]))
        assert r.p == pytest.approx(0.8, abs=1e-12)
        assert r.argmin_l == 2

    def test_three_tenths(self):
        assert max_prob(S([0.5, 0.4, 0.1]), PHI_PLUS).p == pytest.approx(0.3, abs=1e-12)
        assert max_prob(S([0.6, 0.3, 0.1]), PHI_PLUS).p == pytest.approx(0.3, abs=1e-12)

    def test_identity(self):
        v = S([0.45, 0.35, 0.2])
        assert max_prob(v, v) == (1.0, 1)

    def test_degenerate_target(self):
        with pytest.raises(DegenerateInput):
            max_prob(PHI_PLUS, S([0.5, 0.5, 0.0], allow_degenerate=True))

    def test_matches_tail_ratio_oracle(self, rng):
        for _ in range(2000):
            d = int(rng.integers(2, 7))
            a, b = random_schmidt(rng, d), random_schmidt(rng, d)
            assert max_prob(S(a), S(b)).p == pytest.approx(prob_bipartite(a, b), rel=1e-12)

    def test_p_one_iff_majorization(self, rng):
        for _ in range(10_000):
            d = int(rng.integers(2, 7))
            a, b = S(random_schmidt(rng, d)), S(random_schmidt(rng, d))
            one = max_prob(a, b).p >= 1.0
            assert one == locc_possible(a, b) == majorizes(b, a)

    def test_multiplicativity_bound(self, rng):
        for _ in range(2000):
            d = int(rng.integers(2, 6))
            a, c, b = (S(random_schmidt(rng, d)) for _ in range(3))
            assert max_prob(a, b).p >= max_prob(a, c).p * max_prob(c, b).p - 1e-12


class TestLattice:
    def test_meet_examples(self):
        m = lattice_meet(S([0.6, 0.2, 0.2]), S([0.5, 0.4, 0.1]))
        assert m.coeffs == pytest.approx((0.5, 0.3, 0.2), abs=1e-15)
        a = S([0.5, 0.3, 0.2])
        assert lattice_meet(a, a) is a
        assert lattice_meet(PHI_PLUS, S([0.7, 0.2, 0.1])) is PHI_PLUS

    def test_join_examples(self):
        j = lattice_join(S([0.6, 0.2, 0.2]), S([0.5, 0.4, 0.1]))
        assert j.coeffs == pytest.approx((0.6, 0.3, 0.1), abs=1e-15)
        a = S([0.5, 0.3, 0.2])
        assert lattice_join(a, a) is a

    def test_join_incomparable_pair_against_grid(self):
        a, b = S([0.55, 0.25, 0.2]), S([0.5, 0.35, 0.15])
        assert not majorizes(a, b) and not majorizes(b, a)
        j = lattice_join(a, b)
        # prefix maxima (0.55, 0.85, 1)
        assert j.coeffs == pytest.approx((0.55, 0.30, 0.15), abs=1e-15)
        uppers = [c for c in simplex_grid(3, 0.01) if majorized(a.coeffs, c) and majorized(b.coeffs, c)]
        assert uppers
        assert all(majorized(j.coeffs, c) for c in uppers)
        assert min(uppers, key=lambda c: max(abs(x - y) for x, y in zip(c, j.coeffs))) == pytest.approx(j.coeffs, abs=1e-12)

    def test_join_flattening(self):
        a, b = S([0.4, 0.2, 0.2, 0.2]), S([0.3, 0.3, 0.3, 0.1])
        j = lattice_join(a, b)
        assert j.coeffs == pytest.approx((0.4, 0.25, 0.25, 0.1), abs=1e-15)
        uppers = [c for c in simplex_grid(4, 0.05) if majorized(a.coeffs, c) and majorized(b.coeffs, c)]
        assert all(majorized(j.coeffs, c) for c in uppers)

    def test_meet_against_grid(self):
        a, b = S([0.6, 0.2, 0.2]), S([0.5, 0.4, 0.1])
        m = lattice_meet(a, b)
        lowers = [c for c in simplex_grid(3, 0.01) if majorized(c, a.coeffs) and majorized(c, b.coeffs)]
        assert all(majorized(c, m.coeffs) for c in lowers)

    def test_universality_random(self, rng):
        for _ in range(200):
            d = int(rng.integers(3, 7))
            a, b = S(random_schmidt(rng, d)), S(random_schmidt(rng, d))
            j, m = lattice_join(a, b), lattice_meet(a, b)
            assert majorizes(j, a) and majorizes(j, b)
            assert majorizes(a, m) and majorizes(b, m)
            for _ in range(20):
                c = S(random_schmidt(rng, d))
                if majorizes(c, a) and majorizes(c, b):
                    assert majorizes(c, j)
                if majorizes(a, c) and majorizes(b, c):
                    assert majorizes(m, c)


class TestInterval:
    def test_examples(self):
        psi, phi = S([0.5, 0.4, 0.1]), S([0.6, 0.3, 0.1])
        assert in_interval(psi, psi, phi)
        assert in_interval(S([0.55, 0.35, 0.1]), psi, phi)
        assert not in_interval(S([0.4, 0.4, 0.2]), psi, phi)


class TestIsIntermediate:
    PSI, PHI = S([0.7, 0.2, 0.1]), S([0.5, 0.3, 0.2])

    def test_hand_example(self):
        chi = S([0.6, 0.25, 0.15])
        assert max_prob(self.PSI, chi).p == pytest.approx(2 / 3, abs=1e-15)
        assert max_prob(chi, self.PHI).p == pytest.approx(0.75, abs=1e-15)
        v = is_intermediate(self.PSI, chi, self.PHI)
        assert v.verdict and v.l == 3

    def test_straight_segment(self):
        for t in (0.1, 0.37, 0.8):
            chi = S([(1 - t) * a + t * b for a, b in zip(self.PSI.coeffs, self.PHI.coeffs)])
            assert is_intermediate(self.PSI, chi, self.PHI).verdict

    def test_maximally_entangled_is_not(self):
        assert max_prob(self.PSI, PHI_PLUS).p == pytest.approx(0.3, abs=1e-15)
        v = is_intermediate(self.PSI, PHI_PLUS, self.PHI)
        assert not v.verdict

    def test_trivial_endpoint(self):
        v = is_intermediate(self.PSI, self.PSI, self.PHI)
        assert not v.verdict and v.reason == "TrivialEndpoint"

    def test_interval_implies_intermediate(self, rng):
        found = 0
        for _ in range(3000):
            d = int(rng.integers(3, 6))
            psi, phi = S(random_schmidt(rng, d)), S(random_schmidt(rng, d))
            if not majorizes(phi, psi):
                continue
            t = float(rng.uniform(0.05, 0.95))
            chi = S([(1 - t) * a + t * b for a, b in zip(psi.coeffs, phi.coeffs)])
            if in_interval(chi, psi, phi) and not (chi.close_to(psi) or chi.close_to(phi)):
                found += 1
                assert is_intermediate(psi, chi, phi).verdict
        assert found > 20

    def test_equality_exactly_when_verdict(self, rng):
        for _ in range(500):
            psi, chi, phi = (S(random_schmidt(rng, 3)) for _ in range(3))
            v = is_intermediate(psi, chi, phi)
            gap = max_prob(psi, phi).p - max_prob(psi, chi).p * max_prob(chi, phi).p
            assert v.verdict == (abs(gap) <= 1e-10)


class TestOsbp:
    def test_examples(self):
        assert osbp_direct_possible(S([0.7, 0.2, 0.1]), S([0.5, 0.3, 0.2]))
        assert not osbp_direct_possible(S([0.8, 0.1, 0.1]), S([0.5, 0.4, 0.1]))
        assert not osbp_direct_possible(S([0.5, 0.3, 0.2]), S([0.7, 0.2, 0.1]))

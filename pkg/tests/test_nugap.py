import numpy as np
import pytest

from twindisc.lti import DiscreteTransferFunction, SimoModel
from twindisc.nugap import (
    NuGapMatrix,
    UnitCirclePoleError,
    argmin_cumulative,
    chordal_distance,
    nugap,
    select_nominal,
    _winding_number,
)

from helpers import random_simo, random_stable_tf, static_gain_model


def grassmann_distance(p1, p2):
    """Independent oracle: sine of the angle between the graph subspaces."""
    a = np.concatenate([[1.0], np.asarray(p1, dtype=complex).ravel()])
    b = np.concatenate([[1.0], np.asarray(p2, dtype=complex).ravel()])
    cos2 = abs(np.vdot(a, b)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real)
    return float(np.sqrt(max(1.0 - cos2, 0.0)))


class TestChordalDistance:
    def test_identical_responses(self):
        assert chordal_distance([1 + 2j, 0.5], [1 + 2j, 0.5]) == 0.0

    def test_scalar_zero_vs_one(self):
        assert chordal_distance([0.0], [1.0]) == pytest.approx(1 / np.sqrt(2), abs=1e-12)

    def test_scalar_antipodal(self):
        assert chordal_distance([1.0], [-1.0]) == pytest.approx(1.0, abs=1e-12)

    def test_matches_subspace_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(300):
            m = int(rng.integers(1, 4))
            p1 = rng.normal(size=m) + 1j * rng.normal(size=m)
            p2 = rng.normal(size=m) + 1j * rng.normal(size=m)
            assert chordal_distance(p1, p2) == pytest.approx(
                grassmann_distance(p1, p2), rel=1e-9, abs=1e-12
            )

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            chordal_distance([1.0], [1.0, 2.0])


class TestNugap:
    def test_self_distance_is_exactly_zero(self):
        rng = np.random.default_rng(1)
        model = random_simo(rng, degree=3)
        assert nugap(model, model, grid_size=128) == 0.0

    def test_static_gains_closed_form(self):
        gap = nugap(static_gain_model(0.0), static_gain_model(1.0), grid_size=256)
        assert gap == pytest.approx(1 / np.sqrt(2), abs=1e-6)

    def test_range_and_symmetry(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            a = random_simo(rng, degree=2)
            b = random_simo(rng, degree=3)
            g_ab = nugap(a, b, grid_size=256)
            g_ba = nugap(b, a, grid_size=256)
            assert 0.0 <= g_ab <= 1.0
            assert g_ab == pytest.approx(g_ba, abs=1e-9)

    def test_triangle_inequality(self):
        rng = np.random.default_rng(3)
        for _ in range(15):
            a, b, c = (random_simo(rng, degree=2) for _ in range(3))
            gab = nugap(a, b, grid_size=256)
            gbc = nugap(b, c, grid_size=256)
            gac = nugap(a, c, grid_size=256)
            assert gac <= gab + gbc + 1e-6

    def test_grid_doubling_stability(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            a = random_simo(rng, degree=3)
            b = random_simo(rng, degree=3)
            g1 = nugap(a, b, grid_size=512)
            g2 = nugap(a, b, grid_size=1024)
            assert abs(g1 - g2) < 1e-3

    def test_sample_time_mismatch_rejected(self):
        rng = np.random.default_rng(5)
        a = random_simo(rng, degree=2, sample_time=1.0)
        b = random_simo(rng, degree=2, sample_time=0.5)
        with pytest.raises(ValueError):
            nugap(a, b)

    def test_small_grid_rejected(self):
        with pytest.raises(ValueError):
            nugap(static_gain_model(0.0), static_gain_model(1.0), grid_size=32)

    def test_unit_circle_pole_raises(self):
        integrator = DiscreteTransferFunction([0.0, 1.0], [1.0, -1.0], 1.0)
        healthy = static_gain_model(1.0)
        with pytest.raises(UnitCirclePoleError):
            nugap(integrator, healthy, grid_size=128)

    def test_strict_winding_agrees_on_close_stable_pairs(self):
        rng = np.random.default_rng(6)
        base = random_stable_tf(rng, degree=2)
        num = np.asarray(base.numerator.coeffs) * 1.02
        near = DiscreteTransferFunction(num, base.denominator, base.sample_time)
        assert nugap(base, near, grid_size=256, strict_winding=True) == pytest.approx(
            nugap(base, near, grid_size=256), abs=1e-9
        )

    def test_winding_counter_on_synthetic_loop(self):
        # a delayed channel against a strong static gain drives det(I + P2* P1)
        # around the origin, which the strict mode must flag
        delay = DiscreteTransferFunction([0.0, 3.0], [1.0], 1.0)
        gain = DiscreteTransferFunction([3.0], [1.0], 1.0)
        winding, min_mag = _winding_number(delay, gain, 512)
        assert winding != 0 or min_mag < 1e-9
        assert nugap(delay, gain, grid_size=512, strict_winding=True) == 1.0


class TestSelection:
    def test_reference_cumulative_sums_pick_third_set(self):
        winner, tie = argmin_cumulative([2.93, 2.74, 2.22, 2.28])
        assert winner == 2
        assert not tie

    def test_barycenter_wins(self):
        # three perturbations of a base model in distinct directions: the base
        # sits at the family barycenter and must take the smallest sum
        ts = 1.0
        base_num = np.array([0.0, 0.5, 0.1])
        base_den = [1.0, -0.6, 0.08]

        def model(y_scale, u_scale, label):
            return SimoModel(
                tf_y=DiscreteTransferFunction(base_num * (1 + y_scale), base_den, ts),
                tf_u=DiscreteTransferFunction(base_num * (1 + u_scale), base_den, ts),
                label=label,
            )

        models = [
            model(0.0, 0.0, "base"),
            model(+0.2, 0.0, "dy+"),
            model(0.0, +0.2, "du+"),
            model(-0.2, 0.0, "dy-"),
        ]
        matrix, winner, tie = select_nominal(models, grid_size=256)
        assert winner == 0
        assert not tie
        assert matrix.cumulative[0] == min(matrix.cumulative)

    def test_two_identical_models_tie_at_lowest_index(self):
        rng = np.random.default_rng(7)
        model = random_simo(rng, degree=2)
        clone = SimoModel(tf_y=model.tf_y, tf_u=model.tf_u, label="clone")
        matrix, winner, tie = select_nominal([model, clone], grid_size=128)
        assert winner == 0
        assert tie
        assert matrix.cumulative[0] == matrix.cumulative[1]

    def test_needs_two_models(self):
        rng = np.random.default_rng(8)
        with pytest.raises(ValueError):
            select_nominal([random_simo(rng)], grid_size=128)

    def test_matrix_validation(self):
        with pytest.raises(ValueError):
            NuGapMatrix(["a", "b"], [[0.0, 0.5], [0.4, 0.0]])  # asymmetric
        with pytest.raises(ValueError):
            NuGapMatrix(["a", "b"], [[0.1, 0.5], [0.5, 0.0]])  # nonzero diagonal
        with pytest.raises(ValueError):
            NuGapMatrix(["a", "b"], [[0.0, 1.5], [1.5, 0.0]])  # out of range

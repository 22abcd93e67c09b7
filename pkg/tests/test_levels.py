import numpy as np
import pytest

from gibbsfit.errors import ValidationError
from gibbsfit.levels import (
    complement,
    full_classical_level,
    full_quantum_level,
    intersection,
    is_sublevel,
    make_level,
    tensor,
    trivial_level,
    union,
)
from gibbsfit.state_space import (
    HermitianOperator,
    classical_state,
    expectation,
    kmb_inner,
    pauli_x,
    pauli_y,
    pauli_z,
    uniform_state,
)
from conftest import random_density, random_diagonal, random_hermitian


class TestMakeLevel:
    def test_basis_is_kmb_orthonormal_and_centered(self, rng):
        sigma = random_density(rng, 4)
        ops = [random_hermitian(rng, 4) for _ in range(3)]
        lvl = make_level(ops, "kmb", sigma)
        for i, bi in enumerate(lvl.basis):
            assert expectation(sigma, bi) == pytest.approx(0.0, abs=1e-10)
            for j, bj in enumerate(lvl.basis):
                want = 1.0 if i == j else 0.0
                assert kmb_inner(sigma, bi, bj) == pytest.approx(want, abs=1e-9)

    def test_generator_reconstruction(self, rng):
        sigma = random_density(rng, 3)
        ops = [random_hermitian(rng, 3) for _ in range(2)]
        lvl = make_level(ops, "kmb", sigma)
        for a in lvl.retained:
            rebuilt = lvl.gen_offsets[a] * np.eye(3, dtype=complex)
            for b, basis_op in enumerate(lvl.basis):
                rebuilt = rebuilt + lvl.gen_coeffs[a, b] * basis_op.matrix
            assert np.allclose(rebuilt, lvl.generators[a].matrix, atol=1e-9)

    def test_dependent_generators_dropped(self, rng):
        sigma = random_density(rng, 4, kind="classical")
        a = random_diagonal(rng, 4)
        b = random_diagonal(rng, 4)
        dep = HermitianOperator.from_diagonal(2.0 * a.diagonal - b.diagonal)
        lvl = make_level([a, b, dep], "kmb", sigma)
        assert lvl.n_params == 2
        assert lvl.retained == (0, 1)

    def test_identity_direction_is_absorbed(self, rng):
        sigma = random_density(rng, 3, kind="classical")
        shifted = HermitianOperator.from_diagonal(np.ones(3) * 7.0)
        lvl = make_level([shifted], "kmb", sigma)
        assert lvl.n_params == 0
        assert lvl.is_trivial

    def test_kmb_needs_reference(self):
        with pytest.raises(ValidationError):
            make_level([pauli_z()], "kmb")

    def test_hs_level_without_reference(self):
        lvl = make_level([pauli_z()], "hs", dim=2)
        assert lvl.n_params == 1


class TestLevelQueries:
    def test_trivial_and_full_dims(self, rng):
        sigma = random_density(rng, 5, kind="classical")
        assert trivial_level(5, "kmb", sigma).dim == 1
        assert full_classical_level(5, "kmb", sigma).dim == 5
        squant = random_density(rng, 3)
        assert full_quantum_level(3, "kmb", squant).dim == 9

    def test_is_sublevel(self, rng):
        sigma = uniform_state(2)
        ising = make_level([pauli_z()], "kmb", sigma)
        heis = make_level([pauli_x(), pauli_y(), pauli_z()], "kmb", sigma)
        assert is_sublevel(ising, heis)
        assert not is_sublevel(heis, ising)
        assert is_sublevel(ising, ising)

    def test_sublevel_requires_same_context(self, rng):
        s1 = random_density(rng, 3, kind="classical")
        s2 = random_density(rng, 3, kind="classical")
        l1 = make_level([random_diagonal(rng, 3)], "kmb", s1)
        l2 = make_level([random_diagonal(rng, 3)], "kmb", s2)
        with pytest.raises(ValidationError):
            is_sublevel(l1, l2)


class TestSetOperations:
    def test_union_intersection_dimension_identity(self, rng):
        # dim(A+B) + dim(A&B) = dim A + dim B for generic spans
        sigma = random_density(rng, 4, kind="classical")
        x, y, z = (random_diagonal(rng, 4) for _ in range(3))
        la = make_level([x, y], "kmb", sigma, label="A")
        lb = make_level([y, z], "kmb", sigma, label="B")
        u = union(la, lb)
        i = intersection(la, lb)
        assert u.dim + i.dim == la.dim + lb.dim
        assert is_sublevel(i, la) and is_sublevel(i, lb)
        assert is_sublevel(la, u) and is_sublevel(lb, u)
        assert i.label == "A&B" and u.label == "A+B"

    def test_intersection_recovers_shared_direction(self, rng):
        sigma = random_density(rng, 4, kind="classical")
        shared = random_diagonal(rng, 4)
        la = make_level([shared, random_diagonal(rng, 4)], "kmb", sigma)
        lb = make_level([shared, random_diagonal(rng, 4)], "kmb", sigma)
        i = intersection(la, lb)
        assert i.n_params == 1
        # the recovered direction spans the same line as `shared` (centered)
        coeff = kmb_inner(sigma, i.basis[0], shared)
        resid = shared.matrix - expectation(sigma, shared) * np.eye(4) \
            - coeff * i.basis[0].matrix
        assert np.max(np.abs(resid)) < 1e-8

    def test_intersection_with_trivial(self, rng):
        sigma = random_density(rng, 3, kind="classical")
        la = make_level([random_diagonal(rng, 3)], "kmb", sigma)
        assert intersection(la, trivial_level(3, "kmb", sigma)).is_trivial

    def test_complement_is_orthogonal_and_fills(self, rng):
        sigma = random_density(rng, 4)
        amb = make_level([random_hermitian(rng, 4) for _ in range(4)], "kmb", sigma)
        sub = make_level([amb.generators[0]], "kmb", sigma)
        comp = complement(sub, amb, sigma)
        assert comp.n_params == amb.n_params - sub.n_params
        for cb in comp.basis:
            for sb in sub.basis:
                assert kmb_inner(sigma, cb, sb) == pytest.approx(0.0, abs=1e-9)

    def test_complement_requires_containment(self, rng):
        sigma = random_density(rng, 3, kind="classical")
        la = make_level([random_diagonal(rng, 3)], "kmb", sigma)
        lb = make_level([random_diagonal(rng, 3)], "kmb", sigma)
        with pytest.raises(ValidationError):
            complement(la, lb, sigma)

    def test_tensor_dims_multiply(self):
        s2 = classical_state([0.4, 0.6])
        s3 = classical_state([0.2, 0.3, 0.5])
        la = make_level([HermitianOperator.from_diagonal([1.0, -1.0])], "kmb", s2)
        lb = make_level([HermitianOperator.from_diagonal([1.0, 0.0, -1.0])], "kmb", s3)
        lab = tensor(la, lb)
        assert lab.dim_hilbert == 6
        # identity x B, A x identity and A x B are all in the span
        assert lab.dim >= 4

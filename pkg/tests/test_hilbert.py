"""Truncated tensor algebra: labels, operators, states, partial trace."""

import numpy as np
import pytest

from cqdeph.errors import InvalidArgumentError
from cqdeph.hilbert import (
    FockCutoff,
    OperatorMatrix,
    StateVector,
    TensorBasisLabel,
    annihilation,
    coherent_state,
    identity,
    number_operator,
    number_state,
    partial_trace,
    tensor3,
)


def test_cutoff_dimensions():
    cut = FockCutoff(3, 5)
    assert cut.dim_a == 4
    assert cut.dim_b == 6
    assert cut.dim == 2 * 4 * 6


def test_cutoff_rejects_negative():
    with pytest.raises(InvalidArgumentError):
        FockCutoff(-1, 2)


def test_label_flat_roundtrip():
    cut = FockCutoff(2, 4)
    seen = set()
    for flat in range(cut.dim):
        lab = TensorBasisLabel.from_flat(flat, cut)
        assert lab.flat_index(cut) == flat
        seen.add((lab.m, lab.n, lab.i))
    assert len(seen) == cut.dim


def test_label_ordering_is_qubit_mode_a_mode_b():
    # flat index factorizes as (i * dim_a + m) * dim_b + n
    cut = FockCutoff(2, 3)
    assert TensorBasisLabel(0, 0, 0).flat_index(cut) == 0
    assert TensorBasisLabel(0, 1, 0).flat_index(cut) == 1
    assert TensorBasisLabel(1, 0, 0).flat_index(cut) == cut.dim_b
    assert TensorBasisLabel(0, 0, 1).flat_index(cut) == cut.dim_a * cut.dim_b


def test_label_out_of_range():
    cut = FockCutoff(2, 2)
    with pytest.raises(InvalidArgumentError):
        TensorBasisLabel(3, 0, 0).flat_index(cut)
    with pytest.raises(InvalidArgumentError):
        TensorBasisLabel(0, 0, 2)


def test_annihilation_matrix_elements():
    a = annihilation(4).mat
    for n in range(1, 5):
        assert a[n - 1, n] == pytest.approx(np.sqrt(n))
    assert np.count_nonzero(a) == 4


def test_number_operator_diagonal():
    n = number_operator(5).mat
    assert np.allclose(n, np.diag(np.arange(6)))


def test_commutator_truncation_corner():
    a = annihilation(6).mat
    comm = a @ a.conj().T - a.conj().T @ a
    assert np.allclose(comm[:-1, :-1], np.eye(6))
    # the very top level absorbs the truncation error
    assert comm[6, 6] == pytest.approx(-6.0)


def test_tensor3_shapes_and_cutoff():
    cut = FockCutoff(2, 3)
    op = tensor3(np.eye(2), annihilation(2).mat, identity(cut.dim_b).mat)
    assert op.mat.shape == (cut.dim, cut.dim)
    assert op.cutoff == cut


def test_tensor3_acts_on_correct_factor():
    cut = FockCutoff(2, 3)
    num_a = tensor3(np.eye(2), number_operator(2).mat, identity(cut.dim_b).mat)
    for lab in (TensorBasisLabel(2, 1, 0), TensorBasisLabel(1, 3, 1)):
        k = lab.flat_index(cut)
        assert num_a.mat[k, k] == pytest.approx(lab.m)


def test_operator_matrix_is_readonly():
    op = identity(3)
    with pytest.raises(ValueError):
        op.mat[0, 0] = 5.0


def test_state_number_state_amplitude():
    cut = FockCutoff(1, 2)
    lab = TensorBasisLabel(1, 2, 1)
    psi = number_state(lab, cut)
    assert psi.vec[lab.flat_index(cut)] == 1.0
    assert np.count_nonzero(psi.vec) == 1


def test_state_normalization_enforced():
    with pytest.raises(InvalidArgumentError):
        StateVector(np.array([1.0, 1.0]))
    psi = StateVector.normalized(np.array([1.0, 1.0]))
    assert np.linalg.norm(psi.vec) == pytest.approx(1.0)
    with pytest.raises(InvalidArgumentError):
        StateVector.normalized(np.zeros(4))


def test_density_is_projector():
    cut = FockCutoff(1, 1)
    rng = np.random.default_rng(0)
    psi = StateVector.normalized(
        rng.normal(size=cut.dim) + 1j * rng.normal(size=cut.dim), cut)
    rho = psi.density()
    assert np.allclose(rho.mat @ rho.mat, rho.mat)
    assert np.trace(rho.mat) == pytest.approx(1.0)


def test_coherent_state_poisson_weights():
    alpha = 0.6 + 0.3j
    cut = FockCutoff(14, 1)
    psi = coherent_state("A", alpha, cut)
    p0 = abs(psi.vec[TensorBasisLabel(0, 0, 0).flat_index(cut)]) ** 2
    p1 = abs(psi.vec[TensorBasisLabel(1, 0, 0).flat_index(cut)]) ** 2
    assert p1 / p0 == pytest.approx(abs(alpha) ** 2, rel=1e-10)
    assert np.linalg.norm(psi.vec) == pytest.approx(1.0)


def test_coherent_state_truncation_warning():
    with pytest.warns(UserWarning, match="truncation tail"):
        coherent_state("A", 3.0, FockCutoff(2, 1))


def test_partial_trace_reduces_to_qubit():
    cut = FockCutoff(2, 2)
    lab = TensorBasisLabel(1, 2, 1)
    rho = number_state(lab, cut).density()
    q = partial_trace(rho, ("qubit",))
    assert q.mat.shape == (2, 2)
    assert q.mat[1, 1] == pytest.approx(1.0)


def test_partial_trace_is_trace_preserving(rng):
    cut = FockCutoff(2, 3)
    psi = StateVector.normalized(
        rng.normal(size=cut.dim) + 1j * rng.normal(size=cut.dim), cut)
    rho = psi.density()
    for keep in (("qubit",), ("A",), ("B",), ("qubit", "B")):
        red = partial_trace(rho, keep)
        assert np.trace(red.mat) == pytest.approx(1.0)
        assert np.allclose(red.mat, red.mat.conj().T)


def test_partial_trace_of_product_state():
    # qubit part of |1,0,1><1,0,1| x anything is |1><1|
    cut = FockCutoff(1, 1)
    psi = number_state(TensorBasisLabel(1, 0, 1), cut)
    rho = psi.density()
    ab = partial_trace(rho, ("A", "B"))
    lab = TensorBasisLabel(1, 0, 0)  # m=1, n=0 inside the (A, B) factor
    k = 1 * cut.dim_b + 0
    assert ab.mat[k, k] == pytest.approx(1.0)


def test_partial_trace_needs_cutoff():
    rho = OperatorMatrix(np.eye(8) / 8.0)
    with pytest.raises(InvalidArgumentError):
        partial_trace(rho, ("qubit",))

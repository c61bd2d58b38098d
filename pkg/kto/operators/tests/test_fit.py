"""Tests for kernel Koopman and Perron-Frobenius estimation."""

import numpy as np
import pytest

from kto.core.exceptions import IndexOutOfRangeError, InputError, SingularProblemError
from kto.kernels.functions import evaluate, gram_pack
from kto.kernels.models import KernelSpec
from kto.operators.fit import fit, solve_eigenproblem, sort_spectrum
from kto.operators.models import OperatorKind
from kto.tensordata.models import PairedDataset, SnapshotSet, from_trajectory


@pytest.fixture
def noisy_rotation() -> PairedDataset:
    """Pairs from a noisy planar rotation, which has a complex spectrum."""
    rng = np.random.default_rng(21)
    angle = 0.3
    rotation = np.array(
        [[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]]
    )
    states = [rng.normal(size=2)]
    for _ in range(59):
        states.append(0.97 * rotation @ states[-1] + 0.05 * rng.normal(size=2))
    return from_trajectory(SnapshotSet.from_frames(np.array(states)), 1)


@pytest.mark.unit
class TestSmallProblems:
    """Test closed-form cases."""

    def test_single_pair(self) -> None:
        """Test that n=1 gives lambda = k(y, x)."""
        data = PairedDataset(
            x=SnapshotSet.from_frames([0.0]),
            y=SnapshotSet.from_frames([1.0]),
            lag_steps=1,
        )
        decomp = fit(data, KernelSpec.gaussian(1.0), epsilon=0.0)
        assert decomp.num_eigs == 1
        expected = evaluate(KernelSpec(), [1.0], [0.0])
        assert decomp.eigenvalue(1) == pytest.approx(expected)
        assert decomp.eigenvalue(1).imag == 0.0

    @pytest.mark.parametrize("kind", list(OperatorKind))
    def test_identity_dynamics(self, kind: OperatorKind) -> None:
        """Test that y = x yields eigenvalue one with full multiplicity."""
        x = SnapshotSet.from_frames(np.arange(5.0))
        data = PairedDataset(x=x, y=x, lag_steps=1)
        decomp = fit(data, KernelSpec.gaussian(1.0), epsilon=0.0, kind=kind)
        np.testing.assert_allclose(decomp.eigenvalues, 1.0, atol=1e-8)

    def test_default_num_eigs(self) -> None:
        """Test that the default keeps min(10, n) eigenpairs."""
        rng = np.random.default_rng(0)
        traj = SnapshotSet.from_frames(rng.normal(size=30))
        decomp = fit(from_trajectory(traj, 1), KernelSpec(), epsilon=0.1)
        assert decomp.num_eigs == 10
        small = fit(from_trajectory(traj.select(range(4)), 1), KernelSpec(), 0.1)
        assert small.num_eigs == 3


@pytest.mark.unit
class TestInvariants:
    """Test ordering, normalization and eigen-relations."""

    @pytest.mark.parametrize("kind", list(OperatorKind))
    def test_sorted_and_conjugate_closed(
        self, noisy_rotation: PairedDataset, kind: OperatorKind
    ) -> None:
        """Test the sort order and conjugate symmetry of the full spectrum."""
        n = noisy_rotation.count
        decomp = fit(noisy_rotation, KernelSpec.gaussian(1.0), 0.01, kind, num_eigs=n)
        values = decomp.eigenvalues
        np.testing.assert_array_equal(sort_spectrum(values), np.arange(n))
        assert np.any(np.abs(values.imag) > 1e-6)
        conjugates = np.sort_complex(np.conj(values))
        np.testing.assert_allclose(np.sort_complex(values), conjugates, atol=1e-10)

    @pytest.mark.parametrize("kind", list(OperatorKind))
    def test_normalization(
        self, noisy_rotation: PairedDataset, kind: OperatorKind
    ) -> None:
        """Test that each eigenfunction peaks at exactly 1 on the training points."""
        decomp = fit(noisy_rotation, KernelSpec.gaussian(1.0), 0.01, kind, num_eigs=6)
        pack = gram_pack(decomp.kernel, noisy_rotation)
        values = pack.g_xx @ decomp.coefficients
        moduli = np.abs(values)
        np.testing.assert_allclose(moduli.max(axis=0), 1.0, rtol=1e-12)
        peaks = values[np.argmax(moduli, axis=0), np.arange(6)]
        np.testing.assert_allclose(peaks, 1.0, atol=1e-12)

    def test_koopman_eigen_relation(self, noisy_rotation: PairedDataset) -> None:
        """Test (G_XX + eps I)^-1 G_YX alpha = lambda alpha."""
        eps = 0.05
        decomp = fit(noisy_rotation, KernelSpec.gaussian(0.8), eps, "koopman", 5)
        pack = gram_pack(decomp.kernel, noisy_rotation)
        regularized = pack.g_xx + eps * np.eye(pack.n)
        lhs = pack.g_yx @ decomp.coefficients
        rhs = regularized @ decomp.coefficients * decomp.eigenvalues
        np.testing.assert_allclose(lhs, rhs, atol=1e-8)

    def test_perron_frobenius_eigen_relation(
        self, noisy_rotation: PairedDataset
    ) -> None:
        """Test that v = (G_XX + eps I) alpha solves the PF eigenproblem."""
        eps = 0.05
        decomp = fit(noisy_rotation, KernelSpec.gaussian(0.8), eps, "pf", 5)
        pack = gram_pack(decomp.kernel, noisy_rotation)
        regularized = pack.g_xx + eps * np.eye(pack.n)
        v = regularized @ decomp.coefficients
        np.testing.assert_allclose(
            pack.g_xy @ v, regularized @ v * decomp.eigenvalues, atol=1e-8
        )

    def test_metadata_carried(self) -> None:
        """Test that lag, dt and training snapshots are kept."""
        traj = SnapshotSet.from_frames(np.linspace(0, 3, 20), dt=0.5)
        data = from_trajectory(traj, 2)
        decomp = fit(data, KernelSpec(), 0.1, num_eigs=3)
        assert decomp.lag_steps == 2
        assert decomp.dt == 0.5
        assert decomp.lag_time == pytest.approx(1.0)
        assert decomp.training_x is data.x

    def test_precomputed_gram_matches(self, noisy_rotation: PairedDataset) -> None:
        """Test that passing a Gram pack gives the same result."""
        kernel = KernelSpec.gaussian(1.0)
        pack = gram_pack(kernel, noisy_rotation)
        direct = fit(noisy_rotation, kernel, 0.1, num_eigs=4)
        reused = fit(noisy_rotation, kernel, 0.1, num_eigs=4, pack=pack)
        np.testing.assert_array_equal(direct.eigenvalues, reused.eigenvalues)


@pytest.mark.unit
class TestErrors:
    """Test precondition and numerical failures."""

    def test_duplicate_snapshots_are_singular(self) -> None:
        """Test that repeated snapshots without regularization are rejected."""
        x = SnapshotSet.from_frames([0.0, 0.0, 1.0])
        y = SnapshotSet.from_frames([1.0, 1.0, 2.0])
        with pytest.raises(SingularProblemError):
            fit(PairedDataset(x=x, y=y, lag_steps=1), KernelSpec(), epsilon=0.0)

    def test_regularization_removes_singularity(self) -> None:
        """Test that a positive epsilon makes the same problem solvable."""
        x = SnapshotSet.from_frames([0.0, 0.0, 1.0])
        y = SnapshotSet.from_frames([1.0, 1.0, 2.0])
        decomp = fit(PairedDataset(x=x, y=y, lag_steps=1), KernelSpec(), epsilon=0.1)
        assert decomp.num_eigs == 3

    @pytest.mark.parametrize("num_eigs", [0, 5])
    def test_num_eigs_range(self, num_eigs: int) -> None:
        """Test that num_eigs must lie in 1..n."""
        data = from_trajectory(SnapshotSet.from_frames(np.arange(5.0)), 1)
        with pytest.raises(InputError):
            fit(data, KernelSpec(), 0.1, num_eigs=num_eigs)

    def test_negative_epsilon(self) -> None:
        """Test that epsilon must be nonnegative."""
        data = from_trajectory(SnapshotSet.from_frames(np.arange(5.0)), 1)
        with pytest.raises(InputError):
            fit(data, KernelSpec(), -1.0)

    def test_index_out_of_range(self) -> None:
        """Test 1-based index validation."""
        data = from_trajectory(SnapshotSet.from_frames(np.arange(5.0)), 1)
        decomp = fit(data, KernelSpec(), 0.1, num_eigs=2)
        with pytest.raises(IndexOutOfRangeError):
            decomp.eigenfunction(0)
        with pytest.raises(IndexOutOfRangeError):
            decomp.eigenvalue(3)

    def test_solver_entry_point(self) -> None:
        """Test solving directly from Gram matrices."""
        data = from_trajectory(SnapshotSet.from_frames(np.arange(6.0)), 1)
        pack = gram_pack(KernelSpec(), data)
        eigenvalues, coefficients = solve_eigenproblem(pack, 0.1, "koopman", 2)
        assert eigenvalues.shape == (2,)
        assert coefficients.shape == (5, 2)

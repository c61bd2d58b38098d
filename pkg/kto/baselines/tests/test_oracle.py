"""Tests for the explicit-feature covariance oracle and its Gram-matrix duality."""

import numpy as np
import pytest
from pydantic import ValidationError

from kto.baselines.models import PolynomialFeatureMap
from kto.baselines.oracle import covariance_oracle
from kto.core.exceptions import FeatureDimensionTooLargeError, InputError
from kto.kernels.functions import gram_matrix
from kto.operators.fit import fit
from kto.operators.models import OperatorKind
from kto.tensordata.models import PairedDataset, SnapshotSet


def nonzero(values: np.ndarray, scale: float) -> np.ndarray:
    return values[np.abs(values) > 1e-6 * scale]


@pytest.mark.unit
class TestFeatureMap:
    """Test that explicit features reproduce the polynomial kernel."""

    @pytest.mark.parametrize(
        ("dim", "degree", "offset", "expected"),
        [(3, 2, 1.0, 10), (3, 2, 0.0, 6), (1, 1, 0.0, 1), (4, 3, 2.0, 35)],
    )
    def test_dimension(
        self, dim: int, degree: int, offset: float, expected: int
    ) -> None:
        """Test the monomial count with and without the constant coordinate."""
        feature_map = PolynomialFeatureMap(degree=degree, offset=offset)
        assert feature_map.dimension(dim) == expected
        assert feature_map.transform(np.zeros((2, dim))).shape == (2, expected)

    @pytest.mark.parametrize("offset", [0.0, 1.0, 2.5])
    @pytest.mark.parametrize("degree", [1, 2, 3])
    def test_inner_products_match_kernel(self, degree: int, offset: float) -> None:
        """Test <phi(x), phi(x')> = (<x, x'> + c)^p."""
        rng = np.random.default_rng(degree)
        a, b = rng.normal(size=(6, 3)), rng.normal(size=(4, 3))
        feature_map = PolynomialFeatureMap(degree=degree, offset=offset)
        explicit = feature_map.transform(a) @ feature_map.transform(b).T
        expected = gram_matrix(feature_map.kernel(), a, b)
        np.testing.assert_allclose(explicit, expected, rtol=1e-12, atol=1e-12)

    def test_too_many_features(self) -> None:
        """Test the dense feature limit."""
        with pytest.raises(FeatureDimensionTooLargeError):
            PolynomialFeatureMap(degree=2).transform(np.zeros((1, 1000)))

    def test_invalid_parameters(self) -> None:
        """Test that degree and offset are validated."""
        with pytest.raises(ValidationError):
            PolynomialFeatureMap(degree=0)
        with pytest.raises(ValidationError):
            PolynomialFeatureMap(offset=-1.0)


@pytest.mark.unit
class TestOracle:
    """Test closed-form covariance eigenvalues."""

    def test_single_scalar_pair(self) -> None:
        """Test x = 2, y = 1 with phi(x) = x gives 0.5."""
        data = PairedDataset(
            x=SnapshotSet.from_frames([2.0]),
            y=SnapshotSet.from_frames([1.0]),
            lag_steps=1,
        )
        values = covariance_oracle(data, PolynomialFeatureMap(degree=1, offset=0.0))
        np.testing.assert_allclose(values, [0.5])

    @pytest.mark.parametrize("kind", list(OperatorKind))
    def test_identity_dynamics(self, kind: OperatorKind) -> None:
        """Test that Y = X gives leading eigenvalue 1."""
        x = SnapshotSet.from_frames(np.random.default_rng(1).normal(size=(8, 2)))
        data = PairedDataset(x=x, y=x, lag_steps=1)
        values = covariance_oracle(data, PolynomialFeatureMap(degree=2), 0.0, kind)
        assert values[0] == pytest.approx(1.0, abs=1e-8)

    def test_negative_regularization(self) -> None:
        """Test that eps_tilde must be nonnegative."""
        x = SnapshotSet.from_frames([1.0, 2.0])
        with pytest.raises(InputError):
            covariance_oracle(
                PairedDataset(x=x, y=x, lag_steps=1), PolynomialFeatureMap(), -0.1
            )


@pytest.mark.unit
class TestSpectralDuality:
    """Test that Gram and covariance formulations share nonzero eigenvalues."""

    @pytest.mark.parametrize("trial", range(25))
    def test_random_problems(self, trial: int) -> None:
        """Test agreement within 1e-8 relative for both operators."""
        rng = np.random.default_rng(100 + trial)
        n = (5, 10, 30)[trial % 3]
        dim = (1, 2, 4)[(trial // 3) % 3]
        degree = (1, 2)[trial % 2]
        eps_tilde = 0.01
        x = rng.normal(size=(n, dim))
        y = 0.8 * x + 0.3 * rng.normal(size=(n, dim))
        data = PairedDataset(
            x=SnapshotSet.from_frames(x), y=SnapshotSet.from_frames(y), lag_steps=1
        )
        feature_map = PolynomialFeatureMap(degree=degree, offset=1.0)
        for kind in OperatorKind:
            oracle = covariance_oracle(data, feature_map, eps_tilde, kind)
            gram = fit(data, feature_map.kernel(), n * eps_tilde, kind, num_eigs=n)
            scale = float(np.abs(oracle).max())
            expected = nonzero(oracle, scale)
            actual = nonzero(gram.eigenvalues, scale)
            assert actual.size == expected.size
            np.testing.assert_allclose(actual, expected, rtol=1e-8, atol=1e-10 * scale)

    def test_reference_case(self) -> None:
        """Test n=20, d=3, degree 2, eps_tilde 0.01 against fit with eps 0.2."""
        rng = np.random.default_rng(20)
        x = rng.normal(size=(20, 3))
        data = PairedDataset(
            x=SnapshotSet.from_frames(x),
            y=SnapshotSet.from_frames(np.tanh(x) + 0.1 * rng.normal(size=(20, 3))),
            lag_steps=1,
        )
        feature_map = PolynomialFeatureMap(degree=2, offset=1.0)
        oracle = covariance_oracle(data, feature_map, 0.01)
        gram = fit(data, feature_map.kernel(), 0.2, num_eigs=20)
        scale = float(np.abs(oracle).max())
        np.testing.assert_allclose(
            nonzero(gram.eigenvalues, scale),
            nonzero(oracle, scale),
            rtol=1e-8,
            atol=1e-10 * scale,
        )

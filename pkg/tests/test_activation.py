"""Tests for activation functions and the Clausen/Lobachevsky series."""

import math

import numpy as np
import pytest


@pytest.fixture
def samples():
    return np.random.default_rng(0).uniform(-10.0, 10.0, 1000)


class TestClausen:
    """Truncated Clausen sum."""

    def test_hand_value(self):
        from detrc.activation import clausen

        assert abs(clausen(math.pi / 4, 2) - 0.5) < 1e-15

    @pytest.mark.parametrize("k_c", [1, 2, 8, 20])
    def test_zero_at_origin(self, k_c):
        from detrc.activation import clausen

        assert clausen(0.0, k_c) == 0.0

    def test_period_pi(self, samples):
        from detrc.activation import clausen

        assert np.max(np.abs(clausen(samples + math.pi, 8) - clausen(samples, 8))) < 1e-12

    @pytest.mark.parametrize("k_c", [1, 3, 8, 12])
    def test_bounded_below_one(self, samples, k_c):
        from detrc.activation import clausen

        bound = sum(2.0**-i for i in range(1, k_c + 1))
        assert np.max(np.abs(clausen(samples, k_c))) <= bound + 1e-15
        assert bound < 1.0

    @pytest.mark.parametrize("k_c", list(range(1, 13)))
    def test_truncation_tail_bound(self, samples, k_c):
        from detrc.activation import clausen

        reference = clausen(samples, 60)
        assert np.max(np.abs(reference - clausen(samples, k_c))) <= 2.0**-k_c + 1e-15

    def test_scalar_in_scalar_out(self):
        from detrc.activation import clausen

        assert isinstance(clausen(0.3, 4), float)
        assert clausen(np.zeros((2, 3)), 4).shape == (2, 3)


class TestLobachevsky:
    """lambda(s) = clausen(2s) / 2."""

    def test_zero(self):
        from detrc.activation import lobachevsky

        assert lobachevsky(0.0, 3) == 0.0

    def test_hand_value(self):
        from detrc.activation import lobachevsky

        assert abs(lobachevsky(math.pi / 8, 2) - 0.25) < 1e-15

    def test_odd(self, samples):
        from detrc.activation import lobachevsky

        assert np.max(np.abs(lobachevsky(-samples, 8) + lobachevsky(samples, 8))) < 1e-12

    def test_period_half_pi(self, samples):
        from detrc.activation import lobachevsky

        shifted = lobachevsky(samples + math.pi / 2, 8)
        assert np.max(np.abs(shifted - lobachevsky(samples, 8))) < 1e-12

    def test_strictly_inside_unit_interval(self, samples):
        from detrc.activation import lobachevsky

        assert np.max(np.abs(lobachevsky(samples, 8))) < 1.0


class TestApply:
    """Elementwise application by kind."""

    def test_tanh_zero(self):
        from detrc.activation import ActivationKind, apply

        assert apply([0.0, 0.0], ActivationKind("tanh")).tolist() == [0.0, 0.0]

    def test_sigmoid_half(self):
        from detrc.activation import ActivationKind, apply

        assert apply([0.0], ActivationKind("sigmoid")).tolist() == [0.5]

    def test_sin(self):
        from detrc.activation import ActivationKind, apply

        value = apply([1.0], ActivationKind("sin"))[0]
        assert value == pytest.approx(0.8414709848078965, abs=1e-15)

    def test_lobachevsky_matches_function(self, samples):
        from detrc.activation import ActivationKind, apply, lobachevsky

        kind = ActivationKind("lobachevsky", k_c=5)
        assert np.array_equal(apply(samples, kind), lobachevsky(samples, 5))

    def test_identity_copies(self):
        from detrc.activation import ActivationKind, apply

        v = np.array([1.0, -2.0])
        out = apply(v, ActivationKind("identity"))
        out[0] = 9.0
        assert v[0] == 1.0

    @pytest.mark.parametrize("name", ["tanh", "sin", "sigmoid", "lobachevsky", "identity"])
    def test_preserves_shape_and_finiteness(self, samples, name):
        from detrc.activation import ActivationKind, apply

        out = apply(samples.reshape(10, 100), ActivationKind.from_name(name))
        assert out.shape == (10, 100)
        assert np.all(np.isfinite(out))


class TestActivationKind:
    """Name parsing and validation."""

    def test_from_name_case_insensitive(self):
        from detrc.activation import ActivationKind, ActivationName

        kind = ActivationKind.from_name("Lobachevsky", k_c=4)
        assert kind.kind is ActivationName.LOBACHEVSKY
        assert kind.name == "lobachevsky"
        assert kind.k_c == 4

    def test_unknown_name(self):
        from detrc.activation import ActivationKind
        from detrc.errors import ParameterError

        with pytest.raises(ParameterError):
            ActivationKind.from_name("relu")

    @pytest.mark.parametrize("k_c", [0, -1, 2.5])
    def test_invalid_order(self, k_c):
        from detrc.activation import ActivationKind
        from detrc.errors import ParameterError

        with pytest.raises(ParameterError):
            ActivationKind("lobachevsky", k_c=k_c)

    def test_default_order(self):
        from detrc.activation import ActivationKind

        assert ActivationKind().k_c == 8

"""Adam optimizer: bias-corrected recurrence, freezing, grouping, clipping.

Oracle: a hand-rolled three-step Adam recurrence on f(w) = w^2 computed with
plain Python floats, matched to 1e-12.
"""

import numpy as np
import pytest

from pitchvae.model.params import ParamStore
from pitchvae.training.adam import adam_step


def _store_with(params):
    """params: {name: (value, group)} -> ParamStore with grads unset."""
    store = ParamStore()
    for name, (value, group) in params.items():
        store.add(name, np.asarray(value, dtype=np.float64), group)
    return store


class TestSingleStep:
    def test_first_step_moves_by_learning_rate(self):
        # After one step the bias-corrected moments cancel the decay factors
        # exactly, so the update is lr * g / (|g| + eps) ~= lr * sign(g).
        store = _store_with({"w": (np.array([1.0, -2.0]), "enc")})
        store["w"].grad = np.array([0.5, -0.25])
        adam_step(store, lr=1e-3)
        delta = store["w"].data - np.array([1.0, -2.0])
        assert delta == pytest.approx(np.array([-1e-3, 1e-3]), rel=1e-6)

    def test_first_step_formula_is_exact(self):
        g = 0.7
        store = _store_with({"w": (np.array([0.0]), "enc")})
        store["w"].grad = np.array([g])
        adam_step(store, lr=0.05, beta1=0.5, beta2=0.9, eps=1e-8)
        expected = -0.05 * g / (abs(g) + 1e-8)
        assert float(store["w"].data[0]) == pytest.approx(expected, rel=1e-15)

    def test_zero_gradient_leaves_parameter_unchanged(self):
        store = _store_with({"w": (np.array([3.0]), "enc")})
        store["w"].grad = np.zeros(1)
        adam_step(store, lr=0.1)
        assert float(store["w"].data[0]) == 3.0


class TestRecurrence:
    def test_three_steps_match_hand_recurrence_on_quadratic(self):
        lr, b1, b2, eps = 0.1, 0.5, 0.9, 1e-8
        store = _store_with({"w": (np.array([1.0]), "enc")})

        w, m, v = 1.0, 0.0, 0.0
        for t in range(1, 4):
            g = 2.0 * w  # d/dw of w^2
            store["w"].grad = np.array([g])
            adam_step(store, lr=lr, beta1=b1, beta2=b2, eps=eps)

            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g * g
            m_hat = m / (1 - b1 ** t)
            v_hat = v / (1 - b2 ** t)
            w = w - lr * m_hat / (np.sqrt(v_hat) + eps)
            assert float(store["w"].data[0]) == pytest.approx(w, abs=1e-12)
        assert float(store["w"].data[0]) < 1.0  # moved toward the minimum

    def test_step_counter_and_moments_persist(self):
        store = _store_with({"w": (np.array([1.0]), "enc")})
        for _ in range(3):
            store["w"].grad = np.array([1.0])
            adam_step(store, lr=1e-3)
        assert store.opt_state["w"]["t"] == 3
        # constant unit gradient: m_t = 1 - beta1^t with beta1 = 0.5
        assert store.opt_state["w"]["m"] == pytest.approx(np.array([0.875]))


class TestSelection:
    def test_frozen_parameter_is_bit_identical(self):
        store = _store_with({"w": (np.array([1.0]), "enc"),
                             "frozen": (np.array([np.pi]), "dis")})
        before = store["frozen"].data.copy()
        store.set_trainable(("enc",))
        store["w"].grad = np.array([1.0])
        adam_step(store, lr=0.1)
        assert store["frozen"].data.tobytes() == before.tobytes()
        assert float(store["w"].data[0]) != 1.0
        assert "frozen" not in store.opt_state

    def test_group_filter_touches_only_that_group(self):
        store = _store_with({"a": (np.array([1.0]), "enc"),
                             "b": (np.array([1.0]), "dec")})
        store["a"].grad = np.array([1.0])
        store["b"].grad = np.array([1.0])
        adam_step(store, lr=0.1, groups=("dec",))
        assert float(store["a"].data[0]) == 1.0
        assert float(store["b"].data[0]) != 1.0

    def test_missing_gradient_on_trainable_parameter_errors(self):
        store = _store_with({"w": (np.array([1.0]), "enc"),
                             "u": (np.array([1.0]), "enc")})
        store["w"].grad = np.array([1.0])
        with pytest.raises(ValueError, match="missing gradients.*'u'"):
            adam_step(store, lr=0.1)

    def test_missing_gradient_on_frozen_parameter_is_fine(self):
        store = _store_with({"w": (np.array([1.0]), "enc"),
                             "u": (np.array([1.0]), "dis")})
        store.set_trainable(("enc",))
        store["w"].grad = np.array([1.0])
        adam_step(store, lr=0.1)  # "u" has no grad but is frozen
        assert float(store["w"].data[0]) != 1.0


class TestGradClip:
    def test_large_gradients_are_rescaled_to_the_clip_norm(self):
        # Global norm sqrt(3^2 + 4^2) = 5 > 1, so grads scale by 1/5; the
        # resulting step must equal a plain step taken with the scaled grads.
        clipped = _store_with({"a": (np.array([0.0]), "enc"),
                               "b": (np.array([0.0]), "enc")})
        clipped["a"].grad = np.array([3.0])
        clipped["b"].grad = np.array([4.0])
        adam_step(clipped, lr=0.1, grad_clip=1.0)

        manual = _store_with({"a": (np.array([0.0]), "enc"),
                              "b": (np.array([0.0]), "enc")})
        manual["a"].grad = np.array([3.0 / 5.0])
        manual["b"].grad = np.array([4.0 / 5.0])
        adam_step(manual, lr=0.1)

        assert clipped["a"].data.tobytes() == manual["a"].data.tobytes()
        assert clipped["b"].data.tobytes() == manual["b"].data.tobytes()

    def test_small_gradients_pass_through_unscaled(self):
        store = _store_with({"w": (np.array([0.0]), "enc")})
        store["w"].grad = np.array([0.3])
        adam_step(store, lr=0.1, grad_clip=1.0)

        plain = _store_with({"w": (np.array([0.0]), "enc")})
        plain["w"].grad = np.array([0.3])
        adam_step(plain, lr=0.1)
        assert store["w"].data.tobytes() == plain["w"].data.tobytes()

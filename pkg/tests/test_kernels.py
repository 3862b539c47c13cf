"""Backend dispatch and parity tests for the fuzzy-inference kernel."""

import numpy as np
import pytest

from generank import kernels


DEFAULT = np.array([0.25, 0.75, 0.25, 0.75, 0.25, 0.75])


def _random_params(rng):
    pairs = np.sort(rng.uniform(0.05, 0.95, (3, 2)), axis=1)
    pairs[:, 1] = np.maximum(pairs[:, 1], pairs[:, 0] + 0.02)
    return np.clip(pairs, 0.01, 0.99).ravel()


def test_backend_is_declared():
    assert kernels.BACKEND in ("cython", "numpy")
    impls = kernels.available_backends()
    assert "numpy" in impls
    assert kernels.BACKEND in impls


def test_compiled_backend_present():
    # the build ships the compiled kernel; this guards against silently
    # falling back to the slow path in a packaged environment
    assert kernels.BACKEND == "cython"


def test_backends_bit_identical():
    impls = kernels.available_backends()
    if len(impls) < 2:
        pytest.skip("only one backend importable")
    rng = np.random.default_rng(200)
    for trial in range(50):
        n = int(rng.integers(1, 400))
        fc = rng.random(n)
        var = rng.random(n)
        rs = rng.random(n)
        params = _random_params(rng)
        outputs = {}
        for name, impl in impls.items():
            scores, clamped = impl(fc, var, rs, params)
            outputs[name] = (np.asarray(scores), int(clamped))
        base_scores, base_clamped = outputs["numpy"]
        for name, (scores, clamped) in outputs.items():
            np.testing.assert_array_equal(
                scores, base_scores, err_msg=f"{name} diverged on trial {trial}"
            )
            assert clamped == base_clamped


def test_extreme_corner_scores():
    # all rules point at the lowest / highest output class in these corners
    scores, _ = kernels.mamdani_scores(
        np.array([0.0, 1.0]), np.array([1.0, 0.0]), np.array([0.0, 1.0]), DEFAULT
    )
    assert scores[0] == 0.083
    assert scores[1] == 0.9169999999999999


def test_scores_live_inside_grid_extremes():
    rng = np.random.default_rng(201)
    low, high = 0.083, 0.9169999999999999
    for trial in range(20):
        n = 300
        scores, _ = kernels.mamdani_scores(
            rng.random(n), rng.random(n), rng.random(n), _random_params(rng)
        )
        assert scores.min() >= low - 1e-12
        assert scores.max() <= high + 1e-12


def test_out_of_range_inputs_are_clamped_and_counted():
    fc = np.array([-0.2, 0.5, 1.3])
    var = np.array([0.5, 0.5, 0.5])
    rs = np.array([0.5, 0.5, 0.5])
    scores, clamped = kernels.mamdani_scores(fc, var, rs, DEFAULT)
    assert clamped == 2
    inside, zero_clamped = kernels.mamdani_scores(
        np.array([0.0, 0.5, 1.0]), var, rs, DEFAULT
    )
    assert zero_clamped == 0
    np.testing.assert_array_equal(scores, inside)


def test_input_validation():
    good = np.array([0.5])
    with pytest.raises(ValueError, match="1-D"):
        kernels.mamdani_scores(np.ones((2, 2)), good, good, DEFAULT)
    with pytest.raises(ValueError, match="equal length"):
        kernels.mamdani_scores(np.ones(3), np.ones(2), np.ones(3), DEFAULT)
    with pytest.raises(ValueError, match="non-finite"):
        kernels.mamdani_scores(np.array([np.nan]), good, good, DEFAULT)
    with pytest.raises(ValueError, match="six values"):
        kernels.mamdani_scores(good, good, good, DEFAULT[:4])
    bad_pair = DEFAULT.copy()
    bad_pair[0], bad_pair[1] = 0.8, 0.2  # alpha above beta
    with pytest.raises(ValueError, match="alpha"):
        kernels.mamdani_scores(good, good, good, bad_pair)
    with pytest.raises(ValueError, match="alpha"):
        kernels.mamdani_scores(good, good, good, np.array([0.0, 0.75] * 3))


def test_empty_input_allowed():
    empty = np.empty(0)
    scores, clamped = kernels.mamdani_scores(empty, empty, empty, DEFAULT)
    assert scores.shape == (0,)
    assert clamped == 0

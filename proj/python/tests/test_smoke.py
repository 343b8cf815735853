import json

import numpy as np
import pytest

import phg


def exp_path():
    doc = {
        "n": 1,
        "support": [[1], [0]],
        "coefficients": [[[1, 0], [-1, 0]]],
        "lifting": [[0, 1], [1, 1]],
    }
    return phg.System.from_json(json.dumps(doc))


def test_generators():
    assert phg.gen_cyclic(14).m == 184
    assert phg.gen_chandra(24).m == 324
    a = phg.gen_random(3, 10, seed=7)
    b = phg.gen_random(3, 10, seed=7)
    assert a.to_json() == b.to_json()
    assert "reference" in phg.backends()


def test_evaluate_matches_oracle():
    sys = phg.gen_random(3, 12, -2, 2, seed=4, max_lifting=2.0)
    rng = np.random.default_rng(0)
    y = rng.uniform(0.5, 2.0, (6, sys.N)) * np.exp(1j * rng.uniform(-3, 3, (6, sys.N)))
    jac = phg.evaluate(sys, y, -0.5)
    assert jac.shape == (6, sys.n, sys.N + 2)
    for i in range(6):
        ref = phg.oracle(sys, y[i], -0.5)
        assert np.linalg.norm(jac[i] - ref) <= 1e-11 * np.linalg.norm(ref)
    for b in (1, 6):
        assert np.array_equal(phg.evaluate(sys, y, -0.5, batch_size=b), phg.evaluate(sys, y, -0.5, batch_size=2))


def test_directions_hand_case():
    e, nv = phg.directions(exp_path(), np.array([[1, 1], [1, 2]], dtype=complex), 0.0)
    assert np.allclose(e[0], [0.5, -0.5], atol=1e-12)
    assert np.allclose(nv[0], [0, 0], atol=1e-12)
    assert np.allclose(nv[1], [2 / 3, -1 / 3], atol=1e-12)


def test_track_and_retrace():
    sys, starts = phg.seeded_starts(phg.gen_random(2, 7, seed=3), 4, tau0=-20.0, seed=5)
    res = phg.track(sys, starts, tau0=-20.0, retrace=True)
    assert len(res) == 4
    for r in res:
        assert r["status"] == "Converged"
        assert r["tau"] == 0.0
        assert r["residual"] <= 1e-8
        assert r["retrace_error"] <= 1e-6
        assert abs(np.linalg.norm(r["y"]) - 1.0) <= 1e-13

    closed = phg.track(exp_path(), np.array([np.exp(-2.0), 1.0]), tau0=-2.0)
    assert abs(closed[0]["x"][0] - 1.0) <= 1e-8


def test_errors():
    sys = exp_path()
    with pytest.raises(phg.ZeroCoordinate):
        phg.evaluate(sys, np.array([[1, 1], [0, 1]], dtype=complex), 0.0)
    with pytest.raises(phg.ShapeError):
        phg.evaluate(sys, np.ones((2, 3), dtype=complex), 0.0)
    with pytest.raises(phg.StartPointInvalid):
        phg.track(sys, np.array([[3.0, 1.0]]), tau0=-1.0)
    with pytest.raises(phg.UsageError):
        phg.track(sys, np.array([[1.0, 1.0]]), tau0=0.0)
    with pytest.raises(phg.ParseError):
        phg.System.from_json("{")
    assert issubclass(phg.SingularJacobian, phg.PhgError)

import numpy as np
import pytest

import gvarma


def ring(n):
    return gvarma.Graph.from_edges(n, [(i, (i + 1) % n, 1.0) for i in range(n)])


def test_jft_round_trip():
    basis = gvarma.spectral_basis(ring(6))
    X = np.random.default_rng(1).standard_normal((6, 5))
    back = gvarma.ijft(basis, gvarma.jft(basis, X))
    assert np.max(np.abs(back - X)) < 1e-10


def test_gpvar_simulate_fit_predict():
    basis = gvarma.spectral_basis(ring(8))
    model = gvarma.random_gpvar(basis, P=1, L=1, radius=0.7, seed=3)
    X = gvarma.gpvar_simulate(model, T=4000, seed=5)
    fitted = gvarma.fit_gpvar(basis, X, P=1, L=1)
    assert np.allclose(fitted.psi[0], model.psi[0], atol=0.05)
    f = gvarma.gpvar_predict(fitted, X, 3)
    assert f.predictions.shape == (8, 3)
    assert f.step_mse[0] == pytest.approx(np.trace(fitted.innovation_cov))


def test_gvarma_fit_and_rnmse():
    basis = gvarma.spectral_basis(ring(5))
    model = gvarma.random_gvarma(basis, P=1, Q=0, radius=0.6, seed=2)
    X = gvarma.gvarma_simulate(model, basis, T=3000, seed=9)
    fitted = gvarma.fit_gvarma(basis, X, P=1)
    assert np.max(np.abs(fitted.ar[0] - model.ar[0])) < 0.1
    assert gvarma.rnmse(np.array([[3.0], [4.0]]), np.array([[3.0], [0.0]])) == pytest.approx(0.8)


def test_split_and_errors():
    assert gvarma.split(100) == ((0, 35), (35, 50), (50, 100))
    with pytest.raises(ValueError):
        gvarma.split(100, 1.0, 0.0, 0.0)


def test_track_full_observation():
    basis = gvarma.spectral_basis(ring(4))
    model = gvarma.random_gpvar(basis, P=1, L=1, radius=0.5, seed=1)
    X = gvarma.gpvar_simulate(model, T=20, seed=4)
    schedule = [[(n, X[n, t]) for n in range(4)] for t in range(20)]
    est, traces = gvarma.track(model, schedule, noise_variance=1e-12)
    assert gvarma.rnmse(X, est) < 1e-5
    assert traces.shape == (20,)

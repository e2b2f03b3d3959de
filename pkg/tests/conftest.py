import numpy as np
import pytest

import wavefront as wf


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def local_model():
    """The local delayed reaction-diffusion family with the logistic birth term."""
    return wf.LocalDelayedRD(g=wf.logistic(2.0, 1.0), L=2.0, delay=0.0)


@pytest.fixture(scope="session")
def solver_grid():
    return wf.Grid(-60.0, 40.0, 4096)


@pytest.fixture(scope="session")
def noncritical_profile(local_model, solver_grid):
    prob = local_model.to_convolution_form(2.5)
    prof = wf.solve_profile(prob, solver_grid, wf.CappedExponential(0.5, 0.5),
                            wf.SolveOptions(tol=1e-9, max_iter=20000))
    return prob, prof


@pytest.fixture(scope="session")
def critical_profile(local_model, solver_grid):
    prob = local_model.to_convolution_form(2.0)
    prof = wf.solve_profile(prob, solver_grid, wf.CappedExponential(1.0, 0.25),
                            wf.SolveOptions(tol=1e-9, max_iter=40000))
    return prob, prof

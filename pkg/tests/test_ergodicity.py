import math

import numpy as np
import pytest

from affine2f.ergodicity import ergodic_report, fit_decay_rate, mixing_decay, time_average
from affine2f.errors import ParameterError
from affine2f.model import State, validate_params


def test_time_average_trapezoid():
    t = np.linspace(0, 2, 201)
    assert time_average(t, np.ones_like(t), 1, 0, 0.01) == pytest.approx(1.0)
    assert time_average(t, t, 1, 1, 0.01) == pytest.approx(4 / 3, rel=1e-4)
    with pytest.raises(ParameterError):
        time_average(t, t[:-1], 1, 0, 0.01)


def test_fit_decay_rate_exact_exponential():
    t = np.linspace(0, 4, 20)
    beta, resid = fit_decay_rate(t, 3 * np.exp(-0.7 * t))
    assert beta == pytest.approx(0.7, rel=1e-12)
    assert resid < 1e-12
    assert math.isnan(fit_decay_rate(t, np.zeros_like(t))[0])


def test_ergodic_report_small_run(cir_params):
    rep = ergodic_report(cir_params, 1, 0, T=50.0, dt=0.05, n_replicas=16, master_seed=11)
    assert rep.target == 1.0 and not rep.exploratory
    assert rep.passed == (abs(rep.estimate - rep.target) <= 3 * rep.stderr)
    assert rep.to_dict()["n_replicas"] == 16


def test_ergodic_report_exploratory_for_stable(stable_params):
    rep = ergodic_report(stable_params, 1, 0, T=5.0, dt=0.05, n_replicas=4, master_seed=1)
    assert rep.exploratory and rep.target is None and rep.passed is None
    assert math.isfinite(rep.estimate)


def test_ergodic_report_validation(cir_params):
    with pytest.raises(ParameterError):
        ergodic_report(cir_params, 1, 0, T=1.0, dt=0.3, n_replicas=4, master_seed=1)
    with pytest.raises(ParameterError):
        ergodic_report(cir_params, 1, 0, T=1.0, dt=0.1, n_replicas=1, master_seed=1)


@pytest.mark.parametrize("b,theta", [(0.6, 1.4), (2.0, 0.5)])
def test_mixing_rates_recovered(b, theta):
    p = validate_params(1.0, b, 0.2, theta, 2.0)
    times = np.arange(0, 26) * 0.2
    cy = mixing_decay(p, 1, 0, times, 500, State(3.0, 2.0), 7, dt=0.05)
    cx = mixing_decay(p, 0, 1, times, 500, State(3.0, 2.0), 7, dt=0.05)
    assert cy.beta_hat == pytest.approx(b, rel=1e-6)
    assert cx.beta_hat == pytest.approx(theta, rel=1e-6)
    # Monte Carlo curve tracks the moment curve
    z = np.abs(cy.monte_carlo - cy.transient)[1:] / cy.mc_stderr[1:]
    assert np.mean(z < 3) > 0.8


def test_mixing_validation(cir_params):
    with pytest.raises(ParameterError):
        mixing_decay(cir_params, 3, 2, [0, 1], 10, (1, 0), 1)
    with pytest.raises(ParameterError):
        mixing_decay(cir_params, 1, 0, [0, 0.015], 10, (1, 0), 1, dt=0.01)
    with pytest.raises(ParameterError):
        mixing_decay(validate_params(1, 1, 0, 1, 1.5), 1, 0, [0, 1], 10, (1, 0), 1)

"""Desk-scale acceptance checks, shared by ``affine2f selftest`` and the test suite.

Each check returns a :class:`CriterionResult`; ``run_all`` executes them in order.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, List

import numpy as np
from scipy import integrate, linalg

from . import riccati
from .ergodicity import ergodic_report, mixing_decay
from .generator import (
    apply_generator_diffusion,
    apply_generator_jump,
    exp_y,
    lyapunov_drift_check,
    monomial,
    rectangle_grid,
)
from .model import LambdaPair, State, validate_params
from .sampler import PathGrid, rng_stream, sample_stable_increment, simulate_joint, simulate_y_exact
from .stationary import build_moment_ode, cir_transition_density, stationary_moment

SEED = 20240611


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"[{verdict}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def gamma_stationary_law() -> CriterionResult:
    worst = 0.0
    for a, b, theta in [(1, 1, 1), (0.5, 2, 0.7), (3, 0.5, 1.3)]:
        p = validate_params(a, b, 0.0, theta, 2)
        for l1 in [0.1, 0.5, 1, 2, 5]:
            got = math.exp(riccati.stationary_exponent((l1, 0.0), p).real)
            want = (1 + l1 / (2 * b)) ** (-2 * a)
            worst = max(worst, abs(got - want) / want)
    return CriterionResult(1, "gamma stationary Laplace transform", worst <= 1e-6, f"max rel err {worst:.2e} <= 1e-6")


def riccati_closed_form() -> CriterionResult:
    worst = 0.0
    times = np.linspace(0.0, 10.0, 1001)
    for a, b in [(1, 1), (0.5, 2), (3, 0.5)]:
        p = validate_params(a, b, 0.0, 1.0, 2)
        for l1 in [0.1, 1, 2, 5]:
            curve = riccati.solve_v((l1, 0.0), 10.0, p, times=times)
            worst = max(worst, float(np.max(np.abs(curve.values - riccati.v_closed_form(l1, times, p)))))
    return CriterionResult(2, "Riccati vs Bernoulli closed form", worst <= 1e-8, f"max abs err {worst:.2e} <= 1e-8")


_LAMBDAS = [(0.5, 0.0), (1.0, 1.0), (3.0, -2.0)]
_TIMES = [0.5, 1.0, 3.0]


def flow_property() -> CriterionResult:
    worst = 0.0
    for alpha in (1.5, 2.0):
        p = validate_params(1.0, 1.0, 0.0, 0.5, alpha)
        for lam in _LAMBDAS:
            for s in _TIMES:
                for t in _TIMES:
                    worst = max(worst, riccati.flow_residual(lam, s, t, p))
    return CriterionResult(3, "flow property", worst <= 1e-7, f"max residual {worst:.2e} <= 1e-7")


def comparison_bound() -> CriterionResult:
    worst = -math.inf
    times = np.linspace(0.0, 10.0, 101)
    for alpha in (1.5, 2.0):
        for b, theta in [(1.0, 0.5), (1.0, 1.0), (2.0, 0.3)]:  # first is b = 2 theta
            p = validate_params(1.0, b, 0.0, theta, alpha)
            for lam in _LAMBDAS:
                v = riccati.solve_v(lam, 10.0, p, times=times).values
                u = riccati.comparison_bound(lam, times, p)
                worst = max(worst, float(np.max(v - u)))
    return CriterionResult(4, "comparison bound v <= u", worst <= 1e-8, f"max(v - u) {worst:.2e} <= 1e-8")


def closed_form_moments(a, b, m, theta) -> dict:
    """The six closed-form stationary moments, typed in independently of the recursion."""
    return {
        (1, 0): a / b,
        (0, 1): m / theta,
        (2, 0): a * (2 * a + 1) / (2 * b ** 2),
        (1, 1): m * a / (theta * b),
        (0, 2): (a * theta + 2 * b * m ** 2) / (2 * b * theta ** 2),
        (1, 2): a / ((b + 2 * theta) * 2 * b ** 2 * theta ** 2)
        * (theta * (a * b + 2 * a * theta + theta) + 2 * m ** 2 * b * (2 * theta + b)),
    }


def closed_form_matrix(a, b, m, theta) -> np.ndarray:
    return np.array(
        [
            [0, 0, 0, 0, 0, 0],
            [a, -b, 0, 0, 0, 0],
            [m, 0, -theta, 0, 0, 0],
            [0, 2 * a + 1, 0, -2 * b, 0, 0],
            [0, m, a, 0, -b - theta, 0],
            [0, 1, 2 * m, 0, 0, -2 * theta],
        ],
        dtype=float,
    )


def moment_suite() -> CriterionResult:
    rel_moment, rel_kernel, matrix_ok = 0.0, 0.0, True
    for a, b, m, theta in [(1, 1, 0.5, 1), (0.5, 2, -1.3, 0.7), (3, 0.5, 2, 1.3)]:
        p = validate_params(a, b, m, theta, 2)
        shown = closed_form_moments(a, b, m, theta)
        for (n, q), want in shown.items():
            rel_moment = max(rel_moment, abs(stationary_moment(n, q, p) - want) / abs(want))
        system = build_moment_ode(2, p)
        matrix_ok &= bool(np.array_equal(system.matrix, closed_form_matrix(a, b, m, theta)))
        kernel = linalg.null_space(system.matrix)
        if kernel.shape[1] != 1:
            matrix_ok = False
            continue
        vec = kernel[:, 0] / kernel[0, 0]
        for i, (n, q) in enumerate(system.index):
            want = stationary_moment(n, q, p)
            rel_kernel = max(rel_kernel, abs(vec[i] - want) / max(abs(want), 1e-300))
    ok = rel_moment <= 1e-12 and rel_kernel <= 1e-10 and matrix_ok
    return CriterionResult(
        5, "stationary moments", ok,
        f"moments rel {rel_moment:.1e} <= 1e-12, kernel rel {rel_kernel:.1e} <= 1e-10, matrix equal {matrix_ok}",
    )


def transform_vs_monte_carlo(n_paths: int = 100_000, n_steps: int = 512, seed: int = SEED) -> CriterionResult:
    details, ok = [], True
    for alpha, scheme in [(2.0, "exact"), (1.5, "euler")]:
        p = validate_params(1.0, 1.0, 0.0, 1.0, alpha)
        ens = simulate_joint(seed, State(1.0, 0.0), PathGrid(1.0, n_steps), n_paths, scheme, p)
        z = np.exp(-ens.y[:, -1] + 1j * ens.x[:, -1])
        est = z.mean()
        se = math.sqrt(np.mean(np.abs(z - est) ** 2) / n_paths)
        want = np.exp(riccati.transform_exponent(LambdaPair(1.0, 1.0), 1.0, State(1.0, 0.0), p))
        k = abs(est - want) / se
        ok &= k <= 3.0
        details.append(f"alpha={alpha}: {k:.2f} se")
    return CriterionResult(6, "transform vs Monte Carlo", ok, ", ".join(details) + " (<= 3)")


def stable_normalization(n_draws: int = 1_000_000, seed: int = SEED) -> CriterionResult:
    worst, ok = 0.0, True
    for i, alpha in enumerate([1.3, 1.5, 1.8]):
        L = sample_stable_increment(rng_stream(seed, 100 + i), 1.0, alpha, size=n_draws)
        for u in (0.5, 1.0):
            z = np.exp(-u * L)
            k = abs(z.mean() - math.exp(u ** alpha / alpha)) / (z.std(ddof=1) / math.sqrt(n_draws))
            worst = max(worst, k)
    ok = worst <= 3.0
    return CriterionResult(7, "stable driver Laplace transform", ok, f"max deviation {worst:.2f} se <= 3")


def transition_density(n_draws: int = 100_000, seed: int = SEED) -> CriterionResult:
    p = validate_params(1.0, 1.0, 0.0, 1.0, 2)
    y1 = simulate_y_exact(rng_stream(seed, 200), np.ones(n_draws), PathGrid(1.0, 1), p)[:, -1]
    edges = np.linspace(0.0, 6.0, 51)
    counts, _ = np.histogram(y1, bins=edges)
    emp = counts / n_draws
    mass = np.array([
        integrate.quad(lambda y: cir_transition_density(y, 1.0, 1.0, p), max(lo, 1e-300), hi, epsabs=1e-12)[0]
        for lo, hi in zip(edges[:-1], edges[1:])
    ])
    tv = 0.5 * float(np.sum(np.abs(emp - mass)))

    worst = 0.0
    ys = np.linspace(0.01, 10.0, 200)
    for a, b in [(1.0, 1.0), (0.7, 2.0), (2.5, 0.4)]:
        q = validate_params(a, b, 0.0, 1.0, 2)
        rate = 2 * b / (1 - math.exp(-b))
        shown = rate ** (2 * a) * ys ** (2 * a - 1) * np.exp(-rate * ys) / math.gamma(2 * a)
        got = cir_transition_density(ys, 0.0, 1.0, q)
        worst = max(worst, float(np.max(np.abs(got - shown))))
    ok = tv <= 0.02 and worst <= 1e-8
    return CriterionResult(8, "CIR transition density", ok, f"TV {tv:.4f} <= 0.02, y0=0 max err {worst:.1e} <= 1e-8")


def generator_identity() -> CriterionResult:
    worst_jump = 0.0
    for alpha in (1.3, 1.7):
        p = validate_params(1.2, 0.8, 0.3, 1.0, alpha)
        for lam in (0.5, 1.0, 2.0):
            f = exp_y(lam)
            for y in (0.5, 1.0, 3.0):
                got = apply_generator_jump(f, State(y, 0.7), p)
                want = math.exp(-lam * y) * (-(p.a - p.b * y) * lam + y * lam ** alpha / alpha)
                worst_jump = max(worst_jump, abs(got - want))
    worst_diff = 0.0
    p = validate_params(1.2, 0.8, 0.3, 1.1, 2)
    a, b, m, th = p.a, p.b, p.m, p.theta
    closed = {
        (1, 0): lambda y, x: a - b * y,
        (0, 1): lambda y, x: m - th * x,
        (2, 0): lambda y, x: 2 * (a - b * y) * y + y,
        (0, 2): lambda y, x: 2 * (m - th * x) * x + y,
        (1, 1): lambda y, x: (a - b * y) * x + (m - th * x) * y,
        (1, 2): lambda y, x: (a - b * y) * x * x + 2 * (m - th * x) * x * y + y * y,
    }
    for (n, q), fn in closed.items():
        for y, x in [(0.0, 0.0), (0.5, -1.0), (2.0, 3.0), (7.0, -4.5)]:
            got = apply_generator_diffusion(monomial(n, q), State(y, x), p)
            want = fn(y, x)
            worst_diff = max(worst_diff, abs(got - want) / max(1.0, abs(want)))
    ok = worst_jump <= 1e-8 and worst_diff <= 1e-13
    return CriterionResult(9, "generator identities", ok, f"jump err {worst_jump:.1e} <= 1e-8, diffusion rel err {worst_diff:.1e}")


def drift_condition() -> CriterionResult:
    grid = rectangle_grid(20.0, -20.0, 20.0, 50)
    worst = -math.inf
    for a, b, m, theta in [(1, 1, 0, 1), (0.5, 2, 1.5, 0.7), (3, 0.5, -2, 1.3)]:
        p = validate_params(a, b, m, theta, 2)
        for c1 in (0.0, 1.0):
            rep = lyapunov_drift_check(c1, min(b, theta), grid, p)
            worst = max(worst, rep.max_violation)
    return CriterionResult(10, "Foster-Lyapunov drift", worst <= 1e-12, f"max violation {worst:.3g} <= 1e-12")


def ergodic_averages(n_replicas: int = 32, seed: int = SEED) -> CriterionResult:
    details, ok = [], True
    for m in (0.0, 1.0):
        p = validate_params(1.0, 1.0, m, 1.0, 2)
        for n, q in [(1, 0), (0, 1), (1, 2)]:
            rep = ergodic_report(p, n, q, 200.0, 0.01, n_replicas, seed)
            ok &= bool(rep.passed)
            details.append(f"m={m:g} y^{n}x^{q}: {abs(rep.estimate - rep.target) / rep.stderr:.2f}se")
    return CriterionResult(11, "ergodic time averages", ok, "; ".join(details) + " (<= 3)")


def mixing_rates(seed: int = SEED) -> CriterionResult:
    p = validate_params(1.0, 0.7, 0.5, 1.4, 2)
    times = np.linspace(0.0, 5.0, 26)
    cy = mixing_decay(p, 1, 0, times, 2000, State(5.0, 0.0), seed)
    cx = mixing_decay(p, 0, 1, times, 2000, State(1.0, 5.0), seed)
    ey = abs(cy.beta_hat - p.b) / p.b
    ex = abs(cx.beta_hat - p.theta) / p.theta
    ok = ey <= 0.05 and ex <= 0.05
    return CriterionResult(12, "mixing rates", ok, f"beta(Y)={cy.beta_hat:.4f} vs b={p.b}, beta(X)={cx.beta_hat:.4f} vs theta={p.theta} (<= 5%)")


CRITERIA: List[Callable[[], CriterionResult]] = [
    gamma_stationary_law,
    riccati_closed_form,
    flow_property,
    comparison_bound,
    moment_suite,
    transform_vs_monte_carlo,
    stable_normalization,
    transition_density,
    generator_identity,
    drift_condition,
    ergodic_averages,
    mixing_rates,
]


def timed(check: Callable[[], CriterionResult]) -> CriterionResult:
    start = time.perf_counter()
    res = check()
    return CriterionResult(res.number, res.name, res.passed, res.detail, time.perf_counter() - start)


def run_all(echo: Callable[[str], None] = print) -> List[CriterionResult]:
    results = []
    for check in CRITERIA:
        res = timed(check)
        echo(res.line())
        results.append(res)
    return results

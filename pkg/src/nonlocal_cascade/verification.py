"""Self-check suites comparing brute-force simulation with the closed forms.

Each suite returns a list of :class:`Check` rows; the ``verify`` subcommand
prints them and fails when any row does not pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import linalg
from .errors import SearchFailed
from .cascade import (
    CascadeConfig,
    chsh_first_value,
    embed_local,
    luders_step,
    run_chsh_cascade,
    run_svetlichny_cascade,
)
from .measurements import (
    SVETLICHNY,
    SharpnessSchedule,
    alice_povms_bipartite,
    block_operator,
    bob_povms_bipartite,
    find_theta_n,
    gamma_schedule_chsh,
    gamma_schedule_svetlichny,
    min_first_gamma_svetlichny,
    scan_svetlichny_theta,
    sqrt_effect_closed_form,
    tripartite_povms,
)
from .states import GhzState, SchmidtState, density_bipartite, schmidt_L

SEED = 20201


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.error <= self.tolerance)


def _random_schmidt(rng, s, t):
    return SchmidtState.normalized(rng.random(s) + 0.05, s, t)[0]


def _random_schedule(rng, n, theta=None, scenario="chsh"):
    theta = rng.uniform(0.05, math.pi / 4) if theta is None else theta
    return SharpnessSchedule.explicit(np.sort(rng.uniform(0.05, 1.0, n)), theta, scenario)


def bipartite_identities() -> list[Check]:
    rng = np.random.default_rng(SEED)
    suite = "appendix-a"
    checks = []

    err = 0.0
    for dim in (2, 3, 4, 5, 6):
        for gamma in np.round(np.arange(0.1, 1.01, 0.1), 10):
            for pair in bob_povms_bipartite(dim, gamma) + alice_povms_bipartite(dim, 0.3):
                for sign, effect in zip((1, -1), pair.effects):
                    expected = sqrt_effect_closed_form(pair.sharpness, pair.axis, sign)
                    err = max(err, float(np.max(np.abs(linalg.psd_sqrt(effect) - expected))))
    checks.append(Check(suite, "effect-square-root-closed-form", err, 1e-10))

    err = 0.0
    for s in (2, 4, 6):
        for _ in range(5):
            st = _random_schmidt(rng, s, s)
            theta, gamma = rng.uniform(0.05, math.pi / 4), rng.uniform(0.05, 1)
            r = run_chsh_cascade(CascadeConfig(st, SharpnessSchedule.explicit([gamma], theta)))
            expected = 2 * math.cos(theta) + 2 * gamma * schmidt_L(st) * math.sin(theta)
            err = max(err, abs(r.steps[0].simulated - expected))
    checks.append(Check(suite, "first-bob-even-dims", err, 1e-10))

    err = 0.0
    for s, t in ((3, 3), (5, 5), (3, 4), (3, 5)):
        for _ in range(5):
            st = _random_schmidt(rng, s, t)
            theta, gamma = rng.uniform(0.05, math.pi / 4), rng.uniform(0.05, 1)
            r = run_chsh_cascade(CascadeConfig(st, SharpnessSchedule.explicit([gamma], theta)))
            err = max(err, abs(r.steps[0].simulated - chsh_first_value(st, theta, gamma)))
    checks.append(Check(suite, "first-bob-odd-dims", err, 1e-10))

    err = 0.0
    for s, t in ((2, 2), (4, 4), (2, 4), (4, 6)):
        for _ in range(5):
            r = run_chsh_cascade(CascadeConfig(_random_schmidt(rng, s, t), _random_schedule(rng, 5)))
            err = max(err, float(np.max(np.abs(r.simulated - r.closed_form))))
    checks.append(Check(suite, "cascade-equals-bound-even-dims", err, 1e-10))

    worst = 0.0
    for s, t in ((3, 3), (3, 5), (5, 5), (2, 3), (4, 5)):
        for _ in range(5):
            r = run_chsh_cascade(CascadeConfig(_random_schmidt(rng, s, t), _random_schedule(rng, 5)))
            worst = max(worst, float(np.max(r.closed_form - r.simulated)))
    checks.append(Check(suite, "cascade-above-bound-odd-dims", worst, 1e-10))

    # generic Lüders average against the three-term Pauli form
    err = 0.0
    for t in (2, 3, 4, 5):
        st = _random_schmidt(rng, 2, t)
        rho = density_bipartite(st)
        gamma = rng.uniform(0.05, 1)
        z = embed_local(block_operator(t, linalg.pauli(3)), (2, t), 1)
        x = embed_local(block_operator(t, linalg.pauli(1)), (2, t), 1)
        root = math.sqrt(1 - gamma ** 2)
        expected = 0.25 * z @ rho @ z + (1 - root) / 4 * x @ rho @ x + (2 + root) / 4 * rho
        got = luders_step(rho, bob_povms_bipartite(t, gamma), (2, t), 1)
        err = max(err, float(np.max(np.abs(got - expected))))
    checks.append(Check(suite, "luders-three-term-form", err, 1e-12))
    return checks


def sequential_bobs() -> list[Check]:
    suite = "sequential-bobs"
    st = SchmidtState((1 / math.sqrt(2), 1 / math.sqrt(2)))
    checks = []
    for n in range(1, 5):
        try:
            _, sched = find_theta_n(n, 1.0, 0.01)
        except SearchFailed:
            checks.append(Check(suite, f"n-bobs-violate-n{n}", math.inf, 0.0))
            continue
        r = run_chsh_cascade(CascadeConfig(st, sched))
        # error is how far the weakest violation falls short of a 1e-6 margin
        shortfall = max(0.0, 1e-6 - float(np.min(r.simulated - 2.0)))
        checks.append(Check(suite, f"n-bobs-violate-n{n}", shortfall, 0.0))
    grid = np.linspace(0.01, math.pi / 4, 200)
    first = [gamma_schedule_chsh(1.0, 0.01, th, 1).gammas[0] for th in grid]
    drops = max(0.0, -float(np.min(np.diff(first))))
    checks.append(Check(suite, "first-gamma-increasing-in-theta", drops, 0.0))
    return checks


def svetlichny_identities() -> list[Check]:
    suite = "svetlichny"
    rng = np.random.default_rng(SEED + 1)
    err = 0.0
    for alpha in np.linspace(0.1, math.pi / 2 - 0.1, 5):
        for theta in np.linspace(0.1, math.pi / 4, 4):
            sched = _random_schedule(rng, 4, theta, SVETLICHNY)
            r = run_svetlichny_cascade(CascadeConfig(GhzState(alpha), sched))
            err = max(err, float(np.max(np.abs(r.simulated - r.closed_form))))
    checks = [Check(suite, "svetlichny-equals-closed-form", err, 1e-10)]
    sched = SharpnessSchedule.explicit([1.0], math.pi / 4, SVETLICHNY)
    r = run_svetlichny_cascade(CascadeConfig(GhzState(math.pi / 4), sched))
    checks.append(Check(suite, "ghz-maximal-value", abs(r.steps[0].simulated - 4 * math.sqrt(2)), 1e-10))
    return checks


def charlie_limits() -> list[Check]:
    suite = "two-charlies"
    eps = 1e-6
    boundary = GhzState.from_sin2_2alpha(8 / 9)
    top = GhzState.from_sin2_2alpha(1.0)
    checks = [
        Check(suite, "min-first-gamma-at-8/9", abs(min_first_gamma_svetlichny(boundary.alpha, eps)[0] - 0.5), 1e-6),
        Check(suite, "min-first-gamma-at-1", abs(min_first_gamma_svetlichny(top.alpha, eps)[0] - (math.sqrt(2) - 1)), 1e-6),
    ]
    served = 0
    for value in (8 / 9 + 1e-6, 8 / 9, 0.8, 0.6):
        alpha = GhzState.from_sin2_2alpha(value).alpha
        for theta in np.linspace(math.pi / 4 / 1000, math.pi / 4, 1000):
            served = max(served, gamma_schedule_svetlichny(alpha, eps, float(theta), 2).n_feasible)
    checks.append(Check(suite, "no-second-charlie-at-or-below-8/9", float(served >= 2), 0.0))
    theta, sched = scan_svetlichny_theta(top.alpha, 2, 0.01)
    r = run_svetlichny_cascade(CascadeConfig(top, sched))
    shortfall = max(0.0, 4.0 - float(np.min(r.simulated)))
    checks.append(Check(suite, "two-charlies-at-1", shortfall, 0.0))
    return checks


SUITES: dict[str, Callable[[], list[Check]]] = {
    "appendix-a": bipartite_identities,
    "sequential-bobs": sequential_bobs,
    "svetlichny": svetlichny_identities,
    "two-charlies": charlie_limits,
}


def run_suite(name: str) -> list[Check]:
    if name == "all":
        return [c for fn in SUITES.values() for c in fn()]
    return SUITES[name]()

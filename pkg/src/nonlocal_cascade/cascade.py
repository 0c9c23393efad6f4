"""Sequential observers: averaged Lüders updates, exact expectations and closed forms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from . import linalg
from .errors import DimensionMismatch, InvalidState, NotPsd
from .measurements import (
    CHSH,
    SVETLICHNY,
    PovmPair,
    SharpnessSchedule,
    alice_povms_bipartite,
    bob_povms_bipartite,
    tripartite_povms,
)
from .states import GhzState, SchmidtState, density_bipartite, density_ghz, schmidt_L

STATE_TOL = 1e-10
CHSH_LOCAL_BOUND = 2.0
SVETLICHNY_LOCAL_BOUND = 4.0


def embed_local(op, dims: Sequence[int], site: int) -> np.ndarray:
    """``I (x) ... (x) op (x) ... (x) I`` with ``op`` on subsystem ``site``."""
    op = linalg.as_matrix(op)
    if not 0 <= site < len(dims):
        raise DimensionMismatch(f"site {site} out of range for dims {tuple(dims)}")
    if op.shape[0] != dims[site]:
        raise DimensionMismatch(f"operator of dim {op.shape[0]} on subsystem of dim {dims[site]}")
    left = math.prod(dims[:site])
    right = math.prod(dims[site + 1:])
    return linalg.kron(linalg.identity(left), op, linalg.identity(right))


def luders_step(rho, povms: Sequence[PovmPair], dims: Sequence[int], site: int) -> np.ndarray:
    """Average the Lüders update over uniformly random inputs and all outcomes."""
    rho = linalg.as_matrix(rho)
    if rho.shape[0] != math.prod(dims):
        raise DimensionMismatch(f"state of dim {rho.shape[0]} does not match dims {tuple(dims)}")
    out = np.zeros_like(rho)
    for pair in povms:
        for root in pair.roots:
            k = embed_local(root, dims, site)
            out += k @ rho @ k
    return out / len(povms)


def chsh_operator(a0, a1, b0, b1) -> np.ndarray:
    k = linalg.kron
    return k(a0, b0) + k(a0, b1) + k(a1, b0) - k(a1, b1)


def chsh_expectation(rho, a0, a1, b0, b1) -> float:
    return linalg.expectation(chsh_operator(a0, a1, b0, b1), rho)


def svetlichny_operator(a0, a1, b0, b1, c0, c1) -> np.ndarray:
    k = linalg.kron
    bp, bm = b0 + b1, b0 - b1
    return k(a0, bp, c0) + k(a0, bm, c1) + k(a1, bm, c0) - k(a1, bp, c1)


def svetlichny_expectation(rho, a0, a1, b0, b1, c0, c1) -> float:
    for m in (a0, a1, b0, b1, c0, c1):
        if linalg.as_matrix(m).shape != (2, 2):
            raise DimensionMismatch("Svetlichny observables must be 2x2")
    return linalg.expectation(svetlichny_operator(a0, a1, b0, b1, c0, c1), rho)


# --------------------------------------------------------------------------
# closed forms
# --------------------------------------------------------------------------

def _decay_product(gammas: Sequence[float]) -> float:
    return math.prod(1.0 + math.sqrt(1.0 - g * g) for g in gammas)


def chsh_bound_theorem1(k: int, L: float, theta: float, gammas: Sequence[float]) -> float:
    """Lower bound on the CHSH value seen by the ``k``-th Bob.

    ``2^(2-k) * (gamma_k L sin(theta) + cos(theta) prod_{j<k}(1 + sqrt(1 - gamma_j^2)))``.
    Exact for even local dimensions.
    """
    if k < 1 or len(gammas) < k:
        raise ValueError(f"need at least k={k} sharpness values, got {len(gammas)}")
    return 2.0 ** (2 - k) * (gammas[k - 1] * L * math.sin(theta)
                             + math.cos(theta) * _decay_product(gammas[: k - 1]))


def chsh_first_value(state: SchmidtState, theta: float, gamma1: float) -> float:
    """Exact CHSH value for the first Bob, odd dimensions included.

    For odd ``s`` the last Schmidt pair ``|s-1, s-1>`` meets Alice's trailing
    ``+1`` entry and Bob's ``+1`` diagonal entry, which adds
    ``2 c_s^2 (1 - cos(theta))`` to the even-dimension value.
    """
    L = schmidt_L(state)
    base = 2 * math.cos(theta) + 2 * gamma1 * L * math.sin(theta)
    if state.dim_a % 2:
        cs = state.coeffs[-1]
        return base + 2 * cs * cs * (1 - math.cos(theta))
    return base


def svetlichny_closed_form(k: int, alpha: float, theta: float, gammas: Sequence[float]) -> float:
    if k < 1 or len(gammas) < k:
        raise ValueError(f"need at least k={k} sharpness values, got {len(gammas)}")
    return (2.0 ** (2 - k) * math.sin(2 * alpha) * (math.cos(theta) + math.sin(theta))
            * (gammas[k - 1] + _decay_product(gammas[: k - 1])))


# --------------------------------------------------------------------------
# cascade runs
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CascadeConfig:
    """A state plus the sharpness schedule of the sequential observers.

    The number of observers is the schedule's finite length and the angle is
    the schedule's angle.
    """

    state: Union[SchmidtState, GhzState]
    schedule: SharpnessSchedule

    def __post_init__(self):
        expected = CHSH if isinstance(self.state, SchmidtState) else SVETLICHNY
        if not isinstance(self.state, (SchmidtState, GhzState)):
            raise InvalidState(f"unsupported initial state {type(self.state).__name__}")
        if self.schedule.scenario != expected:
            raise ValueError(f"{type(self.state).__name__} needs a {expected} schedule, "
                             f"got {self.schedule.scenario}")
        if self.n < 1:
            raise ValueError("schedule has no feasible observer")

    @property
    def scenario(self) -> str:
        return self.schedule.scenario

    @property
    def theta(self) -> float:
        return self.schedule.theta

    @property
    def n(self) -> int:
        return self.schedule.n_feasible

    @property
    def gammas(self) -> tuple[float, ...]:
        return self.schedule.finite


@dataclass(frozen=True)
class CascadeStep:
    k: int
    gamma: float
    simulated: float
    closed_form: float
    violated: bool
    trace: float

    @property
    def gap(self) -> float:
        return self.simulated - self.closed_form


@dataclass(frozen=True)
class CascadeResult:
    scenario: str
    theta: float
    steps: tuple[CascadeStep, ...]
    states: tuple[np.ndarray, ...]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def threshold(self) -> float:
        return CHSH_LOCAL_BOUND if self.scenario == CHSH else SVETLICHNY_LOCAL_BOUND

    @property
    def simulated(self) -> np.ndarray:
        return np.array([s.simulated for s in self.steps])

    @property
    def closed_form(self) -> np.ndarray:
        return np.array([s.closed_form for s in self.steps])

    @property
    def all_violated(self) -> bool:
        return all(s.violated for s in self.steps)

    def max_violated_k(self) -> int:
        """Number of leading observers that all see a violation."""
        k = 0
        for s in self.steps:
            if not s.violated:
                break
            k += 1
        return k

    def gaps(self, tol: float = 1e-10) -> list[int]:
        """Observer indices whose simulated value departs from the closed form."""
        return [s.k for s in self.steps if abs(s.gap) > tol]


def check_state(rho, tol: float = STATE_TOL) -> float:
    """Raise unless ``rho`` is a Hermitian PSD unit-trace matrix; return its trace."""
    linalg.check_hermitian(rho, tol)
    tr = linalg.trace(rho)
    if abs(tr - 1.0) > tol:
        raise InvalidState(f"state trace drifted to {tr!r}")
    w, _ = linalg.eigen_hermitian(rho, tol)
    if w[0] < -tol:
        raise NotPsd(f"state has negative eigenvalue {w[0]:.3e}")
    return tr.real


def run_chsh_cascade(cfg: CascadeConfig) -> CascadeResult:
    if cfg.scenario != CHSH:
        raise ValueError("run_chsh_cascade needs a CHSH configuration")
    st: SchmidtState = cfg.state
    dims = (st.dim_a, st.dim_b)
    L = schmidt_L(st)
    gammas = cfg.gammas
    a0, a1 = (p.observable for p in alice_povms_bipartite(st.dim_a, cfg.theta))
    rho = density_bipartite(st)
    steps, states = [], [rho]
    for k in range(1, cfg.n + 1):
        tr = check_state(rho)
        bob = bob_povms_bipartite(st.dim_b, gammas[k - 1])
        value = chsh_expectation(rho, a0, a1, bob[0].observable, bob[1].observable)
        bound = chsh_bound_theorem1(k, L, cfg.theta, gammas)
        steps.append(CascadeStep(k, gammas[k - 1], value, bound, value > CHSH_LOCAL_BOUND, tr))
        rho = luders_step(rho, bob, dims, site=1)
        states.append(rho)
    check_state(rho)
    return CascadeResult(CHSH, cfg.theta, tuple(steps), tuple(states))


def run_svetlichny_cascade(cfg: CascadeConfig) -> CascadeResult:
    if cfg.scenario != SVETLICHNY:
        raise ValueError("run_svetlichny_cascade needs a Svetlichny configuration")
    g: GhzState = cfg.state
    dims = (2, 2, 2)
    gammas = cfg.gammas
    rho = density_ghz(g)
    steps, states = [], [rho]
    for k in range(1, cfg.n + 1):
        tr = check_state(rho)
        ms = tripartite_povms(cfg.theta, gammas[k - 1])
        value = svetlichny_expectation(rho, *ms.observables())
        closed = svetlichny_closed_form(k, g.alpha, cfg.theta, gammas)
        steps.append(CascadeStep(k, gammas[k - 1], value, closed, value > SVETLICHNY_LOCAL_BOUND, tr))
        rho = luders_step(rho, ms.charlie, dims, site=2)
        states.append(rho)
    check_state(rho)
    return CascadeResult(SVETLICHNY, cfg.theta, tuple(steps), tuple(states))


def run_cascade(cfg: CascadeConfig) -> CascadeResult:
    return run_chsh_cascade(cfg) if cfg.scenario == CHSH else run_svetlichny_cascade(cfg)

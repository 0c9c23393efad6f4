"""Two-outcome POVM families and the recursive sharpness schedules.

Every effect used here has the form ``(I + gamma * P) / 2`` where ``P`` is a
Hermitian involution (``P @ P == I``) built from Pauli blocks, so its
principal square root also has a closed form (see :func:`sqrt_effect_closed_form`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import linalg
from .errors import InvalidGamma, InvalidState, InvalidTheta, SearchFailed

THETA_MAX = math.pi / 4
_ANGLE_SLACK = 1e-12


def check_theta(theta: float) -> float:
    theta = float(theta)
    if not (0.0 < theta <= THETA_MAX + _ANGLE_SLACK):
        raise InvalidTheta(f"theta must lie in (0, pi/4], got {theta!r}")
    return min(theta, THETA_MAX)


def check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not (0.0 < gamma <= 1.0):
        raise InvalidGamma(f"sharpness must lie in (0, 1], got {gamma!r}")
    return gamma


@dataclass(frozen=True, eq=False)
class PovmPair:
    """Binary POVM ``{E, I - E}`` with cached principal square roots.

    ``sharpness`` and ``axis`` record the ``gamma`` and ``P`` the effect was
    built from, when known.
    """

    effect0: np.ndarray
    effect1: np.ndarray
    sqrt0: np.ndarray
    sqrt1: np.ndarray
    sharpness: Optional[float] = None
    axis: Optional[np.ndarray] = field(default=None, repr=False)

    @classmethod
    def from_effect(cls, effect, sharpness=None, axis=None) -> "PovmPair":
        e0 = linalg.check_hermitian(effect)
        e1 = linalg.identity(e0.shape[0]) - e0
        return cls(e0, e1, linalg.psd_sqrt(e0), linalg.psd_sqrt(e1), sharpness, axis)

    @classmethod
    def unsharp(cls, gamma: float, axis: np.ndarray) -> "PovmPair":
        """The pair ``{(I + gamma P)/2, (I - gamma P)/2}`` for an involution ``P``."""
        p = linalg.as_matrix(axis)
        eye = linalg.identity(p.shape[0])
        effect = 0.5 * (eye + gamma * p)
        if not _is_involution(p):
            return cls.from_effect(effect, sharpness=gamma, axis=p)
        # near gamma = 1 the small eigenvalue (1 - gamma)/2 drowns in eigensolver
        # noise, so use the exact root instead of a numerical one
        return cls(effect, eye - effect, sqrt_effect_closed_form(gamma, p, 1),
                   sqrt_effect_closed_form(gamma, p, -1), gamma, p)

    @property
    def dim(self) -> int:
        return self.effect0.shape[0]

    @property
    def effects(self) -> tuple[np.ndarray, np.ndarray]:
        return self.effect0, self.effect1

    @property
    def roots(self) -> tuple[np.ndarray, np.ndarray]:
        return self.sqrt0, self.sqrt1

    @property
    def observable(self) -> np.ndarray:
        """Outcome-0 effect minus outcome-1 effect."""
        return self.effect0 - self.effect1


def _is_involution(p, tol: float = 1e-12) -> bool:
    eye = linalg.identity(p.shape[0])
    return linalg.hermitian_defect(p) <= tol and float(np.max(np.abs(p @ p - eye))) <= tol


def sqrt_effect_closed_form(gamma: float, axis, sign: int = 1) -> np.ndarray:
    """Square root of ``(I + sign * gamma * P) / 2`` for a Hermitian involution ``P``."""
    p = linalg.as_matrix(axis)
    plus, minus = math.sqrt(1 + gamma), math.sqrt(1 - gamma)
    return ((plus + minus) * linalg.identity(p.shape[0]) + sign * (plus - minus) * p) / (2 * math.sqrt(2))


def block_operator(dim: int, block) -> np.ndarray:
    """Tile a 2x2 ``block`` down the diagonal of a ``dim x dim`` matrix.

    Even ``dim`` gives ``I_{dim/2} (x) block``; odd ``dim`` appends a trailing
    diagonal entry of 1 after ``floor(dim/2)`` copies.
    """
    if dim < 2:
        raise InvalidState(f"local dimension must be at least 2, got {dim}")
    out = np.zeros((dim, dim), dtype=np.complex128)
    half = dim // 2
    out[: 2 * half, : 2 * half] = linalg.kron(linalg.identity(half), block)
    if dim % 2:
        out[-1, -1] = 1.0
    return out


def alice_povms_bipartite(s: int, theta: float) -> tuple[PovmPair, PovmPair]:
    theta = check_theta(theta)
    c, sn = math.cos(theta), math.sin(theta)
    x, z = linalg.pauli(1), linalg.pauli(3)
    return (
        PovmPair.unsharp(1.0, block_operator(s, c * z + sn * x)),
        PovmPair.unsharp(1.0, block_operator(s, c * z - sn * x)),
    )


def bob_povms_bipartite(t: int, gamma_k: float) -> tuple[PovmPair, PovmPair]:
    """Bob's sharp ``Z``-block measurement and his unsharp ``X``-block measurement."""
    gamma_k = check_gamma(gamma_k)
    return (
        PovmPair.unsharp(1.0, block_operator(t, linalg.pauli(3))),
        PovmPair.unsharp(gamma_k, block_operator(t, linalg.pauli(1))),
    )


class TripartiteMeasurements(NamedTuple):
    alice: tuple[PovmPair, PovmPair]
    bob: tuple[PovmPair, PovmPair]
    charlie: tuple[PovmPair, PovmPair]

    def observables(self) -> tuple[np.ndarray, ...]:
        """``(A0, A1, B0, B1, C0, C1)``."""
        return tuple(p.observable for party in self for p in party)


def tripartite_povms(theta: float, gamma_k: float) -> TripartiteMeasurements:
    theta = check_theta(theta)
    gamma_k = check_gamma(gamma_k)
    x, y = linalg.pauli(1), linalg.pauli(2)
    c, sn = math.cos(theta), math.sin(theta)
    return TripartiteMeasurements(
        alice=(PovmPair.unsharp(1.0, x), PovmPair.unsharp(1.0, y)),
        bob=(PovmPair.unsharp(1.0, c * x - sn * y), PovmPair.unsharp(1.0, c * x + sn * y)),
        charlie=(PovmPair.unsharp(1.0, x), PovmPair.unsharp(gamma_k, y)),
    )


# --------------------------------------------------------------------------
# sharpness schedules
# --------------------------------------------------------------------------

CHSH = "chsh"
SVETLICHNY = "svetlichny"


@dataclass(frozen=True)
class SharpnessSchedule:
    """Per-observer sharpness values at one measurement angle.

    ``gammas[k-1]`` is observer ``k``'s sharpness, or ``None`` once the
    recursion has left ``(0, 1)`` and no later observer can be served.
    ``context`` is the Schmidt quantity ``L`` for CHSH schedules and the GHZ
    angle ``alpha`` for Svetlichny ones.
    """

    gammas: tuple[Optional[float], ...]
    theta: float
    epsilon: Optional[float]
    scenario: str
    context: Optional[float] = None

    def __post_init__(self):
        if self.scenario not in (CHSH, SVETLICHNY):
            raise ValueError(f"unknown scenario {self.scenario!r}")
        check_theta(self.theta)
        seen_sentinel = False
        for g in self.gammas:
            if g is None:
                seen_sentinel = True
            elif seen_sentinel:
                raise InvalidGamma("finite sharpness after an infeasible entry")
            else:
                check_gamma(g)

    @classmethod
    def explicit(cls, gammas: Sequence[float], theta: float, scenario: str = CHSH,
                 context: Optional[float] = None) -> "SharpnessSchedule":
        """Wrap hand-chosen sharpness values (each in ``(0, 1]``)."""
        return cls(tuple(float(g) for g in gammas), float(theta), None, scenario, context)

    @property
    def finite(self) -> tuple[float, ...]:
        out = []
        for g in self.gammas:
            if g is None:
                break
            out.append(g)
        return tuple(out)

    @property
    def n_feasible(self) -> int:
        return len(self.finite)

    def is_feasible(self, n: Optional[int] = None) -> bool:
        n = len(self.gammas) if n is None else n
        return self.n_feasible >= n


def _product_term(gammas: Sequence[float]) -> float:
    return math.prod(1.0 + math.sqrt(1.0 - g * g) for g in gammas)


def _deficit(gammas: Sequence[float]) -> float:
    """``2^m - prod_j (1 + sqrt(1 - g_j^2))`` for ``m = len(gammas)``, cancellation-free.

    Each factor is ``2 - d_j`` with ``d_j = g_j^2 / (1 + sqrt(1 - g_j^2))``.
    """
    log_ratio = math.fsum(math.log1p(-0.5 * g * g / (1.0 + math.sqrt(1.0 - g * g))) for g in gammas)
    return -(2.0 ** len(gammas)) * math.expm1(log_ratio)


def _recurse(first, later, n: int) -> tuple[Optional[float], ...]:
    # ``later(k, prefix)`` gives the raw k-th value from the finite prefix
    out: list[Optional[float]] = []
    g = first
    for k in range(1, n + 1):
        if k > 1:
            g = later(k, out) if out[-1] is not None else None
        out.append(g if g is not None and 0.0 < g < 1.0 else None)
    return tuple(out)


def gamma_schedule_chsh(L: float, epsilon: float, theta: float, n: int) -> SharpnessSchedule:
    """Bob sharpness values sitting a factor ``1 + epsilon`` above the violation threshold."""
    theta = check_theta(theta)
    if not 0.0 < L <= 1.0 + 1e-12:
        raise InvalidState(f"L must lie in (0, 1], got {L!r}")
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n!r}")
    # 1 - cos(theta) and 2^(k-1) - cos(theta) P cancel badly for tiny theta
    one_minus_cos = 2.0 * math.sin(0.5 * theta) ** 2
    scale = (1.0 + epsilon) / (L * math.sin(theta))
    first = scale * one_minus_cos

    def later(k, prefix):
        return scale * (_deficit(prefix) + one_minus_cos * _product_term(prefix))

    return SharpnessSchedule(_recurse(first, later, n), theta, float(epsilon), CHSH, float(L))


def gamma_schedule_svetlichny(alpha: float, epsilon: float, theta: float, n: int) -> SharpnessSchedule:
    """Charlie sharpness values for the GHZ family at angle ``alpha``.

    When ``sin^2(2 alpha) <= 1/2`` the first value already exceeds one and the
    whole schedule is infeasible.
    """
    theta = check_theta(theta)
    if not 0.0 < alpha < math.pi / 2:
        raise InvalidState(f"alpha must lie in (0, pi/2), got {alpha!r}")
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n!r}")
    denom = math.sin(2 * alpha) * (math.cos(theta) + math.sin(theta))
    first = (1.0 + epsilon) * (2.0 / denom - 1.0)

    def later(k, prefix):
        return (1.0 + epsilon) * (2.0 ** k / denom - _product_term(prefix))

    return SharpnessSchedule(_recurse(first, later, n), theta, float(epsilon), SVETLICHNY, float(alpha))


def theta_grid(points: int = 10_000) -> np.ndarray:
    """``points`` equally spaced angles ending at pi/4, excluding zero."""
    return THETA_MAX * np.arange(1, points + 1) / points


def find_theta_n(n: int, L: float, epsilon: float = 0.01, *, grid_points: int = 10_000,
                 bisection_steps: int = 60, floor: float = 1e-9) -> tuple[float, SharpnessSchedule]:
    """Locate the edge ``theta_n`` of the angle range where ``n`` Bobs stay below sharpness one.

    A coarse grid finds the largest feasible angle, bisection refines the
    boundary to the next (infeasible) grid point, and the returned schedule is
    evaluated at ``theta_n / 2`` so it sits strictly inside the feasible range.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n!r}")

    def feasible(theta):
        return gamma_schedule_chsh(L, epsilon, theta, n).is_feasible(n)

    grid = theta_grid(grid_points)
    ok = [feasible(th) for th in grid]
    if ok[-1]:
        theta_n = THETA_MAX
    else:
        idx = [i for i, flag in enumerate(ok) if flag]
        if idx:
            lo, hi = float(grid[idx[-1]]), float(grid[idx[-1] + 1])
        else:
            # below the grid: halve until something works
            hi = float(grid[0])
            lo = hi / 2
            while not feasible(lo):
                hi, lo = lo, lo / 2
                if lo < floor:
                    raise SearchFailed(
                        f"no feasible theta above {floor:g} for n={n} (L={L:g}, epsilon={epsilon:g})", k=n)
        for _ in range(bisection_steps):
            mid = 0.5 * (lo + hi)
            if feasible(mid):
                lo = mid
            else:
                hi = mid
        theta_n = lo

    theta = theta_n / 2
    while not feasible(theta):
        theta /= 2
        if theta < floor:
            raise SearchFailed(f"no feasible theta above {floor:g} for n={n}", k=n)
    return theta_n, gamma_schedule_chsh(L, epsilon, theta, n)


def scan_svetlichny_theta(alpha: float, n: int, epsilon: float = 0.01, *,
                          grid_points: int = 10_000) -> tuple[float, SharpnessSchedule]:
    """Largest grid angle at which ``n`` Charlies all get a sharpness in ``(0, 1)``.

    Raises :class:`SearchFailed` naming the first observer index that no grid
    angle can serve.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n!r}")
    best = 0
    for theta in theta_grid(grid_points)[::-1]:
        sched = gamma_schedule_svetlichny(alpha, epsilon, float(theta), n)
        if sched.is_feasible(n):
            return float(theta), sched
        best = max(best, sched.n_feasible)
    k = best + 1
    raise SearchFailed(f"no feasible theta for k={k}", k=k)


def min_first_gamma_svetlichny(alpha: float, epsilon: float, *, grid_points: int = 10_000) -> tuple[float, float]:
    """Smallest first-Charlie sharpness over the angle grid, and the angle achieving it.

    Uses the raw recursion value, so it may exceed one.
    """
    grid = theta_grid(grid_points)
    values = (1.0 + epsilon) * (2.0 / (math.sin(2 * alpha) * (np.cos(grid) + np.sin(grid))) - 1.0)
    i = int(np.argmin(values))
    return float(values[i]), float(grid[i])

"""Initial pure states: bipartite Schmidt-form states and generalized GHZ states."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidState

NORM_TOL = 1e-12


@dataclass(frozen=True)
class SchmidtState:
    """``sum_i c_i |i>|i>`` on a ``dim_a x dim_b`` system.

    Coefficients must be nonnegative, non-increasing and square-normalized;
    ``dim_a`` defaults to the number of coefficients and ``dim_b`` to ``dim_a``.
    """

    coeffs: tuple[float, ...]
    dim_a: int = 0
    dim_b: int = 0

    def __post_init__(self):
        c = tuple(float(x) for x in self.coeffs)
        object.__setattr__(self, "coeffs", c)
        if not self.dim_a:
            object.__setattr__(self, "dim_a", len(c))
        if not self.dim_b:
            object.__setattr__(self, "dim_b", self.dim_a)
        s, t = self.dim_a, self.dim_b
        if len(c) != s:
            raise InvalidState(f"expected {s} Schmidt coefficients, got {len(c)}")
        if not 1 <= s <= t:
            raise InvalidState(f"local dimensions must satisfy 1 <= s <= t, got s={s}, t={t}")
        if any(not math.isfinite(x) or x < 0 for x in c):
            raise InvalidState("Schmidt coefficients must be finite and nonnegative")
        if any(b > a for a, b in zip(c, c[1:])):
            raise InvalidState("Schmidt coefficients must be in non-increasing order")
        norm = math.fsum(x * x for x in c)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidState(f"sum of squared coefficients is {norm!r}, not 1")

    @classmethod
    def normalized(cls, coeffs, dim_a: int = 0, dim_b: int = 0) -> tuple["SchmidtState", float]:
        """Rescale (and sort) ``coeffs`` before validating.

        Returns the state together with the factor the coefficients were
        multiplied by.
        """
        c = sorted((float(x) for x in coeffs), reverse=True)
        norm = math.sqrt(math.fsum(x * x for x in c))
        if not norm > 0:
            raise InvalidState("cannot normalize an all-zero coefficient vector")
        factor = 1.0 / norm
        return cls(tuple(x * factor for x in c), dim_a, dim_b), factor

    @property
    def is_entangled(self) -> bool:
        return sum(1 for x in self.coeffs if x > 0) >= 2

    def ket(self) -> np.ndarray:
        psi = np.zeros(self.dim_a * self.dim_b, dtype=np.complex128)
        for i, c in enumerate(self.coeffs):
            psi[i * self.dim_b + i] = c
        return psi


@dataclass(frozen=True)
class GhzState:
    """``cos(alpha)|000> + sin(alpha)|111>`` with ``alpha`` in the open interval (0, pi/2)."""

    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        object.__setattr__(self, "alpha", a)
        if not 0.0 < a < math.pi / 2:
            raise InvalidState(f"alpha must lie in (0, pi/2), got {a!r}")

    @classmethod
    def from_sin2_2alpha(cls, value: float) -> "GhzState":
        """The state with ``sin^2(2 alpha) == value``, taking ``alpha`` in (0, pi/4]."""
        if not 0.0 < value <= 1.0:
            raise InvalidState(f"sin^2(2 alpha) must lie in (0, 1], got {value!r}")
        return cls(0.5 * math.asin(math.sqrt(value)))

    @property
    def sin2alpha(self) -> float:
        return math.sin(2 * self.alpha)

    def ket(self) -> np.ndarray:
        psi = np.zeros(8, dtype=np.complex128)
        psi[0] = math.cos(self.alpha)
        psi[7] = math.sin(self.alpha)
        return psi


def _projector(psi: np.ndarray) -> np.ndarray:
    return np.outer(psi, psi.conj())


def density_bipartite(st: SchmidtState) -> np.ndarray:
    """``|psi><psi|`` for a Schmidt state, indexed ``i * dim_b + j``."""
    return _projector(st.ket())


def density_ghz(g: GhzState) -> np.ndarray:
    return _projector(g.ket())


def schmidt_L(st: SchmidtState) -> float:
    """Twice the sum of products of consecutive disjoint coefficient pairs.

    For an odd number of coefficients the last one is left unpaired.
    """
    c = st.coeffs
    return 2.0 * math.fsum(c[i] * c[i + 1] for i in range(0, len(c) - 1, 2))

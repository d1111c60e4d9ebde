"""Flux parameter, self-adjoint extension convention and the Strichartz threshold."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import ConfigurationError, DomainError


class Convention(enum.Enum):
    """Which of the two distinguished extensions is in use for the k = 0 mode.

    COS_ONLY has sin(gamma) = 0, so the singular element is (K_alpha, 0);
    SIN_ONLY has cos(gamma) = 0 and singular element (0, i K_{1-alpha} e^{i theta}).
    """

    COS_ONLY = "CosOnly"
    SIN_ONLY = "SinOnly"

    @property
    def gamma(self) -> float:
        return 0.0 if self is Convention.COS_ONLY else math.pi / 2


def q_threshold(alpha: float) -> float:
    """Upper Lebesgue exponent q(alpha) = 2 / min(alpha, 1 - alpha)."""
    alpha = _check_alpha(alpha)
    return 2.0 / alpha if alpha <= 0.5 else 2.0 / (1.0 - alpha)


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"flux alpha must lie in the open interval (0, 1), got {alpha}")
    return alpha


@dataclass(frozen=True)
class FluxConfig:
    alpha: float
    convention: Convention
    q_alpha: float

    def __post_init__(self):
        alpha = _check_alpha(self.alpha)
        expected = Convention.COS_ONLY if alpha <= 0.5 else Convention.SIN_ONLY
        if self.convention is not expected:
            raise ConfigurationError(
                f"convention {self.convention.value} does not match alpha={alpha}; "
                f"{expected.value} is required")

    @property
    def gamma(self) -> float:
        return self.convention.gamma

    @property
    def weighted_slot(self) -> int:
        """Spinor component carrying the singular k = 0 behaviour (0 or 1)."""
        return 0 if self.convention is Convention.COS_ONLY else 1

    @property
    def singular_exponent(self) -> float:
        """a in r^{-a}: alpha for COS_ONLY, 1 - alpha for SIN_ONLY."""
        return min(self.alpha, 1.0 - self.alpha)


def select_extension(alpha: float) -> FluxConfig:
    """Flux configuration with the extension fixed by the size of alpha."""
    alpha = _check_alpha(alpha)
    conv = Convention.COS_ONLY if alpha <= 0.5 else Convention.SIN_ONLY
    return FluxConfig(alpha, conv, q_threshold(alpha))

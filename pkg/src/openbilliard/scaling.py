"""Exterior complex scaling profile.

The coordinate map g(x) is the identity for x >= x0 and a straight line of
complex slope theta for x <= x0 - d; in between the slope is blended with a
degree-7 smoothstep, whose first three derivatives vanish at both ends of
the layer, so g is (better than) three times continuously differentiable.
All quantities are available in closed form, including the extra potential
(2 g' g''' - 5 g''^2) / (4 g'^4) that appears in the scaled operator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidTheta


def _smoothstep7(t):
    """sigma(t) = 35 t^4 - 84 t^5 + 70 t^6 - 20 t^7, clamped outside [0, 1]."""
    t = np.clip(t, 0.0, 1.0)
    return t**4 * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t)))


def _smoothstep7_d1(t):
    tc = np.clip(t, 0.0, 1.0)
    return 140.0 * tc**3 * (1.0 - tc) ** 3


def _smoothstep7_d2(t):
    tc = np.clip(t, 0.0, 1.0)
    return 420.0 * tc**2 * (1.0 - tc) ** 2 * (1.0 - 2.0 * tc)


def _smoothstep7_int(t):
    """Integral of the smoothstep from 0 to t (t >= 0)."""
    tc = np.clip(t, 0.0, 1.0)
    s = tc**5 * (7.0 + tc * (-14.0 + tc * (10.0 - 2.5 * tc)))
    return s + np.maximum(t - 1.0, 0.0)


@dataclass(frozen=True)
class ScalingMap:
    """Complex scaling profile with anchor x0 and transition width d."""

    theta: complex
    x0: float
    d: float

    def __post_init__(self):
        if self.d <= 0:
            raise InvalidTheta("transition width d must be positive")
        if np.real(self.theta) <= 0:
            raise InvalidTheta(f"Re theta must be positive, got {self.theta}")

    @property
    def alpha(self) -> float:
        return float(np.angle(self.theta))

    def _t(self, x):
        return (self.x0 - np.asarray(x, dtype=float)) / self.d

    def g(self, x):
        x = np.asarray(x, dtype=float)
        return x - (self.theta - 1.0) * self.d * _smoothstep7_int(self._t(x))

    def gp(self, x):
        return 1.0 + (self.theta - 1.0) * _smoothstep7(self._t(x))

    def gpp(self, x):
        return -(self.theta - 1.0) / self.d * _smoothstep7_d1(self._t(x))

    def gppp(self, x):
        return (self.theta - 1.0) / self.d**2 * _smoothstep7_d2(self._t(x))


def make_scaling_map(theta: complex, x0: float, d: float) -> ScalingMap:
    return ScalingMap(theta=complex(theta), x0=float(x0), d=float(d))


@dataclass(frozen=True)
class ScaledCoefficients:
    """Pointwise coefficients of the scaled operator: 1/g'^2 and the extra potential."""

    inv_gp2: complex
    extra_potential: complex


def scaled_coefficients(smap: ScalingMap, x):
    """Evaluate 1/g'^2 and (2 g' g''' - 5 g''^2)/(4 g'^4) at x (scalar or array)."""
    gp = smap.gp(x)
    gpp = smap.gpp(x)
    gppp = smap.gppp(x)
    inv_gp2 = 1.0 / gp**2
    extra = (2.0 * gp * gppp - 5.0 * gpp**2) / (4.0 * gp**4)
    if np.ndim(x) == 0:
        return ScaledCoefficients(complex(inv_gp2), complex(extra))
    return ScaledCoefficients(inv_gp2, extra)

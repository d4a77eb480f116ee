"""Brooks-Corey soil functions, the Kirchhoff transform and its coefficients.

Conventions: ``h`` is suction head in cm (positive when unsaturated),
``z`` points downward, time is in minutes.  All functions accept scalars or
numpy arrays and return arrays of the broadcast shape (0-d for scalars).
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError, DomainError


@dataclass(frozen=True)
class SoilParams:
    """Hydraulic parameters of one homogeneous soil.

    Parameters
    ----------
    theta_r, theta_s, theta_0 : float
        Residual, saturated and initial moisture content.
    K_s : float
        Saturated hydraulic conductivity [cm/min].
    h_cap : float
        Capillary rise (air-entry suction) [cm].
    lam : float
        Brooks-Corey pore-size exponent lambda.
    m : float
        Relative permeability exponent, the product lambda * beta.
    """

    theta_r: float
    theta_s: float
    theta_0: float
    K_s: float
    h_cap: float
    lam: float
    m: float
    name: str = "custom"

    def __post_init__(self):
        vals = (self.theta_r, self.theta_s, self.theta_0, self.K_s,
                self.h_cap, self.lam, self.m)
        if not all(np.isfinite(v) for v in vals):
            raise ConfigurationError("soil parameters must be finite")
        if not 0.0 <= self.theta_r < self.theta_0 <= self.theta_s < 1.0:
            raise ConfigurationError(
                "soil moisture contents must satisfy "
                "0 <= theta_r < theta_0 <= theta_s < 1")
        for key in ("K_s", "h_cap", "lam", "m"):
            if getattr(self, key) <= 0:
                raise ConfigurationError(f"soil parameter {key} must be positive")

    @property
    def d_theta(self):
        """Drainable porosity theta_s - theta_r."""
        return self.theta_s - self.theta_r

    @property
    def beta(self):
        return self.m / self.lam

    @property
    def S_0(self):
        """Effective saturation of the initial moisture content."""
        return (self.theta_0 - self.theta_r) / self.d_theta


SOILS = {
    "sandy_clay": SoilParams(0.109, 0.321, 0.121, 0.002, 29.15, 0.168, 2.504,
                             name="sandy_clay"),
    "loam": SoilParams(0.027, 0.463, 0.040, 0.022, 11.15, 0.220, 2.660,
                       name="loam"),
}


def get_soil(name):
    """Return the tabulated soil called ``name``."""
    try:
        return SOILS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown soil {name!r}; choose one of {sorted(SOILS)}") from None


class KirchhoffCoefficients(NamedTuple):
    """Linearisation coefficients of the transformed equation.

    ``A`` [min/cm^2] multiplies the time derivative and ``B`` [1/cm] the
    vertical advection term in ``A u_t - lap(u) - B u_z = 0``.
    """

    A: np.ndarray
    B: np.ndarray


def _require_kirchhoff(soil):
    if soil.m <= 1.0:
        raise ConfigurationError(
            f"Kirchhoff transform needs m > 1 (got m={soil.m}); "
            "the integral diverges otherwise")


def saturation_from_suction(h, soil):
    """Effective saturation S(h) = (h/h_cap)^(-lambda), 1 when h <= h_cap."""
    h = np.asarray(h, dtype=float)
    ratio = np.maximum(h, soil.h_cap) / soil.h_cap
    return np.where(h <= soil.h_cap, 1.0, ratio ** (-soil.lam))


def suction_from_saturation(S, soil):
    """Suction head h = h_cap * S^(-1/lambda) for S in (0, 1]."""
    S = np.asarray(S, dtype=float)
    if np.any(~(S > 0.0)) or np.any(S > 1.0):
        raise DomainError("saturation must lie in (0, 1]")
    return soil.h_cap * S ** (-1.0 / soil.lam)


def relative_permeability(h, soil):
    """k_r(h) = (h/h_cap)^(-m) for h >= h_cap, 1 otherwise."""
    h = np.asarray(h, dtype=float)
    ratio = np.maximum(h, soil.h_cap) / soil.h_cap
    return np.where(h <= soil.h_cap, 1.0, ratio ** (-soil.m))


def kirchhoff(h, soil):
    """Kirchhoff variable u(h) = -int_h^inf k_r(s) ds [cm]."""
    _require_kirchhoff(soil)
    h = np.asarray(h, dtype=float)
    hc, m = soil.h_cap, soil.m
    c = hc / (m - 1.0)
    dry = -c * (np.maximum(h, hc) / hc) ** (1.0 - m)
    wet = (h - hc) - c
    return np.where(h >= hc, dry, wet)


def kirchhoff_inverse(u, soil):
    """Suction head h with ``kirchhoff(h) == u``; requires u < 0.

    The unsaturated branch is evaluated through ``log(-u)`` so that values
    of ``u`` within 1e-10 of zero keep full relative accuracy.
    """
    _require_kirchhoff(soil)
    u = np.asarray(u, dtype=float)
    if np.any(~(u < 0.0)):
        raise DomainError("Kirchhoff variable must be strictly negative")
    hc, m = soil.h_cap, soil.m
    c = hc / (m - 1.0)
    dry = hc * np.exp(np.log(np.maximum(-u, 0.0) / c) / (1.0 - m))
    wet = u + hc * m / (m - 1.0)
    return np.where(u >= -c, dry, wet)


def coefficients(h, soil):
    """Coefficients A(h) and B(h); both vanish when h <= h_cap.

    For h > h_cap::

        A = d_theta * lam / (K_s * h_cap) * (h/h_cap)^(m - lam - 1)
        B = -m / h
    """
    h = np.asarray(h, dtype=float)
    hc = soil.h_cap
    unsat = h > hc
    hh = np.where(unsat, h, 2.0 * hc)
    A = soil.d_theta * soil.lam / (soil.K_s * hc) * (hh / hc) ** (soil.m - soil.lam - 1.0)
    B = -soil.m / hh
    return KirchhoffCoefficients(np.where(unsat, A, 0.0), np.where(unsat, B, 0.0))


def moisture_content(S, soil):
    """theta = theta_r + S * (theta_s - theta_r)."""
    S = np.asarray(S, dtype=float)
    if np.any(~(S >= -1e-9)) or np.any(S > 1.0 + 1e-9):
        raise DomainError("saturation outside [0, 1]")
    return soil.theta_r + np.clip(S, 0.0, 1.0) * soil.d_theta


def effective_saturation(theta, soil):
    """Inverse of :func:`moisture_content`."""
    return (np.asarray(theta, dtype=float) - soil.theta_r) / soil.d_theta

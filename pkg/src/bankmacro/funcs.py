"""Shared functional forms: preferences, production, capital technology.

Everything here is written to accept scalars or numpy arrays interchangeably so
path-level (vectorized) evaluations reuse the same code as scalar residuals.
"""

from __future__ import annotations

import numpy as np

from .params import Calibration


# ---------------------------------------------------------------------------
# preferences (CRRA consumption utility, isoelastic labor disutility)
# ---------------------------------------------------------------------------

def crra_u(c, gamma):
    if gamma == 1.0:
        return np.log(c)
    return (c ** (1.0 - gamma) - 1.0) / (1.0 - gamma)


def crra_mu(c, gamma):
    """Marginal utility c^{-gamma}."""
    return c ** (-gamma)


def crra_mu2(c, gamma):
    """Second derivative -gamma c^{-gamma-1}."""
    return -gamma * c ** (-gamma - 1.0)


def labor_disutility(n, cal: Calibration):
    return cal.chi * n ** (1.0 + cal.phi) / (1.0 + cal.phi)


def labor_mu(n, cal: Calibration):
    """v'(N) = chi N^phi."""
    return cal.chi * n**cal.phi


def labor_mu2(n, cal: Calibration):
    return cal.chi * cal.phi * n ** (cal.phi - 1.0)


def utility_w(c, n, cal: Calibration):
    return crra_u(c, cal.gamma_w) - labor_disutility(n, cal)


def utility_b(c, cal: Calibration):
    return crra_u(c, cal.gamma_b)


def utility_e(c, cal: Calibration):
    return crra_u(c, cal.gamma_e)


# ---------------------------------------------------------------------------
# production F(xi*K, N) = (xi*K)^alpha N^(1-alpha)
# ---------------------------------------------------------------------------

def prod(k_eff, n, cal: Calibration):
    return k_eff**cal.alpha * n ** (1.0 - cal.alpha)


def prod_k(k_eff, n, cal: Calibration):
    return cal.alpha * k_eff ** (cal.alpha - 1.0) * n ** (1.0 - cal.alpha)


def prod_n(k_eff, n, cal: Calibration):
    return (1.0 - cal.alpha) * k_eff**cal.alpha * n ** (-cal.alpha)


def prod_kk(k_eff, n, cal: Calibration):
    return cal.alpha * (cal.alpha - 1.0) * k_eff ** (cal.alpha - 2.0) * n ** (1.0 - cal.alpha)


def prod_kn(k_eff, n, cal: Calibration):
    return cal.alpha * (1.0 - cal.alpha) * k_eff ** (cal.alpha - 1.0) * n ** (-cal.alpha)


def prod_k_inverse(x, cal: Calibration):
    """Capital-labor ratio solving F_K(k, 1) = x for Cobb-Douglas."""
    return (x / cal.alpha) ** (1.0 / (cal.alpha - 1.0))


# ---------------------------------------------------------------------------
# capital technology Phi(x) = zeta + kappa1 x^psi on investment rate x = I/K
# ---------------------------------------------------------------------------

def phi_of(x, cal: Calibration):
    return cal.zeta + cal.kappa1 * x**cal.psi


def phi_prime(x, cal: Calibration):
    return cal.kappa1 * cal.psi * x ** (cal.psi - 1.0)


def phi_second(x, cal: Calibration):
    return cal.kappa1 * cal.psi * (cal.psi - 1.0) * x ** (cal.psi - 2.0)


def phi_inverse(y, cal: Calibration):
    return ((y - cal.zeta) / cal.kappa1) ** (1.0 / cal.psi)


# ---------------------------------------------------------------------------
# internalized price functions of the planner problems
#
# With capital-market clearing K_t = (1-delta) xi_t K_{t-1} + Phi(I_t/K_{t-1})
# K_{t-1}, investment and the capital price are functions I(K_{t-1}, K_t,
# xi_t), Q(K_{t-1}, K_t, xi_t) = 1/Phi'(I/K_{-1}).  Planner first-order
# conditions use their partials (subscript 1 = w.r.t. K_{t-1}, 2 = w.r.t. K_t).
# ---------------------------------------------------------------------------

def investment_rate(k_lag, k, xi, cal: Calibration):
    """x = I/K_{-1} implied by capital-market clearing."""
    return phi_inverse(k / k_lag - (1.0 - cal.delta) * xi, cal)


def q_price(x, cal: Calibration):
    return 1.0 / phi_prime(x, cal)


def q_partials(k_lag, k, xi, cal: Calibration):
    """(Q, Q_1, Q_2, I_1, I_2) of the internalized capital-price function."""
    x = investment_rate(k_lag, k, xi, cal)
    q = q_price(x, cal)
    pp = phi_second(x, cal)
    q1 = q**3 * pp * k / k_lag**2           # dQ/dK_{-1}
    q2 = -(q**3) * pp / k_lag               # dQ/dK
    i1 = x - q * k / k_lag                  # dI/dK_{-1}
    i2 = q                                  # dI/dK
    return q, q1, q2, i1, i2

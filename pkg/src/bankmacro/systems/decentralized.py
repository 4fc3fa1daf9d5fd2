"""Decentralized competitive-equilibrium systems.

``FlexibleCE`` is the flexible-price economy under constant regulatory limits
(kappa, m): wholesale goods are sold at marginal cost (P^w = 1) and there is no
nominal block.  ``StickyCE`` adds Calvo retail pricing, a Taylor rule with a
floor on the nominal rate, and the Fisher decomposition of the nominal rate.

Registry conventions used across all systems:
  * ``V_b, V_e, V_w`` are type-level welfare aggregates discounted at the
    worker's factor beta (the survival-adjusted population welfare measure
    telescopes to exactly this recursion).
  * ``B`` is the gross loan repayment due in the current period,
    B_t = R^L_t L_{t-1}.
  * Lead slots stand for one-step-ahead expectations (certainty-equivalent
    stencil); covariance corrections are handled by the second-order solver.
"""

from __future__ import annotations

import numpy as np

from .. import funcs
from ..errors import IncompatiblePolicy
from ..model import EquationSystem, RegimeConstraint
from ..params import Calibration


def retail_block_ss(cal: Calibration, pi: float) -> tuple[float, float, float]:
    """Steady-state (reset price, wholesale price, dispersion) at inflation pi.

    Requires theta * pi^(eps-1) < 1 so that the Calvo aggregator converges.
    """
    th, eps, beta = cal.theta, cal.epsilon, cal.beta
    if th * pi ** (eps - 1.0) >= 1.0:
        raise IncompatiblePolicy(
            f"inflation {pi} too high for price-setting block (theta={th})"
        )
    p_reset = ((1.0 - th) / (1.0 - th * pi ** (eps - 1.0))) ** (1.0 / (eps - 1.0))
    p_w = (
        (eps - 1.0)
        / eps
        * (1.0 - beta * th * pi**eps)
        / (1.0 - beta * th * pi ** (eps - 1.0))
        * p_reset
    )
    delta_disp = (1.0 - th) * p_reset ** (-eps) / (1.0 - th * pi**eps)
    return p_reset, p_w, delta_disp


class FlexibleCE(EquationSystem):
    """Flexible-price decentralized equilibrium with leverage and collateral
    constraints (two switching rows)."""

    NAMES = (
        "C_b", "C_e", "C_w", "D", "L", "B", "K", "I", "N", "Y",
        "Q", "R", "R_L", "R_K", "W",
        "lam_b", "lam_e", "A", "xi", "V_b", "V_e", "V_w",
    )

    def _build_names(self):
        return self.NAMES

    def _build_constraints(self):
        kappa = self.pol.kappa_bar
        m = self.pol.m_bar

        def lev_gap(cur, lead):
            return (1.0 - kappa) * self.col(cur, "L") - self.col(cur, "D")

        def lev_mult(cur, lead):
            return self.col(cur, "lam_b")

        def col_gap(cur, lead):
            return (
                m * self.col(lead, "Q") * self.col(lead, "xi") * self.col(cur, "K")
                - self.col(lead, "R_L") * self.col(cur, "L")
            )

        def col_mult(cur, lead):
            return self.col(cur, "lam_e")

        return (
            RegimeConstraint("leverage", lev_gap, lev_mult),
            RegimeConstraint("collateral", col_gap, col_mult),
        )

    def _residuals_core(self, lag, cur, lead, eps, regime):
        cal, pol = self.cal, self.pol
        kappa, m = pol.kappa_bar, pol.m_bar
        tau_D, tau_K, tau_L, tau_N = pol.tau_D, pol.tau_K, pol.tau_L, pol.tau_N
        bind_lev, bind_col = regime

        (C_b, C_e, C_w, D, L, B, K, I, N, Y, Q, R, R_L, R_K, W,
         lam_b, lam_e, A, xi, V_b, V_e, V_w) = cur
        (l_C_b, l_C_e, l_C_w, l_D, l_L, l_B, l_K, l_I, l_N, l_Y, l_Q, l_R,
         l_R_L, l_R_K, l_W, l_lam_b, l_lam_e, l_A, l_xi, l_V_b, l_V_e,
         l_V_w) = lag
        (f_C_b, f_C_e, f_C_w, f_D, f_L, f_B, f_K, f_I, f_N, f_Y, f_Q, f_R,
         f_R_L, f_R_K, f_W, f_lam_b, f_lam_e, f_A, f_xi, f_V_b, f_V_e,
         f_V_w) = lead

        uw = funcs.crra_mu(C_w, cal.gamma_w)
        f_uw = funcs.crra_mu(f_C_w, cal.gamma_w)
        ub = funcs.crra_mu(C_b, cal.gamma_b)
        f_ub = funcs.crra_mu(f_C_b, cal.gamma_b)
        ue = funcs.crra_mu(C_e, cal.gamma_e)
        f_ue = funcs.crra_mu(f_C_e, cal.gamma_e)

        k_eff = xi * l_K
        f_k_eff = f_xi * K
        x_inv = I / l_K

        rows = [
            # worker labor supply and deposit Euler equation
            W * uw - funcs.labor_mu(N, cal),
            uw - cal.beta * R * f_uw,
            # banker: budget, leverage switching row, deposit and loan Eulers
            C_b + L - R_L * l_L + l_R * l_D - D,
            ((1.0 - kappa) * L - D) if bind_lev else lam_b,
            (1.0 - tau_D) * ub - cal.beta_b * R * f_ub - lam_b,
            ub - cal.beta_b * f_ub * f_R_L - lam_b * (1.0 - kappa),
            # entrepreneur: budget, collateral switching row, labor demand,
            # loan and capital Eulers
            C_e + Q * K + W * N + R_L * l_L
            - A * funcs.prod(k_eff, N, cal)
            - Q * (1.0 - cal.delta) * k_eff
            - L,
            (f_R_L * L - m * f_Q * f_xi * K) if bind_col else lam_e,
            (1.0 + tau_N) * W - A * funcs.prod_n(k_eff, N, cal),
            (1.0 - tau_L) * ue - cal.beta_e * f_ue * f_R_L - lam_e * f_R_L,
            (1.0 + tau_K) * ue * Q
            - cal.beta_e
            * f_ue
            * (f_A * funcs.prod_k(f_k_eff, f_N, cal) + f_Q * (1.0 - cal.delta))
            * f_xi
            - lam_e * m * f_Q * f_xi,
            # capital good producers and accumulation
            Q * funcs.phi_prime(x_inv, cal) - 1.0,
            K - (1.0 - cal.delta) * k_eff - funcs.phi_of(x_inv, cal) * l_K,
            # market clearing and bookkeeping identities
            A * funcs.prod(k_eff, N, cal) - Y,
            Y - C_b - C_e - C_w - I,
            R_K * l_Q - (A * funcs.prod_k(k_eff, N, cal) + Q * (1.0 - cal.delta)) * xi,
            B - R_L * l_L,
            # exogenous processes
            np.log(A) - cal.rho_a * np.log(l_A) - eps[0],
            np.log(xi) - cal.rho_xi * np.log(l_xi) - eps[1],
            # welfare recursions
            V_b - funcs.utility_b(C_b, cal) - cal.beta * f_V_b,
            V_e - funcs.utility_e(C_e, cal) - cal.beta * f_V_e,
            V_w - funcs.utility_w(C_w, N, cal) - cal.beta * f_V_w,
        ]
        return rows


class StickyCE(EquationSystem):
    """Sticky-price decentralized equilibrium: adds Calvo retail pricing, a
    Taylor rule with an effective floor on the nominal rate, and the Fisher
    relation (three switching rows)."""

    NAMES = FlexibleCE.NAMES + (
        "P_w", "p_reset", "Pi", "Delta", "Om1", "Om2", "R_star", "R_N",
    )

    def _build_names(self):
        return self.NAMES

    def __init__(self, variant, cal, pol, weights):
        super().__init__(variant, cal, pol, weights)
        # flexible-markup anchors of the policy feedback rule
        _, self.p_w_ss, _ = retail_block_ss(self.cal, pol.pi_bar)

    def _build_constraints(self):
        kappa = self.pol.kappa_bar
        m = self.pol.m_bar
        r_lower = self.pol.r_lower

        def lev_gap(cur, lead):
            return (1.0 - kappa) * self.col(cur, "L") - self.col(cur, "D")

        def lev_mult(cur, lead):
            return self.col(cur, "lam_b")

        def col_gap(cur, lead):
            return (
                m * self.col(lead, "Q") * self.col(lead, "xi") * self.col(cur, "K")
                - self.col(lead, "R_L") * self.col(cur, "L")
            )

        def col_mult(cur, lead):
            return self.col(cur, "lam_e")

        def elb_gap(cur, lead):
            return self.col(cur, "R") * self.col(lead, "Pi") - r_lower

        def elb_mult(cur, lead):
            return r_lower - self.col(cur, "R_star")

        return (
            RegimeConstraint("leverage", lev_gap, lev_mult),
            RegimeConstraint("collateral", col_gap, col_mult),
            RegimeConstraint("elb", elb_gap, elb_mult),
        )

    def _residuals_core(self, lag, cur, lead, eps, regime):
        cal, pol = self.cal, self.pol
        kappa, m = pol.kappa_bar, pol.m_bar
        tau_D, tau_K, tau_L, tau_N = pol.tau_D, pol.tau_K, pol.tau_L, pol.tau_N
        th, epsl = cal.theta, cal.epsilon
        bind_lev, bind_col, bind_elb = regime

        (C_b, C_e, C_w, D, L, B, K, I, N, Y, Q, R, R_L, R_K, W,
         lam_b, lam_e, A, xi, V_b, V_e, V_w,
         P_w, p_reset, Pi, Delta, Om1, Om2, R_star, R_N) = cur
        (l_C_b, l_C_e, l_C_w, l_D, l_L, l_B, l_K, l_I, l_N, l_Y, l_Q, l_R,
         l_R_L, l_R_K, l_W, l_lam_b, l_lam_e, l_A, l_xi, l_V_b, l_V_e, l_V_w,
         l_P_w, l_p_reset, l_Pi, l_Delta, l_Om1, l_Om2, l_R_star, l_R_N) = lag
        (f_C_b, f_C_e, f_C_w, f_D, f_L, f_B, f_K, f_I, f_N, f_Y, f_Q, f_R,
         f_R_L, f_R_K, f_W, f_lam_b, f_lam_e, f_A, f_xi, f_V_b, f_V_e, f_V_w,
         f_P_w, f_p_reset, f_Pi, f_Delta, f_Om1, f_Om2, f_R_star,
         f_R_N) = lead

        uw = funcs.crra_mu(C_w, cal.gamma_w)
        f_uw = funcs.crra_mu(f_C_w, cal.gamma_w)
        ub = funcs.crra_mu(C_b, cal.gamma_b)
        f_ub = funcs.crra_mu(f_C_b, cal.gamma_b)
        ue = funcs.crra_mu(C_e, cal.gamma_e)
        f_ue = funcs.crra_mu(f_C_e, cal.gamma_e)
        sdf_w = cal.beta * f_uw / uw  # worker stochastic discount factor

        k_eff = xi * l_K
        f_k_eff = f_xi * K
        x_inv = I / l_K

        rows = [
            # worker labor supply and deposit Euler equation
            W * uw - funcs.labor_mu(N, cal),
            uw - cal.beta * R * f_uw,
            # banker block
            C_b + L - R_L * l_L + l_R * l_D - D,
            ((1.0 - kappa) * L - D) if bind_lev else lam_b,
            (1.0 - tau_D) * ub - cal.beta_b * R * f_ub - lam_b,
            ub - cal.beta_b * f_ub * f_R_L - lam_b * (1.0 - kappa),
            # entrepreneur block (wholesale producer, paid P_w per unit)
            C_e + Q * K + W * N + R_L * l_L
            - P_w * A * funcs.prod(k_eff, N, cal)
            - Q * (1.0 - cal.delta) * k_eff
            - L,
            (f_R_L * L - m * f_Q * f_xi * K) if bind_col else lam_e,
            (1.0 + tau_N) * W - P_w * A * funcs.prod_n(k_eff, N, cal),
            (1.0 - tau_L) * ue - cal.beta_e * f_ue * f_R_L - lam_e * f_R_L,
            (1.0 + tau_K) * ue * Q
            - cal.beta_e
            * f_ue
            * (f_P_w * f_A * funcs.prod_k(f_k_eff, f_N, cal) + f_Q * (1.0 - cal.delta))
            * f_xi
            - lam_e * m * f_Q * f_xi,
            # capital good producers and accumulation
            Q * funcs.phi_prime(x_inv, cal) - 1.0,
            K - (1.0 - cal.delta) * k_eff - funcs.phi_of(x_inv, cal) * l_K,
            # goods-market clearing with price dispersion
            A * funcs.prod(k_eff, N, cal) - Delta * Y,
            Y - C_b - C_e - C_w - I,
            R_K * l_Q - (P_w * A * funcs.prod_k(k_eff, N, cal) + Q * (1.0 - cal.delta)) * xi,
            B - R_L * l_L,
            # exogenous processes
            np.log(A) - cal.rho_a * np.log(l_A) - eps[0],
            np.log(xi) - cal.rho_xi * np.log(l_xi) - eps[1],
            # welfare recursions
            V_b - funcs.utility_b(C_b, cal) - cal.beta * f_V_b,
            V_e - funcs.utility_e(C_e, cal) - cal.beta * f_V_e,
            V_w - funcs.utility_w(C_w, N, cal) - cal.beta * f_V_w,
            # retail pricing block
            (epsl - 1.0) * p_reset * Om2 - epsl * Om1,
            Om1 - P_w * Y - th * sdf_w * f_Pi**epsl * f_Om1,
            Om2 - Y - th * sdf_w * f_Pi ** (epsl - 1.0) * f_Om2,
            1.0 - th * Pi ** (epsl - 1.0) - (1.0 - th) * p_reset ** (1.0 - epsl),
            Delta - th * Pi**epsl * l_Delta - (1.0 - th) * p_reset ** (-epsl),
            # monetary policy: feedback rule, floor switching row, Fisher
            R_star
            - l_R_star**pol.rho_R
            * (
                (pol.pi_bar / cal.beta)
                * (Pi / pol.pi_bar) ** pol.eta_pi
                * (P_w / self.p_w_ss) ** pol.eta_y
            )
            ** (1.0 - pol.rho_R),
            (R_N - pol.r_lower) if bind_elb else (R_N - R_star),
            R_N - R * f_Pi,
        ]
        return rows

"""Sticky-price planner systems.

``PlannerSticky`` is the constrained-efficient allocation in the sticky-price
economy.  The planner internalizes the retail pricing recursion (wholesale
revenue enters the consolidated budget through the discounted reset-price sum
Om1) and either takes the monetary block as given -- the CEA variant, which
appends the interest-rate rule, the rate floor and the Fisher identity -- or
chooses the inflation path directly subject only to the floor (the CEA_OLLMP
variant, with first-order conditions for price dispersion and inflation and a
switching multiplier on the floor).

``PlannerOLLMP`` is the joint Ramsey problem: optimal leverage limits (the
four credit-margin switching rows of the flexible-price Ramsey system) plus
optimal monetary policy under the rate floor.  Because wholesale revenue
appears inside the entrepreneur capital-Euler implementability through the
reset-price sum, the inflation-block first-order conditions use the composite
multiplier lamC_til = lam_C + lam_K(-1) * beta_e * u'_e * alpha / beta, which
has its own definition row.

Registry notes shared with the flexible planners, plus:
  lam_Om    -- reset-price-sum recursion implementability
  lam_Delta -- price-dispersion recursion (inflation-choosing variants)
  lam_R     -- rate-floor multiplier, switching (inflation-choosing variants)
"""

from __future__ import annotations

import numpy as np

from .. import funcs
from ..model import EquationSystem, RegimeConstraint
from .decentralized import retail_block_ss


class PlannerSticky(EquationSystem):
    """Constrained-efficient allocation with sticky retail prices; the CEA
    variant keeps the decentralized monetary block, the CEA_OLLMP variant
    chooses inflation under the rate floor (with limits relaxed to (0, 1))."""

    NAMES_TAYLOR = (
        "C_b", "C_e", "C_w", "D", "L", "B", "K", "I", "N", "Y",
        "Q", "R", "R_L", "R_K", "W",
        "lam_b", "lam_L", "lam_C", "lam_e", "lam_Y", "lam_Om",
        "P_w", "p_reset", "Pi", "Delta", "Om1", "R_star", "R_N",
        "A", "xi", "V_b", "V_e", "V_w",
    )
    NAMES_OPTIMAL_MP = (
        "C_b", "C_e", "C_w", "D", "L", "B", "K", "I", "N", "Y",
        "Q", "R", "R_L", "R_K", "W",
        "lam_b", "lam_L", "lam_C", "lam_e", "lam_Y", "lam_Om",
        "lam_Delta", "lam_R",
        "P_w", "p_reset", "Pi", "Delta", "Om1",
        "A", "xi", "V_b", "V_e", "V_w",
    )

    def __init__(self, variant, cal, pol, weights):
        self.chooses_inflation = variant.tag == "CEA_OLLMP"
        super().__init__(variant, cal, pol, weights)
        if self.chooses_inflation:
            self.kappa_eff, self.m_eff = 0.0, 1.0
            self.p_w_ss = None
        else:
            self.kappa_eff, self.m_eff = pol.kappa_bar, pol.m_bar
            self.p_w_ss = retail_block_ss(self.cal, pol.pi_bar)[1]
        self.d_pin = 0.0

    def attach_steady_state(self, ss):
        super().attach_steady_state(ss)
        self.d_pin = float(ss["D"])

    def _build_names(self):
        return self.NAMES_OPTIMAL_MP if self.chooses_inflation else self.NAMES_TAYLOR

    def _build_constraints(self):
        if self.chooses_inflation:
            kappa, m = 0.0, 1.0
        else:
            kappa, m = self.pol.kappa_bar, self.pol.m_bar

        def lev_gap(cur, lead):
            return (1.0 - kappa) * self.col(cur, "L") - self.col(cur, "D")

        def lev_mult(cur, lead):
            return self.col(cur, "lam_b")

        def col_gap(cur, lead):
            return (
                m * self.col(lead, "Q") * self.col(lead, "xi") * self.col(cur, "K")
                - self.col(lead, "B")
            )

        def col_mult(cur, lead):
            return self.col(cur, "lam_e")

        def elb_gap(cur, lead):
            return self.col(cur, "R") * self.col(lead, "Pi") - self.pol.r_lower

        if self.chooses_inflation:
            def elb_mult(cur, lead):
                return self.col(cur, "lam_R")
        else:
            def elb_mult(cur, lead):
                return self.pol.r_lower - self.col(cur, "R_star")

        return (
            RegimeConstraint("leverage", lev_gap, lev_mult),
            RegimeConstraint("collateral", col_gap, col_mult),
            RegimeConstraint("elb", elb_gap, elb_mult),
        )

    def _residuals_core(self, lag, cur, lead, eps, regime):
        if self.chooses_inflation:
            return self._rows_optimal_mp(lag, cur, lead, eps, regime)
        return self._rows_taylor(lag, cur, lead, eps, regime)

    def _rows_taylor(self, lag, cur, lead, eps, regime):
        cal = self.cal
        pol = self.pol
        w = self.weights
        kappa, m = self.kappa_eff, self.m_eff
        beta, beta_b = cal.beta, cal.beta_b
        theta, epsil = cal.theta, cal.epsilon
        bind_lev, bind_col, bind_elb = regime

        (C_b, C_e, C_w, D, L, B, K, I, N, Y, Q, R, R_L, R_K, W,
         lam_b, lam_L, lam_C, lam_e, lam_Y, lam_Om,
         P_w, p_reset, Pi, Delta, Om1, R_star, R_N,
         A, xi, V_b, V_e, V_w) = cur
        (l_C_b, l_C_e, l_C_w, l_D, l_L, l_B, l_K, l_I, l_N, l_Y, l_Q, l_R,
         l_R_L, l_R_K, l_W, l_lam_b, l_lam_L, l_lam_C, l_lam_e, l_lam_Y,
         l_lam_Om, l_P_w, l_p_reset, l_Pi, l_Delta, l_Om1, l_R_star, l_R_N,
         l_A, l_xi, l_V_b, l_V_e, l_V_w) = lag
        (f_C_b, f_C_e, f_C_w, f_D, f_L, f_B, f_K, f_I, f_N, f_Y, f_Q, f_R,
         f_R_L, f_R_K, f_W, f_lam_b, f_lam_L, f_lam_C, f_lam_e, f_lam_Y,
         f_lam_Om, f_P_w, f_p_reset, f_Pi, f_Delta, f_Om1, f_R_star, f_R_N,
         f_A, f_xi, f_V_b, f_V_e, f_V_w) = lead

        uw = funcs.crra_mu(C_w, cal.gamma_w)
        uww = funcs.crra_mu2(C_w, cal.gamma_w)
        l_uw = funcs.crra_mu(l_C_w, cal.gamma_w)
        f_uw = funcs.crra_mu(f_C_w, cal.gamma_w)
        ub = funcs.crra_mu(C_b, cal.gamma_b)
        ubb = funcs.crra_mu2(C_b, cal.gamma_b)
        f_ub = funcs.crra_mu(f_C_b, cal.gamma_b)
        ue = funcs.crra_mu(C_e, cal.gamma_e)

        R1 = R / uw
        R2_lag = -beta * l_R**2 / l_uw
        W_C = cal.gamma_w * W / C_w
        W_N = cal.phi * W / N

        k_eff = xi * l_K
        f_k_eff = f_xi * K
        x_inv = I / l_K
        _, q1, q2, i1, i2 = funcs.q_partials(l_K, K, xi, cal)
        _, f_q1, f_q2, f_i1, f_i2 = funcs.q_partials(K, f_K, f_xi, cal)

        mk = (epsil - 1.0) / epsil

        rows = [
            # planner optimality for consumption of each type
            w.omega_b * ub - lam_Y - lam_C + lam_L * ubb * L
            - (l_lam_L * beta_b * (ubb * B + ub) + l_lam_e) / beta,
            w.omega_e * ue - lam_Y - lam_C,
            w.omega_w * uw - lam_Y - lam_C * W_C * N
            - (lam_L * beta_b * f_ub + beta * f_lam_C + lam_e) * R1 * uww * D
            - (l_lam_L * beta_b * ub + beta * lam_C + l_lam_e)
            * R2_lag * uww * l_D / beta
            + (
                (lam_C * Delta - lam_Om) * Om1
                - (lam_C * P_w * Delta - lam_Om * mk * p_reset) * Y
            )
            * uww / uw
            - (l_lam_C * l_Delta * Pi - l_lam_Om * l_p_reset / p_reset)
            * theta * Pi ** (epsil - 1.0) * Om1 * uww / l_uw,
            # deposits held at the pinned level
            D - self.d_pin,
            # planner optimality for capital
            -lam_C * (q2 * (K - (1.0 - cal.delta) * k_eff) + Q)
            + lam_e * m * (f_q1 * K + f_Q) * f_xi
            - lam_Y * i2
            + beta
            * (
                (f_lam_Om * mk * f_p_reset + f_lam_Y)
                * (f_A / f_Delta) * funcs.prod_k(f_k_eff, f_N, cal) * f_xi
                + f_lam_C
                * (
                    f_Q * (1.0 - cal.delta) * f_xi
                    - f_q1 * (f_K - (1.0 - cal.delta) * f_xi * K)
                )
                - f_lam_Y * f_i1
            )
            + l_lam_e * m * q2 * xi * l_K / beta,
            # planner optimality for loans
            lam_b * (1.0 - kappa) + lam_L * ub
            - (l_lam_L * beta_b * ub + l_lam_e) / beta,
            # planner optimality for hours
            -w.omega_w * funcs.labor_mu(N, cal)
            + (lam_Om * mk * p_reset + lam_Y)
            * (A / Delta) * funcs.prod_n(k_eff, N, cal)
            - lam_C * (W_N * N + W),
            # planner optimality for the reset-price sum
            lam_C * Delta - lam_Om
            - (l_lam_C * l_Delta * Pi - l_lam_Om * l_p_reset / p_reset)
            * theta * Pi ** (epsil - 1.0) * uw / l_uw,
            # banker loan-Euler implementability
            (ub * L - beta_b * f_ub * f_B) if self.d_pin == 0.0 else lam_L,
            # consolidated banker+entrepreneur budget (wholesale revenue via
            # the reset-price sum recursion)
            Delta * (Om1 - beta * theta * (f_uw / uw) * f_Pi**epsil * f_Om1)
            - Q * (K - (1.0 - cal.delta) * k_eff)
            - W * N + D - l_R * l_D - C_b - C_e,
            # reset-price sum recursion
            mk * p_reset * (A / Delta) * funcs.prod(k_eff, N, cal)
            + beta * theta * (f_uw / uw) * f_Pi ** (epsil - 1.0)
            * (p_reset / f_p_reset) * f_Om1
            - Om1,
            # switching rows: leverage limit and collateral limit
            ((1.0 - kappa) * L - D) if bind_lev else lam_b,
            (m * f_Q * f_xi * K - f_B) if bind_col else lam_e,
            # wholesale clearing and final-good resource constraint
            A * funcs.prod(k_eff, N, cal) - Delta * Y,
            Y - C_b - C_e - C_w - I,
            # relative wholesale price consistent with the revenue recursion
            P_w * A * funcs.prod(k_eff, N, cal)
            - Delta * (Om1 - beta * theta * (f_uw / uw) * f_Pi**epsil * f_Om1),
            # reset price and dispersion identities
            1.0 - theta * Pi ** (epsil - 1.0)
            - (1.0 - theta) * p_reset ** (1.0 - epsil),
            Delta - theta * Pi**epsil * l_Delta
            - (1.0 - theta) * p_reset ** (-epsil),
            # monetary block taken as given: rate rule, floor, Fisher
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
            # internalized price functions and bookkeeping
            W * uw - funcs.labor_mu(N, cal),
            uw - beta * R * f_uw,
            Q * funcs.phi_prime(x_inv, cal) - 1.0,
            K - (1.0 - cal.delta) * k_eff - funcs.phi_of(x_inv, cal) * l_K,
            B - (C_b + L - D + l_R * l_D),
            R_L * l_L - B,
            R_K * l_Q
            - (P_w * A * funcs.prod_k(k_eff, N, cal) + Q * (1.0 - cal.delta)) * xi,
            # exogenous processes
            np.log(A) - cal.rho_a * np.log(l_A) - eps[0],
            np.log(xi) - cal.rho_xi * np.log(l_xi) - eps[1],
            # welfare recursions
            V_b - funcs.utility_b(C_b, cal) - beta * f_V_b,
            V_e - funcs.utility_e(C_e, cal) - beta * f_V_e,
            V_w - funcs.utility_w(C_w, N, cal) - beta * f_V_w,
        ]
        return rows

    def _rows_optimal_mp(self, lag, cur, lead, eps, regime):
        cal = self.cal
        pol = self.pol
        w = self.weights
        beta, beta_b = cal.beta, cal.beta_b
        theta, epsil = cal.theta, cal.epsilon
        bind_lev, bind_col, bind_elb = regime

        (C_b, C_e, C_w, D, L, B, K, I, N, Y, Q, R, R_L, R_K, W,
         lam_b, lam_L, lam_C, lam_e, lam_Y, lam_Om, lam_Delta, lam_R,
         P_w, p_reset, Pi, Delta, Om1,
         A, xi, V_b, V_e, V_w) = cur
        (l_C_b, l_C_e, l_C_w, l_D, l_L, l_B, l_K, l_I, l_N, l_Y, l_Q, l_R,
         l_R_L, l_R_K, l_W, l_lam_b, l_lam_L, l_lam_C, l_lam_e, l_lam_Y,
         l_lam_Om, l_lam_Delta, l_lam_R, l_P_w, l_p_reset, l_Pi, l_Delta,
         l_Om1, l_A, l_xi, l_V_b, l_V_e, l_V_w) = lag
        (f_C_b, f_C_e, f_C_w, f_D, f_L, f_B, f_K, f_I, f_N, f_Y, f_Q, f_R,
         f_R_L, f_R_K, f_W, f_lam_b, f_lam_L, f_lam_C, f_lam_e, f_lam_Y,
         f_lam_Om, f_lam_Delta, f_lam_R, f_P_w, f_p_reset, f_Pi, f_Delta,
         f_Om1, f_A, f_xi, f_V_b, f_V_e, f_V_w) = lead

        uw = funcs.crra_mu(C_w, cal.gamma_w)
        uww = funcs.crra_mu2(C_w, cal.gamma_w)
        l_uw = funcs.crra_mu(l_C_w, cal.gamma_w)
        f_uw = funcs.crra_mu(f_C_w, cal.gamma_w)
        ub = funcs.crra_mu(C_b, cal.gamma_b)
        ubb = funcs.crra_mu2(C_b, cal.gamma_b)
        f_ub = funcs.crra_mu(f_C_b, cal.gamma_b)
        ue = funcs.crra_mu(C_e, cal.gamma_e)

        R1 = R / uw
        R2_lag = -beta * l_R**2 / l_uw
        W_C = cal.gamma_w * W / C_w
        W_N = cal.phi * W / N

        k_eff = xi * l_K
        f_k_eff = f_xi * K
        x_inv = I / l_K
        _, q1, q2, i1, i2 = funcs.q_partials(l_K, K, xi, cal)
        _, f_q1, f_q2, f_i1, f_i2 = funcs.q_partials(K, f_K, f_xi, cal)

        mk = (epsil - 1.0) / epsil
        # slope of the reset price in inflation along the Calvo identity
        ptilde_prime = theta * Pi ** (epsil - 2.0) * p_reset**epsil / (1.0 - theta)

        rows = [
            # planner optimality for consumption of each type
            w.omega_b * ub - lam_Y - lam_C + lam_L * ubb * L
            - (l_lam_L * beta_b * (ubb * B + ub) + l_lam_e) / beta,
            w.omega_e * ue - lam_Y - lam_C,
            w.omega_w * uw - lam_Y - lam_C * W_C * N
            - (lam_L * beta_b * f_ub + beta * f_lam_C + lam_e) * R1 * uww * D
            - (l_lam_L * beta_b * ub + beta * lam_C + l_lam_e)
            * R2_lag * uww * l_D / beta
            + (
                (lam_C * Delta - lam_Om) * Om1
                - (lam_C * P_w * Delta - lam_Om * mk * p_reset) * Y
            )
            * uww / uw
            - (l_lam_C * l_Delta * Pi - l_lam_Om * l_p_reset / p_reset)
            * theta * Pi ** (epsil - 1.0) * Om1 * uww / l_uw
            + (lam_R * R1 * f_Pi + l_lam_R * R2_lag * Pi / beta) * uww,
            # deposits held at the pinned level
            D - self.d_pin,
            # planner optimality for capital (limits relaxed to (0, 1))
            -lam_C * (q2 * (K - (1.0 - cal.delta) * k_eff) + Q)
            + lam_e * (f_q1 * K + f_Q) * f_xi
            - lam_Y * i2
            + beta
            * (
                (f_lam_Om * mk * f_p_reset + f_lam_Y)
                * (f_A / f_Delta) * funcs.prod_k(f_k_eff, f_N, cal) * f_xi
                + f_lam_C
                * (
                    f_Q * (1.0 - cal.delta) * f_xi
                    - f_q1 * (f_K - (1.0 - cal.delta) * f_xi * K)
                )
                - f_lam_Y * f_i1
            )
            + l_lam_e * q2 * xi * l_K / beta,
            # planner optimality for loans
            lam_b + lam_L * ub - (l_lam_L * beta_b * ub + l_lam_e) / beta,
            # planner optimality for hours
            -w.omega_w * funcs.labor_mu(N, cal)
            + (lam_Om * mk * p_reset + lam_Y)
            * (A / Delta) * funcs.prod_n(k_eff, N, cal)
            - lam_C * (W_N * N + W),
            # planner optimality for the reset-price sum
            lam_C * Delta - lam_Om
            - (l_lam_C * l_Delta * Pi - l_lam_Om * l_p_reset / p_reset)
            * theta * Pi ** (epsil - 1.0) * uw / l_uw,
            # planner optimality for price dispersion
            (lam_C * P_w * Delta - lam_Om * mk * p_reset - lam_Y) * Y / Delta
            - lam_Delta + beta * theta * f_lam_Delta * f_Pi**epsil,
            # planner optimality for inflation (reset price substituted via
            # the Calvo identity, rate floor relaxed through the real-rate
            # times expected-inflation product)
            lam_Om * ptilde_prime
            * (mk * Y + beta * theta * (f_uw / uw) * f_Pi ** (epsil - 1.0)
               * f_Om1 / f_p_reset)
            + lam_Delta * epsil
            * (theta * Pi ** (epsil - 1.0) * l_Delta
               - (1.0 - theta) * ptilde_prime / p_reset ** (epsil + 1.0))
            - theta * Pi ** (epsil - 1.0) * Om1 * (uw / l_uw)
            * (
                l_lam_C * l_Delta * epsil
                - l_lam_Om * (l_p_reset / p_reset)
                * ((epsil - 1.0) / Pi - ptilde_prime / p_reset)
            )
            + l_lam_R * l_R / beta,
            # banker loan-Euler implementability
            (ub * L - beta_b * f_ub * f_B) if self.d_pin == 0.0 else lam_L,
            # consolidated banker+entrepreneur budget
            Delta * (Om1 - beta * theta * (f_uw / uw) * f_Pi**epsil * f_Om1)
            - Q * (K - (1.0 - cal.delta) * k_eff)
            - W * N + D - l_R * l_D - C_b - C_e,
            # reset-price sum recursion
            mk * p_reset * (A / Delta) * funcs.prod(k_eff, N, cal)
            + beta * theta * (f_uw / uw) * f_Pi ** (epsil - 1.0)
            * (p_reset / f_p_reset) * f_Om1
            - Om1,
            # switching rows: leverage limit, collateral limit, rate floor
            (L - D) if bind_lev else lam_b,
            (f_Q * f_xi * K - f_B) if bind_col else lam_e,
            (R * f_Pi - pol.r_lower) if bind_elb else lam_R,
            # wholesale clearing and final-good resource constraint
            A * funcs.prod(k_eff, N, cal) - Delta * Y,
            Y - C_b - C_e - C_w - I,
            # relative wholesale price consistent with the revenue recursion
            P_w * A * funcs.prod(k_eff, N, cal)
            - Delta * (Om1 - beta * theta * (f_uw / uw) * f_Pi**epsil * f_Om1),
            # reset price and dispersion identities
            1.0 - theta * Pi ** (epsil - 1.0)
            - (1.0 - theta) * p_reset ** (1.0 - epsil),
            Delta - theta * Pi**epsil * l_Delta
            - (1.0 - theta) * p_reset ** (-epsil),
            # internalized price functions and bookkeeping
            W * uw - funcs.labor_mu(N, cal),
            uw - beta * R * f_uw,
            Q * funcs.phi_prime(x_inv, cal) - 1.0,
            K - (1.0 - cal.delta) * k_eff - funcs.phi_of(x_inv, cal) * l_K,
            B - (C_b + L - D + l_R * l_D),
            R_L * l_L - B,
            R_K * l_Q
            - (P_w * A * funcs.prod_k(k_eff, N, cal) + Q * (1.0 - cal.delta)) * xi,
            # exogenous processes
            np.log(A) - cal.rho_a * np.log(l_A) - eps[0],
            np.log(xi) - cal.rho_xi * np.log(l_xi) - eps[1],
            # welfare recursions
            V_b - funcs.utility_b(C_b, cal) - beta * f_V_b,
            V_e - funcs.utility_e(C_e, cal) - beta * f_V_e,
            V_w - funcs.utility_w(C_w, N, cal) - beta * f_V_w,
        ]
        return rows


class PlannerOLLMP(EquationSystem):
    """Joint Ramsey problem: optimal leverage limits and optimal monetary
    policy under the rate floor in the sticky-price economy."""

    NAMES = (
        "C_b", "C_e", "C_w", "D", "L", "B", "K", "I", "N", "Y",
        "Q", "R", "R_L", "R_K", "W",
        "lam_b", "lam_L", "lam_D", "lam_C", "lamC_til", "lam_e", "lam_K",
        "lam_B", "lam_Y", "lam_Om", "lam_Delta", "lam_R",
        "P_w", "p_reset", "Pi", "Delta", "Om1",
        "A", "xi", "V_b", "V_e", "V_w",
    )

    def _build_names(self):
        return self.NAMES

    def _build_constraints(self):
        cal = self.cal

        def lev_gap(cur, lead):
            return self.col(cur, "L") - self.col(cur, "D")

        def lev_mult(cur, lead):
            return self.col(cur, "lam_b")

        def dep_gap(cur, lead):
            ub = funcs.crra_mu(self.col(cur, "C_b"), cal.gamma_b)
            f_ub = funcs.crra_mu(self.col(lead, "C_b"), cal.gamma_b)
            return ub - cal.beta_b * self.col(cur, "R") * f_ub

        def dep_mult(cur, lead):
            return self.col(cur, "lam_D")

        def col_gap(cur, lead):
            return (
                self.col(lead, "Q") * self.col(lead, "xi") * self.col(cur, "K")
                - self.col(lead, "B")
            )

        def col_mult(cur, lead):
            return self.col(cur, "lam_e")

        def loan_gap(cur, lead):
            ue = funcs.crra_mu(self.col(cur, "C_e"), cal.gamma_e)
            f_ue = funcs.crra_mu(self.col(lead, "C_e"), cal.gamma_e)
            return ue * self.col(cur, "L") - cal.beta_e * f_ue * self.col(lead, "B")

        def loan_mult(cur, lead):
            return self.col(cur, "lam_B")

        def elb_gap(cur, lead):
            return self.col(cur, "R") * self.col(lead, "Pi") - self.pol.r_lower

        def elb_mult(cur, lead):
            return self.col(cur, "lam_R")

        return (
            RegimeConstraint("leverage", lev_gap, lev_mult),
            RegimeConstraint("deposit_margin", dep_gap, dep_mult),
            RegimeConstraint("collateral", col_gap, col_mult),
            RegimeConstraint("loan_margin", loan_gap, loan_mult),
            RegimeConstraint("elb", elb_gap, elb_mult),
        )

    def _residuals_core(self, lag, cur, lead, eps, regime):
        cal = self.cal
        pol = self.pol
        w = self.weights
        beta, beta_b, beta_e = cal.beta, cal.beta_b, cal.beta_e
        theta, epsil = cal.theta, cal.epsilon
        bind_lev, bind_dep, bind_col, bind_loan, bind_elb = regime

        (C_b, C_e, C_w, D, L, B, K, I, N, Y, Q, R, R_L, R_K, W,
         lam_b, lam_L, lam_D, lam_C, lamC_til, lam_e, lam_K, lam_B, lam_Y,
         lam_Om, lam_Delta, lam_R,
         P_w, p_reset, Pi, Delta, Om1,
         A, xi, V_b, V_e, V_w) = cur
        (l_C_b, l_C_e, l_C_w, l_D, l_L, l_B, l_K, l_I, l_N, l_Y, l_Q, l_R,
         l_R_L, l_R_K, l_W, l_lam_b, l_lam_L, l_lam_D, l_lam_C, l_lamC_til,
         l_lam_e, l_lam_K, l_lam_B, l_lam_Y, l_lam_Om, l_lam_Delta, l_lam_R,
         l_P_w, l_p_reset, l_Pi, l_Delta, l_Om1,
         l_A, l_xi, l_V_b, l_V_e, l_V_w) = lag
        (f_C_b, f_C_e, f_C_w, f_D, f_L, f_B, f_K, f_I, f_N, f_Y, f_Q, f_R,
         f_R_L, f_R_K, f_W, f_lam_b, f_lam_L, f_lam_D, f_lam_C, f_lamC_til,
         f_lam_e, f_lam_K, f_lam_B, f_lam_Y, f_lam_Om, f_lam_Delta, f_lam_R,
         f_P_w, f_p_reset, f_Pi, f_Delta, f_Om1,
         f_A, f_xi, f_V_b, f_V_e, f_V_w) = lead

        uw = funcs.crra_mu(C_w, cal.gamma_w)
        uww = funcs.crra_mu2(C_w, cal.gamma_w)
        l_uw = funcs.crra_mu(l_C_w, cal.gamma_w)
        f_uw = funcs.crra_mu(f_C_w, cal.gamma_w)
        ub = funcs.crra_mu(C_b, cal.gamma_b)
        ubb = funcs.crra_mu2(C_b, cal.gamma_b)
        f_ub = funcs.crra_mu(f_C_b, cal.gamma_b)
        ue = funcs.crra_mu(C_e, cal.gamma_e)
        uee = funcs.crra_mu2(C_e, cal.gamma_e)
        f_ue = funcs.crra_mu(f_C_e, cal.gamma_e)

        R1 = R / uw
        R2_lag = -beta * l_R**2 / l_uw
        W_C = cal.gamma_w * W / C_w
        W_N = cal.phi * W / N

        k_eff = xi * l_K
        f_k_eff = f_xi * K
        x_inv = I / l_K
        _, q1, q2, i1, i2 = funcs.q_partials(l_K, K, xi, cal)
        _, f_q1, f_q2, f_i1, f_i2 = funcs.q_partials(K, f_K, f_xi, cal)

        mk = (epsil - 1.0) / epsil
        ptilde_prime = theta * Pi ** (epsil - 2.0) * p_reset**epsil / (1.0 - theta)

        rows = [
            # planner optimality for consumption of each type
            w.omega_b * ub - lam_Y - lam_C - (lam_L * (L - D) - lam_D) * ubb
            + (
                (l_lam_L * (C_b + L - D) - l_lam_D * l_R) * beta_b * ubb
                + l_lam_L * beta_b * ub
                - l_lam_e
                - (l_lam_K + l_lam_B) * beta_e * ue
            )
            / beta,
            w.omega_e * ue - lam_Y - lam_C - (lam_K * (Q * K - L) - lam_B * L) * uee
            + (l_lam_K * R_K * l_Q * l_K - (l_lam_K + l_lam_B) * B)
            * beta_e * uee / beta,
            w.omega_w * uw - lam_Y - lam_C * W_C * N
            - (
                lam_D * beta_b * f_ub
                + (beta * f_lam_C + lam_e + (lam_K + lam_B) * beta_e * f_ue) * D
            )
            * R1 * uww
            - (
                l_lam_D * beta_b * ub
                + (beta * lam_C + l_lam_e + (l_lam_K + l_lam_B) * beta_e * ue) * l_D
            )
            * R2_lag * uww / beta
            + (
                (lamC_til * Delta - lam_Om) * Om1
                - (lamC_til * P_w * Delta - lam_Om * mk * p_reset) * Y
            )
            * uww / uw
            - (l_lamC_til * l_Delta * Pi - l_lam_Om * l_p_reset / p_reset)
            * theta * Pi ** (epsil - 1.0) * Om1 * uww / l_uw
            + (lam_R * R1 * f_Pi + l_lam_R * R2_lag * Pi / beta) * uww,
            # planner optimality for deposits (interior choice)
            -lam_b + lam_L * ub + lam_C
            - (beta * f_lam_C + lam_e + (lam_K + lam_B) * beta_e * f_ue) * R
            + (
                -l_lam_L * beta_b * ub
                + l_lam_e
                + (l_lam_K + l_lam_B) * beta_e * ue
            )
            / beta,
            # planner optimality for capital (wholesale revenue inside the
            # capital-Euler implementability enters through the reset-price
            # sum, so no marginal-product cross terms appear here)
            -lam_C * (q2 * (K - (1.0 - cal.delta) * k_eff) + Q)
            + lam_e * (f_q1 * K + f_Q) * f_xi
            - lam_Y * i2
            + lam_K
            * (
                beta_e * f_ue * (f_q1 * K + f_Q) * (1.0 - cal.delta) * f_xi
                - ue * (q2 * K + Q)
            )
            + beta
            * (
                (f_lam_Om * mk * f_p_reset + f_lam_Y)
                * (f_A / f_Delta) * funcs.prod_k(f_k_eff, f_N, cal) * f_xi
                + f_lam_C
                * (
                    f_Q * (1.0 - cal.delta) * f_xi
                    - f_q1 * (f_K - (1.0 - cal.delta) * f_xi * K)
                )
                - f_lam_K * f_ue * f_q1 * f_K
                - f_lam_Y * f_i1
            )
            + (l_lam_e + l_lam_K * beta_e * ue * (1.0 - cal.delta))
            * q2 * xi * l_K / beta,
            # planner optimality for loans
            lam_b - lam_L * ub + (lam_K + lam_B) * ue
            + (
                l_lam_L * beta_b * ub
                - l_lam_e
                - (l_lam_K + l_lam_B) * beta_e * ue
            )
            / beta,
            # planner optimality for hours
            -w.omega_w * funcs.labor_mu(N, cal)
            + (lam_Om * mk * p_reset + lam_Y)
            * (A / Delta) * funcs.prod_n(k_eff, N, cal)
            - lam_C * (W_N * N + W),
            # planner optimality for the reset-price sum
            lamC_til * Delta - lam_Om
            - (l_lamC_til * l_Delta * Pi - l_lam_Om * l_p_reset / p_reset)
            * theta * Pi ** (epsil - 1.0) * uw / l_uw,
            # planner optimality for price dispersion
            (lamC_til * P_w * Delta - lam_Om * mk * p_reset - lam_Y) * Y / Delta
            - lam_Delta + beta * theta * f_lam_Delta * f_Pi**epsil,
            # planner optimality for inflation
            lam_Om * ptilde_prime
            * (mk * Y + beta * theta * (f_uw / uw) * f_Pi ** (epsil - 1.0)
               * f_Om1 / f_p_reset)
            + lam_Delta * epsil
            * (theta * Pi ** (epsil - 1.0) * l_Delta
               - (1.0 - theta) * ptilde_prime / p_reset ** (epsil + 1.0))
            - theta * Pi ** (epsil - 1.0) * Om1 * (uw / l_uw)
            * (
                l_lamC_til * l_Delta * epsil
                - l_lam_Om * (l_p_reset / p_reset)
                * ((epsil - 1.0) / Pi - ptilde_prime / p_reset)
            )
            + l_lam_R * l_R / beta,
            # banker loan-Euler implementability
            beta_b * f_ub * (f_C_b + f_L - f_D) - ub * (L - D),
            # consolidated banker+entrepreneur budget
            Delta * (Om1 - beta * theta * (f_uw / uw) * f_Pi**epsil * f_Om1)
            - Q * (K - (1.0 - cal.delta) * k_eff)
            - W * N + D - l_R * l_D - C_b - C_e,
            # entrepreneur capital-Euler implementability
            beta_e
            * f_ue
            * (
                f_P_w * f_A * funcs.prod_k(f_k_eff, f_N, cal) * f_xi * K
                + f_Q * (1.0 - cal.delta) * f_xi * K
                - f_B
            )
            - ue * (Q * K - L),
            # reset-price sum recursion
            mk * p_reset * (A / Delta) * funcs.prod(k_eff, N, cal)
            + beta * theta * (f_uw / uw) * f_Pi ** (epsil - 1.0)
            * (p_reset / f_p_reset) * f_Om1
            - Om1,
            # composite multiplier on the revenue recursion
            lamC_til - lam_C - l_lam_K * beta_e * ue * cal.alpha / beta,
            # switching rows
            (L - D) if bind_lev else lam_b,
            (ub - beta_b * R * f_ub) if bind_dep else lam_D,
            (f_Q * f_xi * K - f_B) if bind_col else lam_e,
            (ue * L - beta_e * f_ue * f_B) if bind_loan else lam_B,
            (R * f_Pi - pol.r_lower) if bind_elb else lam_R,
            # wholesale clearing and final-good resource constraint
            A * funcs.prod(k_eff, N, cal) - Delta * Y,
            Y - C_b - C_e - C_w - I,
            # relative wholesale price consistent with the revenue recursion
            P_w * A * funcs.prod(k_eff, N, cal)
            - Delta * (Om1 - beta * theta * (f_uw / uw) * f_Pi**epsil * f_Om1),
            # reset price and dispersion identities
            1.0 - theta * Pi ** (epsil - 1.0)
            - (1.0 - theta) * p_reset ** (1.0 - epsil),
            Delta - theta * Pi**epsil * l_Delta
            - (1.0 - theta) * p_reset ** (-epsil),
            # internalized price functions and bookkeeping
            W * uw - funcs.labor_mu(N, cal),
            uw - beta * R * f_uw,
            Q * funcs.phi_prime(x_inv, cal) - 1.0,
            K - (1.0 - cal.delta) * k_eff - funcs.phi_of(x_inv, cal) * l_K,
            B - (C_b + L - D + l_R * l_D),
            R_L * l_L - B,
            R_K * l_Q
            - (P_w * A * funcs.prod_k(k_eff, N, cal) + Q * (1.0 - cal.delta)) * xi,
            # exogenous processes
            np.log(A) - cal.rho_a * np.log(l_A) - eps[0],
            np.log(xi) - cal.rho_xi * np.log(l_xi) - eps[1],
            # welfare recursions
            V_b - funcs.utility_b(C_b, cal) - beta * f_V_b,
            V_e - funcs.utility_e(C_e, cal) - beta * f_V_e,
            V_w - funcs.utility_w(C_w, N, cal) - beta * f_V_w,
        ]
        return rows

"""Flexible-price planner systems.

``PlannerFlex`` is the constrained-efficient allocation under given regulatory
limits (kappa, m): the planner chooses deposits and factor inputs on behalf of
bankers and entrepreneurs while internalizing the market price functions
R(u', Eu'), W(C^w, N), Q(K_lag, K, xi) and I(K_lag, K, xi).  With the limits
relaxed to (kappa, m) = (0, 1) the same system describes the planner who is
free to pick any leverage, so one class covers both the FCEA and FCEA_OLL
variants.  Deposits are pinned (optimal steady state: D = 0), so the deposit
first-order inequality is not part of the square system.

``PlannerOLL`` is the Ramsey problem with labor taxation only: the banker's
and entrepreneur's Euler margins enter as explicit inequality constraints
(four switching rows), deposits are an interior choice with an equality
first-order condition, and two forward-looking implementability recursions
carry the private Euler equations in allocation space.

Multiplier registry conventions (shared with the sticky planner systems):
  lam_b   -- leverage-limit multiplier, switching
  lam_L   -- banker loan-Euler implementability (equality when D = 0)
  lam_D   -- banker deposit-margin multiplier, switching (PlannerOLL only)
  lam_C   -- consolidated banker+entrepreneur budget implementability
  lam_e   -- collateral-limit multiplier, switching
  lam_K   -- entrepreneur capital-Euler implementability (PlannerOLL only)
  lam_B   -- entrepreneur loan-margin multiplier, switching (PlannerOLL only)
  lam_Y   -- final-good resource constraint
"""

from __future__ import annotations

import numpy as np

from .. import funcs
from ..model import EquationSystem, RegimeConstraint


class PlannerFlex(EquationSystem):
    """Constrained-efficient allocation in the flexible-price economy with
    regulatory limits (kappa, m); (0, 1) for the relaxed-limit variant."""

    NAMES = (
        "C_b", "C_e", "C_w", "D", "L", "B", "K", "I", "N", "Y",
        "Q", "R", "R_L", "R_K", "W",
        "lam_b", "lam_L", "lam_C", "lam_e", "lam_Y",
        "A", "xi", "V_b", "V_e", "V_w",
    )

    def __init__(self, variant, cal, pol, weights):
        super().__init__(variant, cal, pol, weights)
        if variant.tag == "FCEA_OLL":
            self.kappa_eff, self.m_eff = 0.0, 1.0
        else:
            self.kappa_eff, self.m_eff = pol.kappa_bar, pol.m_bar
        # deposit pin: the dynamic system holds D_t at this value (0 at the
        # optimal plan; attach_steady_state syncs it for eta > 0 experiments)
        self.d_pin = 0.0

    def attach_steady_state(self, ss):
        super().attach_steady_state(ss)
        self.d_pin = float(ss["D"])

    def _build_names(self):
        return self.NAMES

    def _build_constraints(self):
        if self.variant.tag == "FCEA_OLL":
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

        return (
            RegimeConstraint("leverage", lev_gap, lev_mult),
            RegimeConstraint("collateral", col_gap, col_mult),
        )

    def _residuals_core(self, lag, cur, lead, eps, regime):
        cal = self.cal
        w = self.weights
        kappa, m = self.kappa_eff, self.m_eff
        beta, beta_b = cal.beta, cal.beta_b
        bind_lev, bind_col = regime

        (C_b, C_e, C_w, D, L, B, K, I, N, Y, Q, R, R_L, R_K, W,
         lam_b, lam_L, lam_C, lam_e, lam_Y, A, xi, V_b, V_e, V_w) = cur
        (l_C_b, l_C_e, l_C_w, l_D, l_L, l_B, l_K, l_I, l_N, l_Y, l_Q, l_R,
         l_R_L, l_R_K, l_W, l_lam_b, l_lam_L, l_lam_C, l_lam_e, l_lam_Y,
         l_A, l_xi, l_V_b, l_V_e, l_V_w) = lag
        (f_C_b, f_C_e, f_C_w, f_D, f_L, f_B, f_K, f_I, f_N, f_Y, f_Q, f_R,
         f_R_L, f_R_K, f_W, f_lam_b, f_lam_L, f_lam_C, f_lam_e, f_lam_Y,
         f_A, f_xi, f_V_b, f_V_e, f_V_w) = lead

        uw = funcs.crra_mu(C_w, cal.gamma_w)
        uww = funcs.crra_mu2(C_w, cal.gamma_w)
        l_uw = funcs.crra_mu(l_C_w, cal.gamma_w)
        f_uw = funcs.crra_mu(f_C_w, cal.gamma_w)
        ub = funcs.crra_mu(C_b, cal.gamma_b)
        ubb = funcs.crra_mu2(C_b, cal.gamma_b)
        f_ub = funcs.crra_mu(f_C_b, cal.gamma_b)
        ue = funcs.crra_mu(C_e, cal.gamma_e)

        # internalized price derivatives along the solution path
        R1 = R / uw                    # dR/d(u'_t)
        R2_lag = -beta * l_R**2 / l_uw  # dR_{t-1}/d(E u'_t)
        W_C = cal.gamma_w * W / C_w
        W_N = cal.phi * W / N

        k_eff = xi * l_K
        f_k_eff = f_xi * K
        x_inv = I / l_K
        _, q1, q2, i1, i2 = funcs.q_partials(l_K, K, xi, cal)
        _, f_q1, f_q2, f_i1, f_i2 = funcs.q_partials(K, f_K, f_xi, cal)

        rows = [
            # planner optimality for consumption of each type
            w.omega_b * ub - lam_Y - lam_C + lam_L * ubb * L
            - (l_lam_L * beta_b * (ubb * B + ub) + l_lam_e) / beta,
            w.omega_e * ue - lam_Y - lam_C,
            w.omega_w * uw - lam_Y - lam_C * W_C * N
            - (lam_L * beta_b * f_ub + beta * f_lam_C + lam_e) * R1 * uww * D
            - (l_lam_L * beta_b * ub + beta * lam_C + l_lam_e)
            * R2_lag * uww * l_D / beta,
            # deposits held at the pinned level
            D - self.d_pin,
            # planner optimality for capital
            -lam_C * (q2 * (K - (1.0 - cal.delta) * k_eff) + Q)
            + lam_e * m * (f_q1 * K + f_Q) * f_xi
            - lam_Y * i2
            + beta
            * (
                (f_lam_C + f_lam_Y) * f_A * funcs.prod_k(f_k_eff, f_N, cal) * f_xi
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
            # planner optimality for hours (separable preferences: no
            # cross-derivative terms)
            -w.omega_w * funcs.labor_mu(N, cal)
            + (lam_C + lam_Y) * A * funcs.prod_n(k_eff, N, cal)
            - lam_C * (W_N * N + W),
            # banker loan-Euler implementability (equality while D is pinned
            # at zero; a positive pin leaves the margin slack instead)
            (ub * L - beta_b * f_ub * f_B) if self.d_pin == 0.0 else lam_L,
            # consolidated banker+entrepreneur budget
            A * funcs.prod(k_eff, N, cal)
            - Q * (K - (1.0 - cal.delta) * k_eff)
            - W * N + D - l_R * l_D - C_b - C_e,
            # switching rows: leverage limit and collateral limit
            ((1.0 - kappa) * L - D) if bind_lev else lam_b,
            (m * f_Q * f_xi * K - f_B) if bind_col else lam_e,
            # final-good resource constraint
            Y - C_b - C_e - C_w - I,
            # internalized price functions and bookkeeping
            W * uw - funcs.labor_mu(N, cal),
            uw - beta * R * f_uw,
            Q * funcs.phi_prime(x_inv, cal) - 1.0,
            K - (1.0 - cal.delta) * k_eff - funcs.phi_of(x_inv, cal) * l_K,
            A * funcs.prod(k_eff, N, cal) - Y,
            B - (C_b + L - D + l_R * l_D),
            R_L * l_L - B,
            R_K * l_Q - (A * funcs.prod_k(k_eff, N, cal) + Q * (1.0 - cal.delta)) * xi,
            # exogenous processes
            np.log(A) - cal.rho_a * np.log(l_A) - eps[0],
            np.log(xi) - cal.rho_xi * np.log(l_xi) - eps[1],
            # welfare recursions
            V_b - funcs.utility_b(C_b, cal) - beta * f_V_b,
            V_e - funcs.utility_e(C_e, cal) - beta * f_V_e,
            V_w - funcs.utility_w(C_w, N, cal) - beta * f_V_w,
        ]
        return rows


class PlannerOLL(EquationSystem):
    """Ramsey problem with labor taxation only: optimal leverage limits in the
    flexible-price economy (four switching rows, interior deposits)."""

    NAMES = (
        "C_b", "C_e", "C_w", "D", "L", "B", "K", "I", "N", "Y",
        "Q", "R", "R_L", "R_K", "W",
        "lam_b", "lam_L", "lam_D", "lam_C", "lam_e", "lam_K", "lam_B", "lam_Y",
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

        return (
            RegimeConstraint("leverage", lev_gap, lev_mult),
            RegimeConstraint("deposit_margin", dep_gap, dep_mult),
            RegimeConstraint("collateral", col_gap, col_mult),
            RegimeConstraint("loan_margin", loan_gap, loan_mult),
        )

    def _residuals_core(self, lag, cur, lead, eps, regime):
        cal = self.cal
        w = self.weights
        beta, beta_b, beta_e = cal.beta, cal.beta_b, cal.beta_e
        bind_lev, bind_dep, bind_col, bind_loan = regime

        (C_b, C_e, C_w, D, L, B, K, I, N, Y, Q, R, R_L, R_K, W,
         lam_b, lam_L, lam_D, lam_C, lam_e, lam_K, lam_B, lam_Y,
         A, xi, V_b, V_e, V_w) = cur
        (l_C_b, l_C_e, l_C_w, l_D, l_L, l_B, l_K, l_I, l_N, l_Y, l_Q, l_R,
         l_R_L, l_R_K, l_W, l_lam_b, l_lam_L, l_lam_D, l_lam_C, l_lam_e,
         l_lam_K, l_lam_B, l_lam_Y, l_A, l_xi, l_V_b, l_V_e, l_V_w) = lag
        (f_C_b, f_C_e, f_C_w, f_D, f_L, f_B, f_K, f_I, f_N, f_Y, f_Q, f_R,
         f_R_L, f_R_K, f_W, f_lam_b, f_lam_L, f_lam_D, f_lam_C, f_lam_e,
         f_lam_K, f_lam_B, f_lam_Y, f_A, f_xi, f_V_b, f_V_e, f_V_w) = lead

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
            * R2_lag * uww / beta,
            # planner optimality for deposits (interior choice)
            -lam_b + lam_L * ub + lam_C
            - (beta * f_lam_C + lam_e + (lam_K + lam_B) * beta_e * f_ue) * R
            + (
                -l_lam_L * beta_b * ub
                + l_lam_e
                + (l_lam_K + l_lam_B) * beta_e * ue
            )
            / beta,
            # planner optimality for capital
            -lam_C * (q2 * (K - (1.0 - cal.delta) * k_eff) + Q)
            + lam_e * (f_q1 * K + f_Q) * f_xi
            - lam_Y * i2
            + lam_K
            * (
                beta_e
                * f_ue
                * (
                    (
                        f_A * funcs.prod_kk(f_k_eff, f_N, cal) * f_xi
                        + f_q1 * (1.0 - cal.delta)
                    )
                    * f_xi * K
                    + f_R_K * Q
                )
                - ue * (q2 * K + Q)
            )
            + beta
            * (
                (f_lam_C + f_lam_Y) * f_A * funcs.prod_k(f_k_eff, f_N, cal) * f_xi
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
            + (lam_C + lam_Y) * A * funcs.prod_n(k_eff, N, cal)
            - lam_C * (W_N * N + W)
            + l_lam_K * beta_e * ue * A * funcs.prod_kn(k_eff, N, cal) * xi * l_K
            / beta,
            # banker loan-Euler implementability
            beta_b * f_ub * (f_C_b + f_L - f_D) - ub * (L - D),
            # consolidated banker+entrepreneur budget
            A * funcs.prod(k_eff, N, cal)
            - Q * (K - (1.0 - cal.delta) * k_eff)
            - W * N + D - l_R * l_D - C_b - C_e,
            # entrepreneur capital-Euler implementability
            beta_e
            * f_ue
            * (
                (f_A * funcs.prod_k(f_k_eff, f_N, cal) + f_Q * (1.0 - cal.delta))
                * f_xi * K
                - f_B
            )
            - ue * (Q * K - L),
            # switching rows
            (L - D) if bind_lev else lam_b,
            (ub - beta_b * R * f_ub) if bind_dep else lam_D,
            (f_Q * f_xi * K - f_B) if bind_col else lam_e,
            (ue * L - beta_e * f_ue * f_B) if bind_loan else lam_B,
            # final-good resource constraint
            Y - C_b - C_e - C_w - I,
            # internalized price functions and bookkeeping
            W * uw - funcs.labor_mu(N, cal),
            uw - beta * R * f_uw,
            Q * funcs.phi_prime(x_inv, cal) - 1.0,
            K - (1.0 - cal.delta) * k_eff - funcs.phi_of(x_inv, cal) * l_K,
            A * funcs.prod(k_eff, N, cal) - Y,
            B - (C_b + L - D + l_R * l_D),
            R_L * l_L - B,
            R_K * l_Q - (A * funcs.prod_k(k_eff, N, cal) + Q * (1.0 - cal.delta)) * xi,
            # exogenous processes
            np.log(A) - cal.rho_a * np.log(l_A) - eps[0],
            np.log(xi) - cal.rho_xi * np.log(l_xi) - eps[1],
            # welfare recursions
            V_b - funcs.utility_b(C_b, cal) - beta * f_V_b,
            V_e - funcs.utility_e(C_e, cal) - beta * f_V_e,
            V_w - funcs.utility_w(C_w, N, cal) - beta * f_V_w,
        ]
        return rows

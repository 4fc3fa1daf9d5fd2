"""First-best allocation: a planner facing only technology constraints.

The planner maximizes Pareto-weighted welfare subject to the final-good
resource constraint and capital accumulation.  Financial constraints, price
rigidities, and budget separation are absent, so consumption is shared
perfectly (Pareto-weighted marginal utilities are equalized) and the capital
price ``Q`` is simply the shadow ratio of the two constraints.
"""

from __future__ import annotations

import numpy as np

from .. import funcs
from ..model import EquationSystem


class FirstBest(EquationSystem):
    NAMES = (
        "C_b", "C_e", "C_w", "K", "I", "N", "Y", "Q", "lam_Y",
        "A", "xi", "V_b", "V_e", "V_w",
    )

    def _build_names(self):
        return self.NAMES

    def _build_constraints(self):
        return ()

    def _residuals_core(self, lag, cur, lead, eps, regime):
        cal, w = self.cal, self.weights

        (C_b, C_e, C_w, K, I, N, Y, Q, lam_Y, A, xi, V_b, V_e, V_w) = cur
        l_K = lag[self.ix["K"]]
        l_A = lag[self.ix["A"]]
        l_xi = lag[self.ix["xi"]]
        (f_C_b, f_C_e, f_C_w, f_K, f_I, f_N, f_Y, f_Q, f_lam_Y, f_A, f_xi,
         f_V_b, f_V_e, f_V_w) = lead

        k_eff = xi * l_K
        f_k_eff = f_xi * K
        x_inv = I / l_K
        f_x_inv = f_I / K

        rows = [
            # equalized Pareto-weighted marginal utilities
            w.omega_b * funcs.crra_mu(C_b, cal.gamma_b) - lam_Y,
            w.omega_e * funcs.crra_mu(C_e, cal.gamma_e) - lam_Y,
            w.omega_w * funcs.crra_mu(C_w, cal.gamma_w) - lam_Y,
            # labor: marginal disutility equals shadow value of output
            w.omega_w * funcs.labor_mu(N, cal) - lam_Y * A * funcs.prod_n(k_eff, N, cal),
            # investment margin defines Q as the shadow price of capital
            Q * funcs.phi_prime(x_inv, cal) - 1.0,
            # capital margin
            lam_Y * Q
            - cal.beta
            * f_lam_Y
            * (
                f_A * funcs.prod_k(f_k_eff, f_N, cal) * f_xi
                + f_Q
                * (
                    (1.0 - cal.delta) * f_xi
                    + funcs.phi_of(f_x_inv, cal)
                    - f_x_inv * funcs.phi_prime(f_x_inv, cal)
                )
            ),
            # technology
            K - (1.0 - cal.delta) * k_eff - funcs.phi_of(x_inv, cal) * l_K,
            Y - A * funcs.prod(k_eff, N, cal),
            Y - C_b - C_e - C_w - I,
            # exogenous processes
            np.log(A) - cal.rho_a * np.log(l_A) - eps[0],
            np.log(xi) - cal.rho_xi * np.log(l_xi) - eps[1],
            # welfare recursions
            V_b - funcs.utility_b(C_b, cal) - cal.beta * f_V_b,
            V_e - funcs.utility_e(C_e, cal) - cal.beta * f_V_e,
            V_w - funcs.utility_w(C_w, N, cal) - cal.beta * f_V_w,
        ]
        return rows

"""Steady-state construction for every model variant.

Each constructor follows a sequential closed-form chain where one exists
(regulated competitive equilibria) and otherwise reduces the problem to a
small nonlinear system solved by a damped Newton iteration with
finite-difference Jacobians.  Planner steady states come in slack/binding
branch pairs for the collateral-type constraint; the slack branch is tried
first and admissibility (multiplier signs, constraint gaps, supposition
intervals) is verified before a branch is accepted.

All constructors return a :class:`SteadyState` whose value vector is aligned
with the full variable registry of the corresponding
:class:`~bankmacro.model.EquationSystem`, including planner multipliers,
pricing-block recursions, and lifetime-welfare entries, so that
:func:`verify_ss` can evaluate the dynamic residuals directly at
lag = cur = lead = ss.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import funcs
from .errors import (
    AssumptionViolation,
    DimensionMismatch,
    GuessViolated,
    IncompatiblePolicy,
    NegativeConsumption,
    NoBranchAdmissible,
    SolverDiverged,
)
from .model import EquationSystem, build_system
from .params import Calibration, ParetoWeights, PolicyRule, Variant
from .systems import retail_block_ss
from .systems.decentralized import FlexibleCE, StickyCE
from .systems.first_best import FirstBest
from .systems.planner_flex import PlannerFlex, PlannerOLL
from .systems.planner_sticky import PlannerOLLMP, PlannerSticky


# ---------------------------------------------------------------------------
# containers
# ---------------------------------------------------------------------------

@dataclass
class SteadyState:
    """A named steady-state vector with its reference regime."""

    names: tuple
    values: np.ndarray
    regime: tuple
    variant_tag: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.names),):
            raise DimensionMismatch(
                f"steady state has {self.values.shape} values for {len(self.names)} names"
            )
        self._ix = {n: i for i, n in enumerate(self.names)}

    def __getitem__(self, name: str) -> float:
        return float(self.values[self._ix[name]])

    def __contains__(self, name: str) -> bool:
        return name in self._ix

    def as_dict(self) -> dict:
        return {n: float(v) for n, v in zip(self.names, self.values)}

    def replace_values(self, **updates: float) -> "SteadyState":
        vals = self.values.copy()
        for k, v in updates.items():
            vals[self._ix[k]] = v
        return SteadyState(self.names, vals, self.regime, self.variant_tag, dict(self.meta))


@dataclass
class ResidualReport:
    """Outcome of evaluating a system's residuals at a candidate fixed point."""

    sup_norm: float
    residuals: np.ndarray
    worst: tuple  # (row index, |residual|) pairs, descending

    def __str__(self):
        lines = [f"sup-norm {self.sup_norm:.3e}"]
        for idx, val in self.worst:
            lines.append(f"  row {idx:3d}: |r| = {val:.3e}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# damped Newton with finite-difference Jacobian
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-12
    max_iter: int = 200
    fd_step: float = 1e-7
    max_backtrack: int = 30


def _fd_jacobian(fun, x, step_rel):
    n = x.size
    fx0 = np.asarray(fun(x), dtype=float)
    J = np.empty((fx0.size, n))
    for j in range(n):
        h = step_rel * max(1.0, abs(x[j]))
        xp = x.copy()
        xm = x.copy()
        xp[j] += h
        xm[j] -= h
        J[:, j] = (np.asarray(fun(xp), float) - np.asarray(fun(xm), float)) / (2.0 * h)
    return J


def newton(fun, x0, cfg: NewtonConfig | None = None) -> np.ndarray:
    """Solve fun(x) = 0 by damped Newton; trial points producing non-finite
    residuals are treated as rejected steps."""
    cfg = cfg or NewtonConfig()
    x = np.asarray(x0, dtype=float).copy()
    fx = np.asarray(fun(x), dtype=float)
    if not np.all(np.isfinite(fx)):
        raise SolverDiverged("initial guess is infeasible (non-finite residuals)")
    norm = float(np.max(np.abs(fx)))
    for _ in range(cfg.max_iter):
        if norm < cfg.tol:
            return x
        J = _fd_jacobian(fun, x, cfg.fd_step)
        if not np.all(np.isfinite(J)):
            raise SolverDiverged("non-finite Jacobian entries")
        try:
            step = np.linalg.solve(J, -fx)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, -fx, rcond=None)[0]
        lam = 1.0
        accepted = False
        for _ in range(cfg.max_backtrack):
            x_try = x + lam * step
            f_try = np.asarray(fun(x_try), dtype=float)
            if np.all(np.isfinite(f_try)):
                n_try = float(np.max(np.abs(f_try)))
                if n_try < norm or n_try < cfg.tol:
                    x, fx, norm = x_try, f_try, n_try
                    accepted = True
                    break
            lam *= 0.5
        if not accepted:
            raise SolverDiverged(f"line search stalled at residual norm {norm:.3e}")
    if norm < cfg.tol:
        return x
    raise SolverDiverged(f"no convergence after {cfg.max_iter} iterations (norm {norm:.3e})")


def _multi_start_newton(fun, seeds, cfg: NewtonConfig | None = None) -> np.ndarray:
    """Try Newton from each feasible seed, best residual norm first."""
    scored = []
    for s in seeds:
        f = np.asarray(fun(np.asarray(s, dtype=float)), dtype=float)
        if np.all(np.isfinite(f)):
            scored.append((float(np.max(np.abs(f))), tuple(s)))
    scored.sort()
    last = None
    for _, s in scored:
        try:
            return newton(fun, np.asarray(s, dtype=float), cfg)
        except SolverDiverged as exc:
            last = exc
    if last is None:
        raise SolverDiverged("no feasible starting point among the seeds")
    raise SolverDiverged(f"all feasible starts failed; last error: {last}")


# ---------------------------------------------------------------------------
# shared pieces
# ---------------------------------------------------------------------------

def _capital_technology_ss(cal: Calibration, xi: float = 1.0):
    """Investment rate and capital price implied by the accumulation margin."""
    x = funcs.phi_inverse(1.0 - (1.0 - cal.delta) * xi, cal)
    q = 1.0 / funcs.phi_prime(x, cal)
    return x, q


def _welfare_entries(cal: Calibration, c_b, c_e, c_w, n):
    scale = 1.0 / (1.0 - cal.beta)
    return (
        funcs.utility_b(c_b, cal) * scale,
        funcs.utility_e(c_e, cal) * scale,
        funcs.utility_w(c_w, n, cal) * scale,
    )


def _vector(names, mapping):
    vals = np.empty(len(names))
    for i, n in enumerate(names):
        vals[i] = mapping[n]
    return vals


def _require_positive(**flows):
    for name, value in flows.items():
        if not np.isfinite(value) or value <= 0.0:
            raise NegativeConsumption(f"nonpositive steady-state {name} = {value}")


# ---------------------------------------------------------------------------
# regulated competitive equilibria (flexible and sticky price)
# ---------------------------------------------------------------------------

def ss_regulated_ce(cal: Calibration, pol: PolicyRule, tag: str = "CE") -> SteadyState:
    """Steady state of the regulated competitive equilibrium.

    ``tag="CE"`` builds the sticky-price economy at the inflation target;
    ``tag="FCE"`` the flexible-price specialization (no retail block, unit
    wholesale price, inflation immaterial).
    """
    if tag not in ("FCE", "CE"):
        raise IncompatiblePolicy(f"ss_regulated_ce handles FCE/CE, not {tag!r}")
    cal.check_assumption1(pol.kappa_bar)
    a = 1.0
    xi = 1.0
    kappa, m = pol.kappa_bar, pol.m_bar
    beta, beta_b, beta_e = cal.beta, cal.beta_b, cal.beta_e

    r = 1.0 / beta
    margin_d = 1.0 - pol.tau_D - beta_b * r
    r_loan = (1.0 - (1.0 - kappa) * max(margin_d, 0.0)) / beta_b
    margin_l = 1.0 - pol.tau_L - beta_e * r_loan
    x, q = _capital_technology_ss(cal, xi)

    if tag == "CE":
        pi = pol.pi_bar
        p_reset, p_w, delta_disp = retail_block_ss(cal, pi)
    else:
        pi, p_reset, p_w, delta_disp = 1.0, 1.0, 1.0, 1.0

    fk = (
        (1.0 + pol.tau_K) / (beta_e * xi)
        - max(margin_l, 0.0) * m / (beta_e * r_loan)
        - 1.0
        + cal.delta
    ) * q / (p_w * a)
    k_n = funcs.prod_k_inverse(fk, cal) / xi
    wage = p_w * a * funcs.prod_n(xi * k_n, 1.0, cal) / (1.0 + pol.tau_N)

    ind_l = 1.0 if margin_l >= 0.0 else 0.0
    ind_d = 1.0 if margin_d >= 0.0 else 0.0
    d_per_k = ind_d * ind_l * (1.0 - kappa) * m * q * xi / r_loan
    # worker consumption per unit of labor: wage + retail profits + capital
    # producer profits + net deposit income
    c_w_per_n = (
        (1.0 / delta_disp - p_w) * a * (xi * k_n) ** cal.alpha
        + wage
        + k_n * (q * (1.0 - (1.0 - cal.delta) * xi) - x + (r - 1.0) * d_per_k)
    )
    if c_w_per_n <= 0.0:
        raise NegativeConsumption(f"worker consumption per hour = {c_w_per_n}")
    n = (wage / (cal.chi * c_w_per_n**cal.gamma_w)) ** (1.0 / (cal.gamma_w + cal.phi))

    k = k_n * n
    invest = x * k
    loans = ind_l * m * q * xi * k / r_loan
    deposits = ind_d * (1.0 - kappa) * loans
    c_b = (r_loan - 1.0) * loans - (r - 1.0) * deposits
    c_e = (
        p_w * a * funcs.prod(xi * k, n, cal)
        - q * (1.0 - (1.0 - cal.delta) * xi) * k
        - wage * n
        - (r_loan - 1.0) * loans
    )
    y = a / delta_disp * funcs.prod(xi * k, n, cal)
    c_w = y - (c_b + c_e + invest)
    _require_positive(C_b=c_b, C_e=c_e, C_w=c_w)

    lam_b = funcs.crra_mu(c_b, cal.gamma_b) * margin_d
    lam_e = funcs.crra_mu(c_e, cal.gamma_e) * margin_l / r_loan
    b = r_loan * loans
    r_k = (p_w * a * funcs.prod_k(xi * k, n, cal) / q + 1.0 - cal.delta) * xi
    v_b, v_e, v_w = _welfare_entries(cal, c_b, c_e, c_w, n)

    base = {
        "C_b": c_b, "C_e": c_e, "C_w": c_w, "D": deposits, "L": loans, "B": b,
        "K": k, "I": invest, "N": n, "Y": y, "Q": q, "R": r, "R_L": r_loan,
        "R_K": r_k, "W": wage, "lam_b": lam_b, "lam_e": lam_e, "A": a, "xi": xi,
        "V_b": v_b, "V_e": v_e, "V_w": v_w,
    }
    meta = {
        "pol": pol, "deposit_margin": margin_d, "loan_margin": margin_l,
        "I_over_K": x,
    }
    if tag == "FCE":
        regime = (margin_d > 0.0, margin_l > 0.0)
        return SteadyState(FlexibleCE.NAMES, _vector(FlexibleCE.NAMES, base), regime, tag, meta)

    r_nominal = r * pi
    if r_nominal <= pol.r_lower:
        raise IncompatiblePolicy(
            f"steady-state nominal rate {r_nominal:.4f} at or below the floor"
        )
    om1 = p_w * y / (1.0 - beta * cal.theta * pi**cal.epsilon)
    om2 = y / (1.0 - beta * cal.theta * pi ** (cal.epsilon - 1.0))
    base.update({
        "P_w": p_w, "p_reset": p_reset, "Pi": pi, "Delta": delta_disp,
        "Om1": om1, "Om2": om2, "R_star": r_nominal, "R_N": r_nominal,
    })
    regime = (margin_d > 0.0, margin_l > 0.0, False)
    return SteadyState(StickyCE.NAMES, _vector(StickyCE.NAMES, base), regime, tag, meta)


# ---------------------------------------------------------------------------
# first best
# ---------------------------------------------------------------------------

def ss_first_best(cal: Calibration, w: ParetoWeights) -> SteadyState:
    if min(w.omega_b, w.omega_e, w.omega_w) <= 0.0:
        raise AssumptionViolation("first best needs strictly positive Pareto weights")
    a, xi = 1.0, 1.0
    beta = cal.beta
    x, q = _capital_technology_ss(cal, xi)
    # capital margin at the fixed point: q = beta*(A F_K xi + q*((1-delta)xi
    # + Phi(x) - x Phi'(x)))
    fk = (q / beta - q * ((1.0 - cal.delta) * xi + funcs.phi_of(x, cal)
                          - x * funcs.phi_prime(x, cal))) / (a * xi)
    k_n = funcs.prod_k_inverse(fk, cal) / xi

    def consumption_split(c_w):
        mu_w = funcs.crra_mu(c_w, cal.gamma_w)
        c_b = (w.omega_b * mu_w / w.omega_w) ** (1.0 / cal.gamma_b) if cal.gamma_b != 1.0 else w.omega_b / (w.omega_w * mu_w)
        c_e = (w.omega_e * mu_w / w.omega_w) ** (1.0 / cal.gamma_e) if cal.gamma_e != 1.0 else w.omega_e / (w.omega_w * mu_w)
        return c_b, c_e

    def residuals(z):
        c_w, n = z
        if c_w <= 0.0 or n <= 0.0:
            return np.full(2, np.nan)
        c_b, c_e = consumption_split(c_w)
        k = k_n * n
        y = a * funcs.prod(xi * k, n, cal)
        lam_y = w.omega_w * funcs.crra_mu(c_w, cal.gamma_w)
        labor = w.omega_w * funcs.labor_mu(n, cal) - lam_y * a * funcs.prod_n(xi * k, n, cal)
        return np.array([y - c_b - c_e - c_w - x * k, labor])

    guess = np.array([0.8 * (k_n**cal.alpha - x * k_n), 1.1])
    sol = newton(residuals, guess)
    c_w, n = sol
    c_b, c_e = consumption_split(c_w)
    k = k_n * n
    invest = x * k
    y = a * funcs.prod(xi * k, n, cal)
    lam_y = w.omega_w * funcs.crra_mu(c_w, cal.gamma_w)
    _require_positive(C_b=c_b, C_e=c_e, C_w=c_w)
    v_b, v_e, v_w = _welfare_entries(cal, c_b, c_e, c_w, n)
    vals = {
        "C_b": c_b, "C_e": c_e, "C_w": c_w, "K": k, "I": invest, "N": n,
        "Y": y, "Q": q, "lam_Y": lam_y, "A": a, "xi": xi,
        "V_b": v_b, "V_e": v_e, "V_w": v_w,
    }
    return SteadyState(FirstBest.NAMES, _vector(FirstBest.NAMES, vals), (), "FirstBest",
                       {"I_over_K": x})


# ---------------------------------------------------------------------------
# flexible-price planner with given limits (FCEA / FCEA_OLL)
# ---------------------------------------------------------------------------

def _fcea_tail(cal, w, c_b, c_w, k, d, x, q, a=1.0, xi=1.0):
    """Sequential chain shared by the FCEA branches: given the Newton
    unknowns, recover (I, N, C_e, W, lam_C, lam_Y)."""
    r = 1.0 / cal.beta
    invest = x * k
    uw = funcs.crra_mu(c_w, cal.gamma_w)
    wn = c_w - (r - 1.0) * d - q * (1.0 - (1.0 - cal.delta) * xi) * k + invest
    if wn <= 0.0:
        return None
    n = (uw * wn / cal.chi) ** (1.0 / (1.0 + cal.phi))
    c_e = a * funcs.prod(xi * k, n, cal) - c_b - c_w - invest
    if c_e <= 0.0:
        return None
    wage = funcs.labor_mu(n, cal) / uw
    ue = funcs.crra_mu(c_e, cal.gamma_e)
    fn = a * funcs.prod_n(xi * k, n, cal)
    vpp_term = funcs.labor_mu2(n, cal) * n / uw
    lam_c = (-w.omega_w * funcs.labor_mu(n, cal) + w.omega_e * ue * fn) / (vpp_term + wage)
    lam_y = w.omega_e * ue - lam_c
    return invest, n, c_e, wage, lam_c, lam_y


def _fcea_foc_k_static(cal, lam_c, lam_y, lam_e, ue_fk_term, x, q, m, xi=1.0):
    """Planner capital optimality at the fixed point (flexible price)."""
    beta = cal.beta
    r = 1.0 / beta
    phi2 = funcs.phi_second(x, cal)
    return (
        lam_c * q * ((1.0 - beta) * phi2 * q**2 * (1.0 - (1.0 - cal.delta) * xi)
                     - (1.0 - beta * (1.0 - cal.delta) * xi))
        - lam_y * ((1.0 - beta) * q + beta * x)
        + lam_e * (1.0 - (r - 1.0) * phi2 * q**2) * m * q * xi
        + beta * ue_fk_term
    )


def ss_fcea(
    cal: Calibration,
    w: ParetoWeights,
    eta: float = 0.0,
    pol: PolicyRule | None = None,
    tag: str = "FCEA",
) -> SteadyState:
    """Constrained-efficient steady state in the flexible-price economy.

    ``eta`` selects a point in the indeterminate deposit interval (0 picks the
    optimal plan with D = 0).  The limits (kappa, m) come from ``pol`` for the
    FCEA variant and are relaxed to (0, 1) for FCEA_OLL.
    """
    if not 0.0 <= eta <= 1.0:
        raise IncompatiblePolicy(f"eta must lie in [0,1]; got {eta}")
    if tag == "FCEA_OLL":
        kappa, m = 0.0, 1.0
    else:
        pol = pol or PolicyRule()
        kappa, m = pol.kappa_bar, pol.m_bar
    a, xi = 1.0, 1.0
    beta, beta_b = cal.beta, cal.beta_b
    r = 1.0 / beta
    x, q = _capital_technology_ss(cal, xi)
    lev_fac = 1.0 - beta_b * (1.0 + (1.0 - kappa) * (r - 1.0))

    def d_of(case, c_b, k):
        cap = m * q * xi * k
        if case == 1:
            return eta * (1.0 - kappa) * (cap - c_b) / (1.0 + (1.0 - kappa) * (r - 1.0))
        return eta * ((1.0 - beta_b) * cap - c_b) / (r - 1.0)

    def slack_residuals(case):
        def fun(z):
            c_b, c_w, k = z
            if min(c_b, c_w, k) <= 0.0:
                return np.full(3, np.nan)
            d = d_of(case, c_b, k)
            if d < 0.0:
                return np.full(3, np.nan)
            tail = _fcea_tail(cal, w, c_b, c_w, k, d, x, q, a, xi)
            if tail is None:
                return np.full(3, np.nan)
            invest, n, c_e, wage, lam_c, lam_y = tail
            uw = funcs.crra_mu(c_w, cal.gamma_w)
            uww = funcs.crra_mu2(c_w, cal.gamma_w)
            ue = funcs.crra_mu(c_e, cal.gamma_e)
            ub = funcs.crra_mu(c_b, cal.gamma_b)
            r1 = w.omega_b * ub - w.omega_e * ue
            r2 = (w.omega_w * uw - lam_y
                  + lam_c * (uww / uw) * (wage * n + (r - 1.0) * d))
            fk_term = w.omega_e * ue * a * funcs.prod_k(xi * k, n, cal) * xi
            r3 = _fcea_foc_k_static(cal, lam_c, lam_y, 0.0, fk_term, x, q, m, xi)
            return np.array([r1, r2, r3])
        return fun

    branch = None
    sol = None
    guess = np.array([0.45, 3.9, 115.0])
    for case in (1, 2):
        try:
            z = newton(slack_residuals(case), guess)
        except SolverDiverged:
            continue
        c_b, c_w, k = z
        cap = m * q * xi * k
        if case == 1 and not c_b < lev_fac * cap:
            continue
        if case == 2 and not (lev_fac * cap <= c_b <= (1.0 - beta_b) * cap):
            continue
        d = d_of(case, c_b, k)
        lam_l = 0.0
        branch, sol = ("slack", case), (c_b, c_w, k, d, lam_l)
        break

    if branch is None:
        # binding collateral: closed forms for C_b, D, lam_L conditional on K
        def binding_residuals(z):
            c_w, k = z
            if min(c_w, k) <= 0.0:
                return np.full(2, np.nan)
            cap = m * q * xi * k
            c_b = (1.0 - beta_b) * cap / (1.0 + eta * beta_b * (1.0 - kappa) * (r - 1.0) / lev_fac)
            d = eta * beta_b * (1.0 - kappa) * c_b / lev_fac
            tail = _fcea_tail(cal, w, c_b, c_w, k, d, x, q, a, xi)
            if tail is None:
                return np.full(2, np.nan)
            invest, n, c_e, wage, lam_c, lam_y = tail
            loans = max(d / (1.0 - kappa), beta_b / (1.0 - beta_b) * (c_b + (r - 1.0) * d))
            borr = c_b + loans + (r - 1.0) * d
            ub = funcs.crra_mu(c_b, cal.gamma_b)
            ubb = funcs.crra_mu2(c_b, cal.gamma_b)
            ue = funcs.crra_mu(c_e, cal.gamma_e)
            uw = funcs.crra_mu(c_w, cal.gamma_w)
            uww = funcs.crra_mu2(c_w, cal.gamma_w)
            lam_l = (w.omega_b * ub - w.omega_e * ue) / (ub - ubb * (loans - beta_b * r * borr))
            lam_e = lam_l * (beta - beta_b) * ub
            r2 = (w.omega_w * uw - lam_y
                  + (uww / uw) * (lam_c * (wage * n + (r - 1.0) * d)
                                  + lam_l * ub * (r - 1.0) * d))
            fk_term = w.omega_e * ue * a * funcs.prod_k(xi * k, n, cal) * xi
            r3 = _fcea_foc_k_static(cal, lam_c, lam_y, lam_e, fk_term, x, q, m, xi)
            return np.array([r2, r3])

        try:
            z = newton(binding_residuals, guess[1:])
        except SolverDiverged as exc:
            raise NoBranchAdmissible(f"no admissible deposit branch: {exc}") from exc
        c_w, k = z
        cap = m * q * xi * k
        c_b = (1.0 - beta_b) * cap / (1.0 + eta * beta_b * (1.0 - kappa) * (r - 1.0) / lev_fac)
        d = eta * beta_b * (1.0 - kappa) * c_b / lev_fac
        ub = funcs.crra_mu(c_b, cal.gamma_b)
        ubb = funcs.crra_mu2(c_b, cal.gamma_b)
        tail = _fcea_tail(cal, w, c_b, c_w, k, d, x, q, a, xi)
        if tail is None:
            raise NoBranchAdmissible("binding branch leaves negative flows")
        loans = max(d / (1.0 - kappa), beta_b / (1.0 - beta_b) * (c_b + (r - 1.0) * d))
        borr = c_b + loans + (r - 1.0) * d
        ue = funcs.crra_mu(tail[2], cal.gamma_e)
        lam_l = (w.omega_b * ub - w.omega_e * ue) / (ub - ubb * (loans - beta_b * r * borr))
        if lam_l <= 0.0:
            raise NoBranchAdmissible("binding branch requires a positive loan-Euler multiplier")
        branch, sol = ("binding", None), (c_b, c_w, k, d, lam_l)

    c_b, c_w, k, d, lam_l = sol
    tail = _fcea_tail(cal, w, c_b, c_w, k, d, x, q, a, xi)
    invest, n, c_e, wage, lam_c, lam_y = tail
    _require_positive(C_b=c_b, C_e=c_e, C_w=c_w)
    ub = funcs.crra_mu(c_b, cal.gamma_b)
    lam_e = lam_l * (beta - beta_b) * ub
    loans = max(d / (1.0 - kappa), beta_b / (1.0 - beta_b) * (c_b + (r - 1.0) * d))
    borr = c_b + loans + (r - 1.0) * d
    gap_col = m * q * xi * k - borr
    if gap_col < -1e-12:
        raise NoBranchAdmissible(f"collateral violated by {gap_col}")
    r_loan = borr / loans
    r_k = (a * funcs.prod_k(xi * k, n, cal) / q + 1.0 - cal.delta) * xi
    y = a * funcs.prod(xi * k, n, cal)
    v_b, v_e, v_w = _welfare_entries(cal, c_b, c_e, c_w, n)
    vals = {
        "C_b": c_b, "C_e": c_e, "C_w": c_w, "D": d, "L": loans, "B": borr,
        "K": k, "I": invest, "N": n, "Y": y, "Q": q, "R": r, "R_L": r_loan,
        "R_K": r_k, "W": wage, "lam_b": 0.0, "lam_L": lam_l, "lam_C": lam_c,
        "lam_e": lam_e, "lam_Y": lam_y, "A": a, "xi": xi,
        "V_b": v_b, "V_e": v_e, "V_w": v_w,
    }
    regime = (False, lam_e > 0.0)
    meta = {"branch": branch, "eta": eta, "kappa": kappa, "m": m,
            "collateral_gap": gap_col, "I_over_K": x}
    return SteadyState(PlannerFlex.NAMES, _vector(PlannerFlex.NAMES, vals), regime, tag, meta)


# ---------------------------------------------------------------------------
# Ramsey with optimal leverage limits, flexible prices (OLL)
# ---------------------------------------------------------------------------

def _oll_tail(cal, w, c_b, c_w, k, n, lam_e, x, q, a=1.0, xi=1.0,
              p_w=1.0, delta_disp=1.0):
    """Sequential chain of the labor-tax Ramsey steady state; covers the
    flexible case (p_w = delta_disp = 1) and the sticky-price variant."""
    beta, beta_b, beta_e = cal.beta, cal.beta_b, cal.beta_e
    r = 1.0 / beta
    invest = x * k
    uw = funcs.crra_mu(c_w, cal.gamma_w)
    wage = funcs.labor_mu(n, cal) / uw
    f = funcs.prod(xi * k, n, cal)
    y = a / delta_disp * f
    d = (c_w - wage * n - q * (1.0 - (1.0 - cal.delta) * xi) * k + invest
         + p_w * a * f - y) / (r - 1.0)
    loans = d + beta_b / (1.0 - beta_b) * c_b
    borr = c_b + loans + (r - 1.0) * d
    c_e = y - c_b - c_w - invest
    if c_e <= 0.0:
        return None
    fk = funcs.prod_k(xi * k, n, cal)
    fn = funcs.prod_n(xi * k, n, cal)
    r_k = (p_w * a * fk / q + 1.0 - cal.delta) * xi
    ue = funcs.crra_mu(c_e, cal.gamma_e)
    uee = funcs.crra_mu2(c_e, cal.gamma_e)
    lam_k = lam_e / ((beta - beta_e) * ue)
    vpp_term = funcs.labor_mu2(n, cal) * n / uw
    markup_term = (a / delta_disp) * fn / cal.epsilon if delta_disp != 1.0 or p_w != 1.0 else 0.0
    if p_w == 1.0 and delta_disp == 1.0:
        lam_c = (
            -w.omega_w * funcs.labor_mu(n, cal)
            + w.omega_e * ue * a * fn
            + lam_k * ((r - 1.0) * (q * k - loans) * uee * a * fn
                       + beta_e * r * ue * a * funcs.prod_kn(xi * k, n, cal) * xi * k)
        ) / (vpp_term + wage)
    else:
        lam_c = (
            -w.omega_w * funcs.labor_mu(n, cal)
            + w.omega_e * ue * (a / delta_disp) * fn
            + lam_k * ((r - 1.0) * (q * k - loans) * uee
                       + beta_e * r * ue * cal.alpha * (cal.epsilon - 1.0) / cal.epsilon)
            * (a / delta_disp) * fn
        ) / (vpp_term + wage + markup_term)
    lam_y = w.omega_e * ue - lam_c + lam_k * (r - 1.0) * (q * k - loans) * uee
    return {
        "invest": invest, "wage": wage, "d": d, "loans": loans, "borr": borr,
        "c_e": c_e, "y": y, "r_k": r_k, "lam_k": lam_k, "lam_c": lam_c,
        "lam_y": lam_y, "uw": uw, "ue": ue, "uee": uee,
    }


def _oll_foc_k_static(cal, w, tail, lam_e, c_b, k, n, x, q, a=1.0, xi=1.0,
                      p_w=1.0, delta_disp=1.0):
    beta, beta_e = cal.beta, cal.beta_e
    r = 1.0 / beta
    phi2 = funcs.phi_second(x, cal)
    lam_c, lam_y, lam_k = tail["lam_c"], tail["lam_y"], tail["lam_k"]
    ue, uee = tail["ue"], tail["uee"]
    loans, r_k = tail["loans"], tail["r_k"]
    fk = funcs.prod_k(xi * k, n, cal)
    core = (
        lam_c * q * ((1.0 - beta) * phi2 * q**2 * (1.0 - (1.0 - cal.delta) * xi)
                     - (1.0 - beta * (1.0 - cal.delta) * xi))
        - lam_y * ((1.0 - beta) * q + beta * x)
        + lam_e * q * xi * (1.0 - (r - 1.0) * phi2 * q**2)
    )
    if p_w == 1.0 and delta_disp == 1.0:
        core += beta * w.omega_e * ue * a * fk * xi
        core += lam_k * ue * (
            (1.0 - beta) * (q * k - loans) * (uee / ue) * a * fk * xi
            + beta_e * a * funcs.prod_kk(xi * k, n, cal) * xi**2 * k
            + phi2 * q**3 * (r - 1.0) * (beta - beta_e * (1.0 - cal.delta) * xi)
            - q * (1.0 - beta_e * r_k)
        )
    else:
        mk = (cal.epsilon - 1.0) / cal.epsilon
        core += beta * (w.omega_e * ue - lam_c / cal.epsilon) * (a / delta_disp) * fk * xi
        core += lam_k * ue * (
            ((1.0 - beta) * (q * k - loans) * (uee / ue) + mk * beta_e * cal.alpha)
            * (a / delta_disp) * fk * xi
            + phi2 * q**3 * (r - 1.0) * (beta - beta_e * (1.0 - cal.delta) * xi)
            - q * (1.0 - beta_e * (1.0 - cal.delta) * xi)
        )
    return core


def _solve_ramsey_leverage(cal, w, x, q, p_w=1.0, delta_disp=1.0, a=1.0, xi=1.0,
                           pi=1.0, r_lower=1.0):
    """Two-branch solve shared by the flexible and sticky Ramsey steady
    states; returns (c_b, c_w, k, n, lam_e, tail, branch)."""
    beta, beta_b, beta_e = cal.beta, cal.beta_b, cal.beta_e
    mk = (cal.epsilon - 1.0) / cal.epsilon
    r = 1.0 / beta
    sticky = not (p_w == 1.0 and delta_disp == 1.0)

    def euler_gap(tail, k):
        # entrepreneur capital-Euler implementability at the fixed point
        return beta_e * (tail["r_k"] * q * k - tail["borr"]) - (q * k - tail["loans"])

    def sticky_foc_cw_extra(tail, uww):
        # price-setting spillover into the worker margin; zero when trend
        # inflation is at the floor-free optimum Pi = 1
        if not sticky:
            return 0.0
        lam_c_til = tail["lam_c"] + tail["lam_k"] * beta_e * r * tail["ue"] * cal.alpha
        lam_r = _lam_r_closed_form(cal, pi, tail["y"], lam_c_til, tail["lam_y"])
        return (uww / tail["uw"]) * (
            -lam_c_til * (p_w * delta_disp - mk) * tail["y"]
            - lam_r * (r - 1.0) * r_lower
        )

    def slack_residuals(z):
        c_b, k, n = z
        if min(c_b, k, n) <= 0.0:
            return np.full(3, np.nan)
        ub = funcs.crra_mu(c_b, cal.gamma_b)
        c_e_target = (w.omega_e / (w.omega_b * ub)) ** (1.0 / cal.gamma_e)
        y = a / delta_disp * funcs.prod(xi * k, n, cal)
        c_w = y - x * k - c_b - c_e_target
        if c_w <= 0.0:
            return np.full(3, np.nan)
        tail = _oll_tail(cal, w, c_b, c_w, k, n, 0.0, x, q, a, xi, p_w, delta_disp)
        if tail is None:
            return np.full(3, np.nan)
        uw = tail["uw"]
        uww = funcs.crra_mu2(c_w, cal.gamma_w)
        r2 = (w.omega_w * uw - tail["lam_y"]
              + tail["lam_c"] * (uww / uw) * (tail["wage"] * n + (r - 1.0) * tail["d"])
              + sticky_foc_cw_extra(tail, uww))
        r3 = _oll_foc_k_static(cal, w, tail, 0.0, c_b, k, n, x, q, a, xi, p_w, delta_disp)
        return np.array([euler_gap(tail, k), r2, r3])

    def binding_residuals(z):
        c_w, k, n = z
        if min(c_w, k, n) <= 0.0:
            return np.full(3, np.nan)
        uw = funcs.crra_mu(c_w, cal.gamma_w)
        wage = funcs.labor_mu(n, cal) / uw
        f = funcs.prod(xi * k, n, cal)
        y = a / delta_disp * f
        d = (c_w - wage * n - q * (1.0 - (1.0 - cal.delta) * xi) * k + x * k
             + p_w * a * f - y) / (r - 1.0)
        c_b = (1.0 - beta_b) * (q * xi * k - r * d)
        if c_b <= 0.0:
            return np.full(3, np.nan)
        tail = _oll_tail(cal, w, c_b, c_w, k, n, 0.0, x, q, a, xi, p_w, delta_disp)
        if tail is None:
            return np.full(3, np.nan)
        ub = funcs.crra_mu(c_b, cal.gamma_b)
        ue, uee = tail["ue"], tail["uee"]
        lam_e = ((beta - beta_e) * (w.omega_b * ub - w.omega_e * ue)
                 / ((r - 1.0) * (q * k - tail["loans"]) * uee / ue + 1.0))
        tail = _oll_tail(cal, w, c_b, c_w, k, n, lam_e, x, q, a, xi, p_w, delta_disp)
        if tail is None:
            return np.full(3, np.nan)
        uww = funcs.crra_mu2(c_w, cal.gamma_w)
        r2 = (w.omega_w * uw - tail["lam_y"]
              + (uww / uw) * (tail["lam_c"] * (tail["wage"] * n + (r - 1.0) * tail["d"])
                              + lam_e * (r - 1.0) / (beta - beta_e) * tail["d"])
              + sticky_foc_cw_extra(tail, uww))
        r3 = _oll_foc_k_static(cal, w, tail, lam_e, c_b, k, n, x, q, a, xi, p_w, delta_disp)
        return np.array([euler_gap(tail, k), r2, r3])

    from itertools import product

    slack_seeds = [np.array(s) for s in product((0.3, 0.5), (70.0, 90.0, 110.0),
                                                (0.95, 1.05, 1.15))]
    binding_seeds = [np.array(s) for s in product((2.4, 2.8, 3.1, 3.35),
                                                  (45.0, 55.0, 66.0, 80.0),
                                                  (0.88, 0.94, 0.99, 1.02))]

    # slack branch first
    try:
        z = _multi_start_newton(slack_residuals, slack_seeds)
        c_b, k, n = z
        ub = funcs.crra_mu(c_b, cal.gamma_b)
        c_e_target = (w.omega_e / (w.omega_b * ub)) ** (1.0 / cal.gamma_e)
        y = a / delta_disp * funcs.prod(xi * k, n, cal)
        c_w = y - x * k - c_b - c_e_target
        tail = _oll_tail(cal, w, c_b, c_w, k, n, 0.0, x, q, a, xi, p_w, delta_disp)
        if tail is not None and q * xi * k - tail["borr"] >= 0.0:
            return c_b, c_w, k, n, 0.0, tail, "slack"
    except SolverDiverged:
        pass

    z = _multi_start_newton(binding_residuals, binding_seeds)
    c_w, k, n = z
    uw = funcs.crra_mu(c_w, cal.gamma_w)
    wage = funcs.labor_mu(n, cal) / uw
    f = funcs.prod(xi * k, n, cal)
    y = a / delta_disp * f
    d = (c_w - wage * n - q * (1.0 - (1.0 - cal.delta) * xi) * k + x * k
         + p_w * a * f - y) / (r - 1.0)
    c_b = (1.0 - beta_b) * (q * xi * k - r * d)
    tail0 = _oll_tail(cal, w, c_b, c_w, k, n, 0.0, x, q, a, xi, p_w, delta_disp)
    if tail0 is None:
        raise NoBranchAdmissible("binding Ramsey branch leaves negative flows")
    ub = funcs.crra_mu(c_b, cal.gamma_b)
    ue, uee = tail0["ue"], tail0["uee"]
    lam_e = ((beta - beta_e) * (w.omega_b * ub - w.omega_e * ue)
             / ((r - 1.0) * (q * k - tail0["loans"]) * uee / ue + 1.0))
    if lam_e < 0.0:
        raise NoBranchAdmissible("binding Ramsey branch needs a nonnegative multiplier")
    tail = _oll_tail(cal, w, c_b, c_w, k, n, lam_e, x, q, a, xi, p_w, delta_disp)
    return c_b, c_w, k, n, lam_e, tail, "binding"


def ss_oll(cal: Calibration, w: ParetoWeights) -> SteadyState:
    cal.check_assumption1(0.0)
    a, xi = 1.0, 1.0
    x, q = _capital_technology_ss(cal, xi)
    c_b, c_w, k, n, lam_e, tail, branch = _solve_ramsey_leverage(cal, w, x, q)
    c_e, d, loans, borr = tail["c_e"], tail["d"], tail["loans"], tail["borr"]
    _require_positive(C_b=c_b, C_e=c_e, C_w=c_w)
    if d <= 0.0:
        raise GuessViolated(f"expected positive deposits, got D = {d}")
    if loans <= cal.beta_e * borr:
        raise GuessViolated("loan margin not slack: L <= beta_e * B")
    r = 1.0 / cal.beta
    r_loan = borr / loans
    v_b, v_e, v_w = _welfare_entries(cal, c_b, c_e, c_w, n)
    vals = {
        "C_b": c_b, "C_e": c_e, "C_w": c_w, "D": d, "L": loans, "B": borr,
        "K": k, "I": tail["invest"], "N": n, "Y": tail["y"], "Q": q, "R": r,
        "R_L": r_loan, "R_K": tail["r_k"], "W": tail["wage"],
        "lam_b": 0.0, "lam_L": 0.0, "lam_D": 0.0, "lam_C": tail["lam_c"],
        "lam_e": lam_e, "lam_K": tail["lam_k"], "lam_B": 0.0,
        "lam_Y": tail["lam_y"], "A": a, "xi": xi,
        "V_b": v_b, "V_e": v_e, "V_w": v_w,
    }
    regime = (False, False, lam_e > 0.0, False)
    meta = {"branch": branch, "I_over_K": x,
            "collateral_gap": q * xi * k - borr}
    return SteadyState(PlannerOLL.NAMES, _vector(PlannerOLL.NAMES, vals), regime, "OLL", meta)


# ---------------------------------------------------------------------------
# sticky-price planner with given limits (CEA / CEA_OLLMP)
# ---------------------------------------------------------------------------

def _cea_tail(cal, w, c_b, c_w, k, n, d, x, q, pi, p_reset, p_w, delta_disp,
              a=1.0, xi=1.0):
    beta = cal.beta
    r = 1.0 / beta
    invest = x * k
    uw = funcs.crra_mu(c_w, cal.gamma_w)
    wage = funcs.labor_mu(n, cal) / uw
    f = funcs.prod(xi * k, n, cal)
    y = a / delta_disp * f
    c_e = y - c_b - c_w - invest
    if c_e <= 0.0:
        return None
    ue = funcs.crra_mu(c_e, cal.gamma_e)
    fn_eff = (a / delta_disp) * funcs.prod_n(xi * k, n, cal)
    vpp_term = funcs.labor_mu2(n, cal) * n / uw
    lam_c = (-w.omega_w * funcs.labor_mu(n, cal) + w.omega_e * ue * fn_eff) / (
        vpp_term + wage + fn_eff / cal.epsilon
    )
    lam_y = w.omega_e * ue - lam_c
    return {
        "invest": invest, "wage": wage, "y": y, "c_e": c_e, "uw": uw, "ue": ue,
        "lam_c": lam_c, "lam_y": lam_y, "fn_eff": fn_eff,
    }


def _cea_foc_k_static(cal, w, tail, lam_e, k, n, x, q, m, delta_disp, a=1.0, xi=1.0):
    beta = cal.beta
    r = 1.0 / beta
    phi2 = funcs.phi_second(x, cal)
    lam_c, lam_y = tail["lam_c"], tail["lam_y"]
    fk_eff = (a / delta_disp) * funcs.prod_k(xi * k, n, cal)
    return (
        lam_c * q * ((1.0 - beta) * phi2 * q**2 * (1.0 - (1.0 - cal.delta) * xi)
                     - (1.0 - beta * (1.0 - cal.delta) * xi))
        - lam_y * ((1.0 - beta) * q + beta * x)
        + lam_e * (1.0 - (r - 1.0) * phi2 * q**2) * m * q * xi
        + beta * (w.omega_e * tail["ue"] - lam_c / cal.epsilon) * fk_eff * xi
    )


def _lam_r_closed_form(cal, pi, y, lam_c_eff, lam_y):
    """Rate-floor multiplier at the fixed point of an inflation-choosing
    planner (zero when the floor is slack, i.e. at Pi = 1)."""
    beta, theta, epsil = cal.beta, cal.theta, cal.epsilon
    return ((pi - 1.0) / pi
            * beta * theta * pi ** (epsil - 1.0) / (1.0 - beta * theta * pi**epsil)
            * ((epsil - 1.0) * lam_c_eff + epsil * lam_y)
            / (1.0 - theta * pi ** (epsil - 1.0))
            * beta * y)


def optimal_long_run_inflation(cal: Calibration, r_lower: float) -> float:
    """Long-run inflation of the inflation-choosing planners: price stability
    unless the floor forces positive trend inflation."""
    if r_lower <= 0.0:
        raise IncompatiblePolicy(f"r_lower must be positive; got {r_lower}")
    if r_lower <= 1.0 / cal.beta:
        return 1.0
    return cal.beta * r_lower


def ss_cea(
    cal: Calibration,
    w: ParetoWeights,
    pol: PolicyRule,
    eta: float = 0.0,
) -> SteadyState:
    """Constrained-efficient steady state with sticky prices at the given
    inflation target (monetary block taken as given)."""
    return _ss_planner_sticky(cal, w, pol, eta, tag="CEA")


def ss_cea_ollmp(cal: Calibration, w: ParetoWeights, r_lower: float = 1.0) -> SteadyState:
    """Constrained-efficient steady state with sticky prices when the planner
    chooses inflation subject to the rate floor (limits relaxed to (0, 1))."""
    pol = PolicyRule(r_lower=r_lower)
    return _ss_planner_sticky(cal, w, pol, 0.0, tag="CEA_OLLMP")


def _ss_planner_sticky(cal, w, pol, eta, tag):
    if not 0.0 <= eta <= 1.0:
        raise IncompatiblePolicy(f"eta must lie in [0,1]; got {eta}")
    chooses_inflation = tag == "CEA_OLLMP"
    if chooses_inflation:
        kappa, m = 0.0, 1.0
        pi = optimal_long_run_inflation(cal, pol.r_lower)
    else:
        kappa, m = pol.kappa_bar, pol.m_bar
        pi = pol.pi_bar
    a, xi = 1.0, 1.0
    beta, beta_b = cal.beta, cal.beta_b
    theta, epsil = cal.theta, cal.epsilon
    mk = (epsil - 1.0) / epsil
    r = 1.0 / beta
    x, q = _capital_technology_ss(cal, xi)
    p_reset, p_w, delta_disp = retail_block_ss(cal, pi)
    lev_fac = 1.0 - beta_b * (1.0 + (1.0 - kappa) * (r - 1.0))

    def d_of(case, c_b, k):
        cap = m * q * xi * k
        if case == 1:
            return eta * (1.0 - kappa) * (cap - c_b) / (1.0 + (1.0 - kappa) * (r - 1.0))
        return eta * ((1.0 - beta_b) * cap - c_b) / (r - 1.0)

    def common_rows(c_b, c_w, k, n, d, lam_l, lam_e):
        tail = _cea_tail(cal, w, c_b, c_w, k, n, d, x, q, pi, p_reset, p_w,
                         delta_disp, a, xi)
        if tail is None:
            return None, None
        uw = tail["uw"]
        uww = funcs.crra_mu2(c_w, cal.gamma_w)
        ub = funcs.crra_mu(c_b, cal.gamma_b)
        lam_r = (_lam_r_closed_form(cal, pi, tail["y"], tail["lam_c"], tail["lam_y"])
                 if chooses_inflation else 0.0)
        r2 = (w.omega_w * uw - tail["lam_y"]
              + (uww / uw) * (tail["lam_c"] * (tail["wage"] * n + (r - 1.0) * d
                                               - (p_w * delta_disp - mk) * tail["y"])
                              + lam_l * ub * (r - 1.0) * d)
              - lam_r * (uww / uw) * (r - 1.0) * pol.r_lower)
        r3 = _cea_foc_k_static(cal, w, tail, lam_e, k, n, x, q, m, delta_disp, a, xi)
        r4 = (c_w - tail["wage"] * n - (r - 1.0) * d
              - q * (1.0 - (1.0 - cal.delta) * xi) * k + tail["invest"]
              - (1.0 - p_w * delta_disp) * tail["y"])
        return tail, (r2, r3, r4)

    branch = None
    sol = None
    guess = np.array([0.45, 3.9, 115.0, 1.1])
    for case in (1, 2):
        def slack_fun(z, case=case):
            c_b, c_w, k, n = z
            if min(c_b, c_w, k, n) <= 0.0:
                return np.full(4, np.nan)
            d = d_of(case, c_b, k)
            if d < 0.0:
                return np.full(4, np.nan)
            tail, rows = common_rows(c_b, c_w, k, n, d, 0.0, 0.0)
            if tail is None:
                return np.full(4, np.nan)
            ub = funcs.crra_mu(c_b, cal.gamma_b)
            r1 = w.omega_b * ub - w.omega_e * tail["ue"]
            return np.array([r1, *rows])

        try:
            z = newton(slack_fun, guess)
        except SolverDiverged:
            continue
        c_b, c_w, k, n = z
        cap = m * q * xi * k
        if case == 1 and not c_b < lev_fac * cap:
            continue
        if case == 2 and not (lev_fac * cap <= c_b <= (1.0 - beta_b) * cap):
            continue
        branch, sol = ("slack", case), (c_b, c_w, k, n, d_of(case, c_b, k), 0.0)
        break

    if branch is None:
        def binding_fun(z):
            c_w, k, n = z
            if min(c_w, k, n) <= 0.0:
                return np.full(3, np.nan)
            cap = m * q * xi * k
            c_b = (1.0 - beta_b) * cap / (1.0 + eta * beta_b * (1.0 - kappa) * (r - 1.0) / lev_fac)
            d = eta * beta_b * (1.0 - kappa) * c_b / lev_fac
            tail = _cea_tail(cal, w, c_b, c_w, k, n, d, x, q, pi, p_reset, p_w,
                             delta_disp, a, xi)
            if tail is None:
                return np.full(3, np.nan)
            loans = max(d / (1.0 - kappa), beta_b / (1.0 - beta_b) * (c_b + (r - 1.0) * d))
            borr = c_b + loans + (r - 1.0) * d
            ub = funcs.crra_mu(c_b, cal.gamma_b)
            ubb = funcs.crra_mu2(c_b, cal.gamma_b)
            lam_l = (w.omega_b * ub - w.omega_e * tail["ue"]) / (
                ub - ubb * (loans - beta_b * r * borr))
            lam_e = lam_l * (beta - beta_b) * ub
            _, rows = common_rows(c_b, c_w, k, n, d, lam_l, lam_e)
            if rows is None:
                return np.full(3, np.nan)
            return np.asarray(rows)

        try:
            z = newton(binding_fun, guess[1:])
        except SolverDiverged as exc:
            raise NoBranchAdmissible(f"no admissible deposit branch: {exc}") from exc
        c_w, k, n = z
        cap = m * q * xi * k
        c_b = (1.0 - beta_b) * cap / (1.0 + eta * beta_b * (1.0 - kappa) * (r - 1.0) / lev_fac)
        d = eta * beta_b * (1.0 - kappa) * c_b / lev_fac
        tail = _cea_tail(cal, w, c_b, c_w, k, n, d, x, q, pi, p_reset, p_w,
                         delta_disp, a, xi)
        loans = max(d / (1.0 - kappa), beta_b / (1.0 - beta_b) * (c_b + (r - 1.0) * d))
        borr = c_b + loans + (r - 1.0) * d
        ub = funcs.crra_mu(c_b, cal.gamma_b)
        ubb = funcs.crra_mu2(c_b, cal.gamma_b)
        lam_l = (w.omega_b * ub - w.omega_e * tail["ue"]) / (
            ub - ubb * (loans - beta_b * r * borr))
        if lam_l <= 0.0:
            raise NoBranchAdmissible("binding branch requires a positive loan-Euler multiplier")
        branch, sol = ("binding", None), (c_b, c_w, k, n, d, lam_l)

    c_b, c_w, k, n, d, lam_l = sol
    tail = _cea_tail(cal, w, c_b, c_w, k, n, d, x, q, pi, p_reset, p_w,
                     delta_disp, a, xi)
    c_e, y = tail["c_e"], tail["y"]
    _require_positive(C_b=c_b, C_e=c_e, C_w=c_w)
    ub = funcs.crra_mu(c_b, cal.gamma_b)
    lam_e = lam_l * (beta - beta_b) * ub
    lam_c, lam_y = tail["lam_c"], tail["lam_y"]
    loans = max(d / (1.0 - kappa), beta_b / (1.0 - beta_b) * (c_b + (r - 1.0) * d))
    borr = c_b + loans + (r - 1.0) * d
    gap_col = m * q * xi * k - borr
    if gap_col < -1e-12:
        raise NoBranchAdmissible(f"collateral violated by {gap_col}")
    om1 = p_w * y / (1.0 - beta * theta * pi**epsil)
    lam_om = lam_c / p_reset
    r_loan = borr / loans
    r_k = (p_w * a * funcs.prod_k(xi * k, n, cal) / q + 1.0 - cal.delta) * xi
    v_b, v_e, v_w = _welfare_entries(cal, c_b, c_e, c_w, n)
    vals = {
        "C_b": c_b, "C_e": c_e, "C_w": c_w, "D": d, "L": loans, "B": borr,
        "K": k, "I": tail["invest"], "N": n, "Y": y, "Q": q, "R": r,
        "R_L": r_loan, "R_K": r_k, "W": tail["wage"],
        "lam_b": 0.0, "lam_L": lam_l, "lam_C": lam_c, "lam_e": lam_e,
        "lam_Y": lam_y, "lam_Om": lam_om,
        "P_w": p_w, "p_reset": p_reset, "Pi": pi, "Delta": delta_disp,
        "Om1": om1, "A": a, "xi": xi, "V_b": v_b, "V_e": v_e, "V_w": v_w,
    }
    meta = {"branch": branch, "eta": eta, "kappa": kappa, "m": m, "Pi": pi,
            "collateral_gap": gap_col, "I_over_K": x}
    if chooses_inflation:
        lam_r = _lam_r_closed_form(cal, pi, y, lam_c, lam_y)
        lam_delta = (lam_c * (p_w * delta_disp - mk) - lam_y) * om1 / (p_w * delta_disp)
        vals.update({"lam_Delta": lam_delta, "lam_R": lam_r})
        regime = (False, lam_e > 0.0, lam_r > 0.0)
        meta["lam_R"] = lam_r
        names = PlannerSticky.NAMES_OPTIMAL_MP
    else:
        r_nominal = r * pi
        if r_nominal <= pol.r_lower:
            raise IncompatiblePolicy(
                f"steady-state nominal rate {r_nominal:.4f} at or below the floor")
        vals.update({"R_star": r_nominal, "R_N": r_nominal})
        regime = (False, lam_e > 0.0, False)
        names = PlannerSticky.NAMES_TAYLOR
    return SteadyState(names, _vector(names, vals), regime, tag, meta)


# ---------------------------------------------------------------------------
# Ramsey with optimal leverage limits and monetary policy (OLLMP)
# ---------------------------------------------------------------------------

def ss_ollmp(
    cal: Calibration,
    w: ParetoWeights,
    r_lower: float = 1.0,
    beta_b_override: float | None = 0.989,
) -> SteadyState:
    if beta_b_override is not None:
        cal = replace(cal, beta_b=beta_b_override)
    cal.check_assumption1(0.0)
    a, xi = 1.0, 1.0
    beta, beta_e = cal.beta, cal.beta_e
    theta, epsil = cal.theta, cal.epsilon
    mk = (epsil - 1.0) / epsil
    r = 1.0 / beta
    pi = optimal_long_run_inflation(cal, r_lower)
    p_reset, p_w, delta_disp = retail_block_ss(cal, pi)
    x, q = _capital_technology_ss(cal, xi)

    c_b, c_w, k, n, lam_e, tail, branch = _solve_ramsey_leverage(
        cal, w, x, q, p_w=p_w, delta_disp=delta_disp, a=a, xi=xi,
        pi=pi, r_lower=r_lower)
    c_e, d, loans, borr = tail["c_e"], tail["d"], tail["loans"], tail["borr"]
    y = tail["y"]
    _require_positive(C_b=c_b, C_e=c_e, C_w=c_w)
    if d <= 0.0:
        raise GuessViolated(f"expected positive deposits, got D = {d}")
    if loans <= beta_e * borr:
        raise GuessViolated("loan margin not slack: L <= beta_e * B")

    ue = tail["ue"]
    lam_c, lam_y, lam_k = tail["lam_c"], tail["lam_y"], tail["lam_k"]
    lam_c_til = lam_c + lam_k * beta_e * r * ue * cal.alpha
    lam_om = lam_c_til / p_reset
    om1 = p_w * y / (1.0 - beta * theta * pi**epsil)
    lam_delta = (lam_c_til * (p_w * delta_disp - mk) - lam_y) * om1 / (p_w * delta_disp)
    lam_r = _lam_r_closed_form(cal, pi, y, lam_c_til, lam_y)
    r_loan = borr / loans
    v_b, v_e, v_w = _welfare_entries(cal, c_b, c_e, c_w, n)
    vals = {
        "C_b": c_b, "C_e": c_e, "C_w": c_w, "D": d, "L": loans, "B": borr,
        "K": k, "I": tail["invest"], "N": n, "Y": y, "Q": q, "R": r,
        "R_L": r_loan, "R_K": tail["r_k"], "W": tail["wage"],
        "lam_b": 0.0, "lam_L": 0.0, "lam_D": 0.0, "lam_C": lam_c,
        "lamC_til": lam_c_til, "lam_e": lam_e, "lam_K": lam_k, "lam_B": 0.0,
        "lam_Y": lam_y, "lam_Om": lam_om, "lam_Delta": lam_delta, "lam_R": lam_r,
        "P_w": p_w, "p_reset": p_reset, "Pi": pi, "Delta": delta_disp,
        "Om1": om1, "A": a, "xi": xi, "V_b": v_b, "V_e": v_e, "V_w": v_w,
    }
    regime = (False, False, lam_e > 0.0, False, lam_r > 0.0)
    meta = {"branch": branch, "Pi": pi, "r_lower": r_lower,
            "beta_b": cal.beta_b, "collateral_gap": q * xi * k - borr,
            "I_over_K": x}
    return SteadyState(PlannerOLLMP.NAMES, _vector(PlannerOLLMP.NAMES, vals),
                       regime, "OLLMP", meta)


# ---------------------------------------------------------------------------
# dispatch + verification
# ---------------------------------------------------------------------------

def steady_state_for(
    variant: Variant,
    cal: Calibration,
    pol: PolicyRule | None = None,
    weights: ParetoWeights | None = None,
) -> SteadyState:
    """Route to the constructor matching the variant tag."""
    tag = variant.tag
    eff = variant.effective_calibration(cal)
    if tag in ("FCE", "CE"):
        if pol is None:
            raise IncompatiblePolicy(f"{tag} steady state needs a policy rule")
        return ss_regulated_ce(eff, pol, tag=tag)
    if weights is None:
        raise IncompatiblePolicy(f"{tag} steady state needs Pareto weights")
    if tag == "FirstBest":
        return ss_first_best(eff, weights)
    if tag in ("FCEA", "FCEA_OLL"):
        return ss_fcea(eff, weights, eta=variant.eta, pol=pol, tag=tag)
    if tag == "OLL":
        return ss_oll(eff, weights)
    if tag == "CEA":
        if pol is None:
            raise IncompatiblePolicy("CEA steady state needs a policy rule")
        return ss_cea(eff, weights, pol, eta=variant.eta)
    if tag == "CEA_OLLMP":
        pol = pol or PolicyRule()
        return ss_cea_ollmp(eff, weights, r_lower=pol.r_lower)
    if tag == "OLLMP":
        # eff already carries any beta_b override, so do not re-apply it here
        pol = pol or PolicyRule()
        return ss_ollmp(eff, weights, r_lower=pol.r_lower, beta_b_override=None)
    raise IncompatiblePolicy(f"unhandled variant {tag!r}")


def verify_ss(sys: EquationSystem, ss: SteadyState, top: int = 5) -> ResidualReport:
    """Evaluate the dynamic residuals at lag = cur = lead = ss."""
    if tuple(ss.names) != tuple(sys.names):
        raise DimensionMismatch(
            f"steady-state registry does not match system {sys.variant.tag}")
    sys.attach_steady_state(ss)
    res = sys.residuals(ss.values, ss.values, ss.values, np.zeros(2), ss.regime)
    order = np.argsort(-np.abs(res))[:top]
    worst = tuple((int(i), float(abs(res[i]))) for i in order)
    return ResidualReport(float(np.max(np.abs(res))), res, worst)

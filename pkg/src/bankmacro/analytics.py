"""Welfare accounting, risk sharing, wedges, and crisis event studies.

Everything here is pure post-processing over immutable simulated paths (or
steady states): consumption-equivalent welfare comparisons against the
first best, correlation tables of filtered marginal utilities, additive
decompositions of the planner-vs-market optimality gaps, loan histograms,
and the detection/averaging machinery for crisis windows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import funcs
from .errors import (
    DimensionMismatch,
    MissingVariable,
    MissingWelfareSeries,
    VariantMismatch,
    WindowOutOfRange,
)
from .model import SimPath
from .moments import hp_filter
from .occbin import RegimeMap
from .params import Calibration, ParetoWeights, PolicyRule
from .steady_state import SteadyState

AGENTS = ("b", "e", "w")
WELFARE_SERIES = ("V_b", "V_e", "V_w")

FLEX_PLANNER_TAGS = ("FCEA", "FCEA_OLL", "OLL")
STICKY_PLANNER_TAGS = ("CEA", "CEA_OLLMP", "OLLMP")

# crisis window patterns: (slack quarters before the start, binding quarters
# from the start onward)
CRISIS_PATTERNS = {
    "financial": ("collateral", 4, 5),
    "zlb": ("elb", 4, 3),
}


# ---------------------------------------------------------------------------
# welfare in consumption equivalents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WelfareReport:
    """Consumption-equivalent comparison of one allocation to the first best."""

    variant_tag: str
    method: str                       # "path_mean" or "steady_state"
    welfare: dict                     # agent/social -> W
    reference: dict                   # agent/social -> first-best W
    pct_of_first_best: dict           # agent/social -> lambda x 100


def _welfare_levels(alloc, label: str) -> tuple[dict, str, str]:
    """Mean welfare per agent from a path or a steady state."""
    if isinstance(alloc, SteadyState):
        missing = [nm for nm in WELFARE_SERIES if nm not in alloc]
        if missing:
            raise MissingWelfareSeries(f"{label}: steady state lacks {missing}")
        levels = {a: alloc[nm] for a, nm in zip(AGENTS, WELFARE_SERIES)}
        return levels, alloc.variant_tag, "steady_state"
    if isinstance(alloc, SimPath):
        missing = [nm for nm in WELFARE_SERIES if nm not in alloc]
        if missing:
            raise MissingWelfareSeries(f"{label}: path lacks {missing}")
        levels = {a: float(np.mean(alloc[nm]))
                  for a, nm in zip(AGENTS, WELFARE_SERIES)}
        return levels, alloc.meta.get("variant_tag", "?"), "path_mean"
    raise MissingWelfareSeries(
        f"{label}: expected SimPath or SteadyState, got {type(alloc).__name__}")


def welfare_report(alloc, first_best, cal: Calibration,
                   weights: ParetoWeights) -> WelfareReport:
    """Consumption equivalents of ``alloc`` relative to ``first_best``.

    Each agent's welfare is the discounted stream of her felicity at the
    common discount factor beta, so a uniform consumption rescaling of a
    plan shifts welfare by ln(scale)/(1-beta) for every agent, and

        lambda_i = exp[(1 - beta) (W_i - W_i_FB)]

    is exact under log consumption utility.  The social figure applies the
    same mapping to the Pareto-weighted aggregate.  Accepts a ``SimPath``
    (welfare = path mean of the recursion series, the simulation estimator)
    or a ``SteadyState`` (the deterministic estimator); the two differ by
    the risk adjustment of the approximation used to produce the path.
    """
    levels, tag, method = _welfare_levels(alloc, "allocation")
    ref, _, ref_method = _welfare_levels(first_best, "first best")
    wvec = {"b": weights.omega_b, "e": weights.omega_e, "w": weights.omega_w}
    wsum = sum(wvec.values())
    levels["social"] = sum(wvec[a] * levels[a] for a in AGENTS)
    ref["social"] = sum(wvec[a] * ref[a] for a in AGENTS)
    pct = {a: 100.0 * float(np.exp((1.0 - cal.beta) * (levels[a] - ref[a])))
           for a in AGENTS}
    pct["social"] = 100.0 * float(
        np.exp((1.0 - cal.beta) * (levels["social"] - ref["social"]) / wsum))
    return WelfareReport(
        variant_tag=tag,
        method=method if method == ref_method else f"{method}/{ref_method}",
        welfare=levels, reference=ref, pct_of_first_best=pct)


# ---------------------------------------------------------------------------
# risk sharing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RiskSharingTable:
    """Correlations of HP-filtered log marginal utilities of consumption."""

    labels: tuple
    corr: np.ndarray                  # 3 x 3, symmetric, unit diagonal

    def pair(self, a: str, b: str) -> float:
        i, j = self.labels.index(a), self.labels.index(b)
        return float(self.corr[i, j])


def risk_sharing(path: SimPath, cal: Calibration,
                 hp_lambda: float = 1600.0) -> RiskSharingTable:
    """3x3 correlation table of filtered log marginal utilities."""
    gammas = {"b": cal.gamma_b, "e": cal.gamma_e, "w": cal.gamma_w}
    cycles = []
    for a in AGENTS:
        name = f"C_{a}"
        if name not in path:
            raise MissingVariable(f"risk sharing needs {name}")
        log_mu = np.log(funcs.crra_mu(path[name], gammas[a]))
        cycles.append(hp_filter(log_mu, hp_lambda))
    corr = np.corrcoef(np.vstack(cycles))
    return RiskSharingTable(labels=AGENTS, corr=corr)


# ---------------------------------------------------------------------------
# wedge decompositions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WedgeSeries:
    """One wedge: total series, additive components, and its normalization."""

    name: str
    scale_label: str
    total: np.ndarray
    scale: np.ndarray
    components: dict                  # label -> series; includes "residual"

    @property
    def mean_pct(self) -> float:
        """Mean of the wedge in % of the mean of the normalization series."""
        return 100.0 * float(np.mean(self.total) / np.mean(self.scale))

    @property
    def variance_pct(self) -> float:
        sv = float(np.var(self.scale))
        if sv == 0.0:
            return float("nan")
        return 100.0 * float(np.var(self.total)) / sv

    @property
    def mean_shares(self) -> dict:
        tot = float(np.mean(self.total))
        return {k: 100.0 * float(np.mean(v)) / tot
                for k, v in self.components.items()}

    @property
    def variance_shares(self) -> dict:
        tot = float(np.var(self.total))
        if tot == 0.0:
            return {k: float("nan") for k in self.components}
        return {k: 100.0 * float(np.var(v)) / tot
                for k, v in self.components.items()}


@dataclass(frozen=True)
class WedgeDecomposition:
    variant_tag: str
    sticky: bool
    wedges: dict                      # "deposit"/"loan"/"labor"/"capital"

    def summary_rows(self) -> list:
        """Flat rows (wedge, component, mean %, variance %) for table export."""
        rows = []
        for name, ws in self.wedges.items():
            rows.append({"wedge": name, "component": "total",
                         "scale": ws.scale_label,
                         "mean_pct": ws.mean_pct,
                         "variance_pct": ws.variance_pct})
            ms, vs = ws.mean_shares, ws.variance_shares
            for comp in ws.components:
                rows.append({"wedge": name, "component": comp,
                             "scale": "share of wedge",
                             "mean_pct": ms[comp], "variance_pct": vs[comp]})
        return rows


def _planner_frame(path, required: tuple) -> tuple:
    """(cur, lag, lead) accessors over t = 1..T-1 with exact lags.

    ``lead`` returns the solver's stored one-step anticipation, which is the
    certainty-equivalent conditional expectation of the piecewise-linear
    engine; products of anticipated values stand in for expectations of
    products at the same order of accuracy.
    """
    if isinstance(path, SteadyState):
        row = path.values[None, :]
        path = SimPath(path.names, np.repeat(row, 2, axis=0),
                       meta={"variant_tag": path.variant_tag},
                       expected=np.repeat(row, 2, axis=0))
    missing = [nm for nm in required if nm not in path]
    if missing:
        raise VariantMismatch(
            f"path for {path.meta.get('variant_tag', '?')} lacks {missing}")
    if path.expected is None:
        raise MissingVariable(
            "wedge evaluation needs stored one-step forecasts; "
            "simulate with the piecewise engine")

    def cur(nm):
        return path[nm][1:]

    def lag(nm):
        return path[nm][:-1]

    def lead(nm):
        return path.expected_lead(nm)[1:]

    return path, cur, lag, lead


def wedge_series(path, cal: Calibration, weights: ParetoWeights,
                 pol: PolicyRule | None = None) -> WedgeDecomposition:
    """Additive decomposition of the four planner-vs-market wedges.

    The total of each wedge is the residual of the corresponding private
    optimality condition (deposit Euler, loan Euler, labor demand, capital
    Euler) evaluated along the planner's path, normalized per Table-style
    reporting.  The named components follow the analytical split; whatever
    the stated components do not capture (the terms with no closed form)
    lands in an explicit "residual" entry, so mean shares add to 100% by
    construction.
    """
    tag = (path.variant_tag if isinstance(path, SteadyState)
           else path.meta.get("variant_tag", "?"))
    if tag in FLEX_PLANNER_TAGS:
        sticky = False
    elif tag in STICKY_PLANNER_TAGS:
        sticky = True
    else:
        raise VariantMismatch(
            f"wedge decomposition requires a planner path; got {tag!r}")
    pol = pol or PolicyRule()
    base = ("C_b", "C_e", "C_w", "N", "W", "R", "R_L", "Q", "K", "I",
            "A", "xi", "lam_Y", "lam_C", "lam_e")
    extra = ("P_w", "p_reset", "Pi", "Delta", "lam_Om") if sticky else ()
    path, cur, lag, lead = _planner_frame(path, base + extra)

    om_b, om_e, om_w = weights.omega_b, weights.omega_e, weights.omega_w
    beta, beta_b, beta_e = cal.beta, cal.beta_b, cal.beta_e

    ub_a = funcs.crra_mu(lead("C_b"), cal.gamma_b)       # E_t U^b_{C,t+1}
    ue = funcs.crra_mu(cur("C_e"), cal.gamma_e)
    ue_a = funcs.crra_mu(lead("C_e"), cal.gamma_e)
    ub = funcs.crra_mu(cur("C_b"), cal.gamma_b)
    uw = funcs.crra_mu(cur("C_w"), cal.gamma_w)

    R, R_L_a = cur("R"), lead("R_L")
    Q, Q_a, xi_a = cur("Q"), lead("Q"), lead("xi")
    K, K_lag, K_a = cur("K"), lag("K"), lead("K")
    xi, A, N = cur("xi"), cur("A"), cur("N")
    lam_Y, lam_Y_a = cur("lam_Y"), lead("lam_Y")
    lam_C, lam_C_a = cur("lam_C"), lead("lam_C")
    lam_e, lam_e_lag = cur("lam_e"), lag("lam_e")
    W = cur("W")
    k_eff = xi * K_lag
    k_eff_a = xi_a * K

    if sticky:
        P_w, P_w_a = cur("P_w"), lead("P_w")
        Delta, Delta_a = cur("Delta"), lead("Delta")
        p_tilde, p_tilde_a = cur("p_reset"), lead("p_reset")
        lam_Om, lam_Om_a = cur("lam_Om"), lead("lam_Om")
    else:
        P_w = P_w_a = Delta = Delta_a = np.ones_like(W)

    # wholesale marginal products (per effective unit); the anticipated lead
    # versions are evaluated at the anticipated states
    F_N = funcs.prod_n(k_eff, N, cal)
    F_K_a = funcs.prod_k(k_eff_a, lead("N"), cal)

    # one-period return on capital anticipated at t (matches the R_K
    # bookkeeping row of the market systems)
    rk_payoff_a = (P_w_a * lead("A") * F_K_a + Q_a * (1.0 - cal.delta)) * xi_a

    wedges = {}

    # -- deposit wedge: private margin ub = beta_b R E ub' -------------------
    total_d = ub - beta_b * R * ub_a
    comp_d = {
        "uncertain survival: bankers": (beta - beta_b) * R * ub_a,
        "consumer type heterogeneity": (lam_Y - beta * R * lam_Y_a) / om_b,
    }
    comp_d["residual"] = total_d - sum(comp_d.values())
    wedges["deposit"] = WedgeSeries("deposit", "U^b_C", total_d, ub, comp_d)

    # -- loan wedge: private margin ue = beta_e E[ue' R_L'] + lam_e E[R_L'] --
    total_l = ue - beta_e * ue_a * R_L_a - (lam_e / om_e) * R_L_a
    comp_l = {
        "survival rate differences": (beta_b - beta_e) * ue_a * R_L_a,
        "uncertain survival: bankers":
            -((beta - beta_b) / beta) * (lam_e / om_e) * R_L_a,
    }
    comp_l["residual"] = total_l - sum(comp_l.values())
    wedges["loan"] = WedgeSeries("loan", "U^e_C", total_l, ue, comp_l)

    # -- labor wedge: private margin W = P_w A F_N ---------------------------
    total_n = W - P_w * A * F_N
    denom = om_w * uw + lam_C
    w_slope = cal.phi * W / N          # wage-curve slope times N gives phi*W
    if sticky:
        het = ((om_e * ue / (P_w * Delta) - om_w * uw - lam_C)
               * P_w * A * F_N) / denom
        nominal = (((lam_Om * (cal.epsilon - 1.0) / cal.epsilon * p_tilde
                     - lam_C) / (P_w * Delta)) * P_w * A * F_N) / denom
        comp_n = {
            "consumer type heterogeneity": het,
            "W-externality": -(lam_C * w_slope * N) / denom,
            "nominal rigidities": nominal,
        }
    else:
        comp_n = {
            "consumer type heterogeneity":
                ((om_e * ue - om_w * uw - lam_C) * A * F_N) / denom,
            "W-externality": -(lam_C * w_slope * N) / denom,
        }
    comp_n["residual"] = total_n - sum(comp_n.values())
    wedges["labor"] = WedgeSeries("labor", "W", total_n, W, comp_n)

    # -- capital wedge: private margin ue Q = beta_e E[ue' payoff'] + ... ----
    total_k = (ue * Q - beta_e * ue_a * rk_payoff_a
               - (lam_e / om_e) * pol.m_bar * Q_a * xi_a)
    # price partials of the internalized capital-supply block
    _, q1_lead, _, _, _ = funcs.q_partials(K, K_a, xi_a, cal)
    _, _, q2_cur, _, _ = funcs.q_partials(K_lag, K, xi, cal)
    x_a = funcs.investment_rate(K, K_a, xi_a, cal)
    producer_profit_a = Q_a * funcs.phi_of(x_a, cal) - x_a
    comp_k = {
        "uncertain survival: entrepreneurs": (beta - beta_e) * ue_a * rk_payoff_a,
        "Phi-externality": beta * lam_Y_a * producer_profit_a / om_e,
        "Q-externality": (
            -lam_C * q2_cur * (K - (1.0 - cal.delta) * k_eff)
            - beta * lam_C_a * q1_lead * (K_a - (1.0 - cal.delta) * k_eff_a)
            + lam_e * pol.m_bar * q1_lead * xi_a * K
            + lam_e_lag * pol.m_bar * q2_cur * xi * K_lag / beta
        ) / om_e,
    }
    if sticky:
        comp_k["nominal rigidities"] = beta * (
            om_e * ue_a * (1.0 - P_w_a * Delta_a)
            + lam_Om_a * (cal.epsilon - 1.0) / cal.epsilon * p_tilde_a
            - lam_C_a
        ) * lead("A") / Delta_a * F_K_a * xi_a / om_e
    comp_k["residual"] = total_k - sum(comp_k.values())
    wedges["capital"] = WedgeSeries("capital", "U^e_C Q", total_k, ue * Q, comp_k)

    return WedgeDecomposition(variant_tag=tag, sticky=sticky, wedges=wedges)


# ---------------------------------------------------------------------------
# loan distributions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LoanHistogram:
    variant_tag: str
    edges: np.ndarray
    counts: np.ndarray
    mean: float
    variance: float


def loan_distribution(paths: dict, bins: int = 60,
                      variable: str = "L") -> dict:
    """Histograms of a series on common bin edges across variants."""
    series = {}
    for tag, path in paths.items():
        if variable not in path:
            raise MissingVariable(f"{tag}: path lacks {variable!r}")
        series[tag] = np.asarray(path[variable], float)
    lo = min(s.min() for s in series.values())
    hi = max(s.max() for s in series.values())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, bins + 1)
    out = {}
    for tag, s in series.items():
        counts, _ = np.histogram(s, bins=edges)
        out[tag] = LoanHistogram(variant_tag=tag, edges=edges, counts=counts,
                                 mean=float(np.mean(s)),
                                 variance=float(np.var(s)))
    return out


# ---------------------------------------------------------------------------
# crisis detection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CrisisCatalog:
    kind: str
    constraint: str
    starts: np.ndarray                # indices t where the pattern begins
    pre_slack: int
    bind_length: int
    periods: int                      # length of the inspected map

    @property
    def count(self) -> int:
        return int(self.starts.size)

    @property
    def frequency_per_century(self) -> float:
        return self.count / (self.periods / 400.0)


def detect_crises(regimes: RegimeMap, kind: str) -> CrisisCatalog:
    """Starts t with the constraint slack on [t-pre, t-1], binding on
    [t, t+k-1]; every qualifying start is counted independently."""
    if kind not in CRISIS_PATTERNS:
        raise MissingVariable(
            f"unknown crisis kind {kind!r}; expected {tuple(CRISIS_PATTERNS)}")
    label, pre, k = CRISIS_PATTERNS[kind]
    if label not in regimes.labels:
        raise MissingVariable(
            f"regime map has no {label!r} constraint (columns: {regimes.labels})")
    b = regimes[label]
    T = b.shape[0]
    starts = []
    if T >= pre + k:
        binding = b.astype(np.int8)
        # rolling all-slack over the pre window ending at t-1 and all-binding
        # over the k window starting at t, via cumulative sums
        c = np.concatenate([[0], np.cumsum(binding)])
        t = np.arange(pre, T - k + 1)
        slack_before = (c[t] - c[t - pre]) == 0
        binding_after = (c[t + k] - c[t]) == k
        starts = t[slack_before & binding_after]
    return CrisisCatalog(kind=kind, constraint=label,
                         starts=np.asarray(starts, dtype=int),
                         pre_slack=pre, bind_length=k, periods=T)


# ---------------------------------------------------------------------------
# event studies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EventStudy:
    window: tuple                     # (pre, post)
    starts_used: np.ndarray
    n_events: int
    n_dropped: int
    panels: dict                      # tag -> {variable -> averaged levels}

    @property
    def rel_time(self) -> np.ndarray:
        return np.arange(-self.window[0], self.window[1] + 1)


def _derived_panels(path: SimPath) -> dict:
    """Extra per-period series used by the crisis figures, where available."""
    out = {}

    def have(*names):
        return all(nm in path for nm in names)

    if have("R_L", "L", "Q", "xi", "K") and path.expected is not None:
        exp_repay = path.expected_lead("R_L") * path["L"]
        exp_collateral = (path.expected_lead("Q") * path.expected_lead("xi")
                          * path["K"])
        out["ltv"] = exp_repay / exp_collateral
    if have("L", "D"):
        with np.errstate(divide="ignore", invalid="ignore"):
            out["capital_ratio"] = (path["L"] - path["D"]) / path["L"]
    if "Pi" in path:
        out["pi_annualized"] = 400.0 * np.log(path["Pi"])
    if "R_N" in path:
        out["policy_rate_annualized"] = 400.0 * np.log(path["R_N"])
    if "lam_e" in path:
        out["lam_e"] = np.asarray(path["lam_e"], float)
    return out


def event_study(paths: dict, catalog: CrisisCatalog,
                window: tuple = (8, 12), variables=None) -> EventStudy:
    """Average each variable over the catalog's crisis windows, per variant.

    All paths must come from the same shock panel so that the event dates
    identified in the decentralized run line up across variants.  Episodes
    whose window would leave the sample are dropped and counted.
    """
    pre, post = int(window[0]), int(window[1])
    if pre < 0 or post < 0:
        raise WindowOutOfRange(f"window lengths must be nonnegative: {window}")
    lengths = {tag: len(p) for tag, p in paths.items()}
    if len(set(lengths.values())) > 1:
        raise DimensionMismatch(f"paths have unequal lengths: {lengths}")
    ref_shocks = None
    for tag, p in paths.items():
        if p.shocks is None:
            continue
        if ref_shocks is None:
            ref_shocks = p.shocks.eps
        elif not np.array_equal(ref_shocks, p.shocks.eps):
            raise VariantMismatch(
                "event study requires a common shock panel across variants")
    T = next(iter(lengths.values())) if lengths else 0
    keep = catalog.starts[(catalog.starts >= pre)
                          & (catalog.starts + post < T)]
    n_dropped = catalog.count - keep.size
    if keep.size == 0:
        raise WindowOutOfRange(
            f"no complete ({pre},{post}) windows inside {T} periods "
            f"({catalog.count} candidate events, {n_dropped} at the edges)")
    offsets = np.arange(-pre, post + 1)
    idx = keep[:, None] + offsets[None, :]
    panels = {}
    for tag, path in paths.items():
        columns = {nm: np.asarray(path[nm], float) for nm in path.names}
        columns.update(_derived_panels(path))
        wanted = variables if variables is not None else columns.keys()
        panel = {}
        for nm in wanted:
            if nm not in columns:
                continue
            panel[nm] = columns[nm][idx].mean(axis=0)
        panels[tag] = panel
    return EventStudy(window=(pre, post), starts_used=keep,
                      n_events=int(keep.size), n_dropped=int(n_dropped),
                      panels=panels)


def log_deviation_panel(study: EventStudy, tag: str, variable: str,
                        reference: float) -> np.ndarray:
    """Averaged panel as log deviations x100 from a reference level."""
    if reference <= 0.0:
        raise DimensionMismatch(
            f"log deviations need a positive reference; got {reference}")
    return 100.0 * (np.log(study.panels[tag][variable]) - np.log(reference))

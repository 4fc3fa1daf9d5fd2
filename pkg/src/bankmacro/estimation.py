"""Data ingestion and two-step method-of-simulated-moments estimation.

Step 1 fits the exogenous process parameters (rho_a, rho_xi, sigma_a,
sigma_xi) on the flexible-price economy against output/investment moments;
step 2 fits the policy-rule parameters (rho_R, eta_pi, eta_y) on the
sticky-price economy against output/inflation/rate-floor moments, holding
step 1 fixed.  Simulated moments come from the piecewise-linear engine with
common random numbers: innovations are drawn once as standard normals and
rescaled inside the objective, so two evaluations at the same parameter
point are bit-identical.

The HP filter and moment kernels live in :mod:`bankmacro.moments` and are
re-exported here for convenience.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np
import pandas as pd
from scipy import optimize

from .errors import (
    BankmacroError,
    DegenerateWeight,
    DimensionMismatch,
    NonNumeric,
    OptimizerStalled,
    ParseError,
)
from .model import SHOCK_NAMES, ShockPanel, build_system
from .moments import (  # noqa: F401  (re-exported API)
    MomentItem,
    MomentSpec,
    MomentVector,
    average_moments,
    compute_moments,
    hp_filter,
    output_investment_spec,
    sticky_price_spec,
)
from .occbin import OccbinConfig, compile_regime_rules, simulate_piecewise
from .params import Calibration, ParetoWeights, PolicyRule, Variant
from .steady_state import steady_state_for

# ---------------------------------------------------------------------------
# data ingestion
# ---------------------------------------------------------------------------

#: canonical mapping from the bundled fixture's raw columns to model names;
#: output is consumption plus investment, matching the model's resource side
FIXTURE_COLUMN_MAP = {
    "Y": "consumption + investment",
    "I": "investment",
    "Pi": "inflation",
    "R_N": "nominal_rate",
}


@dataclass(frozen=True)
class DataPanel:
    """Named empirical series (columns of a CSV plus derived expressions)."""

    names: tuple
    values: np.ndarray  # T x k
    dates: tuple = ()

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[1] != len(self.names):
            raise DimensionMismatch(
                f"panel array {self.values.shape} does not match {len(self.names)} names")

    def __len__(self):
        return self.values.shape[0]

    def __contains__(self, name):
        return name in self.names

    def __getitem__(self, name):
        return self.values[:, self.names.index(name)]


_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
}


def _eval_column_expr(text: str, columns: dict) -> np.ndarray:
    """Evaluate a column expression (names, numbers, + - * /, parentheses)."""
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"bad column expression {text!r}: {exc}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
            val = ev(node.operand)
            return val if isinstance(node.op, ast.UAdd) else -val
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id not in columns:
                raise ParseError(
                    f"column expression {text!r} references unknown column {node.id!r}")
            return columns[node.id]
        raise ParseError(f"unsupported syntax in column expression {text!r}")

    return ev(tree)


def load_series(path, column_map: dict | None = None,
                date_column: str = "date") -> DataPanel:
    """Load a CSV of dated series, with optional derived columns.

    ``column_map`` maps new names to expressions over the raw columns, e.g.
    ``{"Y": "consumption + investment"}``.  Raw columns are kept alongside
    the derived ones.
    """
    try:
        frame = pd.read_csv(path)
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as exc:
        raise ParseError(f"cannot parse {path}: {exc}") from None
    if frame.shape[0] == 0:
        raise ParseError(f"{path}: no data rows")
    if date_column not in frame.columns:
        raise ParseError(f"{path}: missing date column {date_column!r}")
    dates = tuple(str(d) for d in frame[date_column])
    raw = {}
    for col in frame.columns:
        if col == date_column:
            continue
        series = pd.to_numeric(frame[col], errors="coerce").to_numpy(dtype=float)
        bad = np.flatnonzero(~np.isfinite(series))
        if bad.size:
            raise NonNumeric(
                f"{path}: column {col!r} has a non-numeric entry at row {bad[0]}")
        raw[col] = series
    names = list(raw)
    values = [raw[c] for c in names]
    for new, expr in (column_map or {}).items():
        if new in raw:
            raise ParseError(f"derived column {new!r} collides with a raw column")
        derived = _eval_column_expr(expr, raw)
        derived = np.broadcast_to(np.asarray(derived, dtype=float), (len(dates),))
        names.append(new)
        values.append(derived)
    return DataPanel(names=tuple(names), values=np.column_stack(values), dates=dates)


def load_fixture() -> DataPanel:
    """Bundled quarterly panel whose moments reproduce the estimation targets."""
    ref = resources.files("bankmacro").joinpath("data/quarterly_panel.csv")
    with resources.as_file(ref) as path:
        return load_series(path, FIXTURE_COLUMN_MAP)


# ---------------------------------------------------------------------------
# MSM problem definition
# ---------------------------------------------------------------------------

STEP1_PARAMS = ("rho_a", "rho_xi", "sigma_a", "sigma_xi")
STEP1_BOUNDS = ((0.0, 0.99), (0.0, 0.99), (0.0001, 0.02), (0.0001, 0.02))
STEP2_PARAMS = ("rho_R", "eta_pi", "eta_y")
STEP2_BOUNDS = ((0.0, 0.99), (1.01, 5.0), (0.0, 5.0))


def step2_target_spec(r_lower: float) -> MomentSpec:
    """Step-2 targets: output and inflation persistence/volatility, their
    comovement, and the frequency of the policy-rate floor."""
    return MomentSpec([
        MomentItem("autocorr1", ("Y",)),
        MomentItem("sd", ("Y",)),
        MomentItem("autocorr1", ("Pi",)),
        MomentItem("sd", ("Pi",)),
        MomentItem("corr", ("Pi", "Y")),
        MomentItem("prob-at-bound", ("R_N",), transform="level", bound=r_lower),
    ])


@dataclass
class MsmProblem:
    """One estimation step: parameters, box bounds, targets, simulation set-up."""

    step: int
    targets: MomentVector
    cal: Calibration
    pol: PolicyRule
    weights: ParetoWeights = field(default_factory=ParetoWeights)
    T: int = 50_000
    burn_in: int = 1_000
    seed: int = 0
    n_starts: int = 8
    max_evals_per_start: int = 200
    xatol: float = 1e-4
    fatol: float = 1e-8
    occbin: OccbinConfig = field(default_factory=OccbinConfig)

    def __post_init__(self):
        if self.step not in (1, 2):
            raise DimensionMismatch(f"step must be 1 or 2, got {self.step}")
        if self.step == 1:
            self.param_names = STEP1_PARAMS
            self.bounds = STEP1_BOUNDS
            self.variant_tag = "FCE"
            self.spec = output_investment_spec()
        else:
            self.param_names = STEP2_PARAMS
            self.bounds = STEP2_BOUNDS
            self.variant_tag = "CE"
            self.spec = step2_target_spec(self.pol.r_lower)
        missing = [lab for lab in self.spec.labels if lab not in self.targets.labels]
        if missing:
            raise DimensionMismatch(f"targets lack required moments: {missing}")
        if self.T <= self.burn_in:
            raise DimensionMismatch("simulation length must exceed burn-in")

    def target_array(self) -> np.ndarray:
        return np.array([self.targets[lab] for lab in self.spec.labels])

    def weight_diagonal(self) -> np.ndarray:
        """W = diag(|m^d|)^{-2}, putting all moments in comparable units."""
        m_d = self.target_array()
        tiny = np.abs(m_d) < 1e-12
        if np.any(tiny):
            bad = [lab for lab, t in zip(self.spec.labels, tiny) if t]
            raise DegenerateWeight(f"zero target moment(s) {bad}: weighting rule divides by |m^d|")
        return np.abs(m_d) ** -2.0


@dataclass
class MsmResult:
    estimates: dict
    objective: float
    diagnostics: dict


def apply_estimates(problem: MsmProblem, estimates: dict):
    """Return the updated (cal, pol) pair; inputs are left untouched."""
    if problem.step == 1:
        return replace(problem.cal, **estimates), problem.pol
    return problem.cal, replace(problem.pol, **estimates)


# ---------------------------------------------------------------------------
# objective construction and optimization
# ---------------------------------------------------------------------------

_PENALTY = 1.0e6  # objective value for parameter points where simulation fails


def build_objective(problem: MsmProblem):
    """Return (objective callable, shared-state dict) for the problem.

    Common random numbers: one standard-normal innovation panel is drawn up
    front and rescaled by the candidate volatilities, so the objective is a
    deterministic function of the parameter vector.
    """
    m_d = problem.target_array()
    w = problem.weight_diagonal()
    rng = np.random.default_rng(problem.seed)
    z = rng.standard_normal((problem.T, len(SHOCK_NAMES)))
    variant = Variant(problem.variant_tag)
    # the deterministic steady state does not involve the shock process or
    # the policy-rule feedback coefficients, so it is shared across evaluations
    ss = steady_state_for(variant, problem.cal, pol=problem.pol,
                          weights=problem.weights)
    state = {"n_evals": 0, "n_failed": 0, "labels": problem.spec.labels,
             "weight_diagonal": w.tolist()}

    def objective(theta: np.ndarray) -> float:
        theta = np.asarray(theta, dtype=float)
        state["n_evals"] += 1
        params = dict(zip(problem.param_names, theta))
        if problem.step == 1:
            cal, pol = replace(problem.cal, **params), problem.pol
        else:
            cal, pol = problem.cal, replace(problem.pol, **params)
        try:
            sys = build_system(variant, cal, pol=pol, weights=problem.weights)
            compiler = compile_regime_rules(sys, ss)
            eps = z * np.array([cal.sigma_a, cal.sigma_xi])
            panel = ShockPanel(eps=eps)
            path, _ = simulate_piecewise(sys, panel, cfg=problem.occbin,
                                         compiler=compiler,
                                         burn_in=problem.burn_in)
            mv = compute_moments(path, problem.spec)
        except BankmacroError:
            state["n_failed"] += 1
            return _PENALTY
        h = mv.values - m_d
        return float(h @ (w * h))

    return objective, state


def _start_points(problem: MsmProblem) -> np.ndarray:
    """Deterministic multistart locations: box midpoint plus scrambled draws."""
    lo = np.array([b[0] for b in problem.bounds])
    hi = np.array([b[1] for b in problem.bounds])
    rng = np.random.default_rng(problem.seed + 1)
    pts = [0.5 * (lo + hi)]
    for _ in range(problem.n_starts - 1):
        pts.append(lo + (hi - lo) * rng.uniform(0.1, 0.9, size=lo.size))
    return np.array(pts[: problem.n_starts])


def msm_estimate(problem: MsmProblem, x0: np.ndarray | None = None) -> MsmResult:
    """Minimize the weighted moment distance over the parameter box.

    Derivative-free simplex searches from ``n_starts`` deterministic start
    points (or from the single supplied ``x0``); the best converged point
    wins.  Raises OptimizerStalled when no start produces a finite,
    non-penalty objective.
    """
    objective, state = build_objective(problem)
    starts = np.asarray([x0], dtype=float) if x0 is not None else _start_points(problem)
    trace = []
    best = None
    for i, start in enumerate(starts):
        res = optimize.minimize(
            objective, start, method="Nelder-Mead", bounds=problem.bounds,
            options={"xatol": problem.xatol, "fatol": problem.fatol,
                     "maxfev": problem.max_evals_per_start, "adaptive": True})
        trace.append({
            "start": start.tolist(), "x": res.x.tolist(), "fun": float(res.fun),
            "nfev": int(res.nfev), "converged": bool(res.success),
        })
        if np.isfinite(res.fun) and res.fun < _PENALTY and \
                (best is None or res.fun < best.fun):
            best = res
    if best is None:
        raise OptimizerStalled(
            f"step {problem.step}: no start produced a usable objective "
            f"({state['n_failed']} failed simulations in {state['n_evals']} evaluations)")
    estimates = dict(zip(problem.param_names, (float(v) for v in best.x)))
    diagnostics = dict(state)
    diagnostics.update({
        "starts": trace,
        "targets": {lab: float(v) for lab, v in
                    zip(problem.spec.labels, problem.target_array())},
        "T": problem.T, "burn_in": problem.burn_in, "seed": problem.seed,
    })
    return MsmResult(estimates=estimates, objective=float(best.fun),
                     diagnostics=diagnostics)

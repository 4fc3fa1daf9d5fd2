"""Core model representation: variable registry, regime constraints, systems.

Every model variant compiles to an :class:`EquationSystem`: a square residual
function over (lag, current, lead) slots of a named variable registry plus the
two shock innovations, with M regime-switching rows.  Expectations are
represented by the lead slot (perfect-foresight stencil); stochastic
expectation handling lives in the perturbation and piecewise-simulation
modules.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, IncompatiblePolicy, MissingVariable
from .params import Calibration, ParetoWeights, PolicyRule, Variant

SHOCK_NAMES = ("eps_a", "eps_xi")


@dataclass(frozen=True)
class RegimeConstraint:
    """One occasionally binding constraint: a switching residual row.

    ``gap`` is the signed slack margin (positive = slack) and ``mult`` the
    quantity that must be nonnegative for a *binding* guess to be admissible
    (the multiplier for complementary-slackness pairs; the bound-minus-shadow
    margin for the policy-rate floor).  Both accept current/lead slices that
    may be 1-D vectors or (T, n) path arrays.
    """

    name: str
    gap: Callable[[np.ndarray, np.ndarray], np.ndarray]
    mult: Callable[[np.ndarray, np.ndarray], np.ndarray]


class ShockPanel:
    """A T x 2 matrix of innovations (eps_a, eps_xi) with seed metadata."""

    def __init__(self, eps: np.ndarray, seed: int | None = None):
        eps = np.asarray(eps, dtype=float)
        if eps.ndim != 2 or eps.shape[1] != len(SHOCK_NAMES):
            raise DimensionMismatch(f"shock panel must be T x {len(SHOCK_NAMES)}")
        if not np.all(np.isfinite(eps)):
            raise DimensionMismatch("shock panel contains non-finite entries")
        self.eps = eps
        self.seed = seed

    @classmethod
    def draw(cls, T: int, cal: Calibration, seed: int) -> "ShockPanel":
        rng = np.random.default_rng(seed)
        eps = rng.standard_normal((T, 2))
        eps[:, 0] *= cal.sigma_a
        eps[:, 1] *= cal.sigma_xi
        return cls(eps, seed=seed)

    def __len__(self):
        return self.eps.shape[0]


class SimPath:
    """Simulated level paths for a variable registry (T x n)."""

    def __init__(self, names: Sequence[str], values: np.ndarray,
                 shocks: ShockPanel | None = None, meta: dict | None = None,
                 expected: np.ndarray | None = None):
        values = np.asarray(values, dtype=float)
        if values.ndim != 2 or values.shape[1] != len(names):
            raise DimensionMismatch(
                f"path array {values.shape} does not match {len(names)} names")
        if expected is not None:
            expected = np.asarray(expected, dtype=float)
            if expected.shape != values.shape:
                raise DimensionMismatch(
                    f"expected-lead array {expected.shape} does not match path {values.shape}")
        self.names = tuple(names)
        self.values = values
        self.shocks = shocks
        self.meta = dict(meta or {})
        # expected[t] holds the date-t anticipation of the date-t+1 levels
        # (the solver's own one-step forecast), when the simulator provides it
        self.expected = expected
        self._ix = {n: i for i, n in enumerate(self.names)}

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.values[:, self._ix[name]]

    def __contains__(self, name: str) -> bool:
        return name in self._ix

    def expected_lead(self, name: str) -> np.ndarray:
        """One-step-ahead anticipated levels of ``name`` (E_t of date t+1)."""
        if self.expected is None:
            raise MissingVariable(
                "path carries no stored one-step forecasts; "
                "resimulate with a forecast-storing engine")
        return self.expected[:, self._ix[name]]


class EquationSystem:
    """Base class for all variant systems (square residual representations)."""

    def __init__(
        self,
        variant: Variant,
        cal: Calibration,
        pol: PolicyRule | None,
        weights: ParetoWeights | None,
    ):
        self.variant = variant
        self.cal = variant.effective_calibration(cal)
        self.pol = pol
        self.weights = weights
        self.names: tuple[str, ...] = tuple(self._build_names())
        self.ix = {name: i for i, name in enumerate(self.names)}
        if len(self.ix) != len(self.names):
            raise DimensionMismatch("registry contains duplicate names")
        self.n = len(self.names)
        self.constraints: tuple[RegimeConstraint, ...] = tuple(self._build_constraints())
        self.m = len(self.constraints)
        self.ss_ref = None  # attached by the steady-state module

    # -- subclass interface -------------------------------------------------
    def _build_names(self) -> Sequence[str]:
        raise NotImplementedError

    def _build_constraints(self) -> Sequence[RegimeConstraint]:
        raise NotImplementedError

    def _residuals_core(self, lag, cur, lead, eps, regime) -> list:
        """Return the residual rows given *list* slots (fast local unpacking)."""
        raise NotImplementedError

    # -- public API ---------------------------------------------------------
    def residuals(self, lag, cur, lead, shocks, regime) -> np.ndarray:
        lag = np.asarray(lag, dtype=float)
        cur = np.asarray(cur, dtype=float)
        lead = np.asarray(lead, dtype=float)
        shocks = np.asarray(shocks, dtype=float)
        if lag.shape != (self.n,) or cur.shape != (self.n,) or lead.shape != (self.n,):
            raise DimensionMismatch(
                f"{self.variant.tag}: slot vectors must have length {self.n}"
            )
        if shocks.shape != (2,):
            raise DimensionMismatch("shocks must be a pair (eps_a, eps_xi)")
        regime = tuple(bool(b) for b in regime)
        if len(regime) != self.m:
            raise DimensionMismatch(f"regime must have length {self.m}")
        rows = self._residuals_core(
            lag.tolist(), cur.tolist(), lead.tolist(), shocks.tolist(), regime
        )
        out = np.asarray(rows, dtype=float)
        if out.shape != (self.n,):
            raise DimensionMismatch(
                f"{self.variant.tag}: produced {out.shape[0]} rows for {self.n} variables"
            )
        return out

    def regime_gap(self, cur, lead, constraint_id) -> float:
        """Signed slack margin of one constraint (positive = slack)."""
        c = self._constraint(constraint_id)
        return float(c.gap(np.asarray(cur, dtype=float), np.asarray(lead, dtype=float)))

    def regime_mult(self, cur, lead, constraint_id) -> float:
        c = self._constraint(constraint_id)
        return float(c.mult(np.asarray(cur, dtype=float), np.asarray(lead, dtype=float)))

    def _constraint(self, constraint_id) -> RegimeConstraint:
        if isinstance(constraint_id, str):
            for c in self.constraints:
                if c.name == constraint_id:
                    return c
            raise DimensionMismatch(f"unknown constraint {constraint_id!r}")
        return self.constraints[constraint_id]

    @property
    def constraint_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.constraints)

    def attach_steady_state(self, ss) -> None:
        self.ss_ref = ss

    # -- shared helpers for constraint closures ----------------------------
    def col(self, arr, name):
        """Column of a vector or (T, n) path array by registry name."""
        return arr[..., self.ix[name]]


def build_system(
    variant: Variant,
    cal: Calibration,
    pol: PolicyRule | None = None,
    weights: ParetoWeights | None = None,
) -> EquationSystem:
    """Compile a variant into its square residual system."""
    from . import systems

    tag = variant.tag
    eff = variant.effective_calibration(cal)
    if tag in ("FCE", "CE"):
        if pol is None:
            raise IncompatiblePolicy(f"{tag} requires a policy rule")
        eff.check_assumption1(pol.kappa_bar)
        if tag == "FCE":
            return systems.FlexibleCE(variant, cal, pol, weights)
        return systems.StickyCE(variant, cal, pol, weights)
    if weights is None:
        raise IncompatiblePolicy(f"{tag} requires Pareto weights")
    if tag == "FirstBest":
        return systems.FirstBest(variant, cal, None, weights)
    if tag == "FCEA":
        if pol is None:
            raise IncompatiblePolicy("FCEA requires a policy rule (kappa, m)")
        eff.check_assumption1(pol.kappa_bar)
        return systems.PlannerFlex(variant, cal, pol, weights)
    if tag == "FCEA_OLL":
        if pol is None:
            pol = PolicyRule()
        eff.check_assumption1(0.0)
        return systems.PlannerFlex(variant, cal, pol, weights)
    if tag == "OLL":
        eff.check_assumption1(0.0)
        return systems.PlannerOLL(variant, cal, pol or PolicyRule(), weights)
    if tag == "CEA":
        if pol is None:
            raise IncompatiblePolicy("CEA requires a policy rule (kappa, m, Taylor block)")
        eff.check_assumption1(pol.kappa_bar)
        return systems.PlannerSticky(variant, cal, pol, weights)
    if tag == "CEA_OLLMP":
        if pol is None:
            raise IncompatiblePolicy("CEA_OLLMP requires a policy rule (r_lower)")
        eff.check_assumption1(0.0)
        return systems.PlannerSticky(variant, cal, pol, weights)
    if tag == "OLLMP":
        if pol is None:
            raise IncompatiblePolicy("OLLMP requires a policy rule (r_lower)")
        eff.check_assumption1(0.0)
        return systems.PlannerOLLMP(variant, cal, pol, weights)
    raise IncompatiblePolicy(f"unhandled variant {tag!r}")

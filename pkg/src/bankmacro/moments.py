"""HP filtering and business-cycle moment computation.

Shared by the perturbation module (theoretical moments via long simulation)
and the estimation module (empirical and simulated MSM targets).  A "panel"
is anything indexable by variable name returning a 1-D float array — both
SimPath and the estimation data panel satisfy this.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import DimensionMismatch, MissingVariable, NonNumeric, SeriesTooShort

MOMENT_KINDS = ("autocorr1", "sd", "corr", "prob-at-bound")
TRANSFORMS = ("hp-log", "level")
BOUND_TOL = 1e-10


# ---------------------------------------------------------------------------
# HP filter
# ---------------------------------------------------------------------------

def hp_filter(series, lam: float = 1600.0) -> np.ndarray:
    """Cyclical component: series minus the (I + lam D'D)^{-1} trend.

    Pentadiagonal banded solve; D is the (T-2) x T second-difference matrix.
    """
    y = np.asarray(series, dtype=float)
    if y.ndim != 1:
        raise DimensionMismatch("hp_filter expects a 1-D series")
    T = y.shape[0]
    if T < 4:
        raise SeriesTooShort(f"hp_filter needs at least 4 observations, got {T}")
    if not np.all(np.isfinite(y)):
        raise NonNumeric("hp_filter input contains non-finite entries")
    main = np.full(T, 6.0)
    main[0] = main[-1] = 1.0
    main[1] = main[-2] = 5.0
    off1 = np.full(T - 1, -4.0)
    off1[0] = off1[-1] = -2.0
    off2 = np.ones(T - 2)
    ab = np.zeros((5, T))
    ab[0, 2:] = lam * off2
    ab[1, 1:] = lam * off1
    ab[2, :] = 1.0 + lam * main
    ab[3, :-1] = lam * off1
    ab[4, :-2] = lam * off2
    trend = solve_banded((2, 2), ab, y)
    return y - trend


# ---------------------------------------------------------------------------
# moment specification and results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MomentItem:
    """One requested moment: kind, variable name(s), series transform."""

    kind: str
    vars: tuple
    transform: str = "hp-log"
    bound: float | None = None  # required for prob-at-bound

    def __post_init__(self):
        if self.kind not in MOMENT_KINDS:
            raise DimensionMismatch(f"unknown moment kind {self.kind!r}")
        if self.transform not in TRANSFORMS:
            raise DimensionMismatch(f"unknown transform {self.transform!r}")
        object.__setattr__(self, "vars", tuple(self.vars))
        need = 2 if self.kind == "corr" else 1
        if len(self.vars) != need:
            raise DimensionMismatch(f"{self.kind} needs {need} variable(s)")
        if self.kind == "prob-at-bound" and self.bound is None:
            raise DimensionMismatch("prob-at-bound requires the bound value")

    @property
    def label(self) -> str:
        short = {"autocorr1": "ac1", "sd": "sd", "corr": "corr",
                 "prob-at-bound": "pr_bound"}[self.kind]
        return f"{short}({','.join(self.vars)})"


@dataclass(frozen=True)
class MomentSpec:
    """Ordered collection of moment requests."""

    items: tuple

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))

    def __len__(self):
        return len(self.items)

    @property
    def labels(self) -> tuple:
        return tuple(it.label for it in self.items)

    def variables(self) -> tuple:
        seen = []
        for it in self.items:
            for v in it.vars:
                if v not in seen:
                    seen.append(v)
        return tuple(seen)


class MomentVector:
    """Named moment values with validity checks."""

    def __init__(self, labels, values, spec: MomentSpec | None = None,
                 meta: dict | None = None):
        values = np.asarray(values, dtype=float)
        if values.shape != (len(labels),):
            raise DimensionMismatch("moment labels/values length mismatch")
        self.labels = tuple(labels)
        self.values = values
        self.spec = spec
        self.meta = dict(meta or {})
        self._ix = {lab: i for i, lab in enumerate(self.labels)}
        if spec is not None:
            for it, v in zip(spec.items, values):
                if it.kind in ("autocorr1", "corr") and abs(v) > 1.0 + 1e-12:
                    raise DimensionMismatch(f"{it.label} = {v} outside [-1, 1]")
                if it.kind == "sd" and v < 0.0:
                    raise DimensionMismatch(f"{it.label} = {v} negative")
                if it.kind == "prob-at-bound" and not (-1e-12 <= v <= 1.0 + 1e-12):
                    raise DimensionMismatch(f"{it.label} = {v} outside [0, 1]")

    def __getitem__(self, label):
        return float(self.values[self._ix[label]])

    def __contains__(self, label):
        return label in self._ix

    def __len__(self):
        return len(self.labels)

    def as_dict(self) -> dict:
        return {lab: float(v) for lab, v in zip(self.labels, self.values)}

    def __repr__(self):
        inner = ", ".join(f"{lab}={v:.4g}" for lab, v in zip(self.labels, self.values))
        return f"MomentVector({inner})"


# ---------------------------------------------------------------------------
# computation
# ---------------------------------------------------------------------------

def _get_series(panel, name: str) -> np.ndarray:
    try:
        return np.asarray(panel[name], dtype=float)
    except (KeyError, IndexError, TypeError):
        raise MissingVariable(f"panel has no series {name!r}") from None


def compute_moments(panel, spec: MomentSpec, lam: float = 1600.0) -> MomentVector:
    """Evaluate each requested moment on the panel."""
    cache: dict = {}

    def transformed(name, transform):
        key = (name, transform)
        if key not in cache:
            x = _get_series(panel, name)
            if transform == "hp-log":
                if np.any(x <= 0.0):
                    raise NonNumeric(f"series {name!r} must be positive for hp-log")
                x = hp_filter(np.log(x), lam)
            cache[key] = x
        return cache[key]

    out = np.empty(len(spec))
    for i, it in enumerate(spec.items):
        if it.kind == "autocorr1":
            x = transformed(it.vars[0], it.transform)
            out[i] = np.corrcoef(x[1:], x[:-1])[0, 1]
        elif it.kind == "sd":
            out[i] = np.std(transformed(it.vars[0], it.transform))
        elif it.kind == "corr":
            x = transformed(it.vars[0], it.transform)
            y = transformed(it.vars[1], it.transform)
            out[i] = np.corrcoef(x, y)[0, 1]
        else:  # prob-at-bound
            x = transformed(it.vars[0], it.transform)
            out[i] = np.mean(np.abs(x - it.bound) <= BOUND_TOL)
    return MomentVector(spec.labels, out, spec=spec)


def average_moments(results) -> MomentVector:
    """Elementwise mean over replications (same spec required)."""
    results = list(results)
    if not results:
        raise DimensionMismatch("average_moments needs at least one result")
    labels = results[0].labels
    for r in results[1:]:
        if r.labels != labels:
            raise DimensionMismatch("replication moment labels differ")
    vals = np.mean([r.values for r in results], axis=0)
    return MomentVector(labels, vals, spec=results[0].spec,
                        meta={"n_replications": len(results)})


# ---------------------------------------------------------------------------
# standard target sets
# ---------------------------------------------------------------------------

def output_investment_spec() -> MomentSpec:
    """AC1 and volatility of output plus investment comovement (step-1 targets)."""
    return MomentSpec((
        MomentItem("autocorr1", ("Y",)),
        MomentItem("sd", ("Y",)),
        MomentItem("sd", ("I",)),
        MomentItem("corr", ("I", "Y")),
    ))


def sticky_price_spec(r_lower: float) -> MomentSpec:
    """Step-2 targets: adds inflation dynamics and the rate-floor frequency."""
    base = output_investment_spec()
    return MomentSpec(base.items + (
        MomentItem("autocorr1", ("Pi",)),
        MomentItem("sd", ("Pi",)),
        MomentItem("corr", ("Pi", "Y")),
        MomentItem("prob-at-bound", ("R_N",), transform="level", bound=r_lower),
    ))

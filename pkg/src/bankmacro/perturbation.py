"""Local solution of an equation system around its steady state.

First order: central finite-difference Jacobians of the residual function,
then a generalized-Schur (QZ) solve of the linear rational-expectations
system in the dense form  A y_{t+1} + B y_t + C y_{t-1} + D eps_t = 0,
delivering  y_t = P y_{t-1} + Q eps_t  with Blanchard-Kahn verification.

Second order: directional second differences of the residual function
contracted with the first-order solution give the quadratic policy
coefficients; the state-state block solves a Sylvester equation via a complex
Schur decomposition of P.  Simulation uses the pruned representation, so
simulated paths carry no spurious higher-order terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla

from .errors import (
    DimensionMismatch,
    ExplosivePath,
    IndeterminateEquilibrium,
    NoStableSolution,
    SingularityDetected,
)
from .model import SHOCK_NAMES, EquationSystem, ShockPanel, SimPath
from .steady_state import SteadyState

N_SHOCKS = len(SHOCK_NAMES)


# ---------------------------------------------------------------------------
# Jacobians
# ---------------------------------------------------------------------------

@dataclass
class JacobianBlocks:
    """First-derivative blocks of the residual function at the steady state."""

    lag: np.ndarray    # n x n
    cur: np.ndarray    # n x n
    lead: np.ndarray   # n x n
    shock: np.ndarray  # n x 2
    ss: SteadyState
    regime: tuple
    cal: object = None  # calibration carried through to the decision rule

    @property
    def n(self) -> int:
        return self.cur.shape[0]


def differentiate(sys: EquationSystem, ss: SteadyState, step: float = 1e-6,
                  regime: tuple | None = None) -> JacobianBlocks:
    """Central finite-difference Jacobian blocks at lag = cur = lead = ss.

    ``regime`` overrides the steady-state assignment (used by the piecewise
    engine to linearize non-reference branches around the same point).
    """
    sys.attach_steady_state(ss)
    base = ss.values
    zero_eps = np.zeros(N_SHOCKS)
    regime = ss.regime if regime is None else tuple(bool(b) for b in regime)
    n = sys.n

    def evaluate(lag, cur, lead, eps):
        return sys.residuals(lag, cur, lead, eps, regime)

    blocks = {}
    for slot in ("lag", "cur", "lead"):
        J = np.empty((n, n))
        for j in range(n):
            h = step * max(1.0, abs(base[j]))
            dv = np.zeros(n)
            dv[j] = h
            args_p = {k: base.copy() for k in ("lag", "cur", "lead")}
            args_m = {k: base.copy() for k in ("lag", "cur", "lead")}
            args_p[slot] = base + dv
            args_m[slot] = base - dv
            J[:, j] = (
                evaluate(args_p["lag"], args_p["cur"], args_p["lead"], zero_eps)
                - evaluate(args_m["lag"], args_m["cur"], args_m["lead"], zero_eps)
            ) / (2.0 * h)
        blocks[slot] = J
    D = np.empty((n, N_SHOCKS))
    for j in range(N_SHOCKS):
        h = step
        dv = np.zeros(N_SHOCKS)
        dv[j] = h
        D[:, j] = (evaluate(base, base, base, dv) - evaluate(base, base, base, -dv)) / (2.0 * h)
    jac = JacobianBlocks(lag=blocks["lag"], cur=blocks["cur"], lead=blocks["lead"],
                         shock=D, ss=ss, regime=regime,
                         cal=getattr(sys, "cal", None))
    dead = np.all(np.abs(jac.lag) < 1e-14, axis=0) \
        & np.all(np.abs(jac.cur) < 1e-14, axis=0) \
        & np.all(np.abs(jac.lead) < 1e-14, axis=0)
    if np.any(dead):
        names = [sys.names[j] for j in np.nonzero(dead)[0]]
        raise SingularityDetected(f"registry variables never enter any residual: {names}")
    return jac


# ---------------------------------------------------------------------------
# first order
# ---------------------------------------------------------------------------

def _refine_transition(A: np.ndarray, B: np.ndarray, C: np.ndarray,
                       P: np.ndarray, iters: int = 2) -> np.ndarray:
    """Newton polish of A P^2 + B P + C = 0 via Sylvester corrections."""
    for _ in range(iters):
        R = A @ P @ P + B @ P + C
        if np.max(np.abs(R)) < 1e-14:
            break
        T, U = sla.schur(P.astype(complex), output="complex")
        M1c = (A @ P + B).astype(complex)
        Ac = A.astype(complex)
        S = (-R).astype(complex) @ U
        Y = np.zeros_like(S)
        for j in range(P.shape[0]):
            rhs = S[:, j] - (Ac @ (Y[:, :j] @ T[:j, j]) if j else 0.0)
            Y[:, j] = np.linalg.solve(M1c + T[j, j] * Ac, rhs)
        P = P + np.real(Y @ U.conj().T)
    return P


@dataclass
class DecisionRule:
    """Perturbation policy y_t - ss = P (y_{t-1} - ss) + Q eps_t (+ quadratic)."""

    order: int
    names: tuple
    ss: SteadyState
    P: np.ndarray
    Q: np.ndarray
    eigenvalues: np.ndarray
    # second-order pieces (pruned representation); None at order 1
    Gxx: np.ndarray | None = None     # n x n^2, contraction of x (x) x
    Gxu: np.ndarray | None = None     # n x (n*2)
    Guu: np.ndarray | None = None     # n x 4
    risk_constant: np.ndarray | None = None  # n, the sigma^2 policy constant
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.P.shape[0]


def solve_first_order(jac: JacobianBlocks, bk_tol: float = 1e-7) -> DecisionRule:
    """QZ solve of A y+ + B y + C y- + D eps = 0 for the stable rule."""
    A, B, C, D = jac.lead, jac.cur, jac.lag, jac.shock
    n = jac.n
    # row equilibration: identical equations, unit row magnitude
    row_scale = np.maximum.reduce([
        np.max(np.abs(A), axis=1), np.max(np.abs(B), axis=1),
        np.max(np.abs(C), axis=1), np.max(np.abs(D), axis=1),
    ])
    row_scale[row_scale == 0.0] = 1.0
    A = A / row_scale[:, None]
    B = B / row_scale[:, None]
    C = C / row_scale[:, None]
    D = D / row_scale[:, None]
    # pencil for x_t = [y_{t-1}; y_t]:  G x_{t+1} = F x_t
    G = np.zeros((2 * n, 2 * n))
    G[:n, :n] = np.eye(n)
    G[n:, n:] = A
    F = np.zeros((2 * n, 2 * n))
    F[:n, n:] = np.eye(n)
    F[n:, :n] = -C
    F[n:, n:] = -B

    def inside(alpha, beta):
        return np.abs(alpha) < (1.0 + bk_tol) * np.abs(beta)

    _, _, alpha, beta, _, Z = sla.ordqz(F, G, sort=inside, output="complex")
    with np.errstate(divide="ignore", invalid="ignore"):
        eigs = np.where(np.abs(beta) > 0.0, np.abs(alpha / np.where(beta == 0, 1.0, beta)),
                        np.inf)
    n_stable = int(np.sum(inside(alpha, beta)))
    if n_stable > n:
        raise IndeterminateEquilibrium(
            f"{n_stable} stable generalized eigenvalues for {n} states")
    if n_stable < n:
        raise NoStableSolution(
            f"only {n_stable} stable generalized eigenvalues for {n} states")
    Z11 = Z[:n, :n]
    Z21 = Z[n:, :n]
    if np.linalg.cond(Z11) > 1e12:
        raise NoStableSolution("stable subspace is not a graph over the lagged state")
    P = np.real(Z21 @ np.linalg.inv(Z11))
    P = _refine_transition(A, B, C, P)
    M1 = A @ P + B
    try:
        Q = -np.linalg.solve(M1, D)
    except np.linalg.LinAlgError as exc:
        raise SingularityDetected(f"impact matrix solve failed: {exc}") from exc
    resid = A @ P @ P + B @ P + C
    return DecisionRule(order=1, names=jac.ss.names, ss=jac.ss, P=P, Q=Q,
                        eigenvalues=np.sort(eigs),
                        meta={"quadratic_residual": float(np.max(np.abs(resid))),
                              "n_stable": n_stable, "cal": jac.cal})


# ---------------------------------------------------------------------------
# second order
# ---------------------------------------------------------------------------

def _hessian_bilinear(sys: EquationSystem, ss: SteadyState, step: float = 1e-4):
    """Return a function computing Hess_f[d1, d2] by 4-point differences.

    Directions are (lag, cur, lead, shock) tuples; each is scaled per variable
    so the effective step stays relative to the steady-state magnitude.
    """
    base = ss.values
    regime = ss.regime
    scale = np.maximum(1.0, np.abs(base))
    shock_scale = np.ones(N_SHOCKS)

    def scaled(direction):
        lag, cur, lead, shock = direction
        mag = max(
            np.max(np.abs(lag / scale)) if np.any(lag) else 0.0,
            np.max(np.abs(cur / scale)) if np.any(cur) else 0.0,
            np.max(np.abs(lead / scale)) if np.any(lead) else 0.0,
            np.max(np.abs(shock / shock_scale)) if np.any(shock) else 0.0,
        )
        if mag == 0.0:
            return direction, 0.0
        return (lag / mag, cur / mag, lead / mag, shock / mag), mag

    def evaluate(lag, cur, lead, eps):
        return sys.residuals(lag, cur, lead, eps, regime)

    def bilinear(d1, d2):
        (l1, c1, f1, s1), m1 = scaled(d1)
        (l2, c2, f2, s2), m2 = scaled(d2)
        if m1 == 0.0 or m2 == 0.0:
            return np.zeros(len(base))
        h = step
        out = np.zeros(len(base))
        for a in (1.0, -1.0):
            for b in (1.0, -1.0):
                lag = base + a * h * l1 + b * h * l2
                cur = base + a * h * c1 + b * h * c2
                lead = base + a * h * f1 + b * h * f2
                eps = a * h * s1 + b * h * s2
                out += a * b * evaluate(lag, cur, lead, eps)
        return out / (4.0 * h * h) * (m1 * m2)

    return bilinear


def _solve_sylvester_xx(M1: np.ndarray, A: np.ndarray, P: np.ndarray,
                        H: np.ndarray) -> np.ndarray:
    """Solve M1 X + A X (P kron P) = -H columnwise via complex Schur of P."""
    n = P.shape[0]
    T, U = sla.schur(P.astype(complex), output="complex")
    Uh = U.conj().T
    R = (-H).astype(complex)
    # R tilde = R (U kron U), computed through the 3-D view
    R3 = R.reshape(n, n, n)
    Rt = np.einsum("akl,ki,lj->aij", R3, U, U, optimize=True)
    Y = np.zeros((n, n, n), dtype=complex)
    M1c = M1.astype(complex)
    Ac = A.astype(complex)
    for i in range(n):
        for j in range(n):
            if i == 0 and j == 0:
                partial = np.zeros(n, dtype=complex)
            else:
                partial = np.einsum(
                    "akl,k,l->a", Y[:, : i + 1, : j + 1], T[: i + 1, i], T[: j + 1, j],
                    optimize=True,
                ) - Y[:, i, j] * T[i, i] * T[j, j]
            rhs = Rt[:, i, j] - Ac @ partial
            Y[:, i, j] = np.linalg.solve(M1c + T[i, i] * T[j, j] * Ac, rhs)
    X3 = np.einsum("akl,ki,lj->aij", Y, Uh, Uh, optimize=True)
    X = X3.reshape(n, n * n)
    if np.max(np.abs(X.imag)) > 1e-8 * max(1.0, np.max(np.abs(X.real))):
        raise NoStableSolution("state-state quadratic block is not real")
    return X.real


def solve_second_order(
    sys: EquationSystem,
    ss: SteadyState,
    jac: JacobianBlocks | None = None,
    first_order: DecisionRule | None = None,
    hess_step: float = 1e-4,
    shock_cov: np.ndarray | None = None,
) -> DecisionRule:
    """Pruned second-order rule on top of the first-order solution."""
    jac = jac if jac is not None else differentiate(sys, ss)
    rule1 = first_order if first_order is not None else solve_first_order(jac)
    n = jac.n
    P, Q = rule1.P, rule1.Q
    A, B = jac.lead, jac.cur
    M1 = A @ P + B
    bilinear = _hessian_bilinear(sys, ss, step=hess_step)
    if shock_cov is None:
        shock_cov = np.diag([sys.cal.sigma_a**2, sys.cal.sigma_xi**2])

    P2 = P @ P
    zero_s = np.zeros(N_SHOCKS)
    zero_n = np.zeros(n)

    def state_dir(v):
        return (v, P @ v, P2 @ v, zero_s)

    def shock_dir(j):
        eta = np.zeros(N_SHOCKS)
        eta[j] = 1.0
        qj = Q[:, j]
        return (zero_n, qj, P @ qj, eta)

    def lead_dir(j):
        return (zero_n, zero_n, Q[:, j], zero_s)

    eye = np.eye(n)
    state_dirs = [state_dir(eye[:, i]) for i in range(n)]
    shock_dirs = [shock_dir(j) for j in range(N_SHOCKS)]

    # state-state block: M1 Gxx + A Gxx (P kron P) = -Hxx
    Hxx = np.empty((n, n * n))
    for i in range(n):
        for j in range(i, n):
            h = bilinear(state_dirs[i], state_dirs[j])
            Hxx[:, i * n + j] = h
            Hxx[:, j * n + i] = h
    Gxx = _solve_sylvester_xx(M1, A, P, Hxx)

    # state-shock block: M1 Gxu = -A Gxx (Pv kron Qj) - Hxu
    M1_lu = sla.lu_factor(M1)
    Gxu = np.empty((n, n * N_SHOCKS))
    for i in range(n):
        for j in range(N_SHOCKS):
            cross = Gxx @ np.kron(P[:, i], Q[:, j])
            h = bilinear(state_dirs[i], shock_dirs[j])
            Gxu[:, i * N_SHOCKS + j] = sla.lu_solve(M1_lu, -(A @ cross) - h)

    # shock-shock block: M1 Guu = -A Gxx (Qj kron Qk) - Huu
    Guu = np.empty((n, N_SHOCKS * N_SHOCKS))
    for j in range(N_SHOCKS):
        for k in range(j, N_SHOCKS):
            cross = Gxx @ np.kron(Q[:, j], Q[:, k])
            h = bilinear(shock_dirs[j], shock_dirs[k])
            col = sla.lu_solve(M1_lu, -(A @ cross) - h)
            Guu[:, j * N_SHOCKS + k] = col
            Guu[:, k * N_SHOCKS + j] = col

    # risk constant: (A + A P + B) c = -1/2 [A Guu vec(Sigma) + sum_j var_j H_j]
    vec_cov = shock_cov.reshape(-1)
    rhs = -(0.5 * (A @ (Guu @ vec_cov)))
    for j in range(N_SHOCKS):
        var_j = shock_cov[j, j]
        if var_j > 0.0:
            rhs -= 0.5 * var_j * bilinear(lead_dir(j), lead_dir(j))
    c = np.linalg.solve(M1 + A, rhs)

    return DecisionRule(order=2, names=rule1.names, ss=ss, P=P, Q=Q,
                        eigenvalues=rule1.eigenvalues, Gxx=Gxx, Gxu=Gxu,
                        Guu=Guu, risk_constant=c,
                        meta=dict(rule1.meta, shock_cov=shock_cov))


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------

def simulate_pruned(
    rule: DecisionRule,
    shocks: ShockPanel,
    burn_in: int = 0,
    deviation_bound: float = 1e6,
    initial_deviation: np.ndarray | None = None,
) -> SimPath:
    """Simulate level paths under the (possibly pruned quadratic) rule."""
    T = len(shocks)
    if burn_in >= T:
        raise DimensionMismatch(f"burn-in {burn_in} exceeds panel length {T}")
    n = rule.n
    P, Q = rule.P, rule.Q
    second = rule.order >= 2
    y1 = np.zeros(n) if initial_deviation is None else np.asarray(initial_deviation, float).copy()
    y2 = np.zeros(n)
    out = np.empty((T, n))
    eps = shocks.eps
    for t in range(T):
        e = eps[t]
        if second:
            # quadratic terms use the first-order state entering the period
            y2 = (P @ y2 + 0.5 * (rule.Gxx @ np.kron(y1, y1))
                  + rule.Gxu @ np.kron(y1, e)
                  + 0.5 * (rule.Guu @ np.kron(e, e)) + rule.risk_constant)
        y1 = P @ y1 + Q @ e
        out[t] = y1 + y2 if second else y1
    dev_max = np.max(np.abs(out))
    if not np.isfinite(dev_max) or dev_max > deviation_bound:
        raise ExplosivePath(f"path deviation reached {dev_max:.3e}")
    levels = out[burn_in:] + rule.ss.values
    return SimPath(rule.names, levels, shocks=shocks,
                   meta={"order": rule.order, "burn_in": burn_in,
                         "variant_tag": rule.ss.variant_tag})


def theoretical_moments(
    rule: DecisionRule,
    mspec,
    T: int = 50_000,
    seed: int = 0,
    n_replications: int = 1,
    burn_in: int = 1_000,
    cal=None,
):
    """Moments of HP-filtered logged series from long pruned simulations,
    averaged over replications.  ``mspec`` follows the moment-specification
    protocol of :mod:`bankmacro.moments`."""
    from .moments import average_moments, compute_moments

    if cal is None:
        cal = rule.meta.get("cal")
    if cal is None:
        raise DimensionMismatch("theoretical_moments needs the calibration for shock draws")
    results = []
    for r in range(n_replications):
        panel = ShockPanel.draw(T + burn_in, cal, seed + r)
        path = simulate_pruned(rule, panel, burn_in=burn_in)
        results.append(compute_moments(path, mspec))
    return average_moments(results)

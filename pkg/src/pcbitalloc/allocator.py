"""Joint bit allocation by a log-barrier interior-point method.

The allocation problem minimizes the modeled distortion a*Qg + b*Qc + c
subject to the modeled total rate gamma_g*Qg**theta_g + gamma_c*Qc**theta_c
staying within the budget. Both the objective and the constraint are
convex on Qg, Qc > 0 (theta < 0), so the inequality is folded into a
logarithmic barrier

    F(Q; mu) = a*Qg + b*Qc + c - mu * ln(budget - R(Q))

which is minimized by damped Newton iterations while the barrier weight
mu is shrunk geometrically (mu <- eta * mu) until it falls below the
accuracy threshold. The continuous optimum is then rounded onto the
discrete step grid: per-component nearest rounding, a deterministic
coarsening repair when the rounded pair overshoots the budget, and a
bounded local re-optimization that spends budget stranded by rounding.

An exhaustive 441-pair grid search over the same QP range serves as the
reference baseline.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import (
    ConvergenceError,
    InfeasibleBudgetError,
    InfeasibleStartError,
    ValidationError,
)
from .models import (
    QP_MAX,
    QP_MIN,
    DistortionModel,
    QpPair,
    QuantPair,
    RateModel,
    predict_distortion,
    predict_rate,
    qp_grid,
    qp_to_step,
)


@dataclass(frozen=True)
class SolverConfig:
    mu0: float = 0.1
    eta: float = 1e-6
    eps: float = 1e-10
    start: QuantPair = field(default_factory=lambda: QuantPair(80.0, 80.0))
    newton_tol: float = 1e-9
    max_newton_iters: int = 100
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    polish_radius: int = 2

    def __post_init__(self):
        if self.mu0 <= 0:
            raise ValidationError("mu0 must be positive")
        if not 0.0 < self.eta < 1.0:
            raise ValidationError("eta must lie in (0, 1)")
        if self.eps <= 0:
            raise ValidationError("eps must be positive")
        if self.newton_tol <= 0 or self.max_newton_iters < 1:
            raise ValidationError("bad Newton settings")
        if self.polish_radius < 0:
            raise ValidationError("polish_radius must be non-negative")


@dataclass(frozen=True)
class AllocationProblem:
    dm: DistortionModel
    rm: RateModel
    r_target: float
    qps: tuple[int, ...] = field(default_factory=qp_grid)

    def __post_init__(self):
        if self.dm.a < 0 or self.dm.b < 0:
            raise ValidationError(
                "distortion slopes must be non-negative; refusing a model whose "
                "barrier objective is unbounded toward coarse steps"
            )
        if self.r_target <= 0:
            raise ValidationError("rate budget must be positive")
        qps = tuple(sorted(set(int(q) for q in self.qps)))
        if not qps:
            raise ValidationError("qp grid must be non-empty")
        for qp in qps:
            if not QP_MIN <= qp <= QP_MAX:
                raise ValidationError(f"qp {qp} outside [{QP_MIN}, {QP_MAX}]")
        object.__setattr__(self, "qps", qps)

    @property
    def steps(self) -> tuple[float, ...]:
        return tuple(qp_to_step(qp) for qp in self.qps)

    def rate(self, q: QuantPair) -> float:
        return predict_rate(self.rm, q).total

    def distortion(self, q: QuantPair) -> float:
        return predict_distortion(self.dm, q)

    def slack(self, q_g: float, q_c: float) -> float:
        rm = self.rm
        return self.r_target - rm.gamma_g * q_g**rm.theta_g - rm.gamma_c * q_c**rm.theta_c


@dataclass(frozen=True)
class Allocation:
    continuous: QuantPair
    qp: QpPair
    predicted_rate: float
    predicted_distortion: float
    rounding_violation: float


def barrier_objective(p: AllocationProblem, q: QuantPair, mu: float):
    """Barrier value, gradient, and Hessian at a strictly feasible point.

    Returns (value, (g_g, g_c), ((h_gg, h_gc), (h_gc, h_cc))). The Hessian
    is positive definite at interior points of well-posed problems.
    """
    if mu <= 0:
        raise ValidationError("mu must be positive")
    q_g, q_c = q.q_g, q.q_c
    s = p.slack(q_g, q_c)
    if s <= 0:
        raise ValidationError("point violates the rate budget; barrier undefined")
    dm, rm = p.dm, p.rm
    value = dm.a * q_g + dm.b * q_c + dm.c - mu * math.log(s)
    # dR/dq and d2R/dq2 for each power-law stream
    drg = rm.gamma_g * rm.theta_g * q_g ** (rm.theta_g - 1.0)
    drc = rm.gamma_c * rm.theta_c * q_c ** (rm.theta_c - 1.0)
    d2rg = rm.gamma_g * rm.theta_g * (rm.theta_g - 1.0) * q_g ** (rm.theta_g - 2.0)
    d2rc = rm.gamma_c * rm.theta_c * (rm.theta_c - 1.0) * q_c ** (rm.theta_c - 2.0)
    g_g = dm.a + mu * drg / s
    g_c = dm.b + mu * drc / s
    h_gg = mu * (d2rg / s + drg * drg / (s * s))
    h_cc = mu * (d2rc / s + drc * drc / (s * s))
    h_gc = mu * drg * drc / (s * s)
    return value, (g_g, g_c), ((h_gg, h_gc), (h_gc, h_cc))


def _newton_minimize(p: AllocationProblem, q_g: float, q_c: float, mu: float,
                     cfg: SolverConfig, trace) -> tuple[float, float]:
    """Damped Newton with feasibility-preserving backtracking line search."""
    value, grad, hess = barrier_objective(p, QuantPair(q_g, q_c), mu)
    for _ in range(cfg.max_newton_iters):
        g_g, g_c = grad
        if math.hypot(g_g, g_c) < cfg.newton_tol:
            return q_g, q_c
        (h_gg, h_gc), (_, h_cc) = hess
        det = h_gg * h_cc - h_gc * h_gc
        if not math.isfinite(det) or det <= 0:
            raise ConvergenceError("barrier Hessian is not positive definite")
        d_g = -(h_cc * g_g - h_gc * g_c) / det
        d_c = -(h_gg * g_c - h_gc * g_g) / det
        descent = g_g * d_g + g_c * d_c
        # Newton decrement rule: when the predicted improvement falls below
        # float resolution of the objective, the remaining gradient is
        # cancellation noise in the slack and no representable step helps.
        if -descent * 0.5 <= 4.0 * sys.float_info.epsilon * (1.0 + abs(value)):
            return q_g, q_c
        t = 1.0
        while True:
            n_g, n_c = q_g + t * d_g, q_c + t * d_c
            if n_g > 0 and n_c > 0 and p.slack(n_g, n_c) > 0:
                n_value, n_grad, n_hess = barrier_objective(
                    p, QuantPair(n_g, n_c), mu
                )
                if n_value <= value + cfg.armijo_c * t * descent:
                    break
            t *= cfg.backtrack
            if t < 1e-18:
                raise ConvergenceError("line search collapsed to zero step")
        q_g, q_c, value, grad, hess = n_g, n_c, n_value, n_grad, n_hess
        if trace is not None:
            trace.append((mu, q_g, q_c, p.slack(q_g, q_c)))
    raise ConvergenceError(
        f"Newton did not converge within {cfg.max_newton_iters} iterations"
    )


def solve_interior_point(p: AllocationProblem, cfg: SolverConfig | None = None,
                         trace: list | None = None) -> Allocation:
    """Minimize modeled distortion under the budget and round onto the grid.

    The outer loop starts at the coarsest steps and shrinks the barrier
    weight by the decline factor until it drops below the accuracy
    threshold; each weight is handled by one damped Newton solve warm
    started from the previous optimum. A budget that cannot even fit the
    coarsest encoding is rejected rather than repaired.
    """
    cfg = cfg or SolverConfig()
    q_g, q_c = cfg.start.q_g, cfg.start.q_c
    if p.slack(q_g, q_c) <= 0:
        raise InfeasibleStartError(
            f"budget {p.r_target:.6g} kbpmp is below the rate at the starting "
            f"steps ({cfg.start.q_g:g}, {cfg.start.q_c:g})"
        )
    if trace is not None:
        trace.append((cfg.mu0, q_g, q_c, p.slack(q_g, q_c)))
    mu = cfg.mu0
    while mu >= cfg.eps:
        q_g, q_c = _newton_minimize(p, q_g, q_c, mu, cfg, trace)
        mu *= cfg.eta
    continuous = QuantPair(q_g, q_c)
    qp, violation = round_to_grid(p, continuous)
    polished = polish_rounding(p, qp, cfg.polish_radius)
    if polished != qp:
        qp, violation = polished, 0.0
    return Allocation(
        continuous=continuous,
        qp=qp,
        predicted_rate=p.rate(continuous),
        predicted_distortion=p.distortion(continuous),
        rounding_violation=violation,
    )


def _nearest_step_index(steps: Sequence[float], x: float) -> int:
    # nearest step wins; on a tie prefer the larger step (lower rate)
    best = 0
    for i, s in enumerate(steps):
        if abs(s - x) < abs(steps[best] - x) or (
            abs(s - x) == abs(steps[best] - x) and s > steps[best]
        ):
            best = i
    return best


def round_to_grid(p: AllocationProblem, continuous: QuantPair
                  ) -> tuple[QpPair, float]:
    """Map a continuous step pair onto the QP grid, repairing budget overshoot.

    Each component is clamped into the grid range and snapped to the
    nearest step (ties toward the larger step). If the snapped pair
    exceeds the budget, the component whose distortion cost per unit of
    recovered rate is smaller is coarsened one QP at a time until the
    pair fits or the grid is exhausted; any residual overshoot is
    reported as the rounding violation.
    """
    steps = p.steps
    i_g = _nearest_step_index(steps, min(max(continuous.q_g, steps[0]), steps[-1]))
    i_c = _nearest_step_index(steps, min(max(continuous.q_c, steps[0]), steps[-1]))
    last = len(steps) - 1
    while True:
        q = QuantPair(steps[i_g], steps[i_c])
        overshoot = p.rate(q) - p.r_target
        if overshoot <= 0 or (i_g == last and i_c == last):
            break
        # marginal distortion added per unit of rate saved by coarsening
        slope_g = -p.rm.gamma_g * p.rm.theta_g * q.q_g ** (p.rm.theta_g - 1.0)
        slope_c = -p.rm.gamma_c * p.rm.theta_c * q.q_c ** (p.rm.theta_c - 1.0)
        cost_g = p.dm.a / slope_g if i_g < last else math.inf
        cost_c = p.dm.b / slope_c if i_c < last else math.inf
        if cost_g <= cost_c:
            i_g += 1
        else:
            i_c += 1
    qp = QpPair(p.qps[i_g], p.qps[i_c])
    return qp, max(0.0, p.rate(QuantPair(steps[i_g], steps[i_c])) - p.r_target)


def polish_rounding(p: AllocationProblem, qp: QpPair, radius: int) -> QpPair:
    """Best admissible pair within a small QP window around a rounded pair.

    Per-component rounding can strand a few percent of the budget; this
    re-minimizes the modeled distortion over the feasible cells within
    the window, using the same tie order as the exhaustive baseline.
    Returns the input pair unchanged when radius is 0 or no window cell
    fits the budget.
    """
    if radius == 0:
        return qp
    qps, steps = p.qps, p.steps
    i_g = qps.index(qp.qp_g)
    i_c = qps.index(qp.qp_c)
    best = None
    for j_g in range(max(0, i_g - radius), min(len(qps), i_g + radius + 1)):
        for j_c in range(max(0, i_c - radius), min(len(qps), i_c + radius + 1)):
            q = QuantPair(steps[j_g], steps[j_c])
            rate = p.rate(q)
            if rate <= p.r_target:
                key = (p.distortion(q), rate, qps[j_g], qps[j_c])
                if best is None or key < best:
                    best = key
    if best is None:
        return qp
    return QpPair(best[2], best[3])


def exhaustive_search(oracle: Callable[[QpPair], tuple[float, float]],
                      r_target: float,
                      qps: Sequence[int] | None = None) -> QpPair:
    """Evaluate every QP pair on the grid and keep the best admissible one.

    The oracle maps a QP pair to (total rate, distortion). Among pairs
    whose rate fits the budget, the lowest distortion wins; remaining
    ties fall to lower rate, then lower qp_g, then lower qp_c.
    """
    grid = tuple(qps) if qps is not None else qp_grid()
    best_key = None
    best_qp = None
    for qp_g in grid:
        for qp_c in grid:
            qp = QpPair(qp_g, qp_c)
            rate, distortion = oracle(qp)
            if rate > r_target:
                continue
            key = (distortion, rate, qp_g, qp_c)
            if best_key is None or key < best_key:
                best_key = key
                best_qp = qp
    if best_qp is None:
        raise InfeasibleBudgetError(
            f"no grid pair fits the budget {r_target:.6g} kbpmp"
        )
    return best_qp


def model_oracle(p: AllocationProblem) -> Callable[[QpPair], tuple[float, float]]:
    """Oracle view of the fitted models, for grid searches without a codec."""

    def oracle(qp: QpPair) -> tuple[float, float]:
        q = qp.steps()
        return p.rate(q), p.distortion(q)

    return oracle

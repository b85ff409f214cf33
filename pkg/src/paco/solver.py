"""Consensus solvers: ADMM, linearized ADMM, Dykstra, and shared plumbing.

Both solvers minimize a separable patch cost subject to membership of the
consensus-plus-constraints set, using the scaled-dual (proximal) form:

* :func:`admm_solve` alternates the cost prox, the set projection, and the
  dual update directly in the space where the projection lives.
* :func:`ladmm_solve` handles a synthesis model ``Y = D A`` with a general
  dictionary D by linearizing the coupling (inexact Uzawa), so only D and
  D^T applications are needed per iteration.  Its step size must satisfy
  ``0 < mu <= lambda / ||D||_2^2`` for the convergence guarantee.

The penalty follows a monotone schedule: it starts at ``kappa * alpha``
(alpha = signal peak) and halves whenever the cost fails to decrease.

Callables expected by the solvers:

* ``prox(V, step) -> array``: proximal operator of the cost with the given
  parameter;
* ``project(V) -> array``: exact projection onto the constraint set;
* ``cost(Y) -> float``: cost value, used for the trace and the schedule.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .transforms import Dictionary


class DivergenceError(RuntimeError):
    """Raised when a solver iterate stops being finite."""


@dataclass
class StopCriteria:
    """Iteration cap plus relative tolerance on the scaled residuals."""

    max_iter: int
    tol: float

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


class PenaltySchedule:
    """Monotone non-increasing penalty: start at kappa*alpha, shrink on cost increase.

    The penalty stays constant while the cost decreases from one iteration
    to the next; when it does not, the penalty is multiplied by ``shrink``
    and the cost memory is cleared, giving the iterates one iteration to
    settle before the next comparison.  ``frozen=True`` disables updates.
    """

    def __init__(self, alpha: float, kappa: float = 10.0, shrink: float = 0.5, frozen: bool = False):
        if not alpha > 0:
            raise ValueError("alpha must be positive")
        if not kappa > 0:
            raise ValueError("kappa must be positive")
        if not 0.0 < shrink < 1.0:
            raise ValueError("shrink must lie in (0, 1)")
        self.alpha = float(alpha)
        self.kappa = float(kappa)
        self.shrink = float(shrink)
        self.frozen = frozen
        self.lam = self.kappa * self.alpha
        self.last_cost = None

    def update(self, cost: float) -> float:
        """Feed the cost of the iteration that just finished; returns the new penalty."""
        if self.frozen:
            return self.lam
        if self.last_cost is not None and cost > self.last_cost:
            self.lam *= self.shrink
            self.last_cost = None
        else:
            self.last_cost = cost
        return self.lam


def penalty_update(schedule: PenaltySchedule, current_cost: float) -> float:
    """Functional alias for :meth:`PenaltySchedule.update`."""
    return schedule.update(current_cost)


@dataclass
class TraceRecord:
    iteration: int
    lam: float
    cost: float
    constraint_violation: float
    cost_change: float
    arg_change: float
    rmse: float | None = None
    mad: float | None = None
    bias: float | None = None
    psnr: float | None = None
    ssim: float | None = None


_CSV_BASE = ("iter", "lambda", "cost", "constraint_violation", "cost_change", "arg_change")
_CSV_METRICS = ("rmse", "mad", "bias", "psnr", "ssim")


class SolverTrace:
    """Per-iteration diagnostics with figure-style scaling and CSV export.

    Stored values are raw; :meth:`scaled` divides the cost and residual
    columns by ``n_elements * alpha`` for plotting on a common axis.
    """

    def __init__(self, n_elements: int, alpha: float):
        self.n_elements = int(n_elements)
        self.alpha = float(alpha)
        self.records: list[TraceRecord] = []

    def add(self, record: TraceRecord) -> None:
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def last(self) -> TraceRecord:
        return self.records[-1]

    def has_metrics(self) -> bool:
        return any(r.rmse is not None for r in self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=np.float64)

    def scaled(self) -> dict:
        """Cost and residual columns divided by n_elements * alpha."""
        s = self.n_elements * self.alpha
        return {
            name: self.column(name) / s
            for name in ("cost", "constraint_violation", "cost_change", "arg_change")
        }

    def to_csv(self, path) -> None:
        """Write one row per iteration, full double precision."""
        with_metrics = self.has_metrics()
        header = _CSV_BASE + (_CSV_METRICS if with_metrics else ())
        with open(path, "w") as f:
            f.write(",".join(header) + "\n")
            for r in self.records:
                row = [str(r.iteration)] + [
                    _fmt(v) for v in (r.lam, r.cost, r.constraint_violation, r.cost_change, r.arg_change)
                ]
                if with_metrics:
                    row += [_fmt(getattr(r, name)) for name in _CSV_METRICS]
                f.write(",".join(row) + "\n")


def _fmt(value) -> str:
    if value is None:
        return "nan"
    return repr(float(value))


def check_stop(trace: SolverTrace, stop: StopCriteria) -> bool:
    """Stop at the iteration cap, or when both scaled residuals fall under tol.

    The argument change and the constraint violation are Frobenius norms
    scaled per element: ``||.||_F / (sqrt(n_elements) * alpha)``.
    """
    if len(trace) >= stop.max_iter:
        return True
    rec = trace.last
    scale = math.sqrt(trace.n_elements) * trace.alpha
    return rec.arg_change / scale < stop.tol and rec.constraint_violation / scale < stop.tol


def _require_finite(what: str, iteration: int, *arrays) -> None:
    for arr in arrays:
        if not np.isfinite(arr).all():
            raise DivergenceError(f"{what} produced non-finite values at iteration {iteration}")


def admm_solve(prox, project, init, schedule: PenaltySchedule, stop: StopCriteria, cost=None):
    """Scaled-dual ADMM for min cost(Y) subject to Y in the projection's set.

    Per iteration::

        Y <- prox(Z - U, lambda)
        Z <- project(Y + U)
        U <- U + Y - Z

    Parameters
    ----------
    prox : callable
        Proximal operator of the cost, ``prox(V, lam)``.
    project : callable
        Exact projection onto the constraint set (consensus, optionally
        intersected with signal-space constraints).
    init : ndarray
        Initial consensus iterate Z^0; the dual starts at zero.
    schedule : PenaltySchedule
        Mutated in place as the solve progresses; pass a fresh instance.
    stop : StopCriteria
    cost : callable, optional
        ``cost(Y) -> float``.  Without it the trace records nan and the
        penalty never shrinks.

    Returns
    -------
    (Z, trace)
        The final consensus iterate (always feasible) and the trace.
    """
    Z = np.array(init, dtype=np.float64)
    U = np.zeros_like(Z)
    Y_prev = Z.copy()
    trace = SolverTrace(Z.size, schedule.alpha)
    prev_cost = math.nan
    for t in range(1, stop.max_iter + 1):
        lam = schedule.lam
        Y = prox(Z - U, lam)
        Z = project(Y + U)
        U = U + Y - Z
        _require_finite("ADMM", t, Y, Z, U)
        c = math.nan if cost is None else float(cost(Y))
        trace.add(
            TraceRecord(
                iteration=t,
                lam=lam,
                cost=c,
                constraint_violation=float(np.linalg.norm(Y - Z)),
                cost_change=c - prev_cost,
                arg_change=float(np.linalg.norm(Y - Y_prev)),
            )
        )
        if cost is not None:
            schedule.update(c)
        prev_cost = c
        Y_prev = Y
        if check_stop(trace, stop):
            break
    return Z, trace


def ladmm_solve(
    prox,
    project,
    dictionary: Dictionary,
    init,
    schedule: PenaltySchedule,
    stop: StopCriteria,
    mu: float | None = None,
    cost=None,
):
    """Linearized ADMM for min cost(A) subject to D A in the projection's set.

    Per iteration::

        A <- prox(A - (mu/lambda) D^T (D A - Z + U), mu)
        Z <- project(D A + U)
        U <- U + D A - Z

    The step size must satisfy ``0 < mu <= lambda / ||D||_2^2``; by default
    it is recomputed each iteration as ``0.99 * lambda / bound**2`` using
    the dictionary's cached norm bound.  An explicit ``mu`` is validated
    against the initial penalty and capped when the penalty later shrinks,
    keeping the guarantee intact.

    Returns the final consensus iterate Z (patch space) and the trace.
    """
    bound = dictionary.spectral_norm_bound
    if mu is not None and not 0.0 < mu <= schedule.lam / bound**2:
        raise ValueError(
            f"step size mu={mu} outside (0, {schedule.lam / bound**2:.6g}] "
            f"required by penalty {schedule.lam} and norm bound {bound}"
        )
    A = np.array(init, dtype=np.float64)
    if A.shape[0] != dictionary.p:
        raise ValueError(f"init has {A.shape[0]} coefficient rows, dictionary expects {dictionary.p}")
    DA = dictionary.apply(A)
    Z = DA.copy()
    U = np.zeros_like(Z)
    trace = SolverTrace(A.size, schedule.alpha)
    prev_cost = math.nan
    for t in range(1, stop.max_iter + 1):
        lam = schedule.lam
        mu_t = 0.99 * lam / bound**2 if mu is None else min(mu, lam / bound**2)
        A_new = prox(A - (mu_t / lam) * dictionary.adjoint(DA - Z + U), mu_t)
        DA = dictionary.apply(A_new)
        Z = project(DA + U)
        U = U + DA - Z
        _require_finite("LADMM", t, A_new, Z, U)
        c = math.nan if cost is None else float(cost(A_new))
        trace.add(
            TraceRecord(
                iteration=t,
                lam=lam,
                cost=c,
                constraint_violation=float(np.linalg.norm(DA - Z)),
                cost_change=c - prev_cost,
                arg_change=float(np.linalg.norm(A_new - A)),
            )
        )
        if cost is not None:
            schedule.update(c)
        prev_cost = c
        A = A_new
        if check_stop(trace, stop):
            break
    return Z, trace


def dykstra_project(project_a, project_b, Y, max_iter: int = 1000, tol: float = 1e-10):
    """Project onto the intersection of two closed convex sets.

    Alternates the two exact projections with Dykstra correction terms,
    which (unlike plain alternating projections) converges to the actual
    projection of ``Y`` onto the intersection.  Stops when the two
    half-step iterates agree to ``tol`` in Frobenius norm; if ``max_iter``
    is reached first, a RuntimeWarning is emitted and the best iterate is
    returned.
    """
    x = np.array(Y, dtype=np.float64)
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    for _ in range(max_iter):
        y = project_a(x + p)
        p = x + p - y
        x_new = project_b(y + q)
        q = y + q - x_new
        x = x_new
        if np.linalg.norm(y - x_new) <= tol:
            return x
    warnings.warn(
        f"Dykstra projection did not reach tol={tol} within {max_iter} iterations",
        RuntimeWarning,
    )
    return x

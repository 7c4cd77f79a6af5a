"""Exact least-distance QP over half-spaces and the actuator box.

    min |tau - tau0|^2   s.t.   a_j . tau >= b_j,   tau_min <= tau <= tau_max

With three unknowns at most three constraints are active at a vertex of the
optimal face, so every candidate active set of size 0..3 is enumerated. For
each linearly independent set G the equality-constrained minimizer is

    tau = tau0 + G^T lam,   (G G^T) lam = h - G tau0

and the nearest primal-feasible candidate with lam >= 0 is the optimum.
Used for tests and benchmarking only; the control loop runs the projection.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import asdict, dataclass, replace
from itertools import combinations
from typing import Any

import numpy as np

from safesmc.arrays import ArrayLike, FloatArray
from safesmc.constants import DEFAULT_TOL, ERR_QP_INFEASIBLE, ROW_NORM_EPS
from safesmc.dynamics import ControlWrench
from safesmc.exceptions import InfeasibleProblemError
from safesmc.hocbf import HalfSpaceConstraint
from safesmc.projection import ActuatorBox, FilterConfig, max_violation, project

_FEAS_TOL = 1e-9
_MAX_ACTIVE = 3


def _stack_rows(
    box: ActuatorBox, constraints: Sequence[HalfSpaceConstraint]
) -> tuple[FloatArray, FloatArray]:
    """All constraints as unit-norm rows g . tau >= h."""
    rows: list[FloatArray] = []
    rhs: list[float] = []
    for row in constraints:
        norm = float(np.linalg.norm(row.a))
        if norm < ROW_NORM_EPS:
            # Degenerate row: either always satisfied or never.
            if row.b > 0.0:
                raise InfeasibleProblemError(ERR_QP_INFEASIBLE.format(rows=len(constraints)))
            continue
        rows.append(row.a / norm)
        rhs.append(row.b / norm)
    eye = np.eye(3)
    for axis in range(3):
        rows.append(eye[axis])
        rhs.append(float(box.tau_min[axis]))
        rows.append(-eye[axis])
        rhs.append(-float(box.tau_max[axis]))
    return np.asarray(rows), np.asarray(rhs)


def qp_oracle(
    box: ActuatorBox,
    constraints: Sequence[HalfSpaceConstraint],
    tau_nominal: ArrayLike,
) -> ControlWrench:
    """Exact minimizer by active-set enumeration.

    Raises InfeasibleProblemError when no candidate is feasible.
    """
    tau0 = np.asarray(tau_nominal, dtype=np.float64)
    G_all, h_all = _stack_rows(box, constraints)
    slack_tol = _FEAS_TOL * (1.0 + np.abs(h_all) + float(np.linalg.norm(tau0)))

    best: ControlWrench | None = None
    best_dist = np.inf
    fallback: ControlWrench | None = None
    fallback_dist = np.inf
    for size in range(_MAX_ACTIVE + 1):
        for active in combinations(range(len(h_all)), size):
            if size == 0:
                tau = tau0.copy()
                lam = np.zeros(0)
            else:
                G = G_all[list(active)]
                gram = G @ G.T
                if np.linalg.matrix_rank(gram) < size:
                    continue
                lam = np.linalg.solve(gram, h_all[list(active)] - G @ tau0)
                tau = tau0 + G.T @ lam
            if np.any(G_all @ tau - h_all < -slack_tol):
                continue
            dist = float(np.linalg.norm(tau - tau0))
            lam_ok = lam.size == 0 or bool(
                np.all(lam >= -_FEAS_TOL * (1.0 + float(np.max(np.abs(lam)))))
            )
            if lam_ok and dist < best_dist:
                best, best_dist = tau, dist
            if dist < fallback_dist:
                fallback, fallback_dist = tau, dist

    if best is None:
        best = fallback
    if best is None:
        raise InfeasibleProblemError(ERR_QP_INFEASIBLE.format(rows=len(constraints)))
    # Box faces are exact in the candidate algebra only up to rounding.
    return np.minimum(np.maximum(best, box.tau_min), box.tau_max)


@dataclass(frozen=True)
class OracleSuiteReport:
    instances: int
    single_instances: int
    single_max_error: float
    feasible: int
    unconverged: int
    box_violations: int
    worse_residuals: int
    beaten_by_projection: int
    deviation_median: float
    deviation_p95: float
    deviation_max: float
    fraction_within_1e3: float
    passed: bool

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _random_rows(
    rng: np.random.Generator, count: int, anchor: FloatArray
) -> list[HalfSpaceConstraint]:
    """Unit-norm rows that all hold strictly at *anchor*."""
    rows = []
    for j in range(count):
        a = rng.standard_normal(3)
        a /= np.linalg.norm(a)
        b = float(a @ anchor) - float(rng.uniform(0.0, 0.5))
        rows.append(HalfSpaceConstraint(a=a, b=b, obstacle_id=j, h=0.0, h_dot=0.0, alpha=0.0))
    return rows


def _relaxed(rows: list[HalfSpaceConstraint], tol: float) -> list[HalfSpaceConstraint]:
    return [replace(row, b=row.b - tol) for row in rows]


def run_oracle_suite(
    instances: int, seed: int = 0, sweeps: int = 20, tol: float = DEFAULT_TOL
) -> OracleSuiteReport:
    """Projection filter against the exact QP on seeded random feasible instances.

    Asserted: single-row agreement to 1e-9 (box inactive), every instance
    converging within *sweeps*, box membership, never-worse residual, and that
    no converged projection result is closer to the nominal wrench than the
    exact projection onto the tol-relaxed set.
    The normalized deviation from the QP optimum is reported.
    """
    rng = np.random.default_rng(seed)
    config = FilterConfig(gamma=1.0, sweeps=sweeps, tol=tol)

    single_error = 0.0
    single_count = max(1, instances // 10)
    huge = ActuatorBox.symmetric((1e6, 1e6, 1e6))
    for _ in range(single_count):
        rows = _random_rows(rng, 1, rng.uniform(-1.0, 1.0, 3))
        tau0 = 2.0 * rng.standard_normal(3)
        tau_qp = qp_oracle(huge, rows, tau0)
        tau_safe = project(huge, rows, config, tau0).tau_safe
        single_error = max(single_error, float(np.linalg.norm(tau_safe - tau_qp)))

    deviations: list[float] = []
    feasible = unconverged = box_bad = worse = beaten = 0
    for _ in range(instances):
        bound = rng.uniform(0.5, 2.0, 3)
        box = ActuatorBox.symmetric(bound)
        rows = _random_rows(rng, int(rng.integers(1, 5)), rng.uniform(-0.9, 0.9, 3) * bound)
        tau0 = 2.0 * rng.standard_normal(3)
        tau_qp = qp_oracle(box, rows, tau0)
        result = project(box, rows, config, tau0)
        deviations.append(
            float(np.linalg.norm(result.tau_safe - tau_qp) / (1.0 + np.linalg.norm(tau_qp)))
        )
        box_bad += not box.contains(result.tau_safe)
        start = np.minimum(np.maximum(tau0, box.tau_min), box.tau_max)
        worse += result.max_residual > max_violation(rows, start)
        if not result.feasible:
            unconverged += 1
            continue
        feasible += 1
        relaxed_qp = qp_oracle(box, _relaxed(rows, tol), tau0)
        if np.linalg.norm(result.tau_safe - tau0) < np.linalg.norm(relaxed_qp - tau0) - 1e-9:
            beaten += 1

    dev = np.asarray(deviations) if deviations else np.zeros(1)
    return OracleSuiteReport(
        instances=instances,
        single_instances=single_count,
        single_max_error=single_error,
        feasible=feasible,
        unconverged=unconverged,
        box_violations=box_bad,
        worse_residuals=worse,
        beaten_by_projection=beaten,
        deviation_median=float(np.median(dev)),
        deviation_p95=float(np.percentile(dev, 95)),
        deviation_max=float(np.max(dev)),
        fraction_within_1e3=float(np.mean(dev <= 1e-3)),
        passed=(
            single_error <= 1e-9
            and unconverged == 0
            and box_bad == 0
            and worse == 0
            and beaten == 0
        ),
    )

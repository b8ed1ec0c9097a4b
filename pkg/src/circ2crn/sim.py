"""Fixed-step integration and trajectory analytics.

Classical RK4 is enough here because the stiffness scale of every emitted
system is known: the fastest rates are about 2/h (the algebraic-row
relaxation plus annihilation at gamma = 1/h) and rail values stay O(1), so
dt = h/20 sits far inside the real-axis stability bound of roughly
2.78/|lambda|.  Larger steps trigger a configuration warning.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .crn import emit_crn, mass_action_field
from .dae import (
    Trajectory,
    compose_direct,
    compose_input,
    consistent_project,
    e_invertible,
    reference_solve,
)
from .errors import NonFiniteState, WindowTooShort
from .numerics import as_vector
from .positivation import hungarize, interleave_rails, positivate, split_initial

BLOWUP_LIMIT = 1e12
DT_RULE_FACTOR = 20.0


@dataclass(frozen=True)
class FitResult:
    amplitude: float
    phase: float  # radians in (-pi, pi]
    residual: float  # RMS of the fit error


def check_dt(dt: float, h: float) -> None:
    """Warn when dt violates the dt <= h/20 stability rule."""
    if dt > h / DT_RULE_FACTOR * (1.0 + 1e-12):
        warnings.warn(
            f"dt={dt:g} exceeds h/{DT_RULE_FACTOR:g}={h / DT_RULE_FACTOR:g}; "
            "RK4 may be unstable for the stiff rates of this system",
            RuntimeWarning,
            stacklevel=2,
        )


def integrate(field, x0, T: float, dt: float, names=None) -> Trajectory:
    """Classical 4th-order Runge-Kutta on a time-invariant field.

    Steps from 0 to the first multiple of dt at or beyond T.  Aborts with
    NonFiniteState (carrying the blow-up time and the partial trajectory)
    if any state magnitude exceeds 1e12 or turns non-finite.
    """
    if dt <= 0.0 or T < dt:
        raise ValueError("need 0 < dt <= T")
    x = as_vector(x0, "x0")
    n = x.shape[0]
    if names is None:
        names = tuple(f"s{i}" for i in range(n))
    steps = int(np.ceil(T / dt - 1e-12))
    values = np.empty((steps + 1, n))
    values[0] = x
    half = 0.5 * dt
    sixth = dt / 6.0
    for i in range(1, steps + 1):
        k1 = field(x)
        k2 = field(x + half * k1)
        k3 = field(x + half * k2)
        k4 = field(x + dt * k3)
        x = x + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        values[i] = x
        if n and (not np.all(np.isfinite(x)) or np.max(np.abs(x)) > BLOWUP_LIMIT):
            exc = NonFiniteState(i * dt)
            exc.partial = Trajectory(np.arange(i) * dt, names, values[:i])
            raise exc
    return Trajectory(np.arange(steps + 1) * dt, names, values)


def recover_difference(traj: Trajectory, pairs) -> Trajectory:
    """Columns out = plus - minus on the same time grid."""
    names = []
    cols = []
    for plus_name, minus_name, out_name in pairs:
        cols.append(traj.column(plus_name) - traj.column(minus_name))
        names.append(out_name)
    values = np.column_stack(cols) if cols else np.zeros((traj.times.shape[0], 0))
    return Trajectory(traj.times.copy(), tuple(names), values)


def sup_error(a: Trajectory, b: Trajectory, columns) -> float:
    """Max over shared times of the infinity norm of column differences.

    b is resampled onto a's grid by linear interpolation; the comparison is
    restricted to the overlap [0, min(T_a, T_b)].
    """
    t_end = min(a.times[-1], b.times[-1])
    mask = a.times <= t_end * (1.0 + 1e-12)
    grid = a.times[mask]
    worst = 0.0
    for name in columns:
        ca = a.column(name)[mask]
        cb = np.interp(grid, b.times, b.column(name))
        worst = max(worst, float(np.max(np.abs(ca - cb))))
    return worst


def fit_sinusoid(
    traj: Trajectory, column: str, omega: float, window: tuple[float, float]
) -> FitResult:
    """Least-squares fit of a sin(wt) + b cos(wt) + c over the window.

    Amplitude is sqrt(a^2 + b^2) and phase atan2(b, a), so the fitted signal
    reads amplitude * sin(wt + phase) + c.
    """
    t0, t1 = window
    if omega <= 0.0:
        raise ValueError("omega must be positive")
    if t0 < traj.times[0] - 1e-12 or t1 > traj.times[-1] + 1e-12:
        raise ValueError("window extends beyond the trajectory")
    if (t1 - t0) < 2.0 * (2.0 * np.pi / omega):
        raise WindowTooShort(
            f"window ({t0:g}, {t1:g}) spans fewer than two periods of omega={omega:g}"
        )
    mask = (traj.times >= t0) & (traj.times <= t1)
    t = traj.times[mask]
    y = traj.column(column)[mask]
    design = np.column_stack([np.sin(omega * t), np.cos(omega * t), np.ones_like(t)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    a, b, _ = coef
    resid = y - design @ coef
    return FitResult(
        amplitude=float(np.hypot(a, b)),
        phase=float(np.arctan2(b, a)),
        residual=float(np.sqrt(np.mean(resid**2))),
    )


# ---------------------------------------------------------------------------
# end-to-end convergence study


def pipeline_crn_error(
    sys,
    inp,
    x0,
    h: float,
    T: float,
    gamma: float | str = "auto",
    dt: float | None = None,
    h_ref: float | None = None,
    reference: Trajectory | None = None,
) -> float:
    """Sup error of the full CRN pipeline against the backward-Euler oracle.

    Pipeline: compose the driven ODE (direct when E is invertible, the
    h-shifted extension otherwise), positivate, hungarize, emit the CRN,
    integrate its mass-action field with RK4, recover rail differences, and
    compare the circuit columns with reference_solve.
    """
    g = 1.0 / h if gamma == "auto" else float(gamma)
    step = h / DT_RULE_FACTOR if dt is None else dt
    check_dt(step, h)
    if e_invertible(sys):
        ode, rails0 = compose_direct(sys, inp)
    else:
        ode, rails0 = compose_input(sys, inp, h)
    x0c, _ = consistent_project(sys, sys.B @ inp.u0, as_vector(x0, "x0"))
    full0 = np.concatenate([x0c, rails0])
    net = emit_crn(hungarize(positivate(ode), g), *split_initial(full0))
    traj = integrate(
        mass_action_field(net),
        interleave_rails(*split_initial(full0)),
        T,
        step,
        names=net.species,
    )
    diffs = recover_difference(
        traj, [(f"{nm}_p", f"{nm}_m", nm) for nm in sys.state_names]
    )
    if reference is None:
        if h_ref is None:
            h_ref = h / 100.0
        reference = reference_solve(sys, inp, x0, T, h_ref, max_points=400_000)
    return sup_error(diffs, reference, sys.state_names)


def convergence_study(
    sys,
    inp,
    x0,
    hs,
    T: float,
    gamma: float | str = "auto",
    h_ref: float | None = None,
) -> list[tuple[float, float]]:
    """Run the full pipeline at each h and report sup errors vs the oracle.

    h values must be decreasing; the oracle step defaults to min(hs)/100.
    """
    hs = list(hs)
    if not hs:
        raise ValueError("hs must be nonempty")
    if any(b >= a for a, b in zip(hs, hs[1:])):
        raise ValueError("hs must be strictly decreasing")
    if h_ref is None:
        h_ref = min(hs) / 100.0
    reference = reference_solve(sys, inp, x0, T, h_ref, max_points=400_000)
    rows = []
    for h in hs:
        err = pipeline_crn_error(sys, inp, x0, h, T, gamma=gamma, reference=reference)
        rows.append((h, err))
    return rows


def study_to_csv(rows) -> str:
    lines = ["h,sup_error"]
    for h, err in rows:
        lines.append(f"{h:.17g},{err:.17g}")
    return "\n".join(lines) + "\n"

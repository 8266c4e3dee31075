"""Finite-difference reaction-diffusion dynamics.

One-component 1-D gradient flow phi_t = D phi_xx + R(phi) with its discrete
free-energy functional, and the two-component 2-D activator-depletion system

    u_t = d_u lap(u) - u v^2 + F (1 - u)
    v_t = d_v lap(v) + u v^2 - (F + k) v

on a periodic grid, stepped by explicit Euler under an enforced stability
bound. A shared driver records snapshots and a scalar trace.
"""

from dataclasses import dataclass, replace

import numpy as np


def _v_zero(phi):
    return np.zeros_like(phi)


def _v_double_well(phi):
    return phi**2 / 2.0 - phi**4 / 4.0


def _r_double_well(phi):
    return phi - phi**3


# potential V(phi) and its derivative R(phi) = dV/dphi; the flow follows
# phi_t = D lap(phi) + R(phi), which decreases the 1-D free energy.
POTENTIALS = {
    "zero": (_v_zero, _v_zero),
    "allen-cahn": (_v_double_well, _r_double_well),
}

_BOUNDARIES = ("periodic", "neumann")


@dataclass(frozen=True)
class Field1D:
    """One-component field on a uniform 1-D grid."""

    values: np.ndarray
    dx: float
    boundary: str = "periodic"
    time: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).reshape(-1)
        object.__setattr__(self, "values", values)
        if values.size < 3:
            raise ValueError(f"need at least 3 grid points, got {values.size}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        if not (np.isfinite(self.dx) and self.dx > 0):
            raise ValueError(f"dx must be > 0, got {self.dx}")
        if self.boundary not in _BOUNDARIES:
            raise ValueError(f"unknown boundary {self.boundary!r}, choose from {_BOUNDARIES}")

    @property
    def n(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class RdState2D:
    """Two-component state on a periodic 2-D grid with its kinetics constants."""

    u: np.ndarray
    v: np.ndarray
    dx: float
    d_u: float
    d_v: float
    feed: float
    kill: float
    time: float = 0.0

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        v = np.asarray(self.v, dtype=float)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        if u.ndim != 2 or min(u.shape) < 3:
            raise ValueError(f"u must be 2-D with both sides >= 3, got shape {u.shape}")
        if v.shape != u.shape:
            raise ValueError(f"v shape {v.shape} != u shape {u.shape}")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise ValueError("fields must be finite")
        if not (np.isfinite(self.dx) and self.dx > 0):
            raise ValueError(f"dx must be > 0, got {self.dx}")
        if not (self.d_u > 0 and self.d_v > 0):
            raise ValueError(f"diffusivities must be > 0, got d_u={self.d_u}, d_v={self.d_v}")
        if self.feed < 0 or self.kill < 0:
            raise ValueError(f"feed and kill must be >= 0, got F={self.feed}, k={self.kill}")


@dataclass(frozen=True)
class StepControl:
    """Explicit Euler schedule: step size, step count, snapshot cadence."""

    dt: float
    steps: int
    snapshot_every: int = 1

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.steps < 0:
            raise ValueError(f"steps must be >= 0, got {self.steps}")
        if self.snapshot_every < 1:
            raise ValueError(f"snapshot_every must be >= 1, got {self.snapshot_every}")


@dataclass(frozen=True)
class Snapshot:
    step: int
    time: float
    state: object


@dataclass(frozen=True)
class SimulationResult:
    snapshots: list
    metric_steps: np.ndarray
    metric_values: np.ndarray
    final_state: object


def stability_bound_1d(field: Field1D, diffusion: float) -> float:
    """Largest explicit-Euler dt for the 1-D diffusion term: dx^2 / (2 D)."""
    if diffusion <= 0:
        raise ValueError(f"diffusion must be > 0, got {diffusion}")
    return field.dx**2 / (2.0 * diffusion)


def stability_bound_2d(state: RdState2D) -> float:
    """Largest explicit-Euler dt for the 2-D diffusion terms: dx^2 / (4 max(d_u, d_v))."""
    return state.dx**2 / (4.0 * max(state.d_u, state.d_v))


def _gradient_1d(field: Field1D) -> np.ndarray:
    phi, dx = field.values, field.dx
    if field.boundary == "periodic":
        return (np.roll(phi, -1) - np.roll(phi, 1)) / (2.0 * dx)
    padded = np.concatenate(([phi[1]], phi, [phi[-2]]))
    return (padded[2:] - padded[:-2]) / (2.0 * dx)


def _laplacian_1d(field: Field1D) -> np.ndarray:
    phi, dx = field.values, field.dx
    if field.boundary == "periodic":
        return (np.roll(phi, -1) + np.roll(phi, 1) - 2.0 * phi) / dx**2
    padded = np.concatenate(([phi[1]], phi, [phi[-2]]))
    return (padded[2:] + padded[:-2] - 2.0 * phi) / dx**2


def free_energy_1d(field: Field1D, diffusion: float, potential: str = "zero") -> float:
    """Discrete functional integral( D/2 (phi_x)^2 - V(phi) ) dx.

    Central-difference gradient; the quadrature is a plain Riemann sum on the
    periodic grid and a trapezoid rule under mirror (Neumann) boundaries.
    """
    if diffusion <= 0:
        raise ValueError(f"diffusion must be > 0, got {diffusion}")
    if potential not in POTENTIALS:
        raise ValueError(f"unknown potential {potential!r}, choose from {tuple(POTENTIALS)}")
    v_of, _ = POTENTIALS[potential]
    grad = _gradient_1d(field)
    integrand = 0.5 * diffusion * grad**2 - v_of(field.values)
    if field.boundary == "periodic":
        return float(integrand.sum() * field.dx)
    weights = np.full(field.n, field.dx)
    weights[0] = weights[-1] = field.dx / 2.0
    return float(integrand @ weights)


def step_gradient_flow_1d(
    field: Field1D, diffusion: float, dt: float, potential: str = "zero"
) -> Field1D:
    """One explicit Euler step of phi_t = D lap(phi) + R(phi).

    Rejects dt above the diffusion stability bound dx^2 / (2 D).
    """
    bound = stability_bound_1d(field, diffusion)
    if dt > bound:
        raise ValueError(f"dt={dt} exceeds the stability bound {bound}")
    if potential not in POTENTIALS:
        raise ValueError(f"unknown potential {potential!r}, choose from {tuple(POTENTIALS)}")
    _, r_of = POTENTIALS[potential]
    # inf/nan propagation is the blow-up detector; keep numpy quiet about it
    with np.errstate(over="ignore", invalid="ignore"):
        new = field.values + dt * (diffusion * _laplacian_1d(field) + r_of(field.values))
    if not np.all(np.isfinite(new)):
        raise RuntimeError("non-finite field after update")
    return replace(field, values=new, time=field.time + dt)


def _laplacian_2d(grid: np.ndarray, dx: float) -> np.ndarray:
    return (
        np.roll(grid, 1, axis=0)
        + np.roll(grid, -1, axis=0)
        + np.roll(grid, 1, axis=1)
        + np.roll(grid, -1, axis=1)
        - 4.0 * grid
    ) / dx**2


def gray_scott_kinetics(u: np.ndarray, v: np.ndarray, feed: float, kill: float):
    """Reaction terms (f, g) of the shipped kinetics:

    f = -u v^2 + F (1 - u),  g = u v^2 - (F + k) v.
    """
    uvv = u * v**2
    return -uvv + feed * (1.0 - u), uvv - (feed + kill) * v


def step_turing_2d(state: RdState2D, dt: float, kinetics=gray_scott_kinetics) -> RdState2D:
    """One explicit Euler step of the two-component system on the periodic grid.

    ``kinetics`` maps (u, v, feed, kill) to the reaction pair (f, g); other
    reaction choices slot in through it. Rejects dt above the stability
    bound dx^2 / (4 max(d_u, d_v)) and aborts on non-finite values instead
    of clipping, so blow-up stays visible.
    """
    bound = stability_bound_2d(state)
    if dt > bound:
        raise ValueError(f"dt={dt} exceeds the stability bound {bound}")
    u, v = state.u, state.v
    # inf/nan propagation is the blow-up detector; keep numpy quiet about it
    with np.errstate(over="ignore", invalid="ignore"):
        f_term, g_term = kinetics(u, v, state.feed, state.kill)
        new_u = u + dt * (state.d_u * _laplacian_2d(u, state.dx) + f_term)
        new_v = v + dt * (state.d_v * _laplacian_2d(v, state.dx) + g_term)
    if not (np.all(np.isfinite(new_u)) and np.all(np.isfinite(new_v))):
        raise RuntimeError("non-finite field after update")
    return replace(state, u=new_u, v=new_v, time=state.time + dt)


def pattern_metric(grid: np.ndarray) -> float:
    """Spatial contrast: population standard deviation of the grid values."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty grid")
    return float(np.std(grid))


def _snapshot_of(state) -> Snapshot:
    if isinstance(state, Field1D):
        payload = state.values.copy()
    else:
        payload = (state.u.copy(), state.v.copy())
    return Snapshot(step=0, time=state.time, state=payload)


def simulate(
    state,
    control: StepControl,
    diffusion: float | None = None,
    potential: str = "zero",
) -> SimulationResult:
    """Run the explicit scheme for ``control.steps`` steps.

    For a Field1D the metric trace is the discrete free energy (``diffusion``
    is then required); for an RdState2D it is the pattern metric of v.
    Snapshots are taken at step 0, every ``snapshot_every`` steps when that
    is positive, and at the final step. Composable: two chained runs of
    n1 and n2 steps reproduce one (n1 + n2)-step run bit for bit.
    """
    if isinstance(state, Field1D):
        if diffusion is None:
            raise ValueError("1-D gradient flow needs a diffusion constant")
        bound = stability_bound_1d(state, diffusion)

        def advance(s):
            return step_gradient_flow_1d(s, diffusion, control.dt, potential)

        def metric(s):
            return free_energy_1d(s, diffusion, potential)

    elif isinstance(state, RdState2D):
        bound = stability_bound_2d(state)

        def advance(s):
            return step_turing_2d(s, control.dt)

        def metric(s):
            return pattern_metric(s.v)

    else:
        raise ValueError(f"unsupported state type {type(state).__name__}")
    if control.dt > bound:
        raise ValueError(f"dt={control.dt} exceeds the stability bound {bound}")

    snapshots = [_snapshot_of(state)]
    steps_rec = [0]
    values_rec = [metric(state)]
    current = state
    for step in range(1, control.steps + 1):
        try:
            current = advance(current)
        except RuntimeError as exc:
            raise RuntimeError(f"step {step}: {exc}") from exc
        if step % control.snapshot_every == 0 or step == control.steps:
            snap = _snapshot_of(current)
            snapshots.append(replace(snap, step=step))
            steps_rec.append(step)
            values_rec.append(metric(current))
    return SimulationResult(
        snapshots=snapshots,
        metric_steps=np.asarray(steps_rec),
        metric_values=np.asarray(values_rec),
        final_state=current,
    )

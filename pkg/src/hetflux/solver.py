"""Finite-volume marching scheme driven by the interface flux.

Cell j carries the flux frozen at its center, h_j = H(x_j, .); the numerical
flux between cells j and j+1 is the interface flux of the pair (h_j, h_{j+1})
evaluated at the adjacent cell averages. The update is the standard
conservative explicit Euler step

    u_j'  =  u_j - (dt/dx) (F_{j+1/2} - F_{j-1/2}),

monotone under the step-size condition 2 (dt/dx) L <= 1, where L bounds
|du_h| over the invariant region. Ghost cells replicate the boundary cell
(zero-order extrapolation), which is exact while the solution stays constant
near the window edges; the runner warns when the influence cone of the
heterogeneity can reach them.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, NumericalError
from .flux_model import CriticalCurve, FluxModel, critical_points
from .interface import interface_flux_profile
from .steady import Envelope, envelope

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(5)


@dataclass(frozen=True)
class Mesh:
    """Uniform cell-centered mesh on [x_min, x_max]."""

    x_min: float
    x_max: float
    dx: float
    n_cells: int

    @classmethod
    def make(cls, x_min: float, x_max: float, dx: float) -> "Mesh":
        span = float(x_max) - float(x_min)
        if span <= 0 or dx <= 0:
            raise ConfigError(f"bad mesh window [{x_min}, {x_max}] with dx={dx}")
        n = int(round(span / dx))
        if n < 3:
            raise ConfigError("mesh must have at least 3 cells")
        if abs(n * dx - span) > 1e-9 * max(1.0, span):
            raise ConfigError(
                f"window length {span} is not an integer multiple of dx={dx}"
            )
        return cls(x_min=float(x_min), x_max=float(x_max), dx=float(dx), n_cells=n)

    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    def edges(self) -> np.ndarray:
        return self.x_min + np.arange(self.n_cells + 1) * self.dx


@dataclass
class GridState:
    u: np.ndarray
    time: float
    step_index: int = 0


@dataclass(frozen=True)
class CflPolicy:
    """Resolved step-size policy: 2 lam L <= safety must hold."""

    safety: float
    lam: float  # dt / dx
    lipschitz: float  # L

    def dt(self, dx: float) -> float:
        return self.lam * dx


class Scheme:
    """Per-mesh tables: ghost-extended centers and critical points.

    Precomputed once; step() is then a handful of vectorized flux evaluations.
    """

    def __init__(self, model: FluxModel, mesh: Mesh, lipschitz: float):
        self.model = model
        self.mesh = mesh
        self.lipschitz = float(lipschitz)
        xc = mesh.centers()
        self.xc_ext = np.concatenate(([xc[0] - mesh.dx], xc, [xc[-1] + mesh.dx]))
        self.al_ext = critical_points(model, self.xc_ext)

    def edge_fluxes(self, u: np.ndarray) -> np.ndarray:
        u_ext = np.pad(np.asarray(u, dtype=float), 1, mode="edge")
        return interface_flux_profile(
            self.model,
            self.xc_ext[:-1],
            self.xc_ext[1:],
            self.al_ext[:-1],
            self.al_ext[1:],
            u_ext[:-1],
            u_ext[1:],
        )

    def step_arrays(self, u: np.ndarray, dt: float):
        """One update; returns (u_new, boundary fluxes (F_in, F_out))."""
        if not np.all(np.isfinite(u)):
            raise NumericalError("non-finite state entering step")
        lam = dt / self.mesh.dx
        if 2.0 * lam * self.lipschitz > 1.0 + 1e-9:
            raise NumericalError(
                f"step size violates 2 (dt/dx) L <= 1: dt={dt}, L={self.lipschitz}"
            )
        F = self.edge_fluxes(u)
        return u - lam * np.diff(F), float(F[0]), float(F[-1])


def lipschitz_bound(model: FluxModel, lo: float, hi: float, curve: Optional[CriticalCurve] = None) -> float:
    """sup |du_h| over all x and states in [lo, hi].

    du_h(x, .) is increasing, so the sup in u sits at the interval endpoints;
    the sup in x is over the heterogeneity samples (flux frozen outside).
    """
    if curve is None:
        curve = CriticalCurve.build(model)
    xs = curve.xs
    a = np.abs(np.asarray(model.du_h(xs, float(lo)), dtype=float))
    b = np.abs(np.asarray(model.du_h(xs, float(hi)), dtype=float))
    return float(max(np.max(a), np.max(b)))


def cfl_dt(
    model: FluxModel,
    mesh: Mesh,
    bounds: tuple[float, float],
    safety: float = 0.9,
    curve: Optional[CriticalCurve] = None,
    max_dt: Optional[float] = None,
) -> CflPolicy:
    """Largest safe step: dt = safety * dx / (2 L) for L over `bounds`."""
    if not (0 < safety <= 1):
        raise ConfigError(f"safety factor must lie in (0, 1], got {safety}")
    L = lipschitz_bound(model, bounds[0], bounds[1], curve=curve)
    if L <= 1e-300:
        if max_dt is None:
            raise NumericalError(
                "flux carries no wave speeds on the state range; supply max_dt"
            )
        return CflPolicy(safety=safety, lam=max_dt / mesh.dx, lipschitz=L)
    dt = safety * mesh.dx / (2.0 * L)
    if max_dt is not None:
        dt = min(dt, max_dt)
    return CflPolicy(safety=safety, lam=dt / mesh.dx, lipschitz=L)


def step(state: GridState, model: FluxModel, mesh: Mesh, dt: float,
         scheme: Optional[Scheme] = None, lipschitz: Optional[float] = None) -> GridState:
    """Single explicit update of a grid state (convenience wrapper)."""
    if scheme is None:
        if lipschitz is None:
            lo = float(np.min(state.u))
            hi = float(np.max(state.u))
            lipschitz = lipschitz_bound(model, lo, hi)
        scheme = Scheme(model, mesh, lipschitz)
    u_new, _, _ = scheme.step_arrays(np.asarray(state.u, dtype=float), dt)
    return GridState(u=u_new, time=state.time + dt, step_index=state.step_index + 1)


# ---------------------------------------------------------------------------
# Initial data


@dataclass(frozen=True)
class PiecewiseConstantDatum:
    """Values v_0 | v_1 | ... | v_m between sorted breakpoints b_1 < ... < b_m."""

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        if len(self.values) != len(self.breakpoints) + 1:
            raise ConfigError("piecewise datum needs one more value than breakpoints")
        if any(b2 <= b1 for b1, b2 in zip(self.breakpoints, self.breakpoints[1:])):
            raise ConfigError("piecewise datum breakpoints must be strictly increasing")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(np.asarray(self.breakpoints), x, side="right")
        return np.asarray(self.values, dtype=float)[idx]

    def antiderivative(self, x):
        """Exact primitive of the datum, zero at the first breakpoint."""
        b = np.asarray(self.breakpoints, dtype=float)
        v = np.asarray(self.values, dtype=float)
        bases = np.concatenate(([0.0], np.cumsum(v[1:-1] * np.diff(b)))) if len(b) > 1 else np.array([0.0])
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(b, x, side="right")
        anchor = b[np.clip(idx - 1, 0, len(b) - 1)]
        anchor = np.where(idx == 0, b[0], anchor)
        base = np.where(idx == 0, 0.0, bases[np.clip(idx - 1, 0, len(bases) - 1)])
        return base + v[idx] * (x - anchor)

    def bounds(self, mesh: Optional[Mesh] = None) -> tuple[float, float]:
        return (float(min(self.values)), float(max(self.values)))


@dataclass(frozen=True)
class SmoothDatum:
    """Datum given by a callable; projected by 5-point Gauss quadrature per cell."""

    fn: Callable

    def __call__(self, x):
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)

    def bounds(self, mesh: Mesh) -> tuple[float, float]:
        xs = np.linspace(mesh.x_min, mesh.x_max, 16 * mesh.n_cells + 1)
        vals = self(xs)
        return (float(np.min(vals)), float(np.max(vals)))


def datum_constant(value: float) -> PiecewiseConstantDatum:
    return PiecewiseConstantDatum(breakpoints=(0.0,), values=(float(value), float(value)))


def datum_step(left: float, right: float, location: float = 0.0) -> PiecewiseConstantDatum:
    return PiecewiseConstantDatum(breakpoints=(float(location),), values=(float(left), float(right)))


def datum_bump(base: float, amplitude: float, center: float = 0.0, width: float = 1.0) -> SmoothDatum:
    from .profiles import bump

    if width <= 0:
        raise ConfigError("bump datum needs width > 0")
    return SmoothDatum(fn=lambda x: base + amplitude * bump((np.asarray(x, dtype=float) - center) / width))


def datum_from_table(xs, us) -> SmoothDatum:
    """Piecewise-linear interpolant through sampled points (flat extrapolation)."""
    xs = np.asarray(xs, dtype=float)
    us = np.asarray(us, dtype=float)
    if xs.ndim != 1 or xs.size < 2 or np.any(np.diff(xs) <= 0):
        raise ConfigError("file datum needs at least two strictly increasing x samples")
    return SmoothDatum(fn=lambda x: np.interp(np.asarray(x, dtype=float), xs, us))


def project_initial(datum, mesh: Mesh) -> GridState:
    """Cell averages of the datum: exact for piecewise-constant data, 5-point
    Gauss per cell otherwise."""
    if isinstance(datum, GridState):
        if datum.u.shape != (mesh.n_cells,):
            raise ConfigError("grid state does not match the mesh")
        return GridState(u=np.array(datum.u, dtype=float), time=datum.time, step_index=datum.step_index)
    if isinstance(datum, PiecewiseConstantDatum):
        edges = mesh.edges()
        prim = datum.antiderivative(edges)
        u = np.diff(prim) / mesh.dx
        return GridState(u=u, time=0.0)
    if not callable(datum):
        raise ConfigError(f"cannot project datum of type {type(datum).__name__}")
    xg = mesh.centers()[:, None] + 0.5 * mesh.dx * _GAUSS_NODES[None, :]
    vals = np.asarray(datum(xg), dtype=float)
    u = vals @ _GAUSS_WEIGHTS / 2.0
    return GridState(u=u, time=0.0)


# ---------------------------------------------------------------------------
# Time marching


@dataclass
class RunResult:
    mesh: Mesh
    model: FluxModel
    snapshots: list
    states: Optional[list]
    cfl: CflPolicy
    envelope: Envelope
    n_steps: int
    running_min: float
    running_max: float
    mass_initial: float
    mass_final: float
    boundary_net_outflow: float
    mass_drift: float

    @property
    def final(self) -> GridState:
        return self.snapshots[-1]


def run(
    model: FluxModel,
    mesh: Mesh,
    datum,
    t_end: float,
    snapshot_times=(),
    safety: float = 0.9,
    record_all: bool = False,
    datum_bounds: Optional[tuple[float, float]] = None,
    max_dt: Optional[float] = None,
    curve: Optional[CriticalCurve] = None,
) -> RunResult:
    """March the scheme to t_end with the step size fixed by the envelope.

    Snapshot times are hit exactly by shortening the step. record_all keeps
    every intermediate state (needed by per-step diagnostics).
    """
    if t_end < 0:
        raise ConfigError(f"t_end must be >= 0, got {t_end}")
    if curve is None:
        curve = CriticalCurve.build(model)
    state = project_initial(datum, mesh)
    if datum_bounds is None:
        if isinstance(datum, GridState):
            datum_bounds = (float(np.min(state.u)), float(np.max(state.u)))
        else:
            datum_bounds = datum.bounds(mesh)
    env = envelope(model, mesh, datum_bounds[0], datum_bounds[1], curve=curve)
    policy = cfl_dt(
        model, mesh, (env.lower_bound, env.upper_bound),
        safety=safety, curve=curve, max_dt=max_dt,
    )
    X = model.hetero_radius
    influence = policy.lipschitz * t_end
    if mesh.x_min > -X - influence or mesh.x_max < X + influence:
        warnings.warn(
            "window does not contain the influence cone of the heterogeneity "
            f"([-{X + influence:.3g}, {X + influence:.3g}]); boundary replication "
            "may contaminate the solution",
            stacklevel=2,
        )

    scheme = Scheme(model, mesh, policy.lipschitz)
    dt_nominal = policy.dt(mesh.dx)
    events = sorted({float(t) for t in snapshot_times if 0.0 < t < t_end})
    events.append(float(t_end))

    snapshots = []
    if t_end > 0 and any(abs(t) <= 1e-14 * max(1.0, t_end) for t in snapshot_times):
        snapshots.append(GridState(u=state.u.copy(), time=0.0, step_index=0))
    states = [GridState(u=state.u.copy(), time=0.0, step_index=0)] if record_all else None

    mass0 = float(np.sum(state.u)) * mesh.dx
    net_out = 0.0
    rmin = float(np.min(state.u))
    rmax = float(np.max(state.u))
    t = 0.0
    n_steps = 0
    tol_t = 1e-12 * max(1.0, t_end)
    for target in events:
        while t < target - tol_t:
            dt = min(dt_nominal, target - t)
            u_new, f_in, f_out = scheme.step_arrays(state.u, dt)
            net_out += dt * (f_out - f_in)
            t += dt
            n_steps += 1
            state = GridState(u=u_new, time=t, step_index=n_steps)
            rmin = min(rmin, float(np.min(u_new)))
            rmax = max(rmax, float(np.max(u_new)))
            if record_all:
                states.append(state)
        t = target
        snapshots.append(GridState(u=state.u.copy(), time=target, step_index=n_steps))

    mass_final = float(np.sum(state.u)) * mesh.dx
    scale = max(abs(mass0), abs(mass_final), float(np.sum(np.abs(snapshots[-1].u))) * mesh.dx, 1e-30)
    drift = abs(mass_final - (mass0 - net_out)) / scale
    return RunResult(
        mesh=mesh,
        model=model,
        snapshots=snapshots,
        states=states,
        cfl=policy,
        envelope=env,
        n_steps=n_steps,
        running_min=rmin,
        running_max=rmax,
        mass_initial=mass0,
        mass_final=mass_final,
        boundary_net_outflow=net_out,
        mass_drift=drift,
    )

"""Coupled field-particle-spin integrator."""

import csv
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import scipy.fft as sfft

from . import so3
from .body import BodyState, body_rhs
from .charge import ChargeProfile, charge_cloud
from .conservation import DiagnosticsRow, diagnostics_row
from .errors import NumericalBlowup
from .external import ExternalField
from .fields import FieldState, coulomb_init, current_from_cloud, maxwell_rhs
from .fields import read_field_snapshot, write_field_snapshot
from .grid import GridSpec

log = logging.getLogger(__name__)

BLOWUP = 1e12
# spectral Maxwell + RK4: |k|max dt ~ pi sqrt(3) dt / h must stay inside the
# RK4 stability interval (~2.8) with margin
CFL = 0.5


@dataclass
class SimConfig:
    grid: GridSpec = field(default_factory=lambda: GridSpec(32, 16.0))
    charge: ChargeProfile = field(default_factory=ChargeProfile)
    external: ExternalField = field(default_factory=ExternalField)
    q0: tuple = (0.0, 0.0, 0.0)
    v0: tuple = (0.0, 0.0, 0.0)
    omega0: tuple = (0.0, 0.0, 0.0)
    self_field: bool = True
    dt: float = 0.125
    t_end: float = 5.0
    stride: int = 1
    zero_field_start: bool = False
    output_prefix: str = None
    snapshot_every: int = 0
    save_trajectory: bool = False
    threads: int = 0
    # negative-control knobs, 1.0 in any physical run
    force_scale: float = 1.0
    torque_scale: float = 1.0
    current_scale: float = 1.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"time.dt must be positive, got {self.dt}")
        if self.dt > CFL * self.grid.h * (1 + 1e-12):
            raise ValueError(f"time.dt = {self.dt} exceeds {CFL} * h = {CFL * self.grid.h}")
        if self.t_end < 0:
            raise ValueError(f"time.t_end must be >= 0, got {self.t_end}")
        if self.stride < 1:
            raise ValueError("output.stride must be >= 1")

    @property
    def n_steps(self):
        return int(round(self.t_end / self.dt))

    @property
    def workers(self):
        return None if self.threads == 0 else self.threads

    def with_(self, **kw):
        return replace(self, **kw)


@dataclass
class SimState:
    t: float
    fields: FieldState
    body: BodyState

    def copy(self):
        return SimState(self.t, self.fields.copy(), self.body.copy())


@dataclass
class SimStateDerivative:
    dE: np.ndarray
    dB: np.ndarray
    dq: np.ndarray
    dv: np.ndarray
    dw: np.ndarray
    dR: np.ndarray


@dataclass
class Trajectory:
    """States sampled every ``stride`` steps plus one diagnostics row per step."""

    config: SimConfig
    samples: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    @property
    def sample_dt(self):
        return self.config.dt * self.config.stride

    @property
    def times(self):
        return np.array([s.t for s in self.samples])

    def save(self, path):
        np.savez_compressed(
            path,
            t=self.times,
            E=np.array([s.fields.E for s in self.samples]),
            B=np.array([s.fields.B for s in self.samples]),
            q=np.array([s.body.q for s in self.samples]),
            v=np.array([s.body.v for s in self.samples]),
            R=np.array([s.body.R for s in self.samples]),
            w=np.array([s.body.w for s in self.samples]),
            dt=self.config.dt, stride=self.config.stride,
        )

    @classmethod
    def load(cls, path, config):
        data = np.load(path)
        if not np.isclose(float(data["dt"]), config.dt) or int(data["stride"]) != config.stride:
            config = config.with_(dt=float(data["dt"]), stride=int(data["stride"]))
        traj = cls(config)
        for i, t in enumerate(data["t"]):
            traj.samples.append(SimState(
                float(t), FieldState(data["E"][i], data["B"][i]),
                BodyState(data["q"][i], data["v"][i], data["R"][i], data["w"][i])))
        return traj


def initial_state(cfg):
    q0 = np.asarray(cfg.q0, dtype=float)
    if cfg.zero_field_start:
        fs = FieldState.zeros(cfg.grid)
    else:
        fs = coulomb_init(cfg.charge, cfg.grid, q0)
    body = BodyState(q0, np.asarray(cfg.v0, dtype=float), np.eye(3), np.asarray(cfg.omega0, dtype=float))
    return SimState(0.0, fs, body)


def coupled_rhs(s, cfg):
    """Time derivative of the full state.

    The Maxwell source is the deposited current minus its mean: the uniform
    background that neutralizes the box is taken to co-move with the charge,
    so the k = 0 mode of E stays pinned at zero.
    """
    b = s.body
    cloud = charge_cloud(cfg.charge, cfg.grid, b.q)
    j = cfg.current_scale * current_from_cloud(cloud, b.v, b.w)
    j -= j.mean(axis=(1, 2, 3), keepdims=True)
    dE, dB = maxwell_rhs(s.fields, j, cfg.grid)
    self_fields = s.fields if cfg.self_field else None
    dq, dv, dw, dR = body_rhs(self_fields, cfg.external, cfg.charge, cfg.grid, b, s.t, cloud,
                              cfg.force_scale, cfg.torque_scale)
    return SimStateDerivative(dE, dB, dq, dv, dw, dR)


def _advance(s, k, h):
    """Euler sub-step used for RK stages; R is not needed by the right-hand side."""
    return SimState(
        s.t + h,
        FieldState(s.fields.E + h * k.dE, s.fields.B + h * k.dB),
        BodyState(s.body.q + h * k.dq, s.body.v + h * k.dv, s.body.R, s.body.w + h * k.dw),
    )


def step_rk4(s, dt, cfg):
    """Classical RK4 on (E, B, q, v, w); R advanced by exp of the RK4-averaged w."""
    k1 = coupled_rhs(s, cfg)
    s2 = _advance(s, k1, dt / 2)
    k2 = coupled_rhs(s2, cfg)
    s3 = _advance(s, k2, dt / 2)
    k3 = coupled_rhs(s3, cfg)
    s4 = _advance(s, k3, dt)
    k4 = coupled_rhs(s4, cfg)

    def comb(a, b, c, d):
        return (a + 2.0 * b + 2.0 * c + d) / 6.0

    E = s.fields.E + dt * comb(k1.dE, k2.dE, k3.dE, k4.dE)
    B = s.fields.B + dt * comb(k1.dB, k2.dB, k3.dB, k4.dB)
    q = s.body.q + dt * comb(k1.dq, k2.dq, k3.dq, k4.dq)
    v = s.body.v + dt * comb(k1.dv, k2.dv, k3.dv, k4.dv)
    w = s.body.w + dt * comb(k1.dw, k2.dw, k3.dw, k4.dw)
    out = SimState(s.t + dt, FieldState(E, B), BodyState(q, v, s.body.R, w))
    _check_finite(out)
    w_avg = comb(s.body.w, s2.body.w, s3.body.w, s4.body.w)
    out.body.R = so3.reorthonormalize(so3.exp_map(w_avg, dt) @ s.body.R)
    return out


def _check_finite(s):
    for name, arr in (("E", s.fields.E), ("B", s.fields.B), ("q", s.body.q),
                      ("v", s.body.v), ("w", s.body.w)):
        m = float(np.max(np.abs(arr)))
        if not np.isfinite(m) or m > BLOWUP:
            raise NumericalBlowup(f"{name} reached {m:.3e} at t = {s.t:.6g}")


def _row(s, cfg):
    # decoupled runs: the evolved field is a passive spectator, not part of the system
    if not cfg.self_field:
        s = SimState(s.t, None, s.body)
    return diagnostics_row(s, cfg.external, cfg.charge, cfg.grid, origin=cfg.q0)


def run(cfg, keep_fields=True, resume=None, on_step=None):
    """Integrate from t = 0 (or from ``resume``, a (step, SimState) pair) to t_end.

    Returns a :class:`Trajectory`.  Every ``stride``-th state is sampled (its
    fields only if ``keep_fields``); a diagnostics row is recorded every step.
    If ``cfg.output_prefix`` is set the diagnostics CSV, snapshots and
    (optionally) the trajectory archive are written, also when a step fails.
    """
    traj = Trajectory(cfg)
    if resume is None:
        step0, s = 0, initial_state(cfg)
    else:
        step0, s = resume
        s = s.copy()
    n_steps = cfg.n_steps

    def record(step, s):
        traj.rows.append(_row(s, cfg))
        if step % cfg.stride == 0:
            traj.samples.append(s if keep_fields else SimState(s.t, None, s.body))
        if cfg.output_prefix and cfg.snapshot_every and step % cfg.snapshot_every == 0:
            write_snapshot(s, step, cfg)
        if on_step is not None:
            on_step(step, s)

    try:
        with sfft.set_workers(cfg.workers or 1):
            record(step0, s)
            for step in range(step0 + 1, n_steps + 1):
                # t from the step count keeps sample times exactly uniform
                s = step_rk4(s, cfg.dt, cfg)
                s.t = step * cfg.dt
                record(step, s)
    finally:
        if cfg.output_prefix:
            write_csv(traj.rows, f"{cfg.output_prefix}_diagnostics.csv")
            if cfg.save_trajectory and keep_fields:
                traj.save(f"{cfg.output_prefix}_trajectory.npz")
    return traj


def write_csv(rows, path):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(DiagnosticsRow.CSV_HEADER)
        for r in rows:
            wr.writerow([repr(float(x)) for x in r.as_tuple()])


def write_snapshot(s, step, cfg):
    """Field dump plus a text sidecar holding t and the body state exactly."""
    prefix = cfg.output_prefix
    write_field_snapshot(s.fields, cfg.grid, prefix, step)
    b = s.body
    lines = [f"step {step}", f"t {s.t!r}"]
    for name, arr in (("q", b.q), ("v", b.v), ("w", b.w), ("R", b.R.ravel())):
        lines.append(name + " " + " ".join(repr(float(x)) for x in arr))
    Path(f"{prefix}_body_{step}.txt").write_text("\n".join(lines) + "\n")


def read_snapshot(prefix, step):
    """(step, SimState) from :func:`write_snapshot` output."""
    n, L, fs = read_field_snapshot(prefix, step)
    vals = {}
    for line in Path(f"{prefix}_body_{step}.txt").read_text().splitlines():
        key, *rest = line.split()
        vals[key] = [float(x) for x in rest]
    body = BodyState(vals["q"], vals["v"], np.array(vals["R"]).reshape(3, 3), vals["w"])
    return int(vals["step"][0]), SimState(vals["t"][0], fs, body)

"""Wrench-driven end-effector pose control for the leaves of the tree.

Each leaf l gets a twist-shaped input ``U_l`` that linearizes its pose error
dynamics; ``swap(U_l)`` turns it into a wrench applied at the leaf tip, and the
backward pass at zero motion turns those tip wrenches plus gravity into joint
wrenches.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import dq
from .composition import ForwardPass, SensorSource, dmc, dmc_forward_recursion, n_backward
from .dq import ZERO, DualQuaternion
from .errors import DimensionMismatch, ParseError, ValidationError
from .robot import JointKind, RobotTree, joint_slices
from .serial_ne import TwistState


@dataclass(frozen=True)
class LeafTarget:
    leaf: int
    x_d: DualQuaternion = dq.ONE
    xi_d: DualQuaternion = ZERO  # in the end-effector frame
    xi_d_dot: DualQuaternion = ZERO


@dataclass(frozen=True)
class ControlGains:
    kp: float
    kv: float

    def __post_init__(self):
        if not (self.kp > 0 and self.kv > 0 and math.isfinite(self.kp) and math.isfinite(self.kv)):
            raise ValidationError("controller gains must be positive and finite")


@dataclass
class ErrorTrajectory:
    t: np.ndarray
    per_leaf: np.ndarray  # (steps, leaves) norms of vec6(log x_err)
    total: np.ndarray


@dataclass
class ControlScenario:
    gains: ControlGains
    dt: float
    T: float
    targets: list = field(default_factory=list)
    realization: str = "log"


def _hemisphere(x):
    return -x if x.c[0] < 0.0 else x


def pose_error(x, x_d):
    """x_err = conj(x_d) x, the current pose seen from the desired one."""
    return dq.mul(dq.conj(x_d), x)


def error_log(x_err):
    return dq.log(_hemisphere(x_err))


def control_input_U(x_err, xi_err, target: LeafTarget, gains: ControlGains):
    """-kp log(x_err) - kv xi_err + Ad(x_err*) xi_d_dot + (Ad(x_err*) xi_d) x xi_err."""
    xc = dq.conj(x_err)
    u = -gains.kp * error_log(x_err) - gains.kv * xi_err
    return u + dq.adjoint(xc, target.xi_d_dot) + dq.cross(dq.adjoint(xc, target.xi_d), xi_err)


def stack_Ze(Us: Sequence) -> list:
    return [dq.swap(u) for u in Us]


def end_effector_pose(tree: RobotTree, fp: ForwardPass, leaf: int):
    fr = fp.frames[leaf]
    return dq.mul(fr.base_world, fr.chain.link_in_base[-1])


def joint_wrench_input(tree: RobotTree, fp: ForwardPass, Z_e: Mapping, sensors: SensorSource | None = None,
                       gravity=None) -> dict:
    """Joint wrenches at zero motion with tip wrenches ``Z_e`` (leaf id -> wrench)."""
    zero = {i: TwistState.zeros(tree.subsystems[i].n) for i in fp.frames}
    return n_backward(tree, fp, sensors, Z_e, gravity, twists=zero).gammas


def project_generalized(gamma: Sequence, links) -> np.ndarray:
    """Joint-space forces: each joint wrench projected on its motion directions."""
    if len(gamma) != len(links):
        raise DimensionMismatch(f"{len(gamma)} wrenches for {len(links)} joints")
    out = []
    for w, l in zip(gamma, links):
        c = w.c
        f, m = c[1:4], c[5:8]
        k = l.joint.kind
        if k is JointKind.REVOLUTE:
            out.append(m[2])
        elif k is JointKind.PRISMATIC:
            out.append(f[2])
        elif k is JointKind.HELICAL:
            out.append(m[2] + l.joint.pitch * f[2])
        elif k is JointKind.CYLINDRICAL:
            out.extend((m[2], f[2]))
        elif k is JointKind.SPHERICAL:
            out.extend(m)
        elif k is JointKind.PLANAR:
            out.extend((f[0], f[1], m[2]))
        else:
            out.extend(f)
            out.extend(m)
    return np.array(out, dtype=float)


def generalized_forces(tree: RobotTree, gammas: Mapping) -> np.ndarray:
    """Stacked generalized forces in ascending subsystem id."""
    parts = [project_generalized(gammas[i], tree.subsystems[i].links) for i in sorted(gammas)]
    return np.concatenate(parts) if parts else np.zeros(0)


def decompose(tree: RobotTree, Q, Qd, Qdd, sensors: SensorSource | None = None):
    """Split the joint wrenches into inertial, velocity-product and gravity parts.

    Gamma_M = N(q, 0, qdd; g=0), Gamma_C = N(q, qd, 0; g=0), Gamma_g = N(q, 0, 0).
    Returns (Gamma_M, Gamma_C, Gamma_g, Gamma) as dicts of wrench lists.
    """
    zero = {i: np.zeros_like(np.asarray(v, dtype=float)) for i, v in Q.items()}
    g0 = (0.0, 0.0, 0.0)
    gm = dmc(tree, Q, zero, Qdd, sensors, gravity=g0).gammas
    gc = dmc(tree, Q, Qd, zero, sensors, gravity=g0).gammas
    gg = dmc(tree, Q, zero, zero, sensors).gammas
    full = dmc(tree, Q, Qd, Qdd, sensors).gammas
    return gm, gc, gg, full


# --- closed-loop error dynamics --------------------------------------------

def _rk4(f, y, dt):
    k1 = f(y)
    k2 = f([a + (0.5 * dt) * b for a, b in zip(y, k1)])
    k3 = f([a + (0.5 * dt) * b for a, b in zip(y, k2)])
    k4 = f([a + dt * b for a, b in zip(y, k3)])
    return [a + (dt / 6.0) * (b + 2.0 * c + 2.0 * d + e) for a, b, c, d, e in zip(y, k1, k2, k3, k4)]


def _has_feedforward(t: LeafTarget):
    return any(t.xi_d.c) or any(t.xi_d_dot.c)


def integrate_error_dynamics(x0: Sequence, xi0: Sequence, targets: Sequence[LeafTarget],
                             gains: ControlGains, dt: float, T: float,
                             realization: str = "log") -> ErrorTrajectory:
    """Integrate the closed-loop pose error of every leaf with RK4.

    ``realization="log"`` (default) takes y = log(x_err) and dy/dt = xi_err as
    the second-order state, with d2y/dt2 = U, so the loop is
    y'' + kv y' + kp y = 0 whenever the desired motion is zero.
    ``realization="twist"`` integrates xi_err' = U together with
    x_err' = x_err xi_err / 2, renormalising x_err after every step.
    """
    if not dt > 0 or not T > 0:
        raise ValueError("dt and T must be positive")
    if not len(x0) == len(xi0) == len(targets):
        raise DimensionMismatch("one initial error and velocity per target")
    steps = int(round(T / dt))
    L = len(targets)
    norms = np.zeros((steps + 1, L))

    if realization == "log":
        state = []
        for x, xi in zip(x0, xi0):
            state += [error_log(x), xi]

        def f(s):
            out = []
            for l, tgt in enumerate(targets):
                y, yd = s[2 * l], s[2 * l + 1]
                if _has_feedforward(tgt):
                    u = control_input_U(dq.exp_pose(y), yd, tgt, gains)
                else:
                    u = -gains.kp * y - gains.kv * yd
                out += [yd, u]
            return out

        def record(s, k):
            for l in range(L):
                norms[k, l] = np.linalg.norm(dq.vec6(error_log(dq.exp_pose(s[2 * l]))))
    elif realization == "twist":
        state = []
        for x, xi in zip(x0, xi0):
            state += [x, xi]

        def f(s):
            out = []
            for l, tgt in enumerate(targets):
                x, xi = s[2 * l], s[2 * l + 1]
                out += [0.5 * dq.mul(x, xi), control_input_U(dq.normalize(x), xi, tgt, gains)]
            return out

        def record(s, k):
            for l in range(L):
                norms[k, l] = np.linalg.norm(dq.vec6(error_log(s[2 * l])))
    else:
        raise ValueError(f"unknown realization {realization!r}")

    record(state, 0)
    for k in range(1, steps + 1):
        state = _rk4(f, state, dt)
        if realization == "twist":
            for l in range(L):
                state[2 * l] = dq.normalize(state[2 * l])
        record(state, k)
    t = np.arange(steps + 1) * dt
    return ErrorTrajectory(t, norms, np.sqrt(np.sum(norms ** 2, axis=1)))


def initial_errors(tree: RobotTree, targets: Sequence[LeafTarget], Q, sensors=None):
    """Pose errors of the leaves at configuration Q (zero velocities)."""
    zero = {i: np.zeros_like(np.asarray(v, dtype=float)) for i, v in Q.items()}
    fp = dmc_forward_recursion(tree, Q, zero, zero, sensors)
    return [pose_error(end_effector_pose(tree, fp, t.leaf), t.x_d) for t in targets], fp


def parse_control(doc: Mapping, tree: RobotTree | None = None) -> ControlScenario:
    """Read the ``[control]`` table of a description document."""
    c = doc.get("control")
    if not isinstance(c, Mapping):
        raise ParseError("no [control] section")
    try:
        gains = ControlGains(float(c["kp"]), float(c["kv"]))
        dt, T = float(c.get("dt", 1e-3)), float(c.get("T", 10.0))
    except KeyError as exc:
        raise ParseError(f"control: missing {exc.args[0]!r}") from exc
    targets = []
    for k, td in enumerate(c.get("targets", [])):
        try:
            leaf = int(td["leaf"])
            xd = DualQuaternion(*[float(v) for v in td["x_d"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"control.targets[{k}]: {exc}") from exc
        if not dq.is_unit(xd):
            raise ValidationError(f"control.targets[{k}].x_d is not a unit dual quaternion")
        xi_d = dq.from_vec6(td["xi_d"]) if "xi_d" in td else ZERO
        xi_dd = dq.from_vec6(td["xi_d_dot"]) if "xi_d_dot" in td else ZERO
        if tree is not None and (leaf not in tree.subsystems or tree.children(leaf)):
            raise ValidationError(f"control target {leaf} is not a leaf of the tree")
        targets.append(LeafTarget(leaf, xd, xi_d, xi_dd))
    return ControlScenario(gains, dt, T, targets, str(c.get("realization", "log")))

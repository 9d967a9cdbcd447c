"""Newton-Euler inverse dynamics of one serial chain in dual quaternions.

Notation in the code: ``x_a_b`` is the pose of frame a expressed in frame b,
``c_i`` is the CoM frame of link i, and frame 0 is the chain base.  Twists are
CoM twists relative to the inertial frame, in CoM coordinates.  ``gamma[i]``
is the wrench transmitted through joint i, in frame i-1 with the moment taken
about the origin of frame i-1.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import dq
from .dq import DualQuaternion, ZERO
from .errors import DimensionMismatch
from .robot import DEFAULT_GRAVITY, JointKind, Link, Subsystem, joint_slices, link_pose


@dataclass
class ChainState:
    q: np.ndarray
    qdot: np.ndarray
    qddot: np.ndarray

    def __post_init__(self):
        self.q = np.atleast_1d(np.asarray(self.q, dtype=float))
        self.qdot = np.atleast_1d(np.asarray(self.qdot, dtype=float))
        self.qddot = np.atleast_1d(np.asarray(self.qddot, dtype=float))
        if not self.q.shape == self.qdot.shape == self.qddot.shape:
            raise DimensionMismatch("q, qdot and qddot must have the same length")


@dataclass
class TwistState:
    twists: list
    twist_derivatives: list

    def __len__(self):
        return len(self.twists)

    @classmethod
    def zeros(cls, n):
        return cls([ZERO] * n, [ZERO] * n)

    def __add__(self, other):
        return TwistState(dq.add_vectors(self.twists, other.twists),
                          dq.add_vectors(self.twist_derivatives, other.twist_derivatives))


@dataclass(frozen=True)
class BaseSeed:
    twist: DualQuaternion = ZERO
    twist_derivative: DualQuaternion = ZERO


@dataclass
class ChainFrames:
    """Per-link poses for one configuration (lists indexed from 0 for link 1)."""

    link: list  # x_i^{i-1}
    com_local: list  # x_{c_i}^{i-1}
    link_in_base: list  # x_i^0
    com_in_base: list  # x_{c_i}^0
    com_prev: list  # x_{c_{i-1}}^{c_i}, with c_0 the base frame


def links_of(chain) -> Sequence[Link]:
    return chain.links if isinstance(chain, Subsystem) else chain


def seed_base(twist=ZERO, twist_derivative=ZERO) -> BaseSeed:
    """Start values for a chain mounted on a moving frame."""
    dq.check_pure(twist, "seed twist")
    dq.check_pure(twist_derivative, "seed twist derivative")
    return BaseSeed(twist, twist_derivative)


def chain_frames(chain, q) -> ChainFrames:
    links = links_of(chain)
    q = np.atleast_1d(np.asarray(q, dtype=float))
    sl = joint_slices(links)
    if q.size != (sl[-1].stop if sl else 0):
        raise DimensionMismatch(f"chain needs {sl[-1].stop} joint values, got {q.size}")
    link, com_local, lib, cib, prev = [], [], [], [], []
    acc = dq.ONE
    prev_com = None
    for l, s in zip(links, sl):
        x = link_pose(l.params, l.joint, q[s])
        com_t = dq.translation(l.params.com)
        xc = dq.mul(x, com_t)
        inv = dq.conj(xc)
        link.append(x)
        com_local.append(xc)
        prev.append(inv if prev_com is None else dq.mul(inv, prev_com))
        cib.append(dq.mul(acc, xc))
        acc = dq.mul(acc, x)
        lib.append(acc)
        prev_com = com_t
    return ChainFrames(link, com_local, lib, cib, prev)


def joint_twist(joint, qdot_i, qddot_i, axis=(0.0, 0.0, 1.0)):
    """Relative twist of link i w.r.t. frame i-1, in frame i-1, and its derivative.

    For multi-DoF joints the rates are twist components in frame i-1:
    spherical (wx, wy, wz); planar (vx, vy, w); cylindrical (w, v);
    six-DoF (vx, vy, vz, wx, wy, wz).
    """
    kind = joint.kind
    qd = np.atleast_1d(np.asarray(qdot_i, dtype=float))
    qdd = np.atleast_1d(np.asarray(qddot_i, dtype=float))
    if qd.size != joint.dof or qdd.size != joint.dof:
        raise DimensionMismatch(f"{kind.value} joint needs {joint.dof} rates")
    lx, ly, lz = axis
    if kind is JointKind.REVOLUTE:
        return (dq.pure((qd[0] * lx, qd[0] * ly, qd[0] * lz)),
                dq.pure((qdd[0] * lx, qdd[0] * ly, qdd[0] * lz)))
    if kind is JointKind.PRISMATIC:
        return (dq.pure(dual=(qd[0] * lx, qd[0] * ly, qd[0] * lz)),
                dq.pure(dual=(qdd[0] * lx, qdd[0] * ly, qdd[0] * lz)))
    if kind is JointKind.HELICAL:
        h = joint.pitch
        return (dq.pure((qd[0] * lx, qd[0] * ly, qd[0] * lz), (h * qd[0] * lx, h * qd[0] * ly, h * qd[0] * lz)),
                dq.pure((qdd[0] * lx, qdd[0] * ly, qdd[0] * lz), (h * qdd[0] * lx, h * qdd[0] * ly, h * qdd[0] * lz)))
    if kind is JointKind.CYLINDRICAL:
        return (dq.pure((qd[0] * lx, qd[0] * ly, qd[0] * lz), (qd[1] * lx, qd[1] * ly, qd[1] * lz)),
                dq.pure((qdd[0] * lx, qdd[0] * ly, qdd[0] * lz), (qdd[1] * lx, qdd[1] * ly, qdd[1] * lz)))
    if kind is JointKind.SPHERICAL:
        return dq.pure(qd[:3]), dq.pure(qdd[:3])
    if kind is JointKind.PLANAR:
        return (dq.pure((0.0, 0.0, qd[2]), (qd[0], qd[1], 0.0)),
                dq.pure((0.0, 0.0, qdd[2]), (qdd[0], qdd[1], 0.0)))
    return dq.pure(qd[3:6], qd[0:3]), dq.pure(qdd[3:6], qdd[0:3])


def forward_recursion(chain, state: ChainState, seed: BaseSeed | None = None,
                      frames: ChainFrames | None = None) -> TwistState:
    """CoM twists and their derivatives, from the base outwards."""
    links = links_of(chain)
    if frames is None:
        frames = chain_frames(links, state.q)
    sl = joint_slices(links)
    if state.qdot.size != sl[-1].stop:
        raise DimensionMismatch(f"chain needs {sl[-1].stop} joint rates, got {state.qdot.size}")
    xi = seed.twist if seed else ZERO
    xid = seed.twist_derivative if seed else ZERO
    twists, derivs = [], []
    adjoint, cross = dq.adjoint, dq.cross
    for k, (l, s) in enumerate(zip(links, sl)):
        jt, jtd = joint_twist(l.joint, state.qdot[s], state.qddot[s])
        x_prev = frames.com_prev[k]
        x_joint = dq.conj(frames.com_local[k])  # x_{i-1}^{c_i}
        t1 = adjoint(x_prev, xi)
        t2 = adjoint(x_joint, jt)
        xi = t1 + t2
        xid = adjoint(x_prev, xid) + adjoint(x_joint, jtd) + cross(-t2, t1)
        twists.append(xi)
        derivs.append(xid)
    return TwistState(twists, derivs)


def _inertia_apply(I, w):
    # columns i_x, i_y, i_z
    cx, cy, cz = I
    return (cx[0] * w[0] + cy[0] * w[1] + cz[0] * w[2],
            cx[1] * w[0] + cy[1] * w[1] + cz[1] * w[2],
            cx[2] * w[0] + cy[2] * w[1] + cz[2] * w[2])


def _c3(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def link_wrench(params, twist, twist_derivative, g_c=(0.0, 0.0, 0.0)) -> DualQuaternion:
    """Wrench needed at the CoM: Newton's and Euler's equations, minus gravity."""
    c, cd = twist.c, twist_derivative.c
    w, v = c[1:4], c[5:8]
    wd, vd = cd[1:4], cd[5:8]
    m = params.mass
    wv = _c3(w, v)
    Iw = _inertia_apply(params.inertia, w)
    Iwd = _inertia_apply(params.inertia, wd)
    wIw = _c3(w, Iw)
    return dq.pure((m * (vd[0] + wv[0] - g_c[0]), m * (vd[1] + wv[1] - g_c[1]), m * (vd[2] + wv[2] - g_c[2])),
                   (Iwd[0] + wIw[0], Iwd[1] + wIw[1], Iwd[2] + wIw[2]))


def backward_recursion(chain, frames: ChainFrames, Xi: TwistState, tip_wrench=ZERO,
                       gravity=DEFAULT_GRAVITY, base_pose=dq.ONE) -> list:
    """Joint wrenches from the tip inwards.

    ``tip_wrench`` acts beyond the last link and is expressed in frame k.
    ``base_pose`` is the world pose of frame 0; only its rotation matters, to
    express gravity in each CoM frame.
    """
    links = links_of(chain)
    n = len(links)
    if len(Xi.twists) != n or len(Xi.twist_derivatives) != n:
        raise DimensionMismatch(f"twist state has {len(Xi.twists)} entries for {n} links")
    dq.check_pure(tip_wrench, "tip wrench")
    g_world = dq.pure(gravity)
    g_base = dq.adjoint(dq.conj(dq.get_rotation(base_pose)), g_world)
    gamma = [None] * n
    nxt = tip_wrench
    for k in range(n - 1, -1, -1):
        rot = dq.get_rotation(frames.com_in_base[k])
        g_c = dq.adjoint(dq.conj(rot), g_base).c[1:4]
        zeta = link_wrench(links[k].params, Xi.twists[k], Xi.twist_derivatives[k], g_c)
        nxt = dq.adjoint(frames.com_local[k], zeta) + dq.adjoint(frames.link[k], nxt)
        gamma[k] = nxt
    return gamma


def wrench_function(chain, frames: ChainFrames, Xi: TwistState, tip_wrench=ZERO,
                    gravity=DEFAULT_GRAVITY, base_pose=dq.ONE) -> list:
    """The subsystem wrench map: total CoM twists to joint wrenches."""
    return backward_recursion(chain, frames, Xi, tip_wrench, gravity, base_pose)


def newton_euler(chain, state: ChainState, tip_wrench=ZERO, gravity=DEFAULT_GRAVITY,
                 base_pose=dq.ONE, seed: BaseSeed | None = None) -> list:
    frames = chain_frames(chain, state.q)
    Xi = forward_recursion(chain, state, seed, frames)
    return backward_recursion(chain, frames, Xi, tip_wrench, gravity, base_pose)

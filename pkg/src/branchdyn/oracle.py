"""Reference inverse dynamics over the flattened link tree.

This path shares no traversal or frame code with the composition module.  It
uses 4x4 homogeneous matrices for poses and 6D spatial vectors expressed in
world coordinates about the world origin: motions as (w, v), forces as (n, f).
Gravity enters as a fictitious base acceleration.  Dual quaternions appear only
at the boundary (reading offsets, returning connection readings).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from . import dq
from .composition import ConnectionReading
from .errors import BlackBoxPresent, DimensionMismatch
from .robot import JointKind, RobotTree


@dataclass(frozen=True)
class FlatLink:
    parent: int  # 1-based index of the parent link, 0 for the ground
    joint: object
    params: object
    pre: np.ndarray  # fixed transform from the parent link frame to this joint's frame
    subsystem: int
    local_index: int  # 1-based within its subsystem
    q_slice: slice  # into the stacked joint vector (ascending subsystem id)


@dataclass
class FlatTree:
    links: list
    dof: int
    gravity: np.ndarray

    @property
    def parents(self):
        return [l.parent for l in self.links]

    def first_link(self, subsystem) -> int:
        for k, l in enumerate(self.links, 1):
            if l.subsystem == subsystem and l.local_index == 1:
                return k
        raise KeyError(subsystem)

    def last_link(self, subsystem) -> int:
        idx = [k for k, l in enumerate(self.links, 1) if l.subsystem == subsystem]
        if not idx:
            raise KeyError(subsystem)
        return idx[-1]


@dataclass
class OracleResult:
    wrenches: np.ndarray  # (n, 6) joint wrenches (f, n) in each joint frame, flat order
    generalized: np.ndarray  # stacked generalized forces, ascending subsystem id
    flat: FlatTree

    def by_subsystem(self) -> dict:
        out = {}
        for k, l in enumerate(self.flat.links):
            out.setdefault(l.subsystem, []).append(self.wrenches[k])
        return {i: np.array(v) for i, v in out.items()}


# --- small matrix helpers ---------------------------------------------------

def skew(v):
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def rot_x(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_z(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rodrigues(v):
    v = np.asarray(v, dtype=float)
    th = np.linalg.norm(v)
    if th < 1e-300:
        return np.eye(3)
    K = skew(v / th)
    return np.eye(3) + np.sin(th) * K + (1.0 - np.cos(th)) * K @ K


def homog(R=None, p=None):
    T = np.eye(4)
    if R is not None:
        T[:3, :3] = R
    if p is not None:
        T[:3, 3] = p
    return T


def dh_matrix(a, alpha, d, theta):
    """Rz(theta) Tz(d) Tx(a) Rx(alpha)."""
    ct, st, ca, sa = np.cos(theta), np.sin(theta), np.cos(alpha), np.sin(alpha)
    return np.array([[ct, -st * ca, st * sa, a * ct],
                     [st, ct * ca, -ct * sa, a * st],
                     [0.0, sa, ca, d],
                     [0.0, 0.0, 0.0, 1.0]])


def quat_to_matrix(w, x, y, z):
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def dq_to_matrix(x) -> np.ndarray:
    c = np.asarray(x.c if hasattr(x, "c") else x, dtype=float)
    r, d = c[:4], c[4:]
    R = quat_to_matrix(*r)
    # p = 2 d r*
    rw, rv = r[0], -r[1:]
    dw, dv = d[0], d[1:]
    p = 2.0 * (dw * rv + rw * dv + np.cross(dv, rv))
    return homog(R, p)


def matrix_to_dq(T):
    R = T[:3, :3]
    tr = np.trace(R)
    if tr > 0:
        s = 2.0 * np.sqrt(tr + 1.0)
        q = (0.25 * s, (R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s)
    else:
        i = int(np.argmax(np.diag(R)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = 2.0 * np.sqrt(1.0 + R[i, i] - R[j, j] - R[k, k])
        v = [0.0, 0.0, 0.0]
        v[i] = 0.25 * s
        v[j] = (R[j, i] + R[i, j]) / s
        v[k] = (R[k, i] + R[i, k]) / s
        q = ((R[k, j] - R[j, k]) / s, *v)
    return dq.pose(dq.Quaternion(*q), T[:3, 3])


def joint_matrix(joint, q):
    k = joint.kind
    if k is JointKind.REVOLUTE:
        return homog(rot_z(q[0]))
    if k is JointKind.PRISMATIC:
        return homog(p=[0.0, 0.0, q[0]])
    if k is JointKind.HELICAL:
        return homog(rot_z(q[0]), [0.0, 0.0, joint.pitch * q[0]])
    if k is JointKind.CYLINDRICAL:
        return homog(rot_z(q[0]), [0.0, 0.0, q[1]])
    if k is JointKind.SPHERICAL:
        return homog(rodrigues(q[:3]))
    if k is JointKind.PLANAR:
        return homog(rot_z(q[2]), [q[0], q[1], 0.0])
    return homog(rodrigues(q[3:6]), q[0:3])


def motion_subspace(joint) -> np.ndarray:
    """Columns are unit joint motions (w; v) in the joint's parent frame."""
    e = np.eye(3)
    z = np.zeros(3)
    k = joint.kind
    if k is JointKind.REVOLUTE:
        cols = [np.r_[e[2], z]]
    elif k is JointKind.PRISMATIC:
        cols = [np.r_[z, e[2]]]
    elif k is JointKind.HELICAL:
        cols = [np.r_[e[2], joint.pitch * e[2]]]
    elif k is JointKind.CYLINDRICAL:
        cols = [np.r_[e[2], z], np.r_[z, e[2]]]
    elif k is JointKind.SPHERICAL:
        cols = [np.r_[e[i], z] for i in range(3)]
    elif k is JointKind.PLANAR:
        cols = [np.r_[z, e[0]], np.r_[z, e[1]], np.r_[e[2], z]]
    else:
        cols = [np.r_[z, e[i]] for i in range(3)] + [np.r_[e[i], z] for i in range(3)]
    return np.array(cols).T


def motion_transform(T):
    """Coordinates of a motion vector: local frame about its origin -> parent frame about its origin."""
    R, p = T[:3, :3], T[:3, 3]
    X = np.zeros((6, 6))
    X[:3, :3] = R
    X[3:, :3] = skew(p) @ R
    X[3:, 3:] = R
    return X


def crm(v):
    w, u = skew(v[:3]), skew(v[3:])
    X = np.zeros((6, 6))
    X[:3, :3] = w
    X[3:, :3] = u
    X[3:, 3:] = w
    return X


def crf(v):
    return -crm(v).T


def spatial_inertia(m, c, Ic):
    C = skew(c)
    I6 = np.zeros((6, 6))
    I6[:3, :3] = Ic + m * C @ C.T
    I6[:3, 3:] = m * C
    I6[3:, :3] = m * C.T
    I6[3:, 3:] = m * np.eye(3)
    return I6


# --- flattening -------------------------------------------------------------

def flatten(tree: RobotTree) -> FlatTree:
    if tree.has_black_box():
        raise BlackBoxPresent("the reference solver needs every subsystem modeled")
    offsets, k = {}, 0
    for i in tree.modeled_ids():
        offsets[i] = k
        k += tree.subsystems[i].dof
    links, last_index = [], {}
    queue = deque([tree.root])
    while queue:
        i = queue.popleft()
        sub = tree.subsystems[i]
        base = len(links)
        qk = offsets[i]
        for m, l in enumerate(sub.links, 1):
            if m == 1:
                if i == tree.root:
                    parent, pre = 0, dq_to_matrix(tree.base_pose)
                else:
                    cp = tree.connections[i]
                    parent = last_index[tree.parent[i]] + cp.host_link
                    pre = dq_to_matrix(cp.offset)
            else:
                parent, pre = base + m - 1, np.eye(4)
            links.append(FlatLink(parent, l.joint, l.params, pre, i, m, slice(qk, qk + l.joint.dof)))
            qk += l.joint.dof
        last_index[i] = base
        queue.extend(sorted(tree.children(i)))
    return FlatTree(links, k, np.asarray(tree.gravity, dtype=float))


# --- dynamics ---------------------------------------------------------------

def _pass(flat: FlatTree, q, qd, qdd, gravity, tips):
    q, qd, qdd = (np.asarray(v, dtype=float) for v in (q, qd, qdd))
    if not q.shape == qd.shape == qdd.shape == (flat.dof,):
        raise DimensionMismatch(f"state vectors must have length {flat.dof}")
    g = flat.gravity if gravity is None else np.asarray(gravity, dtype=float)
    a0 = np.r_[np.zeros(3), -g]
    n = len(flat.links)
    T_prev, T_link = [None] * n, [None] * n
    v, a, f = np.zeros((n, 6)), np.zeros((n, 6)), np.zeros((n, 6))
    S_all = [None] * n
    for k, L in enumerate(flat.links):
        if L.parent == 0:
            Tp, vp, ap = L.pre, np.zeros(6), a0
        else:
            j = L.parent - 1
            Tp, vp, ap = T_link[j] @ L.pre, v[j], a[j]
        s = L.q_slice
        T_prev[k] = Tp
        p = L.params
        T_link[k] = Tp @ joint_matrix(L.joint, q[s]) @ dh_matrix(p.a, p.alpha, p.d, p.theta)
        X = motion_transform(Tp)
        S = motion_subspace(L.joint)
        S_all[k] = S
        vJ = X @ S @ qd[s]
        v[k] = vp + vJ
        a[k] = ap + X @ S @ qdd[s] + crm(vp) @ vJ
        R = T_link[k][:3, :3]
        c = T_link[k][:3, 3] + R @ np.asarray(p.com)
        I6 = spatial_inertia(p.mass, c, R @ p.inertia_matrix @ R.T)
        f[k] = I6 @ a[k] + crf(v[k]) @ I6 @ v[k]
    F = f.copy()
    for i, w in (tips or {}).items():
        k = flat.last_link(i) - 1
        w = np.asarray(dq.vec6(w) if hasattr(w, "c") else w, dtype=float)
        R, pk = T_link[k][:3, :3], T_link[k][:3, 3]
        fw = R @ w[:3]
        F[k] += np.r_[R @ w[3:] + np.cross(pk, fw), fw]
    for k in range(n - 1, -1, -1):
        par = flat.links[k].parent
        if par:
            F[par - 1] += F[k]
    wrenches = np.zeros((n, 6))
    gen = np.zeros(flat.dof)
    for k, L in enumerate(flat.links):
        R, p = T_prev[k][:3, :3], T_prev[k][:3, 3]
        nO, fO = F[k][:3], F[k][3:]
        fl = R.T @ fO
        nl = R.T @ (nO - np.cross(p, fO))
        wrenches[k] = np.r_[fl, nl]
        gen[L.q_slice] = S_all[k].T @ np.r_[nl, fl]
    return T_prev, T_link, v, a, a0, wrenches, gen


def monolithic_ne(flat: FlatTree, q, qd, qdd, tip_wrenches=None, gravity=None) -> OracleResult:
    """Joint wrenches and generalized forces for the whole tree in one pass.

    ``tip_wrenches`` maps a subsystem id to a wrench on the tip of its last link,
    expressed in that link frame (a DualQuaternion or 6 reals, force first).
    """
    *_, wrenches, gen = _pass(flat, q, qd, qdd, gravity, tip_wrenches)
    return OracleResult(wrenches, gen, flat)


def connection_reading(flat: FlatTree, subsystem: int, q, qd, qdd, gravity=None) -> ConnectionReading:
    """What sensors at the base of ``subsystem`` would report.

    Twist and its derivative are those of the mounting frame (rigidly attached to
    the parent link), in that frame; the wrench is the one transmitted into the
    subsystem at that frame; the pose is its world pose.
    """
    k = flat.first_link(subsystem) - 1
    T_prev, _, v, a, a0, wrenches, _ = _pass(flat, q, qd, qdd, gravity, None)
    par = flat.links[k].parent
    if par:
        vp, ap = v[par - 1], a[par - 1] - a0
    else:
        vp, ap = np.zeros(6), np.zeros(6)
    Xinv = np.linalg.inv(motion_transform(T_prev[k]))
    tw, twd = Xinv @ vp, Xinv @ ap
    return ConnectionReading(dq.from_vec6(tw), dq.from_vec6(twd), dq.from_vec6(wrenches[k]),
                             matrix_to_dq(T_prev[k]))


def statics_oracle(flat: FlatTree, q, gravity=None) -> np.ndarray:
    """Generalized gravity loads from 3D statics of every descendant link."""
    q = np.asarray(q, dtype=float)
    g = flat.gravity if gravity is None else np.asarray(gravity, dtype=float)
    n = len(flat.links)
    T_prev, T_link, com = [None] * n, [None] * n, [None] * n
    for k, L in enumerate(flat.links):
        Tp = L.pre if L.parent == 0 else T_link[L.parent - 1] @ L.pre
        p = L.params
        T_prev[k] = Tp
        T_link[k] = Tp @ joint_matrix(L.joint, q[L.q_slice]) @ dh_matrix(p.a, p.alpha, p.d, p.theta)
        com[k] = T_link[k][:3, 3] + T_link[k][:3, :3] @ np.asarray(p.com)
    desc = [{k} for k in range(n)]
    for k in range(n - 1, -1, -1):
        par = flat.links[k].parent
        if par:
            desc[par - 1] |= desc[k]
    tau = np.zeros(flat.dof)
    for k, L in enumerate(flat.links):
        origin, R = T_prev[k][:3, 3], T_prev[k][:3, :3]
        force = np.zeros(3)
        moment = np.zeros(3)
        for j in desc[k]:
            w = -flat.links[j].params.mass * g  # support force against gravity
            force += w
            moment += np.cross(com[j] - origin, w)
        S = motion_subspace(L.joint)
        tau[L.q_slice] = (R @ S[:3]).T @ moment + (R @ S[3:]).T @ force
    return tau

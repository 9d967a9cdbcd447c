"""Robot description: joints, links, subsystems and the subsystem tree.

Link frames follow the standard (distal) DH convention.  The pose of link
frame i in frame i-1 is ``J(q) RotZ(theta) TransZ(d) TransX(a) RotX(alpha)``
where ``J(q)`` is the joint motion about/along the k axis of frame i-1.  For a
revolute joint this adds q to theta, for a prismatic joint it adds q to d.

Description files are TOML::

    [world]
    gravity = [0.0, 0.0, -9.81]
    base_pose = [1, 0, 0, 0, 0, 0, 0, 0]      # optional

    [tree]
    root = 1
    [[tree.edges]]
    parent = 1
    child = 2
    host_link = 2
    offset_pose = [1, 0, 0, 0, 0, 0, 0, 0]

    [subsystem.1]
    kind = "modeled"                           # or "black_box" (+ dof_hint)
    [[subsystem.1.links]]
    joint = "revolute"                         # see JointKind
    a = 0.0
    alpha = 1.5707963267948966
    d = 0.187
    theta = 1.5707963267948966
    mass = 0.8
    com = [0.0, -0.187, 0.0]
    inertia_diag = [0.8, 0.8, 0.8]             # or inertia_full = 3x3
    pitch = 0.0                                # helical joints only
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from . import dq
from .dq import DualQuaternion
from .errors import DimensionMismatch, ParseError, ValidationError

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib
import tomli_w

DEFAULT_GRAVITY = (0.0, 0.0, -9.81)


class JointKind(Enum):
    REVOLUTE = "revolute"
    PRISMATIC = "prismatic"
    SPHERICAL = "spherical"
    PLANAR = "planar"
    CYLINDRICAL = "cylindrical"
    HELICAL = "helical"
    SIXDOF = "six_dof"

    @property
    def dof(self) -> int:
        return _DOF[self]


_DOF = {
    JointKind.REVOLUTE: 1,
    JointKind.PRISMATIC: 1,
    JointKind.SPHERICAL: 3,
    JointKind.PLANAR: 3,
    JointKind.CYLINDRICAL: 2,
    JointKind.HELICAL: 1,
    JointKind.SIXDOF: 6,
}


@dataclass(frozen=True)
class Joint:
    kind: JointKind
    pitch: float = 0.0  # m/rad, helical only

    @property
    def dof(self) -> int:
        return self.kind.dof


@dataclass(frozen=True)
class LinkParams:
    a: float
    alpha: float
    d: float
    theta: float
    mass: float
    com: tuple = (0.0, 0.0, 0.0)
    # columns i_x, i_y, i_z of the CoM-frame inertia tensor
    inertia: tuple = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))

    @property
    def inertia_matrix(self) -> np.ndarray:
        return np.array(self.inertia, dtype=float).T

    def validate(self, where=""):
        if not self.mass > 0.0:
            raise ValidationError(f"{where}: mass must be positive, got {self.mass}")
        m = self.inertia_matrix
        if not np.allclose(m, m.T, atol=1e-12):
            raise ValidationError(f"{where}: inertia tensor is not symmetric")
        if np.min(np.linalg.eigvalsh(m)) <= 0.0:
            raise ValidationError(f"{where}: inertia tensor is not positive definite")


@dataclass(frozen=True)
class Link:
    joint: Joint
    params: LinkParams


@dataclass(frozen=True)
class ConnectionPoint:
    host_link: int  # 1-based link index on the predecessor; equals eta
    offset: DualQuaternion = dq.ONE  # pose of the connection frame in the host link frame


@dataclass(frozen=True)
class Subsystem:
    id: int
    links: tuple = ()
    black_box: bool = False
    dof_hint: int | None = None

    @property
    def n(self) -> int:
        return len(self.links)

    @property
    def dof(self) -> int:
        return sum(l.joint.dof for l in self.links)


@dataclass
class RobotTree:
    subsystems: dict
    root: int
    parent: dict = field(default_factory=dict)  # child id -> parent id
    connections: dict = field(default_factory=dict)  # child id -> ConnectionPoint
    gravity: tuple = DEFAULT_GRAVITY
    base_pose: DualQuaternion = dq.ONE

    def __post_init__(self):
        self._children = {i: [] for i in self.subsystems}
        for c, p in self.parent.items():
            if p in self._children:
                self._children[p].append(c)
        for v in self._children.values():
            v.sort()

    def children(self, i) -> list:
        return self._children[i]

    def bfs_order(self) -> list:
        order, queue = [], deque([self.root])
        while queue:
            i = queue.popleft()
            order.append(i)
            queue.extend(self._children[i])
        return order

    def leaves(self) -> list:
        return sorted(i for i in self.subsystems if not self._children[i])

    def modeled_ids(self) -> list:
        return sorted(i for i, s in self.subsystems.items() if not s.black_box)

    @property
    def n(self) -> int:
        return sum(s.n for s in self.subsystems.values())

    @property
    def dof(self) -> int:
        return sum(s.dof for s in self.subsystems.values())

    def has_black_box(self) -> bool:
        return any(s.black_box for s in self.subsystems.values())

    def split(self, values) -> dict:
        """Split a flat per-DoF vector (ascending subsystem id) into a dict."""
        values = np.asarray(values, dtype=float)
        out, k = {}, 0
        for i in self.modeled_ids():
            m = self.subsystems[i].dof
            out[i] = values[k:k + m]
            k += m
        if k != values.size:
            raise DimensionMismatch(f"expected {k} values, got {values.size}")
        return out

    def validate(self):
        _validate(self)
        return self

    def __eq__(self, other):
        if not isinstance(other, RobotTree):
            return NotImplemented
        return (self.subsystems == other.subsystems and self.root == other.root
                and self.parent == other.parent and self.connections == other.connections
                and tuple(self.gravity) == tuple(other.gravity)
                and self.base_pose == other.base_pose)


# --- kinematics -------------------------------------------------------------

def joint_motion(joint: Joint, q) -> DualQuaternion:
    """Pose produced by the joint variables, applied before the fixed DH part."""
    k = joint.kind
    if len(q) != joint.dof:
        raise DimensionMismatch(f"{k.value} joint needs {joint.dof} values, got {len(q)}")
    if k is JointKind.REVOLUTE:
        return dq.rot_z(q[0])
    if k is JointKind.PRISMATIC:
        return dq.translation((0.0, 0.0, q[0]))
    if k is JointKind.HELICAL:
        return dq.pose(dq.rot_z(q[0]), (0.0, 0.0, joint.pitch * q[0]))
    if k is JointKind.CYLINDRICAL:
        return dq.pose(dq.rot_z(q[0]), (0.0, 0.0, q[1]))
    if k is JointKind.SPHERICAL:
        return dq.rotation_vector(q)
    if k is JointKind.PLANAR:
        return dq.pose(dq.rot_z(q[2]), (q[0], q[1], 0.0))
    return dq.pose(dq.rotation_vector(q[3:6]), q[0:3])


def dh_pose(a, alpha, d, theta) -> DualQuaternion:
    """RotZ(theta) TransZ(d) TransX(a) RotX(alpha) as a pose."""
    ct, st = math.cos(0.5 * theta), math.sin(0.5 * theta)
    ca, sa = math.cos(0.5 * alpha), math.sin(0.5 * alpha)
    r = (ct * ca, ct * sa, st * sa, st * ca)
    p = (a * math.cos(theta), a * math.sin(theta), d)
    return dq.pose(dq.Quaternion(*r), p)


def link_pose(params: LinkParams, joint: Joint, q=()) -> DualQuaternion:
    """Pose of link frame i relative to frame i-1."""
    q = np.atleast_1d(np.asarray(q, dtype=float))
    fixed = dh_pose(params.a, params.alpha, params.d, params.theta)
    if joint.kind is JointKind.REVOLUTE:
        if q.size != 1:
            raise DimensionMismatch(f"revolute joint needs 1 value, got {q.size}")
        return dh_pose(params.a, params.alpha, params.d, params.theta + q[0])
    if joint.kind is JointKind.PRISMATIC:
        if q.size != 1:
            raise DimensionMismatch(f"prismatic joint needs 1 value, got {q.size}")
        return dh_pose(params.a, params.alpha, params.d + q[0], params.theta)
    return dq.mul(joint_motion(joint, q), fixed)


def com_pose(link_frame: DualQuaternion, params: LinkParams) -> DualQuaternion:
    """CoM frame: the link frame shifted by the CoM offset, same orientation."""
    return dq.mul(link_frame, dq.translation(params.com))


def joint_slices(links: Sequence[Link]) -> list:
    out, k = [], 0
    for l in links:
        out.append(slice(k, k + l.joint.dof))
        k += l.joint.dof
    return out


# --- parsing ----------------------------------------------------------------

def _vec(v, n, what):
    try:
        out = tuple(float(x) for x in v)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{what}: expected {n} numbers") from exc
    if len(out) != n:
        raise ParseError(f"{what}: expected {n} numbers, got {len(out)}")
    return out


def _parse_link(d: dict, where: str) -> Link:
    try:
        kind = JointKind(str(d["joint"]).lower())
    except KeyError as exc:
        raise ParseError(f"{where}: missing 'joint'") from exc
    except ValueError as exc:
        raise ParseError(f"{where}: unknown joint kind {d['joint']!r}") from exc
    try:
        a, alpha, dd, theta = (float(d.get(k, 0.0)) for k in ("a", "alpha", "d", "theta"))
        mass = float(d["mass"])
        pitch = float(d.get("pitch", 0.0))
    except KeyError as exc:
        raise ParseError(f"{where}: missing {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}: {exc}") from exc
    com = _vec(d.get("com", (0.0, 0.0, 0.0)), 3, f"{where}.com")
    if "inertia_full" in d:
        rows = d["inertia_full"]
        if len(rows) != 3:
            raise ParseError(f"{where}.inertia_full: expected 3x3")
        m = [_vec(r, 3, f"{where}.inertia_full") for r in rows]
        inertia = tuple(tuple(m[r][c] for r in range(3)) for c in range(3))
    elif "inertia_diag" in d:
        ix, iy, iz = _vec(d["inertia_diag"], 3, f"{where}.inertia_diag")
        inertia = ((ix, 0.0, 0.0), (0.0, iy, 0.0), (0.0, 0.0, iz))
    else:
        raise ParseError(f"{where}: needs inertia_diag or inertia_full")
    return Link(Joint(kind, pitch), LinkParams(a, alpha, dd, theta, mass, com, inertia))


def parse_robot_description(text: str) -> RobotTree:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(str(exc)) from exc
    return robot_from_dict(doc)


def load_robot(path) -> RobotTree:
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_robot_description(data.decode("utf-8"))


def robot_from_dict(doc: dict) -> RobotTree:
    world = doc.get("world", {})
    gravity = _vec(world.get("gravity", DEFAULT_GRAVITY), 3, "world.gravity")
    base_pose = DualQuaternion(_vec(world.get("base_pose", dq.ONE.c), 8, "world.base_pose"))

    subs_doc = doc.get("subsystem")
    if not isinstance(subs_doc, dict) or not subs_doc:
        raise ParseError("no [subsystem.<id>] sections")
    subsystems = {}
    for key, sd in subs_doc.items():
        try:
            sid = int(key)
        except ValueError as exc:
            raise ParseError(f"subsystem id must be an integer, got {key!r}") from exc
        kind = str(sd.get("kind", "modeled")).lower()
        if kind == "black_box":
            hint = sd.get("dof_hint")
            subsystems[sid] = Subsystem(sid, (), True, None if hint is None else int(hint))
        elif kind == "modeled":
            links = tuple(_parse_link(ld, f"subsystem.{sid}.links[{k}]")
                          for k, ld in enumerate(sd.get("links", [])))
            subsystems[sid] = Subsystem(sid, links)
        else:
            raise ParseError(f"subsystem.{sid}: unknown kind {kind!r}")

    tree_doc = doc.get("tree", {})
    if "root" not in tree_doc:
        raise ParseError("[tree] needs a root")
    root = int(tree_doc["root"])
    parent, connections = {}, {}
    for k, e in enumerate(tree_doc.get("edges", [])):
        try:
            p, c, h = int(e["parent"]), int(e["child"]), int(e.get("host_link", 1))
        except KeyError as exc:
            raise ParseError(f"tree.edges[{k}]: missing {exc.args[0]!r}") from exc
        if c in parent:
            raise ValidationError(f"subsystem {c} has more than one predecessor")
        off = DualQuaternion(_vec(e.get("offset_pose", dq.ONE.c), 8, f"tree.edges[{k}].offset_pose"))
        parent[c] = p
        connections[c] = ConnectionPoint(h, off)
    return RobotTree(subsystems, root, parent, connections, gravity, base_pose).validate()


def _validate(tree: RobotTree):
    subs = tree.subsystems
    if tree.root not in subs:
        raise ValidationError(f"root {tree.root} is not a declared subsystem")
    if tree.root in tree.parent:
        raise ValidationError("the root cannot have a predecessor")
    if not dq.is_unit(tree.base_pose):
        raise ValidationError("world.base_pose is not a unit dual quaternion")
    for c, p in tree.parent.items():
        if c == p:
            raise ValidationError(f"subsystem {c} precedes itself (cycle)")
        if c not in subs:
            raise ValidationError(f"edge child {c} is not a declared subsystem")
        if p not in subs:
            raise ValidationError(f"edge parent {p} of {c} is dangling")
        cp = tree.connections[c]
        if not dq.is_unit(cp.offset):
            raise ValidationError(f"offset pose of connection {p}->{c} is not unit")
        if not subs[p].black_box and not 1 <= cp.host_link <= subs[p].n:
            raise ValidationError(
                f"host_link {cp.host_link} of connection {p}->{c} outside [1, {subs[p].n}]")
    for i, s in subs.items():
        if i != tree.root and i not in tree.parent:
            raise ValidationError(f"subsystem {i} has no predecessor and is not the root")
        if not s.black_box:
            if s.n == 0:
                raise ValidationError(f"modeled subsystem {i} has no links")
            for k, l in enumerate(s.links):
                l.params.validate(f"subsystem.{i}.links[{k}]")
    # every subsystem reachable from the root exactly once; rules out cycles
    seen = tree.bfs_order()
    if len(seen) != len(subs) or len(set(seen)) != len(seen):
        raise ValidationError("the predecessor relation does not form a tree (cycle or unreachable subsystem)")


# --- serialisation ----------------------------------------------------------

def _link_dict(l: Link) -> dict:
    p = l.params
    d = {"joint": l.joint.kind.value, "a": p.a, "alpha": p.alpha, "d": p.d, "theta": p.theta,
         "mass": p.mass, "com": list(p.com)}
    m = p.inertia_matrix
    if np.count_nonzero(m - np.diag(np.diag(m))) == 0:
        d["inertia_diag"] = [float(v) for v in np.diag(m)]
    else:
        d["inertia_full"] = [[float(v) for v in row] for row in m]
    if l.joint.kind is JointKind.HELICAL or l.joint.pitch:
        d["pitch"] = l.joint.pitch
    return d


def robot_to_dict(tree: RobotTree) -> dict:
    doc = {"world": {"gravity": list(tree.gravity), "base_pose": list(tree.base_pose.c)},
           "tree": {"root": tree.root, "edges": []}, "subsystem": {}}
    for c in sorted(tree.parent):
        cp = tree.connections[c]
        doc["tree"]["edges"].append({"parent": tree.parent[c], "child": c,
                                     "host_link": cp.host_link, "offset_pose": list(cp.offset.c)})
    for i in sorted(tree.subsystems):
        s = tree.subsystems[i]
        if s.black_box:
            sd = {"kind": "black_box"}
            if s.dof_hint is not None:
                sd["dof_hint"] = s.dof_hint
        else:
            sd = {"kind": "modeled", "links": [_link_dict(l) for l in s.links]}
        doc["subsystem"][str(i)] = sd
    return doc


def serialize_robot(tree: RobotTree, extra: dict | None = None) -> str:
    doc = robot_to_dict(tree)
    if extra:
        doc.update(extra)
    return tomli_w.dumps(doc)


def chain_tree(links: Iterable[Link], gravity=DEFAULT_GRAVITY, base_pose=dq.ONE) -> RobotTree:
    """Tree holding a single serial chain."""
    return RobotTree({1: Subsystem(1, tuple(links))}, 1, gravity=tuple(gravity),
                     base_pose=base_pose).validate()

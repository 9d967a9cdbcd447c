"""Reference robots: 3-link arms, the 24-DoF branched manipulator and its mobile variants.

The shipped TOML files in ``branchdyn/data`` are generated from these builders
(``tools/make_goldens.py``).
"""
from __future__ import annotations

import math

from . import dq
from .robot import (ConnectionPoint, Joint, JointKind, Link, LinkParams, RobotTree, Subsystem)

HALF_PI = math.pi / 2


def _diag(v):
    return ((v, 0.0, 0.0), (0.0, v, 0.0), (0.0, 0.0, v))


ARM_PARAMS = (
    LinkParams(0.0, HALF_PI, 0.187, HALF_PI, 0.8, (0.0, -0.187, 0.0), _diag(0.8)),
    LinkParams(0.0, HALF_PI, 0.43, HALF_PI, 0.5, (0.0, -0.195, 0.0), _diag(0.5)),
    LinkParams(0.0, 0.0, 0.0, 0.0, 0.10, (0.0, 0.0, 0.235), _diag(0.10)),
)

BASE_PARAMS = LinkParams(0.0, 0.0, 0.0, 0.0, 80.0, (0.0, 0.0, 0.0), _diag(40.0))


def arm_links(kind=JointKind.REVOLUTE):
    return tuple(Link(Joint(kind), p) for p in ARM_PARAMS)


def arm(sid=1, kind=JointKind.REVOLUTE) -> Subsystem:
    return Subsystem(sid, arm_links(kind))


def base(sid=1) -> Subsystem:
    return Subsystem(sid, (Link(Joint(JointKind.PLANAR), BASE_PARAMS),))


def _offset(angle_axis, angle, p):
    return dq.pose(dq.rotation(angle_axis, angle), p)


# child -> (parent, host link, offset pose) for the branched manipulator
BM_EDGES = {
    2: (1, 2, _offset((1.0, 0.0, 0.0), HALF_PI, (0.05, 0.0, 0.10))),
    3: (1, 1, _offset((0.0, 1.0, 0.0), -HALF_PI, (0.0, -0.10, 0.0))),
    4: (2, 3, _offset((0.0, 0.0, 1.0), 0.3, (0.0, 0.0, 0.12))),
    5: (1, 2, _offset((1.0, 0.0, 0.0), -HALF_PI, (-0.05, 0.0, 0.20))),
    6: (5, 2, _offset((0.0, 1.0, 0.0), 0.4, (0.02, -0.05, 0.0))),
    7: (1, 1, _offset((0.0, 1.0, 0.0), HALF_PI, (0.0, -0.15, 0.03))),
    8: (7, 3, _offset((1.0, 1.0, 0.0), 0.5, (0.0, 0.0, 0.08))),
}
BM_PRISMATIC = (3, 7)


def branched_manipulator(gravity=(0.0, 0.0, -9.81), base_pose=dq.ONE) -> RobotTree:
    subs = {i: arm(i, JointKind.PRISMATIC if i in BM_PRISMATIC else JointKind.REVOLUTE)
            for i in range(1, 9)}
    parent = {c: e[0] for c, e in BM_EDGES.items()}
    conns = {c: ConnectionPoint(e[1], e[2]) for c, e in BM_EDGES.items()}
    return RobotTree(subs, 1, parent, conns, tuple(gravity), base_pose).validate()


BASE_MOUNT = _offset((0.0, 0.0, 1.0), 0.0, (0.1, 0.0, 0.35))
EXTRA_ARM_MOUNT = (1, _offset((1.0, 0.0, 0.0), HALF_PI, (0.0, 0.05, 0.05)))


def mobile_full(gravity=(0.0, 0.0, -9.81)) -> RobotTree:
    """Mobile base + branched manipulator (ids shifted by one) + a prismatic arm: 10 subsystems."""
    subs = {1: base(1)}
    parent, conns = {2: 1}, {2: ConnectionPoint(1, BASE_MOUNT)}
    for i in range(1, 9):
        kind = JointKind.PRISMATIC if i in BM_PRISMATIC else JointKind.REVOLUTE
        subs[i + 1] = arm(i + 1, kind)
    for c, (p, h, off) in BM_EDGES.items():
        parent[c + 1] = p + 1
        conns[c + 1] = ConnectionPoint(h, off)
    subs[10] = arm(10, JointKind.PRISMATIC)
    parent[10] = 3
    conns[10] = ConnectionPoint(*EXTRA_ARM_MOUNT)
    return RobotTree(subs, 1, parent, conns, tuple(gravity)).validate()


def mobile_black_box(gravity=(0.0, 0.0, -9.81)) -> RobotTree:
    """Mobile base, the manipulator as a black box, and a prismatic arm mounted on it."""
    subs = {1: base(1), 2: Subsystem(2, (), True, 24), 3: arm(3, JointKind.PRISMATIC)}
    parent = {2: 1, 3: 2}
    conns = {2: ConnectionPoint(1, BASE_MOUNT), 3: ConnectionPoint(*EXTRA_ARM_MOUNT)}
    return RobotTree(subs, 1, parent, conns, tuple(gravity)).validate()


# full-tree subsystem providing each black-box boundary reading of mobile_black_box
MBB_READING_SOURCE = {(2, 2): 2, (2, 3): 10}
MBB_TO_FULL = {1: 1, 3: 10}


def replicated_chain_tree(count, kind=JointKind.REVOLUTE) -> RobotTree:
    """``count`` three-link arms arranged as a binary tree.

    Subsystem i hangs off subsystem i // 2, on its second link for even i and on
    its tip for odd i.
    """
    subs = {i: arm(i, kind) for i in range(1, count + 1)}
    parent, conns = {}, {}
    off = _offset((1.0, 0.0, 0.0), 0.2, (0.0, 0.0, 0.05))
    for i in range(2, count + 1):
        parent[i] = i // 2
        conns[i] = ConnectionPoint(3 if i % 2 else 2, off)
    return RobotTree(subs, 1, parent, conns).validate()


def partitioned_chain(sizes, kinds=None) -> RobotTree:
    """A six-link serial chain split into consecutive subsystems of the given sizes.

    Each subsystem is mounted on the tip of the previous one with an identity
    offset, so every partition describes the same mechanism.
    """
    links = list(chain6_links(kinds))
    if sum(sizes) != len(links):
        raise ValueError("partition sizes must add up to six")
    subs, parent, conns, k = {}, {}, {}, 0
    for i, s in enumerate(sizes, 1):
        subs[i] = Subsystem(i, tuple(links[k:k + s]))
        if i > 1:
            parent[i] = i - 1
            conns[i] = ConnectionPoint(sizes[i - 2])
        k += s
    return RobotTree(subs, 1, parent, conns).validate()


def chain6_links(kinds=None):
    kinds = kinds or (JointKind.REVOLUTE, JointKind.REVOLUTE, JointKind.PRISMATIC,
                      JointKind.REVOLUTE, JointKind.HELICAL, JointKind.REVOLUTE)
    out = []
    for k, kind in enumerate(kinds):
        p = ARM_PARAMS[k % 3]
        pitch = 0.05 if kind is JointKind.HELICAL else 0.0
        out.append(Link(Joint(kind, pitch), p))
    return out

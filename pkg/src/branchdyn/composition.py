"""Modular composition of subsystem models over the subsystem tree.

Twists flow from the root to the leaves in breadth-first order; each subsystem
receives the twist of its connection frame a_j, transports it to its own CoMs
and adds its local motion.  Wrenches flow back: every subsystem evaluates its
own wrench map, then hands the wrench at its base to the predecessor, which
transports it to the joints that precede the connection point.

Connections are identified by the id of the child subsystem.  A black-box
subsystem is known only through a sensor callback ``sensors(subsystem_id,
connection_id)``:

* ``sensors(p, j)`` with p a black box gives the twist, its derivative and the
  world pose of the connection frame a_j of child j;
* ``sensors(i, i)`` with i a black box gives the wrench i transmits to its
  predecessor at its connection frame.

Wrench readings use the actuation convention (the wrench the mount applies to
the subsystem).  A force sensor reporting the reaction must be negated by the
caller.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import dq
from .dq import ZERO, DualQuaternion
from .errors import DimensionMismatch, MissingSensor, MissingState
from .robot import RobotTree
from .serial_ne import (BaseSeed, ChainFrames, ChainState, TwistState, backward_recursion,
                        chain_frames, forward_recursion)


@dataclass(frozen=True)
class ConnectionReading:
    twist: DualQuaternion = ZERO
    twist_derivative: DualQuaternion = ZERO
    wrench: DualQuaternion = ZERO
    pose: DualQuaternion = dq.ONE  # world pose of the connection frame


SensorSource = Callable[[int, int], ConnectionReading]


@dataclass
class SubsystemFrames:
    chain: ChainFrames
    base_world: DualQuaternion  # world pose of frame 0 (the connection frame a_i)


@dataclass
class ForwardPass:
    order: list
    frames: dict  # id -> SubsystemFrames (modeled only)
    twists: dict  # id -> total TwistState
    local: dict  # id -> TwistState of the subsystem alone
    propagated: dict  # id -> TwistState induced by the connection motion
    connection: dict = field(default_factory=dict)  # child id -> (twist, derivative, world pose)


@dataclass
class InterconnectionMatrix:
    order: list  # BFS order of all subsystems
    rows: list  # modeled ids, ascending
    blocks: dict  # (row, col) -> list of wrenches; absent means zero block
    sizes: dict  # row id -> n_i

    def is_nonzero(self, i, j) -> bool:
        return (i, j) in self.blocks

    def pattern(self) -> set:
        return set(self.blocks)


@dataclass
class CompositionResult:
    gammas: dict  # id -> joint wrenches of modeled subsystem
    matrix: InterconnectionMatrix
    forward: ForwardPass
    diag: dict = field(default_factory=dict)  # id -> own wrench map evaluation
    transmitted: dict = field(default_factory=dict)  # child id -> zero-padded wrench vector on parent

    @property
    def gamma_total(self) -> list:
        out = []
        for i in sorted(self.gammas):
            out.extend(self.gammas[i])
        return out

    @property
    def twists(self) -> dict:
        return self.forward.twists


def _no_sensors(i, j):
    raise MissingSensor(f"no sensor source for black-box boundary ({i}, {j})")


def _read(sensors, i, j) -> ConnectionReading:
    try:
        r = sensors(i, j)
    except (KeyError, LookupError) as exc:
        raise MissingSensor(f"no reading for subsystem {i}, connection {j}") from exc
    if r is None:
        raise MissingSensor(f"no reading for subsystem {i}, connection {j}")
    return r


def _state(Q, Qd, Qdd, i) -> ChainState:
    try:
        return ChainState(Q[i], Qd[i], Qdd[i])
    except KeyError as exc:
        raise MissingState(f"no joint state for modeled subsystem {i}") from exc


def propagate_connection_twist(X, xi_a, xi_a_dot, local: TwistState) -> TwistState:
    """CoM twists induced by the motion of the connection frame.

    ``X[k]`` is the pose of the connection frame in the CoM frame of link k and
    ``local`` holds the CoM twists relative to the connection frame; the latter
    feed the derivative's cross term.
    """
    if len(X) != len(local.twists):
        raise DimensionMismatch("pose and local twist vectors differ in length")
    twists = dq.adjoint_n(X, xi_a)
    derivs = []
    for x, t, rel in zip(X, twists, local.twists):
        derivs.append(dq.adjoint(x, xi_a_dot) + dq.cross(-rel, t))
    return TwistState(twists, derivs)


def connection_to_com_poses(frames: ChainFrames) -> list:
    """Poses x_a^{c_k} of the base frame in each CoM frame."""
    return [dq.conj(x) for x in frames.com_in_base]


def propagate_connection_wrench(connection, zeta_b, frames: ChainFrames) -> list:
    """Wrench at the connection point b, carried to the eta joints before it.

    Entry m (1-based, m <= eta) is the wrench in frame m-1 with moment about its
    origin; entries past eta are exact zeros.
    """
    eta = connection.host_link
    n = len(frames.link)
    b_in_base = dq.mul(frames.link_in_base[eta - 1], connection.offset)
    out = []
    for m in range(1, eta + 1):
        x = b_in_base if m == 1 else dq.mul(dq.conj(frames.link_in_base[m - 2]), b_in_base)
        out.append(dq.adjoint(x, zeta_b))
    out.extend([ZERO] * (n - eta))
    return out


def dmc_forward_recursion(tree: RobotTree, Q, Qd, Qdd, sensors: SensorSource | None = None) -> ForwardPass:
    sensors = sensors or _no_sensors
    order = tree.bfs_order()
    fp = ForwardPass(order, {}, {}, {}, {})
    for i in order:
        sub = tree.subsystems[i]
        if i == tree.root:
            base_world = tree.base_pose
            xi_a = xi_a_dot = None
        else:
            xi_a, xi_a_dot, base_world = fp.connection[i]
        if not sub.black_box:
            st = _state(Q, Qd, Qdd, i)
            frames = chain_frames(sub, st.q)
            local = forward_recursion(sub, st, None, frames)
            if xi_a is None:
                prop = TwistState.zeros(sub.n)
                total = local
            else:
                prop = propagate_connection_twist(connection_to_com_poses(frames), xi_a, xi_a_dot, local)
                total = local + prop
            fp.frames[i] = SubsystemFrames(frames, base_world)
            fp.local[i] = local
            fp.propagated[i] = prop
            fp.twists[i] = total
        for j in tree.children(i):
            if sub.black_box:
                r = _read(sensors, i, j)
                fp.connection[j] = (dq.check_pure(r.twist, "sensor twist"),
                                    dq.check_pure(r.twist_derivative, "sensor twist derivative"),
                                    r.pose)
                continue
            cp = tree.connections[j]
            h = cp.host_link - 1
            fr = fp.frames[i].chain
            # pose of the CoM of the host link in the connection frame
            x = dq.mul(dq.conj(cp.offset), dq.translation(sub.links[h].params.com))
            world = dq.normalize(dq.mul(dq.mul(fp.frames[i].base_world, fr.link_in_base[h]), cp.offset))
            fp.connection[j] = (dq.adjoint(x, fp.twists[i].twists[h]),
                                dq.adjoint(x, fp.twists[i].twist_derivatives[h]), world)
    return fp


def seeded_forward(tree: RobotTree, fp: ForwardPass, Q, Qd, Qdd, i) -> TwistState:
    """Total twists of subsystem i by seeding its chain with the connection twist."""
    sub = tree.subsystems[i]
    st = ChainState(Q[i], Qd[i], Qdd[i])
    seed = None if i == tree.root else BaseSeed(*fp.connection[i][:2])
    return forward_recursion(sub, st, seed, fp.frames[i].chain)


def n_backward(tree: RobotTree, fp: ForwardPass, sensors: SensorSource | None = None,
               external_wrenches: Mapping | None = None, gravity=None,
               twists: Mapping | None = None) -> CompositionResult:
    """Total joint wrenches of every modeled subsystem.

    ``twists`` overrides the total twist states from ``fp`` (used to evaluate
    the wrench map at zero motion).  ``external_wrenches[i]`` is a tip wrench on
    subsystem i expressed in its last link frame.
    """
    sensors = sensors or _no_sensors
    ext = external_wrenches or {}
    g = tree.gravity if gravity is None else tuple(gravity)
    twists = fp.twists if twists is None else twists
    gammas = {i: None for i in fp.frames}
    diag, transmitted = {}, {}
    for i in reversed(fp.order):
        sub = tree.subsystems[i]
        if not sub.black_box:
            fr = fp.frames[i]
            w = backward_recursion(sub, fr.chain, twists[i], ext.get(i, ZERO), g, fr.base_world)
            diag[i] = w
            gammas[i] = w if gammas[i] is None else dq.add_vectors(gammas[i], w)
        if i == tree.root:
            continue
        p = tree.parent[i]
        if tree.subsystems[p].black_box:
            continue
        if sub.black_box:
            zeta = dq.check_pure(_read(sensors, i, i).wrench, "sensor wrench")
        else:
            zeta = gammas[i][0]
        ring = propagate_connection_wrench(tree.connections[i], zeta, fp.frames[p].chain)
        transmitted[i] = ring
        gammas[p] = ring if gammas[p] is None else dq.add_vectors(gammas[p], ring)
    matrix = assemble_interconnection_matrix(tree, diag, transmitted, fp.order)
    return CompositionResult(gammas, matrix, fp, diag, transmitted)


def assemble_interconnection_matrix(tree: RobotTree, diag: Mapping, transmitted: Mapping,
                                    order=None) -> InterconnectionMatrix:
    """Block (i, i) is subsystem i's own wrench map, (i, j) the wrench j sends to i."""
    order = list(order) if order is not None else tree.bfs_order()
    rows = tree.modeled_ids()
    blocks = {}
    for i in rows:
        blocks[(i, i)] = list(diag[i])
    for j, vec in transmitted.items():
        blocks[(tree.parent[j], j)] = list(vec)
    return InterconnectionMatrix(order, rows, blocks, {i: tree.subsystems[i].n for i in rows})


def total_wrenches(A: InterconnectionMatrix) -> dict:
    """Row sums of the block matrix.

    Columns are summed in reverse breadth-first order, the order in which the
    backward pass accumulates them, so the result is bit-identical to it.
    """
    out = {}
    for i in A.rows:
        acc = None
        for j in reversed(A.order):
            blk = A.blocks.get((i, j))
            if blk is None:
                continue
            acc = list(blk) if acc is None else dq.add_vectors(acc, blk)
        out[i] = acc if acc is not None else [ZERO] * A.sizes[i]
    return out


def stack(gammas: Mapping) -> list:
    out = []
    for i in sorted(gammas):
        out.extend(gammas[i])
    return out


def dmc(tree: RobotTree, Q, Qd, Qdd, sensors: SensorSource | None = None,
        external_wrenches: Mapping | None = None, gravity=None) -> CompositionResult:
    fp = dmc_forward_recursion(tree, Q, Qd, Qdd, sensors)
    return n_backward(tree, fp, sensors, external_wrenches, gravity)


def export_graph_dot(tree: RobotTree) -> str:
    """DOT digraph: dashed twist edges, solid wrench edges, black boxes as squares."""
    lines = ["digraph robot {"]
    for i in sorted(tree.subsystems):
        s = tree.subsystems[i]
        shape = "box" if s.black_box else "circle"
        lines.append(f'  {i} [shape={shape}, label="{i}"];')
    for i in sorted(tree.subsystems):
        lines.append(f"  {i} -> {i} [style=dashed];")
        lines.append(f"  {i} -> {i} [style=solid];")
    for c in sorted(tree.parent):
        p = tree.parent[c]
        lines.append(f"  {p} -> {c} [style=dashed];")
        lines.append(f"  {c} -> {p} [style=solid];")
    lines.append("}")
    return "\n".join(lines) + "\n"


# --- sensor replay ----------------------------------------------------------

SENSOR_COLUMNS = (["time", "subsystem_id", "connection_id"]
                  + [f"twist_{k}" for k in range(6)]
                  + [f"twist_dot_{k}" for k in range(6)]
                  + [f"wrench_{k}" for k in range(6)]
                  + [f"pose_{k}" for k in range(8)])


class ReplaySensor:
    """Sensor source backed by recorded readings keyed by (time, subsystem, connection).

    CSV rows: time, subsystem_id, connection_id, 6 twist, 6 twist-derivative and
    6 wrench values, then optionally 8 pose coefficients of the connection frame.
    """

    def __init__(self, readings: Mapping | None = None):
        self.readings = dict(readings or {})

    @staticmethod
    def _key(t):
        return round(float(t), 9)

    def __call__(self, i, j):
        # single-sample use: the only recorded time
        times = self.times()
        if len(times) != 1:
            raise MissingSensor("replay holds several time stamps; use at(t)")
        return self.at(times[0])(i, j)

    def record(self, t, i, j, reading: ConnectionReading):
        self.readings[(self._key(t), int(i), int(j))] = reading

    def at(self, t) -> SensorSource:
        key = self._key(t)

        def source(i, j):
            try:
                return self.readings[(key, int(i), int(j))]
            except KeyError as exc:
                raise MissingSensor(f"no reading at t={t} for ({i}, {j})") from exc
        return source

    def times(self) -> list:
        return sorted({k[0] for k in self.readings})

    @classmethod
    def from_csv(cls, path) -> "ReplaySensor":
        out = cls()
        with open(path, newline="") as fh:
            rows = csv.reader(fh)
            for row in rows:
                if not row or row[0] == "time":
                    continue
                v = [float(x) for x in row]
                pose = DualQuaternion(v[21:29]) if len(v) >= 29 else dq.ONE
                out.record(v[0], int(v[1]), int(v[2]),
                           ConnectionReading(dq.from_vec6(v[3:9]), dq.from_vec6(v[9:15]),
                                             dq.from_vec6(v[15:21]), pose))
        return out

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(SENSOR_COLUMNS)
            for (t, i, j) in sorted(self.readings):
                r = self.readings[(t, i, j)]
                vals = ([t, i, j] + list(dq.vec6(r.twist)) + list(dq.vec6(r.twist_derivative))
                        + list(dq.vec6(r.wrench)) + list(r.pose.c))
                w.writerow([str(v) if isinstance(v, int) else repr(float(v)) for v in vals])

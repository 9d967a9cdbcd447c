"""Quaternion and dual quaternion arithmetic.

A dual quaternion ``h = h_P + eps h_D`` is stored as eight floats in the order
``(P.w, P.x, P.y, P.z, D.w, D.x, D.y, D.z)``.  Poses are unit dual quaternions
``x = r + eps (1/2) p r``; twists and wrenches are pure dual quaternions.  The
twist convention is angular velocity in the primary part and linear velocity in
the dual part; wrenches carry force in the primary part and moment in the dual
part.

Everything here is plain Python on float tuples.  The recursions call these
functions tens of thousands of times per trajectory, and for 8-element values the
interpreter beats numpy's per-call overhead by a wide margin.
"""
from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

from .errors import EmptyVectorError, NotPureError, NotUnitError, ZeroPrimaryError

PURE_TOL = 1e-9
UNIT_TOL = 1e-6


class Quaternion:
    """Quaternion ``w + x i + y j + z k``."""

    __slots__ = ("w", "x", "y", "z")

    def __init__(self, w=0.0, x=0.0, y=0.0, z=0.0):
        self.w = float(w)
        self.x = float(x)
        self.y = float(y)
        self.z = float(z)

    @property
    def coeffs(self):
        return (self.w, self.x, self.y, self.z)

    @property
    def vec3(self):
        return (self.x, self.y, self.z)

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion(*_qmul(self.coeffs, other.coeffs))
        return Quaternion(self.w * other, self.x * other, self.y * other, self.z * other)

    __rmul__ = __mul__

    def __add__(self, other):
        return Quaternion(self.w + other.w, self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other):
        return Quaternion(self.w - other.w, self.x - other.x, self.y - other.y, self.z - other.z)

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __eq__(self, other):
        return isinstance(other, Quaternion) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def conj(self):
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm(self):
        return math.sqrt(self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z)

    def __repr__(self):
        return f"Quaternion({self.w!r}, {self.x!r}, {self.y!r}, {self.z!r})"


def _qmul(p, q):
    p0, p1, p2, p3 = p
    q0, q1, q2, q3 = q
    return (
        p0 * q0 - p1 * q1 - p2 * q2 - p3 * q3,
        p0 * q1 + p1 * q0 + p2 * q3 - p3 * q2,
        p0 * q2 - p1 * q3 + p2 * q0 + p3 * q1,
        p0 * q3 + p1 * q2 - p2 * q1 + p3 * q0,
    )


class DualNumber(NamedTuple):
    primary: float
    dual: float


class DualQuaternion:
    """Dual quaternion ``h_P + eps h_D`` with eps**2 = 0.  Immutable."""

    __slots__ = ("c",)

    def __init__(self, *coeffs):
        if len(coeffs) == 1 and not isinstance(coeffs[0], (int, float)):
            coeffs = tuple(coeffs[0])
        if len(coeffs) > 8:
            raise ValueError("a dual quaternion has at most 8 coefficients")
        c = tuple(float(v) for v in coeffs)
        self.c = c + (0.0,) * (8 - len(c))

    @classmethod
    def from_parts(cls, primary: Quaternion, dual: Quaternion | None = None):
        dual = dual if dual is not None else Quaternion()
        return _dq(primary.coeffs + dual.coeffs)

    @property
    def primary(self):
        return Quaternion(*self.c[:4])

    @property
    def dual(self):
        return Quaternion(*self.c[4:])

    def __add__(self, other):
        a, b = self.c, _coerce(other).c
        return _dq(tuple(x + y for x, y in zip(a, b)))

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self.c, _coerce(other).c
        return _dq(tuple(x - y for x, y in zip(a, b)))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __neg__(self):
        return _dq(tuple(-x for x in self.c))

    def __mul__(self, other):
        if isinstance(other, DualQuaternion):
            return mul(self, other)
        s = float(other)
        return _dq(tuple(s * x for x in self.c))

    def __rmul__(self, other):
        s = float(other)
        return _dq(tuple(s * x for x in self.c))

    def __truediv__(self, s):
        return _dq(tuple(x / s for x in self.c))

    def __eq__(self, other):
        if isinstance(other, (int, float)):
            other = DualQuaternion(other)
        return isinstance(other, DualQuaternion) and self.c == other.c

    def __hash__(self):
        return hash(self.c)

    def __iter__(self):
        return iter(self.c)

    def conj(self):
        return conj(self)

    def __repr__(self):
        return "DualQuaternion(" + ", ".join(repr(v) for v in self.c) + ")"


def _dq(c):
    h = object.__new__(DualQuaternion)
    h.c = c
    return h


def _coerce(v):
    if isinstance(v, DualQuaternion):
        return v
    return DualQuaternion(float(v))


ZERO = _dq((0.0,) * 8)
ONE = _dq((1.0,) + (0.0,) * 7)
I = _dq((0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0))
J = _dq((0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0))
K = _dq((0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0))
E = _dq((0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0))


# --- constructors -----------------------------------------------------------

def pure(primary=(0.0, 0.0, 0.0), dual=(0.0, 0.0, 0.0)):
    """Pure dual quaternion from two 3-vectors."""
    a, b, c = primary
    d, e, f = dual
    return _dq((0.0, float(a), float(b), float(c), 0.0, float(d), float(e), float(f)))


def from_vec6(v):
    return pure(v[:3], v[3:6])


def translation(p):
    """Pure translation ``1 + eps p/2``."""
    return _dq((1.0, 0.0, 0.0, 0.0, 0.0, 0.5 * p[0], 0.5 * p[1], 0.5 * p[2]))


def rotation(axis, angle):
    n = math.sqrt(axis[0] ** 2 + axis[1] ** 2 + axis[2] ** 2)
    s = math.sin(0.5 * angle) / n
    return _dq((math.cos(0.5 * angle), axis[0] * s, axis[1] * s, axis[2] * s, 0.0, 0.0, 0.0, 0.0))


def rot_x(angle):
    return _dq((math.cos(0.5 * angle), math.sin(0.5 * angle), 0.0, 0.0, 0.0, 0.0, 0.0, 0.0))


def rot_z(angle):
    return _dq((math.cos(0.5 * angle), 0.0, 0.0, math.sin(0.5 * angle), 0.0, 0.0, 0.0, 0.0))


def rotation_vector(v):
    """Rotation about ``v/|v|`` by ``|v|``; identity for a zero vector."""
    th = math.sqrt(v[0] ** 2 + v[1] ** 2 + v[2] ** 2)
    if th < 1e-300:
        return ONE
    return rotation(v, th)


def pose(r, p):
    """Pose ``r + eps (1/2) p r`` from a rotation (DualQuaternion or Quaternion) and a 3-vector."""
    rq = r.c[:4] if isinstance(r, DualQuaternion) else r.coeffs
    d = _qmul((0.0, 0.5 * p[0], 0.5 * p[1], 0.5 * p[2]), rq)
    return _dq(tuple(rq) + d)


def get_translation(x):
    """Translation vector ``p = 2 x_D r*`` of a pose."""
    c = x.c
    d = _qmul(c[4:], (c[0], -c[1], -c[2], -c[3]))
    return (2.0 * d[1], 2.0 * d[2], 2.0 * d[3])


def get_rotation(x):
    return _dq(x.c[:4] + (0.0, 0.0, 0.0, 0.0))


# --- operations -------------------------------------------------------------

def mul(a, b):
    """Dual quaternion product; the eps**2 term vanishes."""
    a0, a1, a2, a3, a4, a5, a6, a7 = a.c
    b0, b1, b2, b3, b4, b5, b6, b7 = b.c
    return _dq((
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        a0 * b4 - a1 * b5 - a2 * b6 - a3 * b7 + a4 * b0 - a5 * b1 - a6 * b2 - a7 * b3,
        a0 * b5 + a1 * b4 + a2 * b7 - a3 * b6 + a4 * b1 + a5 * b0 + a6 * b3 - a7 * b2,
        a0 * b6 - a1 * b7 + a2 * b4 + a3 * b5 + a4 * b2 - a5 * b3 + a6 * b0 + a7 * b1,
        a0 * b7 + a1 * b6 - a2 * b5 + a3 * b4 + a4 * b3 + a5 * b2 - a6 * b1 + a7 * b0,
    ))


def conj(h):
    c = h.c
    return _dq((c[0], -c[1], -c[2], -c[3], c[4], -c[5], -c[6], -c[7]))


def norm(h):
    """Dual-number norm ``sqrt(h h*)`` as (|h_P|, <h_P, h_D>/|h_P|)."""
    c = h.c
    a = math.sqrt(c[0] ** 2 + c[1] ** 2 + c[2] ** 2 + c[3] ** 2)
    if a < 1e-14:
        raise ZeroPrimaryError("norm is undefined for a zero primary part")
    b = (c[0] * c[4] + c[1] * c[5] + c[2] * c[6] + c[3] * c[7]) / a
    return DualNumber(a, b)


def swap(h):
    c = h.c
    return _dq(c[4:] + c[:4])


def get_primary(h):
    return Quaternion(*h.c[:4])


def get_dual(h):
    return Quaternion(*h.c[4:])


def is_pure(h, tol=PURE_TOL):
    return abs(h.c[0]) <= tol and abs(h.c[4]) <= tol


def is_unit(h, tol=UNIT_TOL):
    c = h.c
    n2 = c[0] ** 2 + c[1] ** 2 + c[2] ** 2 + c[3] ** 2
    dot = c[0] * c[4] + c[1] * c[5] + c[2] * c[6] + c[3] * c[7]
    return abs(n2 - 1.0) <= tol and abs(dot) <= tol


def check_pure(h, what="value"):
    if not is_pure(h):
        raise NotPureError(f"{what} is not a pure dual quaternion: {h!r}")
    return h


def normalize(x):
    """Renormalise a near-unit pose: unit primary, dual orthogonal to it."""
    c = x.c
    n = math.sqrt(c[0] ** 2 + c[1] ** 2 + c[2] ** 2 + c[3] ** 2)
    if n < 1e-14:
        raise ZeroPrimaryError("cannot normalise a pose with zero primary part")
    p = tuple(v / n for v in c[:4])
    d = tuple(v / n for v in c[4:])
    dot = sum(pi * di for pi, di in zip(p, d))
    d = tuple(di - dot * pi for pi, di in zip(p, d))
    return _dq(p + d)


def log(x):
    """Logarithm ``(phi n + eps p)/2`` of a pose, with phi in [0, 2 pi)."""
    if not is_unit(x):
        raise NotUnitError(f"log requires a unit dual quaternion, got {x!r}")
    c = x.c
    s = math.sqrt(c[1] ** 2 + c[2] ** 2 + c[3] ** 2)
    phi = 2.0 * math.atan2(s, c[0])
    if s < 1e-15:
        nx = ny = nz = 0.0
    else:
        nx, ny, nz = c[1] / s, c[2] / s, c[3] / s
    p = get_translation(x)
    return _dq((0.0, 0.5 * phi * nx, 0.5 * phi * ny, 0.5 * phi * nz,
                0.0, 0.5 * p[0], 0.5 * p[1], 0.5 * p[2]))


def exp_pose(g):
    """Inverse of :func:`log`: the pose whose logarithm is the pure ``g``."""
    c = g.c
    half = math.sqrt(c[1] ** 2 + c[2] ** 2 + c[3] ** 2)
    if half < 1e-300:
        r = (1.0, 0.0, 0.0, 0.0)
    else:
        s = math.sin(half) / half
        r = (math.cos(half), c[1] * s, c[2] * s, c[3] * s)
    return pose(Quaternion(*r), (2.0 * c[5], 2.0 * c[6], 2.0 * c[7]))


def _rotate(r0, r1, r2, r3, vx, vy, vz):
    # v + 2 w (u x v) + 2 u x (u x v) for unit r = (w, u)
    tx = 2.0 * (r2 * vz - r3 * vy)
    ty = 2.0 * (r3 * vx - r1 * vz)
    tz = 2.0 * (r1 * vy - r2 * vx)
    return (vx + r0 * tx + r2 * tz - r3 * ty,
            vy + r0 * ty + r3 * tx - r1 * tz,
            vz + r0 * tz + r1 * ty - r2 * tx)


def adjoint(x, a):
    """Frame change ``x a x*`` of ``a`` by the pose ``x``.

    Evaluated in closed form for unit ``x``: the primary part is rotated and the
    dual part picks up ``p x (rotated primary)``.
    """
    r0, r1, r2, r3, d0, d1, d2, d3 = x.c
    a0, a1, a2, a3, a4, a5, a6, a7 = a.c
    # p/2 = x_D r*
    px = 2.0 * (-d0 * r1 + d1 * r0 - d2 * r3 + d3 * r2)
    py = 2.0 * (-d0 * r2 + d1 * r3 + d2 * r0 - d3 * r1)
    pz = 2.0 * (-d0 * r3 - d1 * r2 + d2 * r1 + d3 * r0)
    vx, vy, vz = _rotate(r0, r1, r2, r3, a1, a2, a3)
    wx, wy, wz = _rotate(r0, r1, r2, r3, a5, a6, a7)
    return _dq((a0, vx, vy, vz,
                a4, wx + py * vz - pz * vy, wy + pz * vx - px * vz, wz + px * vy - py * vx))


def adjoint_n(X: Sequence[DualQuaternion], a):
    """Element-wise adjoint ``[Ad(x_1) a, ..., Ad(x_n) a]``."""
    if len(X) == 0:
        raise EmptyVectorError("adjoint_n needs at least one pose")
    return [adjoint(x, a) for x in X]


def cross(a, b):
    """Commutator ``(ab - ba)/2`` of two pure dual quaternions."""
    _, a1, a2, a3, _, a5, a6, a7 = a.c
    _, b1, b2, b3, _, b5, b6, b7 = b.c
    # the two dual terms are formed separately so cross(a, b) == -cross(b, a) exactly
    return _dq((
        0.0,
        a2 * b3 - a3 * b2,
        a3 * b1 - a1 * b3,
        a1 * b2 - a2 * b1,
        0.0,
        (a2 * b7 - a3 * b6) + (a6 * b3 - a7 * b2),
        (a3 * b5 - a1 * b7) + (a7 * b1 - a5 * b3),
        (a1 * b6 - a2 * b5) + (a5 * b2 - a6 * b1),
    ))


def vec6(h):
    if not is_pure(h):
        raise NotPureError(f"vec6 requires a pure dual quaternion, got {h!r}")
    c = h.c
    return np.array([c[1], c[2], c[3], c[5], c[6], c[7]])


def vec8(h):
    return np.array(h.c)


def add_vectors(u, v):
    """Element-wise sum of two equally long lists of dual quaternions."""
    out = []
    for a, b in zip(u, v):
        out.append(_dq(tuple(x + y for x, y in zip(a.c, b.c))))
    return out


def max_abs_diff(a, b):
    return max(abs(x - y) for x, y in zip(a.c, b.c))

import pathlib

import numpy as np
import pytest
from hypothesis import strategies as st

from branchdyn import dq

DATA = pathlib.Path(__file__).resolve().parents[1] / "src" / "branchdyn" / "data"

coeff = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False, allow_infinity=False)
vec3 = st.tuples(coeff, coeff, coeff)
angle = st.floats(min_value=-np.pi, max_value=np.pi, allow_nan=False)


@st.composite
def poses(draw):
    axis = draw(vec3.filter(lambda v: np.linalg.norm(v) > 1e-3))
    return dq.pose(dq.rotation(axis, draw(angle)), draw(vec3))


@st.composite
def pure_dqs(draw):
    return dq.pure(draw(vec3), draw(vec3))


def random_pose(rng, max_translation=1.0):
    axis = rng.normal(size=3)
    return dq.pose(dq.rotation(axis, rng.uniform(-np.pi, np.pi)), rng.uniform(-1, 1, 3) * max_translation)


def random_pure(rng, scale=1.0):
    return dq.pure(rng.normal(size=3) * scale, rng.normal(size=3) * scale)


def random_state(tree, rng, scale=1.0):
    n = tree.dof
    q, qd, qdd = (rng.normal(size=n) * scale for _ in range(3))
    return q, qd, qdd


def split_state(tree, q, qd, qdd):
    return tree.split(q), tree.split(qd), tree.split(qdd)


def max_diff(a, b):
    return max(dq.max_abs_diff(x, y) for x, y in zip(a, b))


@pytest.fixture
def rng():
    return np.random.default_rng(20231016)


def mobile_case(rng, scale=0.5):
    """A random state of the full mobile robot and the matching black-box inputs.

    Returns (full, bb, full_state, bb_state, readings) where the readings come
    from the spatial-algebra oracle run on the full robot.
    """
    from branchdyn import oracle, presets
    full, bb = presets.mobile_full(), presets.mobile_black_box()
    flat = oracle.flatten(full)
    q, qd, qdd = (rng.normal(size=flat.dof) * scale for _ in range(3))
    readings = {k: oracle.connection_reading(flat, src, q, qd, qdd)
                for k, src in presets.MBB_READING_SOURCE.items()}
    fs = split_state(full, q, qd, qdd)
    bs = tuple({i: s[presets.MBB_TO_FULL[i]] for i in presets.MBB_TO_FULL} for s in fs)
    return full, bb, fs, bs, readings

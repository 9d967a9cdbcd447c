"""Regenerate the robot description files shipped in src/branchdyn/data."""
import pathlib

import numpy as np

from branchdyn import control, dq, presets
from branchdyn.robot import chain_tree, serialize_robot

DATA = pathlib.Path(__file__).resolve().parents[1] / "src" / "branchdyn" / "data"

# small pose offsets (log coordinates: half rotation vector, half translation)
TARGET_OFFSETS = {
    4: ((0.10, -0.05, 0.08), (0.02, 0.01, -0.03)),
    5: ((-0.12, 0.06, 0.0), (0.0, -0.02, 0.015)),
    7: ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0)),  # hold the initial pose
    9: ((0.05, 0.15, -0.1), (0.01, 0.0, 0.02)),
    10: ((0.0, -0.08, 0.2), (-0.015, 0.02, 0.0)),
}


def control_section(tree):
    Q = {i: np.zeros(tree.subsystems[i].dof) for i in tree.modeled_ids()}
    _, fp = control.initial_errors(tree, [], Q)
    targets = []
    for leaf, (w, v) in TARGET_OFFSETS.items():
        x0 = control.end_effector_pose(tree, fp, leaf)
        # x_err = x_d* x0 = exp(g)  =>  x_d = x0 exp(g)*
        g = dq.pure(w, v)
        xd = dq.mul(x0, dq.conj(dq.exp_pose(g)))
        targets.append({"leaf": leaf, "x_d": list(xd.c)})
    return {"control": {"kp": 4.0, "kv": 4.0, "dt": 1e-3, "T": 10.0, "realization": "log",
                        "targets": targets}}


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    (DATA / "arm3.toml").write_text(serialize_robot(chain_tree(presets.arm_links())))
    (DATA / "bm.toml").write_text(serialize_robot(presets.branched_manipulator()))
    (DATA / "mbm.toml").write_text(serialize_robot(presets.mobile_black_box()))
    full = presets.mobile_full()
    (DATA / "mbm_full.toml").write_text(serialize_robot(full, control_section(full)))


if __name__ == "__main__":
    main()

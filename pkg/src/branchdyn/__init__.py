"""Modular inverse dynamics of branched robots in dual quaternion algebra."""
from . import composition, control, dq, metrics, oracle, robot, serial_ne
from .composition import ConnectionReading, ReplaySensor, dmc, export_graph_dot
from .dq import DualQuaternion, Quaternion
from .robot import JointKind, RobotTree, load_robot, parse_robot_description

__all__ = [
    "composition", "control", "dq", "metrics", "oracle", "robot", "serial_ne",
    "ConnectionReading", "ReplaySensor", "dmc", "export_graph_dot",
    "DualQuaternion", "Quaternion", "JointKind", "RobotTree", "load_robot",
    "parse_robot_description",
]

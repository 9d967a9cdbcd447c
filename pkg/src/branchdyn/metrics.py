"""Waveform comparison metrics and the sinusoidal test trajectory."""
from __future__ import annotations

import numpy as np

from .errors import DegenerateVariance, LengthMismatch


def rmse(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise LengthMismatch(f"waveforms differ in length: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def cmc(waveforms) -> float:
    """Coefficient of multiple correlation of G aligned waveforms (rows).

    CMC = sqrt(1 - [sum (y_gf - mean_f)^2 / (F (G-1))] / [sum (y_gf - mean)^2 / (G F - 1)]),
    clamped at zero.  Identical waveforms give 1.
    """
    lengths = {len(w) for w in waveforms}
    if len(lengths) != 1:
        raise LengthMismatch("waveforms differ in length")
    y = np.asarray(waveforms, dtype=float)
    G, F = y.shape
    if G < 2 or F < 2:
        raise LengthMismatch("need at least two waveforms of at least two samples")
    within = np.sum((y - y.mean(axis=0)) ** 2) / (F * (G - 1))
    total = np.sum((y - y.mean()) ** 2) / (G * F - 1)
    if total < 1e-30:
        if np.all(y == y[0]):
            return 1.0
        raise DegenerateVariance("total variance is zero")
    return float(np.sqrt(max(0.0, 1.0 - within / total)))


def gen_trajectory(dof, amplitude=0.01, frequency=1.0, duration=10.0, rate=100.0):
    """q = A sin(2 pi f t) on every joint, with exact derivatives.

    Returns (t, Q, Qd, Qdd) with one row per sample.
    """
    if duration <= 0 or rate <= 0:
        raise ValueError("duration and rate must be positive")
    t = np.arange(int(round(duration * rate))) / rate
    w = 2.0 * np.pi * frequency
    s, c = np.sin(w * t), np.cos(w * t)
    ones = np.ones(dof)
    Q = amplitude * np.outer(s, ones)
    Qd = amplitude * w * np.outer(c, ones)
    Qdd = -amplitude * w * w * np.outer(s, ones)
    return t, Q, Qd, Qdd


def summarize(values) -> dict:
    v = np.asarray(values, dtype=float)
    return {"min": float(v.min()), "max": float(v.max()), "mean": float(v.mean()), "std": float(v.std())}

"""Plain-text artifact files: coefficient dumps and run reports.

Coefficient dump (bit-exact regression format):

    gnf-fields 1
    <num_nodes> <num_vertices>
    u1 u2 u3        (num_nodes lines, %.17g)
    pi              (num_vertices lines)
"""

from __future__ import annotations

import json

import numpy as np


def write_coefficients(path, u, pressure):
    u = np.asarray(u)
    pressure = np.asarray(pressure)
    with open(path, "w") as f:
        f.write("gnf-fields 1\n")
        f.write(f"{u.shape[0]} {pressure.shape[0]}\n")
        for row in u:
            f.write(" ".join(format(v, ".17g") for v in row) + "\n")
        for v in pressure:
            f.write(format(v, ".17g") + "\n")


def read_coefficients(path):
    with open(path) as f:
        header = f.readline().split()
        if not header or header[0] != "gnf-fields":
            raise ValueError(f"{path}: not a coefficient dump")
        nn, nv = (int(t) for t in f.readline().split())
        u = np.array([[float(t) for t in f.readline().split()]
                      for _ in range(nn)])
        pressure = np.array([float(f.readline()) for _ in range(nv)])
    return u, pressure


def _native(obj):
    if isinstance(obj, dict):
        return {k: _native(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_native(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


def write_report(path, payload):
    """Structured run report; keys are sorted so reruns are byte-identical."""
    with open(path, "w") as f:
        json.dump(_native(payload), f, indent=2, sort_keys=True)
        f.write("\n")

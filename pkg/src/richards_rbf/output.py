"""CSV writers for profiles, mass series, metadata and comparison summaries.

Numbers are written with ``repr`` so they round-trip exactly, which makes
repeated runs of the same configuration byte-identical.
"""
import csv
import os

import numpy as np

from .metrics import total_mass


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def time_label(t):
    return f"{t:.10g}"


def profile_path(directory, t, prefix="profile"):
    return os.path.join(directory, f"{prefix}_t{time_label(t)}.csv")


def write_profile(path, coords, theta, S, h, u):
    """One profile in node order: ``z,...`` (1D) or ``x,z,...`` (2D)."""
    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 1:
        coords = coords[:, None]
    header = (["z"] if coords.shape[1] == 1 else ["x", "z"]) + ["theta", "S", "h", "u"]
    rows = (list(c) + [a, b, c_, d] for c, a, b, c_, d in zip(coords, theta, S, h, u))
    return _write(path, header, rows)


def write_profiles(trajectory, nodes, path, prefix="profile"):
    """One CSV per output time in directory ``path``; returns the file paths."""
    if not trajectory.fields:
        raise ValueError("trajectory has no fields to write")
    os.makedirs(path, exist_ok=True)
    out = []
    for f in trajectory.fields:
        out.append(write_profile(profile_path(path, f.t, prefix), nodes.coords,
                                 f.theta, f.S, f.h, f.u))
    return out


def write_mass_series(trajectory, nodes, path):
    """``t,mass_per_unit_length`` for every stored field."""
    rows = [(f.t, total_mass(f, nodes)) for f in trajectory.fields]
    return _write(path, ["t", "mass_per_unit_length"], rows)


def write_run_meta(path, scenario, extra=()):
    """``key,value,source`` rows: every parameter with its origin."""
    rows = list(scenario.metadata()) + [(k, v, "run") for k, v in extra]
    return _write(path, ["key", "value", "source"], rows)


def write_summary(path, entries):
    """Comparison summary; ``entries`` is a list of ``(t, ComparisonReport)``."""
    rows = [(t, r.rmse, r.rel_l1, r.n_points, r.interpolated) for t, r in entries]
    return _write(path, ["t", "rmse", "rel_l1", "n_points", "interpolated"], rows)


PLOT_SCRIPT = '''"""Plot the CSV output of a run.  Usage: python plot_results.py [dir]"""
import glob
import os
import sys

import matplotlib.pyplot as plt
import numpy as np

d = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.abspath(__file__))
fig, ax = plt.subplots(1, 2, figsize=(10, 5))
for path in sorted(glob.glob(os.path.join(d, "profile_t*.csv")),
                   key=lambda p: float(p.rsplit("_t", 1)[1][:-4])):
    data = np.genfromtxt(path, delimiter=",", names=True)
    label = "t=" + path.rsplit("_t", 1)[1][:-4]
    if "x" in data.dtype.names:
        x0 = data["x"].min()
        data = data[data["x"] == x0]
    ax[0].plot(data["theta"], data["z"], label=label)
ax[0].invert_yaxis()
ax[0].set_xlabel("theta")
ax[0].set_ylabel("z [cm]")
ax[0].legend()
mass = os.path.join(d, "mass_series.csv")
if os.path.exists(mass):
    m = np.genfromtxt(mass, delimiter=",", names=True)
    ax[1].plot(m["t"], m["mass_per_unit_length"], "o-")
    ax[1].set_xlabel("t [min]")
    ax[1].set_ylabel("mass per unit length")
fig.tight_layout()
fig.savefig(os.path.join(d, "results.png"), dpi=120)
'''


def write_plot_script(directory):
    path = os.path.join(directory, "plot_results.py")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(PLOT_SCRIPT)
    return path

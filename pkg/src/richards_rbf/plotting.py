"""Optional PNG figures rendered next to the CSV output."""
import os

import numpy as np
from matplotlib.figure import Figure

from .metrics import total_mass
from .output import time_label


def _depth_profile(field, nodes):
    if nodes.dim == 1:
        return nodes.z, field.theta
    n_z, n_x = nodes.shape
    return nodes.coords[::n_x, 1], field.theta.reshape(n_z, n_x).mean(axis=1)


def render_figures(trajectory, nodes, directory, reference=None):
    """Write ``profiles.png``, ``mass_series.png`` and, in 2D, ``theta_2d.png``.

    Parameters
    ----------
    reference : list of (t, z, theta), optional
        Oracle profiles drawn as dashed lines on the profile figure.
    """
    os.makedirs(directory, exist_ok=True)
    paths = []

    fig = Figure(figsize=(5, 6))
    ax = fig.add_subplot()
    for f in trajectory.fields:
        z, th = _depth_profile(f, nodes)
        ax.plot(th, z, label=f"t={time_label(f.t)} min")
    for t, z, th in reference or ():
        ax.plot(th, z, "k--", lw=0.8)
    ax.invert_yaxis()
    ax.set_xlabel(r"$\theta$")
    ax.set_ylabel("z [cm]")
    ax.legend(fontsize="small")
    fig.tight_layout()
    paths.append(os.path.join(directory, "profiles.png"))
    fig.savefig(paths[-1], dpi=120)

    fig = Figure(figsize=(5, 4))
    ax = fig.add_subplot()
    ax.plot(trajectory.times, [total_mass(f, nodes) for f in trajectory.fields], "o-")
    ax.set_xlabel("t [min]")
    ax.set_ylabel("mass per unit length")
    fig.tight_layout()
    paths.append(os.path.join(directory, "mass_series.png"))
    fig.savefig(paths[-1], dpi=120)

    if nodes.dim == 2 and trajectory.fields:
        n_z, n_x = nodes.shape
        f = trajectory.fields[-1]
        fig = Figure(figsize=(5, 5))
        ax = fig.add_subplot()
        x = nodes.coords[:n_x, 0]
        z = nodes.coords[::n_x, 1]
        mesh = ax.pcolormesh(x, z, np.reshape(f.theta, (n_z, n_x)), shading="auto")
        fig.colorbar(mesh, ax=ax, label=r"$\theta$")
        ax.invert_yaxis()
        ax.set_xlabel("x [cm]")
        ax.set_ylabel("z [cm]")
        ax.set_title(f"t={time_label(f.t)} min")
        fig.tight_layout()
        paths.append(os.path.join(directory, "theta_2d.png"))
        fig.savefig(paths[-1], dpi=120)
    return paths

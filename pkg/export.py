"""
export.py - CSV, SVG and text output for the rotating Kepler toolkit

This module writes trajectories, verification reports, toric profiles, the
resonance catalogue and the trees as CSV, and renders the moment-image figures
as static SVG. Floats are written with 17 significant digits so that a CSV can
be read back bit for bit; the SVG backend is configured so that repeated runs
produce identical bytes.
"""

import csv
import logging

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402

import dynamics  # noqa: E402
from phase_space import DomainError  # noqa: E402
from root_solver import CRITICAL_ENERGY  # noqa: E402
from toric_domain import Component, boundary_g  # noqa: E402

logger = logging.getLogger(__name__)

SVG_RC = {
    'svg.hashsalt': 'rotating-kepler',
    'svg.fonttype': 'none',
    'path.simplify': False,
}

COLORS = {
    Component.BOUNDED: '#1e88e5',
    Component.UNBOUNDED: '#0d47a1',
    Component.CONNECTED: '#1e88e5',
}


def fmt(x):
    return f"{x:.17g}"


def _writer(out):
    return csv.writer(out, lineterminator='\n')


def write_trajectory_csv(traj, out, comments=()):
    """
    Write a planar trajectory with its energies.

    Args:
        traj (Trajectory): Planar samples
        out (file): Text stream
        comments (iterable): Lines written first, each prefixed by '# '
    """
    for line in comments:
        out.write(f"# {line}\n")
    if traj.truncated:
        out.write(f"# status: {traj.message}\n")
    writer = _writer(out)
    writer.writerow(['t', 'q1', 'q2', 'p1', 'p2', 'H', 'L', 'K'])
    for t, pt in zip(traj.times, traj.states):
        bundle = dynamics.energies(pt)
        writer.writerow([fmt(v) for v in (t, *pt.q, *pt.p, bundle.H, bundle.L, bundle.K)])


def write_report_csv(results, out):
    writer = _writer(out)
    writer.writerow(['check', 'n_samples', 'max_residual', 'tolerance', 'pass'])
    for r in results:
        writer.writerow([r.name, r.n_samples, fmt(r.max_residual), fmt(r.tolerance),
                         'true' if r.passed else 'false'])


def write_profile_csv(profiles, out):
    """
    Write profile samples; corners come first as rows tagged corner_a, corner_b, corner_b_u.

    Args:
        profiles (list): DomainProfile entries sharing one energy
        out (file): Text stream
    """
    writer = _writer(out)
    writer.writerow(['t', 'g', 'component', 'c'])
    if not profiles:
        return
    first = profiles[0]
    c = first.c
    tags = [('corner_a', first.a), ('corner_b', first.b), ('corner_b_u', first.b_u)]
    for tag, t in tags:
        if t is not None:
            writer.writerow([fmt(t), fmt(boundary_g(c, t)), tag, fmt(c)])
    for prof in profiles:
        for t, g in prof.samples:
            writer.writerow([fmt(t), fmt(g), prof.component.value, fmt(prof.c)])


def write_catalogue_csv(rows, out, energy=None):
    """Catalogue rows; an extra in_window column is added when an energy is given."""
    writer = _writer(out)
    header = ['k', 'l', 'c_kl', 'L_kl', 'c_minus', 'c_plus', 'class']
    if energy is not None:
        header.append('in_window')
    writer.writerow(header)
    for row in rows:
        line = [row.label.k, row.label.l, fmt(row.c_kl), fmt(row.L_kl), fmt(row.c_minus),
                fmt(row.c_plus), row.classification.value]
        if energy is not None:
            line.append('true' if row.in_window(energy) else 'false')
        writer.writerow(line)


def write_tree_csv(rows, out):
    writer = _writer(out)
    writer.writerow(['depth', 'index', 'path', 'k', 'l', 'value'])
    for row in rows:
        writer.writerow([row.depth, row.index, row.path, row.k, row.l, str(row.value)])


def plot_extent(profiles):
    """Half-width of the plotted window: the outer corner b_u below -3/2, the sampled range above."""
    if profiles[0].b_u is not None:
        return profiles[0].b_u
    return max(float(p.t[-1]) for p in profiles) / 1.2


def render_profile_svg(profiles, path):
    """
    Render the moment image of K~ <= c.

    Bounded regions are filled, unbounded ones outlined, and at the critical
    energy the point (1/2, -1/2) where the components touch is marked.

    Args:
        profiles (list): DomainProfile entries sharing one energy
        path (str or Path): Output file
    """
    if not profiles:
        raise DomainError("Nothing to render")
    c = profiles[0].c
    extent = plot_extent(profiles)

    with plt.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(6, 6))
        cone = [0.0, 1.2 * extent]
        ax.plot(cone, cone, color='#757575', linewidth=0.8)
        ax.plot(cone, [-x for x in cone], color='#757575', linewidth=0.8)
        for prof in profiles:
            outline = prof.outline()
            color = COLORS[prof.component]
            if prof.component == Component.UNBOUNDED:
                ax.plot(outline[:, 0], outline[:, 1], color=color, linewidth=1.2,
                        label=prof.component.value)
            else:
                ax.fill(outline[:, 0], outline[:, 1], color=color, alpha=0.5,
                        label=prof.component.value)
        if c == CRITICAL_ENERGY:
            ax.plot([0.5], [-0.5], marker='o', color='#d32f2f', linestyle='none',
                    label='critical point')
        ax.set_xlim(0.0, 1.2 * extent)
        ax.set_ylim(-1.2 * extent, 1.2 * extent)
        ax.set_xlabel('mu1')
        ax.set_ylabel('mu2')
        ax.set_title(f'K~ <= {c:g}')
        ax.legend(loc='upper left')
        fig.savefig(path, format='svg', metadata={'Date': None})
        plt.close(fig)
    logger.info("Wrote %s", path)

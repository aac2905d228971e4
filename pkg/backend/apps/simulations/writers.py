# FILE: /backend/apps/simulations/writers.py
"""
Result files of a run: snapshots.csv, timeseries.csv, audit.csv, run.json and
an optional SVG plot. Floats are written with 12 significant digits and -0 is
normalized, so identical runs produce byte-identical files.
"""
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from django.template.loader import render_to_string

from backend.apps.spectral.utils.quadrature import reconstruct
from backend.core.conf import solver_setting
from backend.core.exceptions import OutputError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.12g'
SVG_WIDTH, SVG_HEIGHT = 800, 500
SVG_MARGINS = {'left': 80, 'right': 150, 'top': 30, 'bottom': 50}
SVG_TICKS = 6
PALETTE = ('#1f77b4', '#ff7f0e', '#2ca02c', '#d62728', '#9467bd', '#8c564b', '#e377c2', '#7f7f7f', '#bcbd22', '#17becf')


@dataclass(frozen=True)
class RunPaths:
    root: Path

    @classmethod
    def under(cls, out_dir):
        return cls(root=Path(out_dir))

    @property
    def snapshots(self):
        return self.root / 'snapshots.csv'

    @property
    def timeseries(self):
        return self.root / 'timeseries.csv'

    @property
    def audit(self):
        return self.root / 'audit.csv'

    @property
    def metadata(self):
        return self.root / 'run.json'

    @property
    def plot(self):
        return self.root / 'plot.svg'

    def ensure(self):
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OutputError(self.root, exc.strerror)
        return self


def _clean(values):
    """-0.0 -> 0.0"""
    values = np.asarray(values, dtype=float)
    return np.where(values == 0.0, 0.0, values)


def _write_frame(frame, path):
    try:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    except OSError as exc:
        raise OutputError(path, exc.strerror)
    logger.debug(f'Wrote {path} ({len(frame)} rows)')
    return Path(path)


def plot_grid(L, points=None):
    points = points or solver_setting('SOLVER_PLOT_POINTS', 201)
    return np.linspace(0.0, L, int(points))


def physical_profile(trajectory, state, grid):
    """u = u_n + g on the grid."""
    values = reconstruct(trajectory.basis, state.c, grid)
    if trajectory.spec.has_lifting:
        values = values + trajectory.spec.lifting(grid)
    return values


def snapshot_frame(trajectory, plot_points=None):
    grid = plot_grid(trajectory.spec.L, plot_points)
    blocks = []
    for state in trajectory.snapshots:
        blocks.append(pd.DataFrame({
            't': np.full(grid.size, state.t),
            'x': grid,
            'u': physical_profile(trajectory, state, grid),
        }))
    frame = pd.concat(blocks, ignore_index=True)
    return frame.apply(_clean)


def timeseries_frame(trajectory):
    frame = pd.DataFrame([
        {
            't': report.t,
            'l2': report.l2,
            'vnorm_sq': report.vnorm_sq,
            'l4_4': report.l4_4,
            'potential': report.potential,
            'energy': report.energy,
            'dissipation_cum': report.dissipation_cum,
        }
        for report in trajectory.reports
    ])
    return frame.apply(_clean)


def audit_frame(records):
    rows = []
    for record in records:
        # informational rows are kept apart from the enforced ones by name
        check = record.check if record.enforced else f'info:{record.check}'
        rows.append({
            'check': check,
            'lhs': float(_clean(record.lhs)),
            'rhs': float(_clean(record.rhs)),
            'margin': float(_clean(record.margin)),
            'pass': 'true' if record.passed else 'false',
        })
    return pd.DataFrame(rows, columns=['check', 'lhs', 'rhs', 'margin', 'pass'])


def write_csv(trajectory, paths, plot_points=None):
    """snapshots.csv and timeseries.csv for one trajectory."""
    paths.ensure()
    return [
        _write_frame(snapshot_frame(trajectory, plot_points), paths.snapshots),
        _write_frame(timeseries_frame(trajectory), paths.timeseries),
    ]


def write_audit(records, path):
    return _write_frame(audit_frame(records), path)


def _table_frame(rows, columns):
    frame = pd.DataFrame(rows, columns=columns)
    for column in frame.select_dtypes(include='number').columns:
        frame[column] = _clean(frame[column])
    return frame


def write_table(rows, columns, path):
    """Any scenario-specific table (convergence, sweep, order checks)."""
    return _write_frame(_table_frame(rows, columns), path)


def table_csv(rows, columns, float_format='%.15g'):
    """The same table as CSV text, for stdout."""
    return _table_frame(rows, columns).to_csv(index=False, float_format=float_format, lineterminator='\n')


def run_metadata(trajectory, **extra):
    spec, scheme = trajectory.spec, trajectory.scheme
    metadata = {
        'problem': {
            'm': spec.m,
            'L': spec.L,
            'T': spec.T,
            'gamma': spec.gamma,
            'beta': spec.beta,
            'bc_left': spec.bc_left,
            'bc_right': spec.bc_right,
            'u0': spec.u0.describe(),
            'forcing': spec.forcing.describe(),
            'reaction': spec.reaction,
        },
        'discretization': {
            'n': trajectory.n,
            'scheme': scheme.kind,
            'tau': scheme.tau,
            'store_every': scheme.store_every,
            'halvings': trajectory.halvings,
            'panels': trajectory.rule.panels,
            'gauss_points': trajectory.rule.points_per_panel,
        },
        'snapshots': len(trajectory.snapshots),
    }
    metadata.update(extra)
    return metadata


def write_metadata(metadata, path):
    try:
        with open(path, 'w', encoding='utf-8', newline='\n') as handle:
            json.dump(metadata, handle, sort_keys=True, indent=2)
            handle.write('\n')
    except OSError as exc:
        raise OutputError(path, exc.strerror)
    return Path(path)


def _ticks(lo, hi):
    return [lo + (hi - lo) * i / (SVG_TICKS - 1) for i in range(SVG_TICKS)]


def svg_context(trajectory, plot_points=None):
    grid = plot_grid(trajectory.spec.L, plot_points)
    profiles = [(state.t, physical_profile(trajectory, state, grid)) for state in trajectory.snapshots]

    u_lo = min(float(values.min()) for _, values in profiles)
    u_hi = max(float(values.max()) for _, values in profiles)
    if math.isclose(u_lo, u_hi, rel_tol=0.0, abs_tol=1e-12):
        u_lo, u_hi = u_lo - 0.5, u_hi + 0.5
    x_lo, x_hi = 0.0, float(trajectory.spec.L)

    left, top = SVG_MARGINS['left'], SVG_MARGINS['top']
    right = SVG_WIDTH - SVG_MARGINS['right']
    bottom = SVG_HEIGHT - SVG_MARGINS['bottom']

    def sx(x):
        return left + (x - x_lo) / (x_hi - x_lo) * (right - left)

    def sy(u):
        return bottom - (u - u_lo) / (u_hi - u_lo) * (bottom - top)

    curves = []
    for index, (t, values) in enumerate(profiles):
        points = ' '.join(f'{sx(x):.3f},{sy(u):.3f}' for x, u in zip(grid, values))
        curves.append({
            'points': points,
            'color': PALETTE[index % len(PALETTE)],
            'label': f't = {t:.6g}',
            'legend_y': top + 18 * index,
        })

    return {
        'width': SVG_WIDTH,
        'height': SVG_HEIGHT,
        'plot': {'left': left, 'right': right, 'top': top, 'bottom': bottom},
        'legend_x': right + 15,
        'curves': curves,
        'x_ticks': [{'pos': f'{sx(v):.3f}', 'label': f'{v:.6g}'} for v in _ticks(x_lo, x_hi)],
        'y_ticks': [{'pos': f'{sy(v):.3f}', 'label': f'{v:.6g}'} for v in _ticks(u_lo, u_hi)],
        'title': f'm={trajectory.spec.m}, n={trajectory.n}, {trajectory.spec.u0.describe()}',
    }


def write_svg(trajectory, path, plot_points=None):
    """Overlay of all stored snapshots, one polyline each, with a legend."""
    content = render_to_string('simulations/trajectory.svg', svg_context(trajectory, plot_points))
    try:
        Path(path).write_text(content, encoding='utf-8')
    except OSError as exc:
        raise OutputError(path, exc.strerror)
    return Path(path)


def write_run(trajectory, out_dir, records=(), svg=False, plot_points=None, **metadata):
    """All files of one run under out_dir. Returns the written paths."""
    paths = RunPaths.under(out_dir).ensure()
    names = [paths.snapshots, paths.timeseries, paths.audit, paths.metadata] + ([paths.plot] if svg else [])
    metadata.setdefault('files', [path.name for path in names])
    written = write_csv(trajectory, paths, plot_points)
    written.append(write_audit(records, paths.audit))
    written.append(write_metadata(run_metadata(trajectory, **metadata), paths.metadata))
    if svg:
        written.append(write_svg(trajectory, paths.plot, plot_points))
    logger.info(f'Run written to {paths.root}')
    return written

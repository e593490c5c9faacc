"""
CSV and JSON persistence for command outputs.

All CSV files are UTF-8, comma separated, with ``.`` as decimal mark and
floats written with 17 significant digits, so identical runs in
deterministic mode produce byte-identical files.
"""

import csv
import logging
import os
from pathlib import Path

from .serializers import render_json

logger = logging.getLogger('potlab')


def format_value(value):
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (int,)) or (hasattr(value, 'dtype') and value.dtype.kind in 'iu'):
        return str(int(value))
    if isinstance(value, str):
        return value
    if value is None:
        return ''
    return f'{float(value):.17g}'


def write_csv(path, header, rows):
    """
    Write ``rows`` under ``header`` to ``path``.

    Args:
        path (str | Path): Destination file; parent directories are created.
        header (sequence of str): Column names, written first.
        rows (iterable of sequences): Values, formatted with ``format_value``.

    Returns:
        Path: The written path.
    """
    path = Path(path)
    os.makedirs(path.parent, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        writer = csv.writer(handle, delimiter=',', lineterminator='\n')
        writer.writerow(header)
        count = 0
        for row in rows:
            writer.writerow([format_value(v) for v in row])
            count += 1
    logger.info('wrote %d rows to %s', count, path)
    return path


def write_json(path, data):
    path = Path(path)
    os.makedirs(path.parent, exist_ok=True)
    with open(path, 'wb') as handle:
        handle.write(render_json(data))
        handle.write(b'\n')
    logger.info('wrote report %s', path)
    return path


def mesh_header(n):
    axes = 'xyz'[:n]
    return ['piece'] + [f'c{a}' for a in axes] + ['area'] + [f'n{a}' for a in axes]


def mesh_rows(mesh):
    for i in range(mesh.size):
        yield [mesh.pieces[i], *mesh.centroids[i], mesh.areas[i], *mesh.normals[i]]


def export_mesh_csv(mesh, path):
    """Write a boundary mesh as ``piece,cx,cy[,cz],area,nx,ny[,nz]``."""
    return write_csv(path, mesh_header(mesh.n), mesh_rows(mesh))

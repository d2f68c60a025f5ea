"""Point cloud ingestion and mesh export (OFF / OBJ), with documented layouts.

OFF (d=2 only)::

    OFF
    <V> <F> 0
    x y z            one line per vertex, %.17g
    3 i j k          faces; +1 chains keep the stored (sorted) vertex order,
                     -1 chains swap the last two indices

OBJ: ``v`` lines for vertices; ``l i j`` polyline elements for d=1 and
``f i j k`` faces for d=2 (1-based indices, same orientation rule).
"""

import json

import numpy as np

from .errors import InvalidInput, UnsupportedFormat
from .utils import write_text_atomic


def ingest(path):
    """Read a point cloud from CSV (one point per line) or JSON
    (``{"dim": N, "points": [[...], ...]}``); errors carry the location."""
    text = open(path, "r").read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidInput(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}")
        if not isinstance(data, dict) or "points" not in data:
            raise InvalidInput(f"{path}: JSON must be an object with a 'points' array")
        points = data["points"]
        dim = data.get("dim")
        rows = []
        for i, row in enumerate(points):
            if not isinstance(row, (list, tuple)):
                raise InvalidInput(f"{path}: point {i} is not an array")
            if dim is not None and len(row) != dim:
                raise InvalidInput(
                    f"{path}: point {i} has {len(row)} coordinates, expected {dim}"
                )
            rows.append([float(v) for v in row])
        if dim is None and rows:
            dim = len(rows[0])
        arr = np.array(rows, dtype=float).reshape(len(rows), dim or 0)
    else:
        rows = []
        arity = None
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = [f for f in line.replace(",", " ").split() if f]
            try:
                row = [float(f) for f in fields]
            except ValueError as exc:
                raise InvalidInput(f"{path}: line {lineno}: {exc}")
            if arity is None:
                arity = len(row)
            elif len(row) != arity:
                raise InvalidInput(
                    f"{path}: line {lineno}: expected {arity} fields, got {len(row)}"
                )
            rows.append(row)
        if not rows:
            raise InvalidInput(f"{path}: no points found")
        arr = np.array(rows, dtype=float)
    if not np.isfinite(arr).all():
        raise InvalidInput(f"{path}: non-finite coordinates")
    return arr


def export_cloud_json(cloud, path):
    cloud = np.asarray(cloud, dtype=float)
    lines = ['{', f'  "dim": {cloud.shape[1]},', '  "points": [']
    rows = [
        "    [" + ", ".join(format(v, ".17g") for v in row) + "]"
        for row in cloud
    ]
    lines.append(",\n".join(rows))
    lines.append("  ]")
    lines.append("}")
    write_text_atomic(path, "\n".join(lines) + "\n")


def export_cloud_csv(cloud, path):
    cloud = np.asarray(cloud, dtype=float)
    lines = [",".join(format(v, ".17g") for v in row) for row in cloud]
    write_text_atomic(path, "\n".join(lines) + "\n")


def _oriented(simplex, coefficient):
    simplex = list(simplex)
    if coefficient < 0:
        simplex[-2], simplex[-1] = simplex[-1], simplex[-2]
    return simplex


def _vertex_lines(points):
    return [" ".join(format(v, ".17g") for v in row) for row in points]


def export_mesh(cloud, chain, path, fmt="off"):
    """Write the support of a d-chain as an OFF or OBJ mesh.

    Vertices are the support's vertex set in increasing original-index order;
    coefficients orient the elements (+1 keeps the stored order, -1 reverses
    by swapping the last two vertices).
    """
    cloud = np.asarray(cloud, dtype=float)
    d = chain.dim
    fmt = fmt.lower()
    if fmt not in ("off", "obj"):
        raise UnsupportedFormat(f"unknown format {fmt!r}")
    if fmt == "off" and d != 2:
        raise UnsupportedFormat("OFF export supports d=2 only")
    if fmt == "obj" and d not in (1, 2):
        raise UnsupportedFormat("OBJ export supports d in {1, 2}")
    if cloud.shape[1] > 3:
        raise UnsupportedFormat("mesh export supports ambient dimension <= 3")

    used = sorted({v for s in chain.support for v in s})
    index = {v: i for i, v in enumerate(used)}
    points = np.zeros((len(used), 3))
    points[:, : cloud.shape[1]] = cloud[used]

    elements = [
        (_oriented(s, c), s) for s, c in sorted(chain.items())
    ]
    if fmt == "off":
        lines = ["OFF", f"{len(used)} {len(elements)} 0"]
        lines.extend(_vertex_lines(points))
        for oriented, _ in elements:
            lines.append("3 " + " ".join(str(index[v]) for v in oriented))
    else:
        lines = [f"v {row}" for row in _vertex_lines(points)]
        tag = "l" if d == 1 else "f"
        for oriented, _ in elements:
            lines.append(tag + " " + " ".join(str(index[v] + 1) for v in oriented))
    write_text_atomic(path, "\n".join(lines) + "\n")
    return path

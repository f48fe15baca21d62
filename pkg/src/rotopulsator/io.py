"""CSV and JSON serialisation with round-trip-stable float formatting."""

import csv
import io
import json

import numpy as np

from .manifold import BIVECTOR_LABELS


def fmt(x):
    """Shortest decimal that parses back to the same double."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def trajectory_header(n):
    cols = ["t"]
    for i in range(1, n + 1):
        cols += [f"q{i}_{c}" for c in range(1, 5)]
        cols += [f"v{i}_{c}" for c in range(1, 5)]
    cols += [f"L{lbl}" for lbl in BIVECTOR_LABELS]
    cols.append("drift")
    return cols


def trajectory_rows(traj):
    n = traj.q.shape[1]
    for k in range(len(traj.t)):
        row = [traj.t[k]]
        for i in range(n):
            row += list(traj.q[k, i]) + list(traj.v[k, i])
        row += list(traj.angular_momentum[k])
        row.append(traj.drift[k])
        yield row


REDUCED_HEADER = ["t", "r", "rdot", "theta", "phi", "delta_spread", "res1_max", "res2_max"]


def reduced_rows(red):
    for k in range(len(red.t)):
        yield [red.t[k], red.r[k], red.rdot[k], red.theta[k], red.phi[k],
               red.delta_spread[k], red.res1_max[k], red.res2_max[k]]


def format_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header is not None:
        w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_csv(header, rows))


def read_csv(path):
    """Return ``(header, rows)``; numeric cells become floats, others stay text."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = []
        for row in reader:
            parsed = []
            for cell in row:
                try:
                    parsed.append(float(cell))
                except ValueError:
                    parsed.append(cell)
            rows.append(parsed)
    return header, rows


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def dumps(obj):
    return json.dumps(_jsonable(obj), indent=2, allow_nan=True) + "\n"


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))

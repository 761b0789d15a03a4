"""Artifact serialization: CSV tables, JSON manifests, PGM heatmaps.

Numeric CSV fields use full round-trip precision ('%.17e') so re-runs of an
identical manifest are byte-identical and downstream comparisons can diff
numerically.  Rendering (PGM) never happens before the machine-readable data
is on disk.
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

FLOAT_FMT = "%.17e"


def format_value(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT % float(v)
    if isinstance(v, (complex, np.complexfloating)):
        return "%.17e%+.17ej" % (v.real, v.imag)
    return str(v)


def write_csv(path, header, columns):
    """Write named columns (equal length) as CSV with full precision."""
    columns = [np.asarray(c) for c in columns]
    n = columns[0].shape[0]
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(n):
            fh.write(",".join(format_value(c[i]) for c in columns) + "\n")
    return path


def write_matrix_csv(path, matrix, comment=None):
    """Dense matrix as CSV rows (optionally with a leading # comment)."""
    matrix = np.asarray(matrix)
    with open(path, "w") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        for row in matrix:
            fh.write(",".join(FLOAT_FMT % v for v in row) + "\n")
    return path


def write_pgm(path, matrix, symmetric=None, levels=255):
    """Grayscale PGM (P2) render of a matrix.

    symmetric=True centers the gray scale on zero (diverging data like
    correlation maps); default decides from the data sign.
    """
    m = np.asarray(matrix, dtype=float)
    finite = np.isfinite(m)
    lo = float(np.min(m[finite])) if finite.any() else 0.0
    hi = float(np.max(m[finite])) if finite.any() else 1.0
    if symmetric is None:
        symmetric = lo < 0.0 < hi
    if symmetric:
        amp = max(abs(lo), abs(hi), 1e-300)
        scaled = (m / amp + 1.0) / 2.0
    else:
        scaled = (m - lo) / max(hi - lo, 1e-300)
    img = np.clip(np.nan_to_num(scaled, nan=0.5) * levels, 0, levels).astype(int)
    with open(path, "w") as fh:
        fh.write(f"P2\n{img.shape[1]} {img.shape[0]}\n{levels}\n")
        for row in img:
            fh.write(" ".join(str(v) for v in row) + "\n")
    return path


def sha256_of(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


MANIFEST_SCHEMA_VERSION = 1


def write_manifest(path, subcommand, config_dict, outputs, tolerances=None, extra=None):
    """JSON manifest with config snapshot and content hashes of artifacts."""
    manifest = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "subcommand": subcommand,
        "config": config_dict,
        "tolerances": tolerances or {},
        "outputs": [
            {"path": os.path.basename(p), "sha256": sha256_of(p)} for p in outputs
        ],
    }
    if extra:
        manifest["extra"] = extra
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def save_state(path_prefix, state, config_dict, tolerances=None):
    """Checkpoint a Gaussian state: binary matrices + JSON metadata."""
    np.save(path_prefix + "_mean.npy", state.mean)
    np.save(path_prefix + "_cov.npy", state.cov)
    meta = {
        "time": state.time,
        "config": config_dict,
        "tolerances": tolerances or {},
        "meta": state.meta,
    }
    with open(path_prefix + "_meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=_json_default)
    return [path_prefix + "_mean.npy", path_prefix + "_cov.npy", path_prefix + "_meta.json"]


def load_config_file(path):
    """Flat key = value config file (comments with #, bare strings allowed)."""
    mapping = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            mapping[key] = _parse_scalar(value)
    return mapping


def _parse_scalar(text):
    text = text.strip().strip('"').strip("'")
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text

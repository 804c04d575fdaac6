# wavemaps/artifacts.py
"""CSV and JSON emission. Every artifact carries the config hash and the tolerances it was made with."""
import csv
import hashlib
import json
import logging
import math
from pathlib import Path

import numpy as np
from django.core.serializers.json import DjangoJSONEncoder

from .grids import RadialField, SpectralDensity

logger = logging.getLogger(__name__)


class ArrayEncoder(DjangoJSONEncoder):
    def default(self, o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, Path):
            return str(o)
        return super().default(o)


def _clean(value):
    """NaN and ±inf are not JSON; they are written as null."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    return value


def canonical_json(data):
    return json.dumps(_clean(data), sort_keys=True, separators=(",", ":"), cls=ArrayEncoder)


def config_hash(config):
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


class ArtifactWriter:
    """Writes the files of one run into out_dir and keeps the list for the manifest."""

    def __init__(self, out_dir, config_hash, tolerances):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.config_hash = config_hash
        self.tolerances = dict(tolerances)
        self.files = []

    def _stamp(self):
        return f"# config_hash={self.config_hash} tolerances={canonical_json(self.tolerances)}"

    def _open(self, name):
        path = self.out_dir / name
        self.files.append(name)
        logger.debug(f"writing {path}")
        return path

    def rows(self, name, header, rows):
        path = self._open(name)
        with open(path, "w", newline="") as fh:
            fh.write(self._stamp() + "\n")
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(v) for v in row])
        return path

    def field(self, name, f: RadialField):
        return self.rows(name, ["r", "value", "space_tag"], ((r, v, f.space_tag) for r, v in zip(f.r, f.values)))

    def fields(self, name, r, columns):
        """Several columns on one radial grid, e.g. profile snapshots."""
        header = ["r", *columns.keys()]
        data = [np.asarray(r), *(np.asarray(v) for v in columns.values())]
        return self.rows(name, header, zip(*data))

    def density(self, name, density: SpectralDensity):
        grid = density.freq_grid
        return self.rows(name, ["xi", "k", "value"], zip(grid.xi, grid.dyadic_index, density.values))

    def json(self, name, data):
        path = self._open(name)
        payload = {"config_hash": self.config_hash, "tolerances": self.tolerances, **_clean(data)}
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True, cls=ArrayEncoder)
        return path

    def manifest(self, data):
        return self.json("manifest.json", {**data, "files": sorted(set(self.files) | {"manifest.json"})})


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def read_rows(path):
    """Inverse of ArtifactWriter.rows: (stamp, header, rows as strings)."""
    with open(path, newline="") as fh:
        stamp = fh.readline().strip()
        reader = csv.reader(fh)
        header = next(reader)
        return stamp, header, list(reader)

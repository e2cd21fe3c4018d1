"""
On-disk dataset format: one ``t,y`` CSV per series plus ``manifest.json``.

Manifest layout::

    {"format": "armafit-dataset/1",
     "spec": {...DatasetSpec...},
     "series": [{"series_id", "index", "order": [p, q], "length", "sigma",
                 "replicate", "seed", "file",
                 "truth": {"phi", "theta", "sigma2", "rho", "b", "boundary"}}]}
"""
from __future__ import annotations

import csv
import hashlib
import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .core import ArmaCoeffs, ArmaOrder, BoundaryTag, PacfCoeffs

FORMAT = "armafit-dataset/1"
MANIFEST = "manifest.json"


class DatasetFormatError(ValueError):
    pass


def write_series_csv(path, values) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("t,y\n")
        for t, v in enumerate(np.asarray(values, dtype=float), start=1):
            fh.write(f"{t},{float(v)!r}\n")


def read_series_csv(path) -> np.ndarray:
    """Read the ``y`` column of a series CSV (a bare single column also works)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DatasetFormatError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if "y" in header:
        col = header.index("y")
        body = rows[1:]
    elif len(header) == 1:
        col = 0
        try:
            float(header[0])
            body = rows
        except ValueError:
            body = rows[1:]
    else:
        raise DatasetFormatError(f"{path}: expected a 't,y' header")
    try:
        values = np.array([float(r[col]) for r in body if r], dtype=float)
    except (ValueError, IndexError) as exc:
        raise DatasetFormatError(f"{path}: {exc}") from None
    if values.size == 0 or not np.all(np.isfinite(values)):
        raise DatasetFormatError(f"{path}: no finite observations")
    return values


def _truth_dict(truth) -> Dict:
    return {
        "phi": truth.coeffs.phi.tolist(),
        "theta": truth.coeffs.theta.tolist(),
        "sigma2": truth.coeffs.sigma2,
        "rho": truth.pacf.rho.tolist(),
        "b": truth.pacf.b.tolist(),
        "boundary": truth.boundary.tag.value,
    }


def write_dataset(spec, entries, out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    series = []
    for e in entries:
        fname = f"{e.series_id}.csv"
        write_series_csv(out_dir / fname, e.series.values)
        series.append({
            "series_id": e.series_id,
            "index": e.index,
            "order": list(e.order),
            "length": e.length,
            "sigma": e.sigma,
            "replicate": e.replicate,
            "seed": spec.seed,
            "file": fname,
            "truth": _truth_dict(e.truth),
        })
    manifest = {"format": FORMAT, "spec": spec.to_dict(), "series": series}
    path = out_dir / MANIFEST
    path.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return path


def manifest_checksum(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass(frozen=True)
class DatasetEntry:
    series_id: str
    index: int
    order: ArmaOrder
    length: int
    sigma: float
    path: Path
    truth_coeffs: Optional[ArmaCoeffs] = None
    truth_pacf: Optional[PacfCoeffs] = None
    truth_boundary: Optional[BoundaryTag] = None

    def load(self) -> np.ndarray:
        return read_series_csv(self.path)


def load_dataset(directory) -> List[DatasetEntry]:
    """Entries of a dataset directory in manifest order.

    Missing series files are skipped with a warning so that partially
    copied datasets stay usable.
    """
    directory = Path(directory)
    path = directory / MANIFEST
    try:
        manifest = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"{path}: {exc}") from None
    if manifest.get("format") != FORMAT or "series" not in manifest:
        raise DatasetFormatError(f"{path}: not an {FORMAT} manifest")
    out = []
    for s in manifest["series"]:
        file = directory / s["file"]
        if not file.exists():
            warnings.warn(f"missing series file {file}, skipped")
            continue
        truth = s.get("truth")
        coeffs = pacf = tag = None
        if truth:
            coeffs = ArmaCoeffs(truth["phi"], truth["theta"], truth["sigma2"])
            pacf = PacfCoeffs(truth["rho"], truth["b"], truth["sigma2"])
            tag = BoundaryTag(truth["boundary"])
        out.append(DatasetEntry(
            series_id=s["series_id"], index=int(s["index"]), order=ArmaOrder(*s["order"]),
            length=int(s["length"]), sigma=float(s["sigma"]), path=file,
            truth_coeffs=coeffs, truth_pacf=pacf, truth_boundary=tag,
        ))
    return out


def write_csv(path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def read_csv(path) -> List[Dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))

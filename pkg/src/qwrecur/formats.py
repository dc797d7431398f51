"""Plain-text file formats for coins, series, snapshots, bands and reports.

CSV files use 17 significant digits, ``.`` as decimal separator and LF
line endings, so a float written and read back is bit-identical.  Every
writer goes through :func:`write_text`, which writes to a temporary file
and renames it into place; a crash never leaves a half-written file.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .coins import CoinOperator, CoinState, DisplacementSet
from .evolution import ReturnSeries
from .polya import FourierSurface
from .spectral import SaddleReport, SpectralGrid

__all__ = [
    "fmt",
    "write_text",
    "write_json",
    "coin_to_dict",
    "coin_from_dict",
    "save_coin",
    "load_coin",
    "write_series_csv",
    "read_series_csv",
    "write_snapshot_csv",
    "read_snapshot_csv",
    "write_band_csv",
    "write_saddle_json",
    "write_surface_csv",
]


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def write_text(path, text: str) -> Path:
    """Atomically write ``text`` with LF newlines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _clean(obj):
    # numpy scalars and arrays -> plain python for json
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None if np.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def write_json(path, obj) -> Path:
    return write_text(path, json.dumps(_clean(obj), indent=2) + "\n")


def _pairs(z) -> list:
    return [[float(v.real), float(v.imag)] for v in np.ravel(z)]


def _unpairs(rows) -> NDArray[np.complex128]:
    a = np.asarray(rows, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


def coin_to_dict(coin: CoinOperator, state: CoinState | None = None) -> dict:
    out = {
        "label": coin.label,
        "c": coin.c,
        "d": coin.d,
        "matrix": [_pairs(row) for row in coin.matrix],
        "displacements": [list(v) for v in coin.displacements.vectors],
    }
    if state is not None:
        out["state"] = _pairs(np.asarray(state))
    return out


def coin_from_dict(data: dict) -> tuple[CoinOperator, CoinState | None]:
    try:
        matrix = _unpairs(data["matrix"])
        disp = DisplacementSet(int(data["d"]), tuple(map(tuple, data["displacements"])))
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed coin description: {exc}") from exc
    if matrix.ndim != 2 or matrix.shape[0] != int(data.get("c", matrix.shape[0])):
        raise ValueError("coin matrix shape does not match its declared dimension")
    coin = CoinOperator(matrix, disp, str(data.get("label", "custom")))
    state = CoinState(_unpairs(data["state"])) if data.get("state") is not None else None
    return coin, state


def save_coin(path, coin: CoinOperator, state: CoinState | None = None) -> Path:
    return write_json(path, coin_to_dict(coin, state))


def load_coin(path) -> tuple[CoinOperator, CoinState | None]:
    with open(path, encoding="utf-8") as fh:
        return coin_from_dict(json.load(fh))


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_series_csv(path, series: ReturnSeries) -> Path:
    rows = ((int(t), fmt(p)) for t, p in zip(series.t, series.p0))
    return write_text(path, _csv(["t", "p0"], rows))


def read_series_csv(path) -> ReturnSeries:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        if next(reader) != ["t", "p0"]:
            raise ValueError(f"{path}: expected header t,p0")
        rows = [(int(t), float(p)) for t, p in reader]
    t, p0 = zip(*rows) if rows else ((), ())
    return ReturnSeries(np.array(t, dtype=np.int64), np.array(p0, dtype=float))


def write_snapshot_csv(path, box: NDArray[np.float64]) -> Path:
    """Sites of a (2t+1)^d probability box on the reachable sublattice."""
    d = box.ndim
    t = (box.shape[0] - 1) // 2
    sub = box[(slice(None, None, 2),) * d]
    m = -t + 2 * np.indices(sub.shape).reshape(d, -1).T
    rows = ([*map(int, site), fmt(p)] for site, p in zip(m, sub.ravel()))
    return write_text(path, _csv([f"m{i + 1}" for i in range(d)] + ["p"], rows))


def read_snapshot_csv(path) -> dict[tuple[int, ...], float]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[-1] != "p" or not all(h == f"m{i + 1}" for i, h in enumerate(header[:-1])):
            raise ValueError(f"{path}: expected header m1,...,md,p")
        return {tuple(int(x) for x in r[:-1]): float(r[-1]) for r in reader}


def write_band_csv(path, grid: SpectralGrid) -> Path:
    ks = grid.momenta().reshape(-1, grid.d)
    om = grid.phases.reshape(-1, grid.c)

    def rows():
        for k, w in zip(ks, om):
            for j in range(grid.c):
                yield [*map(fmt, k), j, fmt(w[j])]

    header = [f"k{i + 1}" for i in range(grid.d)] + ["band", "omega"]
    return write_text(path, _csv(header, rows()))


def write_saddle_json(path, report: SaddleReport, extra: dict | None = None) -> Path:
    out = report.as_dict()
    if extra:
        out.update(extra)
    return write_json(path, out)


def write_surface_csv(path, surface: FourierSurface) -> Path:
    rows = (
        [fmt(a), fmt(phi), fmt(surface.polya[i, j])]
        for i, a in enumerate(surface.a)
        for j, phi in enumerate(surface.phi)
    )
    return write_text(path, _csv(["a", "phi", "polya"], rows))

"""Table, plot-data and reference-cache files."""

from __future__ import annotations

import csv
import io
import logging
import os
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from fracfem.core.analysis import ConvergenceTable, ErrorRecord
from fracfem.core.exceptions import ReferenceCacheError
from fracfem.core.models import Mesh1D, NodalVector

logger = logging.getLogger("fracfem.harness.storage")

CSV_COLUMNS = ("h", "l2_error", "h1_error", "gh_error", "l2_ratio", "h1_ratio")
PLOT_COLUMNS = ("curve", "log2_inv_h", "log10_error")
REFERENCE_COLUMNS = ("x", "value")


def _num(x: float | None) -> str:
    return "" if x is None else f"{x:.17g}"


def _sci3(x: float | None) -> str:
    """3 significant digits with a bare exponent: 8.08e-4."""
    if x is None:
        return ""
    mantissa, exponent = f"{x:.2e}".split("e")
    return f"{mantissa}e{int(exponent)}"


def _inverse_h(h: float) -> str:
    return f"1/{round(1.0 / h)}"


def _write_text_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8", newline="")
    tmp.replace(path)


def format_csv(table: ConvergenceTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    l2_ratios = [None] + table.l2_ratios
    h1_ratios = [None] + table.h1_ratios
    for row, r2, r1 in zip(table.rows, l2_ratios, h1_ratios):
        writer.writerow([_num(row.h), _num(row.l2_error), _num(row.h1_error), _num(row.gh_error), _num(r2), _num(r1)])
    return buf.getvalue()


def parse_csv(text: str, *, example: str, method: str, alpha: float, t: float, projection: str, normalized: bool = True) -> ConvergenceTable:
    """Inverse of format_csv; ratios are recomputed from the rows."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {header!r}")
    rows = []
    for line in reader:
        if not line:
            continue
        h, l2, h1, gh = line[0], line[1], line[2], line[3]
        rows.append(ErrorRecord(float(h), float(alpha), float(t), float(l2), float(h1), float(gh) if gh else None))
    return ConvergenceTable(example, method, float(alpha), float(t), projection, tuple(rows), normalized=normalized)


def format_markdown(table: ConvergenceTable) -> str:
    caption = (
        f"**example {table.example}, {table.method}, alpha={table.alpha:g}, t={table.t:g}, "
        f"v_h: {table.projection}{'' if table.normalized else ', unnormalized'}**"
    )
    header = ["h", "L2 error", "ratio", "H1 error", "ratio"]
    if table.has_gh:
        header += ["G_h error", "ratio"]
    lines = [caption, "", "| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]

    l2r = [None] + table.l2_ratios
    h1r = [None] + table.h1_ratios
    ghr = [None] + table.gh_ratios
    for i, row in enumerate(table.rows):
        cells = [_inverse_h(row.h), _sci3(row.l2_error), _ratio(l2r[i]), _sci3(row.h1_error), _ratio(h1r[i])]
        if table.has_gh:
            cells += [_sci3(row.gh_error), _ratio(ghr[i])]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def _ratio(r: float | None) -> str:
    return "" if r is None else f"{r:.2f}"


def render(table: ConvergenceTable, fmt: str) -> str:
    if fmt == "csv":
        return format_csv(table)
    if fmt == "markdown":
        return format_markdown(table)
    raise ValueError(f"unknown format '{fmt}'")


def table_filename(table: ConvergenceTable, fmt: str) -> str:
    ext = "md" if fmt == "markdown" else "csv"
    return f"{table.example}_{table.method}_a{table.alpha:g}_t{table.t:g}.{ext}"


def emit(table: ConvergenceTable, fmt: str, path: str | Path) -> Path:
    p = Path(path)
    try:
        _write_text_atomic(p, render(table, fmt))
    except OSError as e:
        raise OSError(e.errno, f"cannot write table to {p}: {e.strerror or e}") from e
    logger.info(f"table written path={p} rows={len(table.rows)}")
    return p


def curve_name(table: ConvergenceTable, norm: str) -> str:
    return f"{table.example}_{table.method}_a{table.alpha:g}_t{table.t:g}_{norm}"


def format_plotdata(tables) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PLOT_COLUMNS)
    for table in tables:
        for norm in ("l2", "h1", "gh"):
            for row in table.rows:
                err = getattr(row, f"{norm}_error")
                if err is None or err <= 0.0:
                    continue
                writer.writerow([curve_name(table, norm), _num(float(np.log2(1.0 / row.h))), _num(float(np.log10(err)))])
    return buf.getvalue()


def emit_plotdata(tables, path: str | Path) -> Path:
    p = Path(path)
    try:
        _write_text_atomic(p, format_plotdata(tables))
    except OSError as e:
        raise OSError(e.errno, f"cannot write plot data to {p}: {e.strerror or e}") from e
    logger.info(f"plot data written path={p}")
    return p


def reference_path(cache_dir: str | Path, alpha: float, n_cells: int, tau: float | None, t_end: float) -> Path:
    """Cache file of an example-e reference; `tau=None` names the exact-in-time one."""
    step = "spectral" if tau is None else f"tau{tau:g}"
    return Path(cache_dir) / f"reference_e_alpha{alpha:g}_h{n_cells}_{step}_t{t_end:g}.csv"


def write_reference(path: str | Path, values: NodalVector) -> Path:
    p = Path(path)
    mesh = values.mesh
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REFERENCE_COLUMNS)
    for x, v in zip(mesh.all_nodes, values.with_boundary()):
        writer.writerow([_num(float(x)), _num(float(v))])
    try:
        _write_text_atomic(p, buf.getvalue())
    except OSError as e:
        raise ReferenceCacheError(p, f"write failed: {e.strerror or e}") from e
    return p


def read_reference(path: str | Path) -> NodalVector:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ReferenceCacheError(p, f"read failed: {e.strerror or e}") from e

    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != REFERENCE_COLUMNS:
        raise ReferenceCacheError(p, f"unexpected header {header!r}")
    try:
        pairs = [(float(line[0]), float(line[1])) for line in reader if line]
    except (ValueError, IndexError) as e:
        raise ReferenceCacheError(p, "malformed row") from e

    n_cells = len(pairs) - 1
    if n_cells < 2:
        raise ReferenceCacheError(p, "too few nodes")
    xs = np.array([x for x, _ in pairs])
    vs = np.array([v for _, v in pairs])
    if np.max(np.abs(xs - np.arange(n_cells + 1) / n_cells)) > 1e-12 or vs[0] != 0.0 or vs[-1] != 0.0:
        raise ReferenceCacheError(p, "nodes are not a uniform mesh with zero boundary values")
    return NodalVector(Mesh1D(n_cells), vs[1:-1])


@contextmanager
def cache_lock(path: str | Path):
    """Exclusive build lock next to a cache file."""
    lock = Path(str(path) + ".lock")
    lock.parent.mkdir(parents=True, exist_ok=True)
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError as e:
        raise ReferenceCacheError(lock, "another build holds the lock") from e
    except OSError as e:
        raise ReferenceCacheError(lock, f"cannot create lock: {e.strerror or e}") from e
    try:
        os.write(fd, str(os.getpid()).encode("ascii"))
        os.close(fd)
        yield lock
    finally:
        try:
            lock.unlink()
        except FileNotFoundError:
            pass

"""
Report output shared by every subcommand: console tables and result files.

Files are written to a temporary sibling and moved into place, so an
interrupted run never leaves a half-written summary behind.
"""
import csv
import json
import os
import tempfile
from typing import Iterable, List, Sequence

import numpy as np


class ReportTheme:
    """Plain-text layout constants."""

    RULE = "=" * 50
    THIN_RULE = "-" * 50
    OK = "[OK]"
    FAIL = "[FAIL]"
    LABEL_WIDTH = 26


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def dumps(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2, default=_json_default)


def _atomic_write(path: str, write) -> str:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            write(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json(path: str, data) -> str:
    """Write ``data`` as JSON with sorted keys."""
    text = dumps(data)
    return _atomic_write(path, lambda fh: fh.write(text + "\n"))


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    rows = list(rows)

    def write(fh):
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)

    return _atomic_write(path, write)


def format_table(title: str, rows: List[tuple]) -> str:
    lines = [ReportTheme.RULE, title, ReportTheme.RULE]
    for label, value in rows:
        lines.append(f"{str(label):<{ReportTheme.LABEL_WIDTH}} {value}")
    return "\n".join(lines)


def format_checks(checks: List[dict]) -> str:
    lines = [ReportTheme.THIN_RULE]
    for c in checks:
        mark = ReportTheme.OK if c["passed"] else ReportTheme.FAIL
        lines.append(f"{mark} {c['name']}: residual {c['residual']:.2e} (tol {c['tol']:.1e})")
    return "\n".join(lines)


def print_report(title: str, rows: List[tuple], checks: List[dict]):
    """Print the run table followed by one [OK]/[FAIL] line per check."""
    print(format_table(title, rows))
    if checks:
        print(format_checks(checks))

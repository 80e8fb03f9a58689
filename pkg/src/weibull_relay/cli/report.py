"""Agreement report between closed-form and Monte-Carlo CSV columns."""

from __future__ import annotations

import csv
import glob
import os
from dataclasses import dataclass, field

__all__ = ["ReportError", "FileAgreement", "check_csv", "report_agreement", "report_directory"]


class ReportError(ValueError):
    """A CSV is empty or lacks the columns needed for a comparison."""


@dataclass
class FileAgreement:
    path: str
    sweep_column: str
    points: int = 0
    flagged: list = field(default_factory=list)  # (sweep value, exact, mc, half width)

    @property
    def passed(self):
        return self.points - len(self.flagged)


def check_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ReportError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    missing = [c for c in ("exact", "mc", "mc_half_width") if c not in header]
    if missing:
        raise ReportError(f"{path}: missing columns {missing}")
    if not body:
        raise ReportError(f"{path}: no data rows")
    ix = {c: header.index(c) for c in header}
    out = FileAgreement(path, header[0])
    for row in body:
        if len(row) != len(header):
            raise ReportError(f"{path}: ragged row {row}")
        if not row[ix["exact"]] or not row[ix["mc"]]:
            continue
        exact = float(row[ix["exact"]])
        mc = float(row[ix["mc"]])
        hw = float(row[ix["mc_half_width"]])
        out.points += 1
        if abs(exact - mc) > hw:
            out.flagged.append((row[0], exact, mc, hw))
    return out


def report_agreement(paths):
    """Return ``(text, pass_rate, results)`` over the given CSV files."""
    if not paths:
        raise ReportError("no CSV files to compare")
    results = [check_csv(p) for p in paths]
    total = sum(r.points for r in results)
    passed = sum(r.passed for r in results)
    if total == 0:
        raise ReportError("no sweep point carries both exact and mc values")
    lines = []
    for r in results:
        name = os.path.basename(r.path)
        lines.append(f"{name}: {r.passed}/{r.points} points within the MC interval")
        for sweep, exact, mc, hw in r.flagged:
            lines.append(f"  FLAG {r.sweep_column}={sweep}: exact={exact:.6g} "
                         f"mc={mc:.6g} half_width={hw:.3g} gap={abs(exact - mc):.3g}")
    rate = passed / total
    lines.append(f"overall: {passed}/{total} points agree ({100.0 * rate:.2f}%)")
    return "\n".join(lines), rate, results


def _has_mc(path):
    with open(path, encoding="utf-8", newline="") as fh:
        header = next(csv.reader(fh), [])
    return "mc" in header and "exact" in header


def report_directory(directory):
    paths = sorted(glob.glob(os.path.join(directory, "*.csv")))
    if not paths:
        raise ReportError(f"{directory}: no CSV files")
    usable = [p for p in paths if _has_mc(p)]
    if not usable:
        raise ReportError(f"{directory}: no CSV has both exact and mc columns")
    return report_agreement(usable)

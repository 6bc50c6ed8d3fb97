#!/usr/bin/env python
"""
Tabular dataset linter.

Validates a CSV feature table before it enters the pipeline.  The same checks
back ``data.dataset.load_csv``, so a file that passes the linter always loads.

Usage:
  python -m data.linter /path/to/features.csv --label label

Validation checks performed:
- File exists and can be parsed as comma-separated UTF-8 text
- Header row present, no empty or duplicate column names
- Label column present
- At least one data row
- Every row has as many fields as the header
- Every non-label cell parses as a finite real number (no NaN/Inf, no blanks)
- Every label cell is non-empty

Outputs PASS on success, or a FAIL summary with detailed issue descriptions.
Exit code is 0 on PASS, 1 on FAIL.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from collections import Counter
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import pandas as pd

if __package__ in (None, ""):
    sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.errors import DatasetError


@dataclass
class LintIssue:
    """Represents a validation issue found while linting a CSV table.

    Attributes:
        severity: Issue severity level ('ERROR' or 'WARNING')
        message: Human-readable description of the issue
        row: 1-based data row (header excluded), None if not applicable
        column: Column name, None if not applicable
    """
    severity: str  # 'ERROR' or 'WARNING'
    message: str
    row: int | None = None
    column: str | None = None

    @property
    def line_no(self) -> int | None:
        """1-based line number in the file (the header is line 1)."""
        return None if self.row is None else self.row + 1

    def format(self) -> str:
        """Format the issue for human-readable output."""
        where = []
        if self.row is not None:
            where.append(f"Row {self.row} (line {self.line_no})")
        if self.column is not None:
            where.append(f"column '{self.column}'")
        location = ", ".join(where) if where else "Table"
        return f"{self.severity}: {location}: {self.message}"


def parse_real(cell) -> Optional[float]:
    """Parse a cell as a real number; None if it is not numeric text."""
    if not isinstance(cell, str):
        return None
    text = cell.strip()
    if not text:
        return None
    try:
        return float(text)
    except ValueError:
        return None


def _read_frame(path: str, width: Optional[int] = None, on_bad_lines='error') -> pd.DataFrame:
    return pd.read_csv(path, header=None, names=None if width is None else list(range(width)), dtype=str,
                       keep_default_na=False, na_filter=False, encoding='utf-8', skip_blank_lines=True,
                       engine='python', on_bad_lines=on_bad_lines)


def _fields(row: list) -> list:
    """Drop the padding pandas adds after the last field of a short line."""
    end = len(row)
    while end and not isinstance(row[end - 1], str):
        end -= 1
    return row[:end]


def read_table(path: str) -> Tuple[List[str], List[list]]:
    """Read a CSV file into a header and raw string rows.

    Rows keep their own field count, so ragged lines reach ``lint_table``
    as short or long rows.

    Raises:
        DatasetError: if the file is missing, empty or not parseable.
    """
    if not os.path.exists(path):
        raise DatasetError(f"File does not exist: '{path}'")
    if not os.path.isfile(path):
        raise DatasetError(f"Not a regular file: '{path}'")
    long_lines: List[int] = []
    try:
        frame = _read_frame(path, on_bad_lines=lambda fields: long_lines.append(len(fields)))
        if long_lines:
            frame = _read_frame(path, width=max(max(long_lines), frame.shape[1]))
    except pd.errors.EmptyDataError:
        raise DatasetError(f"Missing header row: '{path}' is empty")
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise DatasetError(f"Could not parse '{path}' as CSV: {e}")
    table = [_fields(row) for row in frame.values.tolist()]
    if not table:
        raise DatasetError(f"Missing header row: '{path}' is empty")
    header = [str(h).strip() for h in table[0]]
    return header, table[1:]


def lint_table(header: Sequence[str], rows: Sequence[Sequence], label_column: str) -> List[LintIssue]:
    """Run every table check and return all issues found."""
    issues: List[LintIssue] = []

    if not header:
        issues.append(LintIssue("ERROR", "Missing header row"))
        return issues

    for idx, name in enumerate(header, start=1):
        if name == "":
            issues.append(LintIssue("ERROR", f"Empty column name at position {idx}"))
    for name, count in Counter(header).items():
        if name and count > 1:
            issues.append(LintIssue("ERROR", f"Duplicate column name appears {count} times", column=name))

    if label_column not in header:
        issues.append(LintIssue("ERROR", f"Label column '{label_column}' not found in header"))
        return issues
    label_idx = header.index(label_column)

    if not rows:
        issues.append(LintIssue("ERROR", "Dataset has no data rows"))
        return issues
    if len(header) < 2:
        issues.append(LintIssue("ERROR", "Dataset has no feature columns"))

    for r, row in enumerate(rows, start=1):
        if len(row) != len(header):
            issues.append(LintIssue("ERROR", f"Row has {len(row)} fields, expected {len(header)}", row=r))
            continue
        for name, cell, c in zip(header, row, range(len(header))):
            if c == label_idx:
                if not isinstance(cell, str) or cell.strip() == "":
                    issues.append(LintIssue("ERROR", "Missing label value", row=r, column=name))
                continue
            value = parse_real(cell)
            if value is None:
                shown = cell if isinstance(cell, str) else ""
                issues.append(LintIssue("ERROR", f"Non-numeric value '{shown}'", row=r, column=name))
            elif not math.isfinite(value):
                issues.append(LintIssue("ERROR", f"Non-finite value '{cell.strip()}'", row=r, column=name))
    return issues


def parse_args(argv: List[str]) -> argparse.Namespace:
    """Parse command line arguments.

    Args:
        argv: Command line arguments (excluding script name)

    Returns:
        Parsed arguments namespace
    """
    p = argparse.ArgumentParser(
        description="radiofox dataset linter",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s features.csv --label label        # Validate a feature table
"""
    )
    p.add_argument("path", help="Path to the CSV feature table")
    p.add_argument("--label", default="label", help="Name of the label column (default: label)")
    return p.parse_args(argv)


def main(argv: List[str]) -> int:
    """Main entry point for the dataset linter.

    Returns:
        Exit code: 0 for success, 1 for failure
    """
    args = parse_args(argv)
    try:
        header, rows = read_table(args.path)
    except DatasetError as e:
        print(f"ERROR: {e}")
        return 1

    print(f"Linting dataset: {args.path}")
    issues = lint_table(header, rows, args.label)
    errors = [i for i in issues if i.severity == "ERROR"]
    if not errors:
        print(f"\nPASS: Dataset '{args.path}' passed all validation checks "
              f"({len(rows)} rows, {len(header) - 1} features).")
        return 0

    plural = "s" if len(errors) != 1 else ""
    print(f"\nFAIL: Dataset '{args.path}' failed {len(errors)} check{plural}:")
    for issue in issues:
        print(issue.format())
    return 1


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))

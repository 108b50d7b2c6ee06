"""Dense CSV matrix reading and writing."""

import math
from pathlib import Path

import numpy as np

from .errors import NonFiniteError, ParseError, RaggedRowsError


def parse_matrix_text(text):
    """Parse comma-separated rows; lines starting with ``#`` and blank lines
    are skipped. Line and column numbers in errors are 1-based."""
    rows = []
    width = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split(",")
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise RaggedRowsError(lineno, width, len(fields))
        row = []
        for col, field in enumerate(fields, start=1):
            try:
                value = float(field)
            except ValueError:
                raise ParseError(lineno, col, f"cannot read {field.strip()!r} as a number") from None
            if not math.isfinite(value):
                raise NonFiniteError(lineno, col)
            row.append(value)
        rows.append(row)
    if not rows:
        raise ParseError(0, 0, "no data rows")
    return np.array(rows, dtype=float)


def parse_matrix_csv(path):
    """Read a dense matrix from a CSV file (see :func:`parse_matrix_text`)."""
    return parse_matrix_text(Path(path).read_text())


def write_matrix_csv(path, m):
    """Write ``m`` with full double precision so it reads back exactly."""
    np.savetxt(path, np.atleast_2d(m), delimiter=",", fmt="%.17g")

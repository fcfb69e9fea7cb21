import math
import os

import numpy as np

DEFAULT_DELIMITER = "\t"
DEFAULT_SIGNIFICANT_DIGITS = 9


class TableError(ValueError):
    pass


class ResultTable:
    """Named columns with units in a single header row, e.g. ``tau[us]``."""

    def __init__(self, columns, delimiter=DEFAULT_DELIMITER,
                 significant_digits=DEFAULT_SIGNIFICANT_DIGITS):
        self.columns = []
        for col in columns:
            name, unit = col if isinstance(col, tuple) else (col, "")
            self.columns.append((name, unit))
        names = [name for name, _ in self.columns]
        if len(set(names)) != len(names):
            raise TableError(f"duplicate column names in {names}")
        self.delimiter = delimiter
        self.significant_digits = int(significant_digits)
        self.rows = []

    @property
    def names(self):
        return [name for name, _ in self.columns]

    def header(self):
        return self.delimiter.join(f"{name}[{unit}]" if unit else name
                                   for name, unit in self.columns)

    def add_row(self, *values, **named):
        if named:
            if values:
                raise TableError("pass row values positionally or by name, not both")
            missing = [n for n in self.names if n not in named]
            extra = [n for n in named if n not in self.names]
            if missing or extra:
                raise TableError(f"row keys do not match columns: missing {missing}, extra {extra}")
            values = [named[n] for n in self.names]
        if len(values) != len(self.columns):
            raise TableError(f"row has {len(values)} values, table has {len(self.columns)} columns")
        self.rows.append(list(values))

    def add_columns(self, **arrays):
        """Append rows column-wise from equal-length sequences keyed by column name."""
        lengths = {len(np.atleast_1d(v)) for v in arrays.values()}
        if len(lengths) != 1:
            raise TableError(f"columns have different lengths: {sorted(lengths)}")
        length = lengths.pop()
        broadcast = {n: np.atleast_1d(v) for n, v in arrays.items()}
        for i in range(length):
            self.add_row(**{n: v[i] for n, v in broadcast.items()})

    def column(self, name):
        idx = self.names.index(name)
        return [row[idx] for row in self.rows]

    def _format(self, value):
        if value is None:
            return "nan"
        if isinstance(value, (bool, np.bool_)):
            return "true" if value else "false"
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        if isinstance(value, (float, np.floating)):
            value = float(value)
            if math.isnan(value):
                return "nan"
            if math.isinf(value):
                return "inf" if value > 0 else "-inf"
            return f"{value:.{self.significant_digits}g}"
        return str(value)

    def render(self):
        lines = [self.header()]
        for row in self.rows:
            lines.append(self.delimiter.join(self._format(v) for v in row))
        return "\n".join(lines) + "\n"

    def write(self, path):
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", newline="\n") as f:
            f.write(self.render())


def read_table(path, delimiter=DEFAULT_DELIMITER):
    """Columns of a rendered table (or any delimited numeric file with a header row).

    Header cells keep only the column name; '#' lines are skipped.
    """
    with open(path) as f:
        lines = [ln.rstrip("\n") for ln in f if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise TableError(f"{path}: no data")
    names = [cell.split("[", 1)[0].strip() for cell in lines[0].split(delimiter)]
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(delimiter)
        if len(cells) != len(names):
            raise TableError(f"{path}: row {lineno} has {len(cells)} cells, expected {len(names)}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as e:
            raise TableError(f"{path}: row {lineno}: {e}") from None
    data = np.array(rows, dtype=float).reshape(-1, len(names))
    return {name: data[:, i] for i, name in enumerate(names)}

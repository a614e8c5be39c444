"""Sample matrices with named columns, plus CSV round-tripping."""

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Dataset:
    values: np.ndarray
    names: tuple = field(default=())

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError("values must be an n x d matrix")
        if not np.all(np.isfinite(values)):
            raise ValueError("dataset has non-finite entries")
        names = tuple(self.names) if self.names else tuple(f"X{i}" for i in range(values.shape[1]))
        if len(names) != values.shape[1]:
            raise ValueError("one name per column required")
        if len(set(names)) != len(names):
            raise ValueError("column names must be unique")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no column named {name!r}") from None

    def columns(self, idx: Sequence[int]) -> np.ndarray:
        return self.values[:, list(idx)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.names)
        for row in self.values:
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Dataset":
        rows = list(csv.reader(io.StringIO(text)))
        rows = [r for r in rows if r]
        if not rows:
            raise ValueError("empty CSV")
        header = [h.strip() for h in rows[0]]
        try:
            values = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
        except ValueError as exc:
            raise ValueError(f"non-numeric CSV entry: {exc}") from None
        if values.size == 0:
            values = values.reshape(0, len(header))
        if values.shape[1] != len(header):
            raise ValueError("row width does not match header")
        return cls(values, tuple(header))

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())

    @classmethod
    def load(cls, path) -> "Dataset":
        with open(path, encoding="utf-8") as fh:
            return cls.from_csv(fh.read())

"""CSV and JSON output: fixed formatting, atomic writes, run reports."""
from __future__ import annotations

import json
import os
import tempfile
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .spectrum import Eigenvalue

REPORT_SCHEMA_VERSION = "report_v1"


def fmt(v: float) -> str:
    """Scientific notation with 12 significant digits; -0.0 keeps its sign."""
    return f"{float(v):.11e}"


def atomic_write_text(path: str, text: str) -> None:
    """Write via a temp file in the target directory, then rename over ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(c if isinstance(c, str) else (str(c) if isinstance(c, (int, np.integer)) else fmt(c))
                              for c in row))
    return "\n".join(lines) + "\n"


def spectrum_csv(levels: Sequence[Eigenvalue]) -> str:
    return csv_text(["n", "E", "provenance", "residual"],
                    ((int(e.n), float(e.E), e.provenance, float(e.residual)) for e in levels))


def read_spectrum_csv(text: str) -> List[Eigenvalue]:
    lines = text.strip("\n").split("\n")
    if lines[0] != "n,E,provenance,residual":
        raise ValueError("not a spectrum CSV")
    out = []
    for line in lines[1:]:
        n, e, prov, res = line.split(",")
        out.append(Eigenvalue(int(n), float(e), prov, float(res)))
    return out


def wavefunction_csv(rows, with_derivative: bool = False) -> str:
    header = ["x", "psi", "dpsi"] if with_derivative else ["x", "psi"]
    return csv_text(header, rows)


def deformation_csv(xs: np.ndarray, v_cols, psi_cols, psi_labels: Sequence[int]) -> str:
    """Columns x, V_deformed, psi_<n>...; ``xs`` already carries the -0/+0 sentinels."""
    header = ["x", "V_deformed"] + [f"psi_{n}" for n in psi_labels]
    rows = (tuple([xs[i], v_cols[i]] + [c[i] for c in psi_cols]) for i in range(len(xs)))
    return csv_text(header, rows)


# ------------------------------------------------------------ run reports


@dataclass
class Check:
    name: str
    passed: bool
    residual: float
    tolerance: float
    detail: str = ""


@dataclass
class RunReport:
    command: List[str]
    inputs: dict
    outputs: List[str] = field(default_factory=list)
    checks: List[Check] = field(default_factory=list)
    data: dict = field(default_factory=dict)
    wall_time: float = 0.0
    schema: str = REPORT_SCHEMA_VERSION
    _t0: float = field(default_factory=time.perf_counter, repr=False)

    def check(self, name: str, residual: float, tolerance: float, passed: Optional[bool] = None,
              detail: str = "") -> Check:
        """Record a check; by default it passes when residual <= tolerance."""
        residual = float(residual)
        ok = bool(residual <= tolerance) if passed is None else bool(passed)
        c = Check(name, ok, residual if np.isfinite(residual) else float("inf"), float(tolerance), detail)
        self.checks.append(c)
        return c

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def finish(self) -> "RunReport":
        self.wall_time = time.perf_counter() - self._t0
        return self

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("_t0")
        for c in d["checks"]:
            if not np.isfinite(c["residual"]):
                c["residual"] = None
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"


def report_schema() -> dict:
    return json.loads(resources.files("disloc").joinpath("report_v1.schema.json").read_text())

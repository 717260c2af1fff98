"""Result records and their CSV / JSON / SVG renderings.

CSV numbers use 17 significant digits so reruns can be compared byte for byte.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

SCHEMA_VERSION = "1"

DELTA_COLUMNS = (
    "R", "max_k2_norm_sq", "max_dnorm_sq", "argmax_k", "argmax_xi", "points", "failures",
    "argmax_dnorm_k", "argmax_dnorm_xi", "n_nodes", "skipped",
)
RESOLVENT_COLUMNS = (
    "R", "sup_norm", "argmax_k", "argmax_xi", "region_sup", "theorem1_max_ratio",
    "k_max", "points", "failures", "n_nodes",
)
EIGS_COLUMNS = ("k", "R", "re_lambda", "im_lambda", "stable", "n_nodes", "refinement_shift")
PROFILE_COLUMNS = ("y", "psi_re", "psi_im", "dpsi_re", "dpsi_im", "d2psi_re", "d2psi_im")


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".17g")
    return str(value)


def clean(value):
    """JSON-safe copy: complex -> [re, im], NaN -> None, tuples -> lists, paths -> str."""
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, complex):
        return [clean(value.real), clean(value.imag)]
    if isinstance(value, float):
        return None if math.isnan(value) else value
    if isinstance(value, dict):
        return {str(k): clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [clean(v) for v in value]
    if hasattr(value, "item") and callable(value.item):  # numpy scalars
        return clean(value.item())
    return value


@dataclass
class ResultRecord:
    command: str
    params: Dict[str, Any]
    payload: List[Dict[str, Any]]
    convergence: Dict[str, Any] = field(default_factory=dict)
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))
    schema_version: str = SCHEMA_VERSION

    def __post_init__(self):
        self.params = clean(self.params)
        self.payload = clean(self.payload)
        self.convergence = clean(self.convergence)

    def to_dict(self) -> dict:
        return clean(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False)

    @classmethod
    def from_json(cls, text: str) -> "ResultRecord":
        data = json.loads(text)
        version = data.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {version!r}")
        return cls(**data)

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_json() + "\n")
        return path

    @classmethod
    def read(cls, path) -> "ResultRecord":
        return cls.from_json(Path(path).read_text())


def csv_text(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, columns, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(csv_text(columns, rows))
    return path


def delta_rows(results) -> List[tuple]:
    rows = []
    for r in results:
        k2 = r.argmax_k2 or (None, None)
        dn = r.argmax_dnorm or (None, None)
        rows.append((r.reynolds, r.max_k2_norm_sq, r.max_dnorm_sq, k2[0], k2[1],
                     r.points_evaluated, len(r.failures), dn[0], dn[1], r.n_nodes, r.skipped))
    return rows


def resolvent_rows(results) -> List[tuple]:
    return [(r.reynolds, r.sup_norm, r.argmax_k, r.argmax_xi, r.region_sup, r.theorem1_max_ratio,
             r.k_max, r.points_evaluated, len(r.failures), r.n_nodes) for r in results]


def eigs_rows(reports) -> List[tuple]:
    return [(r.k, r.reynolds, r.rightmost_eig.real, r.rightmost_eig.imag, r.all_eigs_stable,
             r.n_nodes, r.refinement_shift) for r in reports]


def profile_rows(solution) -> List[tuple]:
    y = solution.grid.nodes
    p, d1, d2 = solution.psi.values, solution.psi_d1.values, solution.psi_d2.values
    return [(float(y[i]), p[i].real, p[i].imag, d1[i].real, d1[i].imag, d2[i].real, d2[i].imag)
            for i in range(len(y))]


def line_plot_svg(path, xs, series: Dict[str, Sequence[float]], *, title: str, ylabel: str,
                  logy: bool = False, reference: float = None) -> Path:
    """Static line plot with log-scaled R axis, written as a self-contained SVG."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "couette", "svg.fonttype": "none",
                                "path.simplify": False}):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for label, ys in series.items():
            ax.plot(xs, ys, marker="o", label=label)
        if reference is not None:
            ax.axhline(reference, color="0.5", linestyle="--", linewidth=1.0)
        ax.set_xscale("log")
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel("R")
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        ax.grid(True, which="both", linewidth=0.3)
        if len(series) > 1:
            ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
        plt.close(fig)
    return Path(path)

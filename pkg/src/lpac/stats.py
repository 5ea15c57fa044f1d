"""Step counts and resource figures in the shape of a benchmark table row."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Iterable

from .format import Axiom, Deletion, Ext, LinComb, PatternApply, PatternNew

try:
    import resource
except ImportError:  # pragma: no cover - non-POSIX
    resource = None


@dataclass
class StatsReport:
    axiom_count: int = 0
    lincomb_count: int = 0
    ext_count: int = 0
    deletion_count: int = 0
    pattern_new_count: int = 0
    pattern_apply_count: int = 0
    max_pattern_body_steps: int = 0
    file_bytes: int = 0
    wall_time_ms: float | None = field(default=None, compare=False)
    peak_rss_mb: float | None = field(default=None, compare=False)

    def add(self, step) -> None:
        """Count one step; pattern bodies are counted step by step."""
        if isinstance(step, Axiom):
            self.axiom_count += 1
        elif isinstance(step, LinComb):
            self.lincomb_count += 1
        elif isinstance(step, Ext):
            self.ext_count += 1
        elif isinstance(step, Deletion):
            self.deletion_count += 1
        elif isinstance(step, PatternNew):
            self.pattern_new_count += 1
            self.max_pattern_body_steps = max(self.max_pattern_body_steps, len(step.body))
            for inner in step.body:
                self.add(inner)
        elif isinstance(step, PatternApply):
            self.pattern_apply_count += 1

    @classmethod
    def of(cls, steps: Iterable) -> "StatsReport":
        report = cls()
        for s in steps:
            report.add(s)
        return report

    def counts(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.compare}


def peak_rss_mb() -> float | None:
    if resource is None:
        return None
    # ru_maxrss is KiB on Linux
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0


COLUMNS = (
    ("Name", 18, None),
    ("Axioms", 7, "axiom_count"),
    ("Steps", 7, "lincomb_count"),
    ("Ext", 5, "ext_count"),
    ("Del", 5, "deletion_count"),
    ("#", 5, "pattern_new_count"),
    ("Apply", 7, "pattern_apply_count"),
    ("max|S|", 7, "max_pattern_body_steps"),
    ("File(B)", 10, "file_bytes"),
    ("Mem(MB)", 8, "peak_rss_mb"),
    ("Time(ms)", 9, "wall_time_ms"),
)


def table_header() -> str:
    return " ".join(
        name.ljust(w) if attr is None else name.rjust(w) for name, w, attr in COLUMNS
    )


def table_row(name: str, report: StatsReport) -> str:
    cells = []
    for _, width, attr in COLUMNS:
        if attr is None:
            cells.append(name[:width].ljust(width))
            continue
        value = getattr(report, attr)
        if value is None:
            text = "-"
        elif isinstance(value, float):
            text = f"{value:.2f}"
        else:
            text = str(value)
        cells.append(text.rjust(width))
    return " ".join(cells)

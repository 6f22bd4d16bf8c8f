"""CSV artifacts with metadata sidecars, and the assembled run report."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

from . import __version__
from .config import ExperimentConfig, config_hash, serialize_config
from .cones import AdmissibilityReport
from .oracle import RNG_ALGORITHM
from .response import ResponseSeriesResult


def write_csv(path, header: list[str], rows, cfg: ExperimentConfig | None = None, extra_meta: dict | None = None) -> None:
    """Write a CSV with a header row plus a JSON metadata sidecar."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    meta = {
        "tool": "srb-response",
        "version": __version__,
        "rng_algorithm": RNG_ALGORITHM,
    }
    if cfg is not None:
        meta["config_hash"] = config_hash(cfg)
    if extra_meta:
        meta.update(extra_meta)
    with open(str(path) + ".meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_series_csv(out_dir, result: ResponseSeriesResult, cfg: ExperimentConfig) -> str:
    path = os.path.join(out_dir, f"terms_{result.route}.csv")
    rows = [
        (k, repr(result.terms[k]), repr(result.partial_sums[k]), repr(result.tail_bounds[k]))
        for k in range(result.K)
    ]
    write_csv(
        path,
        ["k", "term", "partial_sum", "tail_bound_at_k"],
        rows,
        cfg,
        {"route": result.route, "converged": result.converged, "notes": result.notes},
    )
    return path


def write_comparison_csv(out_dir, results: list[ResponseSeriesResult], cfg: ExperimentConfig) -> str:
    path = os.path.join(out_dir, "comparison.csv")
    rows = [
        (r.route, repr(r.total), repr(r.tail_bound), r.K, r.converged, r.notes)
        for r in results
    ]
    write_csv(path, ["route", "total", "tail_bound", "K", "converged", "notes"], rows, cfg)
    return path


def write_admissibility_csv(out_dir, report: AdmissibilityReport, cfg: ExperimentConfig) -> str:
    path = os.path.join(out_dir, "admissibility.csv")
    write_csv(path, ["kind", "slope_bound", "min_iterate"], [
        (report.kind, repr(report.slope_bound), report.min_iterate)
    ], cfg, {"admissible": report.admissible, "notes": report.notes})
    return path


@dataclass
class RunReport:
    """Everything one run produced; renders to the text report."""

    title: str
    config_text: str
    admissibility: AdmissibilityReport | None = None
    route_results: list[ResponseSeriesResult] = field(default_factory=list)
    checks: list[tuple[str, str, str]] = field(default_factory=list)  # (name, status, detail)
    timings: list[tuple[str, float]] = field(default_factory=list)
    artifacts: list[str] = field(default_factory=list)

    def add_check(self, name: str, passed: bool, detail: str = "", status: str | None = None) -> None:
        self.checks.append((name, status or ("PASS" if passed else "FAIL"), detail))

    def failed(self) -> bool:
        return any(status == "FAIL" for _, status, _ in self.checks)

    def render(self) -> str:
        bar = "=" * 70
        lines = [bar, self.title, bar, "", "[effective config]", self.config_text.rstrip(), ""]
        if self.admissibility is not None:
            lines += ["[admissibility]", self.admissibility.text_block(), ""]
        if self.route_results:
            lines.append("[routes]")
            for r in self.route_results:
                lines.append(
                    f"  {r.route:10s} total = {r.total:+.12e}  tail bound = {r.tail_bound:.3e}  "
                    f"K = {r.K}  converged = {r.converged}"
                )
                if r.notes:
                    lines.append(f"             notes: {r.notes}")
            lines.append("")
        if self.checks:
            lines.append("[checks]")
            for name, status, detail in self.checks:
                lines.append(f"  {status:4s}  {name}" + (f"  ({detail})" if detail else ""))
            lines.append("")
        if self.timings:
            lines.append("[timings]")
            for name, seconds in self.timings:
                lines.append(f"  {name}: {seconds:.2f} s")
            lines.append("")
        if self.artifacts:
            lines.append("[artifacts]")
            for a in self.artifacts:
                lines.append(f"  {a}")
            lines.append("")
        lines.append("overall: " + ("FAIL" if self.failed() else "PASS"))
        return "\n".join(lines) + "\n"

    def save(self, out_dir, name: str = "report.txt") -> str:
        path = os.path.join(out_dir, name)
        with open(path, "w") as fh:
            fh.write(self.render())
        return path


def report_for(cfg: ExperimentConfig, title: str) -> RunReport:
    return RunReport(title=title, config_text=serialize_config(cfg))

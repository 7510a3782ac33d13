"""Run several observer variants on one scenario and tabulate their metrics."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import LesoError
from .metrics import Metrics, metrics_for
from .runner import run_scenario
from .scenario import Scenario
from .trace import export_trace

log = logging.getLogger(__name__)


@dataclass
class VariantResult:
    label: str
    metrics: Metrics | None = None
    error: str | None = None
    trace_path: Path | None = None


@dataclass
class CompareReport:
    rows: list[VariantResult] = field(default_factory=list)

    def table(self) -> str:
        head = f"{'variant':<12}{'overshoot':>12}{'settling_s':>12}{'rms_error':>12}{'peak_u':>12}"
        lines = [head]
        for row in self.rows:
            if row.metrics is None:
                lines.append(f"{row.label:<12}  error: {row.error}")
                continue
            m = row.metrics
            lines.append(f"{row.label:<12}{m.overshoot:>12.5f}{m.settling_time:>12.3f}"
                         f"{m.rms_tracking_error:>12.5f}{m.peak_control:>12.4g}")
        return "\n".join(lines)

    def as_dict(self) -> dict:
        return {r.label: (r.metrics.as_dict() if r.metrics else {"error": r.error}) for r in self.rows}


def parse_variant(text: str) -> tuple[str, float | None]:
    """``mf`` or ``mf@30`` (observer bandwidth override)."""
    tag, _, omega = text.strip().partition("@")
    return tag, (float(omega) if omega else None)


def compare_variants(sc: Scenario, variants: list[str], out_dir=None) -> CompareReport:
    """Run each variant of ``sc``; failures are recorded per row without stopping the rest."""
    report = CompareReport()
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    for text in variants:
        label = text.strip()
        row = VariantResult(label)
        try:
            tag, omega = parse_variant(label)
            trace = run_scenario(sc.with_variant(tag, omega))
            if out is not None:
                row.trace_path = export_trace(trace, out / f"trace_{label.replace('@', '_')}.csv")
            if trace.failed:
                row.error = trace.meta["status"]
            else:
                row.metrics = metrics_for(trace, sc.metrics)
        except (LesoError, ValueError, OSError) as exc:
            log.warning("variant %s failed: %s", label, exc)
            row.error = f"{type(exc).__name__}: {exc}"
        report.rows.append(row)
    return report

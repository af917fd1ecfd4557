"""Plain-text tables and the SVG importance chart."""

from __future__ import annotations

from xml.sax.saxutils import escape

from .evaluation import ImportanceReport, MetricsReport, SummaryStats, SweepReport
from .optimizer import Recommendation, format_efficiency

BAR_MAX_PX = 400
BAR_HEIGHT = 24
BAR_GAP = 10
LABEL_PX = 160


def importance_svg(report: ImportanceReport) -> str:
    """Horizontal bars, the largest importance spanning BAR_MAX_PX."""
    if not report.entries:
        raise ValueError("cannot chart an empty importance report")
    top = max(v for _, v in report.entries)
    scale = BAR_MAX_PX / top if top > 0 else 0.0
    width = LABEL_PX + BAR_MAX_PX + 80
    height = BAR_GAP + len(report.entries) * (BAR_HEIGHT + BAR_GAP)
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="13">',
        f"<title>Feature importance ({escape(report.model_kind)})</title>",
    ]
    for i, (name, value) in enumerate(report.entries):
        y = BAR_GAP + i * (BAR_HEIGHT + BAR_GAP)
        bar = round(value * scale)
        mid = y + BAR_HEIGHT // 2 + 4
        lines.append(f'<text x="{LABEL_PX - 8}" y="{mid}" text-anchor="end">{escape(name)}</text>')
        lines.append(f'<rect class="bar" x="{LABEL_PX}" y="{y}" width="{bar}" '
                     f'height="{BAR_HEIGHT}" fill="#4477aa"/>')
        lines.append(f'<text x="{LABEL_PX + bar + 6}" y="{mid}">{value:.3f}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_importance_svg(report: ImportanceReport, path) -> None:
    svg = importance_svg(report)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)


def _table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    out = [fmt.format(*header), fmt.format(*("-" * w for w in widths))]
    out += [fmt.format(*r) for r in rows]
    return "\n".join(out)


def metrics_text(report: MetricsReport) -> str:
    return _table(["model", "seed", "n_test", "MSE", "MAE", "R2"],
                  [[report.model_kind, str(report.seed), str(report.n_test), f"{report.mse:.3f}",
                    f"{report.mae:.3f}", f"{report.r2:.3f}"]])


def sweep_text(report: SweepReport) -> str:
    summary = report.summary()
    rows = [[m, *(f"{summary[m][k]:.3f}" for k in ("p5", "p25", "p50", "p75", "p95", "mean"))]
            for m in ("mse", "mae", "r2")]
    head = f"{report.model_kind}: {len(report.seeds)} seeds ({report.seeds[0]}..{report.seeds[-1]})"
    return head + "\n" + _table(["metric", "p5", "p25", "median", "p75", "p95", "mean"], rows)


def importance_text(report: ImportanceReport) -> str:
    return _table(["rank", "feature", "importance"],
                  [[str(i + 1), name, f"{v:.3f}"] for i, (name, v) in enumerate(report.entries)])


def summary_text(stats: SummaryStats) -> str:
    rows = [[c.name, f"{c.min:g}", f"{c.max:g}", f"{c.mean:.3f}", f"{c.std:.3f}",
             f"{stats.correlations[c.name]:+.3f}" if c.name in stats.correlations else ""]
            for c in stats.columns]
    tools = ", ".join(f"{t}={n}" for t, n in stats.tool_counts.items())
    return (f"{stats.n} records; tool_material counts: {tools}\n"
            + _table(["column", "min", "max", "mean", "std", "corr(UTS)"], rows))


def recommendation_text(rec: Recommendation) -> str:
    def fmt(s):
        tool = [s.tool] if s.tool is not None else []
        return [f"{s.rotational_speed:g}", f"{s.welding_speed:g}", f"{s.axial_force:g}", *tool]

    header = ["rank", "rpm", "mm/min", "kN"] + (["tool"] if rec.setting.tool is not None else [])
    header.append("UTS (MPa)")
    rows = [["1", *fmt(rec.setting), f"{rec.predicted_uts:.2f}"]]
    rows += [[str(i + 2), *fmt(s), f"{v:.2f}"] for i, (s, v) in enumerate(rec.runner_ups)]
    return (_table(header, rows) + "\n"
            f"joint efficiency vs {rec.base.name} ({rec.base.tensile_strength:g} MPa): "
            f"{format_efficiency(rec.joint_efficiency)}")

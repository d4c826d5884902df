"""Report rendering: aligned text tables, CSV and JSON documents.

Text tables follow the layout of coefficient tables in applied economics:
one column per model, ``coef*** (se)`` cells, then an Observations / R² /
Adjusted R² / F-statistic footer. Nothing here depends on wall-clock time,
so identical results render to identical bytes.
"""

import csv
import io
import json
import math

import numpy as np

from .regress import INTERCEPT, stars

ROW_LABELS = {
    INTERCEPT: "Constant",
    "NRP_vs_RP": "NRP vs RP",
    "NRP_vs_NRP": "NRP vs NRP",
    "RP_vs_RP": "RP vs RP",
    "num_mosques": "Number of Mosques",
    "gdp_per_capita": "GDP per Capita",
    "economic_sophistication_proxy": "Economic Sophistication Proxy",
    "daynight": "Daynight",
    "is_summer": "Is Summer",
    "poverty_rate": "Poverty Rate",
}
OUTCOME_LABELS = {
    "h_unweighted": "Unweighted Entropy",
    "h_religiosity": "Religious Weighted Entropy",
    "h_political": "Political Weighted Entropy",
}
STAR_NOTE = "*** p<0.01, ** p<0.05, * p<0.1. Standard errors are in parentheses."


def row_label(name: str) -> str:
    if name in ROW_LABELS:
        return ROW_LABELS[name]
    if name.startswith("region_"):
        return name[len("region_"):].capitalize()
    if name.startswith("year_"):
        return f"Year {name[len('year_'):]}"
    return name


def fmt_coef(x: float) -> str:
    if not math.isfinite(x):
        return str(x)
    if x != 0 and abs(x) < 1e-3:
        return f"{x:.3e}"
    return f"{x:.4f}"


def fmt_se(x: float) -> str:
    if not math.isfinite(x):
        return str(x)
    if x != 0 and abs(x) < 1e-3:
        return f"{x:.2e}"
    return f"{x:.3f}"


def cell(result, name: str) -> str:
    if name not in result.names:
        return ""
    b, s, _, p = result.coef(name)
    return f"{fmt_coef(b)}{stars(p)} ({fmt_se(s)})"


def _fstat(result) -> str:
    f = result.f_stat
    if not math.isfinite(f):
        return str(f)
    return f"{f:.1f}{stars(result.f_pvalue)}"


def coefficient_table(results, title: str = "", headers=None, notes=()) -> str:
    """Aligned text table with one column per fitted model."""
    headers = list(headers) if headers else [
        OUTCOME_LABELS.get(r.outcome, r.label or r.outcome) for r in results]
    names = []
    for r in results:
        for n in r.names:
            if n not in names:
                names.append(n)
    body = [[row_label(n), *(cell(r, n) for r in results)] for n in names]
    footer = [
        ["Observations", *(f"{r.N:,}" for r in results)],
        ["R²", *(f"{r.r2:.3f}" for r in results)],
        ["Adjusted R²", *(f"{r.adj_r2:.3f}" for r in results)],
        ["F-statistic", *(_fstat(r) for r in results)],
    ]
    head = ["Variable", *headers]
    rows = [head, *body, *footer]
    widths = [max(len(row[i]) for row in rows) for i in range(len(head))]

    def line(row):
        return "  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()

    total = sum(widths) + 2 * (len(widths) - 1)
    out = []
    if title:
        out.append(title)
    out.append("=" * total)
    out.append(line(head))
    out.append("-" * total)
    out.extend(line(r) for r in body)
    out.append("-" * total)
    out.extend(line(r) for r in footer)
    out.append("=" * total)
    out.append(STAR_NOTE)
    out.extend(notes)
    return "\n".join(out) + "\n"


def baseline_note(results) -> str:
    bases = sorted({r.baseline for r in results if r.baseline})
    if not bases:
        return "No categorical fixed effects."
    return (f"Region baseline: {', '.join(bases)}; its effect is absorbed by the "
            "constant, so no separate baseline row is reported.")


def vif_table(report, title: str = "Variance Inflation Factor (VIF) Analysis") -> str:
    rows = [["Variable", "VIF"]]
    for name, v in report:
        rows.append([row_label(name), "inf" if not np.isfinite(v) else f"{v:.2f}"])
    for group, v in report.groups.items():
        label = f"{group} fixed effects (GVIF)"
        rows.append([label, "inf" if not np.isfinite(v) else f"{v:.2f}"])
    w0 = max(len(r[0]) for r in rows)
    w1 = max(len(r[1]) for r in rows)
    total = w0 + 2 + w1
    lines = [title, "=" * total, f"{rows[0][0].ljust(w0)}  {rows[0][1]}", "-" * total]
    lines += [f"{a.ljust(w0)}  {b}" for a, b in rows[1:]]
    lines.append("=" * total)
    return "\n".join(lines) + "\n"


def coefficients_csv(results, delimiter: str = ",") -> str:
    """Long-format coefficient records, one row per model and column."""
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    w.writerow(["model", "outcome", "name", "coef", "se", "t", "p", "stars"])
    for r in results:
        for rec in r.as_records():
            w.writerow([r.label, r.outcome, rec["name"], repr(rec["coef"]),
                        repr(rec["se"]), repr(rec["t"]), repr(rec["p"]),
                        rec["stars"]])
    return buf.getvalue()


def fit_csv(results, delimiter: str = ",") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    w.writerow(["model", "outcome", "observations", "k", "r2", "adj_r2",
                "f_stat", "f_pvalue", "rss", "tss"])
    for r in results:
        w.writerow([r.label, r.outcome, r.N, r.k, repr(r.r2), repr(r.adj_r2),
                    repr(r.f_stat), repr(r.f_pvalue), repr(r.rss), repr(r.tss)])
    return buf.getvalue()


def vif_csv(reports: dict, delimiter: str = ",") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    w.writerow(["model", "name", "vif"])
    for model, rep in reports.items():
        for name, v in rep:
            w.writerow([model, name, repr(float(v))])
        for group, v in rep.groups.items():
            w.writerow([model, f"{group}*", repr(float(v))])
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    return x


def to_json(obj) -> str:
    """Deterministic JSON; non-finite floats become strings."""
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True,
                      ensure_ascii=False) + "\n"

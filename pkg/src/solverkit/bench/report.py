"""Benchmark reports: machine-readable CSV plus a human-readable table."""

from __future__ import annotations

import csv
from pathlib import Path

from ..errors import PreconditionError
from .metrics import PASS_KS, DifficultyRow, MetricsTable


def _check_monotonic(table: MetricsTable) -> None:
    for key, cell in table.cells.items():
        values = [cell.pass_at[k] for k in PASS_KS if k in cell.pass_at]
        if any(a > b + 1e-12 for a, b in zip(values, values[1:])):
            raise PreconditionError(
                f"pass@k not monotone for cell {key}: {cell.pass_at}")
        if not 0.0 <= cell.success_rate <= 1.0:
            raise PreconditionError(
                f"success_rate out of range for cell {key}")


def emit_report(
    table: MetricsTable,
    difficulty: list[DifficultyRow] | None,
    out_dir: str | Path,
) -> dict[str, Path]:
    """Write metrics.csv and report.txt (+ difficulty.csv when provided).

    Refuses to emit when a metric identity is violated.
    """
    _check_monotonic(table)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}

    csv_path = out_dir / "metrics.csv"
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "config_id", "level", "category", "n", "tasks", "success_rate",
            *[f"pass@{k}" for k in PASS_KS], "mean_elapsed_s",
        ])
        for (config_id, level, category), cell in sorted(
                table.cells.items(),
                key=lambda item: (item[0][0], str(item[0][1]), str(item[0][2]))):
            writer.writerow([
                config_id,
                "all" if level is None else level,
                category or "all",
                cell.n, cell.tasks,
                f"{cell.success_rate:.4f}",
                *[f"{cell.pass_at[k]:.4f}" for k in PASS_KS],
                f"{cell.mean_elapsed_s:.2f}",
            ])
    paths["metrics"] = csv_path

    text_path = out_dir / "report.txt"
    with text_path.open("w", encoding="utf-8") as fh:
        fh.write(_human_table(table))
        if difficulty:
            fh.write("\n\nTask difficulty (level 1)\n")
            fh.write(f"{'task':<28}{'P':>8}  class\n")
            for row in difficulty:
                fh.write(f"{row.task_id:<28}{row.p_value:>8.3f}  {row.klass}\n")
            simple = sum(1 for r in difficulty if r.klass == "simple")
            fh.write(f"{simple} simple / {len(difficulty) - simple} difficult\n")
    paths["report"] = text_path

    if difficulty:
        diff_path = out_dir / "difficulty.csv"
        with diff_path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["task_id", "p_value", "class"])
            for row in difficulty:
                writer.writerow([row.task_id, f"{row.p_value:.4f}", row.klass])
        paths["difficulty"] = diff_path
    return paths


def _human_table(table: MetricsTable) -> str:
    lines = []
    header = (f"{'Config':<22}{'Metric':<14}"
              f"{'All (%)':>10}{'L0 (%)':>10}{'L1 (%)':>10}{'Time (s)':>10}")
    lines.append(header)
    lines.append("-" * len(header))
    for config_id in table.configs():
        cell_all = table.cell(config_id)
        cell_l0 = table.cell(config_id, 0)
        cell_l1 = table.cell(config_id, 1)

        def fmt(cell, attr_k=None):
            if cell is None:
                return f"{'-':>10}"
            value = (cell.success_rate if attr_k is None
                     else cell.pass_at.get(attr_k, 0.0))
            return f"{value * 100:>10.2f}"

        time_s = f"{cell_all.mean_elapsed_s:>10.1f}" if cell_all else f"{'-':>10}"
        lines.append(f"{config_id:<22}{'Success Rate':<14}"
                     f"{fmt(cell_all)}{fmt(cell_l0)}{fmt(cell_l1)}{time_s}")
        for k in PASS_KS:
            lines.append(
                f"{'':<22}{f'Pass@{k}':<14}"
                f"{fmt(cell_all, k)}{fmt(cell_l0, k)}{fmt(cell_l1, k)}"
                f"{'':>10}")
        lines.append("")
    return "\n".join(lines)

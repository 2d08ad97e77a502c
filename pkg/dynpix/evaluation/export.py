import csv
from pathlib import Path

from core.log import get_logger
from core.models.utility_models import EvalReport


logger = get_logger(__name__)

PER_SAMPLE_FILE = "per_sample.csv"
SUMMARY_FILE = "summary.csv"
TABLE_FILE = "table.md"

PER_SAMPLE_COLUMNS = ["model", "split", "id", "dice", "jaccard"]
SUMMARY_COLUMNS = ["model", "split", "count", "mean_dice", "std_dice", "mean_jaccard", "std_jaccard", "noise_path_residual"]


def _markdown_table(reports: list[EvalReport]) -> str:
    """Models as rows, splits as columns; cells read `dice ± std (JC jaccard)` in percent."""
    models = list(dict.fromkeys(report.model_tag for report in reports))
    splits = list(dict.fromkeys(report.split_tag for report in reports))
    cells = {(report.model_tag, report.split_tag): report for report in reports}

    lines = ["| Method | " + " | ".join(splits) + " |", "|---|" + "---|" * len(splits)]
    for model in models:
        row = []
        for split in splits:
            report = cells.get((model, split))
            if report is None:
                row.append("-")
            else:
                row.append(
                    f"{100 * report.mean_dice:.2f} ± {100 * report.std_dice:.2f} (JC {100 * report.mean_jaccard:.2f})"
                )
        lines.append(f"| {model} | " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def export_report(reports: list[EvalReport], out_dir: Path | str) -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {name: out_dir / name for name in (PER_SAMPLE_FILE, SUMMARY_FILE, TABLE_FILE)}

    with open(paths[PER_SAMPLE_FILE], "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(PER_SAMPLE_COLUMNS)
        for report in reports:
            for sample in report.samples:
                writer.writerow([report.model_tag, report.split_tag, sample.id, repr(sample.dice), repr(sample.jaccard)])

    with open(paths[SUMMARY_FILE], "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(SUMMARY_COLUMNS)
        for report in reports:
            residual = "" if report.noise_path_residual is None else repr(report.noise_path_residual)
            writer.writerow(
                [
                    report.model_tag,
                    report.split_tag,
                    report.count,
                    repr(report.mean_dice),
                    repr(report.std_dice),
                    repr(report.mean_jaccard),
                    repr(report.std_jaccard),
                    residual,
                ]
            )

    paths[TABLE_FILE].write_text(_markdown_table(reports), encoding="utf-8")
    logger.info(f"Exported {len(reports)} report(s) to {out_dir}")
    return paths

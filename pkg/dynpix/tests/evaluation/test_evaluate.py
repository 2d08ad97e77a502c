import csv
import unittest
from pathlib import Path
from tempfile import TemporaryDirectory

import numpy as np
import torch

from core.exceptions import EvaluationError
from core.models.config_models import GeneratorSpec
from core.models.utility_models import EvalReport
from core.models.utility_models import SamplePair
from core.models.utility_models import SampleScore
from dynpix.evaluation.evaluate import evaluate_split
from dynpix.evaluation.export import PER_SAMPLE_COLUMNS
from dynpix.evaluation.export import SUMMARY_COLUMNS
from dynpix.evaluation.export import export_report
from dynpix.models.generator import build_generator


def _split(n: int, size: int = 8) -> list[SamplePair]:
    rng = np.random.default_rng(n)
    samples = []
    for i in range(n):
        mask = np.where(rng.uniform(size=(1, size, size)) > 0.5, 1.0, -1.0).astype(np.float32)
        samples.append(SamplePair(id=f"s{i}", image=mask.copy(), mask=mask))
    return samples


class TestEvaluateSplit(unittest.TestCase):
    def test_identity_model_scores_perfectly(self):
        report = evaluate_split(lambda batch: batch, _split(5), model_tag="identity", split_tag="test")

        self.assertEqual(report.count, 5)
        self.assertEqual(report.mean_dice, 1.0)
        self.assertEqual(report.std_dice, 0.0)
        self.assertEqual(report.mean_jaccard, 1.0)
        self.assertEqual([s.id for s in report.samples], [f"s{i}" for i in range(5)])

    def test_inverted_model_scores_zero(self):
        report = evaluate_split(lambda batch: -batch, _split(3))
        self.assertEqual(report.mean_dice, 0.0)

    def test_failing_sample_is_named(self):
        split = _split(2)
        split.append(SamplePair(id="odd_one", image=np.zeros((1, 4, 4), dtype=np.float32), mask=-np.ones((1, 4, 4), dtype=np.float32)))

        def model(batch):
            if batch.shape[-1] != 8:
                raise RuntimeError("bad size")
            return batch

        with self.assertRaises(EvaluationError) as ctx:
            evaluate_split(model, split)
        self.assertIn("odd_one", str(ctx.exception))

    def test_generator_is_evaluated_on_its_image_path(self):
        generator = build_generator(GeneratorSpec(input_size=16, base_width=4, max_width=8, depth=2), seed=0)
        report = evaluate_split(generator, _split(3, size=16), split_tag="val")

        self.assertFalse(generator.training)
        self.assertEqual(report.split_tag, "val")
        self.assertTrue(0.0 <= report.mean_dice <= 1.0)

    def test_population_standard_deviation(self):
        scores = [SampleScore(id="a", dice=0.5, jaccard=1 / 3), SampleScore(id="b", dice=1.0, jaccard=1.0)]
        report = EvalReport.from_scores("m", "test", scores)
        self.assertEqual(report.mean_dice, 0.75)
        self.assertEqual(report.std_dice, 0.25)


class TestExportReport(unittest.TestCase):
    def test_files_and_table(self):
        dynamic = EvalReport.from_scores("dynamic", "test", [SampleScore(id="a", dice=0.9, jaccard=0.9 / 1.1)])
        dynamic = dynamic.model_copy(update={"noise_path_residual": 0.12})
        baseline = EvalReport.from_scores("pix2pix", "test", [SampleScore(id="a", dice=0.8, jaccard=0.8 / 1.2)])
        other = EvalReport.from_scores("dynamic", "jsrt", [SampleScore(id="b", dice=0.7, jaccard=0.7 / 1.3)])

        with TemporaryDirectory() as tmp:
            paths = export_report([dynamic, baseline, other], tmp)
            with open(paths["per_sample.csv"], newline="") as f:
                rows = list(csv.DictReader(f))
            with open(paths["summary.csv"], newline="") as f:
                summary = list(csv.DictReader(f))
            table = Path(paths["table.md"]).read_text()

        self.assertEqual(len(rows), 3)
        self.assertEqual(rows[0]["model"], "dynamic")
        self.assertEqual(float(rows[0]["dice"]), 0.9)
        self.assertEqual(float(summary[0]["noise_path_residual"]), 0.12)
        self.assertEqual(summary[1]["noise_path_residual"], "")

        lines = table.splitlines()
        self.assertEqual(lines[0], "| Method | test | jsrt |")
        self.assertIn("| dynamic | 90.00 ± 0.00 (JC 81.82) | 70.00 ± 0.00 (JC 53.85) |", lines)
        self.assertIn("| pix2pix | 80.00 ± 0.00 (JC 66.67) | - |", lines)

    def test_no_reports_writes_headers_only(self):
        with TemporaryDirectory() as tmp:
            paths = export_report([], tmp)
            summary = Path(paths["summary.csv"]).read_text().splitlines()
            per_sample = Path(paths["per_sample.csv"]).read_text().splitlines()

        self.assertEqual(summary, [",".join(SUMMARY_COLUMNS)])
        self.assertEqual(per_sample, [",".join(PER_SAMPLE_COLUMNS)])

    def test_summary_means_match_per_sample_rows(self):
        reports = [
            evaluate_split(lambda batch: batch * -1.0 if batch.mean() > 0 else batch, _split(7), model_tag="m", split_tag=tag)
            for tag in ("val", "test")
        ]
        with TemporaryDirectory() as tmp:
            paths = export_report(reports, tmp)
            with open(paths["per_sample.csv"], newline="") as f:
                rows = list(csv.DictReader(f))
            with open(paths["summary.csv"], newline="") as f:
                summary = list(csv.DictReader(f))

        for line in summary:
            scores = [row for row in rows if row["split"] == line["split"]]
            self.assertEqual(int(line["count"]), len(scores))
            for column in ("dice", "jaccard"):
                values = np.array([float(row[column]) for row in scores])
                self.assertAlmostEqual(float(line[f"mean_{column}"]), values.mean(), places=12)
                self.assertAlmostEqual(float(line[f"std_{column}"]), values.std(), places=12)


def test_evaluation_is_deterministic():
    generator = build_generator(GeneratorSpec(input_size=16, base_width=4, max_width=8, depth=2), seed=1)
    split = _split(4, size=16)
    torch.manual_seed(0)
    first = evaluate_split(generator, split)
    torch.manual_seed(1)
    second = evaluate_split(generator, split)
    assert [s.dice for s in first.samples] == [s.dice for s in second.samples]

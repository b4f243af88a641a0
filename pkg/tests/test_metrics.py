import numpy as np
import pytest

from e2ecd.errors import ShapeError, UndefinedMetricError
from oracles import oracle_relaxed_confusion, standard_confusion

from e2ecd.metrics import (
    CorpusEvaluator,
    RelaxedConfusion,
    binarize_change_prob,
    evaluate_sample,
    format_metric,
    metrics_from_confusion,
    pck,
    pck_counts,
    relaxed_confusion,
    write_metrics_csv,
)


def random_instance(rng, max_side=8):
    h = int(rng.integers(1, max_side + 1))
    w = int(rng.integers(1, max_side + 1))
    pred = (rng.uniform(size=(h, w)) < rng.uniform(0.05, 0.6)).astype(np.uint8)
    gt = (rng.uniform(size=(h, w)) < rng.uniform(0.05, 0.6)).astype(np.uint8)
    valid = (rng.uniform(size=(h, w)) < 0.85).astype(np.uint8)
    return pred, gt, valid


class TestRelaxedConfusion:
    def test_worked_5x5_example(self):
        gt = np.zeros((5, 5), np.uint8)
        gt[2, 2] = 1
        pred = np.zeros((5, 5), np.uint8)
        pred[2, 3] = 1
        valid = np.ones((5, 5), np.uint8)
        c = relaxed_confusion(pred, gt, valid, radius=1)
        assert (c.tp, c.fn, c.masked_out, c.fp) == (1, 0, 8, 0)
        # the rule leaves 24 - 8 = 16 negatives in play
        assert c.tn == 16
        m = metrics_from_confusion(c)
        assert m.precision == 100.0
        assert m.recall == 100.0

    def test_worked_example_at_radius_zero(self):
        gt = np.zeros((5, 5), np.uint8)
        gt[2, 2] = 1
        pred = np.zeros((5, 5), np.uint8)
        pred[2, 3] = 1
        valid = np.ones((5, 5), np.uint8)
        c = relaxed_confusion(pred, gt, valid, radius=0)
        assert (c.tp, c.fn, c.fp, c.tn, c.masked_out) == (0, 1, 1, 23, 0)
        m = metrics_from_confusion(c)
        assert m.precision == 0.0
        assert m.recall == 0.0

    def test_radius_zero_equals_standard_confusion(self):
        rng = np.random.default_rng(0)
        for _ in range(300):
            pred, gt, valid = random_instance(rng, max_side=16)
            c = relaxed_confusion(pred, gt, valid, 0)
            assert (c.tp, c.fn, c.fp, c.tn) == standard_confusion(pred, gt, valid)
            assert c.masked_out == 0

    def test_matches_bruteforce_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(60):
            pred, gt, valid = random_instance(rng)
            for radius in (0, 1, 2, 3):
                got = relaxed_confusion(pred, gt, valid, radius)
                want = oracle_relaxed_confusion(pred, gt, valid, radius)
                assert got == want

    def test_count_invariants(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            pred, gt, valid = random_instance(rng)
            for radius in (0, 1, 2):
                c = relaxed_confusion(pred, gt, valid, radius)
                v = valid.astype(bool)
                assert c.tp + c.fn == int(np.sum((gt == 1) & v))
                assert c.fp + c.tn == int(np.sum((gt == 0) & v)) - c.masked_out

    def test_recall_and_masking_monotone_in_radius(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            pred, gt, valid = random_instance(rng)
            prev_tp, prev_masked = -1, -1
            for radius in range(4):
                c = relaxed_confusion(pred, gt, valid, radius)
                assert c.tp >= prev_tp
                assert c.masked_out >= prev_masked
                prev_tp, prev_masked = c.tp, c.masked_out

    def test_invalid_prediction_cannot_rescue(self):
        gt = np.zeros((3, 3), np.uint8)
        gt[1, 1] = 1
        pred = np.zeros((3, 3), np.uint8)
        pred[1, 2] = 1
        valid = np.ones((3, 3), np.uint8)
        valid[1, 2] = 0  # the only prediction sits on an invalid pixel
        c = relaxed_confusion(pred, gt, valid, radius=1)
        assert (c.tp, c.fn) == (0, 1)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            relaxed_confusion(
                np.zeros((3, 3), np.uint8), np.zeros((3, 4), np.uint8),
                np.zeros((3, 3), np.uint8), 0,
            )


class TestMetricsFromConfusion:
    def test_perfect_counts(self):
        m = metrics_from_confusion(RelaxedConfusion(1, 0, 0, 15, 0, 1))
        assert (m.precision, m.recall, m.f1, m.iou, m.oa) == (100.0,) * 5

    def test_all_wrong(self):
        m = metrics_from_confusion(RelaxedConfusion(0, 1, 1, 23, 0, 0))
        assert m.precision == 0.0
        assert m.recall == 0.0
        assert m.f1 == 0.0
        assert m.iou == 0.0
        assert m.oa == pytest.approx(92.0)

    def test_all_zero_counts_undefined(self):
        m = metrics_from_confusion(RelaxedConfusion(0, 0, 0, 0, 0, 0))
        assert m.precision is None
        assert m.recall is None
        assert m.f1 is None
        assert m.iou is None
        assert m.oa is None

    def test_f1_undefined_when_precision_undefined(self):
        # no predicted positives, some missed positives
        m = metrics_from_confusion(RelaxedConfusion(0, 2, 0, 5, 0, 0))
        assert m.precision is None
        assert m.recall == 0.0
        assert m.f1 is None

    def test_f1_is_harmonic_mean(self):
        m = metrics_from_confusion(RelaxedConfusion(6, 2, 3, 10, 0, 0))
        p, r = m.precision, m.recall
        assert m.f1 == pytest.approx(2 * p * r / (p + r))


class TestPck:
    def test_identical_flows(self):
        f = np.random.default_rng(0).normal(size=(8, 8, 2)).astype(np.float32)
        assert pck(f, f, np.ones((8, 8), np.uint8), 0.05) == 100.0

    def test_threshold_window(self):
        gt = np.zeros((100, 100, 2), np.float32)
        valid = np.ones((100, 100), np.uint8)
        inside = np.zeros_like(gt)
        inside[..., 0] = 4.0
        outside = np.zeros_like(gt)
        outside[..., 0] = 6.0
        assert pck(inside, gt, valid, 0.05) == 100.0
        assert pck(outside, gt, valid, 0.05) == 0.0

    def test_boundary_counts_as_correct(self):
        gt = np.zeros((100, 100, 2), np.float32)
        valid = np.ones((100, 100), np.uint8)
        at_threshold = np.zeros_like(gt)
        at_threshold[..., 0], at_threshold[..., 1] = 3.0, 4.0  # error exactly 5.0
        assert pck(at_threshold, gt, valid, 0.05) == 100.0

    def test_half_within(self):
        gt = np.zeros((10, 10, 2), np.float32)
        pred = np.zeros_like(gt)
        pred[:5, :, 0] = 100.0  # far off for the top half
        assert pck(pred, gt, np.ones((10, 10), np.uint8), 0.05) == 50.0

    def test_threshold_uses_max_dimension(self):
        gt = np.zeros((10, 40, 2), np.float32)
        pred = np.zeros_like(gt)
        pred[..., 0] = 1.5  # threshold = 0.05 * 40 = 2, not 0.05 * 10 = 0.5
        assert pck(pred, gt, np.ones((10, 40), np.uint8), 0.05) == 100.0

    def test_empty_mask_rejected(self):
        f = np.zeros((4, 4, 2), np.float32)
        with pytest.raises(UndefinedMetricError):
            pck(f, f, np.zeros((4, 4), np.uint8))

    def test_invalid_pixels_ignored(self):
        gt = np.zeros((4, 4, 2), np.float32)
        pred = np.zeros_like(gt)
        pred[0, 0, 0] = 99.0
        valid = np.ones((4, 4), np.uint8)
        valid[0, 0] = 0
        assert pck(pred, gt, valid, 0.05) == 100.0


class TestEvaluateSample:
    def test_perfect_prediction_all_100(self):
        rng = np.random.default_rng(4)
        gt = (rng.uniform(size=(16, 16)) < 0.3).astype(np.uint8)
        valid = np.ones((16, 16), np.uint8)
        flow = rng.normal(size=(16, 16, 2)).astype(np.float32)
        prob = np.zeros((16, 16, 2), np.float32)
        prob[..., 1] = gt
        prob[..., 0] = 1 - gt
        reports = evaluate_sample(prob, flow, gt, flow, valid, radii=(0, 1, 5))
        assert len(reports) == 3
        for m in reports:
            assert (m.precision, m.recall, m.f1, m.iou, m.oa, m.pck) == (100.0,) * 6

    def test_empty_radii(self):
        z = np.zeros((4, 4, 2), np.float32)
        gt = np.zeros((4, 4), np.uint8)
        assert evaluate_sample(z, z, gt, z, np.ones((4, 4), np.uint8), radii=()) == []

    def test_threshold_configurable(self):
        prob = np.zeros((2, 2, 2), np.float32)
        prob[..., 1] = 0.4
        assert binarize_change_prob(prob, 0.5).sum() == 0
        assert binarize_change_prob(prob, 0.3).sum() == 4


class TestCorpusEvaluator:
    def test_micro_average_equals_concatenation(self):
        rng = np.random.default_rng(5)
        ev = CorpusEvaluator(radii=(0, 2), delta=0.05, threshold=0.5)
        parts = []
        for _ in range(4):
            pred, gt, valid = random_instance(rng, max_side=8)
            prob = np.zeros(pred.shape + (2,), np.float32)
            prob[..., 1] = pred
            prob[..., 0] = 1 - pred
            flow_gt = rng.normal(size=pred.shape + (2,)).astype(np.float32)
            flow_pred = flow_gt + rng.normal(scale=3, size=flow_gt.shape).astype(np.float32)
            ev.add_sample(prob, flow_pred, gt, flow_gt, valid)
            parts.append((pred, gt, valid, flow_pred, flow_gt))
        totals = {m.radius: m for m in ev.totals()}
        for radius in (0, 2):
            summed = RelaxedConfusion(0, 0, 0, 0, 0, radius)
            for pred, gt, valid, _, _ in parts:
                summed = summed + relaxed_confusion(pred, gt, valid, radius)
            want = metrics_from_confusion(summed)
            got = totals[radius]
            assert got.precision == want.precision
            assert got.recall == want.recall
            assert got.oa == want.oa
        # PCK totals micro-average over pixels, not over samples
        correct = total = 0
        for pred, gt, valid, fp, fg in parts:
            c, t = pck_counts(fp, fg, valid, 0.05)
            correct += c
            total += t
        assert totals[0].pck == pytest.approx(100.0 * correct / total)

    def test_masking_is_per_sample(self):
        # a positive in sample A must not mask negatives in sample B
        gt_a = np.zeros((3, 3), np.uint8)
        gt_a[1, 1] = 1
        gt_b = np.zeros((3, 3), np.uint8)
        valid = np.ones((3, 3), np.uint8)
        pred = np.zeros((3, 3), np.uint8)
        c_a = relaxed_confusion(pred, gt_a, valid, 1)
        c_b = relaxed_confusion(pred, gt_b, valid, 1)
        merged = c_a + c_b
        assert c_a.masked_out == 8
        assert c_b.masked_out == 0
        assert merged.tn == 0 + 9


class TestCsv:
    def test_format_metric(self):
        assert format_metric(None) == ""
        assert format_metric(98.254) == "98.25"

    def test_csv_layout(self, tmp_path):
        m = metrics_from_confusion(RelaxedConfusion(1, 0, 0, 15, 8, 1))
        m.pck = 79.614
        path = tmp_path / "report.csv"
        write_metrics_csv(path, [("s1", m)])
        lines = path.read_text().splitlines()
        assert lines[0] == "sample_id,radius,P,R,F1,IoU,OA,PCK"
        assert lines[1] == "s1,1,100.00,100.00,100.00,100.00,100.00,79.61"

    def test_csv_empty_cells_for_undefined(self, tmp_path):
        m = metrics_from_confusion(RelaxedConfusion(0, 0, 0, 0, 0, 0))
        path = tmp_path / "report.csv"
        write_metrics_csv(path, [("s1", m)])
        assert path.read_text().splitlines()[1] == "s1,0,,,,,,"

"""Neighborhood-relaxed evaluation metrics.

After registration-and-detection, predictions often land next to the true
changed pixel rather than on it. The relaxed metrics credit a ground-truth
positive if any valid prediction falls inside the (2r+1)x(2r+1) square
around it, and drop the unchanged pixels inside those squares from the
evaluation. Radius 0 reduces to the ordinary confusion matrix.

Run:  python3 demos/03_relaxed_metrics.py
"""

import numpy as np

from e2ecd.metrics import metrics_from_confusion, pck, relaxed_confusion


def show(label, value):
    print(f"  {label:<12} {'--' if value is None else f'{value:6.2f}'}")


# the prediction misses the changed pixel by one column
gt = np.zeros((5, 5), np.uint8)
gt[2, 2] = 1
pred = np.zeros((5, 5), np.uint8)
pred[2, 3] = 1
valid = np.ones((5, 5), np.uint8)

print("5x5 scene: ground-truth positive at (2,2), prediction at (2,3)\n")
for radius in (0, 1, 2):
    c = relaxed_confusion(pred, gt, valid, radius)
    m = metrics_from_confusion(c)
    print(f"radius {radius}: tp={c.tp} fn={c.fn} fp={c.fp} tn={c.tn} "
          f"masked_out={c.masked_out}")
    show("P@r", m.precision)
    show("R@r", m.recall)
    show("F1@r", m.f1)
    show("IoU@r", m.iou)
    show("OA@r", m.oa)
    print()

print("at radius 0 the miss costs both precision and recall;")
print("at radius 1 the neighborhood rule counts it as a detection and the")
print("8 unchanged pixels around the positive leave the evaluation.\n")

# PCK: fraction of valid pixels whose flow endpoint error is at most
# delta * max(H, W); delta defaults to 0.05
h = w = 100
gt_flow = np.zeros((h, w, 2), np.float32)
valid = np.ones((h, w), np.uint8)
for err in (4.0, 5.0, 6.0):
    pred_flow = np.zeros_like(gt_flow)
    pred_flow[..., 0] = err
    print(f"uniform flow error {err} px on a {h}x{w} field -> "
          f"PCK-0.05 = {pck(pred_flow, gt_flow, valid, 0.05):.1f}% "
          f"(threshold {0.05 * max(h, w):.0f} px, boundary inclusive)")

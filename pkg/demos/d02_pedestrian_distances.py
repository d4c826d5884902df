"""
Pairwise pedestrian distances in one frame
==========================================

Boxes are normalized image coordinates. The depth map is a small grid that
gets min-max scaled per frame, so only relative depth matters.
"""

import numpy as np

from polarproxy.geometry import Detection, DepthMap, frame_pair_means

dets = [
    Detection(0.20, 0.60, 0.05, 0.20, "NRP"),
    Detection(0.35, 0.62, 0.05, 0.22, "NRP"),
    Detection(0.70, 0.55, 0.04, 0.18, "RP"),
]

# near the camera at the bottom, far at the top
grid = np.linspace(10.0, 1.0, 9)[:, None] * np.ones((9, 16))
fd = frame_pair_means(dets, DepthMap(grid), frame_id="demo")
for pair, mean in fd.means.items():
    print(pair.value, None if mean is None else round(mean, 4))

# the same boxes with no depth information
flat = frame_pair_means(dets, DepthMap.flat(), frame_id="demo", aspect=16 / 9)
print("flat depth:", {k.value: v and round(v, 4) for k, v in flat.means.items()})

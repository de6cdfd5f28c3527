from __future__ import annotations

import numpy as np

from src.scansim import FrameSpec, base_probe_rotation
from src.transforms import RigidTransform


def probe_pose(x: float, spec: FrameSpec | None = None) -> RigidTransform:
    """Image plane at world x = const, lateral axis centered on y = 40, probe face on z = 60."""
    spec = spec or FrameSpec()
    return RigidTransform.from_rotation(base_probe_rotation(), (x, 40.0 - spec.fov_width / 2.0, 60.0))


def brute_force_hausdorff(xs: np.ndarray, ys: np.ndarray) -> tuple[float, float]:
    d = np.sqrt(((xs[:, None, :] - ys[None, :, :]) ** 2).sum(axis=2))
    forward = d.min(axis=1)
    backward = d.min(axis=0)
    both = np.concatenate([forward, backward])
    return float(both.max()), float(max(np.percentile(forward, 95), np.percentile(backward, 95)))

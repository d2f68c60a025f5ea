"""Input validation helpers shared by the estimators, the CLI and the library core."""

import numpy as np

from .errors import InvalidInput


def check_point_cloud(X, *, dim=None, min_points=1, copy=False):
    """Coerce ``X`` to a finite float64 array of shape ``(n, N)``.

    Raises :class:`InvalidInput` on ragged input, non-finite entries,
    wrong ambient dimension, or too few points.
    """
    try:
        X = np.array(X, dtype=float) if copy else np.asarray(X, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"point cloud is not numeric: {exc}") from exc
    if X.ndim == 1 and X.size == 0:
        X = X.reshape(0, dim or 1)
    if X.ndim != 2:
        raise InvalidInput(f"point cloud must be 2-d (n, N), got shape {X.shape}")
    if not np.isfinite(X).all():
        raise InvalidInput("point cloud contains non-finite coordinates")
    if dim is not None and X.shape[1] != dim:
        raise InvalidInput(f"expected ambient dimension {dim}, got {X.shape[1]}")
    if X.shape[0] < min_points:
        raise InvalidInput(f"need at least {min_points} points, got {X.shape[0]}")
    return X


def check_point(x, *, dim=None):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InvalidInput(f"point must be 1-d, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise InvalidInput("point has non-finite coordinates")
    if dim is not None and x.shape[0] != dim:
        raise InvalidInput(f"expected point in R^{dim}, got R^{x.shape[0]}")
    return x


def check_scalar(value, name, *, positive=False, nonnegative=False):
    value = float(value)
    if not np.isfinite(value):
        raise InvalidInput(f"{name} must be finite")
    if positive and value <= 0:
        raise InvalidInput(f"{name} must be > 0, got {value}")
    if nonnegative and value < 0:
        raise InvalidInput(f"{name} must be >= 0, got {value}")
    return value

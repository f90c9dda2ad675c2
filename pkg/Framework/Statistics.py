import math

import numpy as np

from Framework.Exceptions import ConfigError
from GlobalConfig import MIN_BATCHES


def batch_ci(batch_means) -> (float, float):
    """
    Batch-means estimate: (mean of the batch means, standard error).

    The standard error is the sample standard deviation of the batch means
    divided by sqrt(number of batches).
    """
    values = np.asarray(batch_means, dtype=float)
    if values.ndim != 1 or len(values) < MIN_BATCHES:
        raise ConfigError('batch means need at least {} batches, got {}'.format(MIN_BATCHES, values.size))
    if not np.all(np.isfinite(values)):
        raise ConfigError('batch means contain non-finite values')
    mean = math.fsum(values) / len(values)
    if np.all(values == values[0]):
        return mean, 0.0
    return mean, float(np.std(values, ddof=1) / math.sqrt(len(values)))


def batch_bounds(n_items: int, n_batches: int) -> np.ndarray:
    """Split indices [0, n_items) into n_batches contiguous, near-equal batches; returns n_batches+1 edges."""
    if n_items < n_batches:
        raise ConfigError('cannot split {} items into {} batches'.format(n_items, n_batches))
    return np.linspace(0, n_items, n_batches + 1).round().astype(np.int64)

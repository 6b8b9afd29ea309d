"""
Central finite differences for checking hand-written gradients
"""
import numpy as np

from typing import Callable


def numerical_gradient(fn: Callable[[np.ndarray], float], x: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """
    Estimate the gradient of a scalar function by central differences, one coordinate at a time.

    :param fn: The function, called with arrays shaped like x
    :param x: The point to differentiate at
    :param step: The finite difference step
    :return: The estimated gradient
    """
    x = np.array(x, dtype=float)
    grad = np.zeros_like(x)
    for index in np.ndindex(x.shape):
        original = x[index]
        x[index] = original + step
        upper = fn(x)
        x[index] = original - step
        lower = fn(x)
        x[index] = original
        grad[index] = (upper - lower) / (2.0 * step)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """
    Norm-wise relative error ‖a - n‖ / max(‖a‖ + ‖n‖, tiny), zero when both are zero.

    :param analytic: The analytic gradient
    :param numeric: The numerical estimate
    :return: The relative error
    """
    analytic = np.asarray(analytic, dtype=float)
    numeric = np.asarray(numeric, dtype=float)
    scale = np.linalg.norm(analytic) + np.linalg.norm(numeric)
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / max(scale, np.finfo(float).tiny))


def gradient_check(fn: Callable[[np.ndarray], float], x: np.ndarray, analytic: np.ndarray,
                   step: float = 1e-6) -> float:
    """
    Compare an analytic gradient with central differences.

    :param fn: The scalar function
    :param x: The point the gradient was computed at
    :param analytic: The analytic gradient
    :param step: The finite difference step
    :return: The norm-wise relative error
    """
    return relative_error(analytic, numerical_gradient(fn, x, step))

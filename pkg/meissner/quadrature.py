"""
Cumulative quadrature on the uniform radial grid.
"""

import numpy as np
from scipy.integrate import cumulative_trapezoid


def cumulative_integral(values: np.ndarray, spacing: float, corrected: bool = True) -> np.ndarray:
    """
    Running integral F(x_i) = int_{x_0}^{x_i} f on a uniform grid.

    Args:
        values: Samples of f at the grid nodes
        spacing: Node spacing
        corrected: Add the Euler-Maclaurin end correction -h^2/12 (f'(x_i) - f'(x_0)),
            with f' from second-order differences; plain trapezoid otherwise

    Returns:
        Array of the same length as values, starting at 0
    """
    running = cumulative_trapezoid(values, dx=spacing, initial=0.0)
    if corrected and len(values) >= 3:
        slope = np.gradient(values, spacing, edge_order=2)
        running = running - spacing * spacing / 12.0 * (slope - slope[0])
    return running


def integral(values: np.ndarray, spacing: float, corrected: bool = True) -> float:
    """Total of cumulative_integral over the whole array"""
    return float(cumulative_integral(values, spacing, corrected)[-1])

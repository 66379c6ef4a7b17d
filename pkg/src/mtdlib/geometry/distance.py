import numpy as np
from numpy import ndarray
from scipy.spatial.distance import cdist

__all__ = ["l2_distance", "manhattan_distance", "chebyshev_distance", "within_radius", "radius_adjacency"]


def _as_points(A) -> ndarray:

    points = np.asarray(A, dtype=float)

    if points.size == 0:
        return points.reshape(0, 2)

    if len(points.shape) != 2:
        raise ValueError("expected matrices of dimension=2")

    return points


def l2_distance(A, B) -> ndarray:
    """Calculates the Euclidean distances, D, between two sets of planar points.

        :math:`D_{ij} = \\|A_i - B_j\\|_2`

    :param A: 2D array of points - shape (N, 2).
    :type A: numpy array
    :param B: 2D array of points - shape (M, 2).
    :type B: numpy array

    :return: The L2-distance matrix - shape (N, M).
    :rtype: numpy array
    """

    A = _as_points(A)
    B = _as_points(B)

    if len(A) == 0 or len(B) == 0:
        return np.zeros((len(A), len(B)))

    if B.shape[1] != A.shape[1]:
        raise ValueError("expected matrices containing vectors of same size")

    return cdist(A, B, metric="euclidean")


def manhattan_distance(A, B) -> ndarray:
    """Calculates the Manhattan distances, D, between two sets of grid cells.

        :math:`D_{ij} = \\|A_i - B_j\\|_1`

    :param A: 2D array of cells - shape (N, 2).
    :type A: numpy array
    :param B: 2D array of cells - shape (M, 2).
    :type B: numpy array

    :return: The Manhattan-distance matrix - shape (N, M).
    :rtype: numpy array
    """

    A = _as_points(A)
    B = _as_points(B)

    if len(A) == 0 or len(B) == 0:
        return np.zeros((len(A), len(B)))

    if B.shape[1] != A.shape[1]:
        raise ValueError("expected matrices containing vectors of same size")

    return cdist(A, B, metric="cityblock")


def chebyshev_distance(A, B) -> ndarray:
    """Calculates the Chebyshev distances, D, between two sets of grid cells, the fewest
    king moves between them.

    :param A: 2D array of cells - shape (N, 2).
    :type A: numpy array
    :param B: 2D array of cells - shape (M, 2).
    :type B: numpy array

    :return: The Chebyshev-distance matrix - shape (N, M).
    :rtype: numpy array
    """

    A = _as_points(A)
    B = _as_points(B)

    if len(A) == 0 or len(B) == 0:
        return np.zeros((len(A), len(B)))

    if B.shape[1] != A.shape[1]:
        raise ValueError("expected matrices containing vectors of same size")

    return cdist(A, B, metric="chebyshev")


def within_radius(A, B, radius) -> ndarray:
    """Boolean matrix, True where point :math:`B_j` lies in the closed disk of radius
    ``radius`` centred at :math:`A_i`. ``radius`` may be a scalar or one value per row of A.
    """

    D = l2_distance(A, B)
    r = np.asarray(radius, dtype=float)

    if r.ndim == 1:
        r = r[:, np.newaxis]

    return D <= r


def radius_adjacency(points, radius: float) -> ndarray:
    """Symmetric adjacency matrix of the graph joining points at most ``radius`` apart.
    The diagonal is False.
    """

    adjacency = within_radius(points, points, radius)
    np.fill_diagonal(adjacency, False)

    return adjacency

import numpy as np

from mtdlib.geometry import chebyshev_distance, l2_distance, manhattan_distance, radius_adjacency, within_radius


def test_manhattan():

    n1 = 7
    n2 = 9

    rng = np.random.default_rng(1)
    v1 = rng.integers(0, 10, size=(n1, 2))
    v2 = rng.integers(0, 10, size=(n2, 2))

    D = manhattan_distance(v1, v2)

    Dtest = np.zeros((n1, n2))

    for i in range(n1):
        for j in range(n2):
            for k in range(2):
                Dtest[i, j] += abs(v1[i, k] - v2[j, k])

    assert np.allclose(D, Dtest), "Error in manhattan distance"


def test_chebyshev():

    n1 = 7
    n2 = 9

    rng = np.random.default_rng(2)
    v1 = rng.integers(0, 10, size=(n1, 2))
    v2 = rng.integers(0, 10, size=(n2, 2))

    D = chebyshev_distance(v1, v2)

    Dtest = np.zeros((n1, n2))

    for i in range(n1):
        for j in range(n2):
            Dtest[i, j] = max(abs(v1[i, k] - v2[j, k]) for k in range(2))

    assert np.allclose(D, Dtest), "Error in chebyshev distance"
    assert chebyshev_distance(v1, []).shape == (n1, 0)


def test_l2():

    n1 = 7
    n2 = 9

    rng = np.random.default_rng(2)
    v1 = rng.random((n1, 2))
    v2 = rng.random((n2, 2))

    D = l2_distance(v1, v2)

    Dtest = np.zeros((n1, n2))

    for i in range(n1):
        for j in range(n2):
            for k in range(2):
                Dtest[i, j] += (v1[i, k] - v2[j, k]) ** 2

    np.sqrt(Dtest, out=Dtest)

    assert np.allclose(D, Dtest), "Error in l2 distance"


def test_l2_empty():

    D = l2_distance(np.zeros((0, 2)), [(1.0, 1.0)])

    assert D.shape == (0, 1)


def test_within_radius_is_closed():

    aps = [(0.0, 0.0), (8.0, 0.0)]
    users = [(1.0, 0.0), (7.0, 0.0)]

    # distance exactly equal to the radius counts as covered
    covered = within_radius(aps, users, [7.0, 2.0])

    assert covered.tolist() == [[True, True], [False, True]]


def test_radius_adjacency():

    points = [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (5.0, 5.0)]

    A = radius_adjacency(points, 1.5)

    assert not A.diagonal().any()
    assert (A == A.T).all()
    assert A[0, 1] and A[1, 2]
    assert not A[0, 2]
    assert not A[3].any()


if __name__ == "__main__":
    test_manhattan()
    test_chebyshev()
    test_l2()
    test_within_radius_is_closed()

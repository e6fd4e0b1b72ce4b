"""Solution blocks listed for the four simulation instances, as printed (2-3 decimals).

Each entry maps (instance, mode, nu) to (atoms, y, weights). Printed flow
matrices have routes as rows and atoms/messages as columns; they are stored
transposed here so that ``atoms[k]`` is a flow vector.
"""
import numpy as np

I2 = [[1, 0], [0, 1]]
NOINFO = [[1, 0], [1, 0]]


def _blk(cols, y, weights):
    return np.array(cols, dtype=float).T, np.array(y, dtype=float), np.array(weights, dtype=float)


BLOCKS = {
    ("two_link_affine", "public", 0.25): _blk([[1.25, 0], [0, 1.25]], [3.23, 0.52], I2),
    ("two_link_affine", "public", 0.5): _blk([[2.06, 2.06], [0.44, 0.44]], [2.11, 0.39], NOINFO),
    ("two_link_affine", "public", 0.75): _blk([[3.75, 0], [0, 3.75]], [0.42, 0.83], NOINFO),
    ("two_link_affine", "public", 1.0): _blk([[4.17, 0.2], [0.83, 4.8]], [0, 0], NOINFO),
    ("two_link_affine", "private", 0.25): _blk([[0.32, 0], [0.93, 1.25]], [3.75, 0], I2),
    ("two_link_affine", "private", 0.5): _blk([[1.58, 0.37], [0.92, 2.13]], [2.5, 0], I2),
    ("two_link_affine", "private", 0.75): _blk([[2.83, 1.62], [0.92, 2.13]], [1.25, 0], I2),
    ("two_link_affine", "private", 1.0): _blk([[4.08, 2.87], [0.92, 2.13]], [0, 0], I2),
    ("two_link_bpr", "public", 0.25): _blk([[1.25, 0], [0, 1.25]], [3.75, 0], I2),
    ("two_link_bpr", "public", 0.5): _blk([[2.5, 0], [0, 2.5]], [2.5, 0], I2),
    ("two_link_bpr", "public", 0.75): _blk([[3.75, 0], [0, 3.75]], [1.25, 0], I2),
    # printed as [[0.87, 0], [0.13, 1]], whose rows are not stochastic; its columns are
    ("two_link_bpr", "public", 1.0): _blk([[5.0, 2.08], [0.0, 2.92]], [0, 0], [[0.87, 0.13], [0, 1]]),
    ("two_link_bpr", "private", 0.25): _blk([[0.99, 0], [0.26, 1.25]], [3.75, 0], I2),
    ("two_link_bpr", "private", 0.5): _blk([[2.24, 0.0], [0.26, 2.5]], [2.5, 0], I2),
    ("two_link_bpr", "private", 0.75): _blk([[3.49, 0.76], [0.26, 2.99]], [1.25, 0], I2),
    ("two_link_bpr", "private", 1.0): _blk([[4.74, 2.01], [0.26, 2.99]], [0, 0], I2),
    ("wheatstone_affine", "public", 0.25): _blk([[0, 0.625], [0.625, 0], [0, 0]], [1.53, 0.34, 0], I2),
    ("wheatstone_affine", "public", 0.5): _blk([[0, 1.25], [1.25, 0], [0, 0]], [1.23, 0.02, 0], I2),
    ("wheatstone_affine", "public", 0.75): _blk([[0, 1.875], [1.875, 0], [0, 0]], [0.625, 0, 0], I2),
    ("wheatstone_affine", "public", 1.0): _blk([[0.08, 2.5], [2.42, 0], [0, 0]], [0, 0, 0], I2),
    ("wheatstone_affine", "private", 0.25): _blk([[0.02, 0.61], [0.61, 0.02], [0, 0]], [1.53, 0.34, 0], I2),
    ("wheatstone_affine", "private", 0.5): _blk([[0, 1.25], [1.25, 0], [0, 0]], [1.25, 0, 0], I2),
    ("wheatstone_affine", "private", 0.75): _blk([[0.14, 1.87], [1.73, 0], [0, 0]], [0.63, 0, 0], I2),
    ("wheatstone_affine", "private", 1.0): _blk([[0.76, 2.5], [1.74, 0], [0, 0]], [0, 0, 0], I2),
    ("wheatstone_quadratic", "public", 0.25): _blk([[0, 0], [0, 0.625], [0.625, 0]], [1.521, 0.354, 0], I2),
    ("wheatstone_quadratic", "public", 0.5): _blk([[0, 0.017], [0, 1.233], [1.25, 0]], [1.25, 0, 0], I2),
    ("wheatstone_quadratic", "public", 0.75): _blk([[0.160, 0.642], [0, 1.233], [1.715, 0]], [0.625, 0, 0], I2),
    ("wheatstone_quadratic", "public", 1.0): _blk([[0.785, 1.267], [0, 1.233], [1.715, 0]], [0, 0, 0], I2),
    ("wheatstone_quadratic", "private", 0.25): _blk([[0, 0], [0, 0.625], [0.625, 0]], [1.521, 0.354, 0], I2),
    ("wheatstone_quadratic", "private", 0.5): _blk([[0.025, 0.04], [0.108, 1.21], [1.117, 0]], [1.25, 0, 0], I2),
    ("wheatstone_quadratic", "private", 0.75): _blk([[0.653, 0.664], [0.104, 1.211], [1.118, 0]], [0.625, 0, 0], I2),
    ("wheatstone_quadratic", "private", 1.0): _blk([[1.277, 1.290], [0.108, 1.210], [1.115, 0]], [0, 0, 0], I2),
}

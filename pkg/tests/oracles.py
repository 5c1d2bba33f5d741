"""Independent numerical oracles used to freeze expected test values.

Nothing here shares code with the package: the Green's function oracle is a
plain second-order finite-difference solve, derivatives are plain central
differences, and linear algebra goes through dense numpy calls.
"""
import numpy as np


def neumann_green_fd(kappa, a, tau, ell, n):
    """Dense FD Green's matrix of tau^2 (kappa^2 - a d2/dx2), zero-derivative ends.

    Returns (grid, G) with G[i, j] ~ G(grid[i], grid[j]); error is O(h^2).
    The discrete delta at node j weighs 1/cell_mass where boundary cells
    have half mass.
    """
    h = ell / n
    size = n + 1
    A = np.zeros((size, size))
    for i in range(1, size - 1):
        A[i, i - 1] = A[i, i + 1] = -a / h**2
        A[i, i] = 2 * a / h**2 + kappa**2
    # ghost-node Neumann closure at both ends
    A[0, 0] = A[-1, -1] = 2 * a / h**2 + kappa**2
    A[0, 1] = A[-1, -2] = -2 * a / h**2
    A *= tau**2
    mass = np.full(size, h)
    mass[0] = mass[-1] = h / 2
    G = np.linalg.inv(A) / mass[None, :]
    return np.linspace(0.0, ell, size), G


def neumann_green_oracle(kappa, a, tau, ell, s, t, n=1000):
    """Richardson-extrapolated Green's function value at (s, t).

    s and t must be grid points of both the n and 2n grids, i.e. multiples
    of ell / n.
    """
    def at(nn):
        grid, G = neumann_green_fd(kappa, a, tau, ell, nn)
        i = int(round(s / ell * nn))
        j = int(round(t / ell * nn))
        assert abs(grid[i] - s) < 1e-12 and abs(grid[j] - t) < 1e-12
        return G[i, j]

    coarse, fine = at(n), at(2 * n)
    return fine + (fine - coarse) / 3.0


def second_derivative(f, x, h=1e-3):
    """Richardson-extrapolated central second difference of a scalar map."""
    def d2(hh):
        return (f(x - hh) - 2.0 * f(x) + f(x + hh)) / hh**2

    return (4.0 * d2(h) - d2(2.0 * h)) / 3.0


def schur_conditional(mat, rows, cols, given):
    """C_AB - C_AS C_SS^{-1} C_SB by dense inversion (the blunt way)."""
    mat = np.asarray(mat, dtype=float)
    css_inv = np.linalg.inv(mat[np.ix_(given, given)])
    return (
        mat[np.ix_(rows, cols)]
        - mat[np.ix_(rows, given)] @ css_inv @ mat[np.ix_(given, cols)]
    )


def dense_loglik(cov, y):
    """Gaussian log density via explicit inverse and determinant."""
    cov = np.asarray(cov, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    quad = float(y @ np.linalg.inv(cov) @ y)
    _, logdet = np.linalg.slogdet(cov)
    return -0.5 * (quad + logdet + n * np.log(2.0 * np.pi))

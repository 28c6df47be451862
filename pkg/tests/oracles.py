"""Independent reference implementations used only by the tests.

Everything here deliberately avoids the package's truncated-series kernels:
operators are materialized as dense lower-triangular Toeplitz matrices and
solved with generic linear algebra, and the step-response loop is re-derived
with its own state bookkeeping. Agreement between these oracles and the
package is the evidence the tests assert.
"""

from __future__ import annotations

import numpy as np


def toeplitz_lower(col: np.ndarray) -> np.ndarray:
    n = col.size
    mat = np.zeros((n, n))
    for i in range(n):
        mat[i:, i] = col[: n - i]
    return mat


def shift_matrix(n: int) -> np.ndarray:
    mat = np.zeros((n, n))
    mat[1:, :-1] = np.eye(n - 1)
    return mat


def dense_conv(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return toeplitz_lower(a) @ b


def dense_solve(denom: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    return np.linalg.solve(toeplitz_lower(denom), rhs)


def impulse_by_division(num, den, delay, n) -> np.ndarray:
    """Impulse response by explicit polynomial long division."""
    g = np.zeros(n)
    for k in range(n):
        acc = 0.0
        j = k - delay
        if 0 <= j < len(num):
            acc += num[j]
        for i in range(1, min(len(den), k + 1)):
            acc -= den[i] * g[k - i]
        g[k] = acc
    return g


def dense_closed_loop_single(problem, k) -> np.ndarray:
    """Closed-loop shock response via explicit matrices and a dense solve."""
    p = problem.truncation
    st = problem.process.step_response(p - 1).coeffs
    nbar = problem.disturbance.impulse_response(p - 1).coeffs
    f_mat = shift_matrix(p)
    st_mat = toeplitz_lower(st)
    system = np.eye(p) + k[0] * st_mat + k[1] * f_mat @ st_mat + k[2] * f_mat @ f_mat @ st_mat
    return np.linalg.solve(system, nbar)


def dense_cascade(problem, k) -> tuple[np.ndarray, np.ndarray]:
    """Cascade shock responses by solving the coupled output equations as one
    block-linear system (outer output driven by inner output, inner output
    driven by both controllers)."""
    p = problem.truncation
    k4, k5, k6 = k
    g1 = problem.outer.impulse_response(p - 1).coeffs
    g2 = problem.inner.impulse_response(p - 1).coeffs
    s2 = np.cumsum(g2)
    n1 = problem.outer_disturbance.impulse_response(p - 1).coeffs
    n2 = problem.inner_disturbance.impulse_response(p - 1).coeffs
    eye = np.eye(p)
    im1 = toeplitz_lower(g1)
    im2 = toeplitz_lower(g2)
    s2_mat = toeplitz_lower(s2)
    f_mat = shift_matrix(p)
    block = np.block(
        [
            [eye, -im1],
            [k4 * k6 * s2_mat + k5 * k6 * f_mat @ s2_mat, eye + k6 * im2],
        ]
    )
    sol1 = np.linalg.solve(block, np.concatenate([n1, np.zeros(p)]))
    sol2 = np.linalg.solve(block, np.concatenate([np.zeros(p), n2]))
    return sol1[:p], sol2[:p]


def step_loop_single(problem, k, horizon, amplitude=1.0):
    """Independent noise-free step simulation of the single loop.

    Uses full convolution sums over stored input history instead of the
    package's recursive plant state, so shared bugs are unlikely.
    """
    num = np.asarray(problem.process.num)
    den = np.asarray(problem.process.den)
    d = problem.process.delay
    y = np.zeros(horizon)
    u = np.zeros(horizon)
    e_hist = np.zeros(horizon)
    for t in range(horizon):
        acc = 0.0
        for j, b in enumerate(num):
            if t - d - j >= 0:
                acc += b * u[t - d - j]
        for i, a in enumerate(den[1:], start=1):
            if t - i >= 0:
                acc -= a * y[t - i]
        y[t] = acc
        e_hist[t] = amplitude - y[t]
        du = 0.0
        for m, km in enumerate(k):
            if t - m >= 0:
                du += km * e_hist[t - m]
        u[t] = (u[t - 1] if t >= 1 else 0.0) + du
    return y, np.abs(e_hist).sum()

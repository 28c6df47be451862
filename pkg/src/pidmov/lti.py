"""Discrete-time LTI primitives in the backward-shift operator q^-1.

Transfer functions are rational in q^-1 with a separate integer dead time.
Finite response sequences double as lower-triangular Toeplitz operators
represented by their first column, so operator products are truncated
convolutions and operator inverses are forward substitutions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter


@dataclass(frozen=True)
class DiscreteTransferFunction:
    """Rational transfer function b(q^-1)/a(q^-1) * q^-delay.

    Coefficients are listed in ascending powers of q^-1. The denominator is
    normalized so a0 = 1 on construction.
    """

    num: tuple[float, ...]
    den: tuple[float, ...]
    delay: int = 0

    def __post_init__(self):
        num = tuple(float(b) for b in self.num)
        den = tuple(float(a) for a in self.den)
        if not num or not den:
            raise ValueError("numerator and denominator must be non-empty")
        if den[0] == 0.0:
            raise ValueError("leading denominator coefficient must be nonzero")
        if self.delay < 0:
            raise ValueError(f"delay must be >= 0, got {self.delay}")
        if den[0] != 1.0:
            a0 = den[0]
            num = tuple(b / a0 for b in num)
            den = tuple(a / a0 for a in den)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "delay", int(self.delay))

    def impulse_response(self, n: int) -> "ImpulseSeq":
        """First n+1 impulse-response coefficients g(0..n).

        g(k) = b_{k-d} - sum_{i>=1} a_i g(k-i), with out-of-range b taken as 0;
        identical to long division of the rational function shifted by d.
        """
        if n < 0:
            raise ValueError(f"response length must be >= 0, got n={n}")
        x = np.zeros(n + 1)
        if self.delay <= n:
            m = min(len(self.num), n + 1 - self.delay)
            x[self.delay:self.delay + m] = self.num[:m]
        g = lfilter([1.0], self.den, x)
        return ImpulseSeq(g, kind="impulse")

    def step_response(self, n: int) -> "ImpulseSeq":
        """Running sum of the impulse response, s(k) = sum_{i<=k} g(i)."""
        g = self.impulse_response(n)
        return ImpulseSeq(np.cumsum(g.coeffs), kind="step")


@dataclass(frozen=True)
class ImpulseSeq:
    """Finite response sequence; also the first column of a lower-triangular
    Toeplitz operator."""

    coeffs: np.ndarray
    kind: str = "impulse"

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size < 1:
            raise ValueError("coeffs must be a non-empty 1-d vector")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)
        if self.kind not in ("impulse", "step"):
            raise ValueError(f"unknown kind {self.kind!r}")

    def __len__(self) -> int:
        return self.coeffs.size

    def sum_of_squares(self) -> float:
        return float(self.coeffs @ self.coeffs)


def series_mul(a: ImpulseSeq, b: ImpulseSeq) -> ImpulseSeq:
    """Truncated convolution: the product of two Toeplitz operators,
    or an operator applied to a response vector."""
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    return ImpulseSeq(conv_trunc(a.coeffs, b.coeffs), kind="impulse")


def series_solve(denom: ImpulseSeq, rhs: ImpulseSeq) -> ImpulseSeq:
    """Solve series_mul(denom, x) = rhs by forward substitution.

    Requires denom to have unit leading coefficient (unit-lower-triangular
    operator), which makes the solve exact in O(n^2).
    """
    if len(denom) != len(rhs):
        raise ValueError(f"length mismatch: {len(denom)} vs {len(rhs)}")
    if denom.coeffs[0] != 1.0:
        raise ValueError(
            f"leading coefficient must be 1 for a unit-triangular solve, "
            f"got {denom.coeffs[0]}"
        )
    return ImpulseSeq(solve_trunc(denom.coeffs, rhs.coeffs), kind="impulse")


# Array kernels used on hot paths; the ImpulseSeq wrappers above are the
# public faces of the same operations.

def conv_trunc(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)[: a.size]


def solve_trunc(denom: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    # lfilter with b=[1] is exactly the forward substitution x(k) =
    # rhs(k) - sum_{i>=1} denom(i) x(k-i).
    return lfilter([1.0], denom, rhs)


def shift_trunc(a: np.ndarray, m: int = 1) -> np.ndarray:
    """Apply the one-step-delay operator m times (truncated)."""
    if m == 0:
        return a.copy()
    out = np.zeros_like(a)
    out[m:] = a[:-m]
    return out


def identity_series(n: int) -> np.ndarray:
    e0 = np.zeros(n)
    e0[0] = 1.0
    return e0

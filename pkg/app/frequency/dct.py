"""Frequency-domain view of model weights.

A model's flat parameter vector is laid row-major into the smallest square
matrix that holds it (zero padded), transformed with the orthonormal 2D
DCT-II, and reduced to the triangle of low-frequency coefficients
``i + j <= N // 2``. That vector is the model's fingerprint.
"""
import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import fft
from scipy.sparse.linalg import LinearOperator

from app.core.utils import DimensionMismatchError, NonFiniteInputError

# An N x N real matrix of DCT coefficients; entry (0, 0) is the DC term.
CoefficientMatrix = np.ndarray


@dataclass(frozen=True, eq=False)
class FrequencyFingerprint:
    coeffs: np.ndarray
    source_n: int

    def __len__(self):
        return self.coeffs.shape[0]

    @property
    def norm(self):
        return float(np.linalg.norm(self.coeffs))

    def scaled(self, factor):
        return FrequencyFingerprint(self.coeffs * factor, self.source_n)


def _values(params):
    return np.asarray(getattr(params, "values", params), dtype=np.float64)


def square_side(length):
    if length < 1:
        raise DimensionMismatchError("Cannot pack an empty parameter vector.")
    return math.isqrt(length - 1) + 1


def pack_to_square(params) -> np.ndarray:
    values = _values(params).reshape(-1)
    n = square_side(values.shape[0])
    grid = np.zeros(n * n)
    grid[: values.shape[0]] = values
    return grid.reshape(n, n)


def unpack_from_square(matrix, length) -> np.ndarray:
    flat = np.asarray(matrix, dtype=np.float64).reshape(-1)
    if length > flat.shape[0]:
        raise DimensionMismatchError(
            f"A {matrix.shape} matrix cannot hold {length} values."
        )
    return flat[:length].copy()


def _check_square(x, what):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise DimensionMismatchError(f"{what} must be square, got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInputError(f"{what} contains non-finite entries.")
    return x


def dct2(x) -> CoefficientMatrix:
    return fft.dctn(_check_square(x, "DCT input"), type=2, norm="ortho")


def idct2(coefficients: CoefficientMatrix) -> np.ndarray:
    return fft.idctn(
        _check_square(coefficients, "Coefficient matrix"), type=2, norm="ortho"
    )


@functools.lru_cache(maxsize=None)
def low_frequency_indices(n):
    """Row and column index arrays of the kept triangle, row-major."""
    h = n // 2
    pairs = [(i, j) for i in range(h + 1) for j in range(h + 1) if i + j <= h]
    rows = np.array([i for i, _ in pairs], dtype=np.int64)
    cols = np.array([j for _, j in pairs], dtype=np.int64)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


def fingerprint_length(n):
    h = n // 2
    return (h + 1) * (h + 2) // 2


def extract_low_frequency(coefficients: CoefficientMatrix) -> FrequencyFingerprint:
    coefficients = np.asarray(coefficients)
    n = coefficients.shape[0]
    rows, cols = low_frequency_indices(n)
    return FrequencyFingerprint(coeffs=coefficients[rows, cols].copy(), source_n=n)


def fingerprint(params) -> FrequencyFingerprint:
    return extract_low_frequency(dct2(pack_to_square(params)))


def fingerprint_pullback(coeff_grad, length) -> np.ndarray:
    """Adjoint of ``fingerprint`` for a vector of ``length`` parameters.

    ``fingerprint`` is linear in the weights, so the gradient of any scalar
    function of the fingerprint is this map applied to its gradient with
    respect to the coefficients.
    """
    n = square_side(length)
    rows, cols = low_frequency_indices(n)
    scattered = np.zeros((n, n))
    scattered[rows, cols] = coeff_grad
    return unpack_from_square(idct2(scattered), length)


def replace_low_frequency(target_coefficients, source_coefficients):
    """Copy of ``target_coefficients`` with the low band taken from source."""
    if np.shape(target_coefficients) != np.shape(source_coefficients):
        raise DimensionMismatchError(
            "Coefficient matrices of different sides cannot be combined."
        )
    merged = np.array(target_coefficients, dtype=np.float64, copy=True)
    rows, cols = low_frequency_indices(merged.shape[0])
    merged[rows, cols] = np.asarray(source_coefficients)[rows, cols]
    return merged


def fingerprint_operator(length) -> LinearOperator:
    """``fingerprint`` as a linear map on ``length`` weights.

    The adjoint is ``fingerprint_pullback``; padding cells of the square are
    not part of the domain.
    """
    n = square_side(length)
    return LinearOperator(
        shape=(fingerprint_length(n), length),
        matvec=lambda v: fingerprint(np.ravel(v)).coeffs,
        rmatvec=lambda c: fingerprint_pullback(np.ravel(c), length),
        dtype=np.float64,
    )

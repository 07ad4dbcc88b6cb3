"""Forward linear-prediction precoder for the transmit-correlated channel."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, NumericalDegeneracyError

__all__ = [
    "Predictor",
    "autocorrelation_sequence",
    "levinson_durbin",
    "build_precoding_matrix",
    "predictor_for",
]

DEGENERACY_RTOL = 1e-12


@dataclass(frozen=True)
class Predictor:
    """Optimum forward predictors of every order up to ``order``.

    ``coeffs[p - 1, j - 1]`` is the j-th coefficient of the order-p filter,
    stored so the prediction error reads ``x[n] + sum_j coeffs[p-1, j-1] x[n-j]``
    (an AR(1) process with ``rho = 0.9`` gives ``-0.9``).  ``error_vars[p]`` is
    the minimum error variance of the order-p predictor, so ``error_vars[0]``
    equals ``r[0]`` and ``error_vars[i - 1]`` is the variance seen by transmit
    antenna ``i`` after precoding.
    """

    order: int
    coeffs: np.ndarray
    error_vars: np.ndarray
    reflection: np.ndarray

    def filter(self, p):
        """Coefficients ``a_{p,1..p}`` of the order-p predictor."""
        if p == 0:
            return np.zeros(0)
        return self.coeffs[p - 1, :p].copy()


def autocorrelation_sequence(rho, sigma2_h, n):
    """``R[m] = rho^m sigma2_h`` for ``m = 0 .. n-1``."""
    if not 0.0 <= rho < 1.0:
        raise InvalidArgumentError(f"rho must lie in [0, 1), got {rho}")
    if sigma2_h <= 0:
        raise InvalidArgumentError("sigma2_h must be positive")
    return sigma2_h * float(rho) ** np.arange(int(n))


def levinson_durbin(r, order=None):
    """Order-recursive solution of the forward-prediction normal equations.

    Parameters
    ----------
    r : array_like
        Real autocorrelation ``r[0], r[1], ...``; ``r[0] > 0``.
    order : int, optional
        Highest predictor order, at most ``len(r) - 1`` (the default).

    Raises
    ------
    NumericalDegeneracyError
        If the Toeplitz matrix stops being positive definite, detected as an
        error variance below ``1e-12 * r[0]``.
    """
    r = np.asarray(r, dtype=float)
    if r.ndim != 1 or r.size == 0 or r[0] <= 0:
        raise InvalidArgumentError("r[0] must be positive")
    order = r.size - 1 if order is None else int(order)
    if not 0 <= order <= r.size - 1:
        raise InvalidArgumentError(f"order {order} needs {order + 1} lags, got {r.size}")

    coeffs = np.zeros((order, order))
    error_vars = np.empty(order + 1)
    reflection = np.zeros(order)
    error_vars[0] = r[0]
    prev = np.zeros(0)
    for p in range(1, order + 1):
        acc = r[p] + np.dot(prev, r[p - 1 : 0 : -1])
        k = -acc / error_vars[p - 1]
        cur = np.empty(p)
        cur[: p - 1] = prev + k * prev[::-1]
        cur[p - 1] = k
        err = (1.0 - k * k) * error_vars[p - 1]
        if err <= DEGENERACY_RTOL * r[0]:
            raise NumericalDegeneracyError(p, err)
        coeffs[p - 1, :p] = cur
        error_vars[p] = err
        reflection[p - 1] = k
        prev = cur

    if np.any(np.diff(error_vars) > 1e-12 * r[0]):
        raise AssertionError("prediction error variance increased with order")
    for arr in (coeffs, error_vars, reflection):
        arr.setflags(write=False)
    return Predictor(order=order, coeffs=coeffs, error_vars=error_vars, reflection=reflection)


def build_precoding_matrix(predictor, n_t=None):
    """Precoder ``B = A^T`` with ``A`` unit lower triangular.

    Row ``i`` of ``A`` (0-based) holds the order-i predictor in reversed
    order, ``[a_{i,i}, ..., a_{i,1}, 1, 0, ...]``, so column ``i`` of ``H B``
    is the order-i forward prediction error of column ``i`` of ``H``.
    """
    n_t = predictor.order + 1 if n_t is None else int(n_t)
    if n_t - 1 > predictor.order:
        raise InvalidArgumentError(
            f"{n_t} antennas need predictors up to order {n_t - 1}, have {predictor.order}"
        )
    a = np.eye(n_t)
    for i in range(1, n_t):
        a[i, :i] = predictor.filter(i)[::-1]
    return a.T.astype(complex)


def predictor_for(cfg):
    """Predictor of order ``n_t - 1`` for the channel described by ``cfg``."""
    r = autocorrelation_sequence(cfg.rho, cfg.sigma2_h, cfg.n_t)
    return levinson_durbin(r)

"""Model parameters, exponential spacings and shared probability helpers.

For ``n`` i.i.d. Exp(lambda) node positions the gaps between consecutive
order statistics ``Y_i = X_(i+1) - X_(i)`` are independent exponentials with
rates ``(n - i) * lambda``. Every exact computation in this package is built
on that fact.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

CLAMP_SLACK = 1e-9
LOG_SWITCH = 1e-300


class ParameterError(ValueError):
    """Invalid model parameter. ``code`` is stable and names the field."""

    def __init__(self, code: str, field: str, message: str):
        super().__init__(message)
        self.code = code
        self.field = field


class ConsistencyError(ArithmeticError):
    """A computed probability left [0, 1] by more than rounding slack."""


class Variant(str, enum.Enum):
    EXPONENTIAL = "exponential"
    DOUBLE_EXPONENTIAL = "double-exponential"
    TRUNCATED = "truncated"
    GSTAR = "gstar"


@dataclass(frozen=True)
class ModelParams:
    """Node placement model.

    ``T`` is the truncation point (``TRUNCATED``; also used by ``GSTAR`` to
    derive the parent sample size). ``N`` is the parent sample size of the
    G* construction, defaulting to ``floor(n / p)`` with ``p = 1 - exp(-lam*T)``.
    """

    variant: Variant
    n: int
    lam: float
    r: float
    T: float | None = None
    N: int | None = None

    @property
    def p(self) -> float | None:
        if self.T is None:
            return None
        return -math.expm1(-self.lam * self.T)

    def as_dict(self) -> dict:
        return {
            "model": self.variant.value,
            "n": self.n,
            "lambda": self.lam,
            "r": self.r,
            "T": self.T,
            "N": self.N,
        }


def default_parent_size(n: int, lam: float, T: float) -> int:
    """``floor(n / p)`` with ``p = 1 - exp(-lam*T)``."""
    p = -math.expm1(-lam * T)
    return math.floor(n / p)


def validate_params(params: ModelParams) -> ModelParams:
    """Check invariants and fill in the default parent size ``N``.

    Raises :class:`ParameterError` with codes ``E_N``, ``E_LAMBDA``, ``E_R``,
    ``E_T`` or ``E_PARENT``.
    """
    variant = Variant(params.variant)
    n, lam, r, T, N = params.n, params.lam, params.r, params.T, params.N
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ParameterError("E_N", "n", "n must be ≥ 1")
    if not (lam > 0) or math.isinf(lam):
        raise ParameterError("E_LAMBDA", "lambda", "lambda must be > 0")
    if not (r >= 0):
        raise ParameterError("E_R", "r", "r must be ≥ 0")
    if T is not None and not (T > 0):
        raise ParameterError("E_T", "T", "T must be > 0")
    if variant is Variant.TRUNCATED and T is None:
        raise ParameterError("E_T", "T", "T must be > 0 for the truncated model")
    if variant in (Variant.TRUNCATED, Variant.GSTAR) and N is None:
        if T is None:
            raise ParameterError("E_T", "T", "T is required to derive N for the G* model")
        N = default_parent_size(int(n), lam, T)
    if N is not None and (int(N) != N or N < n):
        raise ParameterError("E_PARENT", "N", "N must be ≥ n")
    return replace(params, variant=variant, n=int(n), N=None if N is None else int(N))


@dataclass(frozen=True)
class SpacingRates:
    rates: np.ndarray

    def __len__(self) -> int:
        return len(self.rates)

    def means(self) -> np.ndarray:
        return 1.0 / self.rates


def spacing_rates(n: int, lam: float) -> SpacingRates:
    """Rates ``[(n-1)lam, (n-2)lam, ..., lam]`` of the spacings ``Y_1..Y_{n-1}``."""
    if n < 2:
        raise ValueError("no spacings: n must be ≥ 2")
    return SpacingRates(lam * np.arange(n - 1, 0, -1, dtype=float))


def log1mexp(x):
    """``log(1 - exp(-x))`` for ``x >= 0``, accurate at both ends."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(
            x > math.log(2.0),
            np.log1p(-np.exp(-x)),
            np.log(-np.expm1(-x)),
        )
    return out if out.ndim else float(out)


def clamp_probability(p: float) -> float:
    if p < -CLAMP_SLACK or p > 1.0 + CLAMP_SLACK or math.isnan(p):
        raise ConsistencyError(f"probability {p!r} outside [0, 1]")
    return min(1.0, max(0.0, p))


def product_of_probabilities(factors) -> float:
    """Product of probabilities, switching to log space if any factor is tiny."""
    f = np.asarray(factors, dtype=float)
    if f.size == 0:
        return 1.0
    if np.any(f == 0.0):
        return 0.0
    if np.min(f) < LOG_SWITCH or f.size > 64:
        return clamp_probability(math.exp(math.fsum(np.log(f))))
    return clamp_probability(float(np.prod(f)))


class ZetaTable:
    """Prefix sums of ``log P(Y_k <= r)`` for an ``n``-node exponential sample.

    Zero factors (``r = 0``) are counted separately so run probabilities stay
    O(1) without producing ``-inf - -inf``.
    """

    def __init__(self, n: int, lam: float, r: float):
        self.n = n
        k = np.arange(1, n, dtype=float)
        self.exponent = lam * r * (n - k)  # -log P(Y_k > r)
        if math.isinf(r):
            self.exponent = np.full(n - 1, math.inf)
        lz = log1mexp(self.exponent) if n > 1 else np.zeros(0)
        lz = np.atleast_1d(lz)
        zero = np.isneginf(lz)
        finite = np.where(zero, 0.0, lz)
        # _csum[k] = sum of log P(Y_m <= r) over m = 1..k
        self._csum = np.concatenate([[0.0], np.cumsum(finite)])
        self._czero = np.concatenate([[0], np.cumsum(zero)])

    def log_zeta(self, k: int) -> float:
        e = self.exponent[k - 1]
        return float(log1mexp(e))

    def log_run_product(self, i: int, j: int) -> float:
        """``log prod_{k=i}^{j-1} P(Y_k <= r)`` (empty product when ``j <= i``)."""
        if j <= i:
            return 0.0
        if self._czero[j - 1] - self._czero[i - 1] > 0:
            return -math.inf
        return float(self._csum[j - 1] - self._csum[i - 1])

    def run(self, i: int, j: int) -> float:
        """P(Y_i..Y_{j-2} <= r, Y_{j-1} > r)."""
        return math.exp(self.log_run_product(i, j - 1) - self.exponent[j - 2])

    def runs_from(self, i: int) -> np.ndarray:
        """``run(i, j)`` for ``j = i+1..n`` as an array."""
        js = np.arange(i + 1, self.n + 1)
        lp = self._csum[js - 2] - self._csum[i - 1]
        zeros = (self._czero[js - 2] - self._czero[i - 1]) > 0
        with np.errstate(invalid="ignore"):
            out = np.exp(lp - self.exponent[js - 2])
        out[zeros] = 0.0
        return out

    def all_connected_from(self, i: int) -> float:
        """P(Y_i..Y_{n-1} <= r)."""
        return math.exp(self.log_run_product(i, self.n))


def spacing_run_prob(n: int, lam: float, r: float, i: int, j: int) -> float:
    """P(Y_i <= r, ..., Y_{j-2} <= r, Y_{j-1} > r): the first gap wider than
    ``r`` at or after node ``i`` sits between nodes ``j-1`` and ``j``."""
    if not (1 <= i < j <= n):
        raise IndexError(f"need 1 <= i < j <= n, got i={i}, j={j}, n={n}")
    return clamp_probability(ZetaTable(n, lam, r).run(i, j))

"""
OVERRIDERADAR - Numerics
Standard normal functions, Gaussian-weighted quadrature and bracketed root finding.
"""

import math
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import hermite_e
from scipy import optimize, special

import config
from errors import BracketingError, DomainError, InvalidArgumentError, NumericError

logger = logging.getLogger(__name__)

MIN_QUADRATURE_NODES = 64


# =============================================================================
# NORMAL DISTRIBUTION
# =============================================================================

def _finite(x, name="x"):
    try:
        value = float(x)
    except (TypeError, ValueError):
        raise InvalidArgumentError(f"{name} must be a real number, got {x!r}")
    if not math.isfinite(value):
        raise InvalidArgumentError(f"{name} must be finite, got {value}")
    return value


def std_normal_cdf(x):
    """Phi(x)"""
    return float(special.ndtr(_finite(x)))


def std_normal_pdf(x):
    x = _finite(x)
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def std_normal_quantile(p):
    """Phi^{-1}(p) for 0 < p < 1"""
    p = _finite(p, "p")
    if not 0.0 < p < 1.0:
        raise DomainError(f"quantile needs 0 < p < 1, got {p}")
    x = float(special.ndtri(p))
    # one Newton step against our own cdf keeps the pair consistent
    density = std_normal_pdf(x)
    if density > 0.0:
        x -= (std_normal_cdf(x) - p) / density
    return x


# =============================================================================
# GAUSSIAN QUADRATURE
# =============================================================================

@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights for integrals against the standard normal density"""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1:
            raise InvalidArgumentError("nodes and weights must be 1-d arrays of equal length")
        if np.any(np.diff(self.nodes) <= 0):
            raise InvalidArgumentError("quadrature nodes must be strictly increasing")
        if np.any(self.weights <= 0):
            raise InvalidArgumentError("quadrature weights must be positive")
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise InvalidArgumentError("quadrature weights must sum to 1")
        self.nodes.flags.writeable = False
        self.weights.flags.writeable = False

    def __len__(self):
        return len(self.nodes)


@lru_cache(maxsize=8)
def gauss_hermite_rule(n_nodes=None):
    """Probabilists' Gauss-Hermite rule, weights normalized to sum to one"""
    n_nodes = n_nodes or config.QUADRATURE_NODES
    if n_nodes < MIN_QUADRATURE_NODES:
        raise InvalidArgumentError(
            f"at least {MIN_QUADRATURE_NODES} quadrature nodes required, got {n_nodes}"
        )
    nodes, weights = hermite_e.hermegauss(n_nodes)
    return QuadratureRule(np.asarray(nodes, dtype=float), weights / weights.sum())


def integrate_gaussian(f, rule=None):
    """Integral of phi(y) * f(y) dy.

    ``f`` is called once with the array of nodes and may return a scalar, an
    array with one value per node, or an array of shape (nodes, m) for m
    integrands at once.
    """
    rule = rule or gauss_hermite_rule()
    values = np.asarray(f(rule.nodes), dtype=float)
    if values.ndim == 0:
        values = np.full(rule.nodes.shape, float(values))
    if values.shape[0] != len(rule):
        raise InvalidArgumentError(
            f"integrand returned {values.shape[0]} values for {len(rule)} nodes"
        )
    if not np.all(np.isfinite(values)):
        raise NumericError("integrand is not finite at some quadrature node")
    result = rule.weights @ values
    return float(result) if np.ndim(result) == 0 else result


# =============================================================================
# ROOT FINDING
# =============================================================================

def find_root(f, lo, hi, tol=1e-12, max_iter=500):
    """Root of a continuous ``f`` on [lo, hi] with f(lo) * f(hi) <= 0"""
    lo, hi = _finite(lo, "lo"), _finite(hi, "hi")
    if lo > hi:
        lo, hi = hi, lo
    f_lo, f_hi = float(f(lo)), float(f(hi))
    if not (math.isfinite(f_lo) and math.isfinite(f_hi)):
        raise NumericError(f"function not finite on bracket [{lo}, {hi}]")
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0.0:
        raise BracketingError(
            f"no sign change on [{lo}, {hi}]: f(lo)={f_lo:.3g}, f(hi)={f_hi:.3g}"
        )
    try:
        root, info = optimize.brentq(
            f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps,
            maxiter=max_iter, full_output=True, disp=False,
        )
    except ValueError as e:
        raise NumericError(f"root finding failed: {e}")
    if not info.converged:
        raise NumericError(f"root finding did not converge after {info.iterations} iterations")
    logger.debug("root %.15g on [%g, %g] after %d iterations", root, lo, hi, info.iterations)
    return min(max(float(root), lo), hi)

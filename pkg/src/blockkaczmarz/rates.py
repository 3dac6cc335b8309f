"""Theoretical per-iteration contraction factors for the Kaczmarz variants.

Every bound has the form ``E d(x_j, S)^2 <= factor^j d(x_0, S)^2``; the
functions here evaluate ``factor`` from a :class:`RateParams`.
"""

from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidParams, RankDeficient
from .linalg import min_singular_value, spectral_norm

VARIANTS = ("sv", "ll", "block", "thm1", "cor1", "thm2")

_REQUIRED = {
    "sv": ("frob_norm_sq", "sigma_min"),
    "ll": ("L", "frob_norm_sq"),
    "block": ("sigma_min", "beta", "m"),
    "thm1": ("L", "n_i", "beta", "m"),
    "cor1": ("L", "n_i", "C", "spec_norm_sq_eq", "n"),
    "thm2": ("L", "beta_p", "m_p", "beta", "m"),
}

_DESCRIPTION = {
    "sv": "randomized Kaczmarz, equalities: 1 - sigma_min^2 / ||A||_F^2",
    "ll": "single-row method, mixed: 1 - 1 / (L^2 ||A||_F^2)",
    "block": "block Kaczmarz, equalities: 1 - sigma_min^2 / (beta m)",
    "thm1": "algorithm 1: 1 - 1 / (L^2 (n_i + beta m))",
    "cor1": "algorithm 1 with a good paving: 1 - 1 / (L^2 (n_i + C ||A_eq||^2 log(1 + n)))",
    "thm2": "algorithm 2, obtuse inequality paving: 1 - 1 / (L^2 (beta' m' + beta m))",
}


@dataclass
class RateParams:
    """Quantities entering the bounds; unset fields stay ``None``."""

    L: float = None
    n: int = None
    n_i: int = None
    beta: float = None
    m: int = None
    beta_p: float = None
    m_p: int = None
    sigma_min: float = None
    frob_norm_sq: float = None
    spec_norm_sq_eq: float = None
    C: float = 1.0

    def to_dict(self):
        return asdict(self)


def describe(variant):
    return _DESCRIPTION[variant]


def _get(p, names, variant):
    missing = [k for k in names if getattr(p, k) is None]
    if missing:
        raise InvalidParams(f"variant {variant!r} needs {', '.join(missing)}")
    vals = [np.float64(getattr(p, k)) for k in names]
    if any(v < 0 or not np.isfinite(v) for v in vals):
        raise InvalidParams(f"variant {variant!r}: parameters must be finite and nonnegative")
    return vals


def theoretical_rate(variant, p):
    """Per-iteration contraction factor of `variant` (one of :data:`VARIANTS`).

    Raises
    ------
    InvalidParams
        If a needed field is missing or the factor falls outside ``[0, 1)``.
    """
    if variant not in _REQUIRED:
        raise InvalidParams(f"unknown variant {variant!r}; choose from {VARIANTS}")
    vals = _get(p, _REQUIRED[variant], variant)
    with np.errstate(divide="ignore", invalid="ignore"):
        if variant == "sv":
            frob, smin = vals
            factor = 1.0 - smin**2 / frob
        elif variant == "ll":
            L, frob = vals
            factor = 1.0 - 1.0 / (L**2 * frob)
        elif variant == "block":
            smin, beta, m = vals
            factor = 1.0 - smin**2 / (beta * m)
        elif variant == "thm1":
            L, n_i, beta, m = vals
            factor = 1.0 - 1.0 / (L**2 * (n_i + beta * m))
        elif variant == "cor1":
            L, n_i, C, spec_eq, n = vals
            factor = 1.0 - 1.0 / (L**2 * (n_i + C * spec_eq * np.log1p(n)))
        else:
            L, beta_p, m_p, beta, m = vals
            factor = 1.0 - 1.0 / (L**2 * (beta_p * m_p + beta * m))
    if not (np.isfinite(factor) and 0.0 <= factor < 1.0):
        raise InvalidParams(f"variant {variant!r} gives factor {factor!r} outside [0, 1)")
    return float(factor)


def epoch_comparison(p):
    """Per-epoch rate decrements of the simple and block methods.

    The simple method spends about ``n`` iterations per epoch at decrement
    ``1 / (L^2 n)``; Algorithm 1 spends ``n_i + m`` at ``1 / (L^2 (n_i + beta m))``.
    Also reports whether Algorithm 1 is faster per iteration,
    ``n_i + beta m < n``.
    """
    L, n, n_i, beta, m = _get(p, ("L", "n", "n_i", "beta", "m"), "epoch")
    rho_s = 1.0 / (L**2 * n)
    rho_b = 1.0 / (L**2 * (n_i + beta * m))
    return {
        "rho_simple": rho_s,
        "rho_block": rho_b,
        "epoch_simple": n * rho_s,
        "epoch_block": (n_i + m) * rho_b,
        "block_faster_per_iteration": bool(n_i + beta * m < n),
    }


def hoffman_equality_case(A_eq):
    """Hoffman constant ``1 / sigma_min(A_eq)`` of a full column rank equality system."""
    smin = min_singular_value(A_eq)
    if smin <= 1e-10:
        raise RankDeficient(f"sigma_min = {smin:.3e}; Hoffman constant has no closed form here")
    return 1.0 / smin


def rate_params(sys, T_eq=None, T_ineq=None, L=None, C=1.0):
    """Collect :class:`RateParams` from a system and its pavings.

    `L` defaults to ``1 / sigma_min(A)``, which is exact only for
    equality-only systems of full column rank.
    """
    A = sys.A
    smin = min_singular_value(A)
    if L is None and sys.n_i == 0 and smin > 1e-10:
        L = 1.0 / smin
    return RateParams(
        L=L,
        n=sys.n,
        n_i=sys.n_i,
        beta=None if T_eq is None else T_eq.beta,
        m=None if T_eq is None else T_eq.m,
        beta_p=None if T_ineq is None else T_ineq.beta,
        m_p=None if T_ineq is None else T_ineq.m,
        sigma_min=smin,
        frob_norm_sq=float(np.sum(A * A)),
        spec_norm_sq_eq=spectral_norm(sys.A_eq) ** 2 if sys.n_e else 0.0,
        C=C,
    )

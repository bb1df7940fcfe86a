"""Samplable laws with a moderate decreasing tail.

The tail model is ``u**(-beta) * (ln u)**gamma * V(ln u)`` for u >= e.
That formula is only a tail; to simulate we complete it into a genuine
law: survival 1 on [0, u_star], then exactly proportional to the tail
formula beyond, symmetrized by an independent random sign so the law is
centered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, NumericError
from .slowvary import ONE, SlowlyVarying, format_sv, sv_eval, sv_log_deriv

_E = math.e

# one Philox counter block (4 doubles) per sample index; columns 0/1 hold
# the magnitude and sign uniforms, 2/3 are reserved so the splittable
# stream stays aligned per index
_DOUBLES_PER_INDEX = 4


@dataclass(frozen=True)
class MdtParams:
    """Tail parameters (beta, gamma, V) plus the activation point u_star.

    Do not call directly with an unchecked u_star; use :func:`make_mdt`,
    which resolves the default activation point and validates monotonicity.
    """

    beta: float
    gamma: float
    v: SlowlyVarying = ONE
    u_star: float = _E

    def __post_init__(self):
        if not (np.isfinite(self.beta) and self.beta > 2):
            raise DomainError(f"beta must be > 2, got {self.beta}")
        if not np.isfinite(self.gamma):
            raise DomainError(f"gamma must be finite, got {self.gamma}")
        if not (np.isfinite(self.u_star) and self.u_star >= _E):
            raise DomainError(f"u_star must be >= e, got {self.u_star}")

    def describe(self) -> str:
        return (f"beta={self.beta:g} gamma={self.gamma:g} "
                f"V={format_sv(self.v)} u_star={self.u_star:.12g}")


def _log_tail_y(params: MdtParams, y):
    """ln of the tail formula as a function of y = ln u, y >= 1."""
    return -params.beta * y + params.gamma * np.log(y) + np.log(sv_eval(params.v, y))


def _log_tail_slope_y(params: MdtParams, y):
    """d/dy of the log tail formula."""
    return -params.beta + params.gamma / np.asarray(y, dtype=float) + sv_log_deriv(params.v, y)


def make_mdt(beta: float, gamma: float, v: SlowlyVarying = ONE,
             u_star: Optional[float] = None) -> MdtParams:
    """Build MdtParams, resolving the default activation point.

    The default u_star is the smallest u >= e at which the tail formula is
    <= 1 and nonincreasing from there on, located by a sign scan of the
    log-tail slope on a geometric grid followed by bisection.
    """
    probe = MdtParams(beta, gamma, v, _E)
    if u_star is None:
        y_star = _default_y_star(probe)
        u_star = float(math.exp(y_star))
    params = MdtParams(beta, gamma, v, float(u_star))
    _validate_activation(params)
    return params


def _default_y_star(probe: MdtParams) -> float:
    ys = np.geomspace(1.0, 400.0, 4096)
    slopes = _log_tail_slope_y(probe, ys)
    pos = np.nonzero(slopes > 0)[0]
    if pos.size == 0:
        y0 = 1.0
    else:
        i = pos[-1]
        if i + 1 >= ys.size:
            raise NumericError("tail formula still increasing at the scan edge",
                               {"y_max": float(ys[-1])})
        y0 = brentq(lambda y: _log_tail_slope_y(probe, y), ys[i], ys[i + 1],
                    xtol=1e-12, rtol=1e-14)
    if _log_tail_y(probe, y0) <= 0:
        return max(1.0, y0)
    # the peak value exceeds 1: activate where the formula drops back to 1
    y_hi = y0 + 1.0
    while _log_tail_y(probe, y_hi) > 0:
        y_hi *= 2.0
        if y_hi > 1e6:
            raise NumericError("tail formula never drops below 1", {"y": y_hi})
    return brentq(lambda y: _log_tail_y(probe, y), y0, y_hi, xtol=1e-12, rtol=1e-14)


def _validate_activation(params: MdtParams) -> None:
    y_star = math.log(params.u_star)
    if _log_tail_y(params, y_star) > 1e-9:
        raise DomainError(
            f"tail formula exceeds 1 at u_star={params.u_star:g}; pick a larger u_star")
    ys = np.geomspace(y_star, max(400.0, 4 * y_star), 2048)
    if np.any(_log_tail_slope_y(params, ys) > 1e-9):
        raise DomainError(
            f"tail formula is not nonincreasing beyond u_star={params.u_star:g}")


def tail_formula(params: MdtParams, u):
    """u**(-beta) (ln u)**gamma V(ln u), defined for u >= e.  Un-clamped."""
    u_arr = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u_arr)):
        raise DomainError("tail_formula requires finite u")
    if np.any(u_arr < _E * (1 - 1e-12)):
        raise DomainError("tail_formula requires u >= e")
    out = np.exp(_log_tail_y(params, np.log(np.maximum(u_arr, _E))))
    return float(out) if out.ndim == 0 else out


def log_survival(params: MdtParams, u):
    """ln S(u) for the completed law (0 on [0, u_star])."""
    u_arr = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u_arr)) or np.any(u_arr < 0):
        raise DomainError("survival requires finite u >= 0")
    y_star = math.log(params.u_star)
    y = np.log(np.maximum(u_arr, params.u_star))
    out = _log_tail_y(params, y) - _log_tail_y(params, y_star)
    out = np.minimum(out, 0.0)
    return float(out) if out.ndim == 0 else out


def survival(params: MdtParams, u):
    """P(|xi| > u): 1 on [0, u_star], proportional to the tail formula beyond."""
    out = np.exp(log_survival(params, u))
    return float(out) if np.ndim(out) == 0 else out


def quantile(params: MdtParams, q):
    """Inverse survival: the u with survival(u) = q, for q in (0, 1].

    Safeguarded Newton on the y = ln u axis using the exact log-tail slope;
    vectorized over q.
    """
    q_arr = np.atleast_1d(np.asarray(q, dtype=float))
    if not np.all(np.isfinite(q_arr)) or np.any(q_arr <= 0) or np.any(q_arr > 1):
        raise DomainError("quantile requires q in (0, 1]")
    y_star = math.log(params.u_star)
    lnq = np.log(q_arr)
    target = lnq + _log_tail_y(params, y_star)

    lo = np.full_like(lnq, y_star)
    # log tail falls at least (beta - slack) per unit y past the activation
    hi = y_star + np.maximum(-lnq, 1e-12) / max(params.beta - 2.0, 0.5) + 2.0
    for _ in range(200):
        bad = _log_tail_y(params, hi) > target
        if not np.any(bad):
            break
        hi = np.where(bad, y_star + 2.0 * (hi - y_star), hi)
    else:
        raise NumericError("quantile bracket growth failed", {"q_min": float(q_arr.min())})

    y = np.minimum(hi, lo + np.maximum(-lnq, 0.0) / params.beta)
    # |S - q| <= q |f| for small f, so this log-space tolerance delivers
    # absolute accuracy 1e-13 in probability
    f_tol = np.minimum(1e-13 / q_arr, 0.3) + 3e-15
    flat_y = y.reshape(-1)
    flat_lo, flat_hi = lo.reshape(-1), hi.reshape(-1)
    flat_target, flat_tol = np.asarray(target).reshape(-1), f_tol.reshape(-1)
    active = np.arange(flat_y.size)
    for _ in range(100):
        ya = flat_y[active]
        f = _log_tail_y(params, ya) - flat_target[active]
        done = np.abs(f) <= flat_tol[active]
        if np.any(done):
            keep = ~done
            active = active[keep]
            if active.size == 0:
                break
            ya, f = ya[keep], f[keep]
        lo_a, hi_a = flat_lo[active], flat_hi[active]
        lo_a = np.where(f > 0, ya, lo_a)
        hi_a = np.where(f < 0, ya, hi_a)
        slope = _log_tail_slope_y(params, ya)
        with np.errstate(divide="ignore", invalid="ignore"):
            y_new = ya - f / slope
        fallback = ~np.isfinite(y_new) | (y_new <= lo_a) | (y_new >= hi_a)
        y_new = np.where(fallback, 0.5 * (lo_a + hi_a), y_new)
        flat_lo[active], flat_hi[active], flat_y[active] = lo_a, hi_a, y_new
    y = flat_y.reshape(y.shape)
    achieved = np.exp(_log_tail_y(params, y) - _log_tail_y(params, y_star))
    err = np.abs(achieved - q_arr)
    if np.any(err > 1e-10):
        raise NumericError("quantile failed to reach tolerance",
                           {"max_abs_err": float(err.max())})
    y = np.where(q_arr == 1.0, y_star, y)
    out = np.exp(y)
    out = np.where(q_arr == 1.0, params.u_star, out)
    return float(out[0]) if np.ndim(q) == 0 else out


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """Reproducible i.i.d. draws from the completed, symmetrized law."""

    seed: int
    offset: int
    params: MdtParams
    values: np.ndarray = field(repr=False)

    def __len__(self):
        return self.values.size

    def to_csv(self, path) -> None:
        header = (f"# modtail sample batch\n# {self.params.describe()}\n"
                  f"# seed={self.seed} offset={self.offset} n={self.values.size}\nvalue")
        np.savetxt(path, self.values, fmt="%.17g", header=header, comments="")


def _uniforms(seed: int, n: int, offset: int) -> np.ndarray:
    bitgen = np.random.Philox(key=np.uint64(seed))
    if offset:
        bitgen = bitgen.advance(offset)
    return np.random.Generator(bitgen).random((n, _DOUBLES_PER_INDEX))


def sample(params: MdtParams, seed: int, n: int, offset: int = 0) -> SampleBatch:
    """n i.i.d. draws of sign * quantile(U), U uniform on (0, 1].

    The stream is counter-based: draws for indices [offset, offset+n)
    are identical whether produced in one call or split across workers.
    """
    if n < 1:
        raise DomainError("sample requires n >= 1")
    u = _uniforms(seed, n, offset)
    mag = quantile(params, 1.0 - u[:, 0])
    sign = np.where(u[:, 1] < 0.5, -1.0, 1.0)
    return SampleBatch(seed=seed, offset=offset, params=params, values=sign * mag)


def sample_values(params: MdtParams, seed: int, n: int, offset: int = 0) -> np.ndarray:
    """Bare array version of :func:`sample` for hot loops."""
    return sample(params, seed, n, offset).values

"""Uniform tail bounds for normalized sums.

Q(u) = sup_n P(|S_n| > u), S_n = n**(-1/2) * sum of n i.i.d. centered
copies.  Two upper bounds are provided: the conjugate form
exp(-tau*(ln u)) driven by the theta envelope, and closed forms per
regime.  Both carry explicit constants; the theory fixes only the shape
of the bounds, so every constant is either derived from the Rosenthal
moment chain ("pessimistic" mode) or fitted to a reference simulation
("calibrated" mode).

The closed forms for the gamma = -1 and gamma < -1 regimes include the
u**(-beta) factor; without it they would not even decay in u, and the
matching lower bound decays like u**(-beta).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Optional

import numpy as np

from .distribution import MdtParams, log_survival, survival
from .errors import DomainError
from .fenchel import GeneratingFunction, fenchel
from .moments import (DELTA_P, default_p_grid, moment_from_tail, theta,
                      theta_regime)
from .slowvary import limit_at_infinity_is_zero, sv_eval

_E = math.e
_EE = math.e ** math.e

ROSENTHAL_C0 = 2.0


def rosenthal_constant(p: float, c0: float = ROSENTHAL_C0) -> float:
    """(c0 * p / ln(max(p, 2)))**p, the known growth order of optimal
    Rosenthal constants."""
    if p < 2:
        raise DomainError("rosenthal_constant requires p >= 2")
    return (c0 * p / math.log(max(p, 2.0))) ** p


def rosenthal_sum_moment(params: MdtParams, p: float, moment2: float,
                         momentp: float, c0: float = ROSENTHAL_C0) -> float:
    """Bound on sup_n E|S_n|**p from the variance and p-th moment terms.

    The n**(1 - p/2) factor of the raw inequality is <= 1 for p >= 2, so
    the bound is n-free.
    """
    if not (2 <= p <= params.beta - DELTA_P):
        raise DomainError(f"p must lie in [2, beta - {DELTA_P}], got {p}")
    if moment2 <= 0 or momentp <= 0:
        raise DomainError("moments must be positive")
    return rosenthal_constant(p, c0) * max(moment2 ** (p / 2.0), momentp)


@dataclass(frozen=True, eq=False)
class SumMomentEnvelope:
    """p-grid envelope of sup_n E|S_n|**p."""

    params: MdtParams
    p_grid: np.ndarray
    single_moments: np.ndarray    # E|xi|**p
    envelope: np.ndarray

    @classmethod
    def compute(cls, params: MdtParams, p_grid=None,
                c0: float = ROSENTHAL_C0) -> "SumMomentEnvelope":
        if p_grid is None:
            p_grid = default_p_grid(params, n=17)
        p_grid = np.asarray(p_grid, dtype=float)
        m2 = moment_from_tail(params, 2.0)
        singles = np.array([moment_from_tail(params, p) for p in p_grid])
        env = np.array([rosenthal_sum_moment(params, p, m2, m, c0)
                        for p, m in zip(p_grid, singles)])
        return cls(params=params, p_grid=p_grid, single_moments=singles, envelope=env)


@lru_cache(maxsize=64)
def c1_pessimistic(params: MdtParams, c0: float = ROSENTHAL_C0) -> float:
    """Analytic constant for sup_n E|S_n|**p <= C1 * theta(p).

    Max over a p-grid of the Rosenthal bound divided by the floored
    envelope; finite because p stays in the bounded interval [2, beta).
    """
    env = SumMomentEnvelope.compute(params, c0=c0)
    thetas = theta(params, env.p_grid)
    return float(np.max(env.envelope / thetas))


def closed_shape(params: MdtParams, u):
    """The constant-free closed-form shape per regime (un-clamped)."""
    u_arr = np.asarray(u, dtype=float)
    regime = theta_regime(params.gamma)
    u_min = _EE if regime == "B" else _E
    if np.any(u_arr < u_min * (1 - 1e-12)):
        raise DomainError(f"closed-form bound requires u >= {u_min:g} in regime {regime}")
    if regime == "C" and not limit_at_infinity_is_zero(params.v):
        raise DomainError("regime gamma < -1 requires V vanishing at infinity")
    y = np.log(np.maximum(u_arr, u_min))
    base = u_arr ** (-params.beta) * sv_eval(params.v, y)
    if regime == "A":
        out = base * y ** (params.gamma + 1.0)
    elif regime == "B":
        out = base * np.log(y)
    else:
        out = base
    return float(out) if out.ndim == 0 else out


def q_bound_closed(params: MdtParams, u, c: Optional[float] = None):
    """Closed-form upper bound on Q(u), clamped to [0, 1].

    c defaults to the pessimistic Rosenthal-chain constant; pass a
    calibrated value to tighten.
    """
    if c is None:
        c = c1_pessimistic(params)
    out = np.clip(c * closed_shape(params, u), 0.0, 1.0)
    return float(out) if np.ndim(out) == 0 else out


def q_bound_fenchel(params: MdtParams, u, c1: Optional[float] = None):
    """Conjugate-form upper bound exp(-tau*(ln(u / C_shift))).

    tau(p) = ln theta(p) (floored); the moment constant C1 is folded into
    the argument as C_shift = C1**(1/p*) at the active argmax p*.
    """
    if c1 is None:
        c1 = c1_pessimistic(params)
    psi = GeneratingFunction.from_theta(params)
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(u_arr < _E * (1 - 1e-12)):
        raise DomainError("q_bound_fenchel requires u >= e")
    out = np.empty_like(u_arr)
    for i, ui in enumerate(u_arr):
        pt = fenchel(psi, math.log(ui))
        c_shift = c1 ** (1.0 / pt.argmax)
        y_shift = math.log(ui / c_shift)
        if y_shift < 1.0:
            out[i] = 1.0
            continue
        out[i] = np.clip(math.exp(-fenchel(psi, y_shift).value), 0.0, 1.0)
    return float(out[0]) if np.ndim(u) == 0 else out


def lower_witness(params: MdtParams, u):
    """The n = 1 term of the sup: survival of the completed law itself,
    a rigorous lower bound on Q(u)."""
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr < params.u_star * (1 - 1e-12)):
        raise DomainError("lower_witness requires u >= u_star")
    return survival(params, u)


@dataclass(frozen=True, eq=False)
class TailCurve:
    """A u -> bound/estimate curve with provenance and constants."""

    fn: Callable[[np.ndarray], np.ndarray]
    provenance: str
    u_min: float
    constants: Dict[str, float] = field(default_factory=dict)

    def __call__(self, u):
        return self.fn(u)

    def is_upper_bound(self) -> bool:
        return self.provenance != "lower-witness"

    def evaluate(self, u_grid: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(u_grid, dtype=float)), dtype=float)

    def to_csv(self, path, u_grid: np.ndarray, header_extra: str = "") -> None:
        vals = self.evaluate(u_grid)
        header = (f"# modtail tail curve provenance={self.provenance}\n"
                  f"# constants={json.dumps(self.constants, sort_keys=True)}\n"
                  f"{header_extra}u,bound")
        np.savetxt(path, np.column_stack([u_grid, vals]), fmt="%.17g",
                   delimiter=",", header=header, comments="")


def closed_curve(params: MdtParams, c: Optional[float] = None,
                 mode: str = "pessimistic") -> TailCurve:
    c_val = c1_pessimistic(params) if c is None else float(c)
    regime = theta_regime(params.gamma)
    return TailCurve(
        fn=lambda u: q_bound_closed(params, u, c=c_val),
        provenance=f"closed-form-ex{'1' if regime == 'A' else '2' if regime == 'B' else '3'}",
        u_min=_EE if regime == "B" else _E,
        constants={"c": c_val, "mode": mode})


def fenchel_curve_bound(params: MdtParams, c1: Optional[float] = None,
                        mode: str = "pessimistic") -> TailCurve:
    c1_val = c1_pessimistic(params) if c1 is None else float(c1)
    return TailCurve(fn=lambda u: q_bound_fenchel(params, u, c1=c1_val),
                     provenance="fenchel-thm21", u_min=_E,
                     constants={"c1": c1_val, "mode": mode})


def witness_curve(params: MdtParams) -> TailCurve:
    return TailCurve(fn=lambda u: lower_witness(params, u),
                     provenance="lower-witness", u_min=params.u_star, constants={})


def calibrate_closed_constant(params: MdtParams, u_grid: np.ndarray,
                              qhat: np.ndarray, slack: float) -> float:
    """Smallest constant making the closed bound dominate qhat + slack on
    a reference simulation.  Cells where qhat + slack >= 1 are covered by
    the [0, 1] clamp and do not constrain the constant."""
    u_grid = np.asarray(u_grid, dtype=float)
    qhat = np.asarray(qhat, dtype=float)
    shape = closed_shape(params, u_grid)
    need = qhat + slack
    active = need < 1.0
    if not np.any(active):
        return 1.0
    return float(np.max(need[active] / shape[active]))
